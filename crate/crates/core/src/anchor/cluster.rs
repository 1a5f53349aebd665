//! Density-based clustering of frontier pixel features (DBSCAN, fixed eps)
//! in the scaled space `(x/σpx, y/σpx, cos φ/σφ, sin φ/σφ, g/σg)`.

use std::collections::HashMap;

/// One frontier pixel with its anchoring features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPixelFeature {
    pub x: usize,
    pub y: usize,
    /// Viewing angle on the image plane, radians in (−π, π].
    pub phi: f64,
    pub gain: f64,
    pub depth_fg: f64,
    pub depth_bg: f64,
    /// Rendered range of this pixel, meters.
    pub range: f64,
}

impl FrontierPixelFeature {
    /// Lift depth of the pixel: midway between foreground and background.
    #[inline]
    pub fn lift_depth(&self) -> f64 {
        (self.depth_fg + self.depth_bg) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterParams {
    pub sigma_px: f64,
    pub sigma_phi: f64,
    pub sigma_g: f64,
    pub eps: f64,
    pub min_cluster_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier2DCluster {
    /// Medoid pixel.
    pub centroid_px: (usize, usize),
    pub phi_bar: f64,
    pub gain_bar: f64,
    pub depth_bar: f64,
    pub depth_fg: f64,
    pub depth_bg: f64,
    /// Rendered range at the medoid pixel.
    pub ray_range: f64,
    pub size: usize,
}

fn scaled(f: &FrontierPixelFeature, p: &ClusterParams) -> [f64; 5] {
    [
        f.x as f64 / p.sigma_px,
        f.y as f64 / p.sigma_px,
        f.phi.cos() / p.sigma_phi,
        f.phi.sin() / p.sigma_phi,
        f.gain / p.sigma_g,
    ]
}

fn dist2(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster labels per feature (`None` for noise), numbered in order of
/// first core point.
pub fn dbscan_labels(features: &[FrontierPixelFeature], p: &ClusterParams) -> Vec<Option<usize>> {
    let pts: Vec<[f64; 5]> = features.iter().map(|f| scaled(f, p)).collect();
    let eps2 = p.eps * p.eps;
    // spatial hash on the pixel coordinates: only points within eps in
    // (x, y) can be neighbours
    let cell = |q: &[f64; 5]| ((q[0] / p.eps).floor() as i64, (q[1] / p.eps).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, q) in pts.iter().enumerate() {
        buckets.entry(cell(q)).or_default().push(i);
    }
    let neighbours = |i: usize| -> Vec<usize> {
        let (cx, cy) = cell(&pts[i]);
        let mut out = Vec::new();
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(b) = buckets.get(&(cx + dx, cy + dy)) {
                    out.extend(b.iter().copied().filter(|&j| dist2(&pts[i], &pts[j]) <= eps2));
                }
            }
        }
        out.sort_unstable();
        out
    };

    let min_pts = p.min_cluster_size.max(1);
    let mut labels: Vec<Option<usize>> = vec![None; pts.len()];
    let mut visited = vec![false; pts.len()];
    let mut next = 0;
    for i in 0..pts.len() {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let n = neighbours(i);
        if n.len() < min_pts {
            continue;
        }
        let label = next;
        next += 1;
        labels[i] = Some(label);
        let mut queue = n;
        let mut head = 0;
        while head < queue.len() {
            let j = queue[head];
            head += 1;
            if labels[j].is_none() {
                labels[j] = Some(label);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let nj = neighbours(j);
            if nj.len() >= min_pts {
                queue.extend(nj);
            }
        }
    }
    labels
}

/// Clusters `features` and summarises every cluster of at least
/// `min_cluster_size` members. Output is sorted by medoid pixel. Features
/// are clustered in pixel order, so the result does not depend on their
/// input order.
pub fn cluster_frontier_pixels(features: &[FrontierPixelFeature], p: &ClusterParams) -> Vec<Frontier2DCluster> {
    let mut sorted = features.to_vec();
    sorted.sort_by_key(|f| (f.y, f.x));
    let features = &sorted[..];
    let labels = dbscan_labels(features, p);
    let n_labels = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
    for (i, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            members[*l].push(i);
        }
    }
    let mut out: Vec<Frontier2DCluster> = members
        .iter()
        .filter(|m| !m.is_empty() && m.len() >= p.min_cluster_size)
        .map(|m| summarise(features, m))
        .collect();
    out.sort_by_key(|c| (c.centroid_px.1, c.centroid_px.0));
    out
}

fn summarise(features: &[FrontierPixelFeature], m: &[usize]) -> Frontier2DCluster {
    let n = m.len() as f64;
    let medoid = *m
        .iter()
        .min_by(|&&a, &&b| {
            let cost = |i: usize| -> f64 {
                let (xi, yi) = (features[i].x as f64, features[i].y as f64);
                m.iter().map(|&j| (xi - features[j].x as f64).hypot(yi - features[j].y as f64)).sum()
            };
            cost(a)
                .total_cmp(&cost(b))
                .then((features[a].y, features[a].x).cmp(&(features[b].y, features[b].x)))
        })
        .unwrap();
    let total_gain: f64 = m.iter().map(|&i| features[i].gain).sum();
    let (mut s, mut c) = (0.0, 0.0);
    for &i in m {
        let w = if total_gain > 0.0 { features[i].gain } else { 1.0 };
        s += w * features[i].phi.sin();
        c += w * features[i].phi.cos();
    }
    let mean = |f: &dyn Fn(&FrontierPixelFeature) -> f64| m.iter().map(|&i| f(&features[i])).sum::<f64>() / n;
    let mf = features[medoid];
    Frontier2DCluster {
        centroid_px: (mf.x, mf.y),
        phi_bar: crate::world::wrap_angle(s.atan2(c)),
        gain_bar: total_gain / n,
        depth_bar: mean(&|f| f.lift_depth()),
        depth_fg: mean(&|f| f.depth_fg),
        depth_bg: mean(&|f| f.depth_bg),
        ray_range: mf.range,
        size: m.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn feat(x: usize, y: usize, phi: f64, gain: f64) -> FrontierPixelFeature {
        FrontierPixelFeature {
            x,
            y,
            phi,
            gain,
            depth_fg: 1.0,
            depth_bg: 2.0,
            range: 2.0,
        }
    }

    fn params() -> ClusterParams {
        ClusterParams {
            sigma_px: 24.0,
            sigma_phi: 0.5,
            sigma_g: 100.0,
            eps: 1.0,
            min_cluster_size: 8,
        }
    }

    fn blob(cx: usize, cy: usize) -> Vec<FrontierPixelFeature> {
        (0..50).map(|i| feat(cx + i % 10, cy + i / 10, 0.3, 50.0)).collect()
    }

    #[test]
    fn two_blobs() {
        let mut f = blob(10, 10);
        f.extend(blob(210, 10));
        let c = cluster_frontier_pixels(&f, &params());
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].size, 50);
        let (x, y) = c[0].centroid_px;
        assert!((10..20).contains(&x) && (10..15).contains(&y));
        let (x, _) = c[1].centroid_px;
        assert!((210..220).contains(&x));
    }

    #[test]
    fn single_pixel_cluster() {
        let p = ClusterParams {
            min_cluster_size: 1,
            ..params()
        };
        let c = cluster_frontier_pixels(&[feat(3, 4, 1.0, 7.0)], &p);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].centroid_px, (3, 4));
        assert_eq!(c[0].gain_bar, 7.0);
        assert!((c[0].phi_bar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circular_mean_wraps() {
        let p = ClusterParams {
            min_cluster_size: 1,
            sigma_phi: 10.0,
            ..params()
        };
        let a = 170f64.to_radians();
        let f = vec![feat(0, 0, a, 1.0), feat(1, 0, -a, 1.0)];
        let c = cluster_frontier_pixels(&f, &p);
        assert_eq!(c.len(), 1);
        assert!((c[0].phi_bar.abs() - PI).abs() < 1e-9);
    }

    #[test]
    fn sparse_points_are_noise() {
        let f: Vec<_> = (0..5).map(|i| feat(i * 100, 0, 0.0, 1.0)).collect();
        assert!(cluster_frontier_pixels(&f, &params()).is_empty());
    }
}
