//! Nearest-frontier baseline over the robot map.

use nalgebra::Vector3;

use crate::world::{GridGeometry, Pose, VoxelGrid, VoxelState};

use super::path::{dijkstra, Traversability};

/// Known-Free voxels with at least one Unknown face neighbour.
pub fn map_frontier_voxels(map: &VoxelGrid) -> Vec<usize> {
    let g = map.geometry();
    (0..map.len())
        .filter(|&i| map.state(i) == VoxelState::Free && g.face_neighbors(g.coord(i)).any(|j| map.state(j) == VoxelState::Unknown))
        .collect()
}

/// 26-connected components of `voxels`, each sorted, ordered by their
/// smallest index.
pub fn cluster_26(g: &GridGeometry, voxels: &[usize]) -> Vec<Vec<usize>> {
    let mut member = vec![false; g.len()];
    for &i in voxels {
        member[i] = true;
    }
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    let mut sorted = voxels.to_vec();
    sorted.sort_unstable();
    for &s in &sorted {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            let c = g.coord(comp[k]);
            k += 1;
            for dz in -1i64..=1 {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                        if !g.contains_coord(n) {
                            continue;
                        }
                        let j = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
                        if member[j] && !seen[j] {
                            seen[j] = true;
                            comp.push(j);
                        }
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicParams {
    pub min_cluster_size: usize,
    pub inflation: f64,
    /// Search radius around cluster members for a reachable voxel, meters.
    pub reach_radius: f64,
    /// Clusters whose centroid lies this close to a previously reached
    /// goal are skipped, meters.
    pub revisit_radius: f64,
}

impl Default for ClassicParams {
    fn default() -> Self {
        Self {
            min_cluster_size: 10,
            inflation: 0.2,
            reach_radius: 0.3,
            revisit_radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicGoal {
    pub centroid: Vector3<f64>,
    /// Reachable voxel centre next to the cluster, closest to the centroid.
    pub target: Vector3<f64>,
    /// Viewing direction toward the Unknown side.
    pub direction: Vector3<f64>,
    /// Planned-path length to `target`, meters.
    pub path_length: f64,
    pub size: usize,
}

/// Goal at the nearest (by path length) reachable frontier cluster, or
/// `None` when no cluster qualifies.
pub fn classic_baseline_step(map: &VoxelGrid, robot: &Pose, p: &ClassicParams, reached: &[Vector3<f64>]) -> Option<ClassicGoal> {
    let g = *map.geometry();
    let frontier = map_frontier_voxels(map);
    if frontier.is_empty() {
        return None;
    }
    let tr = Traversability::new(map, p.inflation);
    let start = g.index(g.voxel_of(&robot.position)?);
    let dist = dijkstra(&tr, start);
    let reach = |i: usize| i == start || tr.is_free(i);
    let r = (p.reach_radius / g.resolution).ceil() as i64;
    let mut best: Option<ClassicGoal> = None;
    for comp in cluster_26(&g, &frontier) {
        if comp.len() < p.min_cluster_size {
            continue;
        }
        let centroid = comp.iter().map(|&i| g.center_of_index(i)).sum::<Vector3<f64>>() / comp.len() as f64;
        if reached.iter().any(|q| (q - centroid).norm() < p.revisit_radius) {
            continue;
        }
        let mut near: Vec<usize> = Vec::new();
        for &m in &comp {
            let c = g.coord(m);
            let cm = g.center(c);
            for dz in -r..=r {
                for dy in -r..=r {
                    for dx in -r..=r {
                        let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                        if !g.contains_coord(n) {
                            continue;
                        }
                        let j = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
                        if reach(j) && dist[j].is_finite() && (g.center_of_index(j) - cm).norm() <= p.reach_radius + 1e-9 {
                            near.push(j);
                        }
                    }
                }
            }
        }
        if near.is_empty() {
            continue;
        }
        near.sort_unstable();
        near.dedup();
        let path_length = near.iter().map(|&j| dist[j]).fold(f64::INFINITY, f64::min);
        let target = *near
            .iter()
            .min_by(|&&a, &&b| {
                let da = (g.center_of_index(a) - centroid).norm();
                let db = (g.center_of_index(b) - centroid).norm();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .unwrap();
        let target = g.center_of_index(target);
        let mut dir = Vector3::zeros();
        for &m in &comp {
            let c = g.coord(m);
            for j in g.face_neighbors(c) {
                if map.state(j) == VoxelState::Unknown {
                    dir += (g.center_of_index(j) - g.center(c)).normalize();
                }
            }
        }
        let direction = if dir.norm() > 1e-9 {
            dir.normalize()
        } else if (centroid - target).norm() > 1e-9 {
            (centroid - target).normalize()
        } else {
            robot.forward()
        };
        let cand = ClassicGoal {
            centroid,
            target,
            direction,
            path_length,
            size: comp.len(),
        };
        if best.as_ref().is_none_or(|b| cand.path_length < b.path_length) {
            best = Some(cand);
        }
    }
    best
}
