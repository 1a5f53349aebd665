//! Sparse 3D frontiers from dense frontier predictions: mask recovery,
//! viewpoint generation, clustering and lifting.

pub mod cluster;
pub mod features;
pub mod lift;

pub use cluster::{cluster_frontier_pixels, ClusterParams, Frontier2DCluster, FrontierPixelFeature};
pub use features::{pixel_viewing_angle, recover_mask, sample_fg_bg_depth, window_gradient};
pub use lift::{lift_to_3d, Frontier3D, FrontierStatus};

use crate::oracle::Prediction;
use crate::raster::Mask;
use crate::world::{depth_gradient, CameraModel, DepthImage, Pose, PoseId};

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorParams {
    /// Inclusion threshold on the distance field, pixels.
    pub l: f64,
    /// Side of the gradient averaging window.
    pub window: usize,
    /// Minimum mean gradient magnitude, meters per pixel.
    pub eps_g: f64,
    /// Foreground / background sampling step, pixels.
    pub fgbg_offset: f64,
    pub sigma_px: f64,
    pub sigma_phi: f64,
    /// Gain scale as a fraction of `g_max`.
    pub sigma_g_frac: f64,
    pub eps: f64,
    pub min_cluster_size: usize,
    pub vertical_dominance: f64,
    /// Keep only pixels whose own ray is clear up to their lift depth.
    pub require_clear_ray: bool,
}

impl Default for AnchorParams {
    fn default() -> Self {
        Self {
            l: 2.0,
            window: 5,
            eps_g: 1e-3,
            fgbg_offset: 4.0,
            sigma_px: 24.0,
            sigma_phi: 0.5,
            sigma_g_frac: 0.25,
            eps: 1.0,
            min_cluster_size: 8,
            vertical_dominance: 0.9,
            require_clear_ray: true,
        }
    }
}

impl AnchorParams {
    pub fn cluster_params(&self, g_max: f64) -> ClusterParams {
        ClusterParams {
            sigma_px: self.sigma_px,
            sigma_phi: self.sigma_phi,
            sigma_g: (self.sigma_g_frac * g_max).max(f64::MIN_POSITIVE),
            eps: self.eps,
            min_cluster_size: self.min_cluster_size,
        }
    }
}

/// Everything derived from one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchorOutput {
    pub mask: Option<Mask>,
    pub features: Vec<FrontierPixelFeature>,
    pub clusters: Vec<Frontier2DCluster>,
    /// Lifted frontiers, parallel to the clusters that survived lifting.
    pub frontiers: Vec<Frontier3D>,
}

/// Per-pixel features for every recovered frontier pixel that has a valid
/// viewing angle and foreground depth.
pub fn extract_features(mask: &Mask, pred: &Prediction, depth: &DepthImage, cam: &CameraModel, p: &AnchorParams) -> Vec<FrontierPixelFeature> {
    // NO_RETURN reads as max_range so that gradients survive at windows
    let clamped = depth.map(|&d| if d.is_finite() { d } else { cam.max_range });
    let gm = depth_gradient(&clamped);
    let mut out = Vec::new();
    for (x, y, &on) in mask.iter_pixels() {
        if !on {
            continue;
        }
        let Some(phi) = pixel_viewing_angle(&gm, x, y, p.window, p.eps_g) else {
            continue;
        };
        let Some((d_f, d_b)) = sample_fg_bg_depth(depth, x, y, phi, p.fgbg_offset, cam.max_range) else {
            continue;
        };
        if d_f > d_b {
            continue;
        }
        let range = *clamped.get(x, y);
        let f = FrontierPixelFeature {
            x,
            y,
            phi,
            gain: *pred.gain.get(x, y),
            depth_fg: d_f,
            depth_bg: d_b,
            range,
        };
        if p.require_clear_ray && range < f.lift_depth() {
            continue;
        }
        out.push(f);
    }
    out
}

/// Full anchoring of one frame.
pub fn anchor_frame(pred: &Prediction, depth: &DepthImage, pose: &Pose, cam: &CameraModel, parent: PoseId, p: &AnchorParams) -> AnchorOutput {
    let mask = recover_mask(&pred.distance, p.l);
    let features = extract_features(&mask, pred, depth, cam, p);
    if features.is_empty() {
        return AnchorOutput {
            mask: Some(mask),
            ..Default::default()
        };
    }
    let mut clusters = cluster_frontier_pixels(&features, &p.cluster_params(pred.g_max));
    if p.require_clear_ray {
        clusters.retain(|c| c.ray_range >= c.depth_bar);
    }
    let mut kept = Vec::with_capacity(clusters.len());
    let mut frontiers = Vec::with_capacity(clusters.len());
    for c in clusters {
        if let Some(f) = lift_to_3d(&c, pose, cam, parent, p.vertical_dominance) {
            kept.push(c);
            frontiers.push(f);
        }
    }
    AnchorOutput {
        mask: Some(mask),
        features,
        clusters: kept,
        frontiers,
    }
}
