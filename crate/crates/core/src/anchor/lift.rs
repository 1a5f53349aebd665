//! Back-projection of 2D clusters into 3D frontier viewpoints.

use nalgebra::Vector3;

use super::cluster::Frontier2DCluster;
use crate::world::{CameraModel, Pose, PoseId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontierStatus {
    Active,
    Consumed,
    Invalid,
}

impl FrontierStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontierStatus::Active => "active",
            FrontierStatus::Consumed => "consumed",
            FrontierStatus::Invalid => "invalid",
        }
    }
}

/// Sparse 3D goal `[p̄, q̄, ḡ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier3D {
    pub p_bar: Vector3<f64>,
    /// Unit viewing direction.
    pub q_bar: Vector3<f64>,
    pub gain: f64,
    pub gain0: f64,
    pub parent_pose_id: PoseId,
    pub status: FrontierStatus,
}

impl Frontier3D {
    pub fn new(p_bar: Vector3<f64>, q_bar: Vector3<f64>, gain: f64, parent: PoseId) -> Self {
        Self {
            p_bar,
            q_bar: q_bar.normalize(),
            gain,
            gain0: gain,
            parent_pose_id: parent,
            status: FrontierStatus::Active,
        }
    }

    pub fn is_active(&self) -> bool {
        self.status == FrontierStatus::Active
    }

    /// Camera pose at the frontier looking along `q̄`.
    pub fn view_pose(&self) -> Pose {
        Pose::looking_along(self.p_bar, &self.q_bar)
    }
}

/// Back-projects pixel coordinates `(u, v)` at range `r`.
fn back_project(pose: &Pose, cam: &CameraModel, u: f64, v: f64, r: f64) -> Vector3<f64> {
    pose.to_world(&(cam.ray_dir(u, v) * r))
}

/// Lifts a cluster to a 3D viewpoint. The viewing direction is the world
/// vector between two back-projections one pixel apart along `φ̄`, made
/// horizontal unless its vertical part exceeds `vertical_dominance` of its
/// length. `None` for non-positive depth or a degenerate direction.
pub fn lift_to_3d(c: &Frontier2DCluster, pose: &Pose, cam: &CameraModel, parent: PoseId, vertical_dominance: f64) -> Option<Frontier3D> {
    if !(c.depth_bar.is_finite() && c.depth_bar > 0.0) {
        return None;
    }
    let (u, v) = (c.centroid_px.0 as f64 + 0.5, c.centroid_px.1 as f64 + 0.5);
    let p = back_project(pose, cam, u, v, c.depth_bar);
    let p1 = back_project(pose, cam, u + c.phi_bar.cos(), v + c.phi_bar.sin(), c.depth_bar);
    let dir = p1 - p;
    let n = dir.norm();
    if n < 1e-12 {
        return None;
    }
    let q = if dir.z.abs() > vertical_dominance * n {
        dir / n
    } else {
        let flat = Vector3::new(dir.x, dir.y, 0.0);
        let fnorm = flat.norm();
        if fnorm < 1e-12 * n {
            return None;
        }
        flat / fnorm
    };
    Some(Frontier3D::new(p, q, c.gain_bar, parent))
}
