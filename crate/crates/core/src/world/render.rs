//! Pinhole depth rendering by exact voxel traversal.

use nalgebra::Vector3;
use rayon::prelude::*;

use super::camera::{CameraModel, Pose};
use super::grid::{VoxelGrid, VoxelState};
use super::raycast::{traverse, Step};
use super::WorldError;
use crate::raster::Raster;

/// Range sentinel for rays that hit nothing within `max_range`.
pub const NO_RETURN: f64 = f64::INFINITY;

/// Per-pixel Euclidean range along the pixel ray, meters.
pub type DepthImage = Raster<f64>;

/// Checks that `pose` sits inside the scene and in a non-Occupied voxel.
pub fn check_pose(scene: &VoxelGrid, pose: &Pose) -> Result<(), WorldError> {
    let p = pose.position;
    match scene.state_at_point(&p) {
        None => Err(WorldError::PoseOutOfBounds([p.x, p.y, p.z])),
        Some(VoxelState::Occupied) => Err(WorldError::PoseInsideOccupied([p.x, p.y, p.z])),
        Some(_) => Ok(()),
    }
}

/// Range to the first Occupied voxel along a world-frame unit ray, or
/// `NO_RETURN` when none is entered before `max_range`.
pub fn cast_ray(scene: &VoxelGrid, origin: &Vector3<f64>, dir: &Vector3<f64>, max_range: f64) -> f64 {
    let mut hit = NO_RETURN;
    traverse(scene.geometry(), origin, dir, max_range, |i, _, t| {
        if scene.state(i) == VoxelState::Occupied {
            hit = t;
            Step::Stop
        } else {
            Step::Continue
        }
    });
    hit
}

pub fn render_depth(scene: &VoxelGrid, pose: &Pose, cam: &CameraModel) -> Result<DepthImage, WorldError> {
    cam.validate()?;
    check_pose(scene, pose)?;
    let w = cam.width;
    let mut data = vec![NO_RETURN; w * cam.height];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let dir = pose.to_world_dir(&cam.pixel_ray(x, y));
            *out = cast_ray(scene, &pose.position, &dir, cam.max_range);
        }
    });
    Ok(Raster::from_vec(w, cam.height, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::grid::GridGeometry;

    fn room() -> VoxelGrid {
        let g = GridGeometry::new([60, 20, 20], 0.1, Vector3::zeros()).unwrap();
        let mut s = VoxelGrid::new(g, VoxelState::Free);
        s.fill_box([50, 0, 0], [50, 19, 19], VoxelState::Occupied);
        s
    }

    #[test]
    fn flat_wall_ahead() {
        let s = room();
        let cam = CameraModel::new(9, 9, 10.0, 10.0, 3.5).unwrap();
        let pose = Pose::from_yaw_pitch(Vector3::new(3.0, 1.0, 1.0), 0.0, 0.0);
        let d = render_depth(&s, &pose, &cam).unwrap();
        assert!((d.get(4, 4) - 2.0).abs() <= 0.1);
    }

    #[test]
    fn empty_scene_has_no_returns() {
        let g = GridGeometry::new([20, 20, 20], 0.1, Vector3::zeros()).unwrap();
        let s = VoxelGrid::new(g, VoxelState::Free);
        let cam = CameraModel::new(8, 8, 60.0, 60.0, 3.5).unwrap();
        let pose = Pose::from_yaw_pitch(Vector3::new(1.0, 1.0, 1.0), 0.4, 0.1);
        let d = render_depth(&s, &pose, &cam).unwrap();
        assert!(d.data().iter().all(|v| *v == NO_RETURN));
    }

    #[test]
    fn pose_in_wall_rejected() {
        let s = room();
        let cam = CameraModel::new(4, 4, 60.0, 60.0, 3.5).unwrap();
        let pose = Pose::from_yaw_pitch(Vector3::new(5.05, 1.0, 1.0), 0.0, 0.0);
        assert!(matches!(render_depth(&s, &pose, &cam), Err(WorldError::PoseInsideOccupied(_))));
    }
}
