//! Incremental ternary occupancy mapping from posed depth images.

use super::camera::{CameraModel, Pose};
use super::grid::{GridGeometry, VoxelCoord, VoxelGrid, VoxelState};
use super::raycast::{traverse, Step};
use super::render::DepthImage;
use super::WorldError;

/// Slack when matching a stored range to the entry parameter of the hit
/// voxel. Covers the f32 round trip of depth files.
const HIT_TOL: f64 = 1e-6;

/// Inclusive voxel-coordinate bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Aabb {
    pub lo: VoxelCoord,
    pub hi: VoxelCoord,
}

impl Aabb {
    pub fn point(c: VoxelCoord) -> Self {
        Self { lo: c, hi: c }
    }

    pub fn grow(&mut self, c: VoxelCoord) {
        for a in 0..3 {
            self.lo[a] = self.lo[a].min(c[a]);
            self.hi[a] = self.hi[a].max(c[a]);
        }
    }

    pub fn union(a: Option<Aabb>, b: Option<Aabb>) -> Option<Aabb> {
        match (a, b) {
            (Some(mut x), Some(y)) => {
                x.grow(y.lo);
                x.grow(y.hi);
                Some(x)
            }
            (x, None) => x,
            (None, y) => y,
        }
    }
}

/// Result of integrating one observation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Integration {
    /// Unknown → {Free, Occupied} transitions.
    pub newly_known: usize,
    /// Indices of those voxels, in discovery order.
    pub newly_known_voxels: Vec<usize>,
    /// Bounding box of every voxel whose state changed.
    pub dirty: Option<Aabb>,
}

/// Visits the voxels observed by one pixel ray with the state the ray
/// assigns to them: Free before the return, Occupied at the return.
pub fn ray_observations<F>(geom: &GridGeometry, pose: &Pose, dir_world: &nalgebra::Vector3<f64>, range: f64, max_range: f64, mut f: F)
where
    F: FnMut(usize, VoxelCoord, VoxelState),
{
    if range.is_finite() {
        // the return voxel is the one entered closest to `range`; entry
        // parameters only grow, so the distance to `range` falls then rises
        let mut pending: Option<(usize, VoxelCoord, f64)> = None;
        traverse(geom, &pose.position, dir_world, range + HIT_TOL, |i, c, t| {
            if let Some((pi, pc, pt)) = pending {
                if t > range && t - range >= (pt - range).abs() {
                    return Step::Stop;
                }
                f(pi, pc, VoxelState::Free);
            }
            pending = Some((i, c, t));
            Step::Continue
        });
        if let Some((i, c, _)) = pending {
            f(i, c, VoxelState::Occupied);
        }
    } else {
        traverse(geom, &pose.position, dir_world, max_range, |i, c, _| {
            f(i, c, VoxelState::Free);
            Step::Continue
        });
    }
}

/// Fuses a depth image into `map` with the Occupied-wins rule.
pub fn integrate_observation(map: &mut VoxelGrid, pose: &Pose, cam: &CameraModel, depth: &DepthImage) -> Result<Integration, WorldError> {
    if depth.width() != cam.width || depth.height() != cam.height {
        return Err(WorldError::DimensionMismatch(format!(
            "depth is {}x{}, camera is {}x{}",
            depth.width(),
            depth.height(),
            cam.width,
            cam.height
        )));
    }
    let geom = *map.geometry();
    let mut out = Integration::default();
    for (x, y, &range) in depth.iter_pixels() {
        let dir = pose.to_world_dir(&cam.pixel_ray(x, y));
        ray_observations(&geom, pose, &dir, range, cam.max_range, |i, c, s| {
            let old = map.state(i);
            if s > old {
                map.set(i, s);
                if old == VoxelState::Unknown {
                    out.newly_known += 1;
                    out.newly_known_voxels.push(i);
                }
                match out.dirty.as_mut() {
                    Some(b) => b.grow(c),
                    None => out.dirty = Some(Aabb::point(c)),
                }
            }
        });
    }
    Ok(out)
}

/// Integrates into a map that must share the scene's layout.
pub fn check_layout(map: &VoxelGrid, scene: &VoxelGrid) -> Result<(), WorldError> {
    if !map.same_layout(scene) {
        return Err(WorldError::DimensionMismatch("map and scene layouts differ".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::render::render_depth;
    use nalgebra::Vector3;

    fn scene() -> VoxelGrid {
        let g = GridGeometry::new([40, 30, 20], 0.1, Vector3::zeros()).unwrap();
        let mut s = VoxelGrid::new(g, VoxelState::Free);
        s.fill_box([30, 0, 0], [30, 29, 19], VoxelState::Occupied);
        s.fill_box([15, 5, 0], [17, 9, 8], VoxelState::Occupied);
        s
    }

    #[test]
    fn newly_known_matches_recount_and_is_idempotent() {
        let s = scene();
        let cam = CameraModel::new(24, 24, 70.0, 70.0, 3.5).unwrap();
        let pose = Pose::from_yaw_pitch(Vector3::new(0.55, 1.55, 1.05), 0.2, -0.1);
        let d = render_depth(&s, &pose, &cam).unwrap();
        let mut map = s.unknown_like();
        let r = integrate_observation(&mut map, &pose, &cam, &d).unwrap();
        assert!(r.newly_known > 0);
        assert_eq!(r.newly_known, map.known_count());
        let again = integrate_observation(&mut map, &pose, &cam, &d).unwrap();
        assert_eq!(again.newly_known, 0);
        assert!(again.dirty.is_none());
    }

    #[test]
    fn exact_depth_never_contradicts_scene() {
        let s = scene();
        let cam = CameraModel::new(32, 32, 77.32, 77.32, 3.5).unwrap();
        let mut map = s.unknown_like();
        for (k, yaw) in [0.0, 0.7, -0.5, 2.5].iter().enumerate() {
            let pose = Pose::from_yaw_pitch(Vector3::new(0.55 + k as f64 * 0.3, 1.55, 1.05), *yaw, 0.2);
            let d = render_depth(&s, &pose, &cam).unwrap();
            integrate_observation(&mut map, &pose, &cam, &d).unwrap();
        }
        for i in 0..map.len() {
            let m = map.state(i);
            if m.is_known() {
                assert_eq!(m, s.state(i));
            }
        }
    }

    #[test]
    fn size_mismatch() {
        let s = scene();
        let cam = CameraModel::new(8, 8, 70.0, 70.0, 3.5).unwrap();
        let mut map = s.unknown_like();
        let pose = Pose::from_yaw_pitch(Vector3::new(0.55, 1.55, 1.05), 0.0, 0.0);
        let d = DepthImage::filled(4, 4, 1.0);
        assert!(integrate_observation(&mut map, &pose, &cam, &d).is_err());
    }
}
