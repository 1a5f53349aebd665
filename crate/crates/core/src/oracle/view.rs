//! Single-view observed volume and the frontier voxels on its boundary.

use crate::world::render::{check_pose, render_depth, DepthImage};
use crate::world::{integrate_observation, CameraModel, GridGeometry, Pose, VoxelGrid, VoxelState, WorldError};

/// Partition of the scene into voxels observed from one pose (`v_in`) and
/// the rest (`v_out`).
#[derive(Debug, Clone, PartialEq)]
pub struct ViewVolume {
    geometry: GridGeometry,
    in_view: Vec<bool>,
    count: usize,
}

impl ViewVolume {
    pub fn from_mask(geometry: GridGeometry, in_view: Vec<bool>) -> Self {
        assert_eq!(in_view.len(), geometry.len());
        let count = in_view.iter().filter(|&&b| b).count();
        Self {
            geometry,
            in_view,
            count,
        }
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn is_in(&self, index: usize) -> bool {
        self.in_view[index]
    }

    #[inline]
    pub fn is_out(&self, index: usize) -> bool {
        !self.in_view[index]
    }

    pub fn in_count(&self) -> usize {
        self.count
    }

    pub fn out_count(&self) -> usize {
        self.in_view.len() - self.count
    }

    pub fn mask(&self) -> &[bool] {
        &self.in_view
    }
}

/// Frontier voxels of a view with their info gains (voxel counts).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontierVoxelSet {
    /// Linear voxel indices, ascending.
    pub voxels: Vec<usize>,
    pub gains: Vec<f64>,
    /// Members whose gain was computed directly rather than interpolated.
    pub sampled: Vec<bool>,
}

impl FrontierVoxelSet {
    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }
}

pub fn classify_view_volume(scene: &VoxelGrid, pose: &Pose, cam: &CameraModel) -> Result<ViewVolume, WorldError> {
    let depth = render_depth(scene, pose, cam)?;
    view_volume_from_depth(scene, pose, cam, &depth)
}

/// `v_in` as the set of voxels a fresh map learns from `depth`.
pub fn view_volume_from_depth(scene: &VoxelGrid, pose: &Pose, cam: &CameraModel, depth: &DepthImage) -> Result<ViewVolume, WorldError> {
    check_pose(scene, pose)?;
    let mut map = scene.unknown_like();
    integrate_observation(&mut map, pose, cam, depth)?;
    let in_view = map.states().iter().map(|s| s.is_known()).collect();
    Ok(ViewVolume::from_mask(*scene.geometry(), in_view))
}

/// Free voxels of `v_in` with at least one face neighbour in `v_out`.
pub fn extract_frontier_voxels(vv: &ViewVolume, scene: &VoxelGrid) -> FrontierVoxelSet {
    let g = vv.geometry();
    let voxels: Vec<usize> = (0..g.len())
        .filter(|&i| vv.is_in(i) && scene.state(i) == VoxelState::Free)
        .filter(|&i| g.face_neighbors(g.coord(i)).any(|n| vv.is_out(n)))
        .collect();
    let gains = vec![0.0; voxels.len()];
    let sampled = vec![false; voxels.len()];
    FrontierVoxelSet { voxels, gains, sampled }
}

/// Members of `ft` bordering a `v_out` voxel whose centre projects into the
/// image of `(pose, cam)`. Drops the apex of the view cone and its lateral
/// faces, where `v_out` is only the region outside the field of view.
pub fn restrict_to_image(ft: &FrontierVoxelSet, vv: &ViewVolume, pose: &Pose, cam: &CameraModel) -> FrontierVoxelSet {
    let g = vv.geometry();
    let keep = |i: usize| {
        g.face_neighbors(g.coord(i)).any(|n| {
            vv.is_out(n)
                && cam
                    .project(&pose.to_camera(&g.center_of_index(n)))
                    .is_some_and(|(u, v)| cam.in_image(u, v))
        })
    };
    let mut out = FrontierVoxelSet::default();
    for (k, &vi) in ft.voxels.iter().enumerate() {
        if keep(vi) {
            out.voxels.push(vi);
            out.gains.push(ft.gains[k]);
            out.sampled.push(ft.sampled[k]);
        }
    }
    out
}
