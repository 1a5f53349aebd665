//! Ground-truth frontier rasters from privileged scene geometry, and the
//! predictor interface the exploration loop consumes.

pub mod bins;
pub mod edt;
pub mod gain;
pub mod mask;
pub mod project;
pub mod view;

pub use bins::{bin_gain, bin_width, unbin};
pub use edt::{distance_field, squared_edt};
pub use gain::voxel_info_gain;
pub use mask::depth_discontinuity_mask;
pub use project::{info_gain_map, project_frontier_prior};
pub use view::{classify_view_volume, extract_frontier_voxels, restrict_to_image, view_volume_from_depth, FrontierVoxelSet, ViewVolume};

use crate::raster::{Mask, Raster};
use crate::world::render::{check_pose, render_depth};
use crate::world::{depth_gradient, CameraModel, DepthImage, Pose, VoxelGrid, WorldError};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    /// Distance-field truncation, pixels.
    pub r_df: f64,
    /// 3D ray gating radius, meters.
    pub r_ray: f64,
    /// Depth-gradient threshold, meters per pixel.
    pub tau_d: f64,
    /// Number of gain classes `K`.
    pub classes: usize,
    /// Bin ceiling; `None` uses the frustum voxel count of the camera.
    pub g_max: Option<f64>,
    pub sample_frac: f64,
    /// Pixel resolution of the virtual gain camera.
    pub gain_width: usize,
    pub gain_height: usize,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            r_df: 20.0,
            r_ray: 0.15,
            tau_d: 0.05,
            classes: 11,
            g_max: None,
            sample_frac: 0.10,
            gain_width: 64,
            gain_height: 64,
        }
    }
}

impl OracleParams {
    pub fn g_max(&self, cam: &CameraModel, resolution: f64) -> f64 {
        self.g_max.unwrap_or_else(|| cam.frustum_voxel_count(resolution) as f64)
    }

    pub fn gain_camera(&self, cam: &CameraModel) -> CameraModel {
        cam.with_resolution(self.gain_width, self.gain_height)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::InvalidParams(m.to_string()));
        if !(self.r_df > 1.0) {
            return bad("r_df must exceed 1 pixel");
        }
        if !(self.r_ray > 0.0) || !(self.tau_d > 0.0) {
            return bad("r_ray and tau_d must be positive");
        }
        if !(2..=256).contains(&self.classes) {
            return bad("class count must lie in [2, 256]");
        }
        if !(self.sample_frac > 0.0 && self.sample_frac <= 1.0) {
            return bad("sample_frac must lie in (0, 1]");
        }
        if matches!(self.g_max, Some(g) if !(g > 0.0)) {
            return bad("g_max must be positive");
        }
        if self.gain_width == 0 || self.gain_height == 0 {
            return bad("gain camera size must be positive");
        }
        Ok(())
    }
}

/// Per-image oracle output.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRaster {
    pub f_p: Mask,
    pub f_d: Mask,
    pub f: Mask,
    pub d: Raster<f64>,
    pub d_norm: Raster<f64>,
    pub g: Raster<f64>,
    pub y: Raster<u8>,
    pub g_max: f64,
    pub depth: DepthImage,
    pub frontier: FrontierVoxelSet,
}

pub fn oracle_predict(scene: &VoxelGrid, pose: &Pose, cam: &CameraModel, params: &OracleParams, seed: u64) -> Result<FrontierRaster, WorldError> {
    let depth = render_depth(scene, pose, cam)?;
    oracle_predict_with_depth(scene, pose, cam, &depth, params, seed)
}

/// Oracle pipeline on an already rendered depth image.
pub fn oracle_predict_with_depth(
    scene: &VoxelGrid,
    pose: &Pose,
    cam: &CameraModel,
    depth: &DepthImage,
    params: &OracleParams,
    seed: u64,
) -> Result<FrontierRaster, WorldError> {
    params.validate()?;
    check_pose(scene, pose)?;
    let geom = *scene.geometry();
    let vv = view_volume_from_depth(scene, pose, cam, depth)?;
    let ft = restrict_to_image(&extract_frontier_voxels(&vv, scene), &vv, pose, cam);
    let f_p = project_frontier_prior(&geom, &ft, pose, cam, params.r_ray);
    let f_d = depth_discontinuity_mask(&depth_gradient(depth), depth, params.tau_d);
    let f = and_masks(&f_p, &f_d);
    let (d, d_norm) = distance_field(&f, params.r_df);
    let ft = voxel_info_gain(scene, &vv, &ft, &pose.position, &params.gain_camera(cam), params.sample_frac, seed);
    let g = info_gain_map(&geom, &ft, pose, cam, params.r_ray);
    let g_max = params.g_max(cam, geom.resolution);
    let y = g.map(|&v| bin_gain(v, params.classes, g_max));
    Ok(FrontierRaster {
        f_p,
        f_d,
        f,
        d,
        d_norm,
        g,
        y,
        g_max,
        depth: depth.clone(),
        frontier: ft,
    })
}

pub fn and_masks(a: &Mask, b: &Mask) -> Mask {
    assert!(a.same_shape(b));
    Mask::from_vec(a.width(), a.height(), a.data().iter().zip(b.data()).map(|(x, y)| *x && *y).collect())
}

/// Which mask the predictor reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskMode {
    /// Frontier prior intersected with depth discontinuities.
    DistanceField,
    /// Depth discontinuities alone.
    Discontinuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMode {
    Predicted,
    /// Constant `g_max / 2` everywhere.
    Uniform,
}

/// Everything a predictor may look at for one frame. Learned predictors
/// should use only `depth` (and any appearance input they carry); the
/// oracle also reads `scene`.
pub struct PredictionInput<'a> {
    pub scene: &'a VoxelGrid,
    pub pose: &'a Pose,
    pub camera: &'a CameraModel,
    pub depth: &'a DepthImage,
    pub seed: u64,
}

/// Dense per-frame prediction: distance field and per-pixel gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Truncated distance to the nearest frontier pixel, pixels.
    pub distance: Raster<f64>,
    /// Decoded gain per pixel (bin lower edge), voxels.
    pub gain: Raster<f64>,
    pub classes: Raster<u8>,
    pub g_max: f64,
}

pub trait FrontierPredictor: Send + Sync {
    fn predict(&self, input: &PredictionInput<'_>) -> Result<Prediction, WorldError>;
}

/// Reference predictor backed by the ground-truth pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePredictor {
    pub params: OracleParams,
    pub mask_mode: MaskMode,
    pub gain_mode: GainMode,
}

impl OraclePredictor {
    pub fn new(params: OracleParams) -> Self {
        Self {
            params,
            mask_mode: MaskMode::DistanceField,
            gain_mode: GainMode::Predicted,
        }
    }
}

impl FrontierPredictor for OraclePredictor {
    fn predict(&self, input: &PredictionInput<'_>) -> Result<Prediction, WorldError> {
        let p = &self.params;
        p.validate()?;
        let (scene, pose, cam, depth) = (input.scene, input.pose, input.camera, input.depth);
        check_pose(scene, pose)?;
        let geom = *scene.geometry();
        let g_max = p.g_max(cam, geom.resolution);
        let k = p.classes;
        let f_d = depth_discontinuity_mask(&depth_gradient(depth), depth, p.tau_d);

        let need_voxels = self.mask_mode == MaskMode::DistanceField || self.gain_mode == GainMode::Predicted;
        let (vv, ft) = if need_voxels {
            let vv = view_volume_from_depth(scene, pose, cam, depth)?;
            let ft = restrict_to_image(&extract_frontier_voxels(&vv, scene), &vv, pose, cam);
            (Some(vv), ft)
        } else {
            (None, FrontierVoxelSet::default())
        };
        let mask = match self.mask_mode {
            MaskMode::DistanceField => and_masks(&project_frontier_prior(&geom, &ft, pose, cam, p.r_ray), &f_d),
            MaskMode::Discontinuity => f_d,
        };
        let (distance, _) = distance_field(&mask, p.r_df);
        let (gain, classes) = match (self.gain_mode, vv) {
            (GainMode::Predicted, Some(vv)) => {
                let ft = voxel_info_gain(scene, &vv, &ft, &pose.position, &p.gain_camera(cam), p.sample_frac, input.seed);
                let classes = info_gain_map(&geom, &ft, pose, cam, p.r_ray).map(|&v| bin_gain(v, k, g_max));
                (classes.map(|&c| unbin(c, k, g_max)), classes)
            }
            _ => {
                let c = bin_gain(g_max / 2.0, k, g_max);
                (Raster::filled(cam.width, cam.height, g_max / 2.0), Raster::filled(cam.width, cam.height, c))
            }
        };
        Ok(Prediction {
            distance,
            gain,
            classes,
            g_max,
        })
    }
}
