//! Ground-truth scenes, depth rendering and incremental occupancy mapping.

pub mod camera;
pub mod gradient;
pub mod grid;
pub mod integrate;
pub mod raycast;
pub mod render;
pub mod scene_gen;
pub mod scene_io;

pub use camera::{angle_between, wrap_angle, yaw_pitch_of, CameraModel, Pose, PoseId};
pub use gradient::{depth_gradient, GradientMap};
pub use grid::{GridGeometry, VoxelCoord, VoxelGrid, VoxelState};
pub use integrate::{integrate_observation, Aabb, Integration};
pub use render::{render_depth, DepthImage, NO_RETURN};
pub use scene_gen::{generate_doorway_scene, generate_scene, sealed_room, DoorwayScene, SceneParams};
pub use scene_io::{load_scene, save_scene};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid grid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("scene parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("pose at {0:?} lies inside an occupied voxel")]
    PoseInsideOccupied([f64; 3]),
    #[error("pose at {0:?} lies outside the scene")]
    PoseOutOfBounds([f64; 3]),
    #[error("grid layout mismatch: {0}")]
    DimensionMismatch(String),
    #[error("scene generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
