//! Frontier-based exploration simulator: ground-truth frontier rasters,
//! 2D to 3D anchoring, frontier lifecycle, utility-driven planning and
//! coverage evaluation.

pub mod raster;
pub mod world;
pub mod oracle;
pub mod anchor;
pub mod frontier_store;
pub mod planner;
pub mod eval;
