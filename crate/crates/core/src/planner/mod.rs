//! Goal selection, path planning, the exploration loop and the classic
//! nearest-frontier baseline.

pub mod classic;
pub mod explore;
pub mod goal;
pub mod path;
pub mod tree;

pub use classic::{classic_baseline_step, map_frontier_voxels, ClassicGoal, ClassicParams};
pub use explore::{run_exploration, run_exploration_with, Event, ExplorationLog, LogRow, StepState, Termination};
pub use goal::{find_entry_point, select_goal, utility};
pub use path::{plan_path, Path, PathParams, Traversability};
pub use tree::{FrontierTree, PoseNode};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::anchor::AnchorParams;
use crate::frontier_store::StoreParams;
use crate::oracle::{GainMode, MaskMode, OracleParams};
use crate::world::WorldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no path through known free space")]
    NoPath,
    #[error("start lies outside the map")]
    StartOutOfBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlannerMode {
    FrontierNet,
    Classic,
    MapFree,
}

impl PlannerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerMode::FrontierNet => "frontiernet",
            PlannerMode::Classic => "classic",
            PlannerMode::MapFree => "mapfree",
        }
    }
}

impl fmt::Display for PlannerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlannerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frontiernet" => Ok(PlannerMode::FrontierNet),
            "classic" => Ok(PlannerMode::Classic),
            "mapfree" => Ok(PlannerMode::MapFree),
            _ => Err(format!("unknown mode '{s}' (expected frontiernet, classic or mapfree)")),
        }
    }
}

/// Mask/gain ablation pair, written `df+gain`, `df+uni`, `discon+gain` or
/// `discon+uni`.
pub fn parse_ablation(s: &str) -> Result<(MaskMode, GainMode), String> {
    let (m, g) = s.split_once('+').ok_or_else(|| format!("malformed ablation '{s}'"))?;
    let mask = match m {
        "df" => MaskMode::DistanceField,
        "discon" => MaskMode::Discontinuity,
        _ => return Err(format!("unknown mask mode '{m}'")),
    };
    let gain = match g {
        "gain" => GainMode::Predicted,
        "uni" => GainMode::Uniform,
        _ => return Err(format!("unknown gain mode '{g}'")),
    };
    Ok((mask, gain))
}

pub fn ablation_name(mask: MaskMode, gain: GainMode) -> &'static str {
    match (mask, gain) {
        (MaskMode::DistanceField, GainMode::Predicted) => "df+gain",
        (MaskMode::DistanceField, GainMode::Uniform) => "df+uni",
        (MaskMode::Discontinuity, GainMode::Predicted) => "discon+gain",
        (MaskMode::Discontinuity, GainMode::Uniform) => "discon+uni",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub mode: PlannerMode,
    pub mask_mode: MaskMode,
    pub gain_mode: GainMode,
    /// Largest translation per step, meters.
    pub step_dist: f64,
    /// Largest rotation per step, degrees.
    pub step_angle_deg: f64,
    pub inflation: f64,
    /// Distance floor in the utility denominator, meters.
    pub d_floor: f64,
    /// Steps between re-observations while travelling.
    pub k_obs: usize,
    pub max_steps: usize,
    pub entry_samples: usize,
    pub goal_dist_tol: f64,
    pub goal_angle_tol_deg: f64,
    /// Planning failures after which a frontier is invalidated.
    pub max_plan_failures: usize,
    /// Views taken in place before the first step: yaw count per pitch.
    pub look_around_yaws: usize,
    pub look_around_pitches_deg: Vec<f64>,
    /// Prune by adjusted gain (map-based; must be off in mapfree mode).
    pub gain_pruning: bool,
    pub classic: ClassicParams,
    pub store: StoreParams,
    pub oracle: OracleParams,
    pub anchor: AnchorParams,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            mode: PlannerMode::FrontierNet,
            mask_mode: MaskMode::DistanceField,
            gain_mode: GainMode::Predicted,
            step_dist: 0.1,
            step_angle_deg: 10.0,
            inflation: 0.2,
            d_floor: 0.3,
            k_obs: 5,
            max_steps: 500,
            entry_samples: 20,
            goal_dist_tol: 0.3,
            goal_angle_tol_deg: 20.0,
            max_plan_failures: 3,
            look_around_yaws: 5,
            look_around_pitches_deg: vec![-35.0, 35.0],
            gain_pruning: true,
            classic: ClassicParams::default(),
            store: StoreParams::default(),
            oracle: OracleParams::default(),
            anchor: AnchorParams::default(),
        }
    }
}

impl PlannerConfig {
    /// Defaults for `mode`, with map-based pruning disabled in mapfree.
    pub fn for_mode(mode: PlannerMode) -> Self {
        Self {
            mode,
            gain_pruning: mode != PlannerMode::MapFree,
            ..Self::default()
        }
    }

    pub fn path_params(&self, goal_tolerance: f64) -> PathParams {
        PathParams {
            inflation: self.inflation,
            goal_tolerance,
            step_dist: self.step_dist,
            step_angle_deg: self.step_angle_deg,
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::InvalidParams(m.to_string()));
        if self.mode == PlannerMode::MapFree && self.gain_pruning {
            return bad("mapfree mode cannot prune by map-adjusted gain");
        }
        if !(self.step_dist > 0.0) || !(self.step_angle_deg > 0.0) {
            return bad("step thresholds must be positive");
        }
        if self.k_obs == 0 || self.look_around_yaws == 0 || self.look_around_pitches_deg.is_empty() {
            return bad("k_obs and look-around counts must be positive");
        }
        if !(self.inflation >= 0.0) || !(self.d_floor > 0.0) || !(self.goal_dist_tol >= 0.0) {
            return bad("inflation, d_floor and goal tolerance must be non-negative");
        }
        if self.look_around_pitches_deg.iter().any(|p| !(p.abs() < 90.0)) {
            return bad("look-around pitches must lie in (-90, 90) degrees");
        }
        self.oracle.validate()
    }
}

/// Rescales pixel-denominated defaults from the 480-pixel reference camera
/// to a camera `width` pixels wide.
pub fn scale_to_camera(oracle: &mut OracleParams, anchor: &mut AnchorParams, width: usize) {
    let s = width as f64 / 480.0;
    oracle.tau_d = 0.05 / s;
    oracle.gain_width = (width / 2).clamp(8, 64);
    oracle.gain_height = oracle.gain_width;
    anchor.sigma_px = 24.0 * s;
    anchor.fgbg_offset = (4.0 * s).max(1.0);
    anchor.window = ((5.0 * s).round() as usize | 1).max(3);
    anchor.min_cluster_size = ((8.0 * s * s).round() as usize).max(3);
}
