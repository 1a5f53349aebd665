//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use frontier_core::anchor::AnchorParams;
use frontier_core::oracle::OracleParams;
use frontier_core::planner::{ablation_name, parse_ablation, scale_to_camera, PlannerConfig, PlannerMode};
use frontier_core::world::{CameraModel, SceneParams};

use crate::CliError;

/// Keys of the `suite.` group, used only by `evaluate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteKeys {
    /// Scene files, relative to the config file.
    pub scenes: Vec<String>,
    /// Number of procedural scenes added to `scenes`, generated from
    /// seeds `seed .. seed + n`.
    pub generate: usize,
    pub starts: usize,
    pub repeats: usize,
    pub configs: Vec<String>,
}

impl Default for SuiteKeys {
    fn default() -> Self {
        Self {
            scenes: Vec::new(),
            generate: 0,
            starts: 1,
            repeats: 5,
            configs: ["df+gain", "df+uni", "discon+uni", "classic", "mapfree"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub camera: CameraModel,
    /// Rescale pixel-denominated defaults when the camera width differs
    /// from the 480-pixel reference.
    pub scale_pixels: bool,
    pub scene: SceneParams,
    pub planner: PlannerConfig,
    /// `None` prunes by gain in every mode except mapfree.
    pub gain_pruning: Option<bool>,
    pub start_height: f64,
    pub start_clearance: f64,
    pub suite: SuiteKeys,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            camera: CameraModel::default(),
            scale_pixels: true,
            scene: SceneParams::default(),
            planner: PlannerConfig::default(),
            gain_pruning: None,
            start_height: 1.25,
            start_clearance: 0.4,
            suite: SuiteKeys::default(),
        }
    }
}

type Getter = fn(&RunConfig) -> String;
type Setter = fn(&mut RunConfig, &str) -> Result<(), String>;

pub struct Key {
    pub name: &'static str,
    pub help: &'static str,
    get: Getter,
    set: Setter,
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse '{v}' as a number"))
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("cannot parse '{v}' as a boolean")),
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn floats(v: &str) -> Result<Vec<f64>, String> {
    list(v).iter().map(|s| num(s)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

macro_rules! key {
    ($name:literal, $help:literal, |$c:ident| $get:expr, |$m:ident, $v:ident| $set:expr) => {
        Key {
            name: $name,
            help: $help,
            get: |$c: &RunConfig| $get.to_string(),
            set: |$m: &mut RunConfig, $v: &str| {
                $set;
                Ok(())
            },
        }
    };
}

pub static KEYS: &[Key] = &[
    key!("seed", "base seed for scene generation, start picking and sampling", |c| c.seed, |m, v| m.seed = num(v)?),
    key!("camera.width", "image width, pixels", |c| c.camera.width, |m, v| m.camera.width = num(v)?),
    key!("camera.height", "image height, pixels", |c| c.camera.height, |m, v| m.camera.height = num(v)?),
    key!("camera.fov_x_deg", "horizontal field of view", |c| c.camera.fov_x_deg, |m, v| m.camera.fov_x_deg = num(v)?),
    key!("camera.fov_y_deg", "vertical field of view", |c| c.camera.fov_y_deg, |m, v| m.camera.fov_y_deg = num(v)?),
    key!("camera.max_range", "sensing range, meters", |c| c.camera.max_range, |m, v| m.camera.max_range = num(v)?),
    key!(
        "camera.scale_pixels",
        "rescale pixel-denominated defaults to the camera width",
        |c| c.scale_pixels,
        |m, v| m.scale_pixels = boolean(v)?
    ),
    key!("scene.rooms_min", "fewest rooms", |c| c.scene.rooms_min, |m, v| m.scene.rooms_min = num(v)?),
    key!("scene.rooms_max", "most rooms", |c| c.scene.rooms_max, |m, v| m.scene.rooms_max = num(v)?),
    key!("scene.extent_x", "outer extent along x, meters", |c| c.scene.extent[0], |m, v| m.scene.extent[0] = num(v)?),
    key!("scene.extent_y", "outer extent along y, meters", |c| c.scene.extent[1], |m, v| m.scene.extent[1] = num(v)?),
    key!("scene.extent_z", "outer extent along z, meters", |c| c.scene.extent[2], |m, v| m.scene.extent[2] = num(v)?),
    key!("scene.door_width", "door width, meters", |c| c.scene.door_width, |m, v| m.scene.door_width = num(v)?),
    key!("scene.door_height", "door height, meters", |c| c.scene.door_height, |m, v| m.scene.door_height = num(v)?),
    key!("scene.resolution", "voxel edge, meters", |c| c.scene.resolution, |m, v| m.scene.resolution = num(v)?),
    key!("scene.min_room", "smallest room side, meters", |c| c.scene.min_room, |m, v| m.scene.min_room = num(v)?),
    key!("scene.clutter", "most clutter boxes per room", |c| c.scene.clutter, |m, v| m.scene.clutter = num(v)?),
    key!("start.height", "height of picked start poses, meters", |c| c.start_height, |m, v| m.start_height = num(v)?),
    key!("start.clearance", "clearance of picked start poses, meters", |c| c.start_clearance, |m, v| m.start_clearance = num(v)?),
    key!("oracle.r_df", "distance-field truncation, pixels", |c| c.planner.oracle.r_df, |m, v| m.planner.oracle.r_df = num(v)?),
    key!("oracle.r_ray", "ray gating radius, meters", |c| c.planner.oracle.r_ray, |m, v| m.planner.oracle.r_ray = num(v)?),
    key!("oracle.tau_d", "depth-gradient threshold, meters per pixel", |c| c.planner.oracle.tau_d, |m, v| m.planner.oracle.tau_d = num(v)?),
    key!("oracle.classes", "gain classes K", |c| c.planner.oracle.classes, |m, v| m.planner.oracle.classes = num(v)?),
    key!(
        "oracle.g_max",
        "bin ceiling in voxels, or auto for the frustum voxel count",
        |c| c.planner.oracle.g_max.map_or("auto".to_string(), |g| g.to_string()),
        |m, v| m.planner.oracle.g_max = if v == "auto" { None } else { Some(num(v)?) }
    ),
    key!("oracle.sample_frac", "fraction of frontier voxels ray-cast for gain", |c| c.planner.oracle.sample_frac, |m, v| m.planner.oracle.sample_frac = num(v)?),
    key!("oracle.gain_width", "gain camera width, pixels", |c| c.planner.oracle.gain_width, |m, v| m.planner.oracle.gain_width = num(v)?),
    key!("oracle.gain_height", "gain camera height, pixels", |c| c.planner.oracle.gain_height, |m, v| m.planner.oracle.gain_height = num(v)?),
    key!("anchor.l", "mask recovery threshold, pixels", |c| c.planner.anchor.l, |m, v| m.planner.anchor.l = num(v)?),
    key!("anchor.window", "gradient averaging window, pixels", |c| c.planner.anchor.window, |m, v| m.planner.anchor.window = num(v)?),
    key!("anchor.eps_g", "smallest usable gradient, meters per pixel", |c| c.planner.anchor.eps_g, |m, v| m.planner.anchor.eps_g = num(v)?),
    key!("anchor.fgbg_offset", "foreground/background sampling step, pixels", |c| c.planner.anchor.fgbg_offset, |m, v| m.planner.anchor.fgbg_offset = num(v)?),
    key!("anchor.sigma_px", "clustering scale for position, pixels", |c| c.planner.anchor.sigma_px, |m, v| m.planner.anchor.sigma_px = num(v)?),
    key!("anchor.sigma_phi", "clustering scale for angle, radians", |c| c.planner.anchor.sigma_phi, |m, v| m.planner.anchor.sigma_phi = num(v)?),
    key!("anchor.sigma_g_frac", "clustering scale for gain, fraction of g_max", |c| c.planner.anchor.sigma_g_frac, |m, v| m.planner.anchor.sigma_g_frac = num(v)?),
    key!("anchor.eps", "DBSCAN radius in scaled units", |c| c.planner.anchor.eps, |m, v| m.planner.anchor.eps = num(v)?),
    key!("anchor.min_cluster_size", "smallest cluster, pixels", |c| c.planner.anchor.min_cluster_size, |m, v| m.planner.anchor.min_cluster_size = num(v)?),
    key!("anchor.vertical_dominance", "vertical share above which pitch is kept", |c| c.planner.anchor.vertical_dominance, |m, v| m.planner.anchor.vertical_dominance = num(v)?),
    key!("anchor.require_clear_ray", "keep only pixels with a clear ray to the lift depth", |c| c.planner.anchor.require_clear_ray, |m, v| m.planner.anchor.require_clear_ray = boolean(v)?),
    key!("store.merge_dist", "merge distance, meters", |c| c.planner.store.merge_dist, |m, v| m.planner.store.merge_dist = num(v)?),
    key!("store.merge_angle_deg", "merge angle", |c| c.planner.store.merge_angle_deg, |m, v| m.planner.store.merge_angle_deg = num(v)?),
    key!("store.prune_dist", "visited-pose pruning distance, meters", |c| c.planner.store.prune_dist, |m, v| m.planner.store.prune_dist = num(v)?),
    key!("store.prune_angle_deg", "visited-pose pruning angle", |c| c.planner.store.prune_angle_deg, |m, v| m.planner.store.prune_angle_deg = num(v)?),
    key!("store.g_min", "smallest adjusted gain kept, voxels", |c| c.planner.store.g_min, |m, v| m.planner.store.g_min = num(v)?),
    key!("planner.mode", "frontiernet, classic or mapfree", |c| c.planner.mode, |m, v| m.planner.mode = v.parse()?),
    key!(
        "planner.ablation",
        "df+gain, df+uni, discon+gain or discon+uni",
        |c| ablation_name(c.planner.mask_mode, c.planner.gain_mode),
        |m, v| (m.planner.mask_mode, m.planner.gain_mode) = parse_ablation(v)?
    ),
    key!("planner.step_dist", "translation per step, meters", |c| c.planner.step_dist, |m, v| m.planner.step_dist = num(v)?),
    key!("planner.step_angle_deg", "rotation per step", |c| c.planner.step_angle_deg, |m, v| m.planner.step_angle_deg = num(v)?),
    key!("planner.inflation", "obstacle inflation, meters", |c| c.planner.inflation, |m, v| m.planner.inflation = num(v)?),
    key!("planner.d_floor", "distance floor in the utility, meters", |c| c.planner.d_floor, |m, v| m.planner.d_floor = num(v)?),
    key!("planner.k_obs", "steps between observations", |c| c.planner.k_obs, |m, v| m.planner.k_obs = num(v)?),
    key!("planner.max_steps", "step budget", |c| c.planner.max_steps, |m, v| m.planner.max_steps = num(v)?),
    key!("planner.entry_samples", "entry-point samples per tree edge", |c| c.planner.entry_samples, |m, v| m.planner.entry_samples = num(v)?),
    key!("planner.goal_dist_tol", "goal arrival distance, meters", |c| c.planner.goal_dist_tol, |m, v| m.planner.goal_dist_tol = num(v)?),
    key!("planner.goal_angle_tol_deg", "goal arrival angle", |c| c.planner.goal_angle_tol_deg, |m, v| m.planner.goal_angle_tol_deg = num(v)?),
    key!("planner.max_plan_failures", "failed plans before a frontier is dropped", |c| c.planner.max_plan_failures, |m, v| m.planner.max_plan_failures = num(v)?),
    key!("planner.look_around_yaws", "initial views per pitch", |c| c.planner.look_around_yaws, |m, v| m.planner.look_around_yaws = num(v)?),
    key!(
        "planner.look_around_pitches_deg",
        "pitches of the initial views",
        |c| join(&c.planner.look_around_pitches_deg),
        |m, v| m.planner.look_around_pitches_deg = floats(v)?
    ),
    key!(
        "planner.gain_pruning",
        "prune by map-adjusted gain; auto is on except in mapfree",
        |c| c.gain_pruning.map_or("auto".to_string(), |b| b.to_string()),
        |m, v| m.gain_pruning = if v == "auto" { None } else { Some(boolean(v)?) }
    ),
    key!("classic.min_cluster_size", "smallest frontier cluster, voxels", |c| c.planner.classic.min_cluster_size, |m, v| m.planner.classic.min_cluster_size = num(v)?),
    key!("classic.inflation", "obstacle inflation, meters", |c| c.planner.classic.inflation, |m, v| m.planner.classic.inflation = num(v)?),
    key!("classic.reach_radius", "search radius for a reachable goal, meters", |c| c.planner.classic.reach_radius, |m, v| m.planner.classic.reach_radius = num(v)?),
    key!("classic.revisit_radius", "radius around reached goals that is skipped, meters", |c| c.planner.classic.revisit_radius, |m, v| m.planner.classic.revisit_radius = num(v)?),
    key!("suite.scenes", "scene files, relative to the config file", |c| join(&c.suite.scenes), |m, v| m.suite.scenes = list(v)),
    key!("suite.generate", "procedural scenes generated from seeds seed .. seed+n", |c| c.suite.generate, |m, v| m.suite.generate = num(v)?),
    key!("suite.starts", "start poses per scene", |c| c.suite.starts, |m, v| m.suite.starts = num(v)?),
    key!("suite.repeats", "repeats per start and config", |c| c.suite.repeats, |m, v| m.suite.repeats = num(v)?),
    key!("suite.configs", "planner configs: a mode, an ablation, or mode:ablation", |c| join(&c.suite.configs), |m, v| m.suite.configs = list(v)),
];

fn find(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// Every key with its default, one per line.
pub fn help_text() -> String {
    let d = RunConfig::default();
    let mut s = String::from("Config keys (flat `key = value`, `#` starts a comment):\n");
    for k in KEYS {
        let _ = writeln!(s, "  {} = {}\n      {}", k.name, (k.get)(&d), k.help);
    }
    s
}

/// `(line, key, value)` triples from config text.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
            line: n + 1,
            msg: format!("expected `key = value`, found '{line}'"),
        })?;
        out.push((n + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Command-line overrides share this line number in error messages.
pub const OVERRIDE_LINE: usize = 0;

impl RunConfig {
    /// Builds a config from `(line, key, value)` assignments. Camera keys
    /// apply first so that pixel scaling happens before explicit pixel
    /// settings.
    pub fn from_pairs(pairs: &[(usize, String, String)]) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        let err = |line: usize, msg: String| CliError::Config { line, msg };
        for (line, k, _) in pairs {
            if find(k).is_none() {
                return Err(err(*line, format!("unknown key '{k}'")));
            }
        }
        let camera_first = |k: &str| k.starts_with("camera.");
        for (line, k, v) in pairs.iter().filter(|p| camera_first(&p.1)) {
            (find(k).unwrap().set)(&mut c, v).map_err(|m| err(*line, format!("{k}: {m}")))?;
        }
        if c.scale_pixels {
            let (mut o, mut a) = (OracleParams::default(), AnchorParams::default());
            scale_to_camera(&mut o, &mut a, c.camera.width);
            c.planner.oracle = o;
            c.planner.anchor = a;
        }
        for (line, k, v) in pairs.iter().filter(|p| !camera_first(&p.1)) {
            (find(k).unwrap().set)(&mut c, v).map_err(|m| err(*line, format!("{k}: {m}")))?;
        }
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    /// Planner settings with the pruning policy resolved.
    pub fn planner_config(&self) -> PlannerConfig {
        let mut p = self.planner.clone();
        p.gain_pruning = self.gain_pruning.unwrap_or(p.mode != PlannerMode::MapFree);
        p
    }

    /// Planner settings for a suite config token.
    pub fn suite_planner(&self, token: &str) -> Result<PlannerConfig, String> {
        let mut c = self.clone();
        let (mode, abl) = match token.split_once(':') {
            Some((m, a)) => (Some(m), Some(a)),
            None if token.parse::<PlannerMode>().is_ok() => (Some(token), None),
            None => (None, Some(token)),
        };
        if let Some(m) = mode {
            c.planner.mode = m.parse()?;
        } else {
            c.planner.mode = PlannerMode::FrontierNet;
        }
        if let Some(a) = abl {
            (c.planner.mask_mode, c.planner.gain_mode) = parse_ablation(a)?;
        }
        Ok(c.planner_config())
    }

    /// Every key with its current value, in table order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            let _ = writeln!(s, "{} = {}", k.name, (k.get)(self));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_dump() {
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.dump()).unwrap(), d);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let e = RunConfig::parse("seed = 1\nbogus = 2\n").unwrap_err();
        assert!(matches!(e, CliError::Config { line: 2, .. }), "{e}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = RunConfig::parse("# header\n\nseed = 9 # trailing\n").unwrap();
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn small_camera_scales_pixel_defaults() {
        let c = RunConfig::parse("camera.width = 64\ncamera.height = 64\n").unwrap();
        assert!((c.planner.anchor.sigma_px - 3.2).abs() < 1e-12);
        let c = RunConfig::parse("anchor.sigma_px = 7\ncamera.width = 64\n").unwrap();
        assert_eq!(c.planner.anchor.sigma_px, 7.0);
        let c = RunConfig::parse("camera.width = 64\ncamera.scale_pixels = false\n").unwrap();
        assert_eq!(c.planner.anchor.sigma_px, 24.0);
    }

    #[test]
    fn pruning_follows_mode() {
        let c = RunConfig::parse("planner.mode = mapfree\n").unwrap();
        assert!(!c.planner_config().gain_pruning);
        assert!(RunConfig::default().planner_config().gain_pruning);
    }

    #[test]
    fn suite_tokens() {
        let c = RunConfig::default();
        let p = c.suite_planner("discon+uni").unwrap();
        assert_eq!(p.mode, PlannerMode::FrontierNet);
        assert_eq!(ablation_name(p.mask_mode, p.gain_mode), "discon+uni");
        assert_eq!(c.suite_planner("classic").unwrap().mode, PlannerMode::Classic);
        assert!(!c.suite_planner("mapfree:df+uni").unwrap().gain_pruning);
        assert!(c.suite_planner("warp").is_err());
    }
}
