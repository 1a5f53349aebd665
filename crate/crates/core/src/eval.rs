//! Coverage metrics, suite execution and configuration comparison.

use std::io::Write;
use std::time::Instant;

use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::planner::{run_exploration, ExplorationLog, PlannerConfig};
use crate::world::scene_gen::clear_positions;
use crate::world::{CameraModel, Pose, VoxelGrid, WorldError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("exploration log has no coverage trace")]
    EmptyLog,
    #[error("invalid suite: {0}")]
    InvalidSuite(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coverage stages whose step budgets the suite derives.
pub const STAGES: [f64; 2] = [25.0, 50.0];

/// `(step, coverage %)` points: the initial observation at step 0, then one
/// per logged step.
pub fn coverage_trace(log: &ExplorationLog) -> Result<Vec<(f64, f64)>, EvalError> {
    if log.total_voxels == 0 {
        return Err(EvalError::EmptyLog);
    }
    let pct = |k: usize| 100.0 * log.known_fraction(k);
    let mut t = vec![(0.0, pct(log.initial_known))];
    for r in &log.rows {
        let s = r.step as f64;
        if t.last().unwrap().0 == s {
            t.last_mut().unwrap().1 = pct(r.known_voxels);
        } else {
            t.push((s, pct(r.known_voxels)));
        }
    }
    Ok(t)
}

/// Coverage % at a (possibly fractional) step budget, linearly
/// interpolated and clamped to the last recorded step.
pub fn coverage_at(log: &ExplorationLog, budget: f64) -> Result<f64, EvalError> {
    let t = coverage_trace(log)?;
    let last = *t.last().unwrap();
    if budget >= last.0 {
        return Ok(last.1);
    }
    if budget <= 0.0 {
        return Ok(t[0].1);
    }
    let k = t.partition_point(|p| p.0 <= budget);
    let (a, b) = (t[k - 1], t[k]);
    Ok(a.1 + (b.1 - a.1) * (budget - a.0) / (b.0 - a.0))
}

/// Vox@k: coverage at the budget the suite assigned to stage `k`.
pub fn vox_at_k(log: &ExplorationLog, _k_percent: f64, step_budget: f64) -> Result<f64, EvalError> {
    coverage_at(log, step_budget)
}

/// First step at which coverage reaches `stage` %, if ever.
pub fn steps_to_reach(log: &ExplorationLog, stage: f64) -> Option<usize> {
    let t = coverage_trace(log).ok()?;
    t.iter().find(|p| p.1 >= stage).map(|p| p.0 as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scene: String,
    pub start_idx: usize,
    pub config: String,
    pub repeat: usize,
    pub seed: u64,
    pub vox25: f64,
    pub vox50: f64,
    pub vox100: f64,
    pub success: bool,
    pub steps: usize,
    pub wallclock_ms: u64,
    pub collided: bool,
    /// Set when the run itself failed to execute.
    pub error: Option<String>,
}

/// Mean and sample standard deviation of one metric set.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scene: String,
    pub config: String,
    pub kind: &'static str,
    pub vox25: f64,
    pub vox50: f64,
    pub vox100: f64,
    /// Success rate, percent.
    pub success: f64,
    pub steps: f64,
    pub wallclock_ms: f64,
}

pub struct SuiteScene {
    pub id: String,
    pub grid: VoxelGrid,
    pub starts: Vec<Pose>,
}

pub struct SuiteSpec {
    pub scenes: Vec<SuiteScene>,
    pub configs: Vec<(String, PlannerConfig)>,
    pub repeats: usize,
    pub camera: CameraModel,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
    /// Record wall-clock times (breaks byte-identical reruns).
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub records: Vec<MetricsRecord>,
    pub summary: Vec<SummaryRow>,
    /// Per scene: budgets for the 25 % and 50 % stages and the full budget.
    pub budgets: Vec<(String, [f64; 3])>,
}

/// Run seed derived from the cell key.
pub fn cell_seed(scene: &str, start_idx: usize, config: &str, repeat: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(format!("{scene}\u{1f}{start_idx}\u{1f}{config}\u{1f}{repeat}").as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// `n` start poses drawn from positions at `height` with `clearance` to
/// the nearest Occupied voxel, facing +x.
pub fn pick_starts(grid: &VoxelGrid, n: usize, height: f64, clearance: f64, seed: u64) -> Vec<Pose> {
    let mut pos: Vec<Vector3<f64>> = clear_positions(grid, height, clearance);
    pos.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pos.into_iter().take(n).map(|p| Pose::from_yaw_pitch(p, 0.0, 0.0)).collect()
}

struct Cell {
    scene: usize,
    start: usize,
    config: usize,
    repeat: usize,
}

pub fn run_suite(spec: &SuiteSpec) -> Result<SuiteResult, EvalError> {
    if spec.scenes.is_empty() || spec.configs.is_empty() || spec.repeats == 0 {
        return Err(EvalError::InvalidSuite("suite needs scenes, configs and repeats".into()));
    }
    if spec.scenes.iter().any(|s| s.starts.is_empty()) {
        return Err(EvalError::InvalidSuite("every scene needs a start pose".into()));
    }
    let mut names: Vec<&str> = spec.configs.iter().map(|c| c.0.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != spec.configs.len() {
        return Err(EvalError::InvalidSuite("config names must be unique".into()));
    }
    let max_steps = spec.configs.iter().map(|c| c.1.max_steps).max().unwrap();

    let mut cells = Vec::new();
    for (si, s) in spec.scenes.iter().enumerate() {
        for start in 0..s.starts.len() {
            for config in 0..spec.configs.len() {
                for repeat in 0..spec.repeats {
                    cells.push(Cell { scene: si, start, config, repeat });
                }
            }
        }
    }
    let run = |c: &Cell| {
        let s = &spec.scenes[c.scene];
        let (name, cfg) = &spec.configs[c.config];
        let seed = cell_seed(&s.id, c.start, name, c.repeat);
        let t = Instant::now();
        let log = run_exploration(&s.grid, &s.starts[c.start], &spec.camera, cfg, seed);
        let ms = if spec.timing { t.elapsed().as_millis() as u64 } else { 0 };
        log::debug!("cell {} start {} {} repeat {} finished", s.id, c.start, name, c.repeat);
        (seed, log, ms)
    };
    let outputs: Vec<(u64, Result<ExplorationLog, WorldError>, u64)> = if spec.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| EvalError::InvalidSuite(e.to_string()))?;
        pool.install(|| cells.par_iter().map(run).collect())
    } else {
        cells.iter().map(run).collect()
    };

    let mut budgets = Vec::new();
    for (si, s) in spec.scenes.iter().enumerate() {
        let logs: Vec<&ExplorationLog> = cells
            .iter()
            .zip(&outputs)
            .filter(|(c, _)| c.scene == si)
            .filter_map(|(_, o)| o.1.as_ref().ok())
            .collect();
        let mut b = [max_steps as f64; 3];
        for (k, &stage) in STAGES.iter().enumerate() {
            if !logs.is_empty() {
                let sum: f64 = logs.iter().map(|l| steps_to_reach(l, stage).unwrap_or(max_steps) as f64).sum();
                b[k] = sum / logs.len() as f64;
            }
        }
        budgets.push((s.id.clone(), b));
    }

    let mut records = Vec::with_capacity(cells.len());
    for (c, (seed, log, ms)) in cells.iter().zip(outputs) {
        let s = &spec.scenes[c.scene];
        let b = budgets[c.scene].1;
        let mut r = MetricsRecord {
            scene: s.id.clone(),
            start_idx: c.start,
            config: spec.configs[c.config].0.clone(),
            repeat: c.repeat,
            seed,
            vox25: 0.0,
            vox50: 0.0,
            vox100: 0.0,
            success: false,
            steps: 0,
            wallclock_ms: ms,
            collided: false,
            error: None,
        };
        match log {
            Ok(log) => {
                r.vox25 = coverage_at(&log, b[0])?;
                r.vox50 = coverage_at(&log, b[1])?;
                r.vox100 = coverage_at(&log, b[2])?;
                r.success = r.vox100 > 40.0;
                r.steps = log.steps();
                r.collided = log.collided();
            }
            Err(e) => r.error = Some(e.to_string()),
        }
        records.push(r);
    }
    records.sort_by(|a, b| (&a.scene, a.start_idx, &a.config, a.repeat).cmp(&(&b.scene, b.start_idx, &b.config, b.repeat)));
    let summary = summarize(&records);
    Ok(SuiteResult { records, summary, budgets })
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Mean and standard-deviation rows per (scene, config), in record order.
pub fn summarize(records: &[MetricsRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str)> = records.iter().map(|r| (r.scene.as_str(), r.config.as_str())).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut out = Vec::new();
    for (scene, config) in keys {
        let rs: Vec<&MetricsRecord> = records.iter().filter(|r| r.scene == scene && r.config == config).collect();
        let col = |f: &dyn Fn(&MetricsRecord) -> f64| mean_std(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
        let v25 = col(&|r| r.vox25);
        let v50 = col(&|r| r.vox50);
        let v100 = col(&|r| r.vox100);
        let succ = col(&|r| if r.success { 100.0 } else { 0.0 });
        let steps = col(&|r| r.steps as f64);
        let ms = col(&|r| r.wallclock_ms as f64);
        for (kind, pick) in [("mean", 0usize), ("std", 1)] {
            let g = |p: (f64, f64)| if pick == 0 { p.0 } else { p.1 };
            out.push(SummaryRow {
                scene: scene.to_string(),
                config: config.to_string(),
                kind,
                vox25: g(v25),
                vox50: g(v50),
                vox100: g(v100),
                success: g(succ),
                steps: g(steps),
                wallclock_ms: g(ms),
            });
        }
    }
    out
}

/// Per-scene difference of mean Vox@k between configs `a` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub scene: String,
    pub d25: f64,
    pub d50: f64,
    pub d100: f64,
}

pub fn compare(summary: &[SummaryRow], a: &str, b: &str) -> Result<Vec<CompareRow>, EvalError> {
    let mean = |scene: &str, cfg: &str| summary.iter().find(|r| r.kind == "mean" && r.scene == scene && r.config == cfg);
    let mut scenes: Vec<&str> = summary.iter().map(|r| r.scene.as_str()).collect();
    scenes.dedup();
    let mut out = Vec::new();
    for s in scenes {
        let (Some(x), Some(y)) = (mean(s, a), mean(s, b)) else {
            return Err(EvalError::InvalidSuite(format!("compare needs configs '{a}' and '{b}' in scene '{s}'")));
        };
        out.push(CompareRow {
            scene: s.to_string(),
            d25: x.vox25 - y.vox25,
            d50: x.vox50 - y.vox50,
            d100: x.vox100 - y.vox100,
        });
    }
    Ok(out)
}

const HEADER: [&str; 11] = ["scene", "start_idx", "config", "repeat", "seed", "vox25", "vox50", "vox100", "success", "steps", "wallclock_ms"];

/// Suite CSV: one row per cell, then mean/std rows per (scene, config)
/// with `start_idx = all`.
pub fn write_suite_csv<W: Write>(out: W, res: &SuiteResult) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in &res.records {
        w.write_record([
            r.scene.clone(),
            r.start_idx.to_string(),
            r.config.clone(),
            r.repeat.to_string(),
            r.seed.to_string(),
            format!("{:.4}", r.vox25),
            format!("{:.4}", r.vox50),
            format!("{:.4}", r.vox100),
            r.success.to_string(),
            r.steps.to_string(),
            r.wallclock_ms.to_string(),
        ])?;
    }
    for s in &res.summary {
        w.write_record([
            s.scene.clone(),
            "all".into(),
            s.config.clone(),
            s.kind.into(),
            String::new(),
            format!("{:.4}", s.vox25),
            format!("{:.4}", s.vox50),
            format!("{:.4}", s.vox100),
            format!("{:.4}", s.success),
            format!("{:.4}", s.steps),
            format!("{:.4}", s.wallclock_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Comparison block: a marker line, then scene, a, b, dvox25, dvox50,
/// dvox100 rows.
pub fn write_compare_csv<W: Write>(mut out: W, a: &str, b: &str, rows: &[CompareRow]) -> Result<(), EvalError> {
    writeln!(out, "# compare {a} - {b}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scene", "a", "b", "dvox25", "dvox50", "dvox100"])?;
    for r in rows {
        w.write_record([
            r.scene.clone(),
            a.to_string(),
            b.to_string(),
            format!("{:.4}", r.d25),
            format!("{:.4}", r.d50),
            format!("{:.4}", r.d100),
        ])?;
    }
    w.flush()?;
    Ok(())
}
