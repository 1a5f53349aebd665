//! The four subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;

use frontier_core::anchor::anchor_frame;
use frontier_core::eval::{compare, pick_starts, run_suite, write_compare_csv, write_suite_csv, SuiteScene, SuiteSpec};
use frontier_core::oracle::{oracle_predict, FrontierPredictor, OraclePredictor, PredictionInput};
use frontier_core::planner::{parse_ablation, run_exploration_with, Event, PlannerMode};
use frontier_core::raster::{mask_to_gray, write_fdep, write_pgm, Raster};
use frontier_core::world::{generate_scene, load_scene, render_depth, save_scene, Pose, PoseId, VoxelGrid, VoxelState};

use crate::config::{parse_pairs, OVERRIDE_LINE};
use crate::{CliError, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "frontier", version, about = "Frontier-based exploration simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a procedural floorplan scene file.
    SceneGen(SceneGenArgs),
    /// Write oracle rasters (and optionally anchored clusters) for one view.
    OracleDump(OracleDumpArgs),
    /// Run one exploration episode and write its log.
    Explore(ExploreArgs),
    /// Run an evaluation suite and write the suite CSV.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Run configuration file (flat `key = value`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SceneGenArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Outer extent `x,y,z` in meters; overrides the scene.extent_* keys.
    #[arg(long, value_name = "X,Y,Z")]
    pub extent: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleDumpArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub scene: PathBuf,
    /// Camera pose `x,y,z[,yaw_deg[,pitch_deg]]`.
    #[arg(long, value_name = "POSE")]
    pub pose: String,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write the anchored 2D clusters as anchor.csv.
    #[arg(long)]
    pub anchor: bool,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long)]
    pub scene: PathBuf,
    /// Start pose `x,y,z[,yaw_deg[,pitch_deg]]`; picked from free space
    /// when absent.
    #[arg(long, value_name = "POSE")]
    pub start: Option<String>,
    /// Exploration log CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// frontiernet, classic or mapfree.
    #[arg(long)]
    pub mode: Option<String>,
    /// df+gain, df+uni, discon+gain or discon+uni.
    #[arg(long)]
    pub ablation: Option<String>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Directory for frontier store snapshots, one per observation.
    #[arg(long)]
    pub dump_frontiers: Option<PathBuf>,
    /// Directory for robot map snapshots, one per observation.
    #[arg(long)]
    pub dump_maps: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Suite config: a run config with `suite.*` keys. Defaults to --config.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Append per-scene mean differences `a - b` of two configs.
    #[arg(long, value_name = "A,B")]
    pub compare: Option<String>,
    /// Worker threads; 0 runs cells sequentially.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Record wall-clock time per cell (makes the output nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn out_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(out_err(path))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(out_err(path))?))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(bytes).and_then(|_| w.flush()).map_err(out_err(path))
}

/// Loads `--config`, then applies `--set` and `--seed` overrides.
pub fn load_config(a: &ConfigArgs, file: Option<&Path>) -> Result<RunConfig, CliError> {
    let mut pairs = match file.or(a.config.as_deref()) {
        Some(p) => parse_pairs(&read_text(p)?)?,
        None => Vec::new(),
    };
    for s in &a.set {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{s}'")))?;
        pairs.push((OVERRIDE_LINE, k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = a.seed {
        pairs.push((OVERRIDE_LINE, "seed".into(), seed.to_string()));
    }
    RunConfig::from_pairs(&pairs)
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("malformed {what} '{s}'")))
}

/// `x,y,z[,yaw_deg[,pitch_deg]]`.
pub fn parse_pose(s: &str) -> Result<Pose, CliError> {
    let v = parse_floats(s, "pose")?;
    if !(3..=5).contains(&v.len()) {
        return Err(CliError::Usage(format!("pose needs 3 to 5 numbers, got '{s}'")));
    }
    let at = |i: usize| v.get(i).copied().unwrap_or(0.0);
    Ok(Pose::from_yaw_pitch_deg(Vector3::new(v[0], v[1], v[2]), at(3), at(4)))
}

fn load_scene_file(path: &Path) -> Result<VoxelGrid, CliError> {
    let text = read_text(path)?;
    load_scene(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn cmd_scene_gen(a: &SceneGenArgs) -> Result<(), CliError> {
    let mut c = load_config(&a.cfg, None)?;
    if let Some(e) = &a.extent {
        let v = parse_floats(e, "extent")?;
        if v.len() != 3 {
            return Err(CliError::Usage(format!("extent needs 3 numbers, got '{e}'")));
        }
        c.scene.extent = [v[0], v[1], v[2]];
    }
    c.scene.validate()?;
    let s = generate_scene(c.seed, &c.scene)?;
    write_file(&a.out, save_scene(&s.grid).as_bytes())?;
    let g = &s.grid;
    let d = g.dims();
    println!(
        "dims {} {} {}  free fraction {:.4}  rooms {}",
        d[0],
        d[1],
        d[2],
        g.count(VoxelState::Free) as f64 / g.len() as f64,
        s.rooms.len()
    );
    log::info!("wrote {}", a.out.display());
    Ok(())
}

pub fn cmd_oracle_dump(a: &OracleDumpArgs) -> Result<(), CliError> {
    let c = load_config(&a.cfg, None)?;
    let pose = parse_pose(&a.pose)?;
    let scene = load_scene_file(&a.scene)?;
    c.camera.validate()?;
    c.planner.oracle.validate()?;
    let r = oracle_predict(&scene, &pose, &c.camera, &c.planner.oracle, c.seed)?;
    let dir = &a.out_dir;
    fs::create_dir_all(dir).map_err(out_err(dir))?;
    let pgm = |name: &str, img: &Raster<u8>| -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_pgm(&mut buf, img).map_err(out_err(dir))?;
        write_file(&dir.join(name), &buf)
    };
    let fdep = |name: &str, img: &Raster<f64>| -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_fdep(&mut buf, img).map_err(out_err(dir))?;
        write_file(&dir.join(name), &buf)
    };
    pgm("f.pgm", &mask_to_gray(&r.f))?;
    pgm("f_p.pgm", &mask_to_gray(&r.f_p))?;
    pgm("f_d.pgm", &mask_to_gray(&r.f_d))?;
    let scale = (255 / (c.planner.oracle.classes - 1).max(1)) as u8;
    pgm("y.pgm", &r.y.map(|&k| k.saturating_mul(scale)))?;
    fdep("d.fdep", &r.d)?;
    fdep("d_norm.fdep", &r.d_norm)?;
    fdep("g.fdep", &r.g)?;
    fdep("depth.fdep", &r.depth)?;
    let p = pose.position;
    let mut side = format!(
        "pose = {}, {}, {}, {}, {}\ng_max = {}\nfrontier_pixels = {}\n",
        p.x,
        p.y,
        p.z,
        pose.yaw().to_degrees(),
        pose.pitch().to_degrees(),
        r.g_max,
        r.f.count_on()
    );
    side.push_str(&c.dump());
    write_file(&dir.join("params.txt"), side.as_bytes())?;

    if a.anchor {
        let predictor = OraclePredictor::new(c.planner.oracle.clone());
        let depth = render_depth(&scene, &pose, &c.camera)?;
        let input = PredictionInput {
            scene: &scene,
            pose: &pose,
            camera: &c.camera,
            depth: &depth,
            seed: c.seed,
        };
        let pred = predictor.predict(&input)?;
        let out = anchor_frame(&pred, &depth, &pose, &c.camera, PoseId(0), &c.planner.anchor);
        let path = dir.join("anchor.csv");
        let mut w = csv::Writer::from_writer(create(&path)?);
        let werr = |e: csv::Error| CliError::Output {
            path: path.display().to_string(),
            source: e.into(),
        };
        w.write_record(["image_id", "x", "y", "phi_deg", "gain", "depth", "size"]).map_err(werr)?;
        for cl in &out.clusters {
            w.write_record([
                "0".to_string(),
                cl.centroid_px.0.to_string(),
                cl.centroid_px.1.to_string(),
                format!("{:.3}", cl.phi_bar.to_degrees()),
                format!("{:.3}", cl.gain_bar),
                format!("{:.4}", cl.depth_bar),
                cl.size.to_string(),
            ])
            .map_err(werr)?;
        }
        w.flush().map_err(out_err(&path))?;
        println!("clusters {}", out.clusters.len());
    }
    println!("frontier pixels {}", r.f.count_on());
    Ok(())
}

pub fn cmd_explore(a: &ExploreArgs) -> Result<(), CliError> {
    let mut c = load_config(&a.cfg, None)?;
    if let Some(m) = &a.mode {
        c.planner.mode = m.parse::<PlannerMode>().map_err(CliError::Usage)?;
    }
    if let Some(s) = &a.ablation {
        (c.planner.mask_mode, c.planner.gain_mode) = parse_ablation(s).map_err(CliError::Usage)?;
    }
    if let Some(n) = a.max_steps {
        c.planner.max_steps = n;
    }
    let cfg = c.planner_config();
    cfg.validate()?;
    let scene = load_scene_file(&a.scene)?;
    let start = match &a.start {
        Some(s) => parse_pose(s)?,
        None => *pick_starts(&scene, 1, c.start_height, c.start_clearance, c.seed)
            .first()
            .ok_or_else(|| CliError::Input("no clear start position in scene".into()))?,
    };
    for d in [&a.dump_frontiers, &a.dump_maps].into_iter().flatten() {
        fs::create_dir_all(d).map_err(out_err(d))?;
    }
    let mut dump_err: Option<CliError> = None;
    let log = run_exploration_with(&scene, &start, &c.camera, &cfg, c.seed, |st| {
        if dump_err.is_some() || !(st.step == 0 || st.events.contains(&Event::Observe)) {
            return;
        }
        if let Some(d) = &a.dump_frontiers {
            let path = d.join(format!("frontiers_{:05}.csv", st.step));
            let r = create(&path).and_then(|w| {
                st.store.write_csv(w).map_err(|e| CliError::Output {
                    path: path.display().to_string(),
                    source: e.into(),
                })
            });
            dump_err = r.err();
        }
        if let Some(d) = &a.dump_maps {
            let path = d.join(format!("map_{:05}.vox", st.step));
            if let Err(e) = write_file(&path, save_scene(st.map).as_bytes()) {
                dump_err = Some(e);
            }
        }
    })?;
    if let Some(e) = dump_err {
        return Err(e);
    }
    let w = create(&a.out)?;
    log.write_csv(w).map_err(|e| CliError::Output {
        path: a.out.display().to_string(),
        source: e.into(),
    })?;
    let last = log.final_known();
    println!(
        "steps {}  coverage {:.2}%  termination {}",
        log.steps(),
        100.0 * log.known_fraction(last),
        log.termination.as_str()
    );
    if log.collided() {
        return Err(CliError::RunFailure(format!("collision at step {}", log.steps())));
    }
    Ok(())
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let file = a.suite.as_deref().or(a.cfg.config.as_deref());
    let c = load_config(&a.cfg, file)?;
    let base = file.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
    let mut scenes = Vec::new();
    for rel in &c.suite.scenes {
        let path = base.join(rel);
        let grid = load_scene_file(&path)?;
        let id = Path::new(rel).file_stem().map_or(rel.clone(), |s| s.to_string_lossy().into_owned());
        scenes.push((id, grid));
    }
    for s in 0..c.suite.generate as u64 {
        scenes.push((format!("gen{s}"), generate_scene(c.seed.wrapping_add(s), &c.scene)?.grid));
    }
    if scenes.is_empty() {
        return Err(CliError::Usage("suite has no scenes (set suite.scenes or suite.generate)".into()));
    }
    let mut suite_scenes = Vec::new();
    for (k, (id, grid)) in scenes.into_iter().enumerate() {
        let starts = pick_starts(&grid, c.suite.starts, c.start_height, c.start_clearance, c.seed.wrapping_add(k as u64));
        if starts.len() < c.suite.starts {
            return Err(CliError::Input(format!("scene {id} has too few clear start positions")));
        }
        suite_scenes.push(SuiteScene { id, grid, starts });
    }
    let mut configs = Vec::new();
    for t in &c.suite.configs {
        let p = c.suite_planner(t).map_err(|m| CliError::Usage(format!("suite config '{t}': {m}")))?;
        p.validate()?;
        configs.push((t.clone(), p));
    }
    let pair = match &a.compare {
        Some(s) => {
            let (x, y) = s.split_once(',').ok_or_else(|| CliError::Usage(format!("--compare expects A,B, got '{s}'")))?;
            let (x, y) = (x.trim().to_string(), y.trim().to_string());
            for n in [&x, &y] {
                if !c.suite.configs.contains(n) {
                    return Err(CliError::Usage(format!("--compare names unknown config '{n}'")));
                }
            }
            Some((x, y))
        }
        None => None,
    };
    let spec = SuiteSpec {
        scenes: suite_scenes,
        configs,
        repeats: c.suite.repeats,
        camera: c.camera,
        jobs: a.jobs,
        timing: a.timing,
    };
    let res = run_suite(&spec)?;
    let oe = |e: frontier_core::eval::EvalError| CliError::Output {
        path: a.out.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = create(&a.out)?;
    write_suite_csv(&mut w, &res).map_err(oe)?;
    if let Some((x, y)) = pair {
        let rows = compare(&res.summary, &x, &y)?;
        write_compare_csv(&mut w, &x, &y, &rows).map_err(oe)?;
    }
    w.flush().map_err(out_err(&a.out))?;
    let failed = res.records.iter().filter(|r| r.error.is_some()).count();
    println!("cells {}  failed {}", res.records.len(), failed);
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::SceneGen(a) => cmd_scene_gen(a),
        Command::OracleDump(a) => cmd_oracle_dump(a),
        Command::Explore(a) => cmd_explore(a),
        Command::Evaluate(a) => cmd_evaluate(a),
    }
}
