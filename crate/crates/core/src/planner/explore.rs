//! The closed exploration loop: observe, predict, anchor, maintain the
//! frontier store and tree, select a goal, plan and step.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::Vector3;

use crate::anchor::{anchor_frame, FrontierStatus};
use crate::frontier_store::{FrontierStore, TrajectoryMemory};
use crate::oracle::{FrontierPredictor, OraclePredictor, PredictionInput};
use crate::world::raycast::segment_hits;
use crate::world::render::check_pose;
use crate::world::{angle_between, integrate_observation, render_depth, CameraModel, DepthImage, Pose, VoxelGrid, VoxelState, WorldError};

use super::classic::classic_baseline_step;
use super::goal::{find_entry_point, select_goal};
use super::path::{densify, plan_path_with, turn_to, Path, Traversability};
use super::tree::FrontierTree;
use super::{PlannerConfig, PlannerMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Observe,
    Replan,
    GoalReached,
    GoalInvalidated,
    Collision,
    Done,
}

impl Event {
    pub fn as_str(self) -> &'static str {
        match self {
            Event::Observe => "observe",
            Event::Replan => "replan",
            Event::GoalReached => "goal_reached",
            Event::GoalInvalidated => "goal_invalidated",
            Event::Collision => "collision",
            Event::Done => "done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    NoFrontiers,
    MaxSteps,
    Collision,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::NoFrontiers => "no_frontiers",
            Termination::MaxSteps => "max_steps",
            Termination::Collision => "collision",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: usize,
    pub pose: Pose,
    pub known_voxels: usize,
    pub goal_id: Option<u64>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationLog {
    pub rows: Vec<LogRow>,
    /// Known voxels after the initial look-around.
    pub initial_known: usize,
    /// Ground-truth voxel count used as the coverage denominator.
    pub total_voxels: usize,
    pub termination: Termination,
}

impl ExplorationLog {
    pub fn known_fraction(&self, known: usize) -> f64 {
        known as f64 / self.total_voxels as f64
    }

    pub fn final_known(&self) -> usize {
        self.rows.last().map_or(self.initial_known, |r| r.known_voxels)
    }

    pub fn steps(&self) -> usize {
        self.rows.last().map_or(0, |r| r.step)
    }

    pub fn collided(&self) -> bool {
        self.termination == Termination::Collision
    }

    /// CSV with columns step, x, y, z, yaw_deg, pitch_deg, known_voxels,
    /// known_fraction, goal_id, event. Multiple events in one step are
    /// joined with `;`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "x", "y", "z", "yaw_deg", "pitch_deg", "known_voxels", "known_fraction", "goal_id", "event"])?;
        for r in &self.rows {
            let ev: Vec<&str> = r.events.iter().map(|e| e.as_str()).collect();
            w.write_record([
                r.step.to_string(),
                fixed(r.pose.position.x, 4),
                fixed(r.pose.position.y, 4),
                fixed(r.pose.position.z, 4),
                fixed(r.pose.yaw().to_degrees(), 3),
                fixed(r.pose.pitch().to_degrees(), 3),
                r.known_voxels.to_string(),
                format!("{:.6}", self.known_fraction(r.known_voxels)),
                r.goal_id.map(|g| g.to_string()).unwrap_or_default(),
                ev.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fixed-point text without a sign on values that round to zero.
fn fixed(v: f64, digits: usize) -> String {
    let s = format!("{v:.digits$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Read-only view of the loop state handed to observers after the initial
/// look-around and after every step.
pub struct StepState<'a> {
    pub step: usize,
    /// Events of this step; empty after the look-around.
    pub events: &'a [Event],
    pub pose: &'a Pose,
    pub map: &'a VoxelGrid,
    pub store: &'a FrontierStore,
    pub tree: &'a FrontierTree,
}

#[derive(Debug, Clone, PartialEq)]
enum Goal {
    /// `at_frontier` is false while heading for an entry point short of it.
    Frontier { id: u64, at_frontier: bool },
    Classic { centroid: Vector3<f64> },
    Spin,
}

#[derive(Debug, Clone, PartialEq)]
struct Plan {
    path: Path,
    next: usize,
    goal: Goal,
}

impl Plan {
    fn goal_id(&self) -> Option<u64> {
        match self.goal {
            Goal::Frontier { id, .. } => Some(id),
            _ => None,
        }
    }
}

struct Explorer<'a> {
    scene: &'a VoxelGrid,
    cam: &'a CameraModel,
    cfg: &'a PlannerConfig,
    predictor: OraclePredictor,
    seed: u64,
    map: VoxelGrid,
    known: usize,
    store: FrontierStore,
    tree: FrontierTree,
    traj: TrajectoryMemory,
    pose: Pose,
    trail: Vec<Pose>,
    observations: u64,
    failures: BTreeMap<u64, usize>,
    reached: Vec<Vector3<f64>>,
}

/// Drops repeated points and every excursion between two visits of the
/// same point.
fn remove_loops(pts: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let key = |p: &Vector3<f64>| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
    let mut out: Vec<Vector3<f64>> = Vec::with_capacity(pts.len());
    let mut seen: HashMap<[u64; 3], usize> = HashMap::new();
    for p in pts {
        if let Some(&j) = seen.get(&key(p)) {
            for q in out.drain(j + 1..) {
                seen.remove(&key(&q));
            }
            continue;
        }
        seen.insert(key(p), out.len());
        out.push(*p);
    }
    out
}

fn on_segment(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> bool {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((p - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (a + d * t - p).norm() < 1e-6
}

/// True if `p` lies in front of the surface observed in `depth`, checked
/// on the pixels around its projection. Every point of the segment from
/// the camera to `p` projects to the same place, so this certifies the
/// whole segment as seen.
fn sees(depth: &DepthImage, pose: &Pose, cam: &CameraModel, p: &Vector3<f64>) -> bool {
    let pc = pose.to_camera(p);
    let Some((u, v)) = cam.project(&pc) else { return false };
    if !cam.in_image(u, v) {
        return false;
    }
    let range = pc.norm();
    let (x0, y0) = ((u - 0.5).floor() as i64, (v - 0.5).floor() as i64);
    (0..2).all(|dy| {
        (0..2).all(|dx| {
            let (x, y) = ((x0 + dx).clamp(0, cam.width as i64 - 1), (y0 + dy).clamp(0, cam.height as i64 - 1));
            *depth.get(x as usize, y as usize) >= range
        })
    })
}

fn frame_seed(seed: u64, k: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Explorer<'_> {
    fn observe(&mut self) -> Result<(), WorldError> {
        let depth = render_depth(self.scene, &self.pose, self.cam)?;
        let integ = integrate_observation(&mut self.map, &self.pose, self.cam, &depth)?;
        self.known += integ.newly_known;
        self.observations += 1;
        if self.cfg.mode == PlannerMode::Classic {
            return Ok(());
        }
        let pid = self.tree.add_pose(self.pose, std::mem::take(&mut self.trail));
        self.traj.push(self.pose);
        let input = PredictionInput {
            scene: self.scene,
            pose: &self.pose,
            camera: self.cam,
            depth: &depth,
            seed: frame_seed(self.seed, self.observations),
        };
        let pred = self.predictor.predict(&input)?;
        let out = anchor_frame(&pred, &depth, &self.pose, self.cam, pid, &self.cfg.anchor);
        let sp = &self.cfg.store;
        for f in out.frontiers {
            // without a map the tree edge is the only route to the frontier
            if self.cfg.mode == PlannerMode::MapFree && !sees(&depth, &self.pose, self.cam, &f.p_bar) {
                continue;
            }
            let r = self.store.merge_or_insert(f, sp.merge_dist, sp.merge_angle_deg);
            for a in &r.absorbed {
                self.tree.remove(*a);
            }
            self.tree.register(r.id, pid);
            if self.cfg.mode == PlannerMode::MapFree && r.merged && !sees(&depth, &self.pose, self.cam, &self.store.get(r.id).unwrap().p_bar) {
                self.store.set_status(r.id, FrontierStatus::Invalid);
            }
        }
        if self.cfg.mode != PlannerMode::MapFree {
            self.store.adjust_gains(&self.map, self.cam, &integ.newly_known_voxels);
        }
        self.store.prune_invalid(&self.traj, self.cfg.gain_pruning, sp);
        Ok(())
    }

    fn fail(&mut self, id: u64, events: &mut Vec<Event>) {
        let n = self.failures.entry(id).or_insert(0);
        *n += 1;
        if *n >= self.cfg.max_plan_failures {
            self.store.set_status(id, FrontierStatus::Invalid);
            events.push(Event::GoalInvalidated);
        }
    }

    fn spin(&self) -> Plan {
        let mut way = vec![self.pose];
        way.extend(turn_to(&self.pose, self.pose.yaw() + TAU / 4.0, 0.0, self.cfg.step_angle_deg));
        Plan {
            path: Path::from_waypoints(way),
            next: 1,
            goal: Goal::Spin,
        }
    }

    fn plan(&mut self, events: &mut Vec<Event>) -> Option<Plan> {
        match self.cfg.mode {
            PlannerMode::FrontierNet => self.plan_mapped(events),
            PlannerMode::MapFree => self.plan_map_free(events),
            PlannerMode::Classic => self.plan_classic(),
        }
    }

    fn plan_mapped(&mut self, events: &mut Vec<Event>) -> Option<Plan> {
        let tr = Traversability::new(&self.map, self.cfg.inflation);
        let mut skip = BTreeSet::new();
        while let Some(id) = select_goal(&self.store, &self.pose.position, self.cfg.d_floor, &skip) {
            skip.insert(id);
            let f = self.store.get(id).unwrap().clone();
            let parent = self.tree.node(self.tree.parent(id).unwrap()).unwrap().pose.position;
            let c = find_entry_point(&f, &parent, &self.map, self.cfg.entry_samples);
            let at_frontier = c == f.p_bar;
            let pp = self.cfg.path_params(self.cfg.goal_dist_tol);
            match plan_path_with(&tr, &self.pose, &c, at_frontier.then_some(&f.q_bar), &pp) {
                Ok(path) if path.steps() > 0 => {
                    return Some(Plan {
                        path,
                        next: 1,
                        goal: Goal::Frontier { id, at_frontier },
                    })
                }
                Ok(_) if at_frontier => {
                    self.store.set_status(id, FrontierStatus::Consumed);
                    events.push(Event::GoalReached);
                }
                _ => self.fail(id, events),
            }
        }
        if self.store.active_count() == 0 {
            None
        } else {
            Some(self.spin())
        }
    }

    fn plan_map_free(&mut self, events: &mut Vec<Event>) -> Option<Plan> {
        let skip = BTreeSet::new();
        while let Some(id) = select_goal(&self.store, &self.pose.position, self.cfg.d_floor, &skip) {
            let f = self.store.get(id).unwrap().clone();
            let parent = self.tree.parent(id).unwrap();
            let here = self.tree.last().unwrap().id;
            let a = self.tree.node(parent).unwrap().pose.position;
            let mut pts = vec![self.pose.position];
            pts.extend(self.tree.path_back(here, parent).iter().map(|w| w.position));
            let mut pts = remove_loops(&pts);
            // leave the chain as soon as it touches the parent's edge
            if let Some(k) = pts.iter().position(|p| on_segment(p, &a, &f.p_bar)) {
                pts.truncate(k + 1);
            }
            pts.push(f.p_bar);
            let path = densify(&self.pose, &pts[1..], Some(&f.q_bar), self.cfg.step_dist, self.cfg.step_angle_deg);
            if path.steps() > 0 {
                return Some(Plan {
                    path,
                    next: 1,
                    goal: Goal::Frontier { id, at_frontier: true },
                });
            }
            self.store.set_status(id, FrontierStatus::Consumed);
            events.push(Event::GoalReached);
        }
        None
    }

    fn plan_classic(&mut self) -> Option<Plan> {
        loop {
            let g = classic_baseline_step(&self.map, &self.pose, &self.cfg.classic, &self.reached)?;
            let tr = Traversability::new(&self.map, self.cfg.classic.inflation);
            let pp = self.cfg.path_params(0.0);
            match plan_path_with(&tr, &self.pose, &g.target, Some(&g.direction), &pp) {
                Ok(path) if path.steps() > 0 => {
                    return Some(Plan {
                        path,
                        next: 1,
                        goal: Goal::Classic { centroid: g.centroid },
                    })
                }
                _ => self.reached.push(g.centroid),
            }
        }
    }

    fn arrive(&mut self, goal: &Goal, events: &mut Vec<Event>) {
        match *goal {
            Goal::Frontier { id, at_frontier: true } => {
                let Some(f) = self.store.get(id) else { return };
                let close = (self.pose.position - f.p_bar).norm() <= self.cfg.goal_dist_tol + 1e-9;
                let aligned = angle_between(&self.pose.forward(), &f.q_bar).to_degrees() <= self.cfg.goal_angle_tol_deg + 1e-9;
                if f.is_active() && close && aligned {
                    self.store.set_status(id, FrontierStatus::Consumed);
                    events.push(Event::GoalReached);
                }
            }
            Goal::Classic { centroid } => {
                self.reached.push(centroid);
                events.push(Event::GoalReached);
            }
            _ => {}
        }
    }

    fn still_free(&self, p: &Plan) -> bool {
        p.path.waypoints[p.next..].iter().all(|w| self.map.state_at_point(&w.position) == Some(VoxelState::Free))
    }

    fn state<'a>(&'a self, step: usize, events: &'a [Event]) -> StepState<'a> {
        StepState {
            step,
            events,
            pose: &self.pose,
            map: &self.map,
            store: &self.store,
            tree: &self.tree,
        }
    }
}

/// Runs one exploration episode.
pub fn run_exploration(scene: &VoxelGrid, start: &Pose, cam: &CameraModel, cfg: &PlannerConfig, seed: u64) -> Result<ExplorationLog, WorldError> {
    run_exploration_with(scene, start, cam, cfg, seed, |_| {})
}

/// As `run_exploration`, calling `observer` after the initial look-around
/// (step 0) and after every step.
pub fn run_exploration_with<F>(scene: &VoxelGrid, start: &Pose, cam: &CameraModel, cfg: &PlannerConfig, seed: u64, mut observer: F) -> Result<ExplorationLog, WorldError>
where
    F: FnMut(&StepState<'_>),
{
    cfg.validate()?;
    cam.validate()?;
    check_pose(scene, start)?;
    let predictor = OraclePredictor {
        params: cfg.oracle.clone(),
        mask_mode: cfg.mask_mode,
        gain_mode: cfg.gain_mode,
    };
    let mut ex = Explorer {
        scene,
        cam,
        cfg,
        predictor,
        seed,
        map: scene.unknown_like(),
        known: 0,
        store: FrontierStore::new(),
        tree: FrontierTree::new(),
        traj: TrajectoryMemory::new(cfg.step_dist, cfg.step_angle_deg),
        pose: *start,
        trail: Vec::new(),
        observations: 0,
        failures: BTreeMap::new(),
        reached: Vec::new(),
    };

    let n = cfg.look_around_yaws;
    for pitch in &cfg.look_around_pitches_deg {
        for k in 0..n {
            ex.pose = Pose::from_yaw_pitch(start.position, start.yaw() + TAU * k as f64 / n as f64, pitch.to_radians());
            ex.observe()?;
        }
    }
    let mut log = ExplorationLog {
        rows: Vec::new(),
        initial_known: ex.known,
        total_voxels: scene.len(),
        termination: Termination::MaxSteps,
    };
    observer(&ex.state(0, &[]));
    if cfg.max_steps == 0 {
        return Ok(log);
    }

    let mut events = Vec::new();
    let mut plan = ex.plan(&mut events);
    let mut step = 0usize;
    let mut since_obs = 0usize;
    loop {
        let Some(cur) = plan.as_mut() else {
            events.push(Event::Done);
            log.rows.push(LogRow {
                step,
                pose: ex.pose,
                known_voxels: ex.known,
                goal_id: None,
                events,
            });
            log.termination = Termination::NoFrontiers;
            break;
        };
        if step >= cfg.max_steps {
            break;
        }
        let next = cur.path.waypoints[cur.next];
        let g = scene.geometry();
        if segment_hits(g, &ex.pose.position, &next.position, |i| scene.state(i) == VoxelState::Occupied) {
            events.push(Event::Collision);
            log.rows.push(LogRow {
                step: step + 1,
                pose: ex.pose,
                known_voxels: ex.known,
                goal_id: cur.goal_id(),
                events,
            });
            log.termination = Termination::Collision;
            break;
        }
        ex.pose = next;
        ex.trail.push(next);
        cur.next += 1;
        step += 1;
        since_obs += 1;
        let arrived = cur.next == cur.path.waypoints.len();
        let mut goal_id = cur.goal_id();
        if arrived {
            let goal = cur.goal.clone();
            ex.arrive(&goal, &mut events);
        }
        if arrived || since_obs >= cfg.k_obs {
            ex.observe()?;
            events.push(Event::Observe);
            since_obs = 0;
            // the baseline commits to its goal until arrival
            let keep = cfg.mode == PlannerMode::Classic && !arrived && plan.as_ref().is_some_and(|p| ex.still_free(p));
            if !keep {
                plan = ex.plan(&mut events);
                goal_id = plan.as_ref().and_then(|p| p.goal_id());
                if plan.is_some() {
                    events.push(Event::Replan);
                }
            }
        }
        let done = plan.is_none();
        if done {
            events.push(Event::Done);
            log.termination = Termination::NoFrontiers;
        }
        log.rows.push(LogRow {
            step,
            pose: ex.pose,
            known_voxels: ex.known,
            goal_id,
            events: std::mem::take(&mut events),
        });
        observer(&ex.state(step, &log.rows.last().unwrap().events));
        if done {
            break;
        }
    }
    log::debug!("exploration ended at step {} ({})", log.steps(), log.termination.as_str());
    Ok(log)
}
