//! Grid search over known-Free space, line-of-sight smoothing and
//! densification into step-sized poses.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::Vector3;

use crate::world::raycast::segment_hits;
use crate::world::{angle_between, wrap_angle, GridGeometry, Pose, VoxelGrid, VoxelState};

use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    /// Clearance kept from Occupied voxels, meters.
    pub inflation: f64,
    /// Any traversable voxel whose centre lies within this distance of the
    /// goal point terminates the search.
    pub goal_tolerance: f64,
    pub step_dist: f64,
    pub step_angle_deg: f64,
}

impl Default for PathParams {
    fn default() -> Self {
        Self {
            inflation: 0.2,
            goal_tolerance: 0.0,
            step_dist: 0.1,
            step_angle_deg: 10.0,
        }
    }
}

/// Dense pose sequence; `waypoints[0]` is the start pose.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub waypoints: Vec<Pose>,
    /// Meters.
    pub total_length: f64,
    /// Degrees.
    pub total_rotation: f64,
}

impl Path {
    pub fn from_waypoints(waypoints: Vec<Pose>) -> Self {
        let mut total_length = 0.0;
        let mut total_rotation = 0.0;
        for w in waypoints.windows(2) {
            total_length += (w[1].position - w[0].position).norm();
            total_rotation += w[1].angle_to(&w[0]).to_degrees();
        }
        Self {
            waypoints,
            total_length,
            total_rotation,
        }
    }

    /// Number of motion steps.
    pub fn steps(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }
}

/// Voxels the robot centre may occupy: known-Free and farther than the
/// inflation radius from every Occupied voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct Traversability {
    pub geometry: GridGeometry,
    free: Vec<bool>,
}

impl Traversability {
    pub fn new(map: &VoxelGrid, inflation: f64) -> Self {
        let g = *map.geometry();
        let mut free: Vec<bool> = map.states().iter().map(|&s| s == VoxelState::Free).collect();
        let r = (inflation / g.resolution).floor() as i64;
        if r > 0 {
            let r2 = inflation * inflation + 1e-9;
            let mut offsets = Vec::new();
            for dz in -r..=r {
                for dy in -r..=r {
                    for dx in -r..=r {
                        let d2 = ((dx * dx + dy * dy + dz * dz) as f64) * g.resolution * g.resolution;
                        if d2 <= r2 {
                            offsets.push([dx, dy, dz]);
                        }
                    }
                }
            }
            for (i, &s) in map.states().iter().enumerate() {
                if s != VoxelState::Occupied {
                    continue;
                }
                let c = g.coord(i);
                for o in &offsets {
                    let n = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
                    if g.contains_coord(n) {
                        free[g.index([n[0] as usize, n[1] as usize, n[2] as usize])] = false;
                    }
                }
            }
        }
        Self { geometry: g, free }
    }

    #[inline]
    pub fn is_free(&self, i: usize) -> bool {
        self.free[i]
    }
}

/// The 26 neighbour offsets with their metric lengths in voxel units.
pub fn neighbor_offsets() -> Vec<([i64; 3], f64)> {
    let mut out = Vec::with_capacity(26);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let n = dx.abs() + dy.abs() + dz.abs();
                if n > 0 {
                    out.push(([dx, dy, dz], (n as f64).sqrt()));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    index: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then on index
        other.f.total_cmp(&self.f).then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a grid search: voxel sequence from start to goal and its cost
/// in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub voxels: Vec<usize>,
    pub cost: f64,
}

/// A* over the 26-connected graph of traversable voxels. The start voxel is
/// always admitted. Goal voxels are traversable voxels within `tol` of
/// `goal`.
pub fn grid_search(tr: &Traversability, start: usize, goal: &Vector3<f64>, tol: f64) -> Option<GridPath> {
    let g = &tr.geometry;
    let is_goal = |i: usize| (g.center_of_index(i) - goal).norm() <= tol + 1e-9;
    let h = |i: usize| ((g.center_of_index(i) - goal).norm() - tol).max(0.0);
    let offsets = neighbor_offsets();
    let mut cost = vec![f64::INFINITY; g.len()];
    let mut prev = vec![usize::MAX; g.len()];
    let mut closed = vec![false; g.len()];
    let mut heap = BinaryHeap::new();
    cost[start] = 0.0;
    heap.push(Open { f: h(start), index: start });
    while let Some(Open { index: i, .. }) = heap.pop() {
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if (i == start || tr.is_free(i)) && is_goal(i) {
            let mut voxels = vec![i];
            let mut k = i;
            while prev[k] != usize::MAX {
                k = prev[k];
                voxels.push(k);
            }
            voxels.reverse();
            return Some(GridPath { voxels, cost: cost[i] });
        }
        let c = g.coord(i);
        for (o, len) in &offsets {
            let n = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
            if !g.contains_coord(n) {
                continue;
            }
            let j = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
            if closed[j] || !tr.is_free(j) {
                continue;
            }
            let nc = cost[i] + len * g.resolution;
            if nc < cost[j] {
                cost[j] = nc;
                prev[j] = i;
                heap.push(Open { f: nc + h(j), index: j });
            }
        }
    }
    None
}

/// Single-source shortest path costs over the same graph as `grid_search`.
pub fn dijkstra(tr: &Traversability, start: usize) -> Vec<f64> {
    let g = &tr.geometry;
    let offsets = neighbor_offsets();
    let mut cost = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    cost[start] = 0.0;
    heap.push(Open { f: 0.0, index: start });
    while let Some(Open { f, index: i }) = heap.pop() {
        if f > cost[i] {
            continue;
        }
        let c = g.coord(i);
        for (o, len) in &offsets {
            let n = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
            if !g.contains_coord(n) {
                continue;
            }
            let j = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
            if !tr.is_free(j) {
                continue;
            }
            let nc = f + len * g.resolution;
            if nc < cost[j] {
                cost[j] = nc;
                heap.push(Open { f: nc, index: j });
            }
        }
    }
    cost
}

/// Greedy line-of-sight shortcutting of a polyline. Segments may pass only
/// through traversable voxels or the voxel of the first point.
pub fn smooth(tr: &Traversability, pts: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let g = &tr.geometry;
    let start_voxel = g.voxel_of(&pts[0]).map(|c| g.index(c));
    let blocked = |i: usize| Some(i) != start_voxel && !tr.is_free(i);
    let mut out = vec![pts[0]];
    let mut i = 0;
    while i + 1 < pts.len() {
        let mut j = pts.len() - 1;
        while j > i + 1 && segment_hits(g, &pts[i], &pts[j], blocked) {
            j -= 1;
        }
        out.push(pts[j]);
        i = j;
    }
    out
}

/// In-place turn from `from` to `(yaw, pitch)` in steps of at most
/// `step_angle_deg`; the returned poses exclude `from`.
pub fn turn_to(from: &Pose, yaw: f64, pitch: f64, step_angle_deg: f64) -> Vec<Pose> {
    let (y0, p0) = (from.yaw(), from.pitch());
    let dy = wrap_angle(yaw - y0);
    let dp = pitch - p0;
    let total = dy.hypot(dp).to_degrees();
    let n = (total / step_angle_deg).ceil() as usize;
    (1..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            Pose::from_yaw_pitch(from.position, wrap_angle(y0 + dy * t), p0 + dp * t)
        })
        .collect()
}

/// Interpolates `start → pts[0] → pts[1] …` into step-sized poses that face
/// the travel direction (level pitch), optionally turning to `final_dir`
/// at the end.
pub fn densify(start: &Pose, pts: &[Vector3<f64>], final_dir: Option<&Vector3<f64>>, step_dist: f64, step_angle_deg: f64) -> Path {
    let mut way = vec![*start];
    for b in pts {
        let a = way.last().unwrap().position;
        let d = b - a;
        let len = d.norm();
        if len < 1e-12 {
            continue;
        }
        let cur = *way.last().unwrap();
        let yaw = if d.x.hypot(d.y) > 1e-9 { d.y.atan2(d.x) } else { cur.yaw() };
        way.extend(turn_to(&cur, yaw, 0.0, step_angle_deg));
        let n = (len / step_dist).ceil() as usize;
        for k in 1..=n {
            let p = if k == n { *b } else { a + d * (k as f64 / n as f64) };
            way.push(Pose::from_yaw_pitch(p, yaw, 0.0));
        }
    }
    if let Some(q) = final_dir {
        let cur = *way.last().unwrap();
        if angle_between(&cur.forward(), q) > 1e-9 {
            let (yaw, pitch) = crate::world::yaw_pitch_of(q);
            way.extend(turn_to(&cur, yaw, pitch, step_angle_deg));
        }
    }
    Path::from_waypoints(way)
}

/// Plans from `start` to within `goal_tolerance` of `goal` through
/// traversable known-Free space, then smooths and densifies.
pub fn plan_path(map: &VoxelGrid, start: &Pose, goal: &Vector3<f64>, final_dir: Option<&Vector3<f64>>, p: &PathParams) -> Result<Path, PlanError> {
    let tr = Traversability::new(map, p.inflation);
    plan_path_with(&tr, start, goal, final_dir, p)
}

pub fn plan_path_with(tr: &Traversability, start: &Pose, goal: &Vector3<f64>, final_dir: Option<&Vector3<f64>>, p: &PathParams) -> Result<Path, PlanError> {
    let g = &tr.geometry;
    let s = g.voxel_of(&start.position).ok_or(PlanError::StartOutOfBounds)?;
    let gp = grid_search(tr, g.index(s), goal, p.goal_tolerance).ok_or(PlanError::NoPath)?;
    let mut pts: Vec<Vector3<f64>> = Vec::with_capacity(gp.voxels.len() + 1);
    pts.push(start.position);
    pts.extend(gp.voxels.iter().skip(1).map(|&i| g.center_of_index(i)));
    // stop exactly on the goal when it shares the final voxel
    if let Some(gv) = g.voxel_of(goal) {
        if g.index(gv) == *gp.voxels.last().unwrap() {
            if pts.len() > 1 {
                *pts.last_mut().unwrap() = *goal;
            } else {
                pts.push(*goal);
            }
        }
    }
    let pts = smooth(tr, &pts);
    Ok(densify(start, &pts[1..], final_dir, p.step_dist, p.step_angle_deg))
}
