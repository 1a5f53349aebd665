//! Lifecycle of 3D frontiers: merge-or-insert, gain adjustment against the
//! robot map, and invalidation against the visited trajectory.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::Vector3;

use crate::anchor::{Frontier3D, FrontierStatus};
use crate::world::{angle_between, yaw_pitch_of, CameraModel, Pose, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreParams {
    pub merge_dist: f64,
    pub merge_angle_deg: f64,
    pub prune_dist: f64,
    pub prune_angle_deg: f64,
    /// Minimum adjusted gain, voxels.
    pub g_min: f64,
}

impl Default for StoreParams {
    fn default() -> Self {
        Self {
            merge_dist: 0.5,
            merge_angle_deg: 45.0,
            prune_dist: 0.5,
            prune_angle_deg: 30.0,
            g_min: 50.0,
        }
    }
}

/// True if `(p, q)` of two frontiers are within `dist` meters and
/// `angle_deg` degrees (both strict).
pub fn mergeable(a: &Frontier3D, b: &Frontier3D, dist: f64, angle_deg: f64) -> bool {
    (a.p_bar - b.p_bar).norm() < dist && angle_between(&a.q_bar, &b.q_bar).to_degrees() < angle_deg
}

/// True if voxel centre `c` lies in the truncated view frustum of `pose`.
#[inline]
pub fn in_frustum(pose: &Pose, cam: &CameraModel, c: &Vector3<f64>) -> bool {
    if (c - pose.position).norm() > cam.max_range {
        return false;
    }
    match cam.project(&pose.to_camera(c)) {
        Some((u, v)) => cam.in_image(u, v),
        None => false,
    }
}

/// `|V_known^i|`: non-Unknown voxels of `map` inside the frontier's frustum.
pub fn known_in_view(f: &Frontier3D, map: &VoxelGrid, cam: &CameraModel) -> usize {
    let pose = f.view_pose();
    let g = map.geometry();
    let r = Vector3::repeat(cam.max_range);
    let Some((lo, hi)) = g.voxel_range(&(f.p_bar - r), &(f.p_bar + r)) else {
        return 0;
    };
    let mut n = 0;
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let i = g.index([x, y, z]);
                if map.state(i).is_known() && in_frustum(&pose, cam, &g.center_of_index(i)) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Adjusted gain `max(0, gain0 - |V_known^i|)`; also written to `f.gain`.
pub fn adjust_gain(f: &mut Frontier3D, map: &VoxelGrid, cam: &CameraModel) -> f64 {
    let g = (f.gain0 - known_in_view(f, map, cam) as f64).max(0.0);
    f.gain = g;
    g
}

/// Visited poses, kept when they move ≥ `min_dist` meters or turn
/// ≥ `min_angle_deg` degrees from the last kept pose.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMemory {
    pub poses: Vec<Pose>,
    pub min_dist: f64,
    pub min_angle_deg: f64,
}

impl Default for TrajectoryMemory {
    fn default() -> Self {
        Self::new(0.1, 10.0)
    }
}

impl TrajectoryMemory {
    pub fn new(min_dist: f64, min_angle_deg: f64) -> Self {
        Self {
            poses: Vec::new(),
            min_dist,
            min_angle_deg,
        }
    }

    /// Records `pose` if it differs enough from the last kept one.
    pub fn push(&mut self, pose: Pose) -> bool {
        let keep = match self.poses.last() {
            None => true,
            Some(last) => {
                (pose.position - last.position).norm() >= self.min_dist || pose.angle_to(last).to_degrees() >= self.min_angle_deg
            }
        };
        if keep {
            self.poses.push(pose);
        }
        keep
    }

    /// Some kept pose lies within `dist` meters and `angle_deg` degrees of
    /// the viewpoint `(p, q)`.
    pub fn visited(&self, p: &Vector3<f64>, q: &Vector3<f64>, dist: f64, angle_deg: f64) -> bool {
        self.poses
            .iter()
            .any(|x| (x.position - p).norm() <= dist && angle_between(&x.forward(), q).to_degrees() <= angle_deg)
    }
}

/// Outcome of one `merge_or_insert`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeResult {
    /// Id now holding the inserted or merged frontier.
    pub id: u64,
    pub merged: bool,
    /// Ids removed because they were folded into `id`.
    pub absorbed: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    frontier: Frontier3D,
    /// Bumped whenever the entry is replaced by a merge.
    revision: u64,
    /// Cached `|V_known^i|` and whether it is current.
    known: usize,
    known_valid: bool,
}

/// Id-indexed frontier collection. Active entries form a maximal merged
/// set: no two are mutually mergeable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontierStore {
    entries: BTreeMap<u64, Entry>,
    next_id: u64,
}

impl FrontierStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Frontier3D> {
        self.entries.get(&id).map(|e| &e.frontier)
    }

    pub fn revision(&self, id: u64) -> Option<u64> {
        self.entries.get(&id).map(|e| e.revision)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Frontier3D)> {
        self.entries.iter().map(|(id, e)| (*id, &e.frontier))
    }

    pub fn active(&self) -> impl Iterator<Item = (u64, &Frontier3D)> {
        self.iter().filter(|(_, f)| f.is_active())
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }

    pub fn set_status(&mut self, id: u64, status: FrontierStatus) {
        if let Some(e) = self.entries.get_mut(&id) {
            // Invalid and Consumed are absorbing
            if e.frontier.status == FrontierStatus::Active {
                e.frontier.status = status;
            }
        }
    }

    /// Nearest Active frontier mergeable with `f`, ignoring `skip`.
    fn merge_candidate(&self, f: &Frontier3D, skip: Option<u64>, dist: f64, angle_deg: f64) -> Option<u64> {
        self.entries
            .iter()
            .filter(|(id, e)| Some(**id) != skip && e.frontier.is_active() && mergeable(f, &e.frontier, dist, angle_deg))
            .map(|(id, e)| ((e.frontier.p_bar - f.p_bar).norm(), *id))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }

    /// Inserts `f`, or folds it into the nearest mergeable Active frontier
    /// and repeats with the result until nothing else is mergeable.
    pub fn merge_or_insert(&mut self, f: Frontier3D, dist: f64, angle_deg: f64) -> MergeResult {
        let mut cur = f;
        let mut cur_id: Option<u64> = None;
        let mut absorbed = Vec::new();
        while let Some(gid) = self.merge_candidate(&cur, cur_id, dist, angle_deg) {
            let g = &self.entries[&gid].frontier;
            let merged = average(g, &cur);
            if let Some(old) = cur_id {
                self.entries.remove(&old);
                absorbed.push(old);
            }
            let e = self.entries.get_mut(&gid).unwrap();
            e.frontier = merged.clone();
            e.revision += 1;
            e.known_valid = false;
            cur = merged;
            cur_id = Some(gid);
        }
        match cur_id {
            Some(id) => MergeResult {
                id,
                merged: true,
                absorbed,
            },
            None => {
                let id = self.next_id;
                self.next_id += 1;
                self.entries.insert(
                    id,
                    Entry {
                        frontier: cur,
                        revision: 0,
                        known: 0,
                        known_valid: false,
                    },
                );
                MergeResult {
                    id,
                    merged: false,
                    absorbed,
                }
            }
        }
    }

    /// Re-adjusts every Active gain against `map`. `newly_known` lists the
    /// voxels that became known since the previous call; cached counts are
    /// advanced with it instead of rescanning the frustum.
    pub fn adjust_gains(&mut self, map: &VoxelGrid, cam: &CameraModel, newly_known: &[usize]) {
        let g = *map.geometry();
        let centres: Vec<Vector3<f64>> = newly_known.iter().map(|&i| g.center_of_index(i)).collect();
        for e in self.entries.values_mut() {
            if !e.frontier.is_active() {
                continue;
            }
            if e.known_valid {
                let pose = e.frontier.view_pose();
                e.known += centres.iter().filter(|c| in_frustum(&pose, cam, c)).count();
            } else {
                e.known = known_in_view(&e.frontier, map, cam);
                e.known_valid = true;
            }
            e.frontier.gain = (e.frontier.gain0 - e.known as f64).max(0.0);
        }
    }

    /// Marks Active frontiers Invalid by (a) adjusted gain below `g_min`
    /// when `use_gain` holds, or (b) proximity to a visited pose. Returns
    /// the ids invalidated.
    pub fn prune_invalid(&mut self, traj: &TrajectoryMemory, use_gain: bool, p: &StoreParams) -> Vec<u64> {
        let mut out = Vec::new();
        for (id, e) in self.entries.iter_mut() {
            let f = &mut e.frontier;
            if !f.is_active() {
                continue;
            }
            let low = use_gain && f.gain < p.g_min;
            if low || traj.visited(&f.p_bar, &f.q_bar, p.prune_dist, p.prune_angle_deg) {
                f.status = FrontierStatus::Invalid;
                out.push(*id);
            }
        }
        out
    }

    /// First Active pair that violates the maximal-merge invariant.
    pub fn mergeable_pair(&self, dist: f64, angle_deg: f64) -> Option<(u64, u64)> {
        let act: Vec<(u64, &Frontier3D)> = self.active().collect();
        for i in 0..act.len() {
            for j in i + 1..act.len() {
                if mergeable(act[i].1, act[j].1, dist, angle_deg) {
                    return Some((act[i].0, act[j].0));
                }
            }
        }
        None
    }

    /// CSV snapshot: id, status, x, y, z, yaw_deg, pitch_deg, gain0, gain,
    /// parent_pose_id.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "status", "x", "y", "z", "yaw_deg", "pitch_deg", "gain0", "gain", "parent_pose_id"])?;
        for (id, f) in self.iter() {
            let (yaw, pitch) = yaw_pitch_of(&f.q_bar);
            w.write_record([
                id.to_string(),
                f.status.as_str().to_string(),
                format!("{:.4}", f.p_bar.x),
                format!("{:.4}", f.p_bar.y),
                format!("{:.4}", f.p_bar.z),
                format!("{:.3}", yaw.to_degrees()),
                format!("{:.3}", pitch.to_degrees()),
                format!("{:.1}", f.gain0),
                format!("{:.1}", f.gain),
                f.parent_pose_id.0.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Element-wise merge of `old` with the newer `new`.
fn average(old: &Frontier3D, new: &Frontier3D) -> Frontier3D {
    let q = old.q_bar + new.q_bar;
    let q = if q.norm() < 1e-12 { old.q_bar } else { q.normalize() };
    Frontier3D {
        p_bar: (old.p_bar + new.p_bar) / 2.0,
        q_bar: q,
        gain: (old.gain + new.gain) / 2.0,
        gain0: old.gain0.max(new.gain0),
        parent_pose_id: new.parent_pose_id,
        status: FrontierStatus::Active,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{GridGeometry, PoseId, VoxelState};

    fn fr(x: f64, yaw_deg: f64, gain: f64) -> Frontier3D {
        let y = yaw_deg.to_radians();
        Frontier3D::new(Vector3::new(x, 0.0, 1.0), Vector3::new(y.cos(), y.sin(), 0.0), gain, PoseId(0))
    }

    #[test]
    fn insert_into_empty() {
        let mut s = FrontierStore::new();
        let r = s.merge_or_insert(fr(0.0, 0.0, 10.0), 0.5, 45.0);
        assert!(!r.merged);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn identical_frontiers_merge_unchanged() {
        let mut s = FrontierStore::new();
        s.merge_or_insert(fr(1.0, 30.0, 10.0), 0.5, 45.0);
        let r = s.merge_or_insert(fr(1.0, 30.0, 10.0), 0.5, 45.0);
        assert!(r.merged);
        assert_eq!(s.len(), 1);
        let f = s.get(r.id).unwrap();
        assert!((f.p_bar - Vector3::new(1.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((yaw_pitch_of(&f.q_bar).0.to_degrees() - 30.0).abs() < 1e-9);
        assert_eq!(f.gain, 10.0);
    }

    #[test]
    fn chain_cascade_collapses() {
        let mut s = FrontierStore::new();
        // A~B, B~C, A≁C
        let (a, b, c) = (fr(0.0, 0.0, 10.0), fr(0.25, 0.0, 10.0), fr(0.55, 0.0, 10.0));
        assert!(mergeable(&a, &b, 0.5, 45.0) && mergeable(&b, &c, 0.5, 45.0) && !mergeable(&a, &c, 0.5, 45.0));
        s.merge_or_insert(a, 0.5, 45.0);
        s.merge_or_insert(c, 0.5, 45.0);
        assert_eq!(s.len(), 2);
        let r = s.merge_or_insert(b, 0.5, 45.0);
        assert_eq!(r.absorbed.len(), 1);
        assert_eq!(s.len(), 1);
        assert!(s.mergeable_pair(0.5, 45.0).is_none());
    }

    #[test]
    fn adjust_gain_cases() {
        let g = GridGeometry::new([40, 40, 20], 0.1, Vector3::zeros()).unwrap();
        let cam = CameraModel::new(16, 16, 60.0, 60.0, 1.0).unwrap();
        let unknown = VoxelGrid::new(g, VoxelState::Unknown);
        let mut f = Frontier3D::new(Vector3::new(1.0, 2.0, 1.0), Vector3::x(), 300.0, PoseId(0));
        assert_eq!(adjust_gain(&mut f, &unknown, &cam), 300.0);
        let known = VoxelGrid::new(g, VoxelState::Free);
        assert_eq!(adjust_gain(&mut f, &known, &cam), 0.0);
        assert!(f.gain <= f.gain0);
    }

    #[test]
    fn visited_pose_invalidates() {
        let mut s = FrontierStore::new();
        let r = s.merge_or_insert(fr(1.0, 0.0, 100.0), 0.5, 45.0);
        let mut t = TrajectoryMemory::default();
        assert!(s.prune_invalid(&t, false, &StoreParams::default()).is_empty());
        t.push(Pose::from_yaw_pitch(Vector3::new(1.0, 0.0, 1.0), 0.0, 0.0));
        assert_eq!(s.prune_invalid(&t, false, &StoreParams::default()), vec![r.id]);
        assert_eq!(s.get(r.id).unwrap().status, FrontierStatus::Invalid);
        s.set_status(r.id, FrontierStatus::Active);
        assert_eq!(s.get(r.id).unwrap().status, FrontierStatus::Invalid);
    }

    #[test]
    fn trajectory_downsampling() {
        let mut t = TrajectoryMemory::default();
        assert!(t.push(Pose::from_yaw_pitch(Vector3::zeros(), 0.0, 0.0)));
        assert!(!t.push(Pose::from_yaw_pitch(Vector3::new(0.05, 0.0, 0.0), 0.0, 0.0)));
        assert!(t.push(Pose::from_yaw_pitch(Vector3::new(0.1, 0.0, 0.0), 0.0, 0.0)));
        assert!(t.push(Pose::from_yaw_pitch(Vector3::new(0.1, 0.0, 0.0), 11f64.to_radians(), 0.0)));
    }
}
