//! Utility-based goal selection and tree-edge entry points.

use std::collections::BTreeSet;

use nalgebra::Vector3;

use crate::anchor::Frontier3D;
use crate::frontier_store::FrontierStore;
use crate::world::{VoxelGrid, VoxelState};

/// `gain / max(distance, d_floor)`.
#[inline]
pub fn utility(gain: f64, robot: &Vector3<f64>, p: &Vector3<f64>, d_floor: f64) -> f64 {
    gain / (robot - p).norm().max(d_floor)
}

/// Active frontier of highest utility; ties go to higher gain, then lower
/// id. Ids in `skip` are ignored.
pub fn select_goal(store: &FrontierStore, robot: &Vector3<f64>, d_floor: f64, skip: &BTreeSet<u64>) -> Option<u64> {
    let mut best: Option<(f64, f64, u64)> = None;
    for (id, f) in store.active() {
        if skip.contains(&id) {
            continue;
        }
        let u = utility(f.gain, robot, &f.p_bar, d_floor);
        let better = match best {
            None => true,
            Some((bu, bg, _)) => u > bu || (u == bu && f.gain > bg),
        };
        if better {
            best = Some((u, f.gain, id));
        }
    }
    best.map(|b| b.2)
}

/// First known-Free point among `n` samples walked back from `p̄` toward
/// the parent position; the parent position if none is.
pub fn find_entry_point(f: &Frontier3D, parent: &Vector3<f64>, map: &VoxelGrid, n: usize) -> Vector3<f64> {
    let free = |p: &Vector3<f64>| map.state_at_point(p) == Some(VoxelState::Free);
    if free(&f.p_bar) {
        return f.p_bar;
    }
    let n = n.max(1);
    for k in 1..n {
        let p = f.p_bar + (parent - f.p_bar) * (k as f64 / n as f64);
        if free(&p) {
            return p;
        }
    }
    *parent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{GridGeometry, PoseId};

    fn store(items: &[(f64, f64)]) -> FrontierStore {
        let mut s = FrontierStore::new();
        for &(x, g) in items {
            s.merge_or_insert(Frontier3D::new(Vector3::new(x, 0.0, 0.0), Vector3::x(), g, PoseId(0)), 0.5, 45.0);
        }
        s
    }

    #[test]
    fn nearer_wins_at_equal_gain() {
        let s = store(&[(2.0, 100.0), (4.0, 100.0)]);
        assert_eq!(select_goal(&s, &Vector3::zeros(), 0.3, &BTreeSet::new()), Some(0));
    }

    #[test]
    fn larger_gain_wins_when_utility_higher() {
        let s = store(&[(2.0, 100.0), (4.0, 400.0)]);
        assert_eq!(select_goal(&s, &Vector3::zeros(), 0.3, &BTreeSet::new()), Some(1));
    }

    #[test]
    fn ties_prefer_gain_then_id() {
        let s = store(&[(-2.0, 100.0), (2.0, 100.0)]);
        assert_eq!(select_goal(&s, &Vector3::zeros(), 0.3, &BTreeSet::new()), Some(0));
        assert_eq!(select_goal(&FrontierStore::new(), &Vector3::zeros(), 0.3, &BTreeSet::new()), None);
    }

    #[test]
    fn entry_point_cases() {
        let g = GridGeometry::new([30, 5, 5], 0.1, Vector3::zeros()).unwrap();
        let mut m = VoxelGrid::new(g, VoxelState::Unknown);
        let parent = Vector3::new(0.05, 0.25, 0.25);
        let f = Frontier3D::new(Vector3::new(2.95, 0.25, 0.25), Vector3::x(), 1.0, PoseId(0));
        assert_eq!(find_entry_point(&f, &parent, &m, 20), parent);
        m.fill_box([0, 0, 0], [14, 4, 4], VoxelState::Free);
        let c = find_entry_point(&f, &parent, &m, 20);
        assert_eq!(m.state_at_point(&c), Some(VoxelState::Free));
        assert!((c.x - 1.5).abs() <= 2.9 / 20.0 + 1e-9, "{}", c.x);
        m.fill_box([0, 0, 0], [29, 4, 4], VoxelState::Free);
        assert_eq!(find_entry_point(&f, &parent, &m, 20), f.p_bar);
    }
}
