//! Rooted chain of robot poses with frontier leaves.

use std::collections::BTreeMap;

use crate::world::{Pose, PoseId};

#[derive(Debug, Clone, PartialEq)]
pub struct PoseNode {
    pub id: PoseId,
    pub pose: Pose,
    /// Poses travelled since the previous node, ending with `pose`.
    pub trail: Vec<Pose>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontierTree {
    nodes: Vec<PoseNode>,
    edges: BTreeMap<u64, PoseId>,
}

impl FrontierTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a pose node reached via `trail` (the previous node is not
    /// part of the trail).
    pub fn add_pose(&mut self, pose: Pose, mut trail: Vec<Pose>) -> PoseId {
        if trail.last() != Some(&pose) {
            trail.push(pose);
        }
        let id = PoseId(self.nodes.len() as u64);
        self.nodes.push(PoseNode { id, pose, trail });
        id
    }

    pub fn nodes(&self) -> &[PoseNode] {
        &self.nodes
    }

    pub fn node(&self, id: PoseId) -> Option<&PoseNode> {
        self.nodes.get(id.0 as usize)
    }

    pub fn last(&self) -> Option<&PoseNode> {
        self.nodes.last()
    }

    /// Sets (or replaces) the parent of frontier `fid`.
    pub fn register(&mut self, fid: u64, parent: PoseId) {
        self.edges.insert(fid, parent);
    }

    pub fn remove(&mut self, fid: u64) {
        self.edges.remove(&fid);
    }

    pub fn parent(&self, fid: u64) -> Option<PoseId> {
        self.edges.get(&fid).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (PoseId, u64)> + '_ {
        self.edges.iter().map(|(f, p)| (*p, *f))
    }

    /// Node ids are consecutive from 0 and every edge points at a node.
    pub fn is_chain(&self) -> bool {
        self.nodes.iter().enumerate().all(|(k, n)| n.id.0 == k as u64) && self.edges.values().all(|p| (p.0 as usize) < self.nodes.len())
    }

    /// Poses retracing the chain from node `from` back to node `to`
    /// (`to ≤ from`), starting after `from`'s pose and ending on `to`'s.
    pub fn path_back(&self, from: PoseId, to: PoseId) -> Vec<Pose> {
        let mut out = Vec::new();
        let mut i = from.0 as usize;
        while i > to.0 as usize {
            let trail = &self.nodes[i].trail;
            out.extend(trail[..trail.len() - 1].iter().rev().copied());
            out.push(self.nodes[i - 1].pose);
            i -= 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn p(x: f64) -> Pose {
        Pose::from_yaw_pitch(Vector3::new(x, 0.0, 0.0), 0.0, 0.0)
    }

    #[test]
    fn retrace_chain() {
        let mut t = FrontierTree::new();
        let a = t.add_pose(p(0.0), vec![]);
        t.add_pose(p(0.2), vec![p(0.1), p(0.2)]);
        let c = t.add_pose(p(0.4), vec![p(0.3)]);
        let back: Vec<f64> = t.path_back(c, a).iter().map(|q| q.position.x).collect();
        assert_eq!(back, vec![0.3, 0.2, 0.1, 0.0]);
        t.register(7, c);
        t.register(7, a);
        assert_eq!(t.parent(7), Some(a));
        assert!(t.is_chain());
    }
}
