//! Exact grid traversal (Amanatides & Woo). Every voxel pierced by the ray
//! is visited in order, together with the ray parameter at which the ray
//! enters it. Entry parameters are recomputed from the crossed face
//! coordinate rather than accumulated, so they agree bit-for-bit with a
//! slab test against the same voxel box.

use nalgebra::Vector3;

use super::grid::{GridGeometry, VoxelCoord};

/// Visit outcome requested by the traversal callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    Stop,
}

/// Walks the voxels pierced by `origin + t·dir` for `t ∈ [0, t_max)`.
///
/// `dir` must be unit length so that `t` is metric. The callback receives
/// the linear index, the voxel coordinate and the entry parameter (0 for the
/// voxel containing the origin). Rays starting outside the grid are clipped
/// to its bounding box first.
pub fn traverse<F>(geom: &GridGeometry, origin: &Vector3<f64>, dir: &Vector3<f64>, t_max: f64, mut visit: F)
where
    F: FnMut(usize, VoxelCoord, f64) -> Step,
{
    let (mut cell, mut t_enter) = match geom.voxel_of(origin) {
        Some(c) => ([c[0] as i64, c[1] as i64, c[2] as i64], 0.0),
        None => match clip_entry(geom, origin, dir) {
            Some((c, t)) if t < t_max => (c, t),
            _ => return,
        },
    };

    let mut step = [0i64; 3];
    let mut t_next = [f64::INFINITY; 3];
    for a in 0..3 {
        if dir[a] > 0.0 {
            step[a] = 1;
            t_next[a] = face_t(geom, origin, dir, a, cell[a] + 1);
        } else if dir[a] < 0.0 {
            step[a] = -1;
            t_next[a] = face_t(geom, origin, dir, a, cell[a]);
        }
    }

    loop {
        let c = [cell[0] as usize, cell[1] as usize, cell[2] as usize];
        if visit(geom.index(c), c, t_enter) == Step::Stop {
            return;
        }
        // axes crossed at the same parameter step together, so voxels the
        // ray only touches along an edge or at a corner are skipped
        t_enter = t_next[0].min(t_next[1]).min(t_next[2]);
        if !(t_enter < t_max) {
            return;
        }
        for axis in 0..3 {
            if t_next[axis] != t_enter {
                continue;
            }
            cell[axis] += step[axis];
            if cell[axis] < 0 || cell[axis] >= geom.dims[axis] as i64 {
                return;
            }
            let boundary = if step[axis] > 0 { cell[axis] + 1 } else { cell[axis] };
            t_next[axis] = face_t(geom, origin, dir, axis, boundary);
        }
    }
}

/// Ray parameter at which the ray reaches the lattice plane `k` on `axis`.
#[inline]
fn face_t(geom: &GridGeometry, origin: &Vector3<f64>, dir: &Vector3<f64>, axis: usize, k: i64) -> f64 {
    let plane = geom.origin[axis] + k as f64 * geom.resolution;
    (plane - origin[axis]) / dir[axis]
}

fn clip_entry(geom: &GridGeometry, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<([i64; 3], f64)> {
    let lo = geom.min_corner();
    let hi = geom.max_corner();
    let (t0, t1) = slab(origin, dir, &lo, &hi)?;
    if t1 < 0.0 || t0 > t1 {
        return None;
    }
    let t = t0.max(0.0);
    let p = origin + dir * t;
    let mut c = [0i64; 3];
    for a in 0..3 {
        let f = ((p[a] - geom.origin[a]) / geom.resolution).floor() as i64;
        c[a] = f.clamp(0, geom.dims[a] as i64 - 1);
    }
    Some((c, t))
}

/// Slab intersection of a ray with an axis-aligned box: `(t_near, t_far)`.
pub fn slab(origin: &Vector3<f64>, dir: &Vector3<f64>, lo: &Vector3<f64>, hi: &Vector3<f64>) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for a in 0..3 {
        if dir[a] == 0.0 {
            if origin[a] < lo[a] || origin[a] >= hi[a] {
                return None;
            }
            continue;
        }
        let ta = (lo[a] - origin[a]) / dir[a];
        let tb = (hi[a] - origin[a]) / dir[a];
        let (n, f) = if ta < tb { (ta, tb) } else { (tb, ta) };
        t0 = t0.max(n);
        t1 = t1.min(f);
    }
    Some((t0, t1))
}

/// True if the straight segment `a → b` passes through any voxel for which
/// `blocked` holds (the voxel containing `a` included).
pub fn segment_hits<F: Fn(usize) -> bool>(geom: &GridGeometry, a: &Vector3<f64>, b: &Vector3<f64>, blocked: F) -> bool {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return geom.voxel_of(a).map(|c| blocked(geom.index(c))).unwrap_or(false);
    }
    let dir = d / len;
    let mut hit = false;
    // visit voxels entered at t <= len (the end point's voxel included)
    traverse(geom, a, &dir, len + 1e-12, |i, _, _| {
        if blocked(i) {
            hit = true;
            Step::Stop
        } else {
            Step::Continue
        }
    });
    hit
}
