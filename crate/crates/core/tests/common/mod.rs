//! Brute-force reference implementations shared by the integration tests.
//! Each one follows the textbook definition and avoids the production code
//! paths it is compared against.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use frontier_core::oracle::ViewVolume;
use frontier_core::raster::{Mask, Raster};
use frontier_core::world::{CameraModel, GridGeometry, Pose, SceneParams, VoxelGrid, VoxelState};
use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random mask: sparse speckle, a few filled discs, or empty/full edge cases.
pub fn random_mask(r: &mut ChaCha8Rng, w: usize, h: usize) -> Mask {
    match r.gen_range(0..10) {
        0 => Raster::filled(w, h, false),
        1 => Raster::filled(w, h, true),
        2..=5 => {
            let p = r.gen_range(0.001..0.2);
            Raster::from_fn(w, h, |_, _| r.gen_bool(p))
        }
        _ => {
            let discs: Vec<(f64, f64, f64)> = (0..r.gen_range(1..6))
                .map(|_| (r.gen_range(0.0..w as f64), r.gen_range(0.0..h as f64), r.gen_range(0.5..6.0)))
                .collect();
            Raster::from_fn(w, h, |x, y| {
                discs.iter().any(|&(cx, cy, rad)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= rad * rad)
            })
        }
    }
}

/// Squared pixel distance to the nearest on-pixel, `None` when the mask is
/// empty.
pub fn brute_sq_edt(mask: &Mask) -> Vec<Option<i64>> {
    let on: Vec<(i64, i64)> = mask.iter_pixels().filter(|p| *p.2).map(|(x, y, _)| (x as i64, y as i64)).collect();
    mask.iter_pixels()
        .map(|(x, y, _)| {
            on.iter()
                .map(|&(ox, oy)| (x as i64 - ox).pow(2) + (y as i64 - oy).pow(2))
                .min()
        })
        .collect()
}

/// Entry and exit parameters of a ray against an axis-aligned box.
pub fn ray_box(o: &Vector3<f64>, d: &Vector3<f64>, lo: &Vector3<f64>, hi: &Vector3<f64>) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a] < lo[a] || o[a] > hi[a] {
                return None;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo[a] - o[a]) / d[a], (hi[a] - o[a]) / d[a]);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
    }
    (t0 <= t1).then_some((t0, t1))
}

fn face_neighbors(g: &GridGeometry, i: usize) -> Vec<usize> {
    let c = g.coord(i);
    let mut out = Vec::with_capacity(6);
    for a in 0..3 {
        for s in [-1i64, 1] {
            let mut n = [c[0] as i64, c[1] as i64, c[2] as i64];
            n[a] += s;
            if (0..3).all(|k| n[k] >= 0 && (n[k] as usize) < g.dims[k]) {
                out.push(g.index([n[0] as usize, n[1] as usize, n[2] as usize]));
            }
        }
    }
    out
}

/// Occupied voxels with a non-Occupied face neighbour: the only voxels a
/// ray starting in free space can enter first.
pub fn surface_voxels(scene: &VoxelGrid) -> Vec<usize> {
    let g = scene.geometry();
    (0..scene.len())
        .filter(|&i| scene.state(i) == VoxelState::Occupied)
        .filter(|&i| face_neighbors(g, i).iter().any(|&n| scene.state(n) != VoxelState::Occupied))
        .collect()
}

fn voxel_box(g: &GridGeometry, i: usize) -> (Vector3<f64>, Vector3<f64>) {
    let h = Vector3::repeat(g.resolution / 2.0);
    let c = g.center_of_index(i);
    (c - h, c + h)
}

/// Smallest box-entry distance over `candidates`, `INFINITY` when none is
/// entered before `max_range`.
pub fn brute_depth(g: &GridGeometry, candidates: &[usize], o: &Vector3<f64>, d: &Vector3<f64>, max_range: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &i in candidates {
        let (lo, hi) = voxel_box(g, i);
        if let Some((t0, t1)) = ray_box(o, d, &lo, &hi) {
            if t1 >= 0.0 && t0 < best && t0 < t1 {
                best = t0.max(0.0);
            }
        }
    }
    if best < max_range {
        best
    } else {
        f64::INFINITY
    }
}

/// Voxels a ray passes through before `t_end`, with their entry parameter,
/// found by sorting every grid-plane crossing. Crossings at equal
/// parameters are applied together. The origin must lie inside the grid.
pub fn crossing_walk(g: &GridGeometry, o: &Vector3<f64>, d: &Vector3<f64>, t_end: f64) -> Vec<(usize, f64)> {
    let v = g.resolution;
    let mut cell = [0i64; 3];
    for a in 0..3 {
        cell[a] = ((o[a] - g.origin[a]) / v).floor() as i64;
        if cell[a] < 0 || cell[a] >= g.dims[a] as i64 {
            return Vec::new();
        }
    }
    // (t, axis, cell index on the far side of the plane)
    let mut xs: Vec<(f64, usize, i64)> = Vec::new();
    for a in 0..3 {
        if d[a] == 0.0 {
            continue;
        }
        for k in 0..=g.dims[a] as i64 {
            let t = (g.origin[a] + k as f64 * v - o[a]) / d[a];
            if t > 0.0 && t < t_end {
                xs.push((t, a, if d[a] > 0.0 { k } else { k - 1 }));
            }
        }
    }
    xs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let idx = |c: [i64; 3]| g.index([c[0] as usize, c[1] as usize, c[2] as usize]);
    let mut out = vec![(idx(cell), 0.0)];
    let mut k = 0;
    while k < xs.len() {
        let t = xs[k].0;
        while k < xs.len() && xs[k].0 == t {
            cell[xs[k].1] = xs[k].2;
            k += 1;
        }
        if (0..3).any(|a| cell[a] < 0 || cell[a] >= g.dims[a] as i64) {
            break;
        }
        out.push((idx(cell), t));
    }
    out
}

/// Voxels one pixel ray observes: everything up to and including the first
/// Occupied voxel, or up to `max_range` without a return.
pub fn observed_by_ray(scene: &VoxelGrid, o: &Vector3<f64>, d: &Vector3<f64>, max_range: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for (i, _) in crossing_walk(scene.geometry(), o, d, max_range) {
        out.push(i);
        if scene.state(i) == VoxelState::Occupied {
            break;
        }
    }
    out
}

pub fn brute_view_mask(scene: &VoxelGrid, pose: &Pose, cam: &CameraModel) -> Vec<bool> {
    let mut m = vec![false; scene.len()];
    for y in 0..cam.height {
        for x in 0..cam.width {
            let d = pose.to_world_dir(&cam.pixel_ray(x, y));
            for i in observed_by_ray(scene, &pose.position, &d, cam.max_range) {
                m[i] = true;
            }
        }
    }
    m
}

/// Free, in-view voxels with a face neighbour out of view.
pub fn brute_frontier(in_view: &[bool], scene: &VoxelGrid) -> Vec<usize> {
    let g = scene.geometry();
    let mut out = Vec::new();
    for z in 0..g.dims[2] {
        for y in 0..g.dims[1] {
            for x in 0..g.dims[0] {
                let i = g.index([x, y, z]);
                if scene.state(i) == VoxelState::Free && in_view[i] && face_neighbors(g, i).iter().any(|&n| !in_view[n]) {
                    out.push(i);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Viewing direction from the 5³ neighbourhood rule.
pub fn brute_direction(vv: &ViewVolume, i: usize, fallback: &Vector3<f64>) -> Vector3<f64> {
    let g = vv.geometry();
    let c = g.coord(i);
    let mut s = Vector3::zeros();
    for dz in -2i64..=2 {
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                if (dx, dy, dz) == (0, 0, 0) || !(0..3).all(|k| n[k] >= 0 && (n[k] as usize) < g.dims[k]) {
                    continue;
                }
                let off = Vector3::new(dx as f64, dy as f64, dz as f64);
                let u = off / off.norm();
                let j = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
                s += if vv.is_out(j) { u } else { -u };
            }
        }
    }
    if s.norm() < 1e-6 {
        fallback.normalize()
    } else {
        s.normalize()
    }
}

/// Distinct out-of-view voxels observed by a virtual camera.
pub fn brute_visible_out(scene: &VoxelGrid, vv: &ViewVolume, pose: &Pose, cam: &CameraModel) -> usize {
    let mut seen = HashSet::new();
    for y in 0..cam.height {
        for x in 0..cam.width {
            let d = pose.to_world_dir(&cam.pixel_ray(x, y));
            for i in observed_by_ray(scene, &pose.position, &d, cam.max_range) {
                if vv.is_out(i) {
                    seen.insert(i);
                }
            }
        }
    }
    seen.len()
}

/// Known voxels whose centre lies in the truncated frustum of `pose`.
pub fn brute_known_in_frustum(map: &VoxelGrid, pose: &Pose, cam: &CameraModel) -> usize {
    let g = map.geometry();
    let (fx, fy) = cam.focal();
    (0..map.len())
        .filter(|&i| map.state(i) != VoxelState::Unknown)
        .filter(|&i| {
            let c = g.center_of_index(i);
            if (c - pose.position).norm() > cam.max_range {
                return false;
            }
            let p = pose.orientation.inverse() * (c - pose.position);
            if p.z <= 0.0 {
                return false;
            }
            let u = fx * p.x / p.z + cam.width as f64 / 2.0;
            let v = fy * p.y / p.z + cam.height as f64 / 2.0;
            u >= 0.0 && v >= 0.0 && u < cam.width as f64 && v < cam.height as f64
        })
        .count()
}

/// Free voxels whose centre is farther than `inflation` from every Occupied
/// centre.
pub fn brute_traversable(map: &VoxelGrid, inflation: f64) -> Vec<bool> {
    let g = map.geometry();
    let occ: Vec<Vector3<f64>> = (0..map.len()).filter(|&i| map.state(i) == VoxelState::Occupied).map(|i| g.center_of_index(i)).collect();
    (0..map.len())
        .map(|i| {
            let c = g.center_of_index(i);
            map.state(i) == VoxelState::Free && occ.iter().all(|o| (o - c).norm_squared() > inflation * inflation + 1e-9)
        })
        .collect()
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0)
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Shortest metric path costs over 26-connected `free` voxels; the start
/// is admitted regardless.
pub fn brute_dijkstra(g: &GridGeometry, free: &[bool], start: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Item(0.0, start));
    while let Some(Item(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let c = g.coord(i);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                    if (dx, dy, dz) == (0, 0, 0) || !(0..3).all(|k| n[k] >= 0 && (n[k] as usize) < g.dims[k]) {
                        continue;
                    }
                    let j = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
                    if !free[j] {
                        continue;
                    }
                    let nd = d + g.resolution * ((dx * dx + dy * dy + dz * dz) as f64).sqrt();
                    if nd < dist[j] {
                        dist[j] = nd;
                        heap.push(Item(nd, j));
                    }
                }
            }
        }
    }
    dist
}

/// Random box maze: every voxel Occupied with probability `p`.
pub fn random_maze(r: &mut ChaCha8Rng, dims: [usize; 3], p: f64) -> VoxelGrid {
    let g = GridGeometry::new(dims, 0.1, Vector3::zeros()).unwrap();
    let states = (0..g.len()).map(|_| if r.gen_bool(p) { VoxelState::Occupied } else { VoxelState::Free }).collect();
    VoxelGrid::from_states(g, states).unwrap()
}

pub fn small_scene_params(r: &mut ChaCha8Rng) -> SceneParams {
    let e = r.gen_range(4.0..6.0);
    SceneParams {
        rooms_min: 1,
        rooms_max: 3,
        extent: [e, r.gen_range(4.0..6.0), 2.5],
        ..Default::default()
    }
}

/// A random pose at a clear position, or `None` if the scene has none.
pub fn random_pose(r: &mut ChaCha8Rng, scene: &VoxelGrid) -> Option<Pose> {
    let h = r.gen_range(0.8..1.8);
    let spots = frontier_core::world::scene_gen::clear_positions(scene, h, 0.2);
    if spots.is_empty() {
        return None;
    }
    let p = spots[r.gen_range(0..spots.len())];
    Some(Pose::from_yaw_pitch_deg(p, r.gen_range(0.0..360.0), r.gen_range(-40.0..40.0)))
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
