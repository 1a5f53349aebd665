//! Per-voxel information gain: exact visibility counts on a sampled subset,
//! inverse-distance interpolation for the rest.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::view::{FrontierVoxelSet, ViewVolume};
use crate::world::integrate::ray_observations;
use crate::world::render::cast_ray;
use crate::world::{CameraModel, GridGeometry, Pose, VoxelGrid};

/// Half-width of the direction-estimation neighbourhood (5³).
const DIR_RADIUS: i64 = 2;
const IDW_K: usize = 4;

/// Viewing direction at a frontier voxel: sum of unit offsets toward
/// out-of-view neighbours minus those toward in-view neighbours. Falls back
/// to `fallback` when the sum vanishes.
pub fn frontier_direction(vv: &ViewVolume, index: usize, fallback: &Vector3<f64>) -> Vector3<f64> {
    let g = vv.geometry();
    let c = g.coord(index);
    let mut sum = Vector3::zeros();
    for dz in -DIR_RADIUS..=DIR_RADIUS {
        for dy in -DIR_RADIUS..=DIR_RADIUS {
            for dx in -DIR_RADIUS..=DIR_RADIUS {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                if !g.contains_coord(n) {
                    continue;
                }
                let ni = g.index([n[0] as usize, n[1] as usize, n[2] as usize]);
                let u = Vector3::new(dx as f64, dy as f64, dz as f64).normalize();
                if vv.is_out(ni) {
                    sum += u;
                } else {
                    sum -= u;
                }
            }
        }
    }
    if sum.norm() < 1e-6 {
        fallback.normalize()
    } else {
        sum.normalize()
    }
}

/// Counts distinct `v_out` voxels observed by the pixel rays of a virtual
/// camera. `stamp`/`epoch` de-duplicate without clearing a buffer.
pub fn visible_out_count(scene: &VoxelGrid, vv: &ViewVolume, pose: &Pose, cam: &CameraModel, stamp: &mut [u32], epoch: u32) -> usize {
    let geom = scene.geometry();
    let mut count = 0;
    for y in 0..cam.height {
        for x in 0..cam.width {
            let dir = pose.to_world_dir(&cam.pixel_ray(x, y));
            let range = cast_ray(scene, &pose.position, &dir, cam.max_range);
            ray_observations(geom, pose, &dir, range, cam.max_range, |i, _, _| {
                if stamp[i] != epoch {
                    stamp[i] = epoch;
                    if vv.is_out(i) {
                        count += 1;
                    }
                }
            });
        }
    }
    count
}

/// Fills `ft.gains`. `gain_cam` is the virtual camera used for visibility
/// counts; `view_origin` is the real camera position (fallback direction).
pub fn voxel_info_gain(
    scene: &VoxelGrid,
    vv: &ViewVolume,
    ft: &FrontierVoxelSet,
    view_origin: &Vector3<f64>,
    gain_cam: &CameraModel,
    sample_frac: f64,
    seed: u64,
) -> FrontierVoxelSet {
    let n = ft.len();
    let mut out = ft.clone();
    if n == 0 {
        return out;
    }
    let frac = sample_frac.clamp(f64::MIN_POSITIVE, 1.0);
    let m = ((frac * n as f64).ceil() as usize).clamp(1, n);
    let mut picks: Vec<usize> = if m == n {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::index::sample(&mut rng, n, m).into_vec()
    };
    picks.sort_unstable();

    let geom = scene.geometry();
    let sampled_gains: Vec<f64> = picks
        .par_iter()
        .map_init(
            || (vec![0u32; geom.len()], 0u32),
            |(stamp, epoch), &k| {
                *epoch += 1;
                let vi = ft.voxels[k];
                let c = geom.center_of_index(vi);
                let dir = frontier_direction(vv, vi, &(c - view_origin));
                let pose = Pose::looking_along(c, &dir);
                visible_out_count(scene, vv, &pose, gain_cam, stamp, *epoch) as f64
            },
        )
        .collect();

    out.sampled = vec![false; n];
    for (&k, &g) in picks.iter().zip(&sampled_gains) {
        out.gains[k] = g;
        out.sampled[k] = true;
    }
    if m < n {
        let centers: Vec<Vector3<f64>> = picks.iter().map(|&k| geom.center_of_index(ft.voxels[k])).collect();
        for k in 0..n {
            if out.sampled[k] {
                continue;
            }
            let c = geom.center_of_index(ft.voxels[k]);
            out.gains[k] = idw(&c, &centers, &sampled_gains);
        }
    }
    out
}

/// Inverse-distance weighting (power 1) over the `IDW_K` nearest samples,
/// ties broken by sample order.
fn idw(c: &Vector3<f64>, centers: &[Vector3<f64>], gains: &[f64]) -> f64 {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(IDW_K + 1);
    for (j, p) in centers.iter().enumerate() {
        let d2 = (p - c).norm_squared();
        if best.len() < IDW_K || d2 < best[best.len() - 1].0 {
            let pos = best.partition_point(|&(bd, _)| bd <= d2);
            best.insert(pos, (d2, j));
            best.truncate(IDW_K);
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(d2, j) in &best {
        let w = 1.0 / d2.sqrt().max(1e-12);
        num += w * gains[j];
        den += w;
    }
    num / den
}

/// The `k` nearest sampled members of `ft` to member `index`, by the same
/// ordering the interpolation uses.
pub fn nearest_samples(geom: &GridGeometry, ft: &FrontierVoxelSet, index: usize, k: usize) -> Vec<usize> {
    let c = geom.center_of_index(ft.voxels[index]);
    let mut s: Vec<(f64, usize)> = (0..ft.len())
        .filter(|&j| ft.sampled[j])
        .map(|j| ((geom.center_of_index(ft.voxels[j]) - c).norm_squared(), j))
        .collect();
    s.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    s.into_iter().take(k).map(|(_, j)| j).collect()
}
