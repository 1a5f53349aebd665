//! Ray gating between pixel rays and frontier voxel centres.
//!
//! A pixel is gated by a voxel when the voxel centre lies within `r_ray`
//! of the pixel's ray segment `[0, max_range]`. Candidate pixels per voxel
//! come from a conservative angular bound, so results equal the
//! all-pairs definition.

use nalgebra::Vector3;

use super::view::FrontierVoxelSet;
use crate::raster::{Mask, Raster};
use crate::world::{CameraModel, GridGeometry, Pose};

/// Squared distance from `c` to the ray segment `o + t·d`, `t ∈ [0, t_max]`.
#[inline]
pub fn point_ray_dist2(o: &Vector3<f64>, d: &Vector3<f64>, t_max: f64, c: &Vector3<f64>) -> f64 {
    let w = c - o;
    let t = w.dot(d).clamp(0.0, t_max);
    (w - d * t).norm_squared()
}

/// World-frame unit rays of every pixel, row-major.
pub fn world_rays(pose: &Pose, cam: &CameraModel) -> Vec<Vector3<f64>> {
    cam.pixel_rays().iter().map(|r| pose.to_world_dir(r)).collect()
}

/// Calls `hit(pixel_index, member)` for every (pixel, frontier member)
/// pair within `r_ray`.
pub fn for_each_gated<F>(
    geom: &GridGeometry,
    ft: &FrontierVoxelSet,
    pose: &Pose,
    cam: &CameraModel,
    r_ray: f64,
    mut hit: F,
) where
    F: FnMut(usize, usize),
{
    if ft.is_empty() {
        return;
    }
    let rays = world_rays(pose, cam);
    let o = pose.position;
    let r2 = r_ray * r_ray;
    let (fx, fy) = cam.focal();
    let f = fx.max(fy);
    let max_off = cam.max_off_axis_angle();
    let limit = 80f64.to_radians();
    let (w, h) = (cam.width as i64, cam.height as i64);

    for (k, &vi) in ft.voxels.iter().enumerate() {
        let c = geom.center_of_index(vi);
        let wv = c - o;
        let dist = wv.norm();
        if dist > cam.max_range + r_ray {
            continue;
        }
        let mut scan = |x0: i64, x1: i64, y0: i64, y1: i64| {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let p = (y * w + x) as usize;
                    if point_ray_dist2(&o, &rays[p], cam.max_range, &c) <= r2 {
                        hit(p, k);
                    }
                }
            }
        };
        if dist <= r_ray {
            scan(0, w - 1, 0, h - 1);
            continue;
        }
        let alpha = (r_ray / dist).asin();
        let pc = pose.to_camera(&c);
        let theta0 = (pc.z / dist).clamp(-1.0, 1.0).acos();
        if theta0 - alpha > max_off {
            continue;
        }
        if theta0 + alpha >= limit {
            scan(0, w - 1, 0, h - 1);
            continue;
        }
        let Some((u, v)) = cam.project(&pc) else {
            scan(0, w - 1, 0, h - 1);
            continue;
        };
        let reach = f * alpha / (theta0 + alpha).cos().powi(2) + 1.0;
        let x0 = ((u - reach).floor() as i64).max(0);
        let x1 = ((u + reach).ceil() as i64).min(w - 1);
        let y0 = ((v - reach).floor() as i64).max(0);
        let y1 = ((v + reach).ceil() as i64).min(h - 1);
        if x0 <= x1 && y0 <= y1 {
            scan(x0, x1, y0, y1);
        }
    }
}

/// Binary prior `f_p`.
pub fn project_frontier_prior(geom: &GridGeometry, ft: &FrontierVoxelSet, pose: &Pose, cam: &CameraModel, r_ray: f64) -> Mask {
    let mut m = Mask::filled(cam.width, cam.height, false);
    for_each_gated(geom, ft, pose, cam, r_ray, |p, _| m.data_mut()[p] = true);
    m
}

/// Per-pixel max gain over gated frontier voxels; 0 where none.
pub fn info_gain_map(geom: &GridGeometry, ft: &FrontierVoxelSet, pose: &Pose, cam: &CameraModel, r_ray: f64) -> Raster<f64> {
    let mut g = Raster::filled(cam.width, cam.height, 0.0);
    for_each_gated(geom, ft, pose, cam, r_ray, |p, k| {
        let v = &mut g.data_mut()[p];
        if ft.gains[k] > *v {
            *v = ft.gains[k];
        }
    });
    g
}
