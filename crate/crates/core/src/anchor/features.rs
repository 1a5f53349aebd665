//! Per-pixel features for anchoring: mask recovery, viewing angle and
//! foreground / background depth.

use crate::raster::{Mask, Raster};
use crate::world::{wrap_angle, DepthImage, GradientMap};

/// Frontier pixels recovered from a distance field: `d < l`.
pub fn recover_mask(d: &Raster<f64>, l: f64) -> Mask {
    d.map(|&v| v < l)
}

/// Window-averaged gradient around `(x, y)`; `None` if any pixel of the
/// `w × w` window (clipped to the image) is invalid.
pub fn window_gradient(gm: &GradientMap, x: usize, y: usize, w: usize) -> Option<(f64, f64)> {
    let r = (w / 2) as i64;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for dy in -r..=r {
        for dx in -r..=r {
            let (px, py) = (x as i64 + dx, y as i64 + dy);
            if !gm.valid.contains(px, py) {
                continue;
            }
            let (px, py) = (px as usize, py as usize);
            if !*gm.valid.get(px, py) {
                return None;
            }
            sx += gm.gx.get(px, py);
            sy += gm.gy.get(px, py);
            n += 1;
        }
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

/// Image-plane viewing angle `atan2(-ḡy, -ḡx)`, pointing from the
/// background toward the occluding foreground. `None` when the window is
/// invalid or the mean gradient is weaker than `eps_g`.
pub fn pixel_viewing_angle(gm: &GradientMap, x: usize, y: usize, w: usize, eps_g: f64) -> Option<f64> {
    let (gx, gy) = window_gradient(gm, x, y, w)?;
    if gx.hypot(gy) < eps_g {
        return None;
    }
    Some(wrap_angle((-gy).atan2(-gx)))
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// `(d_f, d_b)`: medians of depth samples at `{s, 2s, 3s}` pixels against
/// and along the gradient direction, which is `-(cos φ, sin φ)`.
/// `NO_RETURN` background samples read as `max_range`; the foreground
/// side needs at least one finite sample.
pub fn sample_fg_bg_depth(depth: &DepthImage, x: usize, y: usize, phi: f64, s: f64, max_range: f64) -> Option<(f64, f64)> {
    let (ux, uy) = (-phi.cos(), -phi.sin());
    let sample = |sign: f64, k: f64| {
        let px = (x as f64 + sign * k * s * ux).round() as i64;
        let py = (y as f64 + sign * k * s * uy).round() as i64;
        depth.contains(px, py).then(|| *depth.get(px as usize, py as usize))
    };
    let mut bg: Vec<f64> = (1..=3)
        .filter_map(|k| sample(1.0, k as f64))
        .map(|v| if v.is_finite() { v } else { max_range })
        .collect();
    let mut fg: Vec<f64> = (1..=3).filter_map(|k| sample(-1.0, k as f64)).filter(|v| v.is_finite()).collect();
    let d_f = median(&mut fg)?;
    let d_b = median(&mut bg)?;
    Some((d_f, d_b))
}
