//! Finite-difference depth gradients.

use super::render::DepthImage;
use crate::raster::{Mask, Raster};

/// Per-pixel depth gradient in meters per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMap {
    pub gx: Raster<f64>,
    pub gy: Raster<f64>,
    /// False wherever a stencil sample is `NO_RETURN`.
    pub valid: Mask,
}

impl GradientMap {
    pub fn width(&self) -> usize {
        self.gx.width()
    }

    pub fn height(&self) -> usize {
        self.gx.height()
    }

    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.gx.get(x, y).hypot(*self.gy.get(x, y))
    }
}

/// One axis of the stencil: `(lo, hi, divisor)`.
#[inline]
fn stencil(i: usize, n: usize) -> Option<(usize, usize, f64)> {
    if n < 2 {
        None
    } else if i == 0 {
        Some((0, 1, 1.0))
    } else if i == n - 1 {
        Some((n - 2, n - 1, 1.0))
    } else {
        Some((i - 1, i + 1, 2.0))
    }
}

/// Central differences inside, one-sided on the border.
pub fn depth_gradient(depth: &DepthImage) -> GradientMap {
    let (w, h) = (depth.width(), depth.height());
    let mut gx = Raster::filled(w, h, 0.0);
    let mut gy = Raster::filled(w, h, 0.0);
    let mut valid = Mask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let mut ok = depth.get(x, y).is_finite();
            if let Some((a, b, div)) = stencil(x, w) {
                let (da, db) = (*depth.get(a, y), *depth.get(b, y));
                ok &= da.is_finite() && db.is_finite();
                gx.set(x, y, (db - da) / div);
            }
            if let Some((a, b, div)) = stencil(y, h) {
                let (da, db) = (*depth.get(x, a), *depth.get(x, b));
                ok &= da.is_finite() && db.is_finite();
                gy.set(x, y, (db - da) / div);
            }
            if ok {
                valid.set(x, y, true);
            } else {
                gx.set(x, y, 0.0);
                gy.set(x, y, 0.0);
            }
        }
    }
    GradientMap { gx, gy, valid }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::render::NO_RETURN;

    #[test]
    fn constant_plane_is_flat() {
        let g = depth_gradient(&DepthImage::filled(6, 5, 2.0));
        assert!(g.gx.data().iter().chain(g.gy.data()).all(|v| *v == 0.0));
        assert_eq!(g.valid.count_on(), 30);
    }

    #[test]
    fn linear_field() {
        let d = DepthImage::from_fn(10, 6, |x, _| 1.0 + 0.01 * x as f64);
        let g = depth_gradient(&d);
        for y in 1..5 {
            for x in 1..9 {
                assert!((g.gx.get(x, y) - 0.01).abs() < 1e-12);
                assert_eq!(*g.gy.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn step_edge_peaks_at_step() {
        let c = 4;
        let d = DepthImage::from_fn(10, 3, |x, _| if x <= c { 1.0 } else { 3.0 });
        let g = depth_gradient(&d);
        let row: Vec<f64> = (0..10).map(|x| g.gx.get(x, 1).abs()).collect();
        let max = row.iter().cloned().fold(0.0, f64::max);
        for (x, v) in row.iter().enumerate() {
            assert_eq!(*v == max, x == c || x == c + 1, "column {x}");
        }
    }

    #[test]
    fn no_return_invalidates_stencil() {
        let mut d = DepthImage::filled(5, 5, 1.0);
        d.set(2, 2, NO_RETURN);
        let g = depth_gradient(&d);
        for (x, y) in [(1, 2), (3, 2), (2, 1), (2, 3), (2, 2)] {
            assert!(!g.valid.get(x, y));
        }
        assert!(*g.valid.get(1, 1));
    }
}
