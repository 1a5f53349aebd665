//! Depth-discontinuity mask `f_d`.

use crate::raster::Mask;
use crate::world::{DepthImage, GradientMap};

/// On where the gradient is valid and steeper than `tau_d` (meters per
/// pixel), and along both sides of every finite / `NO_RETURN` boundary.
pub fn depth_discontinuity_mask(gm: &GradientMap, depth: &DepthImage, tau_d: f64) -> Mask {
    let (w, h) = (depth.width(), depth.height());
    let mut m = Mask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if *gm.valid.get(x, y) && gm.magnitude(x, y) > tau_d {
                m.set(x, y, true);
                continue;
            }
            let finite = depth.get(x, y).is_finite();
            let nbrs = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)];
            let boundary = nbrs.iter().any(|(dx, dy)| {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                depth.contains(nx, ny) && depth.get(nx as usize, ny as usize).is_finite() != finite
            });
            if boundary {
                m.set(x, y, true);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{depth_gradient, NO_RETURN};

    #[test]
    fn flat_wall_is_off() {
        let d = DepthImage::filled(8, 8, 2.0);
        assert_eq!(depth_discontinuity_mask(&depth_gradient(&d), &d, 0.05).count_on(), 0);
    }

    #[test]
    fn step_edge_columns() {
        let d = DepthImage::from_fn(12, 6, |x, _| if x <= 5 { 1.0 } else { 3.0 });
        let m = depth_discontinuity_mask(&depth_gradient(&d), &d, 0.05);
        for (x, _, on) in m.iter_pixels() {
            assert_eq!(*on, x == 5 || x == 6);
        }
    }

    #[test]
    fn window_border() {
        let d = DepthImage::from_fn(10, 10, |x, y| if (3..7).contains(&x) && (3..7).contains(&y) { NO_RETURN } else { 2.0 });
        let m = depth_discontinuity_mask(&depth_gradient(&d), &d, 0.05);
        assert!(*m.get(2, 4) && *m.get(3, 4) && *m.get(6, 5) && *m.get(7, 5));
        assert!(!*m.get(0, 0) && !*m.get(4, 4) && !*m.get(9, 9));
    }
}
