//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher) and the
//! truncated, log-normalised frontier distance field.

use crate::raster::{Mask, Raster};

const FAR: f64 = 1e20;

/// Lower envelope of parabolas for one row or column, in place.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *o = dq * dq + f[p];
    }
}

/// Squared distance (in pixels²) from every pixel to the nearest on-pixel.
/// Pixels of an all-off mask get a huge sentinel.
pub fn squared_edt(mask: &Mask) -> Raster<f64> {
    let (w, h) = (mask.width(), mask.height());
    let n = w.max(h);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut grid: Vec<f64> = mask.data().iter().map(|&b| if b { 0.0 } else { FAR }).collect();

    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = grid[y * w + x];
        }
        edt_1d(&col, &mut col_out, &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = col_out[y];
        }
    }
    let mut row_out = vec![0.0; w];
    for y in 0..h {
        edt_1d(&grid[y * w..(y + 1) * w], &mut row_out, &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&row_out);
    }
    Raster::from_vec(w, h, grid)
}

/// Truncated distance field `d` and its normalisation `-ln(max(d, 1)/r_df)`.
pub fn distance_field(mask: &Mask, r_df: f64) -> (Raster<f64>, Raster<f64>) {
    let sq = squared_edt(mask);
    let r2 = r_df * r_df;
    let d = sq.map(|&s| if s >= r2 { r_df } else { s.sqrt() });
    let d_norm = d.map(|&v| if v < r_df { -(v.max(1.0) / r_df).ln() } else { 0.0 });
    (d, d_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel() {
        let mut m = Mask::filled(32, 32, false);
        m.set(10, 10, true);
        let (d, dn) = distance_field(&m, 20.0);
        assert_eq!(*d.get(13, 10), 3.0);
        assert_eq!(*d.get(10, 10), 0.0);
        assert!((dn.get(10, 10) - 20f64.ln()).abs() < 1e-12);
        assert!((d.get(13, 14) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn all_off_is_clamped() {
        let m = Mask::filled(16, 9, false);
        let (d, dn) = distance_field(&m, 20.0);
        assert!(d.data().iter().all(|&v| v == 20.0));
        assert!(dn.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
            let p = rng.gen_range(0.0..0.2);
            let m = Mask::from_fn(w, h, |_, _| rng.gen_bool(p));
            let sq = squared_edt(&m);
            let on: Vec<(i64, i64)> = m.iter_pixels().filter(|p| *p.2).map(|(x, y, _)| (x as i64, y as i64)).collect();
            for (x, y, s) in sq.iter_pixels() {
                let best = on.iter().map(|&(a, b)| (a - x as i64).pow(2) + (b - y as i64).pow(2)).min();
                match best {
                    Some(b) => assert_eq!(*s, b as f64),
                    None => assert!(*s >= FAR),
                }
            }
        }
    }
}
