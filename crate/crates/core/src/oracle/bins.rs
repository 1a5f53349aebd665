//! Info-gain discretisation into `K` classes.
//!
//! Class 0 holds exactly-zero gain. Classes `1..K-1` are half-open bins of
//! width `g_max / (K-1)` starting at 0; gains at or above the last bin's
//! lower edge (including everything above `g_max`) land in class `K-1`.

/// Bin width for `k` classes over `(0, g_max]`.
#[inline]
pub fn bin_width(k: usize, g_max: f64) -> f64 {
    g_max / (k - 1) as f64
}

pub fn bin_gain(g: f64, k: usize, g_max: f64) -> u8 {
    debug_assert!((2..=256).contains(&k) && g_max > 0.0);
    if !(g > 0.0) {
        return 0;
    }
    let c = (g / bin_width(k, g_max)).floor() + 1.0;
    c.min((k - 1) as f64) as u8
}

/// Lower edge of the bin for class `c`.
pub fn unbin(c: u8, k: usize, g_max: f64) -> f64 {
    if c == 0 {
        0.0
    } else {
        (c.min((k - 1) as u8) as f64 - 1.0) * bin_width(k, g_max)
    }
}
