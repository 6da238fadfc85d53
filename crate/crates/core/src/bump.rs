//! The `exp(-1/t)` partition ratio used for every smooth cutoff.

#[inline]
fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Equals 1 for `a ≤ lo`, 0 for `a ≥ hi`, and `g(1-t)/(g(1-t)+g(t))` with
/// `t = (a-lo)/(hi-lo)` in between; infinitely flat at both ends.
#[inline]
pub fn smooth_step(a: f64, lo: f64, hi: f64) -> f64 {
    if a <= lo {
        return 1.0;
    }
    if a >= hi {
        return 0.0;
    }
    let t = (a - lo) / (hi - lo);
    let u = g(1.0 - t);
    let v = g(t);
    u / (u + v)
}
