//! Scalar root finding for strictly increasing functions.
//!
//! Every implicit evaluation in the crate (leaf labels from fiber values,
//! warped angles, straightening inverses) reduces to a root of a monotone
//! function, so a safeguarded Newton iteration with a bisection fallback
//! covers all of them. Solvers return NaN instead of panicking when no
//! bracket can be established; callers propagate the NaN into the divergence
//! guard of the enclosing map.

/// Expands [lo, hi] symmetrically until f changes sign across it.
/// Returns None after `max_doublings` failed expansions.
pub fn bracket_increasing<F: Fn(f64) -> f64>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    max_doublings: u32,
) -> Option<(f64, f64)> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..=max_doublings {
        if flo <= 0.0 && fhi >= 0.0 {
            return Some((lo, hi));
        }
        let mid = 0.5 * (lo + hi);
        let half = (hi - lo).max(1e-12);
        lo = mid - half;
        hi = mid + half;
        flo = f(lo);
        fhi = f(hi);
    }
    None
}

/// Root of an increasing function on a bracketing interval by bisection.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, iters: u32) -> f64 {
    if !(f(lo) <= 0.0 && f(hi) >= 0.0) {
        return f64::NAN;
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval exhausted at this precision
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of an increasing function by Newton steps clipped to a shrinking
/// bisection bracket. Quadratic near the root, never leaves [lo, hi].
pub fn newton_bisect<F, G>(f: &F, df: &G, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(f(lo) <= 0.0 && f(hi) >= 0.0) {
        return f64::NAN;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let scale = 1.0 + x.abs();
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let d = df(x);
        let newton = x - fx / d;
        x = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    // x, not the bracket midpoint: Newton often converges while one bracket
    // end never moves
    x
}
