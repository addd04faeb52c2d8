//! Root finding for monotone scalar functions on `[lo, inf)`.

use crate::error::{Error, Result};

/// Largest bracket end tried before giving up.
const MAX_UPPER: f64 = 1e60;

/// Options for [`find_root`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute tolerance on the root location.
    pub x_tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-12,
            max_iter: 400,
        }
    }
}

/// Doubles `hi` from `lo + 1` until `f` changes sign relative to `f(lo)`.
///
/// Returns `(lo', hi)` with `f(lo') * f(hi) <= 0`.
pub fn expand_bracket<F: FnMut(f64) -> f64>(mut f: F, lo: f64) -> Result<(f64, f64)> {
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    let mut left = lo;
    let mut width = 1.0;
    loop {
        let hi = lo + width;
        let f_hi = f(hi);
        if !f_hi.is_finite() {
            return Err(Error::Bracket(format!("non-finite value {f_hi} at {hi}")));
        }
        if f_hi == 0.0 || f_hi.signum() != f_lo.signum() {
            return Ok((left, hi));
        }
        if hi > MAX_UPPER {
            return Err(Error::Bracket(format!(
                "no sign change on [{lo}, {hi}], f({lo}) = {f_lo}, f({hi}) = {f_hi}"
            )));
        }
        left = hi;
        width *= 2.0;
    }
}

/// Bisection with secant steps inside a sign-changing bracket.
///
/// The secant candidate is used only when it falls strictly inside the
/// current bracket; otherwise the midpoint is taken. Every iterate keeps the
/// bracket valid, so convergence is guaranteed.
pub fn bisect_secant<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    opts: RootOptions,
) -> Result<f64> {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut f_hi = f(hi);
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: {f_lo}, {f_hi}"
        )));
    }
    let mut use_secant = true;
    for _ in 0..opts.max_iter {
        let tol = opts.x_tol.max(4.0 * f64::EPSILON * hi.abs());
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut x = mid;
        if use_secant {
            let s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            if s > lo && s < hi && s.is_finite() {
                x = s;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        let old_width = hi - lo;
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // alternate to a bisection step whenever the secant step shrank the bracket too little
        use_secant = hi - lo < 0.5 * old_width || !use_secant;
    }
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// Root of a function with a single sign change on `[lo, inf)`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, opts: RootOptions) -> Result<f64> {
    let (a, b) = expand_bracket(&mut f, lo)?;
    if a == b {
        return Ok(a);
    }
    bisect_secant(f, a, b, opts)
}
