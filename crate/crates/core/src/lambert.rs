//! Real branches of the Lambert W function, `W(x) e^{W(x)} = x`.
//!
//! Both branches meet at the branch point `x = -1/e`, `W = -1`. Near it the
//! functions are evaluated from the series in `p = ±sqrt(2(1 + e x))`; the
//! entry points taking `q = 1 + e x` directly let callers that know `q`
//! more accurately than `x` keep that accuracy.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITER: usize = 50;
/// Below this `q = 1 + e x` the branch-point series alone is accurate to
/// well under an ulp.
const SERIES_Q: f64 = 1e-4;

/// Coefficients of `W = sum mu_k p^k` at the branch point.
const BRANCH_SERIES: [f64; 10] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// The principal branch, `W >= -1`.
    Principal,
    /// The lower branch on `[-1/e, 0)`, `W <= -1`.
    Lower,
}

/// Principal branch `W0(x)` for `x >= -1/e`.
pub fn lambert_w(x: f64) -> Result<f64> {
    lambert_w_branch(x, Branch::Principal)
}

pub fn lambert_w_branch(x: f64, branch: Branch) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("Lambert W of NaN".into()));
    }
    if x == f64::INFINITY && branch == Branch::Principal {
        return Ok(f64::INFINITY);
    }
    let q = E.mul_add(x, 1.0);
    if q < 0.0 && q > -4.0 * f64::EPSILON {
        // x rounded to just below -1/e.
        return Ok(-1.0);
    }
    solve(x, q, branch)
}

/// `1 + W(x)` given `q = 1 + e x`, without cancellation near the branch point.
pub fn lambert_w_plus_one_from_q(q: f64, branch: Branch) -> Result<f64> {
    if q < SERIES_Q {
        check(-1.0 / E, q, branch)?;
        return Ok(branch_series_plus_one(q, branch));
    }
    Ok(solve((q - 1.0) / E, q, branch)? + 1.0)
}

fn check(x: f64, q: f64, branch: Branch) -> Result<()> {
    if !(q >= 0.0) {
        return Err(Error::Domain(format!(
            "Lambert W undefined below -1/e (1 + e x = {q})"
        )));
    }
    if branch == Branch::Lower && x >= 0.0 {
        return Err(Error::Domain(
            "lower Lambert W branch is defined only on [-1/e, 0)".into(),
        ));
    }
    Ok(())
}

fn branch_series(q: f64, branch: Branch) -> f64 {
    branch_series_plus_one(q, branch) - 1.0
}

fn branch_series_plus_one(q: f64, branch: Branch) -> f64 {
    let p = (2.0 * q).sqrt();
    let p = match branch {
        Branch::Principal => p,
        Branch::Lower => -p,
    };
    p * BRANCH_SERIES[1..].iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

fn solve(x: f64, q: f64, branch: Branch) -> Result<f64> {
    check(x, q, branch)?;
    if x == 0.0 && branch == Branch::Principal {
        return Ok(0.0);
    }
    if q < SERIES_Q {
        return Ok(branch_series(q, branch));
    }
    let mut w = initial_guess(x, q, branch);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        w = next;
    }
    // Halley either converged to the last ulp or is cycling between
    // neighbours; accept when the residual is at rounding level.
    let residual = (w * w.exp() - x).abs();
    if residual <= 1e-14 * x.abs().max(1.0) {
        Ok(w)
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITER,
            last_change: residual,
        })
    }
}

fn initial_guess(x: f64, q: f64, branch: Branch) -> f64 {
    match branch {
        Branch::Principal => {
            if q < 0.5 {
                branch_series(q, branch)
            } else if x < 1.0 {
                // W(x) ~ x - x^2 for small x, and log(1 + x) is a fair bridge.
                x.ln_1p() * (1.0 - 0.5 * x.ln_1p() / (1.0 + x.ln_1p()))
            } else {
                let l1 = x.ln();
                let l2 = l1.ln().max(0.0);
                l1 - l2 + l2 / l1.max(1.0)
            }
        }
        Branch::Lower => {
            if q < 0.5 {
                branch_series(q, branch)
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    }
}
