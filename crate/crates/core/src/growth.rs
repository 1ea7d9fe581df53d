//! Growth of maximal networks.
//!
//! A maximal network (every node `K M^n n!`, all weights one) dominates every
//! network whose node constants are at most `K̄`, `M̄`. Its natural response
//! solves the Abel equation `ż = (M̄/K̄)(z² + m z³)`, `z(0) = K̄`, whose
//! singularity nearest the origin sits at
//!
//! ```text
//! t* = λ(m K̄) / M̄,    λ(x) = 1 - x ln(1 + 1/x),
//! ```
//!
//! so `M_inf = 1/t*` is the smallest admissible geometric growth constant.

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambert::{lambert_w_plus_one_from_q, Branch};
use crate::network::{NetworkSpec, NodeSource};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthBound {
    #[serde(rename = "Kbar")]
    pub kbar: f64,
    #[serde(rename = "Mbar")]
    pub mbar: f64,
    pub m: usize,
    #[serde(rename = "M_inf")]
    pub m_inf: f64,
    pub t_star: f64,
}

/// `1 - x ln(1 + 1/x)` for `x > 0`; decreases from 1 to 0.
pub fn lambda(x: f64) -> f64 {
    if x < 4.0 {
        return 1.0 - x * (1.0 / x).ln_1p();
    }
    // sum_{k>=2} (-1)^k / (k x^{k-1}); terms shrink by at least 4.
    let y = 1.0 / x;
    let mut term = y;
    let mut sum = 0.0;
    for k in 2..80 {
        let t = term / k as f64;
        sum += if k % 2 == 0 { t } else { -t };
        if t < 1e-18 * sum.abs() {
            break;
        }
        term *= y;
    }
    sum
}

pub fn m_inf_bound(kbar: f64, mbar: f64, m: usize) -> Result<GrowthBound> {
    if !(kbar > 0.0 && kbar.is_finite()) || !(mbar > 0.0 && mbar.is_finite()) || m == 0 {
        return Err(Error::Domain(format!(
            "growth bound needs Kbar > 0, Mbar > 0, m >= 1 (got {kbar}, {mbar}, {m})"
        )));
    }
    let l = lambda(m as f64 * kbar);
    Ok(GrowthBound {
        kbar,
        mbar,
        m,
        m_inf: mbar / l,
        t_star: l / mbar,
    })
}

/// Bound for a network of maximal nodes, from the largest node constants.
pub fn network_bound(net: &NetworkSpec) -> Result<GrowthBound> {
    let mut kbar = 0.0f64;
    let mut mbar = 0.0f64;
    for (i, node) in net.nodes().iter().enumerate() {
        match node {
            NodeSource::Maximal(spec) => {
                kbar = kbar.max(Scalar::to_f64(&spec.k));
                mbar = mbar.max(Scalar::to_f64(&spec.m));
            }
            NodeSource::Poly(_) => {
                return Err(Error::Model(format!(
                    "node {} is not a maximal series; growth bounds need K and M per node",
                    i + 1
                )))
            }
        }
    }
    m_inf_bound(kbar, mbar, net.node_count())
}

/// Taylor data of the maximal network's natural response.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelSequence {
    pub m: usize,
    pub k: Rational,
    pub big_m: Rational,
    /// Taylor coefficients `z_n`.
    pub z: Vec<Rational>,
    /// Derivatives at the origin, `a_n = n! z_n`.
    pub a: Vec<Rational>,
    /// `Mhat_n = a_n / (n a_{n-1})`, the ratio-test estimate of `M_inf`;
    /// `mhat[0]` is NaN.
    pub mhat: Vec<f64>,
}

/// Derivatives of the Abel solution at the origin, by Leibniz's rule:
///
/// ```text
/// a_{n+1} = (M/K) (sum C(n,i) a_i a_{n-i}  +  m sum C(n,i) (z²)^{(i)} a_{n-i})
/// ```
///
/// This stays in integers when `K = M = 1`.
pub fn abel_taylor(m: usize, k: &Rational, big_m: &Rational, n_max: usize) -> Result<AbelSequence> {
    if !k.is_positive() || !big_m.is_positive() {
        return Err(Error::Domain("abel_taylor needs K, M > 0".into()));
    }
    let ratio = big_m / k;
    let mm = Rational::from_integer(m.into());
    let mut a: Vec<Rational> = vec![k.clone()];
    // sq[i] = (z^2)^{(i)}(0)
    let mut sq: Vec<Rational> = Vec::with_capacity(n_max + 1);
    for n in 0..n_max {
        let row = binomial_row(n);
        let sq_n = (0..=n).fold(Rational::zero(), |acc, i| acc + &row[i] * &a[i] * &a[n - i]);
        sq.push(sq_n);
        let cube_n = (0..=n).fold(Rational::zero(), |acc, i| acc + &row[i] * &sq[i] * &a[n - i]);
        a.push(&ratio * (&sq[n] + &mm * cube_n));
    }
    let mut fact = num_bigint::BigInt::from(1);
    let mut z = Vec::with_capacity(a.len());
    for (n, an) in a.iter().enumerate() {
        if n > 0 {
            fact *= n;
        }
        z.push(an / Rational::from_integer(fact.clone()));
    }
    let mhat = (0..a.len())
        .map(|n| {
            if n == 0 {
                f64::NAN
            } else {
                Scalar::to_f64(&(&a[n] / (&a[n - 1] * Rational::from_integer(n.into()))))
            }
        })
        .collect();
    Ok(AbelSequence {
        m,
        k: k.clone(),
        big_m: big_m.clone(),
        z,
        a,
        mhat,
    })
}

fn binomial_row(n: usize) -> Vec<Rational> {
    let mut row = Vec::with_capacity(n + 1);
    let mut c = num_bigint::BigInt::from(1);
    for i in 0..=n {
        row.push(Rational::from_integer(c.clone()));
        c = c * (n - i) / (i + 1);
    }
    row
}

/// Closed-form natural response of an `m`-node maximal network with node
/// constants `K`, `M`:
///
/// ```text
/// z(t) = (-1/m) / (1 + W₋₁(-a exp(M t / (m K) - a))),   a = 1 + 1/(mK)
/// ```
///
/// The lower branch is the one with `z(0) = K`, since `W₋₁(-a e^{-a}) = -a`.
/// The Lambert argument is carried as `1 + e x = -expm1(g)` so the value
/// stays accurate as `t → t*`.
pub fn closed_form_natural_response(m: usize, k: f64, big_m: f64, t: f64) -> Result<f64> {
    let bound = m_inf_bound(k, big_m, m)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be nonnegative (got {t})")));
    }
    if t >= bound.t_star {
        return Err(Error::Domain(format!(
            "t = {t} is at or past the escape time t* = {}",
            bound.t_star
        )));
    }
    let mk = m as f64 * k;
    let a = 1.0 + 1.0 / mk;
    let g = big_m * t / mk - a + 1.0 + a.ln();
    let q = -g.exp_m1();
    let w1 = if t == 0.0 {
        1.0 - a
    } else {
        lambert_w_plus_one_from_q(q, Branch::Lower)?
    };
    Ok(-1.0 / (m as f64 * w1))
}

/// `sum z_n t^n` evaluated in floating point.
pub fn taylor_partial_sum(seq: &AbelSequence, t: f64) -> f64 {
    seq.z.iter().rev().fold(0.0, |acc, z| acc * t + Scalar::to_f64(z))
}

/// Smallest `n` with `a_n > bound_k bound_m^n n!`, if any, over the sequence.
pub fn first_growth_violation(seq: &AbelSequence, bound_k: f64, bound_m: f64) -> Option<usize> {
    let mut log_scale = 0.0f64;
    for (n, an) in seq.a.iter().enumerate() {
        if n > 0 {
            log_scale += bound_m.ln() + (n as f64).ln();
        }
        if log_abs(an) > bound_k.ln() + log_scale + 1e-12 {
            return Some(n);
        }
    }
    None
}

/// Natural log of `|x|`, also for values beyond f64 range.
pub fn log_abs(x: &Rational) -> f64 {
    let bits = |v: &num_bigint::BigInt| v.bits() as i64;
    let (n, d) = (x.numer().clone(), x.denom().clone());
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let shift_n = (bits(&n) - 60).max(0);
    let shift_d = (bits(&d) - 60).max(0);
    let nf = (n.abs() >> shift_n as usize).to_f64().unwrap_or(f64::MAX);
    let df = (d >> shift_d as usize).to_f64().unwrap_or(f64::MAX);
    nf.ln() - df.ln() + (shift_n - shift_d) as f64 * std::f64::consts::LN_2
}
