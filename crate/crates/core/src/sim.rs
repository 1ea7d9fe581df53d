//! Numerical evaluation of Fliess operators and simulation of networks.
//!
//! `F_c[u](t) = sum <c,η> E_η[u](t, t0)` with `E_∅ = 1` and
//! `E_{x_i η}(t) = ∫_{t0}^t u_i(τ) E_η(τ) dτ`, `u_0 = 1`. Iterated integrals
//! use cumulative trapezoidal quadrature, shared between words through a
//! table keyed by suffix.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::network::{io_map, NetworkSpec, NodeSource};
use crate::ode::{integrate, OdeOptions};
use crate::scalar::Scalar;
use crate::series::Series;
use crate::word::Word;

/// Uniform time grid `t0, t0 + h, …, t0 + T` with `n` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub t0: f64,
    pub horizon: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(t0: f64, horizon: f64, steps: usize) -> Result<Self> {
        if !t0.is_finite() || !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(Error::Domain(format!(
                "grid needs finite t0, T > 0 and at least one step (got {t0}, {horizon}, {steps})"
            )));
        }
        Ok(Grid { t0, horizon, steps })
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t0 + self.horizon
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.time(k))).collect()
    }

    fn check_signal(&self, u: &[f64], what: &str) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::Domain(format!(
                "{what} has {} samples, grid has {}",
                u.len(),
                self.len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{what} is not finite")));
        }
        Ok(())
    }

    /// Linear interpolation of a grid signal.
    fn interpolate(&self, u: &[f64], t: f64) -> f64 {
        let x = ((t - self.t0) / self.step()).clamp(0.0, self.steps as f64);
        let k = (x.floor() as usize).min(self.steps.saturating_sub(1));
        let frac = x - k as f64;
        u[k] + frac * (u[k + 1] - u[k])
    }
}

fn cumulative_trapezoid(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Evaluates `F_c[u]` on the grid; `inputs[i - 1]` drives letter `x_i`.
pub fn eval_fliess<S: Scalar>(c: &Series<S>, inputs: &[&[f64]], grid: &Grid) -> Result<Vec<f64>> {
    if inputs.len() + 1 != c.alphabet_size() {
        return Err(Error::Domain(format!(
            "series over {} letters needs {} input signals, got {}",
            c.alphabet_size(),
            c.alphabet_size() - 1,
            inputs.len()
        )));
    }
    for (i, u) in inputs.iter().enumerate() {
        grid.check_signal(u, &format!("input u{}", i + 1))?;
    }
    let h = grid.step();
    let mut table: BTreeMap<Word, Vec<f64>> = BTreeMap::new();
    table.insert(Word::empty(), vec![1.0; grid.len()]);
    let mut y = vec![0.0; grid.len()];
    for (w, coeff) in c.terms() {
        let letters = w.letters();
        for k in (0..letters.len()).rev() {
            let suffix = Word::from_letters(&letters[k..]);
            if table.contains_key(&suffix) {
                continue;
            }
            let inner = &table[&Word::from_letters(&letters[k + 1..])];
            let integrand: Vec<f64> = match letters[k] {
                0 => inner.clone(),
                l => inner.iter().zip(inputs[l as usize - 1]).map(|(e, u)| e * u).collect(),
            };
            table.insert(suffix, cumulative_trapezoid(&integrand, h));
        }
        let e = &table[w];
        let c = coeff.to_f64();
        for (yk, ek) in y.iter_mut().zip(e) {
            *yk += c * ek;
        }
    }
    Ok(y)
}

pub fn eval_fliess_siso<S: Scalar>(c: &Series<S>, u: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    eval_fliess(c, &[u], grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Method {
    pub integrator: String,
    pub step_policy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Sup-norm change of the node inputs per Picard sweep.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub picard_changes: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Grid times reached before escape.
    pub times: Vec<f64>,
    /// `outputs[i][k]` is `y_i(times[k])`.
    pub outputs: Vec<Vec<f64>>,
    pub escape_time: Option<f64>,
    pub node_escape: Vec<Option<f64>>,
    pub method: Method,
}

impl Trajectory {
    pub fn node_count(&self) -> usize {
        self.outputs.len()
    }

    /// `t,y_1,…,y_m` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.node_count() {
            out.push_str(&format!(",y_{i}"));
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&format!("{t:e}"));
            for y in &self.outputs {
                out.push_str(&format!(",{:e}", y[k]));
            }
            out.push('\n');
        }
        out
    }

    pub fn sidecar(&self) -> serde_json::Value {
        json!({
            "escape_time": self.escape_time,
            "node_escape_times": self.node_escape,
            "threshold": self.method.threshold,
            "integrator": self.method.integrator,
            "method": self.method,
        })
    }
}

fn inputs_or_zero(v: &[Vec<f64>], m: usize, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    if v.is_empty() {
        return Ok(vec![vec![0.0; grid.len()]; m]);
    }
    if v.len() != m {
        return Err(Error::Domain(format!("need {m} input signals, got {}", v.len())));
    }
    for (i, s) in v.iter().enumerate() {
        grid.check_signal(s, &format!("input v{}", i + 1))?;
    }
    Ok(v.to_vec())
}

/// Integrates the state-space realization of a maximal network,
///
/// ```text
/// ż_i = (M_i/K_i) z_i² (1 + sum_j W_ij z_j + v_i),  z_i(t0) = K_i,  y_i = z_i.
/// ```
///
/// An empty `v` means zero input.
pub fn simulate_maximal_ode(net: &NetworkSpec, v: &[Vec<f64>], grid: &Grid, opts: &OdeOptions) -> Result<Trajectory> {
    let m = net.node_count();
    let mut gain = Vec::with_capacity(m);
    let mut z0 = Vec::with_capacity(m);
    for (i, node) in net.nodes().iter().enumerate() {
        match node {
            NodeSource::Maximal(spec) => {
                gain.push(Scalar::to_f64(&(&spec.m / &spec.k)));
                z0.push(Scalar::to_f64(&spec.k));
            }
            NodeSource::Poly(_) => {
                return Err(Error::Model(format!(
                    "node {} is polynomial; the ODE realization needs maximal nodes",
                    i + 1
                )))
            }
        }
    }
    let w: Vec<Vec<f64>> = net
        .weights()
        .iter()
        .map(|row| row.iter().map(Scalar::to_f64).collect())
        .collect();
    let v = inputs_or_zero(v, m, grid)?;
    let rhs = |t: f64, z: &[f64], dz: &mut [f64]| {
        for i in 0..m {
            let coupling: f64 = w[i].iter().zip(z).map(|(a, b)| a * b).sum();
            dz[i] = gain[i] * z[i] * z[i] * (1.0 + coupling + grid.interpolate(&v[i], t));
        }
    };
    let sol = integrate(rhs, &z0, &grid.times(), opts);
    let outputs = (0..m).map(|i| sol.states.iter().map(|s| s[i]).collect()).collect();
    Ok(Trajectory {
        times: sol.times,
        outputs,
        escape_time: sol.escape_time,
        node_escape: sol.component_escape,
        method: Method {
            integrator: "dormand-prince-5(4)".into(),
            step_policy: "adaptive, clipped to grid".into(),
            rtol: Some(opts.rtol),
            atol: Some(opts.atol),
            threshold: Some(opts.threshold),
            picard_changes: Vec::new(),
        },
    })
}

/// Solves `u_j = v_j + sum_k W_jk F_{c_k}[u_k]` on the grid by functional
/// iteration from `u = v`, then returns `y_j = F_{c_j}[u_j]`.
pub fn simulate_picard(
    net: &NetworkSpec,
    v: &[Vec<f64>],
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<Trajectory> {
    let m = net.node_count();
    let mut series = Vec::with_capacity(m);
    for (i, node) in net.nodes().iter().enumerate() {
        match node {
            NodeSource::Poly(p) => series.push(p.to_f64()),
            NodeSource::Maximal(_) => {
                return Err(Error::Model(format!(
                    "node {} is maximal; simulate it through the ODE realization",
                    i + 1
                )))
            }
        }
    }
    let w: Vec<Vec<f64>> = net
        .weights()
        .iter()
        .map(|row| row.iter().map(Scalar::to_f64).collect())
        .collect();
    let v = inputs_or_zero(v, m, grid)?;
    let mut u = v.clone();
    let mut changes = Vec::new();
    let mut y: Vec<Vec<f64>>;
    loop {
        y = series
            .iter()
            .zip(&u)
            .map(|(c, uk)| eval_fliess_siso(c, uk, grid))
            .collect::<Result<Vec<_>>>()?;
        let mut change = 0.0f64;
        let mut next = v.clone();
        for j in 0..m {
            for k in 0..m {
                if w[j][k] != 0.0 {
                    for (n, yk) in next[j].iter_mut().zip(&y[k]) {
                        *n += w[j][k] * yk;
                    }
                }
            }
            for (a, b) in next[j].iter().zip(&u[j]) {
                change = change.max((a - b).abs());
            }
        }
        u = next;
        changes.push(change);
        if !change.is_finite() || changes.len() >= max_iter && change >= tol {
            return Err(Error::NoConvergence {
                iterations: changes.len(),
                last_change: change,
            });
        }
        if change < tol {
            break;
        }
    }
    if changes.last() != Some(&0.0) {
        y = series
            .iter()
            .zip(&u)
            .map(|(c, uk)| eval_fliess_siso(c, uk, grid))
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(Trajectory {
        times: grid.times(),
        outputs: y,
        escape_time: None,
        node_escape: vec![None; m],
        method: Method {
            integrator: "picard".into(),
            step_policy: "fixed grid, cumulative trapezoid".into(),
            rtol: None,
            atol: Some(tol),
            threshold: None,
            picard_changes: changes,
        },
    })
}

pub const PICARD_TOL: f64 = 1e-13;
pub const PICARD_MAX_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub source: usize,
    pub sink: usize,
    pub degree: usize,
    pub horizon: f64,
    /// `max_t |F_{d_ji}[v] - y_j|`.
    pub max_error: f64,
    /// The truncation remainder starts at degree `N + 1`, so the error
    /// should scale like `T^{N+1}`.
    pub expected_order: usize,
}

/// Compares the degree-`degree` truncation of `d_ji` driven by `v` against
/// a Picard simulation with `v` injected at node `source` alone.
pub fn validate_io_map(
    net: &NetworkSpec,
    source: usize,
    sink: usize,
    degree: usize,
    v: &[f64],
    grid: &Grid,
) -> Result<ValidationReport> {
    net.check_node(source)?;
    net.check_node(sink)?;
    let d = io_map(net, source, sink, degree)?;
    let predicted = eval_fliess_siso(&d, v, grid)?;
    let mut inputs = vec![vec![0.0; grid.len()]; net.node_count()];
    inputs[source] = v.to_vec();
    let sim = simulate_picard(net, &inputs, grid, PICARD_TOL, PICARD_MAX_ITER)?;
    let max_error = predicted
        .iter()
        .zip(&sim.outputs[sink])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ValidationReport {
        source,
        sink,
        degree,
        horizon: grid.horizon,
        max_error,
        expected_order: degree + 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderReport {
    pub coarse: ValidationReport,
    pub fine: ValidationReport,
    /// `log2(error(T) / error(T/2))`.
    pub observed_order: f64,
    pub expected_order: usize,
}

/// Runs [`validate_io_map`] on `[t0, t0 + T]` and `[t0, t0 + T/2]` with the
/// same number of steps and estimates the order of the truncation error.
#[allow(clippy::too_many_arguments)]
pub fn io_map_error_order(
    net: &NetworkSpec,
    source: usize,
    sink: usize,
    degree: usize,
    v: impl Fn(f64) -> f64,
    t0: f64,
    horizon: f64,
    steps: usize,
) -> Result<OrderReport> {
    let coarse_grid = Grid::new(t0, horizon, steps)?;
    let fine_grid = Grid::new(t0, horizon / 2.0, steps)?;
    let coarse = validate_io_map(net, source, sink, degree, &coarse_grid.sample(&v), &coarse_grid)?;
    let fine = validate_io_map(net, source, sink, degree, &fine_grid.sample(&v), &fine_grid)?;
    Ok(OrderReport {
        observed_order: (coarse.max_error / fine.max_error).log2(),
        expected_order: degree + 1,
        coarse,
        fine,
    })
}
