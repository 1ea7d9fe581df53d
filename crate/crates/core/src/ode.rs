//! Adaptive Dormand–Prince 5(4) integration with finite-escape detection.
//!
//! Steps are clipped to land on every requested output time, so no dense
//! output is needed. A solution escapes when a component exceeds the blowup
//! threshold or the step size collapses; the crossing time is refined by
//! bisection over single steps from the last accepted state.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Relative growth time scale below which a component counts as escaping
/// when the step size collapses.
const COLLAPSE_SCALE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// `|y_i|` above this counts as escape.
    pub threshold: f64,
    /// Steps below `h_min_rel * max(1, |t|)` count as escape.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            threshold: 1e9,
            h_min_rel: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    /// Output times reached before escape.
    pub times: Vec<f64>,
    /// `states[k]` is the state at `times[k]`.
    pub states: Vec<Vec<f64>>,
    pub escape_time: Option<f64>,
    /// Per-component threshold crossing times.
    pub component_escape: Vec<Option<f64>>,
    /// Last accepted time and state, past the output grid after an escape.
    pub last_time: f64,
    pub last_state: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

struct Stepper<'a, F> {
    f: &'a F,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<'a, F: Fn(f64, &[f64], &mut [f64])> Stepper<'a, F> {
    fn new(f: &'a F, n: usize) -> Self {
        Stepper {
            f,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    /// One step from `(t, y)` with `k[0] = f(t, y)` already set. Writes the
    /// fifth-order solution to `out` and returns the embedded error vector's
    /// scaled RMS norm.
    fn step(&mut self, t: f64, y: &[f64], h: f64, out: &mut [f64], opts: &OdeOptions) -> f64 {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += a * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            (self.f)(t + C[s] * h, &self.tmp, &mut self.k[s]);
        }
        // Row 6 of A is the fifth-order solution, so tmp already holds it.
        out.copy_from_slice(&self.tmp);
        let mut sum = 0.0;
        for i in 0..n {
            let mut err = 0.0;
            for (j, e) in E.iter().enumerate() {
                err += e * self.k[j][i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(out[i].abs());
            let r = h * err / scale;
            sum += r * r;
        }
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }
}

/// Integrates `y' = f(t, y)` from `times[0]`, reporting the state at every
/// entry of `times` (which must be increasing) until escape.
pub fn integrate<F>(f: F, y0: &[f64], times: &[f64], opts: &OdeOptions) -> OdeSolution
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut sol = OdeSolution {
        times: Vec::new(),
        states: Vec::new(),
        escape_time: None,
        component_escape: vec![None; n],
        last_time: times.first().copied().unwrap_or(0.0),
        last_state: y0.to_vec(),
        accepted: 0,
        rejected: 0,
    };
    let Some(&t_start) = times.first() else {
        return sol;
    };
    let t_end = *times.last().unwrap();
    let mut stepper = Stepper::new(&f, n);
    let mut t = t_start;
    let mut y = y0.to_vec();
    let mut next = vec![0.0; n];
    sol.times.push(t);
    sol.states.push(y.clone());
    for (i, &v) in y.iter().enumerate() {
        if !(v.abs() <= opts.threshold) {
            sol.component_escape[i] = Some(t);
            sol.escape_time = Some(t);
        }
    }
    if sol.escape_time.is_some() {
        return sol;
    }
    f(t, &y, &mut stepper.k[0]);
    let mut h = initial_step(&y, &stepper.k[0], t_end - t_start, opts);
    let mut target = 1;
    let mut escaped = false;
    while sol.accepted + sol.rejected < opts.max_steps {
        if !escaped && target >= times.len() {
            break;
        }
        let h_min = opts.h_min_rel * t.abs().max(1.0);
        if h < h_min {
            // The step collapsed before any component reached the threshold
            // (typical for cubic growth, whose last resolvable values are far
            // below it). Components whose growth time scale |y|/|y'| has shrunk
            // to the collapse scale are the ones escaping.
            sol.escape_time.get_or_insert(t);
            for i in 0..n {
                let tau = y[i].abs() / stepper.k[0][i].abs();
                if sol.component_escape[i].is_none() && tau < COLLAPSE_SCALE * t.abs().max(1.0) {
                    sol.component_escape[i] = Some(t);
                }
            }
            break;
        }
        let mut h_try = h;
        let mut lands = false;
        if !escaped && t + h_try >= times[target] {
            h_try = times[target] - t;
            lands = true;
        }
        let err = stepper.step(t, &y, h_try, &mut next, opts);
        let finite = next.iter().all(|v| v.is_finite());
        if !(err <= 1.0) || !finite {
            sol.rejected += 1;
            let fac = if finite && err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h = h_try * fac;
            continue;
        }
        sol.accepted += 1;
        // Threshold crossings inside this step.
        let mut crossed_any = false;
        for i in 0..n {
            if sol.component_escape[i].is_none() && next[i].abs() > opts.threshold {
                let tc = bisect_crossing(&mut stepper, t, &y, h_try, i, opts);
                sol.component_escape[i] = Some(tc);
                crossed_any = true;
            }
        }
        if crossed_any && !escaped {
            escaped = true;
            sol.escape_time = sol.component_escape.iter().flatten().copied().reduce(f64::min);
        }
        t += h_try;
        if lands {
            t = times[target];
        }
        std::mem::swap(&mut y, &mut next);
        // FSAL: the last stage is f at the new point.
        stepper.k.swap(0, 6);
        if !escaped {
            if lands {
                sol.times.push(t);
                sol.states.push(y.clone());
                target += 1;
            }
        } else if sol.component_escape.iter().all(Option::is_some) {
            break;
        }
        sol.last_time = t;
        sol.last_state.copy_from_slice(&y);
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = if lands && !escaped { h.max(h_try * fac) } else { h_try * fac };
    }
    sol
}

fn initial_step(y: &[f64], dy: &[f64], span: f64, opts: &OdeOptions) -> f64 {
    let d0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let d1 = dy.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let h = if d1 > 0.0 && d0 > 0.0 {
        0.01 * d0 / d1
    } else {
        1e-6 * span.abs().max(1e-6)
    };
    h.min(span.abs()).max(opts.h_min_rel * 10.0).max(f64::MIN_POSITIVE)
}

/// Earliest `s ∈ (0, h]` with `|y_i(t + s)| > threshold`, by bisection over
/// single steps from the accepted state `(t, y)`.
fn bisect_crossing<F: Fn(f64, &[f64], &mut [f64])>(
    stepper: &mut Stepper<'_, F>,
    t: f64,
    y: &[f64],
    h: f64,
    i: usize,
    opts: &OdeOptions,
) -> f64 {
    let k0 = stepper.k[0].clone();
    let mut out = vec![0.0; y.len()];
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        stepper.k[0].copy_from_slice(&k0);
        stepper.step(t, y, mid, &mut out, opts);
        if out[i].is_finite() && out[i].abs() <= opts.threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Restore the stage buffers the caller still needs (k[6] for FSAL).
    stepper.k[0].copy_from_slice(&k0);
    stepper.step(t, y, h, &mut out, opts);
    t + hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
    }

    #[test]
    fn exponential_decay() {
        let sol = integrate(|_, y, dy| dy[0] = -y[0], &[1.0], &grid(2.0, 20), &OdeOptions::default());
        assert_eq!(sol.times.len(), 21);
        assert!(sol.escape_time.is_none());
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[0.0, 1.0],
            &grid(10.0, 10),
            &OdeOptions::default(),
        );
        let last = sol.states.last().unwrap();
        assert!((last[0] - 10f64.sin()).abs() < 1e-7);
        assert!((last[1] - 10f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn quadratic_blowup_time() {
        // y' = y^2, y(0) = 1 escapes at t = 1.
        let sol = integrate(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], &grid(2.0, 200), &OdeOptions::default());
        let te = sol.escape_time.expect("escape");
        assert!((te - 1.0).abs() < 1e-6, "{te}");
        assert_eq!(sol.component_escape, vec![Some(te)]);
        assert!(sol.times.iter().all(|&t| t < te));
        assert!(sol.states.iter().all(|y| y[0].is_finite()));
        // Exact y = 1 / (1 - t) on the output grid.
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] * (1.0 - t) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn per_component_crossings() {
        // Two decoupled blowups at 1/2 and 1.
        let sol = integrate(
            |_, y, dy| {
                dy[0] = 2.0 * y[0] * y[0];
                dy[1] = y[1] * y[1];
            },
            &[1.0, 1.0],
            &grid(2.0, 100),
            &OdeOptions::default(),
        );
        let te = sol.escape_time.unwrap();
        assert!((te - 0.5).abs() < 1e-6);
        assert!((sol.component_escape[0].unwrap() - 0.5).abs() < 1e-6);
        // After the first escape the integration continues until the step
        // size collapses or the other component crosses.
        if let Some(t1) = sol.component_escape[1] {
            assert!(t1 >= te);
        }
    }

    #[test]
    fn cubic_blowup_collapses_the_step() {
        // y' = y^3, y(0) = 1 escapes at t = 1/2 with y ~ (1 - 2t)^{-1/2}, far
        // below the threshold at the last representable step.
        let sol = integrate(|_, y, dy| dy[0] = y[0].powi(3), &[1.0, ], &grid(1.0, 10), &OdeOptions::default());
        let te = sol.escape_time.unwrap();
        assert!((te - 0.5).abs() < 1e-9, "{te}");
        assert!(sol.last_state[0] < 1e9);
        assert_eq!(sol.component_escape, vec![Some(te)]);
    }

    #[test]
    fn bounded_component_is_not_flagged() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[0].powi(3);
                dy[1] = -y[1];
            },
            &[1.0, 1.0],
            &grid(1.0, 10),
            &OdeOptions::default(),
        );
        assert!(sol.component_escape[0].is_some());
        assert!(sol.component_escape[1].is_none());
    }

    #[test]
    fn empty_times() {
        let sol = integrate(|_, _, _| {}, &[1.0], &[], &OdeOptions::default());
        assert!(sol.times.is_empty());
    }
}
