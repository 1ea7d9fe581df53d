//! Browser front end for a few `cfnet` analyses. Every export takes and
//! returns plain numbers, strings or flat `f64` arrays so the page needs no
//! glue beyond the generated bindings.

use cfnet::growth::{abel_taylor, closed_form_natural_response, m_inf_bound};
use cfnet::io::parse_coeff;
use cfnet::ode::OdeOptions;
use cfnet::reldeg::{genericity_sample, Designated};
use cfnet::sim::{simulate_maximal_ode, Grid};
use cfnet::{NetworkSpec, NodeSource, Rational, Scalar, Word};
use wasm_bindgen::prelude::*;

fn positive(text: &str, name: &str) -> Result<Rational, String> {
    match parse_coeff(text.trim()) {
        Ok(v) if v > Rational::from_integer(0.into()) => Ok(v),
        _ => Err(format!("{name} must be a positive number, got {text:?}")),
    }
}

/// Rows `[m, M_inf, Mhat_n, t_star]` for `m = 1..=m_max`, flattened.
#[wasm_bindgen]
pub fn growth_table(m_max: usize, k: &str, big_m: &str, n: usize) -> Result<Vec<f64>, String> {
    let (kq, mq) = (positive(k, "K")?, positive(big_m, "M")?);
    if m_max == 0 || n == 0 {
        return Err("m and n must be at least 1".into());
    }
    let mut rows = Vec::with_capacity(4 * m_max);
    for m in 1..=m_max {
        let bound = m_inf_bound(kq.to_f64(), mq.to_f64(), m).map_err(|e| e.to_string())?;
        let seq = abel_taylor(m, &kq, &mq, n).map_err(|e| e.to_string())?;
        rows.extend([m as f64, bound.m_inf, seq.mhat[n], bound.t_star]);
    }
    Ok(rows)
}

/// Natural response of the all-ones maximal network on `[0, fraction·t*]`:
/// rows `[t, closed form, integrated]`, flattened.
#[wasm_bindgen]
pub fn natural_response(m: usize, k: &str, big_m: &str, fraction: f64, steps: usize) -> Result<Vec<f64>, String> {
    let (kq, mq) = (positive(k, "K")?, positive(big_m, "M")?);
    if !(fraction > 0.0 && fraction < 1.0) || steps == 0 {
        return Err("fraction must lie in (0, 1) and steps must be positive".into());
    }
    let bound = m_inf_bound(kq.to_f64(), mq.to_f64(), m).map_err(|e| e.to_string())?;
    let grid = Grid::new(0.0, fraction * bound.t_star, steps).map_err(|e| e.to_string())?;
    let net = NetworkSpec::maximal(m, kq.clone(), mq.clone()).map_err(|e| e.to_string())?;
    let tr = simulate_maximal_ode(&net, &[], &grid, &OdeOptions::default()).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(3 * tr.times.len());
    for (idx, &t) in tr.times.iter().enumerate() {
        let exact = closed_form_natural_response(m, kq.to_f64(), mq.to_f64(), t).map_err(|e| e.to_string())?;
        rows.extend([t, exact, tr.outputs[0][idx]]);
    }
    Ok(rows)
}

/// Four-node diamond with weights drawn uniformly from (0, 1]. Returns
/// `[samples with relative degree 3, bins + 1 edges…, bins counts…]` for the
/// magnitude of the `x0² x1` coefficient of the 1 → 4 map.
#[wasm_bindgen]
pub fn four_node_histogram(samples: usize, seed: u32, bins: usize) -> Result<Vec<f64>, String> {
    if samples == 0 || bins == 0 {
        return Err("samples and bins must be positive".into());
    }
    let mut pattern = vec![vec![false; 4]; 4];
    for (to, from) in [(1, 0), (2, 0), (3, 1), (3, 2)] {
        pattern[to][from] = true;
    }
    let nodes = [1, 1, -1, 1]
        .into_iter()
        .map(|sign: i64| NodeSource::poly([(Word::from([1]), Rational::from_integer(sign.into()))]))
        .collect::<cfnet::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let designated = Designated { source: 0, sink: 3, word: Word::from([0, 0, 1]) };
    let stats = genericity_sample(&pattern, &nodes, samples, seed as u64, 3, Some(&designated)).map_err(|e| e.to_string())?;
    let pair = stats.pair(0, 3).expect("pair 1 -> 4 is sampled");
    let degree_three = pair.defined.get(&3).copied().unwrap_or(0);
    let h = stats.histogram(bins);
    let mut out = vec![degree_three as f64];
    out.extend(&h.edges);
    out.extend(h.counts.iter().map(|&c| c as f64));
    Ok(out)
}
