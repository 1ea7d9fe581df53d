//! Relative degree of SISO series and of network input-output maps.
//!
//! A series `c` over `{x0, x1}` has relative degree `r` when
//! `c = c_N + K x0^{r-1} x1 + x0^{r-1} e` with `K ≠ 0`, `c_N` supported on
//! `x0*`, and `e` proper with `x1 ∉ supp(e)`. Equivalently: every word of the
//! support that contains an input letter starts with at least `r - 1` drift
//! letters, and the coefficient of `x0^{r-1} x1` is nonzero.

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compose::compose;
use crate::error::{Error, Result};
use crate::network::{ExpandedNetwork, NetworkSpec, NodeSource, Subgraph, DEFAULT_SUBGRAPH_BUDGET};
use crate::scalar::{rational_from_f64, Rational, Scalar};
use crate::series::Series;
use crate::stats::Histogram;
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelDegStatus {
    Defined,
    /// The decomposition fails on the visible coefficients.
    Undefined,
    /// No word containing an input letter is visible up to the truncation
    /// degree, so a relative degree above it cannot be ruled out.
    UndeterminedAtTruncation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelDegReport<S = Rational> {
    pub status: RelDegStatus,
    pub degree: Option<usize>,
    /// `<c, x0^{r-1} x1>` when defined.
    pub leading: Option<S>,
    pub truncation: usize,
}

impl<S> RelDegReport<S> {
    fn undefined(truncation: usize) -> Self {
        RelDegReport {
            status: RelDegStatus::Undefined,
            degree: None,
            leading: None,
            truncation,
        }
    }

    fn undetermined(truncation: usize) -> Self {
        RelDegReport {
            status: RelDegStatus::UndeterminedAtTruncation,
            degree: None,
            leading: None,
            truncation,
        }
    }

    pub fn defined(degree: usize, leading: S, truncation: usize) -> Self {
        RelDegReport {
            status: RelDegStatus::Defined,
            degree: Some(degree),
            leading: Some(leading),
            truncation,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.status == RelDegStatus::Defined
    }
}

/// Measures the relative degree from the coefficients certified exact.
///
/// The identically zero series is reported undefined (the zero map has no
/// relative degree); a nonzero series supported on `x0*` is undetermined.
pub fn relative_degree<S: Scalar>(c: &Series<S>) -> Result<RelDegReport<S>> {
    Ok(measure(c)?.0)
}

/// The report plus whether any float coefficient sat within tolerance of
/// zero without being exactly zero, in which case the verdict deserves an
/// exact recomputation.
fn measure<S: Scalar>(c: &Series<S>) -> Result<(RelDegReport<S>, bool)> {
    if c.alphabet_size() != 2 {
        return Err(Error::AlphabetMismatch {
            left: c.alphabet_size(),
            right: 2,
        });
    }
    let Some(top) = c.exact_to() else {
        return Ok((RelDegReport::undetermined(0), false));
    };
    let scale = c.max_abs();
    let mut ambiguous = false;
    let mut any_visible = false;
    let mut min_drift: Option<usize> = None;
    for (w, coeff) in c.terms().filter(|(w, _)| w.len() <= top) {
        if coeff.is_negligible(scale) {
            ambiguous |= !coeff.is_zero();
            continue;
        }
        any_visible = true;
        if !w.is_drift_only() {
            let lead = w.leading_drift();
            min_drift = Some(min_drift.map_or(lead, |m| m.min(lead)));
        }
    }
    let Some(rho) = min_drift else {
        // Invisible-but-inexact coefficients could still hide input words.
        let report = if any_visible || top < c.max_degree() {
            RelDegReport::undetermined(top)
        } else {
            RelDegReport::undefined(top)
        };
        return Ok((report, ambiguous));
    };
    let leading = c.coeff(&Word::drift_then_input(rho));
    if leading.is_negligible(scale) {
        return Ok((RelDegReport::undefined(top), ambiguous));
    }
    Ok((RelDegReport::defined(rho + 1, leading, top), ambiguous))
}

/// Relative degree of a sum from the summands' degrees and leading
/// coefficients alone.
///
/// The minimum degree decides: a lone minimum wins outright, a repeated one
/// survives iff its leading coefficients do not cancel. Terms of higher
/// degree only touch words with more leading drift letters.
pub fn sum_reldeg_predict<S: Scalar>(reports: &[RelDegReport<S>]) -> Result<RelDegReport<S>> {
    if reports.is_empty() {
        return Err(Error::Condition("sum of no series".into()));
    }
    let truncation = reports.iter().map(|r| r.truncation).min().unwrap_or(0);
    if let Some(bad) = reports.iter().find(|r| !r.is_defined()) {
        return Ok(RelDegReport {
            status: bad.status,
            degree: None,
            leading: None,
            truncation,
        });
    }
    let r = reports.iter().filter_map(|p| p.degree).min().expect("defined");
    let leading = reports
        .iter()
        .filter(|p| p.degree == Some(r))
        .filter_map(|p| p.leading.clone())
        .fold(S::zero(), |acc, k| acc + k);
    if leading.is_zero() {
        return Ok(RelDegReport::undefined(truncation));
    }
    Ok(RelDegReport::defined(r, leading, truncation))
}

/// Accumulated relative degrees `r⁺` over a forward-path subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccumulatedDegrees {
    pub source: usize,
    pub values: BTreeMap<usize, usize>,
    /// Per node, `(predecessor, r⁺ of predecessor)` sorted by value then index.
    pub incoming: BTreeMap<usize, Vec<(usize, usize)>>,
}

impl AccumulatedDegrees {
    pub fn value(&self, node: usize) -> Option<usize> {
        self.values.get(&node).copied()
    }

    pub fn incoming_values(&self, node: usize) -> Vec<usize> {
        self.incoming
            .get(&node)
            .map(|v| v.iter().map(|&(_, r)| r).collect())
            .unwrap_or_default()
    }
}

/// `r⁺_source = r_source`, `r⁺_k = r_k + min` over in-subgraph predecessors.
/// Node weights are at least one, so a Dijkstra pass gives the minimum over
/// simple paths.
pub fn accumulated_degrees(g: &Subgraph, node_degrees: &[Option<usize>]) -> Result<AccumulatedDegrees> {
    let mut out = AccumulatedDegrees {
        source: g.source,
        values: BTreeMap::new(),
        incoming: BTreeMap::new(),
    };
    if g.is_empty() {
        return Ok(out);
    }
    let degree_of = |k: usize| -> Result<usize> {
        match node_degrees.get(k).copied().flatten() {
            Some(r) if r >= 1 => Ok(r),
            _ => Err(Error::Condition(format!(
                "node {} has no defined relative degree",
                k + 1
            ))),
        }
    };
    for &k in &g.nodes {
        degree_of(k)?;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((degree_of(g.source)?, g.source)));
    while let Some(Reverse((value, node))) = heap.pop() {
        if out.values.contains_key(&node) {
            continue;
        }
        out.values.insert(node, value);
        for &(from, to) in &g.edges {
            if from == node && !out.values.contains_key(&to) {
                heap.push(Reverse((value + degree_of(to)?, to)));
            }
        }
    }
    for &k in &g.nodes {
        if k == g.source {
            continue;
        }
        let mut inc: Vec<(usize, usize)> = g
            .incoming(k)
            .into_iter()
            .filter_map(|p| out.values.get(&p).map(|&r| (p, r)))
            .collect();
        inc.sort_by_key(|&(p, r)| (r, p));
        out.incoming.insert(k, inc);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Direct edge from source to sink: `r_ji = r_j + r_i`.
    FullyConnected,
    /// Distinct accumulated degrees on every incoming edge set.
    Distinct,
    /// Repeated values whose weighted leading coefficients do not cancel.
    RepeatedSumNonzero,
    /// None of the sufficient conditions holds; `predicted` is only the
    /// potential relative degree.
    ViolatedUnknown,
    /// No forward path: the sink does not see the source's input.
    NoPath,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeCondition {
    pub node: usize,
    pub incoming: Vec<(usize, usize)>,
    /// Weighted leading-coefficient sums for each repeated incoming value,
    /// as `(value, sum)`.
    pub repeated_sums: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionReport {
    pub source: usize,
    pub sink: usize,
    pub predicted: Option<usize>,
    pub condition: Certificate,
    pub node_degrees: BTreeMap<usize, usize>,
    pub accumulated: Option<AccumulatedDegrees>,
    pub details: Vec<NodeCondition>,
}

impl PredictionReport {
    pub fn certified(&self) -> bool {
        matches!(
            self.condition,
            Certificate::FullyConnected | Certificate::Distinct | Certificate::RepeatedSumNonzero
        )
    }
}

/// Relative degree of each node's own series.
pub fn node_degrees(net: &NetworkSpec) -> Result<Vec<RelDegReport>> {
    net.nodes()
        .iter()
        .map(|n| {
            let degree = match n {
                NodeSource::Poly(p) => p.terms().map(|(w, _)| w.len()).max().unwrap_or(0).max(1),
                NodeSource::Maximal(_) => 1,
            };
            relative_degree(&n.expand::<Rational>(degree))
        })
        .collect()
}

/// Predicts the relative degree of `v_i ↦ y_j` from the graph and tries to
/// certify it. `condition_degree` bounds the series computed for the
/// repeated-value test.
pub fn predict_io_reldeg(
    net: &NetworkSpec,
    source: usize,
    sink: usize,
    condition_degree: usize,
) -> Result<PredictionReport> {
    let g = net.subgraph_with_budget(source, sink, DEFAULT_SUBGRAPH_BUDGET)?;
    let degrees = node_degrees(net)?;
    let mut report = PredictionReport {
        source,
        sink,
        predicted: None,
        condition: Certificate::NoPath,
        node_degrees: BTreeMap::new(),
        accumulated: None,
        details: Vec::new(),
    };
    if g.is_empty() {
        return Ok(report);
    }
    let mut plain = vec![None; net.node_count()];
    for &k in &g.nodes {
        let r = degrees[k].degree.ok_or_else(|| {
            Error::Condition(format!("node {} has no defined relative degree", k + 1))
        })?;
        plain[k] = Some(r);
        report.node_degrees.insert(k, r);
    }
    let acc = accumulated_degrees(&g, &plain)?;
    report.predicted = acc.value(sink);

    if source == sink {
        report.condition = Certificate::Distinct;
    } else if net.has_edge(source, sink) {
        report.condition = Certificate::FullyConnected;
        report.predicted = Some(plain[sink].unwrap() + plain[source].unwrap());
    } else {
        report.condition = repeated_value_check(net, &g, &acc, condition_degree, &mut report.details)?;
    }
    report.accumulated = Some(acc);
    Ok(report)
}

fn repeated_value_check(
    net: &NetworkSpec,
    g: &Subgraph,
    acc: &AccumulatedDegrees,
    condition_degree: usize,
    details: &mut Vec<NodeCondition>,
) -> Result<Certificate> {
    let mut groups: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (&node, incoming) in &acc.incoming {
        let mut by_value: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(pred, r) in incoming {
            by_value.entry(r).or_default().push(pred);
        }
        for (r, preds) in by_value {
            if preds.len() > 1 {
                groups.push((node, r, preds));
            }
        }
        details.push(NodeCondition {
            node,
            incoming: incoming.clone(),
            repeated_sums: Vec::new(),
        });
    }
    if groups.is_empty() {
        return Ok(Certificate::Distinct);
    }
    let need = groups.iter().map(|&(_, r, _)| r).max().unwrap_or(0);
    if condition_degree < need {
        return Err(Error::Truncation {
            have: condition_degree,
            need,
        });
    }
    let restricted = net
        .expand::<Rational>(condition_degree)
        .restricted(|from, to| g.contains_edge(from, to));
    let d = restricted.closed_loop(g.source)?;
    let mut all_nonzero = true;
    for (node, r, preds) in groups {
        let word = Word::drift_then_input(r - 1);
        let sum = preds
            .iter()
            .map(|&p| restricted.weight(node, p) * d[p].coeff(&word))
            .fold(Rational::zero(), |a, b| a + b);
        all_nonzero &= !sum.is_zero();
        if let Some(entry) = details.iter_mut().find(|e| e.node == node) {
            entry.repeated_sums.push((r, sum.to_string()));
        }
    }
    Ok(if all_nonzero {
        Certificate::RepeatedSumNonzero
    } else {
        Certificate::ViolatedUnknown
    })
}

#[derive(Clone, Debug)]
pub struct PairReport {
    pub source: usize,
    pub sink: usize,
    pub measured: RelDegReport,
    pub prediction: Option<PredictionReport>,
}

impl PairReport {
    /// False only when a certified prediction disagrees with the measurement.
    pub fn consistent(&self) -> bool {
        match &self.prediction {
            Some(p) if p.certified() => self.measured.degree == p.predicted,
            _ => true,
        }
    }
}

/// Measured relative degree of every `d_ji`, indexed `[source][sink]`, with
/// the graph prediction alongside wherever the node degrees allow one.
pub fn complete_reldeg(net: &NetworkSpec, degree: usize) -> Result<Vec<Vec<PairReport>>> {
    let m = net.node_count();
    let expanded = net.expand::<Rational>(degree);
    let mut out = Vec::with_capacity(m);
    for source in 0..m {
        let d = expanded.closed_loop(source)?;
        let mut row = Vec::with_capacity(m);
        for (sink, series) in d.iter().enumerate() {
            row.push(PairReport {
                source,
                sink,
                measured: relative_degree(series)?,
                prediction: predict_io_reldeg(net, source, sink, degree).ok(),
            });
        }
        out.push(row);
    }
    Ok(out)
}

/// Counts of measured relative-degree verdicts for one node pair.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PairCounts {
    pub source: usize,
    pub sink: usize,
    pub has_path: bool,
    pub defined: BTreeMap<usize, usize>,
    pub undefined: usize,
    pub undetermined: usize,
}

/// Pair whose coefficient distribution is recorded across samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Designated {
    pub source: usize,
    pub sink: usize,
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericityStats {
    pub seed: u64,
    pub samples: usize,
    pub degree: usize,
    pub pairs: Vec<PairCounts>,
    /// Samples re-run in exact arithmetic after an ambiguous float verdict.
    pub exact_rechecks: usize,
    /// `|<d_ji, w>|` per sample for the designated pair and word.
    pub designated: Vec<f64>,
}

impl GenericityStats {
    pub fn pair(&self, source: usize, sink: usize) -> Option<&PairCounts> {
        self.pairs.iter().find(|p| p.source == source && p.sink == sink)
    }

    /// Pairs joined by a forward path that ever failed to have a relative degree.
    pub fn undefined_connected_pairs(&self) -> usize {
        self.pairs
            .iter()
            .filter(|p| p.has_path && (p.undefined > 0 || p.undetermined > 0))
            .count()
    }

    pub fn histogram(&self, bins: usize) -> Histogram {
        let hi = self.designated.iter().copied().fold(0.0, f64::max);
        Histogram::new(&self.designated, bins, 0.0, if hi > 0.0 { hi } else { 1.0 })
    }
}

/// Uniform `(0, 1]` weight draws for every 1 in `pattern`, row-major.
/// Each sample owns the ChaCha stream numbered by its index.
pub fn sample_weights(pattern: &[Vec<bool>], seed: u64, sample: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    pattern
        .iter()
        .map(|row| {
            row.iter()
                .map(|&on| if on { 1.0 - rng.gen::<f64>() } else { 0.0 })
                .collect()
        })
        .collect()
}

struct SampleOutcome {
    verdicts: Vec<RelDegReport<f64>>,
    rechecked: bool,
    designated: Option<f64>,
}

/// Replaces every 1 in a 0/1 pattern by an independent uniform `(0, 1]` draw
/// and measures the relative degree of every node pair, sample by sample.
/// Computation runs in floating point; any sample with a verdict other than
/// "defined" on a connected pair, or with a coefficient inside the zero
/// tolerance, is recomputed exactly from the same draws.
pub fn genericity_sample(
    pattern: &[Vec<bool>],
    nodes: &[NodeSource],
    samples: usize,
    seed: u64,
    degree: usize,
    designated: Option<&Designated>,
) -> Result<GenericityStats> {
    let m = nodes.len();
    if pattern.len() != m || pattern.iter().any(|r| r.len() != m) {
        return Err(Error::Domain(format!("pattern must be {m}x{m}")));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let unit: Vec<Vec<Rational>> = pattern
        .iter()
        .map(|r| r.iter().map(|&b| Rational::from_integer((b as i32).into())).collect())
        .collect();
    let structure = NetworkSpec::new(unit, nodes.to_vec())?;
    let mut has_path = vec![vec![false; m]; m];
    for (i, row) in has_path.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = !structure.subgraph(i, j)?.is_empty();
        }
    }
    let float_nodes: Vec<Series<f64>> = nodes.iter().map(|n| n.expand(degree)).collect();
    let exact_nodes: Vec<Series> = nodes.iter().map(|n| n.expand(degree)).collect();

    let run = |s: usize| -> Result<SampleOutcome> {
        let weights = sample_weights(pattern, seed, s);
        let (verdicts, ambiguous, coeff) = measure_all(&weights, &float_nodes, degree, designated)?;
        let suspicious = verdicts
            .iter()
            .enumerate()
            .any(|(idx, v)| has_path[idx / m][idx % m] && !v.is_defined());
        if !(ambiguous || suspicious) {
            return Ok(SampleOutcome { verdicts, rechecked: false, designated: coeff });
        }
        let exact_weights: Vec<Vec<Rational>> = weights
            .iter()
            .map(|r| r.iter().map(|&w| rational_from_f64(w).expect("finite draw")).collect())
            .collect();
        let (exact, _, coeff) = measure_all(&exact_weights, &exact_nodes, degree, designated)?;
        let verdicts = exact
            .into_iter()
            .map(|r| RelDegReport {
                status: r.status,
                degree: r.degree,
                leading: r.leading.map(|l| l.to_f64()),
                truncation: r.truncation,
            })
            .collect();
        Ok(SampleOutcome { verdicts, rechecked: true, designated: coeff })
    };

    #[cfg(feature = "parallel")]
    let outcomes: Vec<SampleOutcome> = {
        use rayon::prelude::*;
        (0..samples).into_par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<SampleOutcome> = (0..samples).map(run).collect::<Result<_>>()?;

    let mut pairs: Vec<PairCounts> = (0..m * m)
        .map(|idx| PairCounts {
            source: idx / m,
            sink: idx % m,
            has_path: has_path[idx / m][idx % m],
            ..PairCounts::default()
        })
        .collect();
    let mut stats = GenericityStats {
        seed,
        samples,
        degree,
        pairs: Vec::new(),
        exact_rechecks: 0,
        designated: Vec::new(),
    };
    for outcome in outcomes {
        stats.exact_rechecks += outcome.rechecked as usize;
        if let Some(v) = outcome.designated {
            stats.designated.push(v);
        }
        for (counts, verdict) in pairs.iter_mut().zip(&outcome.verdicts) {
            match verdict.status {
                RelDegStatus::Defined => {
                    *counts.defined.entry(verdict.degree.unwrap()).or_insert(0) += 1
                }
                RelDegStatus::Undefined => counts.undefined += 1,
                RelDegStatus::UndeterminedAtTruncation => counts.undetermined += 1,
            }
        }
    }
    stats.pairs = pairs;
    Ok(stats)
}

type Measured<S> = (Vec<RelDegReport<S>>, bool, Option<f64>);

/// Verdicts for all pairs in `[source * m + sink]` order.
fn measure_all<S: Scalar>(
    weights: &[Vec<S>],
    nodes: &[Series<S>],
    degree: usize,
    designated: Option<&Designated>,
) -> Result<Measured<S>> {
    let net = ExpandedNetwork::from_parts(weights.to_vec(), nodes.to_vec(), degree)?;
    let m = net.node_count();
    let mut verdicts = Vec::with_capacity(m * m);
    let mut ambiguous = false;
    let mut coeff = None;
    for source in 0..m {
        let d = net.closed_loop(source)?;
        for (sink, series) in d.iter().enumerate() {
            let (report, amb) = measure(series)?;
            ambiguous |= amb;
            verdicts.push(report);
            if let Some(des) = designated {
                if des.source == source && des.sink == sink {
                    coeff = Some(series.coeff(&des.word).to_f64().abs());
                }
            }
        }
    }
    Ok((verdicts, ambiguous, coeff))
}

/// `relative_degree(c ∘ d)`, convenience for cascade checks.
pub fn cascade_degree<S: Scalar>(c: &Series<S>, d: &Series<S>) -> Result<RelDegReport<S>> {
    relative_degree(&compose(c, d)?)
}
