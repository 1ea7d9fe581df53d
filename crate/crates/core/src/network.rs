//! Additive networks: node `i` receives `u_i = v_i + sum_j W_ij y_j`.
//!
//! The generating series `d_ki` of `v_i ↦ y_k` are the fixed point of
//!
//! ```text
//! d_ki = c_k ∘ (sum_l W_kl d_li)     k ≠ i
//! d_ii = c_i õ (sum_l W_il d_li)
//! ```
//!
//! Composition only reads feedback coefficients of lower degree, so starting
//! from zero each sweep freezes one more degree; `N + 1` sweeps give every
//! coefficient up to degree `N` exactly. Node indices are zero-based.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::compose::{compose, mixed_compose};
use crate::error::{Error, Result};
use crate::io::{terms_from_json, terms_to_json, TermJson};
use crate::scalar::{Rational, Scalar};
use crate::series::{MaximalSeriesSpec, Series};
use crate::word::Word;

pub const DEFAULT_SUBGRAPH_BUDGET: usize = 24;

/// Generating series of one node, over the canonical letters `{x0, x1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeSource {
    /// A polynomial. Its truncation degree is irrelevant: the terms are
    /// re-embedded at whatever degree the network is expanded to.
    Poly(Series),
    Maximal(MaximalSeriesSpec),
}

impl NodeSource {
    pub fn poly<I: IntoIterator<Item = (Word, Rational)>>(terms: I) -> Result<Self> {
        let terms: Vec<_> = terms.into_iter().collect();
        let degree = terms.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
        Ok(NodeSource::Poly(Series::from_terms(2, degree, terms)?))
    }

    pub fn maximal(k: Rational, m: Rational) -> Result<Self> {
        Ok(NodeSource::Maximal(MaximalSeriesSpec::new(k, m)?))
    }

    pub fn expand<S: Scalar>(&self, degree: usize) -> Series<S> {
        match self {
            NodeSource::Poly(p) => Series::from_terms(
                2,
                degree,
                p.terms().map(|(w, c)| (w.clone(), S::from_rational(c))),
            )
            .expect("validated node series"),
            NodeSource::Maximal(spec) => Series::maximal(spec, 1, degree),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkJson", into = "NetworkJson")]
pub struct NetworkSpec {
    /// `weights[j][k]` weights the edge `k → j`.
    weights: Vec<Vec<Rational>>,
    nodes: Vec<NodeSource>,
}

impl NetworkSpec {
    pub fn new(weights: Vec<Vec<Rational>>, nodes: Vec<NodeSource>) -> Result<Self> {
        let m = nodes.len();
        if m == 0 {
            return Err(Error::Domain("network needs at least one node".into()));
        }
        if weights.len() != m || weights.iter().any(|row| row.len() != m) {
            return Err(Error::Domain(format!("weight matrix must be {m}x{m}")));
        }
        for node in &nodes {
            if let NodeSource::Poly(p) = node {
                if p.alphabet_size() != 2 {
                    return Err(Error::AlphabetMismatch {
                        left: p.alphabet_size(),
                        right: 2,
                    });
                }
            }
        }
        Ok(NetworkSpec { weights, nodes })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn weights(&self) -> &[Vec<Rational>] {
        &self.weights
    }

    /// Weight of the edge `from → to`.
    pub fn weight(&self, to: usize, from: usize) -> &Rational {
        &self.weights[to][from]
    }

    pub fn nodes(&self) -> &[NodeSource] {
        &self.nodes
    }

    pub fn check_node(&self, index: usize) -> Result<()> {
        if index >= self.node_count() {
            return Err(Error::InvalidNode {
                index,
                nodes: self.node_count(),
            });
        }
        Ok(())
    }

    /// Weights outside `[0, 1]`. Accepted, but outside the normalized setting
    /// the growth bounds assume.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (j, row) in self.weights.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                if w.is_negative() || *w > Rational::one() {
                    out.push(format!("weight W[{}][{}] = {w} lies outside [0, 1]", j + 1, k + 1));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        from != to && !self.weights[to][from].is_zero()
    }

    pub fn expand<S: Scalar>(&self, degree: usize) -> ExpandedNetwork<S> {
        ExpandedNetwork {
            weights: self
                .weights
                .iter()
                .map(|row| row.iter().map(S::from_rational).collect())
                .collect(),
            nodes: self.nodes.iter().map(|n| n.expand(degree)).collect(),
            degree,
        }
    }

    pub fn with_weights(&self, weights: Vec<Vec<Rational>>) -> Result<Self> {
        NetworkSpec::new(weights, self.nodes.clone())
    }

    /// The all-ones network whose nodes are all `maximal(K, M)`.
    pub fn maximal(m: usize, k: Rational, big_m: Rational) -> Result<Self> {
        let node = NodeSource::maximal(k, big_m)?;
        NetworkSpec::new(vec![vec![Rational::one(); m]; m], vec![node; m])
    }

    pub fn subgraph(&self, source: usize, sink: usize) -> Result<Subgraph> {
        self.subgraph_with_budget(source, sink, DEFAULT_SUBGRAPH_BUDGET)
    }

    pub fn subgraph_with_budget(&self, source: usize, sink: usize, budget: usize) -> Result<Subgraph> {
        self.check_node(source)?;
        self.check_node(sink)?;
        Subgraph::extract(self.node_count(), |from, to| self.has_edge(from, to), source, sink, budget)
    }
}

/// A network with node series expanded to a fixed truncation degree.
#[derive(Clone, Debug)]
pub struct ExpandedNetwork<S = Rational> {
    weights: Vec<Vec<S>>,
    nodes: Vec<Series<S>>,
    degree: usize,
}

impl<S: Scalar> ExpandedNetwork<S> {
    pub fn from_parts(weights: Vec<Vec<S>>, nodes: Vec<Series<S>>, degree: usize) -> Result<Self> {
        let m = nodes.len();
        if weights.len() != m || weights.iter().any(|row| row.len() != m) {
            return Err(Error::Domain(format!("weight matrix must be {m}x{m}")));
        }
        if let Some(bad) = nodes.iter().find(|n| n.alphabet_size() != 2) {
            return Err(Error::AlphabetMismatch {
                left: bad.alphabet_size(),
                right: 2,
            });
        }
        let nodes = nodes.into_iter().map(|n| n.truncate(degree)).collect();
        Ok(ExpandedNetwork { weights, nodes, degree })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node(&self, k: usize) -> &Series<S> {
        &self.nodes[k]
    }

    pub fn weight(&self, to: usize, from: usize) -> &S {
        &self.weights[to][from]
    }

    /// Same nodes, weights zeroed wherever `keep(from, to)` is false.
    pub fn restricted(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(to, row)| {
                row.iter()
                    .enumerate()
                    .map(|(from, w)| if keep(from, to) { w.clone() } else { S::zero() })
                    .collect()
            })
            .collect();
        ExpandedNetwork {
            weights,
            nodes: self.nodes.clone(),
            degree: self.degree,
        }
    }

    /// All `d_ki` for the given source `i`, exact through the network degree.
    pub fn closed_loop(&self, source: usize) -> Result<Vec<Series<S>>> {
        self.closed_loop_sweeps(source, self.degree + 1)
    }

    /// The fixed-point iteration with an explicit number of sweeps.
    pub fn closed_loop_sweeps(&self, source: usize, sweeps: usize) -> Result<Vec<Series<S>>> {
        let m = self.node_count();
        if source >= m {
            return Err(Error::InvalidNode { index: source, nodes: m });
        }
        let mut d: Vec<Series<S>> = vec![Series::zero(2, self.degree).with_exact_to(None); m];
        for _ in 0..sweeps {
            let mut next = Vec::with_capacity(m);
            for k in 0..m {
                let feedback = self.aggregate(k, &d)?;
                let out = if k == source {
                    mixed_compose(&self.nodes[k], &feedback)?
                } else {
                    compose(&self.nodes[k], &feedback)?
                };
                next.push(out);
            }
            d = next;
        }
        Ok(d)
    }

    /// `sum_l W_kl d_l`.
    fn aggregate(&self, k: usize, d: &[Series<S>]) -> Result<Series<S>> {
        let pairs: Vec<(S, &Series<S>)> = self.weights[k]
            .iter()
            .zip(d)
            .filter(|(w, _)| !w.is_zero())
            .map(|(w, s)| (w.clone(), s))
            .collect();
        if pairs.is_empty() {
            return Ok(Series::zero(2, self.degree));
        }
        Series::linear_combine(&pairs)
    }
}

/// `d_ki` for every node `k`, with `source = i`.
pub fn closed_loop_series(net: &NetworkSpec, source: usize, degree: usize) -> Result<Vec<Series>> {
    net.check_node(source)?;
    net.expand::<Rational>(degree).closed_loop(source)
}

/// Generating series `d_ji` of the map `v_i ↦ y_j`.
pub fn io_map(net: &NetworkSpec, source: usize, sink: usize, degree: usize) -> Result<Series> {
    net.check_node(sink)?;
    let mut all = closed_loop_series(net, source, degree)?;
    Ok(all.swap_remove(sink))
}

/// Zero-input response derivatives at the initial time. Since
/// `E_{x0^k} = t^k / k!`, the `k`-th derivative is `<d_ji, x0^k>` itself,
/// the same for every source `i`.
pub fn natural_response(net: &NetworkSpec, node: usize, degree: usize) -> Result<Vec<Rational>> {
    let d = io_map(net, node, node, degree)?;
    Ok((0..=degree).map(|k| d.coeff(&Word::drift_power(k))).collect())
}

/// Nodes and edges lying on at least one forward (simple) path from `source`
/// to `sink`; self-loops never appear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub source: usize,
    pub sink: usize,
    pub nodes: BTreeSet<usize>,
    /// `(from, to)` pairs.
    pub edges: BTreeSet<(usize, usize)>,
}

impl Subgraph {
    /// Exhaustive simple-path enumeration over an `m`-node digraph.
    pub fn extract(
        m: usize,
        has_edge: impl Fn(usize, usize) -> bool,
        source: usize,
        sink: usize,
        budget: usize,
    ) -> Result<Subgraph> {
        if m > budget {
            return Err(Error::SubgraphBudget { nodes: m, budget });
        }
        for index in [source, sink] {
            if index >= m {
                return Err(Error::InvalidNode { index, nodes: m });
            }
        }
        let mut sub = Subgraph {
            source,
            sink,
            nodes: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        if source == sink {
            sub.nodes.insert(source);
            return Ok(sub);
        }
        let succ: Vec<Vec<usize>> = (0..m)
            .map(|a| (0..m).filter(|&b| a != b && has_edge(a, b)).collect())
            .collect();

        // Only nodes that can still reach the sink are worth visiting.
        let mut reaches = vec![false; m];
        reaches[sink] = true;
        let mut stack = vec![sink];
        while let Some(b) = stack.pop() {
            for a in 0..m {
                if !reaches[a] && succ[a].contains(&b) {
                    reaches[a] = true;
                    stack.push(a);
                }
            }
        }
        if !reaches[source] {
            return Ok(sub);
        }

        let mut path = vec![source];
        let mut on_path = vec![false; m];
        on_path[source] = true;
        walk(&succ, &reaches, sink, &mut path, &mut on_path, &mut sub);
        Ok(sub)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Predecessors of `node` inside the subgraph, ascending.
    pub fn incoming(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, to)| to == node)
            .map(|&(from, _)| from)
            .collect()
    }

    pub fn contains_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }
}

fn walk(
    succ: &[Vec<usize>],
    reaches: &[bool],
    sink: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    sub: &mut Subgraph,
) {
    let here = *path.last().expect("path starts at the source");
    for &next in &succ[here] {
        if on_path[next] || !reaches[next] {
            continue;
        }
        if next == sink {
            sub.nodes.extend(path.iter().copied());
            sub.nodes.insert(sink);
            sub.edges.extend(path.windows(2).map(|p| (p[0], p[1])));
            sub.edges.insert((here, sink));
            continue;
        }
        path.push(next);
        on_path[next] = true;
        walk(succ, reaches, sink, path, on_path, sub);
        on_path[next] = false;
        path.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum NodeJson {
    Poly {
        terms: Vec<TermJson>,
    },
    Maximal {
        #[serde(rename = "K", with = "crate::io::rational_str")]
        k: Rational,
        #[serde(rename = "M", with = "crate::io::rational_str")]
        m: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct NetworkJson {
    m: usize,
    #[serde(rename = "W")]
    weights: Vec<Vec<String>>,
    nodes: Vec<NodeJson>,
}

impl TryFrom<NetworkJson> for NetworkSpec {
    type Error = Error;

    fn try_from(j: NetworkJson) -> Result<Self> {
        if j.nodes.len() != j.m {
            return Err(Error::Domain(format!(
                "network declares m = {} but lists {} nodes",
                j.m,
                j.nodes.len()
            )));
        }
        let weights = j
            .weights
            .iter()
            .map(|row| row.iter().map(|w| crate::io::parse_coeff(w)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let nodes = j
            .nodes
            .into_iter()
            .map(|n| match n {
                NodeJson::Poly { terms } => NodeSource::poly(terms_from_json(&terms, 1)?),
                NodeJson::Maximal { k, m } => NodeSource::maximal(k, m),
            })
            .collect::<Result<Vec<_>>>()?;
        NetworkSpec::new(weights, nodes)
    }
}

impl From<NetworkSpec> for NetworkJson {
    fn from(net: NetworkSpec) -> Self {
        NetworkJson {
            m: net.node_count(),
            weights: net
                .weights
                .iter()
                .map(|row| row.iter().map(|w| w.to_string()).collect())
                .collect(),
            nodes: net
                .nodes
                .iter()
                .map(|n| match n {
                    NodeSource::Poly(p) => NodeJson::Poly { terms: terms_to_json(p) },
                    NodeSource::Maximal(s) => NodeJson::Maximal {
                        k: s.k.clone(),
                        m: s.m.clone(),
                    },
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rational};

    fn x1() -> NodeSource {
        NodeSource::poly([(Word::from([1]), int(1))]).unwrap()
    }

    fn zeros(m: usize) -> Vec<Vec<Rational>> {
        vec![vec![int(0); m]; m]
    }

    #[test]
    fn isolated_node_keeps_its_series() {
        let c = NodeSource::poly([(Word::from([0, 1]), int(2)), (Word::empty(), int(1))]).unwrap();
        let net = NetworkSpec::new(zeros(2), vec![c, x1()]).unwrap();
        let d = io_map(&net, 0, 0, 4).unwrap();
        assert_eq!(d, Series::from_terms(2, 4, [(Word::from([0, 1]), int(2)), (Word::empty(), int(1))]).unwrap());
        assert!(io_map(&net, 0, 1, 4).unwrap().is_zero());
    }

    #[test]
    fn two_node_chain() {
        let w = rational(3, 7);
        let mut weights = zeros(2);
        weights[1][0] = w.clone();
        let net = NetworkSpec::new(weights, vec![x1(), x1()]).unwrap();
        let d21 = io_map(&net, 0, 1, 5).unwrap();
        assert_eq!(d21, Series::from_terms(2, 5, [(Word::from([0, 1]), w)]).unwrap());
    }

    #[test]
    fn unity_self_loop() {
        let k = rational(1, 2);
        let net = NetworkSpec::new(vec![vec![k.clone()]], vec![x1()]).unwrap();
        let d = io_map(&net, 0, 0, 6).unwrap();
        let expected = Series::from_terms(
            2,
            6,
            (0..6).map(|n| (Word::drift_then_input(n), num_traits::pow(k.clone(), n))),
        )
        .unwrap();
        assert_eq!(d, expected);
        assert_eq!(d.exact_to(), Some(6));
    }

    #[test]
    fn invalid_node_index() {
        let net = NetworkSpec::new(zeros(1), vec![x1()]).unwrap();
        assert_eq!(
            io_map(&net, 1, 0, 2),
            Err(Error::InvalidNode { index: 1, nodes: 1 })
        );
        assert_eq!(
            io_map(&net, 0, 3, 2),
            Err(Error::InvalidNode { index: 3, nodes: 1 })
        );
    }

    #[test]
    fn natural_response_of_zero_nodes() {
        let zero = NodeSource::poly([]).unwrap();
        let net = NetworkSpec::new(vec![vec![int(1); 2]; 2], vec![zero.clone(), zero]).unwrap();
        assert!(natural_response(&net, 1, 5).unwrap().iter().all(|a| a.is_zero()));
    }

    #[test]
    fn maximal_single_node_natural_response() {
        let net = NetworkSpec::maximal(1, int(1), int(1)).unwrap();
        let a = natural_response(&net, 0, 5).unwrap();
        assert_eq!(a, [1, 2, 10, 82, 938, 13778].map(int));
    }

    #[test]
    fn chain_subgraph() {
        let mut weights = zeros(3);
        weights[1][0] = int(1);
        weights[2][1] = int(1);
        let net = NetworkSpec::new(weights, vec![x1(), x1(), x1()]).unwrap();
        let g = net.subgraph(0, 2).unwrap();
        assert_eq!(g.nodes, BTreeSet::from([0, 1, 2]));
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (1, 2)]));
        let back = net.subgraph(2, 0).unwrap();
        assert!(back.is_empty());
        let same = net.subgraph(1, 1).unwrap();
        assert_eq!(same.nodes, BTreeSet::from([1]));
        assert!(same.edges.is_empty());
    }

    #[test]
    fn subgraph_drops_self_loops_and_dead_ends() {
        let mut weights = zeros(4);
        weights[0][0] = int(1); // self-loop
        weights[1][0] = int(1);
        weights[2][1] = int(1);
        weights[3][1] = int(1); // 1 → 3 never reaches the sink
        weights[1][2] = int(1); // 2 → 1 closes a loop
        let net = NetworkSpec::new(weights, vec![x1(), x1(), x1(), x1()]).unwrap();
        let g = net.subgraph(0, 2).unwrap();
        assert_eq!(g.nodes, BTreeSet::from([0, 1, 2]));
        assert_eq!(g.edges, BTreeSet::from([(0, 1), (1, 2)]));
    }

    #[test]
    fn subgraph_budget() {
        let net = NetworkSpec::new(zeros(5), vec![x1(); 5]).unwrap();
        assert_eq!(
            net.subgraph_with_budget(0, 4, 4),
            Err(Error::SubgraphBudget { nodes: 5, budget: 4 })
        );
    }

    #[test]
    fn network_json_round_trip() {
        let text = r#"{
            "m": 2,
            "W": [["0", "1/2"], ["0.25", "0"]],
            "nodes": [
                {"kind": "poly", "terms": [{"word": [1], "coeff": "1"}, {"word": [0, 1], "coeff": "-3/2"}]},
                {"kind": "maximal", "K": "2", "M": "3"}
            ]
        }"#;
        let net: NetworkSpec = serde_json::from_str(text).unwrap();
        assert_eq!(net.weight(1, 0), &rational(1, 4));
        assert_eq!(net.weight(0, 1), &rational(1, 2));
        let again: NetworkSpec = serde_json::from_str(&serde_json::to_string(&net).unwrap()).unwrap();
        assert_eq!(again, net);
    }

    #[test]
    fn network_json_rejects_bad_shapes() {
        let wrong_m = r#"{"m": 2, "W": [["0"]], "nodes": [{"kind": "maximal", "K": "1", "M": "1"}]}"#;
        assert!(serde_json::from_str::<NetworkSpec>(wrong_m).is_err());
        let bad_letter = r#"{"m": 1, "W": [["0"]], "nodes": [{"kind": "poly", "terms": [{"word": [2], "coeff": "1"}]}]}"#;
        assert!(serde_json::from_str::<NetworkSpec>(bad_letter).is_err());
        let bad_k = r#"{"m": 1, "W": [["0"]], "nodes": [{"kind": "maximal", "K": "0", "M": "1"}]}"#;
        assert!(serde_json::from_str::<NetworkSpec>(bad_k).is_err());
    }

    #[test]
    fn weights_outside_unit_interval_warn() {
        let mut weights = zeros(2);
        weights[0][1] = int(2);
        weights[1][0] = int(-1);
        let net = NetworkSpec::new(weights, vec![x1(), x1()]).unwrap();
        assert_eq!(net.warnings().len(), 2);
    }
}
