mod common;

use std::collections::BTreeSet;

use cfnet::growth::{abel_taylor, closed_form_natural_response, log_abs, m_inf_bound, network_bound};
use cfnet::network::{io_map, natural_response, NetworkSpec, NodeSource};
use cfnet::ode::OdeOptions;
use cfnet::reldeg::{complete_reldeg, predict_io_reldeg, relative_degree, Certificate, RelDegStatus};
use cfnet::scalar::{int, rational};
use cfnet::sim::{simulate_maximal_ode, validate_io_map, Grid};
use cfnet::{Rational, Series, Word};
use common::*;
use rand::Rng;

#[test]
fn four_node_subgraph() {
    let net = four_node([int(1), int(1), int(1), int(1)]);
    let g = net.subgraph(0, 3).unwrap();
    assert_eq!(g.nodes, BTreeSet::from([0, 1, 2, 3]));
    assert_eq!(g.edges, BTreeSet::from([(0, 1), (0, 2), (1, 3), (2, 3)]));
}

#[test]
fn unity_self_loop_series() {
    let k = rational(-2, 3);
    let net = NetworkSpec::new(vec![vec![k.clone()]], vec![x1(1)]).unwrap();
    let d = io_map(&net, 0, 0, 6).unwrap();
    let want = (0..6).fold(Series::zero(2, 6), |acc, n| {
        let term = Series::monomial(2, 6, Word::drift_then_input(n), num_traits::pow(k.clone(), n)).unwrap();
        acc.add(&term).unwrap()
    });
    assert_eq!(d, want);
}

#[test]
fn natural_response_rows() {
    let net = NetworkSpec::maximal(3, int(1), int(1)).unwrap();
    let a = natural_response(&net, 2, 4).unwrap();
    assert_eq!(a, [1, 4, 44, 804, 20556].map(int).to_vec());

    let zero = NodeSource::poly(Vec::new()).unwrap();
    let net = NetworkSpec::new(vec![vec![int(1); 2]; 2], vec![zero.clone(), zero]).unwrap();
    assert!(natural_response(&net, 1, 5).unwrap().iter().all(|a| *a == int(0)));
}

#[test]
fn degenerate_four_node_pair_is_undefined_elsewhere_defined() {
    let net = four_node([int(2), int(3), int(3), int(2)]);
    let all = complete_reldeg(&net, 4).unwrap();
    assert_eq!(all[0][3].measured.status, RelDegStatus::Undefined);
    assert_eq!(all[0][1].measured.degree, Some(2));
    assert_eq!(all[0][0].measured.degree, Some(1));
    let p = all[0][3].prediction.as_ref().unwrap();
    assert_eq!(p.predicted, Some(3));
    assert_eq!(p.condition, Certificate::ViolatedUnknown);
    assert_eq!(p.details.iter().find(|d| d.node == 3).unwrap().repeated_sums, vec![(2, "0".to_string())]);
}

#[test]
fn repeated_values_with_nonzero_sum_certify() {
    let net = four_node([int(2), int(3), int(1), int(1)]);
    let p = predict_io_reldeg(&net, 0, 3, 4).unwrap();
    assert_eq!(p.condition, Certificate::RepeatedSumNonzero);
    let measured = relative_degree(&io_map(&net, 0, 3, 4).unwrap()).unwrap();
    assert_eq!(measured.degree, p.predicted);
}

/// Random polynomial node of relative degree `r`.
fn node_of_degree(r: &mut rand_chacha::ChaCha8Rng, rel: usize) -> NodeSource {
    let mut terms = vec![(Word::drift_then_input(rel - 1), random_rational(r))];
    if r.gen_bool(0.5) {
        terms.push((Word::drift_power(r.gen_range(0..3)), random_rational(r)));
    }
    if r.gen_bool(0.5) {
        terms.push((Word::drift_power(rel - 1).concat(&w(&[1, 1])), random_rational(r)));
    }
    NodeSource::poly(terms).unwrap()
}

#[test]
fn certified_predictions_match_measurement() {
    let mut r = rng(11);
    let mut certified = 0;
    for _ in 0..40 {
        let m = r.gen_range(2..=4);
        let nodes: Vec<NodeSource> = (0..m).map(|_| {
            let rel = r.gen_range(1..=2);
            node_of_degree(&mut r, rel)
        }).collect();
        let weights = (0..m)
            .map(|_| (0..m).map(|_| if r.gen_bool(0.45) { random_rational(&mut r) } else { int(0) }).collect())
            .collect();
        let net = NetworkSpec::new(weights, nodes).unwrap();
        let degree = 2 * m + 1;
        for row in complete_reldeg(&net, degree).unwrap() {
            for pair in row {
                if let Some(p) = &pair.prediction {
                    if p.certified() && p.predicted.unwrap() <= degree {
                        certified += 1;
                        assert!(pair.consistent(), "{net:?}\n{pair:?}");
                    }
                }
            }
        }
    }
    assert!(certified > 100, "{certified}");
}

#[test]
fn closed_form_tracks_simulated_natural_response() {
    for m in 1..=3 {
        let t_star = m_inf_bound(1.0, 1.0, m).unwrap().t_star;
        let net = NetworkSpec::maximal(m, int(1), int(1)).unwrap();
        let grid = Grid::new(0.0, 0.9 * t_star, 900).unwrap();
        let tr = simulate_maximal_ode(&net, &[], &grid, &OdeOptions::default()).unwrap();
        assert!(tr.escape_time.is_none());
        for (k, &t) in tr.times.iter().enumerate() {
            let z = closed_form_natural_response(m, 1.0, 1.0, t).unwrap();
            assert!((tr.outputs[0][k] - z).abs() <= 1e-6 * z.max(1.0), "m={m} t={t}");
        }
    }
}

#[test]
fn ratio_test_against_slightly_larger_growth_constant() {
    for m in 1..=3 {
        let m_inf = m_inf_bound(1.0, 1.0, m).unwrap().m_inf;
        let seq = abel_taylor(m, &int(1), &int(1), 200).unwrap();
        let m_prime = 1.01 * m_inf;
        // log(a_n / (M'^n n!)): bounded above, so a suitable K' exists.
        let mut log_fact = 0.0;
        let logs: Vec<f64> = seq.a.iter().enumerate().map(|(n, a)| {
            if n > 0 {
                log_fact += (n as f64).ln();
            }
            log_abs(a) - n as f64 * m_prime.ln() - log_fact
        }).collect();
        let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(logs[200] < logs[100] && logs[100] < peak + 1e-12, "m={m}");
        assert!(seq.mhat[1..].iter().all(|&v| v < m_inf));
    }
}

#[test]
fn maximal_network_escape_is_bounded_below() {
    let mut r = rng(12);
    for _ in 0..10 {
        let m = r.gen_range(1..=3);
        let nodes: Vec<NodeSource> = (0..m)
            .map(|_| NodeSource::maximal(rational(r.gen_range(1..=4), 2), rational(r.gen_range(1..=4), 2)).unwrap())
            .collect();
        let weights = (0..m).map(|_| (0..m).map(|_| rational(r.gen_range(0..=4), 4)).collect()).collect();
        let net = NetworkSpec::new(weights, nodes).unwrap();
        let bound = network_bound(&net).unwrap();
        let grid = Grid::new(0.0, 2.0, 400).unwrap();
        let tr = simulate_maximal_ode(&net, &[], &grid, &OdeOptions::default()).unwrap();
        if let Some(te) = tr.escape_time {
            assert!(te >= (1.0 - 1e-6) * bound.t_star, "{te} < {}", bound.t_star);
        }
    }
}

#[test]
fn four_node_map_validates_against_simulation() {
    let net = four_node([rational(1, 2), rational(3, 4), rational(2, 3), rational(1, 5)]);
    let grid = Grid::new(0.0, 0.5, 2000).unwrap();
    let v = grid.sample(|t| 1.0 + (3.0 * t).sin());
    let rep = validate_io_map(&net, 0, 3, 3, &v, &grid).unwrap();
    assert!(rep.max_error < 1e-9, "{rep:?}");
}

#[test]
fn zero_input_validation_sees_natural_response() {
    // Constant terms make the natural response nontrivial.
    let a = NodeSource::poly([(w(&[]), int(1)), (w(&[1]), int(1))]).unwrap();
    let b = NodeSource::poly([(w(&[0]), int(2)), (w(&[1]), int(1))]).unwrap();
    let net = NetworkSpec::new(vec![vec![int(0), int(0)], vec![int(1), int(0)]], vec![a, b]).unwrap();
    let grid = Grid::new(0.0, 0.5, 1000).unwrap();
    let rep = validate_io_map(&net, 0, 1, 4, &vec![0.0; grid.len()], &grid).unwrap();
    assert!(rep.max_error < 1e-10, "{rep:?}");
    let nat = natural_response(&net, 1, 3).unwrap();
    assert_eq!(nat, vec![int(0), int(3), int(0), int(0)]);
}

#[test]
fn network_json_example_round_trip() {
    let k: [Rational; 7] = std::array::from_fn(|i| int(i as i64 + 1));
    let net = diamond(&k, true);
    let text = serde_json::to_string(&net).unwrap();
    let back: NetworkSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, net);
}
