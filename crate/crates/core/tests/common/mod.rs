#![allow(dead_code)]

use cfnet::network::{NetworkSpec, NodeSource};
use cfnet::scalar::int;
use cfnet::{Rational, Word};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonzero rational with small numerator and denominator.
pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let p: i64 = rng.gen_range(-12..=12);
        let q: i64 = rng.gen_range(1..=9);
        if p != 0 {
            return Rational::new(p.into(), q.into());
        }
    }
}

pub fn w(letters: &[u8]) -> Word {
    Word::from_letters(letters)
}

pub fn poly(terms: Vec<(&[u8], Rational)>) -> NodeSource {
    NodeSource::poly(terms.into_iter().map(|(l, c)| (w(l), c))).unwrap()
}

pub fn x1(sign: i64) -> NodeSource {
    poly(vec![(&[1], int(sign))])
}

pub fn zeros(m: usize) -> Vec<Vec<Rational>> {
    vec![vec![int(0); m]; m]
}

/// Four nodes, edges 1→2, 1→3, 2→4, 3→4 (zero-based below), nodes
/// `x1, x1, -x1, x1`. Weights in order `(W21, W31, W42, W43)`.
pub fn four_node(weights: [Rational; 4]) -> NetworkSpec {
    let [w21, w31, w42, w43] = weights;
    let mut w = zeros(4);
    w[1][0] = w21;
    w[2][0] = w31;
    w[3][1] = w42;
    w[3][2] = w43;
    NetworkSpec::new(w, vec![x1(1), x1(1), x1(-1), x1(1)]).unwrap()
}

pub fn four_node_pattern() -> Vec<Vec<bool>> {
    let mut p = vec![vec![false; 4]; 4];
    p[1][0] = true;
    p[2][0] = true;
    p[3][1] = true;
    p[3][2] = true;
    p
}

/// Forward-path edges of the double-diamond network (zero-based `(from, to)`).
pub const DIAMOND_EDGES: [(usize, usize); 9] =
    [(0, 1), (0, 2), (1, 3), (2, 3), (1, 4), (3, 4), (3, 5), (4, 6), (5, 6)];
/// Feedback edge 7→4 that the printed natural response requires.
pub const DIAMOND_FEEDBACK: (usize, usize) = (6, 3);

/// Double-diamond node series with constants `k[0..7]`, each node's own
/// input letter mapped to `x1`.
pub fn diamond_nodes(k: &[Rational; 7]) -> Vec<NodeSource> {
    vec![
        poly(vec![(&[1], k[0].clone()), (&[0, 1], int(2))]),
        poly(vec![(&[0], int(1)), (&[0, 0, 1], k[1].clone())]),
        poly(vec![(&[0, 1], k[2].clone()), (&[0, 0, 1, 1], int(3))]),
        poly(vec![(&[], int(1)), (&[0, 1], k[3].clone()), (&[0, 0, 1, 0], int(-1))]),
        poly(vec![(&[0], int(4)), (&[0, 0, 1], k[4].clone()), (&[0, 0, 0, 0, 1], int(-2))]),
        poly(vec![(&[1], k[5].clone()), (&[1, 1], int(-1))]),
        poly(vec![(&[0], int(1)), (&[], int(2)), (&[1], k[6].clone()), (&[0, 1], int(4))]),
    ]
}

pub fn diamond(k: &[Rational; 7], with_feedback: bool) -> NetworkSpec {
    let mut w = zeros(7);
    for &(from, to) in &DIAMOND_EDGES {
        w[to][from] = int(1);
    }
    if with_feedback {
        let (from, to) = DIAMOND_FEEDBACK;
        w[to][from] = int(1);
    }
    NetworkSpec::new(w, diamond_nodes(k)).unwrap()
}

/// Three maximal nodes with `K_i = i`, `M_i = 5 - i` and mixed weights.
pub fn three_node_generic() -> NetworkSpec {
    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let weights = vec![
        vec![int(1), r(1, 2), int(1)],
        vec![int(1), int(1), int(0)],
        vec![r(1, 4), int(1), int(1)],
    ];
    let nodes = (1..=3)
        .map(|i| NodeSource::maximal(int(i), int(5 - i)).unwrap())
        .collect();
    NetworkSpec::new(weights, nodes).unwrap()
}
