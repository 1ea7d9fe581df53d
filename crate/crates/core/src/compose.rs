//! Composition of SISO series.
//!
//! `compose(c, d)` substitutes every input letter `x1` of `c` by the map
//! `e ↦ x0 (d ⧢ e)` and every drift letter by `e ↦ x0 e`, evaluated from the
//! right and applied to `1`. `mixed_compose` keeps a direct input channel:
//! `x1` becomes `e ↦ x1 e + x0 (d ⧢ e)`, the series of `F_c[u + F_d[u]]`.
//!
//! Both are evaluated with a Horner scheme over the prefix tree of `supp(c)`:
//! `c∘d = <c,∅> + x0 (x0⁻¹c ∘ d) + x0 (d ⧢ (x1⁻¹c ∘ d))`, so words of `c`
//! sharing a prefix share all substitution work.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{Series, ShuffleTable};
use crate::word::{Word, DRIFT, INPUT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Pure,
    Mixed,
}

pub fn compose<S: Scalar>(c: &Series<S>, d: &Series<S>) -> Result<Series<S>> {
    substitute(c, d, Mode::Pure)
}

pub fn mixed_compose<S: Scalar>(c: &Series<S>, d: &Series<S>) -> Result<Series<S>> {
    substitute(c, d, Mode::Mixed)
}

fn substitute<S: Scalar>(c: &Series<S>, d: &Series<S>, mode: Mode) -> Result<Series<S>> {
    for s in [c, d] {
        if s.alphabet_size() != 2 {
            return Err(Error::AlphabetMismatch {
                left: s.alphabet_size(),
                right: 2,
            });
        }
    }
    // A degree-n output coefficient reads c up to n and d only below n.
    let degree = c.max_degree().min(d.max_degree() + 1);
    let exact = match (c.exact_to(), d.exact_to()) {
        (Some(ec), Some(ed)) => Some(ec.min(ed + 1)),
        (Some(_), None) => Some(0),
        (None, _) => None,
    };
    let mut table = ShuffleTable::default();
    let terms = horner(&c.truncate(degree), d, degree, mode, &mut table);
    Ok(Series::from_map(2, degree, exact, terms))
}

fn horner<S: Scalar>(
    c: &Series<S>,
    d: &Series<S>,
    degree: usize,
    mode: Mode,
    table: &mut ShuffleTable,
) -> BTreeMap<Word, S> {
    let mut out = BTreeMap::new();
    let constant = c.constant_term();
    if !constant.is_zero() {
        out.insert(Word::empty(), constant);
    }
    if degree == 0 {
        return out;
    }
    let below = degree - 1;

    let drift_part = c.left_quotient(DRIFT);
    if !drift_part.is_zero() {
        let inner = horner(&drift_part, d, below, mode, table);
        Series::from_map(2, below, None, inner).prepend_into(DRIFT, degree, &mut out);
    }

    let input_part = c.left_quotient(INPUT);
    if !input_part.is_zero() {
        let inner = Series::from_map(2, below, None, horner(&input_part, d, below, mode, table));
        if !d.is_zero() {
            inner.shuffle_with(d, below, table).prepend_into(DRIFT, degree, &mut out);
        }
        if mode == Mode::Mixed {
            inner.prepend_into(INPUT, degree, &mut out);
        }
    }
    out
}
