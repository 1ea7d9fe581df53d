//! Truncated noncommutative formal power series with exact coefficients.
//!
//! A [`Series`] stores only nonzero coefficients of words no longer than its
//! truncation degree. Binary operations truncate to the smaller degree of
//! their operands and carry the smaller exactness certificate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{factorial, Rational, Scalar};
use crate::word::{Letter, Word};

#[derive(Clone)]
pub struct Series<S = Rational> {
    letters: usize,
    degree: usize,
    exact: Option<usize>,
    terms: BTreeMap<Word, S>,
}

impl<S: Scalar> PartialEq for Series<S> {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters && self.degree == other.degree && self.terms == other.terms
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for Series<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if w.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "({c})·{w}")?;
            }
        }
        Ok(())
    }
}

impl<S: fmt::Debug> fmt::Debug for Series<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("letters", &self.letters)
            .field("degree", &self.degree)
            .field("exact", &self.exact)
            .field("terms", &self.terms)
            .finish()
    }
}

/// Growth constants of a maximal series `sum K M^|w| |w|! w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalSeriesSpec {
    #[serde(rename = "K", with = "crate::io::rational_str")]
    pub k: Rational,
    #[serde(rename = "M", with = "crate::io::rational_str")]
    pub m: Rational,
}

impl MaximalSeriesSpec {
    pub fn new(k: Rational, m: Rational) -> Result<Self> {
        if !k.is_positive() || !m.is_positive() {
            return Err(Error::Domain(format!(
                "maximal series constants must be positive (K={k}, M={m})"
            )));
        }
        Ok(MaximalSeriesSpec { k, m })
    }

    /// `K M^n n!`.
    pub fn coefficient(&self, n: usize) -> Rational {
        &self.k * num_traits::pow(self.m.clone(), n) * Rational::from_integer(factorial(n))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarProduct<S> {
    pub value: S,
    /// False when either operand is not certified exact through the shared degree.
    pub exact: bool,
}

/// Per-degree comparison against a growth bound `K M^k k!`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCheck<S> {
    /// `max |<c,w>| / (M^k k!)` over words of length `k`.
    pub ratios: Vec<S>,
    /// First degree whose ratio exceeds `K`, if any.
    pub first_violation: Option<usize>,
}

impl<S> GrowthCheck<S> {
    pub fn passes(&self) -> bool {
        self.first_violation.is_none()
    }
}

impl<S: Scalar> Series<S> {
    pub fn zero(letters: usize, degree: usize) -> Self {
        Series {
            letters,
            degree,
            exact: Some(degree),
            terms: BTreeMap::new(),
        }
    }

    /// The monomial `1·∅`.
    pub fn one(letters: usize, degree: usize) -> Self {
        let mut s = Series::zero(letters, degree);
        s.terms.insert(Word::empty(), S::one());
        s
    }

    pub fn monomial(letters: usize, degree: usize, word: Word, coeff: S) -> Result<Self> {
        Series::from_terms(letters, degree, [(word, coeff)])
    }

    /// Builds a series, summing repeated words and dropping zero coefficients
    /// and words longer than `degree`.
    pub fn from_terms<I>(letters: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, S)>,
    {
        if letters == 0 {
            return Err(Error::Domain("alphabet must contain the drift letter".into()));
        }
        let mut s = Series::zero(letters, degree);
        for (w, c) in terms {
            w.check_alphabet(letters - 1)?;
            if w.len() <= degree {
                s.add_term(w, c);
            }
        }
        Ok(s)
    }

    pub(crate) fn from_map(letters: usize, degree: usize, exact: Option<usize>, terms: BTreeMap<Word, S>) -> Self {
        let mut s = Series {
            letters,
            degree,
            exact: exact.map(|e| e.min(degree)),
            terms,
        };
        s.terms.retain(|w, c| w.len() <= degree && !c.is_zero());
        s
    }

    fn add_term(&mut self, w: Word, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Number of letters, `m + 1`.
    pub fn alphabet_size(&self) -> usize {
        self.letters
    }

    pub fn max_degree(&self) -> usize {
        self.degree
    }

    /// Degree up to which coefficients are certified exact; `None` when not
    /// even the constant term is.
    pub fn exact_to(&self) -> Option<usize> {
        self.exact
    }

    pub fn with_exact_to(mut self, exact: Option<usize>) -> Self {
        self.exact = exact.map(|e| e.min(self.degree));
        self
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    /// Nonzero terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> + '_ {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Word> + '_ {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_proper(&self) -> bool {
        !self.terms.contains_key(&Word::empty())
    }

    pub fn constant_term(&self) -> S {
        self.coeff(&Word::empty())
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, degree: usize) -> Series<S> {
        let degree = degree.min(self.degree);
        Series {
            letters: self.letters,
            degree,
            exact: self.exact.map(|e| e.min(degree)),
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() <= degree)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficients agree on every word of length at most `degree`.
    pub fn eq_up_to(&self, other: &Series<S>, degree: usize) -> bool {
        let lhs = self.terms.iter().filter(|(w, _)| w.len() <= degree);
        let rhs = other.terms.iter().filter(|(w, _)| w.len() <= degree);
        lhs.eq(rhs)
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Series<T> {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), f(c))).collect();
        Series::from_map(self.letters, self.degree, self.exact, terms)
    }

    pub fn to_f64(&self) -> Series<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    fn check_same_alphabet(&self, other: &Series<S>) -> Result<()> {
        if self.letters != other.letters {
            return Err(Error::AlphabetMismatch {
                left: self.letters,
                right: other.letters,
            });
        }
        Ok(())
    }

    fn joint_exact(&self, other: &Series<S>, degree: usize) -> Option<usize> {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => Some(a.min(b).min(degree)),
            _ => None,
        }
    }

    pub fn scale(&self, k: &S) -> Series<S> {
        if k.is_zero() {
            return Series::zero(self.letters, self.degree).with_exact_to(self.exact);
        }
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), c.clone() * k.clone())).collect();
        Series::from_map(self.letters, self.degree, self.exact, terms)
    }

    pub fn neg(&self) -> Series<S> {
        self.scale(&-S::one())
    }

    pub fn add(&self, other: &Series<S>) -> Result<Series<S>> {
        Series::linear_combine(&[(S::one(), self), (S::one(), other)])
    }

    pub fn sub(&self, other: &Series<S>) -> Result<Series<S>> {
        Series::linear_combine(&[(S::one(), self), (-S::one(), other)])
    }

    /// `sum k_i s_i`, truncated at the smallest degree among the inputs.
    pub fn linear_combine(pairs: &[(S, &Series<S>)]) -> Result<Series<S>> {
        let (_, first) = pairs
            .first()
            .ok_or_else(|| Error::Domain("linear combination of no series".into()))?;
        let mut degree = first.degree;
        let mut exact = first.exact;
        for (_, s) in pairs {
            first.check_same_alphabet(s)?;
            degree = degree.min(s.degree);
            exact = match (exact, s.exact) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
        }
        let mut out = Series::zero(first.letters, degree);
        out.exact = exact.map(|e| e.min(degree));
        for (k, s) in pairs {
            if k.is_zero() {
                continue;
            }
            for (w, c) in s.terms.iter().filter(|(w, _)| w.len() <= degree) {
                out.add_term(w.clone(), c.clone() * k.clone());
            }
        }
        Ok(out)
    }

    /// Concatenation (Cauchy) product.
    pub fn concat(&self, other: &Series<S>) -> Result<Series<S>> {
        self.check_same_alphabet(other)?;
        let degree = self.degree.min(other.degree);
        let mut acc: HashMap<Word, S> = HashMap::new();
        for (u, a) in &self.terms {
            if u.len() > degree {
                break;
            }
            for (v, b) in &other.terms {
                if u.len() + v.len() > degree {
                    break;
                }
                accumulate(&mut acc, u.concat(v), a.clone() * b.clone());
            }
        }
        Ok(Series::from_map(
            self.letters,
            degree,
            self.joint_exact(other, degree),
            acc.into_iter().collect(),
        ))
    }

    /// Shuffle product, truncated at the smaller degree.
    pub fn shuffle(&self, other: &Series<S>) -> Result<Series<S>> {
        self.check_same_alphabet(other)?;
        let degree = self.degree.min(other.degree);
        let mut table = ShuffleTable::default();
        Ok(self.shuffle_with(other, degree, &mut table))
    }

    pub(crate) fn shuffle_with(&self, other: &Series<S>, degree: usize, table: &mut ShuffleTable) -> Series<S> {
        let degree = degree.min(self.degree).min(other.degree);
        let mut acc: HashMap<Word, S> = HashMap::new();
        for (u, a) in &self.terms {
            if u.len() > degree {
                break;
            }
            for (v, b) in &other.terms {
                if u.len() + v.len() > degree {
                    break;
                }
                let ab = a.clone() * b.clone();
                for (w, n) in table.words(u, v).iter() {
                    accumulate(&mut acc, w.clone(), ab.clone() * S::from_u64(*n));
                }
            }
        }
        Series::from_map(
            self.letters,
            degree,
            self.joint_exact(other, degree),
            acc.into_iter().collect(),
        )
    }

    /// `<c, d> = sum_w <c,w><d,w>` over the shared truncation.
    pub fn scalar_product(&self, other: &Series<S>) -> Result<ScalarProduct<S>> {
        self.check_same_alphabet(other)?;
        let degree = self.degree.min(other.degree);
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut value = S::zero();
        for (w, c) in small.terms.iter().filter(|(w, _)| w.len() <= degree) {
            if let Some(d) = large.terms.get(w) {
                value = value + c.clone() * d.clone();
            }
        }
        let exact = matches!(self.joint_exact(other, degree), Some(e) if e >= degree);
        Ok(ScalarProduct { value, exact })
    }

    /// Left quotient `x_l^{-1} c`: words starting with `l`, with that letter
    /// removed. The result has degree one less.
    pub fn left_quotient(&self, l: Letter) -> Series<S> {
        let degree = self.degree.saturating_sub(1);
        let terms = self
            .terms
            .iter()
            .filter(|(w, _)| w.first() == Some(l))
            .map(|(w, c)| (w.tail(), c.clone()))
            .collect();
        Series::from_map(
            self.letters,
            degree,
            self.exact.and_then(|e| e.checked_sub(1)),
            terms,
        )
    }

    /// Adds `x_l · self` into `acc`, keeping words of length at most `degree`.
    pub(crate) fn prepend_into(&self, l: Letter, degree: usize, acc: &mut BTreeMap<Word, S>) {
        for (w, c) in &self.terms {
            if w.len() + 1 > degree {
                break;
            }
            let key = w.prepend(l);
            let sum = match acc.remove(&key) {
                Some(prev) => prev + c.clone(),
                None => c.clone(),
            };
            if !sum.is_zero() {
                acc.insert(key, sum);
            }
        }
    }

    /// Per-degree ratios `max |<c,w>| / (M^k k!)` for `k` up to the exact degree.
    pub fn check_growth(&self, k: &S, m: &S) -> Result<GrowthCheck<S>> {
        if !k.is_positive() || !m.is_positive() {
            return Err(Error::Domain("growth constants must be positive".into()));
        }
        let top = self.exact.unwrap_or(0).min(self.degree);
        let mut ratios = vec![S::zero(); top + 1];
        for (w, c) in self.terms.iter().filter(|(w, _)| w.len() <= top) {
            let n = w.len();
            let scale = num_traits::pow(m.clone(), n) * S::from_rational(&Rational::from_integer(factorial(n)));
            let r = c.abs() / scale;
            if r > ratios[n] {
                ratios[n] = r;
            }
        }
        let first_violation = ratios.iter().position(|r| r > k);
        Ok(GrowthCheck {
            ratios,
            first_violation,
        })
    }
}

impl<S: Scalar> Series<S> {
    /// Expands `sum_{|w| <= degree} K M^|w| |w|! w` over `x0..=x{max_index}`.
    pub fn maximal(spec: &MaximalSeriesSpec, max_index: usize, degree: usize) -> Series<S> {
        let mut terms = BTreeMap::new();
        for n in 0..=degree {
            let c = S::from_rational(&spec.coefficient(n));
            for w in Word::all_of_length(n, max_index) {
                terms.insert(w, c.clone());
            }
        }
        Series::from_map(max_index + 1, degree, Some(degree), terms)
    }
}

fn accumulate<S: Scalar>(acc: &mut HashMap<Word, S>, w: Word, c: S) {
    match acc.get_mut(&w) {
        Some(prev) => *prev = prev.clone() + c,
        None => {
            acc.insert(w, c);
        }
    }
}

type Interleavings = Rc<Vec<(Word, u64)>>;

/// Memoized shuffles of word pairs, `u ⧢ v` as words with multiplicities.
/// Local to one computation; not shared across threads.
#[derive(Default)]
pub(crate) struct ShuffleTable {
    memo: HashMap<(Word, Word), Interleavings>,
}

impl ShuffleTable {
    pub(crate) fn words(&mut self, u: &Word, v: &Word) -> Interleavings {
        if u.is_empty() {
            return Rc::new(vec![(v.clone(), 1)]);
        }
        if v.is_empty() {
            return Rc::new(vec![(u.clone(), 1)]);
        }
        let key = if u <= v {
            (u.clone(), v.clone())
        } else {
            (v.clone(), u.clone())
        };
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let (a, b) = (&key.0, &key.1);
        let (la, lb) = (a.first().unwrap(), b.first().unwrap());
        let left = self.words(&a.tail(), b);
        let right = self.words(a, &b.tail());
        let mut out: Vec<(Word, u64)> = Vec::with_capacity(left.len() + right.len());
        out.extend(left.iter().map(|(w, n)| (w.prepend(la), *n)));
        if la == lb {
            let mut merged: HashMap<Word, u64> = out.into_iter().collect();
            for (w, n) in right.iter() {
                *merged.entry(w.prepend(lb)).or_insert(0) += n;
            }
            out = merged.into_iter().collect();
        } else {
            out.extend(right.iter().map(|(w, n)| (w.prepend(lb), *n)));
        }
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rational};

    fn s(degree: usize, terms: &[(&[Letter], i64)]) -> Series {
        Series::from_terms(
            2,
            degree,
            terms.iter().map(|(w, c)| (Word::from_letters(w), int(*c))),
        )
        .unwrap()
    }

    #[test]
    fn linear_combine_examples() {
        let x1 = s(3, &[(&[1], 1)]);
        let sum = Series::linear_combine(&[(int(1), &x1), (int(1), &x1)]).unwrap();
        assert_eq!(sum, s(3, &[(&[1], 2)]));

        let c = s(3, &[(&[], 2), (&[0, 1], -3), (&[1, 1, 0], 5)]);
        let diff = Series::linear_combine(&[(int(1), &c), (int(-1), &c)]).unwrap();
        assert!(diff.is_zero());
        assert_eq!(diff.len(), 0);

        let x0 = s(3, &[(&[0], 1)]);
        let one = Series::one(2, 3);
        let mixed = Series::linear_combine(&[(int(2), &x0), (int(3), &one)]).unwrap();
        assert_eq!(mixed, s(3, &[(&[], 3), (&[0], 2)]));
    }

    #[test]
    fn linear_combine_takes_min_degree_and_checks_alphabet() {
        let a = s(4, &[(&[0, 0, 0, 0], 1), (&[1], 1)]);
        let b = s(2, &[(&[0], 1)]);
        let c = a.add(&b).unwrap();
        assert_eq!(c.max_degree(), 2);
        assert_eq!(c, s(2, &[(&[0], 1), (&[1], 1)]));
        let three = Series::<Rational>::one(3, 2);
        assert_eq!(
            a.add(&three),
            Err(Error::AlphabetMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn concat_examples() {
        let x0 = s(4, &[(&[0], 1)]);
        let x1 = s(4, &[(&[1], 1)]);
        assert_eq!(x0.concat(&x1).unwrap(), s(4, &[(&[0, 1], 1)]));
        let c = s(4, &[(&[1, 0], 3), (&[], -1)]);
        assert_eq!(Series::one(2, 4).concat(&c).unwrap(), c);
        let p = s(4, &[(&[], 1), (&[1], 1)]);
        assert_eq!(p.concat(&x0).unwrap(), s(4, &[(&[0], 1), (&[1, 0], 1)]));
    }

    #[test]
    fn shuffle_examples() {
        let x1 = s(4, &[(&[1], 1)]);
        let x0 = s(4, &[(&[0], 1)]);
        assert_eq!(x1.shuffle(&x1).unwrap(), s(4, &[(&[1, 1], 2)]));
        assert_eq!(x0.shuffle(&x1).unwrap(), s(4, &[(&[0, 1], 1), (&[1, 0], 1)]));
        let x0x1 = s(4, &[(&[0, 1], 1)]);
        assert_eq!(
            x1.shuffle(&x0x1).unwrap(),
            s(4, &[(&[1, 0, 1], 1), (&[0, 1, 1], 2)])
        );
    }

    #[test]
    fn shuffle_truncates() {
        let a = s(3, &[(&[1, 1], 1)]);
        let b = s(5, &[(&[0, 0], 1), (&[0], 1)]);
        let p = a.shuffle(&b).unwrap();
        assert_eq!(p.max_degree(), 3);
        assert_eq!(p, s(3, &[(&[0, 1, 1], 1), (&[1, 0, 1], 1), (&[1, 1, 0], 1)]));
    }

    #[test]
    fn scalar_product_examples() {
        let x1 = s(3, &[(&[1], 1)]);
        assert_eq!(x1.scalar_product(&x1).unwrap().value, int(1));
        let x0 = s(3, &[(&[0], 1)]);
        assert_eq!(x1.scalar_product(&x0).unwrap().value, int(0));
        let a = s(3, &[(&[0], 2), (&[1], 3)]);
        let b = s(3, &[(&[0], 1), (&[1], 1)]);
        let p = a.scalar_product(&b).unwrap();
        assert_eq!(p.value, int(5));
        assert!(p.exact);
        let loose = b.clone().with_exact_to(Some(1));
        assert!(!a.scalar_product(&loose).unwrap().exact);
    }

    #[test]
    fn maximal_series_examples() {
        let unit = MaximalSeriesSpec::new(int(1), int(1)).unwrap();
        let c: Series = Series::maximal(&unit, 1, 2);
        let expected = s(
            2,
            &[
                (&[], 1),
                (&[0], 1),
                (&[1], 1),
                (&[0, 0], 2),
                (&[0, 1], 2),
                (&[1, 0], 2),
                (&[1, 1], 2),
            ],
        );
        assert_eq!(c, expected);

        let spec = MaximalSeriesSpec::new(int(2), int(3)).unwrap();
        let c: Series = Series::maximal(&spec, 1, 3);
        for w in Word::all_of_length(2, 1) {
            assert_eq!(c.coeff(&w), int(36));
        }

        let c: Series = Series::maximal(&unit, 1, 0);
        assert_eq!(c, Series::one(2, 0));

        assert!(MaximalSeriesSpec::new(int(0), int(1)).is_err());
        assert!(MaximalSeriesSpec::new(int(1), rational(-1, 2)).is_err());
    }

    #[test]
    fn growth_check_examples() {
        let spec = MaximalSeriesSpec::new(rational(3, 2), int(2)).unwrap();
        let c: Series = Series::maximal(&spec, 1, 5);
        let report = c.check_growth(&rational(3, 2), &int(2)).unwrap();
        assert!(report.passes());
        assert!(report.ratios.iter().all(|r| *r == rational(3, 2)));

        let steep = MaximalSeriesSpec::new(int(1), int(2)).unwrap();
        let c: Series = Series::maximal(&steep, 1, 4);
        let report = c.check_growth(&int(1), &int(1)).unwrap();
        assert_eq!(report.first_violation, Some(1));

        let zero = Series::<Rational>::zero(2, 6);
        assert!(zero.check_growth(&int(1), &int(1)).unwrap().passes());
    }

    #[test]
    fn left_quotient_strips_first_letter() {
        let c = s(3, &[(&[], 1), (&[0, 1], 2), (&[1, 0, 0], 3), (&[0], 4)]);
        assert_eq!(c.left_quotient(0), s(2, &[(&[], 4), (&[1], 2)]));
        assert_eq!(c.left_quotient(1), s(2, &[(&[0, 0], 3)]));
    }

    #[test]
    fn float_conversion_keeps_support() {
        let c = s(2, &[(&[0], 3), (&[1, 1], -1)]);
        let f = c.to_f64();
        assert_eq!(f.coeff(&Word::from([0])), 3.0);
        assert_eq!(f.coeff(&Word::from([1, 1])), -1.0);
        assert_eq!(f.len(), 2);
    }
}
