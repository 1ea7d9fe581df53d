//! JSON forms of series and networks. Coefficients travel as reduced
//! rational strings (`"3"`, `"1/2"`, `"-7/3"`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};
use crate::series::Series;
use crate::word::{Letter, Word};

pub mod rational_str {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use crate::scalar::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| de::Error::custom(format!("invalid rational {text:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub word: Vec<usize>,
    #[serde(with = "rational_str")]
    pub coeff: Rational,
}

/// `{ "m": int, "degree": int, "terms": [...] }` where `m` is the largest
/// letter index, so the alphabet is `x0..=xm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub m: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

pub fn terms_to_json(s: &Series) -> Vec<TermJson> {
    s.terms()
        .map(|(w, c)| TermJson {
            word: w.letters().iter().map(|&l| l as usize).collect(),
            coeff: c.clone(),
        })
        .collect()
}

pub fn terms_from_json(terms: &[TermJson], max_index: usize) -> Result<Vec<(Word, Rational)>> {
    terms
        .iter()
        .map(|t| {
            let letters = t
                .word
                .iter()
                .map(|&l| {
                    if l > max_index {
                        Err(Error::Alphabet {
                            letter: l,
                            max: max_index,
                        })
                    } else {
                        Ok(l as Letter)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((Word::from_letters(&letters), t.coeff.clone()))
        })
        .collect()
}

impl From<&Series> for SeriesJson {
    fn from(s: &Series) -> Self {
        SeriesJson {
            m: s.alphabet_size() - 1,
            degree: s.max_degree(),
            terms: terms_to_json(s),
        }
    }
}

impl TryFrom<&SeriesJson> for Series {
    type Error = Error;

    fn try_from(j: &SeriesJson) -> Result<Series> {
        Series::from_terms(j.m + 1, j.degree, terms_from_json(&j.terms, j.m)?)
    }
}

pub fn series_to_json(s: &Series) -> String {
    serde_json::to_string_pretty(&SeriesJson::from(s)).expect("series serializes")
}

pub fn series_from_json(text: &str) -> Result<Series> {
    let j: SeriesJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Series::try_from(&j)
}

pub fn parse_coeff(text: &str) -> Result<Rational> {
    parse_rational(text).ok_or_else(|| Error::Parse(format!("invalid rational {text:?}")))
}
