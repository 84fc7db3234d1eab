//! Exact probabilities.
//!
//! Probabilities are `Ratio<i64>` values. On the wire they are strings of the
//! form `"num/den"`; integers are still written with an explicit denominator
//! (`"1/1"`).

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};

/// An exact rational probability.
pub type Prob = Rational64;

/// Formats a probability as `"num/den"`.
pub fn format_prob(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_prob(s: &str) -> Result<Prob, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: i64 = num
        .parse()
        .map_err(|_| format!("invalid numerator in {s:?}"))?;
    let den: i64 = den
        .parse()
        .map_err(|_| format!("invalid denominator in {s:?}"))?;
    if den == 0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Prob::new(num, den))
}

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

/// Converts to `f64` for summaries only.
pub fn to_f64(p: &Prob) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Serde adapter for a single [`Prob`] as a rational string.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(p: &Prob, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_prob(p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Prob, D::Error> {
        let s = String::deserialize(d)?;
        parse_prob(&s).map_err(serde::de::Error::custom)
    }
}
