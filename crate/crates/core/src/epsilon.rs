//! Exact rational ε in (0, 1].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// The collision parameter of an ε-ASU₂ family, kept as an exact fraction so
/// that thresholds such as ε·|𝓗|/|𝓣| never pick up floating-point drift.
///
/// Serialises as the string `"num/den"` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Epsilon(Ratio<u64>);

impl Epsilon {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(domain("epsilon denominator is zero"));
        }
        let r = Ratio::new(numer, denom);
        if *r.numer() == 0 || r.numer() > r.denom() {
            return Err(domain(format!("epsilon {numer}/{denom} is outside (0, 1]")));
        }
        Ok(Epsilon(r))
    }

    pub const ONE: Epsilon = Epsilon(Ratio::new_raw(1, 1));

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_one(&self) -> bool {
        self.numer() == self.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn log2(&self) -> f64 {
        (self.numer() as f64).log2() - (self.denom() as f64).log2()
    }

    /// log₂(ε / (1 − ε)); `None` when ε = 1.
    pub fn log2_odds(&self) -> Option<f64> {
        if self.is_one() {
            return None;
        }
        let rest = self.denom() - self.numer();
        Some((self.numer() as f64).log2() - (rest as f64).log2())
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    /// Whether `count ≤ ε·keys/tags`, compared exactly.
    pub fn admits(&self, count: u64, keys: u64, tags: u64) -> bool {
        (count as u128) * (tags as u128) * (self.denom() as u128)
            <= (self.numer() as u128) * (keys as u128)
    }

    /// ⌊ε·keys/tags⌋.
    pub fn floor_threshold(&self, keys: u64, tags: u64) -> u64 {
        let num = (self.numer() as u128) * (keys as u128);
        let den = (self.denom() as u128) * (tags as u128);
        (num / den) as u64
    }

    /// Whether ε ≥ 1/tags.
    pub fn at_least_inverse_of(&self, tags: u64) -> bool {
        (self.numer() as u128) * (tags as u128) >= self.denom() as u128
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts `"num/den"`, an integer, or a plain decimal such as `"0.125"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || domain(format!("cannot parse epsilon {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Epsilon::new(n, d);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 18 {
            return Err(domain(format!(
                "epsilon {s:?} has more than 18 decimal places"
            )));
        }
        let denom = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_v: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let numer = int
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac_v))
            .ok_or_else(bad)?;
        Epsilon::new(numer, denom)
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Formats an exact rational as `"num/den"`.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
