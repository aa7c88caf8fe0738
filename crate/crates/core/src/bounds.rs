//! Closed-form success probabilities for an adversary who knows part of the
//! authentication key.
//!
//! Every quantity is available in log₂-space, which is the only workable
//! representation at realistic sizes (|𝓗| = 2²¹⁷⁶ gives probabilities around
//! 10⁻⁶⁴⁷). When |𝓗|, |𝓣| and r·|𝓗| are small integers the hypergeometric
//! quantities are also computed as exact rationals.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use statrs::function::gamma::ln_gamma;

use crate::epsilon::{format_rational, Epsilon};
use crate::error::{budget, domain, Result};

/// Largest |𝓗| evaluated with exact binomial sums.
pub const DESK_MAX_KEYS: u64 = 1 << 20;

/// Beyond this size the `−1`/`−2` corrections in the hypergeometric moments
/// vanish below f64 resolution and the moments are evaluated in log-space.
const LOG_MOMENTS_FROM_LOG2: f64 = 60.0;

pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// A probability stored as its base-2 logarithm.
///
/// Values that a formula would put above 1 are clamped to 1 and flagged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prob {
    log2: f64,
    clamped: bool,
}

impl Prob {
    pub const ZERO: Prob = Prob {
        log2: f64::NEG_INFINITY,
        clamped: false,
    };
    pub const ONE: Prob = Prob {
        log2: 0.0,
        clamped: false,
    };

    pub fn from_log2(log2: f64) -> Prob {
        if log2 > 0.0 {
            Prob {
                log2: 0.0,
                clamped: true,
            }
        } else {
            Prob {
                log2,
                clamped: false,
            }
        }
    }

    pub fn from_f64(p: f64) -> Prob {
        Prob::from_log2(p.log2())
    }

    pub fn from_rational(r: &BigRational) -> Prob {
        if r.is_zero() {
            Prob::ZERO
        } else {
            Prob::from_log2(log2_rational(r))
        }
    }

    pub fn log2(&self) -> f64 {
        self.log2
    }

    pub fn log10(&self) -> f64 {
        self.log2 * std::f64::consts::LOG10_2
    }

    /// The probability as an f64; underflows to 0 below ~10⁻³⁰⁸.
    pub fn value(&self) -> f64 {
        self.log2.exp2()
    }

    pub fn is_zero(&self) -> bool {
        self.log2 == f64::NEG_INFINITY
    }

    pub fn clamped(&self) -> bool {
        self.clamped
    }
}

impl Serialize for Prob {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            log2: Option<f64>,
            value: Option<f64>,
            clamped: bool,
        }
        let log2 = self.log2.is_finite().then_some(self.log2);
        let value = if self.is_zero() {
            Some(0.0)
        } else {
            (self.log10() >= -300.0).then(|| self.value())
        };
        Repr {
            log2,
            value,
            clamped: self.clamped,
        }
        .serialize(serializer)
    }
}

/// A probability with its exact rational value when one was computed.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    pub prob: Prob,
    pub exact: Option<BigRational>,
}

impl Evaluated {
    fn exact(r: BigRational) -> Self {
        let one = BigRational::one();
        let clamped = r > one;
        let r = if clamped { one } else { r };
        let mut prob = Prob::from_rational(&r);
        prob.clamped = clamped;
        Evaluated {
            prob,
            exact: Some(r),
        }
    }

    fn approx(prob: Prob) -> Self {
        Evaluated { prob, exact: None }
    }
}

impl Serialize for Evaluated {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            #[serde(flatten)]
            prob: &'a Prob,
            #[serde(skip_serializing_if = "Option::is_none")]
            exact: Option<String>,
        }
        Repr {
            prob: &self.prob,
            exact: self.exact.as_ref().map(format_rational),
        }
        .serialize(serializer)
    }
}

fn log2_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}

fn log2_rational(r: &BigRational) -> f64 {
    let n = r.numer().abs().to_biguint().unwrap_or_default();
    let d = r.denom().abs().to_biguint().unwrap_or_default();
    log2_biguint(&n) - log2_biguint(&d)
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn is_near_integer(x: f64) -> Option<u64> {
    let r = x.round();
    ((0.0..9.0e18).contains(&r) && (x - r).abs() <= 1e-9 * r.max(1.0)).then_some(r as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Counts {
    keys: u64,
    tags: u64,
    surviving: Option<u64>,
}

/// Integral |𝓗|, |𝓣|, and r·|𝓗| for exact evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeskParams {
    pub keys: u64,
    pub tags: u64,
    pub epsilon: Epsilon,
    pub surviving: u64,
}

impl DeskParams {
    pub fn class_size(&self) -> u64 {
        self.keys / self.tags
    }

    /// ε·|𝓗|/|𝓣| exactly.
    pub fn good_threshold(&self) -> BigRational {
        self.epsilon.to_big() * ratio(self.keys, self.tags)
    }
}

/// Inputs to every formula: log₂|𝓗|, log₂|𝓣|, ε and the fraction r of keys
/// the adversary cannot rule out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    pub log2_keys: f64,
    pub log2_tags: f64,
    pub epsilon: Epsilon,
    pub r: f64,
    #[serde(skip)]
    counts: Option<Counts>,
}

impl BoundParams {
    pub fn new(log2_keys: f64, log2_tags: f64, epsilon: Epsilon, r: f64) -> Result<Self> {
        if !log2_keys.is_finite() || !log2_tags.is_finite() {
            return Err(domain("log2 sizes must be finite"));
        }
        if log2_tags < 0.0 || log2_tags > log2_keys {
            return Err(domain(format!(
                "need 0 ≤ log2|T| ≤ log2|H|, got {log2_tags} and {log2_keys}"
            )));
        }
        if !(r > 0.0 && r <= 1.0) {
            return Err(domain(format!("r = {r} is outside (0, 1]")));
        }
        if epsilon.log2() < -log2_tags - 1e-9 {
            return Err(domain(format!("epsilon {epsilon} is below 1/|T|")));
        }
        let counts = if log2_keys <= 62.0 {
            match (
                is_near_integer(log2_keys.exp2()),
                is_near_integer(log2_tags.exp2()),
            ) {
                (Some(keys), Some(tags)) if tags > 0 && keys % tags == 0 => Some(Counts {
                    keys,
                    tags,
                    surviving: is_near_integer(r * keys as f64).filter(|&s| s >= 1),
                }),
                _ => None,
            }
        } else {
            None
        };
        Ok(BoundParams {
            log2_keys,
            log2_tags,
            epsilon,
            r,
            counts,
        })
    }

    /// Parameters from exact counts; r = surviving/keys.
    pub fn from_counts(keys: u64, tags: u64, epsilon: Epsilon, surviving: u64) -> Result<Self> {
        if keys == 0 || tags == 0 || !keys.is_multiple_of(tags) {
            return Err(domain(format!("|T| = {tags} must divide |H| = {keys}")));
        }
        if surviving == 0 || surviving > keys {
            return Err(domain(format!(
                "surviving count {surviving} outside 1..={keys}"
            )));
        }
        if !epsilon.at_least_inverse_of(tags) {
            return Err(domain(format!("epsilon {epsilon} is below 1/{tags}")));
        }
        Ok(BoundParams {
            log2_keys: (keys as f64).log2(),
            log2_tags: (tags as f64).log2(),
            epsilon,
            r: surviving as f64 / keys as f64,
            counts: Some(Counts {
                keys,
                tags,
                surviving: Some(surviving),
            }),
        })
    }

    /// Integral parameters for the exact hypergeometric formulas.
    pub fn desk(&self) -> Result<DeskParams> {
        let c = self.counts.ok_or_else(|| {
            if self.log2_keys > 62.0 {
                budget(format!(
                    "|H| = 2^{} is beyond exact evaluation",
                    self.log2_keys
                ))
            } else {
                domain("|H| and |T| must be integers with |T| dividing |H|")
            }
        })?;
        if c.keys > DESK_MAX_KEYS {
            return Err(budget(format!(
                "|H| = {} exceeds the exact-evaluation cap {DESK_MAX_KEYS}",
                c.keys
            )));
        }
        let surviving = c.surviving.ok_or_else(|| {
            domain(format!(
                "r·|H| = {} is not an integer",
                self.r * c.keys as f64
            ))
        })?;
        Ok(DeskParams {
            keys: c.keys,
            tags: c.tags,
            epsilon: self.epsilon,
            surviving,
        })
    }

    /// log₂(|𝓗|/|𝓣|).
    pub fn log2_class_size(&self) -> f64 {
        self.log2_keys - self.log2_tags
    }

    /// log₂(ε·|𝓗|/|𝓣|).
    pub fn log2_good_threshold(&self) -> f64 {
        self.epsilon.log2() + self.log2_class_size()
    }
}

/// P(T_E = t) = 1/|𝓣| for a key Eve knows nothing about.
pub fn guess_prob_uniform(params: &BoundParams) -> Prob {
    Prob::from_log2(-params.log2_tags)
}

/// After one observed message–tag pair the guess succeeds with probability at
/// most ε.
pub fn guess_prob_after_pair(params: &BoundParams) -> Prob {
    Prob::from_log2(params.epsilon.log2())
}

/// min(1, 1/(r·|𝓣|)): a guess with min-entropy log₂(r|𝓗|) and no pair seen.
pub fn guess_prob_partial(params: &BoundParams) -> Prob {
    Prob::from_log2(-params.r.log2() - params.log2_tags)
}

/// min(1, (ε·|𝓗|/|𝓣|)/|𝓗_t ∩ 𝓗_E|): success given the surviving keys
/// consistent with Alice's pair. Reaches 1 once the intersection is no larger
/// than ε·|𝓗|/|𝓣|.
pub fn conditional_success(params: &BoundParams, intersection_size: u64) -> Result<Evaluated> {
    if intersection_size == 0 {
        return Err(domain("intersection size must be positive"));
    }
    if let Some(c) = params.counts {
        let v = params.epsilon.to_big() * ratio(c.keys, c.tags)
            / BigRational::from_integer(intersection_size.into());
        return Ok(Evaluated::exact(v));
    }
    Ok(Evaluated::approx(Prob::from_log2(
        params.log2_good_threshold() - (intersection_size as f64).log2(),
    )))
}

/// min(1, ε/r): the average success before the tag is seen.
pub fn average_success_before_tag(params: &BoundParams) -> Prob {
    Prob::from_log2(params.epsilon.log2() - params.r.log2())
}

/// H∞(K) = log₂(r·|𝓗|) bits.
pub fn min_entropy_of_elimination(params: &BoundParams) -> f64 {
    params.log2_keys + params.r.log2()
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// Numerators of P(X = i) over the common denominator C(|𝓗|−1, |𝓗|/|𝓣|−1),
/// for i = 1..=upto. Binomials are stepped incrementally.
fn hypergeom_numerators(d: &DeskParams, upto: u64) -> Vec<BigUint> {
    let class = d.class_size();
    let s = d.surviving;
    let others = d.keys - s;
    let upto = upto.min(class);
    let mut out = Vec::with_capacity(upto as usize);
    // a = C(s−1, i−1), b = C(others, class−i)
    let mut a = BigUint::one();
    let mut b = binomial(others, class - 1);
    for i in 1..=upto {
        out.push(&a * &b);
        if i == upto {
            break;
        }
        // C(s−1, i) = C(s−1, i−1)·(s−i)/i, zero once i ≥ s
        a = a * s.saturating_sub(i) / i;
        // C(others, class−i−1) = C(others, class−i)·(class−i)/(others−class+i+1)
        let k = class - i;
        if k > others {
            // b was zero and stays zero until k ≤ others
            b = binomial(others, k - 1);
        } else {
            b = b * k / (others - k + 1);
        }
    }
    out
}

fn hypergeom_denominator(d: &DeskParams) -> BigUint {
    binomial(d.keys - 1, d.class_size() - 1)
}

fn ln_binomial(n: f64, k: f64) -> Option<f64> {
    if k < 0.0 || k > n {
        return None;
    }
    Some(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

/// P(X = i), where X counts surviving keys in the constraint set of Alice's
/// pair: the true key plus a hypergeometric draw of |𝓗|/|𝓣| − 1 keys from
/// the |𝓗| − 1 others, r·|𝓗| − 1 of which survive.
pub fn hypergeom_pmf(params: &BoundParams, i: u64) -> Result<Evaluated> {
    match params.desk() {
        Ok(d) => {
            if i == 0 || i > d.class_size() {
                return Ok(Evaluated::exact(BigRational::zero()));
            }
            let num = hypergeom_numerators(&d, i).pop().unwrap_or_default();
            let den = hypergeom_denominator(&d);
            Ok(Evaluated::exact(BigRational::new(num.into(), den.into())))
        }
        Err(_) if params.log2_keys <= 1000.0 => {
            let n = params.log2_keys.exp2();
            let class = params.log2_class_size().exp2();
            let s = params.r * n;
            let i = i as f64;
            if i < 1.0 || i > class {
                return Ok(Evaluated::approx(Prob::ZERO));
            }
            let ln = match (
                ln_binomial(s - 1.0, i - 1.0),
                ln_binomial(n - s, class - i),
                ln_binomial(n - 1.0, class - 1.0),
            ) {
                (Some(a), Some(b), Some(c)) => a + b - c,
                _ => return Ok(Evaluated::approx(Prob::ZERO)),
            };
            Ok(Evaluated::approx(Prob::from_log2(
                ln / std::f64::consts::LN_2,
            )))
        }
        Err(e) => Err(e),
    }
}

/// Exact P(X ≤ ε·|𝓗|/|𝓣|): the chance that Alice's pair leaves Eve few enough
/// keys to forge with certainty. The upper summation limit is
/// ⌊ε·|𝓗|/|𝓣|⌋.
pub fn weak_pair_prob_exact(params: &BoundParams) -> Result<BigRational> {
    let d = params.desk()?;
    let upto = d
        .epsilon
        .floor_threshold(d.keys, d.tags)
        .min(d.class_size());
    if upto == 0 {
        return Ok(BigRational::zero());
    }
    let num: BigUint = hypergeom_numerators(&d, upto).into_iter().sum();
    Ok(BigRational::new(
        num.into(),
        hypergeom_denominator(&d).into(),
    ))
}

/// Σᵢ P(X = i) over the whole support, exactly; 1 for valid parameters.
pub fn hypergeom_total_mass(params: &BoundParams) -> Result<BigRational> {
    let d = params.desk()?;
    let num: BigUint = hypergeom_numerators(&d, d.class_size()).into_iter().sum();
    Ok(BigRational::new(
        num.into(),
        hypergeom_denominator(&d).into(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChebyshevMode {
    /// σ²/(μ − ε|𝓗|/|𝓣|)² with the exact hypergeometric moments.
    ExactMoments,
    /// ((1 − r)/r)·(|𝓣|/|𝓗|), the large-key, r ≫ ε limit.
    Asymptotic,
}

enum MomentValues {
    Exact { mu: BigRational, var: BigRational },
    Float { mu: f64, var: f64 },
    Log { log2_mu: f64, log2_var: f64 },
}

fn moment_values(params: &BoundParams) -> MomentValues {
    if let Ok(d) = params.desk() {
        let class = d.class_size();
        let one = BigRational::one();
        let var = if class <= 1 || class == d.keys {
            BigRational::zero()
        } else {
            let q = ratio(d.surviving - 1, d.keys - 1);
            BigRational::from_integer((class - 1).into())
                * &q
                * (&one - &q)
                * ratio(d.keys - class, d.keys - 2)
        };
        let mu = BigRational::from_integer((class - 1).into()) * ratio(d.surviving - 1, d.keys - 1)
            + one;
        return MomentValues::Exact { mu, var };
    }
    if params.log2_keys < LOG_MOMENTS_FROM_LOG2 {
        let n = params.log2_keys.exp2();
        let class = params.log2_class_size().exp2();
        let q = if n > 1.0 {
            (params.r * n - 1.0).max(0.0) / (n - 1.0)
        } else {
            1.0
        };
        let mu = (class - 1.0) * q + 1.0;
        let var = if class <= 1.0 || n <= 2.0 {
            0.0
        } else {
            (class - 1.0) * q * (1.0 - q) * (n - class) / (n - 2.0)
        };
        return MomentValues::Float { mu, var };
    }
    let r = params.r;
    let log2_class = params.log2_class_size();
    let log2_mu = log2_class + r.log2();
    let log2_var = log2_class + (r * (1.0 - r)).log2() + (1.0 - (-params.log2_tags).exp2()).log2();
    MomentValues::Log { log2_mu, log2_var }
}

/// Mean and standard deviation of X.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub log2_mu: f64,
    /// log₂σ; absent when σ = 0.
    pub log2_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_exact: Option<String>,
}

pub fn moments(params: &BoundParams) -> Moments {
    let finite = |x: f64| x.is_finite().then_some(x);
    match moment_values(params) {
        MomentValues::Exact { mu, var } => Moments {
            log2_mu: log2_rational(&mu),
            log2_sigma: (!var.is_zero()).then(|| log2_rational(&var) / 2.0),
            mu_exact: Some(format_rational(&mu)),
            variance_exact: Some(format_rational(&var)),
        },
        MomentValues::Float { mu, var } => Moments {
            log2_mu: mu.log2(),
            log2_sigma: finite(var.log2() / 2.0),
            mu_exact: None,
            variance_exact: None,
        },
        MomentValues::Log { log2_mu, log2_var } => Moments {
            log2_mu,
            log2_sigma: finite(log2_var / 2.0),
            mu_exact: None,
            variance_exact: None,
        },
    }
}

/// Chebyshev bound on P(X ≤ ε·|𝓗|/|𝓣|).
///
/// The exact-moments form needs μ > ε·|𝓗|/|𝓣|; otherwise the inequality
/// cannot be applied in this direction and a domain error is returned.
pub fn chebyshev_bound(params: &BoundParams, mode: ChebyshevMode) -> Result<Evaluated> {
    match mode {
        ChebyshevMode::Asymptotic => {
            if params.r >= 1.0 {
                return Ok(Evaluated::approx(Prob::ZERO));
            }
            let log2 = ((1.0 - params.r) / params.r).log2() + params.log2_tags - params.log2_keys;
            Ok(Evaluated::approx(Prob::from_log2(log2)))
        }
        ChebyshevMode::ExactMoments => {
            let invalid = || domain("mean does not exceed ε|H|/|T|; Chebyshev step does not apply");
            match moment_values(params) {
                MomentValues::Exact { mu, var } => {
                    let d = params.desk()?;
                    let gap = mu - d.good_threshold();
                    if !gap.is_positive() {
                        return Err(invalid());
                    }
                    Ok(Evaluated::exact(var / (&gap * &gap)))
                }
                MomentValues::Float { mu, var } => {
                    let gap = mu - params.log2_good_threshold().exp2();
                    if gap <= 0.0 {
                        return Err(invalid());
                    }
                    Ok(Evaluated::approx(Prob::from_f64(var / (gap * gap))))
                }
                MomentValues::Log { log2_var, .. } => {
                    let margin = params.r - params.epsilon.to_f64();
                    if margin <= 0.0 {
                        return Err(invalid());
                    }
                    let log2_gap = params.log2_class_size() + margin.log2();
                    Ok(Evaluated::approx(Prob::from_log2(
                        log2_var - 2.0 * log2_gap,
                    )))
                }
            }
        }
    }
}

/// Number of good subsets in the engineered partition and the chance that the
/// key lands in one of them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EngineeredAttack {
    /// n = (1 − r)|𝓗| / ((1 − ε)|𝓗|/|𝓣|), as a real number.
    pub n_good_subsets: f64,
    pub log2_n_good_subsets: Option<f64>,
    /// min(1, ((1 − r)/r)·(ε/(1 − ε))).
    pub success: Evaluated,
}

pub fn engineered_attack_prob(params: &BoundParams) -> Result<EngineeredAttack> {
    let log2_odds = params
        .epsilon
        .log2_odds()
        .ok_or_else(|| domain("epsilon = 1 leaves no room for good subsets"))?;
    if params.r >= 1.0 {
        return Ok(EngineeredAttack {
            n_good_subsets: 0.0,
            log2_n_good_subsets: None,
            success: Evaluated::exact(BigRational::zero()),
        });
    }
    let eps = params.epsilon;
    let log2_one_minus_eps =
        ((eps.denom() - eps.numer()) as f64).log2() - (eps.denom() as f64).log2();
    let log2_n = (1.0 - params.r).log2() + params.log2_tags - log2_one_minus_eps;
    let success = match params.counts {
        Some(Counts {
            keys,
            surviving: Some(s),
            ..
        }) => {
            let odds = ratio(eps.numer(), eps.denom() - eps.numer());
            Evaluated::exact(ratio(keys - s, s) * odds)
        }
        _ => Evaluated::approx(Prob::from_log2(
            ((1.0 - params.r) / params.r).log2() + log2_odds,
        )),
    };
    Ok(EngineeredAttack {
        n_good_subsets: log2_n.exp2(),
        log2_n_good_subsets: Some(log2_n),
        success,
    })
}

/// Whether |𝓣|/|𝓗| < ε < ε/(1 − ε), compared exactly for power-of-two sizes.
pub fn partition_gain_ordering(log2_keys: u32, log2_tags: u32, epsilon: Epsilon) -> bool {
    if log2_tags > log2_keys || epsilon.is_one() {
        return false;
    }
    let two = BigInt::from(2u8);
    let ratio_th = BigRational::new(
        BigInt::one(),
        num_traits::pow(two, (log2_keys - log2_tags) as usize),
    );
    let eps = epsilon.to_big();
    let odds = ratio(epsilon.numer(), epsilon.denom() - epsilon.numer());
    ratio_th < eps && eps < odds
}

/// Expected time until the first success, as a power of ten.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BreakTime {
    log10_seconds: f64,
}

impl BreakTime {
    pub fn log10_seconds(&self) -> f64 {
        self.log10_seconds
    }

    pub fn log10_years(&self) -> f64 {
        self.log10_seconds - SECONDS_PER_YEAR.log10()
    }

    pub fn seconds(&self) -> f64 {
        10f64.powf(self.log10_seconds)
    }

    pub fn years(&self) -> f64 {
        10f64.powf(self.log10_years())
    }

    pub fn months(&self) -> f64 {
        self.years() * 12.0
    }

    pub fn is_infinite(&self) -> bool {
        self.log10_seconds == f64::INFINITY
    }
}

impl Serialize for BreakTime {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            infinite: bool,
            log10_seconds: Option<f64>,
            log10_years: Option<f64>,
            years: Option<f64>,
        }
        let finite = !self.is_infinite();
        let years = (finite && self.log10_years() < 300.0).then(|| self.years());
        Repr {
            infinite: !finite,
            log10_seconds: finite.then_some(self.log10_seconds),
            log10_years: finite.then(|| self.log10_years()),
            years,
        }
        .serialize(serializer)
    }
}

/// (1/p)·(1/rounds_per_second + overhead_seconds_per_attempt).
///
/// A zero success probability gives an infinite time.
pub fn expected_break_time(
    success_per_round: Prob,
    rounds_per_second: f64,
    overhead_seconds_per_attempt: f64,
) -> Result<BreakTime> {
    if !(rounds_per_second > 0.0 && rounds_per_second.is_finite()) {
        return Err(domain("rounds_per_second must be positive"));
    }
    if !(overhead_seconds_per_attempt >= 0.0 && overhead_seconds_per_attempt.is_finite()) {
        return Err(domain("overhead must be non-negative"));
    }
    if success_per_round.is_zero() {
        return Ok(BreakTime {
            log10_seconds: f64::INFINITY,
        });
    }
    let per_attempt = 1.0 / rounds_per_second + overhead_seconds_per_attempt;
    Ok(BreakTime {
        log10_seconds: per_attempt.log10() - success_per_round.log10(),
    })
}

/// Rates used to turn per-round probabilities into expected break times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rates {
    /// Authentication rounds per second available to the certain-forgery and
    /// engineered attacks.
    pub rounds_per_second: f64,
    /// Tag guesses per second a guessing adversary can hide in the noise.
    pub guesses_per_second: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates {
            rounds_per_second: 1000.0,
            guesses_per_second: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakTimes {
    pub guessing_after_pair: BreakTime,
    pub waiting_for_weak_pair: BreakTime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engineered: Option<BreakTime>,
}

/// Every formula evaluated at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub rates: Rates,
    pub guess_uniform: Prob,
    pub guess_after_pair: Prob,
    pub guess_partial: Prob,
    pub average_before_tag: Prob,
    pub min_entropy_bits: f64,
    pub moments: Moments,
    pub weak_pair_exact: Option<Evaluated>,
    pub chebyshev_exact_moments: Option<Evaluated>,
    pub chebyshev_asymptotic: Evaluated,
    pub engineered: Option<EngineeredAttack>,
    pub break_times: BreakTimes,
    /// Why optional entries are absent.
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn evaluate(params: &BoundParams, rates: Rates) -> Result<Self> {
        let mut notes = Vec::new();
        let weak_pair_exact = match weak_pair_prob_exact(params) {
            Ok(v) => Some(Evaluated::exact(v)),
            Err(e) => {
                notes.push(format!("weak_pair_exact: {e}"));
                None
            }
        };
        let chebyshev_exact_moments = match chebyshev_bound(params, ChebyshevMode::ExactMoments) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("chebyshev_exact_moments: {e}"));
                None
            }
        };
        let chebyshev_asymptotic = chebyshev_bound(params, ChebyshevMode::Asymptotic)?;
        let engineered = match engineered_attack_prob(params) {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("engineered: {e}"));
                None
            }
        };
        let guess_after_pair = guess_prob_after_pair(params);
        let break_times = BreakTimes {
            guessing_after_pair: expected_break_time(
                guess_after_pair,
                rates.guesses_per_second,
                0.0,
            )?,
            waiting_for_weak_pair: expected_break_time(
                chebyshev_asymptotic.prob,
                rates.rounds_per_second,
                0.0,
            )?,
            engineered: engineered
                .as_ref()
                .map(|e| expected_break_time(e.success.prob, rates.rounds_per_second, 0.0))
                .transpose()?,
        };
        Ok(BoundReport {
            params: params.clone(),
            rates,
            guess_uniform: guess_prob_uniform(params),
            guess_after_pair,
            guess_partial: guess_prob_partial(params),
            average_before_tag: average_success_before_tag(params),
            min_entropy_bits: min_entropy_of_elimination(params),
            moments: moments(params),
            weak_pair_exact,
            chebyshev_exact_moments,
            chebyshev_asymptotic,
            engineered,
            break_times,
            notes,
        })
    }

    /// Column order of [`BoundReport::csv_record`].
    pub const CSV_COLUMNS: [&'static str; 20] = [
        "log2_keys",
        "log2_tags",
        "epsilon",
        "r",
        "guess_uniform_log2",
        "guess_after_pair_log2",
        "guess_partial_log2",
        "average_before_tag_log2",
        "min_entropy_bits",
        "mu_log2",
        "sigma_log2",
        "weak_pair_exact",
        "weak_pair_log2",
        "chebyshev_exact_moments_log2",
        "chebyshev_asymptotic_log2",
        "n_good_subsets",
        "engineered_log2",
        "guessing_log10_years",
        "weak_pair_wait_log10_years",
        "engineered_log10_years",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        fn num(x: f64) -> String {
            if x == f64::NEG_INFINITY {
                "-inf".into()
            } else if x == f64::INFINITY {
                "inf".into()
            } else {
                format!("{x}")
            }
        }
        fn opt(x: Option<f64>) -> String {
            x.map(num).unwrap_or_default()
        }
        let p = &self.params;
        vec![
            num(p.log2_keys),
            num(p.log2_tags),
            p.epsilon.to_string(),
            num(p.r),
            num(self.guess_uniform.log2()),
            num(self.guess_after_pair.log2()),
            num(self.guess_partial.log2()),
            num(self.average_before_tag.log2()),
            num(self.min_entropy_bits),
            num(self.moments.log2_mu),
            opt(self.moments.log2_sigma),
            self.weak_pair_exact
                .as_ref()
                .and_then(|e| e.exact.as_ref())
                .map(format_rational)
                .unwrap_or_default(),
            opt(self.weak_pair_exact.as_ref().map(|e| e.prob.log2())),
            opt(self.chebyshev_exact_moments.as_ref().map(|e| e.prob.log2())),
            num(self.chebyshev_asymptotic.prob.log2()),
            opt(self.engineered.as_ref().map(|e| e.n_good_subsets)),
            opt(self.engineered.as_ref().map(|e| e.success.prob.log2())),
            num(self.break_times.guessing_after_pair.log10_years()),
            num(self.break_times.waiting_for_weak_pair.log10_years()),
            opt(self.break_times.engineered.map(|b| b.log10_years())),
        ]
    }
}
