//! ε-almost strongly universal₂ hash families.
//!
//! A family is an indexed set of functions `k ↦ h_k : 𝓜 → 𝓣`. It is ε-ASU₂
//! when
//!
//! 1. for every message `m₁` and tag `t₁`, exactly `|𝓗|/|𝓣|` keys map `m₁` to
//!    `t₁`, and
//! 2. for every further message `m₂ ≠ m₁` and tag `t₂`, at most `ε·|𝓗|/|𝓣|` of
//!    those keys also map `m₂` to `t₂`.
//!
//! Three concrete constructions are available, all small enough to enumerate:
//!
//! * `affine`: `h_{a,b}(m) = a·m + b mod p` over a prime field, keys encoded as
//!   `k = a·p + b`. It is 1/p-ASU₂, the smallest ε possible.
//! * `binary`: `h_{a,b}(m) = low_bits(a·m ⊕ b)` over GF(2^k), keys encoded as
//!   `k = a·2^k + b`. Truncating to `τ` tag bits gives a 2^-τ-ASU₂ family with
//!   power-of-two message and tag sets, which is what the salted wire layout
//!   needs.
//! * `table`: an explicit `|𝓗| × |𝓜|` table, for counterexamples.
//!
//! Affine and binary families may claim a larger ε than their natural one;
//! condition 2 is an upper bound, so the claim stays valid and only changes
//! the "good subset" threshold ε·|𝓗|/|𝓣| used by the adversary.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::epsilon::Epsilon;
use crate::error::{budget, domain, Result};
use crate::gf2::{self, Gf2};
use crate::{KeyIndex, Message, Tag};

/// Largest key set handled by concrete families and [`KeySet`](crate::KeySet).
pub const MAX_KEYS: u64 = 1 << 26;

/// Upper limit on `|𝓗|·|𝓜|²` for [`verify_asu2`].
pub const CERTIFY_BUDGET: u128 = 1_000_000_000;

/// Serialisable description of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Affine {
        p: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<Epsilon>,
    },
    Binary {
        bits: u32,
        tag_bits: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<Epsilon>,
    },
    Table {
        tags: Vec<Vec<Tag>>,
        num_tags: u64,
        epsilon: Epsilon,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<HashFamily> {
        HashFamily::from_spec(self.clone())
    }
}

/// Identifies the family a [`KeySet`](crate::KeySet) refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FamilyId(u64);

#[derive(Clone, Debug)]
enum Evaluator {
    Affine {
        p: u64,
    },
    Binary {
        field: Gf2,
        bits: u32,
        tag_mask: u64,
    },
    Table {
        tags: Arc<[Tag]>,
        num_messages: u64,
    },
}

#[derive(Clone, Debug)]
pub struct HashFamily {
    spec: FamilySpec,
    id: FamilyId,
    num_keys: u64,
    num_messages: u64,
    num_tags: u64,
    epsilon: Epsilon,
    eval: Evaluator,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn claimed(natural: Epsilon, claim: Option<Epsilon>) -> Result<Epsilon> {
    match claim {
        None => Ok(natural),
        Some(e) if e >= natural => Ok(e),
        Some(e) => Err(domain(format!(
            "claimed epsilon {e} is below the construction's {natural}"
        ))),
    }
}

impl HashFamily {
    pub fn from_spec(spec: FamilySpec) -> Result<Self> {
        let (num_keys, num_messages, num_tags, epsilon, eval) = match &spec {
            FamilySpec::Affine { p, epsilon } => {
                let p = *p;
                if !is_prime(p) {
                    return Err(domain(format!("{p} is not prime")));
                }
                if p.checked_mul(p).is_none_or(|k| k > MAX_KEYS) {
                    return Err(budget(format!("p = {p} gives more than 2^26 keys")));
                }
                let eps = claimed(Epsilon::new(1, p)?, *epsilon)?;
                (p * p, p, p, eps, Evaluator::Affine { p })
            }
            FamilySpec::Binary {
                bits,
                tag_bits,
                epsilon,
            } => {
                let (bits, tag_bits) = (*bits, *tag_bits);
                let field = Gf2::new(bits).ok_or_else(|| {
                    domain(format!(
                        "binary family needs 1 ≤ bits ≤ {}",
                        gf2::MAX_DEGREE
                    ))
                })?;
                if tag_bits == 0 || tag_bits > bits {
                    return Err(domain(format!("tag_bits must lie in 1..={bits}")));
                }
                let eps = claimed(Epsilon::new(1, 1 << tag_bits)?, *epsilon)?;
                let eval = Evaluator::Binary {
                    field,
                    bits,
                    tag_mask: (1 << tag_bits) - 1,
                };
                (1 << (2 * bits), 1 << bits, 1 << tag_bits, eps, eval)
            }
            FamilySpec::Table {
                tags,
                num_tags,
                epsilon,
            } => {
                let num_keys = tags.len() as u64;
                if num_keys == 0 {
                    return Err(domain("table has no keys"));
                }
                if num_keys > MAX_KEYS {
                    return Err(budget("table has more than 2^26 keys"));
                }
                let width = tags[0].len();
                if width == 0 {
                    return Err(domain("table has no messages"));
                }
                if tags.iter().any(|row| row.len() != width) {
                    return Err(domain("table is ragged"));
                }
                if *num_tags == 0 {
                    return Err(domain("num_tags must be positive"));
                }
                if let Some(bad) = tags.iter().flatten().find(|&&t| t as u64 >= *num_tags) {
                    return Err(domain(format!(
                        "tag {bad} out of range for {num_tags} tags"
                    )));
                }
                let flat: Arc<[Tag]> = tags.iter().flatten().copied().collect();
                let eval = Evaluator::Table {
                    tags: flat,
                    num_messages: width as u64,
                };
                (num_keys, width as u64, *num_tags, *epsilon, eval)
            }
        };
        if num_keys % num_tags != 0 {
            return Err(domain(format!(
                "|T| = {num_tags} does not divide |H| = {num_keys}"
            )));
        }
        if !epsilon.at_least_inverse_of(num_tags) {
            return Err(domain(format!(
                "epsilon {epsilon} is below 1/|T| = 1/{num_tags}"
            )));
        }
        let mut hasher = DefaultHasher::new();
        spec.hash(&mut hasher);
        Ok(HashFamily {
            id: FamilyId(hasher.finish()),
            spec,
            num_keys,
            num_messages,
            num_tags,
            epsilon,
            eval,
        })
    }

    pub fn affine(p: u64) -> Result<Self> {
        Self::from_spec(FamilySpec::Affine { p, epsilon: None })
    }

    pub fn binary(bits: u32, tag_bits: u32) -> Result<Self> {
        Self::from_spec(FamilySpec::Binary {
            bits,
            tag_bits,
            epsilon: None,
        })
    }

    pub fn table(tags: Vec<Vec<Tag>>, num_tags: u64, epsilon: Epsilon) -> Result<Self> {
        Self::from_spec(FamilySpec::Table {
            tags,
            num_tags,
            epsilon,
        })
    }

    /// Same functions, claiming a (larger) ε.
    pub fn with_epsilon(&self, epsilon: Epsilon) -> Result<Self> {
        let spec = match self.spec.clone() {
            FamilySpec::Affine { p, .. } => FamilySpec::Affine {
                p,
                epsilon: Some(epsilon),
            },
            FamilySpec::Binary { bits, tag_bits, .. } => FamilySpec::Binary {
                bits,
                tag_bits,
                epsilon: Some(epsilon),
            },
            FamilySpec::Table { tags, num_tags, .. } => FamilySpec::Table {
                tags,
                num_tags,
                epsilon,
            },
        };
        Self::from_spec(spec)
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    pub fn num_keys(&self) -> u64 {
        self.num_keys
    }

    pub fn num_messages(&self) -> u64 {
        self.num_messages
    }

    pub fn num_tags(&self) -> u64 {
        self.num_tags
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// |𝓗|/|𝓣|, the number of keys mapping any message to any tag.
    pub fn class_size(&self) -> u64 {
        self.num_keys / self.num_tags
    }

    /// ⌊ε·|𝓗|/|𝓣|⌋.
    pub fn good_threshold(&self) -> u64 {
        self.epsilon.floor_threshold(self.num_keys, self.num_tags)
    }

    /// Whether a subset of `count` keys is small enough (≤ ε·|𝓗|/|𝓣|) to be
    /// "good" for the adversary.
    pub fn admits_good(&self, count: u64) -> bool {
        self.epsilon.admits(count, self.num_keys, self.num_tags)
    }

    /// Number of whole bits addressable in the message set, ⌊log₂|𝓜|⌋.
    pub fn message_bits(&self) -> u32 {
        63 - self.num_messages.leading_zeros()
    }

    pub fn eval(&self, key: KeyIndex, message: Message) -> Result<Tag> {
        if key as u64 >= self.num_keys {
            return Err(domain(format!(
                "key {key} out of range (|H| = {})",
                self.num_keys
            )));
        }
        if message >= self.num_messages {
            return Err(domain(format!(
                "message {message} out of range (|M| = {})",
                self.num_messages
            )));
        }
        Ok(self.eval_unchecked(key, message))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, key: KeyIndex, message: Message) -> Tag {
        let key = key as u64;
        match &self.eval {
            Evaluator::Affine { p } => {
                let (a, b) = (key / p, key % p);
                ((a * message + b) % p) as Tag
            }
            Evaluator::Binary {
                field,
                bits,
                tag_mask,
            } => {
                let (a, b) = (key >> bits, key & ((1 << bits) - 1));
                ((field.mul(a, message) ^ b) & tag_mask) as Tag
            }
            Evaluator::Table { tags, num_messages } => {
                tags[(key * num_messages + message) as usize]
            }
        }
    }

    pub(crate) fn check_message(&self, message: Message) -> Result<()> {
        if message >= self.num_messages {
            return Err(domain(format!(
                "message {message} out of range (|M| = {})",
                self.num_messages
            )));
        }
        Ok(())
    }

    pub(crate) fn check_tag(&self, tag: Tag) -> Result<()> {
        if tag as u64 >= self.num_tags {
            return Err(domain(format!(
                "tag {tag} out of range (|T| = {})",
                self.num_tags
            )));
        }
        Ok(())
    }
}

/// `h_key(message)`.
pub fn eval_tag(family: &HashFamily, key: KeyIndex, message: Message) -> Result<Tag> {
    family.eval(key, message)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition1Violation {
    pub message: Message,
    pub tag: Tag,
    pub count: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition2Violation {
    pub m1: Message,
    pub t1: Tag,
    pub m2: Message,
    pub t2: Tag,
    pub count: u64,
    /// ε·|𝓗|/|𝓣| as an exact fraction.
    pub allowed: String,
}

/// Complete result of an exhaustive ε-ASU₂ check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Asu2Certificate {
    pub holds: bool,
    pub condition1_violation: Option<Condition1Violation>,
    pub condition2_violation: Option<Condition2Violation>,
    /// Largest `|{k : h_k(m₁)=t₁ ∧ h_k(m₂)=t₂}|` over all `m₁ ≠ m₂`, `t₁`, `t₂`.
    pub worst_condition2_count: u64,
}

#[derive(Default)]
struct PerMessage {
    cond1: Option<Condition1Violation>,
    cond2: Option<Condition2Violation>,
    worst: u64,
}

/// Exhaustively checks both ε-ASU₂ conditions.
///
/// Refuses (rather than samples) families with `|𝓗|·|𝓜|² > 10⁹`.
pub fn verify_asu2(family: &HashFamily) -> Result<Asu2Certificate> {
    let keys = family.num_keys;
    let messages = family.num_messages;
    let tags = family.num_tags as usize;
    let work = keys as u128 * messages as u128 * messages as u128;
    if work > CERTIFY_BUDGET {
        return Err(budget(format!(
            "certification needs {work} checks, budget is {CERTIFY_BUDGET}"
        )));
    }
    let eps = family.epsilon;
    let allowed = {
        let r = Ratio::new(
            eps.numer() as u128 * keys as u128,
            eps.denom() as u128 * tags as u128,
        );
        format!("{}/{}", r.numer(), r.denom())
    };
    let expected = family.class_size();

    let per_message: Vec<PerMessage> = (0..messages)
        .into_par_iter()
        .map(|m1| {
            let mut out = PerMessage::default();
            let tags1: Vec<Tag> = (0..keys as KeyIndex)
                .map(|k| family.eval_unchecked(k, m1))
                .collect();

            // bucket keys by their tag on m1
            let mut starts = vec![0usize; tags + 1];
            for &t in &tags1 {
                starts[t as usize + 1] += 1;
            }
            for t in 0..tags {
                starts[t + 1] += starts[t];
            }
            for t in 0..tags {
                let count = (starts[t + 1] - starts[t]) as u64;
                if count != expected && out.cond1.is_none() {
                    out.cond1 = Some(Condition1Violation {
                        message: m1,
                        tag: t as Tag,
                        count,
                        expected,
                    });
                }
            }
            let mut fill = starts.clone();
            let mut order = vec![0 as KeyIndex; keys as usize];
            for (k, &t) in tags1.iter().enumerate() {
                order[fill[t as usize]] = k as KeyIndex;
                fill[t as usize] += 1;
            }

            let mut counts = vec![0u64; tags];
            let mut touched = Vec::new();
            let mut tags2 = vec![0 as Tag; keys as usize];
            for m2 in m1 + 1..messages {
                for (k, slot) in tags2.iter_mut().enumerate() {
                    *slot = family.eval_unchecked(k as KeyIndex, m2);
                }
                for t1 in 0..tags {
                    for &k in &order[starts[t1]..starts[t1 + 1]] {
                        let t2 = tags2[k as usize] as usize;
                        if counts[t2] == 0 {
                            touched.push(t2);
                        }
                        counts[t2] += 1;
                    }
                    if out.cond2.is_none() {
                        let first_bad = touched
                            .iter()
                            .copied()
                            .filter(|&t2| !eps.admits(counts[t2], keys, tags as u64))
                            .min();
                        if let Some(t2) = first_bad {
                            out.cond2 = Some(Condition2Violation {
                                m1,
                                t1: t1 as Tag,
                                m2,
                                t2: t2 as Tag,
                                count: counts[t2],
                                allowed: allowed.clone(),
                            });
                        }
                    }
                    for t2 in touched.drain(..) {
                        out.worst = out.worst.max(counts[t2]);
                        counts[t2] = 0;
                    }
                }
            }
            out
        })
        .collect();

    let mut cert = Asu2Certificate {
        holds: true,
        condition1_violation: None,
        condition2_violation: None,
        worst_condition2_count: 0,
    };
    for pm in per_message {
        if cert.condition1_violation.is_none() {
            cert.condition1_violation = pm.cond1;
        }
        if cert.condition2_violation.is_none() {
            cert.condition2_violation = pm.cond2;
        }
        cert.worst_condition2_count = cert.worst_condition2_count.max(pm.worst);
    }
    cert.holds = cert.condition1_violation.is_none() && cert.condition2_violation.is_none();
    Ok(cert)
}

/// Key length in bits of the 2/|𝓣|-ASU₂ family built by iterated composition,
/// `|𝓗| = |𝓣|^(4·log log |𝓜|)` with `|𝓜| = 2^message_bits`.
///
/// Logarithms are base 2 and `log₂(message_bits)` is rounded up, which gives
/// 2176 bits for a 100 kbit message and a 32-bit tag.
pub fn wc_key_length(message_bits: u64, tag_bits: u64) -> Result<u64> {
    if message_bits < 2 {
        return Err(domain("message_bits must be at least 2"));
    }
    if tag_bits == 0 {
        return Err(domain("tag_bits must be positive"));
    }
    let ceil_log2 = 64 - u64::from((message_bits - 1).leading_zeros());
    tag_bits
        .checked_mul(4 * ceil_log2)
        .ok_or_else(|| domain("key length overflows u64"))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force count of keys with h(m1)=t1 and h(m2)=t2, independent of
    /// the bucketing in `verify_asu2`.
    fn pair_count(f: &HashFamily, m1: Message, t1: Tag, m2: Message, t2: Tag) -> u64 {
        (0..f.num_keys() as KeyIndex)
            .filter(|&k| f.eval(k, m1).unwrap() == t1 && f.eval(k, m2).unwrap() == t2)
            .count() as u64
    }

    fn brute_worst(f: &HashFamily) -> u64 {
        let mut worst = 0;
        for m1 in 0..f.num_messages() {
            for m2 in 0..f.num_messages() {
                if m1 == m2 {
                    continue;
                }
                for t1 in 0..f.num_tags() as Tag {
                    for t2 in 0..f.num_tags() as Tag {
                        worst = worst.max(pair_count(f, m1, t1, m2, t2));
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn eval_examples() {
        let f = HashFamily::affine(5).unwrap();
        assert_eq!(f.eval(5, 3).unwrap(), 3); // (a=1, b=0)
        assert_eq!(f.eval(2 * 5 + 3, 2).unwrap(), 2); // (2·2+3) mod 5
        let constant = HashFamily::table(vec![vec![0, 0, 0]], 1, Epsilon::ONE).unwrap();
        for m in 0..3 {
            assert_eq!(constant.eval(0, m).unwrap(), 0);
        }
        assert!(f.eval(25, 0).is_err());
        assert!(f.eval(0, 5).is_err());
    }

    #[test]
    fn affine_construction() {
        let f = HashFamily::affine(5).unwrap();
        assert_eq!((f.num_keys(), f.num_tags()), (25, 5));
        assert_eq!(f.epsilon(), Epsilon::new(1, 5).unwrap());
        let f = HashFamily::affine(2).unwrap();
        assert_eq!((f.num_keys(), f.num_tags()), (4, 2));
        assert_eq!(f.epsilon(), Epsilon::new(1, 2).unwrap());
        assert!(matches!(
            HashFamily::affine(4),
            Err(crate::Error::Domain(_))
        ));
        assert!(HashFamily::affine(1).is_err());
    }

    #[test]
    fn table_construction_errors() {
        assert!(HashFamily::table(vec![vec![0], vec![1], vec![0]], 2, Epsilon::ONE).is_err());
        assert!(HashFamily::table(vec![vec![0, 1], vec![1]], 2, Epsilon::ONE).is_err());
        assert!(HashFamily::table(vec![vec![0], vec![2]], 2, Epsilon::ONE).is_err());
        // ε below 1/|T|
        let e = Epsilon::new(1, 4).unwrap();
        assert!(HashFamily::table(vec![vec![0], vec![1]], 2, e).is_err());
        let degenerate = HashFamily::table(vec![vec![0]], 1, Epsilon::ONE).unwrap();
        assert!(verify_asu2(&degenerate).unwrap().holds);
    }

    #[test]
    fn affine_p5_certificate() {
        let f = HashFamily::affine(5).unwrap();
        let cert = verify_asu2(&f).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.worst_condition2_count, 1);
        assert_eq!(brute_worst(&f), 1);
    }

    #[test]
    fn constant_family_fails_condition2() {
        let f = HashFamily::table(vec![vec![0, 0], vec![1, 1]], 2, Epsilon::new(1, 2).unwrap())
            .unwrap();
        let cert = verify_asu2(&f).unwrap();
        assert!(!cert.holds);
        assert!(cert.condition1_violation.is_none());
        let v = cert.condition2_violation.unwrap();
        assert_eq!((v.m1, v.t1, v.m2, v.t2, v.count), (0, 0, 1, 0, 1));
        assert_eq!(v.allowed, "1/2");
    }

    #[test]
    fn all_functions_family() {
        let f = HashFamily::table(
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            2,
            Epsilon::new(1, 2).unwrap(),
        )
        .unwrap();
        let cert = verify_asu2(&f).unwrap();
        assert!(cert.holds);
        assert_eq!(cert.worst_condition2_count, 1);
    }

    #[test]
    fn condition1_witness() {
        // key 0 and key 1 both map message 0 to tag 0
        let f = HashFamily::table(vec![vec![0, 0], vec![0, 1]], 2, Epsilon::ONE).unwrap();
        let cert = verify_asu2(&f).unwrap();
        let v = cert.condition1_violation.unwrap();
        assert_eq!((v.message, v.tag, v.count, v.expected), (0, 0, 2, 1));
    }

    #[test]
    fn binary_family_matches_brute_force() {
        for (bits, tag_bits) in [(2, 1), (2, 2), (3, 2), (3, 3)] {
            let f = HashFamily::binary(bits, tag_bits).unwrap();
            let cert = verify_asu2(&f).unwrap();
            assert!(cert.holds, "bits {bits} tag_bits {tag_bits}");
            assert_eq!(cert.worst_condition2_count, brute_worst(&f));
            assert_eq!(
                cert.worst_condition2_count,
                f.num_keys() / (f.num_tags() * f.num_tags())
            );
        }
    }

    #[test]
    fn claimed_epsilon_must_not_undercut_construction() {
        let f = HashFamily::binary(4, 2).unwrap();
        assert!(f.with_epsilon(Epsilon::new(1, 2).unwrap()).is_ok());
        assert!(f.with_epsilon(Epsilon::new(1, 8).unwrap()).is_err());
        let g = f.with_epsilon(Epsilon::new(1, 2).unwrap()).unwrap();
        assert_ne!(f.id(), g.id());
        assert!(verify_asu2(&g).unwrap().holds);
    }

    #[test]
    fn budget_is_enforced() {
        let f = HashFamily::binary(12, 4).unwrap();
        assert!(matches!(verify_asu2(&f), Err(crate::Error::Budget(_))));
    }

    #[test]
    fn key_length() {
        assert_eq!(wc_key_length(100_000, 32).unwrap(), 2176);
        assert_eq!(wc_key_length(4, 1).unwrap(), 8);
        assert_eq!(wc_key_length(65536, 32).unwrap(), 2048);
        assert_eq!(wc_key_length(65537, 32).unwrap(), 2176);
        assert!(wc_key_length(1, 32).is_err());
        assert!(wc_key_length(0, 32).is_err());
    }

    #[test]
    fn spec_json_forms() {
        let spec: FamilySpec = serde_json::from_str(r#"{"kind":"affine","p":5}"#).unwrap();
        assert_eq!(
            spec,
            FamilySpec::Affine {
                p: 5,
                epsilon: None
            }
        );
        let spec: FamilySpec = serde_json::from_str(
            r#"{"kind":"table","tags":[[0,0],[1,1]],"num_tags":2,"epsilon":"1/2"}"#,
        )
        .unwrap();
        assert!(spec.build().is_ok());
        assert_eq!(
            serde_json::to_string(&FamilySpec::Affine {
                p: 5,
                epsilon: None
            })
            .unwrap(),
            r#"{"kind":"affine","p":5}"#
        );
    }
}
