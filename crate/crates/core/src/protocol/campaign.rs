use std::ops::Add;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::round::{DesignSummary, Scenario};
use super::{
    CampaignConfig, Capability, Partition, RoundOutcome, RoundTranscript, Strategy, Variant,
};
use crate::bounds::{engineered_attack_prob, weak_pair_prob_exact, BoundParams};
use crate::epsilon::format_rational;
use crate::error::{config, Result};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    /// The rate should match the value.
    Point,
    /// The rate should not exceed the value.
    Ceiling,
}

/// The analytic value a campaign is compared against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub kind: PredictionKind,
    pub source: String,
    pub value: f64,
    pub log2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl Prediction {
    fn new(kind: PredictionKind, source: &str, exact: BigRational) -> Self {
        let exact = exact.min(BigRational::one());
        let value = exact.to_f64().unwrap_or(0.0);
        Prediction {
            kind,
            source: source.to_string(),
            value,
            log2: (value > 0.0).then(|| value.log2()),
            exact: Some(format_rational(&exact)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Disagree,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    attempts: u64,
    forgeries: u64,
    detections: u64,
    honest_accepted: u64,
}

impl From<RoundOutcome> for Tally {
    fn from(o: RoundOutcome) -> Self {
        Tally {
            trials: 1,
            attempts: o.eve_attempted as u64,
            forgeries: o.forgery_accepted as u64,
            detections: o.eve_detected as u64,
            honest_accepted: o.honest_accepted as u64,
        }
    }
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            trials: self.trials + o.trials,
            attempts: self.attempts + o.attempts,
            forgeries: self.forgeries + o.forgeries,
            detections: self.detections + o.detections,
            honest_accepted: self.honest_accepted + o.honest_accepted,
        }
    }
}

/// Aggregate of a campaign. The success rate is forgeries per round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessStats {
    pub trials: u64,
    pub attempts: u64,
    pub forgeries: u64,
    pub detections: u64,
    pub honest_accepted: u64,
    pub success_rate: f64,
    /// √(p̂(1 − p̂)/n).
    pub standard_error: f64,
    pub wilson_95: [f64; 2],
    pub prediction: Option<Prediction>,
    /// Within three binomial standard errors of a point prediction, or at most
    /// three above a ceiling. The standard error is taken at the predicted
    /// value.
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSummary>,
}

impl SuccessStats {
    fn new(t: Tally, prediction: Option<Prediction>, design: Option<DesignSummary>) -> Self {
        let n = t.trials as f64;
        let p = t.forgeries as f64 / n;
        let verdict = prediction.as_ref().map(|pred| {
            let q = pred.value;
            let sigma = (q * (1.0 - q) / n).sqrt();
            let ok = match pred.kind {
                PredictionKind::Point if sigma == 0.0 => p == q,
                PredictionKind::Point => (p - q).abs() <= 3.0 * sigma,
                PredictionKind::Ceiling => p <= q + 3.0 * sigma,
            };
            if ok {
                Verdict::Agree
            } else {
                Verdict::Disagree
            }
        });
        SuccessStats {
            trials: t.trials,
            attempts: t.attempts,
            forgeries: t.forgeries,
            detections: t.detections,
            honest_accepted: t.honest_accepted,
            success_rate: p,
            standard_error: (p * (1.0 - p) / n).sqrt(),
            wilson_95: wilson(t.forgeries, t.trials),
            prediction,
            verdict,
            design,
        }
    }

    /// False only on an explicit disagreement.
    pub fn agrees(&self) -> bool {
        self.verdict != Some(Verdict::Disagree)
    }

    pub const CSV_COLUMNS: [&'static str; 13] = [
        "trials",
        "attempts",
        "forgeries",
        "detections",
        "honest_accepted",
        "success_rate",
        "standard_error",
        "wilson_low",
        "wilson_high",
        "prediction_kind",
        "prediction",
        "prediction_source",
        "verdict",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let pred = self.prediction.as_ref();
        vec![
            self.trials.to_string(),
            self.attempts.to_string(),
            self.forgeries.to_string(),
            self.detections.to_string(),
            self.honest_accepted.to_string(),
            self.success_rate.to_string(),
            self.standard_error.to_string(),
            self.wilson_95[0].to_string(),
            self.wilson_95[1].to_string(),
            pred.map(|p| match p.kind {
                PredictionKind::Point => "point".to_string(),
                PredictionKind::Ceiling => "ceiling".to_string(),
            })
            .unwrap_or_default(),
            pred.map(|p| p.value.to_string()).unwrap_or_default(),
            pred.map(|p| p.source.clone()).unwrap_or_default(),
            match self.verdict {
                Some(Verdict::Agree) => "agree".into(),
                Some(Verdict::Disagree) => "disagree".into(),
                None => String::new(),
            },
        ]
    }
}

fn wilson(successes: u64, n: u64) -> [f64; 2] {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    [(center - half).max(0.0), (center + half).min(1.0)]
}

fn predict(s: &Scenario) -> Option<Prediction> {
    use PredictionKind::{Ceiling, Point};
    let f = s.family();
    let zero = || {
        Prediction::new(
            Point,
            "adversary never attempts",
            BigRational::from_integer(0.into()),
        )
    };
    let params =
        || BoundParams::from_counts(f.num_keys(), f.num_tags(), f.epsilon(), s.surviving()).ok();
    match (s.variant(), s.strategy()) {
        (_, Strategy::Passive) => Some(zero()),
        (Variant::Plain, Strategy::BlindGuess) => None,
        (Variant::Plain, Strategy::InterceptCertain { capability }) => {
            let exact = weak_pair_prob_exact(&params()?).ok()?;
            let kind = if capability == Capability::Oracle {
                Point
            } else {
                Ceiling
            };
            Some(Prediction::new(kind, "weak-pair probability", exact))
        }
        (
            Variant::Plain,
            Strategy::Engineered {
                partition: Partition::Idealized,
                capability,
            },
        ) => {
            let e = engineered_attack_prob(&params()?).ok()?;
            let kind = if capability == Capability::Oracle {
                Point
            } else {
                Ceiling
            };
            Some(Prediction::new(
                kind,
                "engineered-partition probability",
                e.success.exact?,
            ))
        }
        (
            Variant::Plain,
            Strategy::Engineered {
                partition: Partition::Searched,
                ..
            },
        ) => None,
        (Variant::Salted { .. }, Strategy::InterceptCertain { .. }) => Some(zero()),
        (Variant::Salted { .. }, _) => {
            let bound = f.epsilon().to_big()
                * BigRational::new(BigInt::from(f.num_keys()), BigInt::from(s.surviving()));
            Some(Prediction::new(Ceiling, "min(1, ε/r)", bound))
        }
    }
}

fn scenario(cfg: &CampaignConfig) -> Result<Scenario> {
    if cfg.trials == 0 {
        return Err(config("trials must be at least 1"));
    }
    let family = cfg.family.build()?;
    Scenario::new(
        family,
        cfg.variant,
        cfg.strategy,
        cfg.r,
        cfg.noise,
        cfg.message_influence,
    )
}

/// The random stream of trial `index` in a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `cfg.trials` independent rounds in parallel. Trial `i` draws from the
/// ChaCha8 stream `i` of `cfg.master_seed`, so the result does not depend on
/// scheduling.
pub fn monte_carlo(cfg: &CampaignConfig) -> Result<SuccessStats> {
    let s = scenario(cfg)?;
    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.master_seed, i);
            s.play_trial(&mut rng, false).map(|(_, o)| Tally::from(o))
        })
        .try_reduce(Tally::default, |a, b| Ok(a + b))?;
    Ok(SuccessStats::new(tally, predict(&s), s.design().cloned()))
}

/// As [`monte_carlo`], also returning every transcript in trial order.
pub fn monte_carlo_with_transcripts(
    cfg: &CampaignConfig,
) -> Result<(SuccessStats, Vec<RoundTranscript>)> {
    let s = scenario(cfg)?;
    let rounds = (0..cfg.trials)
        .into_par_iter()
        .map(|i| s.play_trial(&mut trial_rng(cfg.master_seed, i), true))
        .collect::<Result<Vec<_>>>()?;
    let tally = rounds
        .iter()
        .map(|(_, o)| Tally::from(*o))
        .fold(Tally::default(), Add::add);
    let stats = SuccessStats::new(tally, predict(&s), s.design().cloned());
    Ok((stats, rounds.into_iter().map(|(t, _)| t).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;

    fn cfg(strategy: Strategy, trials: u64) -> CampaignConfig {
        CampaignConfig {
            family: FamilySpec::Affine {
                p: 5,
                epsilon: None,
            },
            variant: Variant::Plain,
            strategy,
            r: 0.6,
            trials,
            master_seed: 11,
            noise: 0.0,
            message_influence: true,
        }
    }

    #[test]
    fn wilson_interval() {
        let [lo, hi] = wilson(0, 100);
        assert!(lo < 1e-12);
        assert!((hi - 0.0370).abs() < 1e-3);
        let [lo, hi] = wilson(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn passive_campaign() {
        let s = monte_carlo(&cfg(Strategy::Passive, 10_000)).unwrap();
        assert_eq!((s.forgeries, s.detections, s.attempts), (0, 0, 0));
        assert_eq!(s.honest_accepted, 10_000);
        assert_eq!(s.verdict, Some(Verdict::Agree));
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            monte_carlo(&cfg(Strategy::Passive, 0)),
            Err(crate::Error::Config(_))
        ));
    }

    #[test]
    fn noise_only_costs_honest_rounds() {
        let mut c = cfg(Strategy::Passive, 20_000);
        c.noise = 0.1;
        let s = monte_carlo(&c).unwrap();
        let failed = (s.trials - s.honest_accepted) as f64 / s.trials as f64;
        assert!((failed - 0.1).abs() < 0.01, "{failed}");
        assert_eq!(s.detections, 0);
    }

    #[test]
    fn transcripts_match_stats() {
        let c = cfg(
            Strategy::InterceptCertain {
                capability: Capability::Oracle,
            },
            500,
        );
        let (stats, ts) = monte_carlo_with_transcripts(&c).unwrap();
        assert_eq!(ts.len(), 500);
        assert_eq!(stats, monte_carlo(&c).unwrap());
    }
}
