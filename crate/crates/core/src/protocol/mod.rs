//! Authentication rounds between Alice and Bob with Eve on the classical
//! channel, and seeded Monte Carlo campaigns over them.
//!
//! Two wire protocols are modelled. In the plain one Alice sends a message and
//! then its tag. In the salted one Bob answers the message with a random salt
//! and Alice tags the concatenation of message and salt, so Eve has to commit
//! to any change of message or salt before she learns anything from the tag.

mod campaign;
mod round;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::families::FamilySpec;
use crate::{KeyIndex, Message, Tag};

pub use campaign::{
    monte_carlo, monte_carlo_with_transcripts, trial_rng, Prediction, PredictionKind, SuccessStats,
    Verdict,
};
pub use round::{run_round, DesignSummary, RoundSetup, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Salted {
        /// Defaults to ⌈log₂|𝓣|⌉.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        salt_bits: Option<u32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    /// Eve forges only with a tag every candidate key agrees on.
    Concrete,
    /// Eve is granted success whenever the bound says she could have it.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// Eve's surviving keys are laid out as good and full tag classes of a
    /// fixed design message.
    Idealized,
    /// Eve's knowledge is a random elimination and she searches for the
    /// message with the most keys in good classes.
    Searched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Passive,
    /// Replace every round with the most likely tag for another message.
    BlindGuess,
    /// Replace only when certain of success.
    InterceptCertain {
        capability: Capability,
    },
    /// Steer Alice's message so that Eve's keys fall into small tag classes,
    /// then act as `InterceptCertain`.
    Engineered {
        partition: Partition,
        capability: Capability,
    },
}

fn default_influence() -> bool {
    true
}

/// A Monte Carlo campaign, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub family: FamilySpec,
    pub variant: Variant,
    pub strategy: Strategy,
    /// Fraction of keys Eve cannot eliminate.
    pub r: f64,
    pub trials: u64,
    pub master_seed: u64,
    /// Probability that noise corrupts the tag of an unattacked round.
    #[serde(default)]
    pub noise: f64,
    /// Whether Eve can choose which message Alice sends.
    #[serde(default = "default_influence")]
    pub message_influence: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Message,
    Salt,
    Tag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    AliceSendsMessage { message: Message },
    BobSendsSalt { salt: u64 },
    AliceSendsTag { tag: Tag },
    EveObserves { field: Field, value: u64 },
    EveReplaces { field: Field, old: u64, new: u64 },
    BobVerdict { accept: bool },
}

/// Everything that happened in one round, in wire order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTranscript {
    pub true_key: KeyIndex,
    pub events: Vec<Event>,
    /// Eve's candidate keys before the round; recorded on request only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_before: Option<Vec<KeyIndex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_after: Option<Vec<KeyIndex>>,
}

impl RoundTranscript {
    /// Whether every Eve replacement of message or salt comes before Alice's
    /// tag.
    pub fn respects_commitment(&self) -> bool {
        let tag_at = self
            .events
            .iter()
            .position(|e| matches!(e, Event::AliceSendsTag { .. }));
        self.events.iter().enumerate().all(|(i, e)| match e {
            Event::EveReplaces {
                field: Field::Message | Field::Salt,
                ..
            } => tag_at.is_none_or(|t| i < t),
            _ => true,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub forgery_accepted: bool,
    pub honest_accepted: bool,
    pub eve_attempted: bool,
    pub eve_detected: bool,
}

/// Packs a message and a salt into one tag input: the message occupies the
/// high `message_bits`, the salt the low `salt_bits`.
///
/// With `salt_bits = 0` the salt must be 0 and the message is returned as is.
pub fn concat_for_tag(
    message: Message,
    salt: u64,
    message_bits: u32,
    salt_bits: u32,
) -> Result<Message> {
    if message_bits + salt_bits > 63 {
        return Err(domain(format!(
            "{message_bits}+{salt_bits} bits do not fit a message index"
        )));
    }
    if message >> message_bits != 0 {
        return Err(domain(format!(
            "message {message} does not fit in {message_bits} bits"
        )));
    }
    if salt >> salt_bits != 0 {
        return Err(domain(format!(
            "salt {salt} does not fit in {salt_bits} bits"
        )));
    }
    Ok((message << salt_bits) | salt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_layout() {
        assert_eq!(concat_for_tag(0b101, 0b11, 3, 2).unwrap(), 0b10111);
        assert_eq!(concat_for_tag(7, 0, 3, 0).unwrap(), 7);
        assert!(concat_for_tag(8, 0, 3, 2).is_err());
        assert!(concat_for_tag(1, 4, 3, 2).is_err());
        assert!(concat_for_tag(0, 0, 40, 40).is_err());
    }

    #[test]
    fn concat_is_injective() {
        let mut seen = std::collections::HashSet::new();
        for m in 0..16 {
            for s in 0..8 {
                assert!(seen.insert(concat_for_tag(m, s, 4, 3).unwrap()));
            }
        }
        assert_eq!(seen.len(), 128);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: CampaignConfig = serde_json::from_str(
            r#"{"family":{"kind":"affine","p":5},"variant":{"kind":"plain"},
                "strategy":{"kind":"passive"},"r":0.6,"trials":10,"master_seed":1}"#,
        )
        .unwrap();
        assert_eq!(cfg.noise, 0.0);
        assert!(cfg.message_influence);
        let s: Strategy = serde_json::from_str(
            r#"{"kind":"engineered","partition":"idealized","capability":"oracle"}"#,
        )
        .unwrap();
        assert_eq!(
            s,
            Strategy::Engineered {
                partition: Partition::Idealized,
                capability: Capability::Oracle
            }
        );
        let v: Variant = serde_json::from_str(r#"{"kind":"salted"}"#).unwrap();
        assert_eq!(v, Variant::Salted { salt_bits: None });
    }

    #[test]
    fn commitment_check() {
        let ok = RoundTranscript {
            true_key: 0,
            events: vec![
                Event::AliceSendsMessage { message: 1 },
                Event::EveReplaces {
                    field: Field::Message,
                    old: 1,
                    new: 2,
                },
                Event::AliceSendsTag { tag: 0 },
                Event::EveReplaces {
                    field: Field::Tag,
                    old: 0,
                    new: 1,
                },
            ],
            knowledge_before: None,
            knowledge_after: None,
        };
        assert!(ok.respects_commitment());
        let mut late = ok.clone();
        late.events.push(Event::EveReplaces {
            field: Field::Salt,
            old: 0,
            new: 1,
        });
        assert!(!late.respects_commitment());
    }
}
