use rand::Rng;
use serde::Serialize;

use super::{
    concat_for_tag, Capability, Event, Field, Partition, RoundOutcome, RoundTranscript, Strategy,
    Variant,
};
use crate::epsilon::format_rational;
use crate::error::{config, domain, Result};
use crate::families::HashFamily;
use crate::keyspace::{craft_among, forgeable_in, random_elimination, surviving_count, KeySet};
use crate::{KeyIndex, Message, Tag};

/// Which tag inputs Alice can produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Layout {
    /// Number of distinct messages Alice may send.
    messages: u64,
    /// Zero for the plain protocol.
    salt_bits: u32,
}

impl Layout {
    fn tag_input(&self, message: Message, salt: u64) -> Result<Message> {
        if self.salt_bits == 0 {
            return Ok(message);
        }
        concat_for_tag(
            message,
            salt,
            self.messages.trailing_zeros(),
            self.salt_bits,
        )
    }

    fn input_space(&self) -> u64 {
        self.messages << self.salt_bits
    }
}

fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// How Eve's surviving keys are laid out over the tag classes of the design
/// input in the idealized engineered attack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignSummary {
    /// Tag input whose classes are shaped.
    pub input: Message,
    pub surviving: u64,
    pub good_subsets: u64,
    pub good_subset_size: u64,
    /// Size of the one class that absorbs the rounding residue, if any.
    pub irregular_subset_size: Option<u64>,
    pub full_subsets: u64,
    pub keys_in_good_subsets: u64,
    /// keys_in_good_subsets / surviving, in lowest terms.
    pub certain_forgery_rate: String,
}

#[derive(Clone, Debug)]
struct Design {
    alice_message: Message,
    salt: Option<u64>,
    survivors: Vec<KeyIndex>,
    knowledge: KeySet,
    /// Survivors in each tag class of the design input.
    by_tag: Vec<Vec<KeyIndex>>,
    summary: DesignSummary,
}

/// The random draws of one round that precede any message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSetup {
    pub true_key: KeyIndex,
    /// Eve's candidate keys; must contain `true_key`.
    pub knowledge: KeySet,
    pub alice_message: Message,
    /// Salt Eve substitutes towards Alice, salted protocol only.
    pub designed_salt: Option<u64>,
}

/// A validated family, protocol and adversary, ready to play rounds.
#[derive(Clone, Debug)]
pub struct Scenario {
    family: HashFamily,
    variant: Variant,
    strategy: Strategy,
    layout: Layout,
    r: f64,
    surviving: u64,
    noise: f64,
    design: Option<Design>,
}

impl Scenario {
    pub fn new(
        family: HashFamily,
        variant: Variant,
        strategy: Strategy,
        r: f64,
        noise: f64,
        message_influence: bool,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&noise) {
            return Err(config(format!("noise {noise} is outside [0, 1]")));
        }
        let surviving = surviving_count(family.num_keys(), r)?;
        if matches!(strategy, Strategy::Engineered { .. }) && !message_influence {
            return Err(config("the engineered attack needs message influence"));
        }
        let layout = match variant {
            Variant::Plain => Layout {
                messages: family.num_messages(),
                salt_bits: 0,
            },
            Variant::Salted { salt_bits } => {
                let min = ceil_log2(family.num_tags()).max(1);
                let salt_bits = salt_bits.unwrap_or(min);
                if salt_bits < min {
                    return Err(config(format!(
                        "salt of {salt_bits} bits is shorter than the tag ({min} bits)"
                    )));
                }
                let total = family.message_bits();
                if salt_bits >= total {
                    return Err(config(format!(
                        "family has {total} input bits, leaving none for the message beside a {salt_bits}-bit salt"
                    )));
                }
                Layout {
                    messages: 1 << (total - salt_bits),
                    salt_bits,
                }
            }
        };
        if !matches!(strategy, Strategy::Passive) && layout.messages < 2 {
            return Err(config("an active adversary needs at least two messages"));
        }
        let mut scenario = Scenario {
            family,
            variant,
            strategy,
            layout,
            r,
            surviving,
            noise,
            design: None,
        };
        if let Strategy::Engineered {
            partition: Partition::Idealized,
            ..
        } = strategy
        {
            scenario.design = Some(scenario.build_design()?);
        }
        Ok(scenario)
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Size of Eve's candidate set, round(r·|𝓗|).
    pub fn surviving(&self) -> u64 {
        self.surviving
    }

    pub fn salt_bits(&self) -> u32 {
        self.layout.salt_bits
    }

    pub fn design(&self) -> Option<&DesignSummary> {
        self.design.as_ref().map(|d| &d.summary)
    }

    /// Keeps ⌊ε|𝓗|/|𝓣|⌋ keys in as many tag classes of the design input as
    /// the eliminated keys allow, puts the remainder of the eliminations into
    /// the next class, and leaves the rest full. Classes are filled in tag
    /// order with the lowest-indexed keys.
    fn build_design(&self) -> Result<Design> {
        let f = &self.family;
        let (alice_message, salt) = match self.variant {
            Variant::Plain => (0, None),
            Variant::Salted { .. } => (0, Some(0)),
        };
        let input = self.layout.tag_input(alice_message, salt.unwrap_or(0))?;
        let tags = f.num_tags() as usize;
        let mut classes: Vec<Vec<KeyIndex>> = vec![Vec::new(); tags];
        for k in 0..f.num_keys() as KeyIndex {
            classes[f.eval_unchecked(k, input) as usize].push(k);
        }
        let class = f.class_size();
        let good = f.good_threshold().min(class);
        let mut keep = vec![class; tags];
        let mut eliminate = f.num_keys() - self.surviving;
        let mut n_good = 0usize;
        if class > good {
            while n_good < tags && eliminate >= class - good {
                keep[n_good] = good;
                eliminate -= class - good;
                n_good += 1;
            }
        }
        for t in (n_good..tags).chain(0..n_good) {
            if eliminate == 0 {
                break;
            }
            let cut = eliminate.min(keep[t]);
            keep[t] -= cut;
            eliminate -= cut;
        }
        let survivors: Vec<KeyIndex> = classes
            .iter()
            .zip(&keep)
            .flat_map(|(keys, &n)| keys[..n as usize].iter().copied())
            .collect();
        let knowledge = KeySet::from_indices(f, survivors.iter().copied())?;

        let is_good = |n: u64| n >= 1 && f.admits_good(n);
        let keys_in_good: u64 = keep.iter().filter(|&&n| is_good(n)).sum();
        let irregular = keep
            .iter()
            .copied()
            .find(|&n| n > 0 && n < class && !is_good(n));
        let summary = DesignSummary {
            input,
            surviving: self.surviving,
            good_subsets: keep.iter().filter(|&&n| is_good(n)).count() as u64,
            good_subset_size: good,
            irregular_subset_size: irregular,
            full_subsets: keep.iter().filter(|&&n| n == class).count() as u64,
            keys_in_good_subsets: keys_in_good,
            certain_forgery_rate: format_rational(&num_rational::BigRational::new(
                keys_in_good.into(),
                self.surviving.into(),
            )),
        };
        let by_tag = classes
            .into_iter()
            .zip(&keep)
            .map(|(mut keys, &n)| {
                keys.truncate(n as usize);
                keys
            })
            .collect();
        Ok(Design {
            alice_message,
            salt,
            survivors,
            knowledge,
            by_tag,
            summary,
        })
    }

    /// Draws the true key, Eve's knowledge and Alice's message.
    pub fn draw_setup<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<RoundSetup> {
        if let Some(d) = &self.design {
            let true_key = d.survivors[rng.random_range(0..d.survivors.len())];
            return Ok(RoundSetup {
                true_key,
                knowledge: d.knowledge.clone(),
                alice_message: d.alice_message,
                designed_salt: d.salt,
            });
        }
        let f = &self.family;
        let true_key = rng.random_range(0..f.num_keys()) as KeyIndex;
        let knowledge = random_elimination(f, true_key, self.r, rng)?;
        let crafted = match self.strategy {
            Strategy::Engineered {
                partition: Partition::Searched,
                ..
            } => craft_among(f, &knowledge.to_vec(), 0..self.layout.input_space()),
            _ => None,
        };
        let (alice_message, designed_salt) = match crafted {
            Some(x) if self.layout.salt_bits > 0 => {
                let mask = (1u64 << self.layout.salt_bits) - 1;
                (x >> self.layout.salt_bits, Some(x & mask))
            }
            Some(x) => (x, None),
            None => (rng.random_range(0..self.layout.messages), None),
        };
        Ok(RoundSetup {
            true_key,
            knowledge,
            alice_message,
            designed_salt,
        })
    }

    /// Plays one round from `setup`. Only the salt and channel noise are
    /// drawn from `rng`.
    pub fn play<R: Rng + ?Sized>(
        &self,
        setup: RoundSetup,
        rng: &mut R,
        record_knowledge: bool,
    ) -> Result<(RoundTranscript, RoundOutcome)> {
        if !setup.knowledge.contains(setup.true_key) {
            return Err(domain("Eve's knowledge must contain the true key"));
        }
        if setup.alice_message >= self.layout.messages {
            return Err(domain(format!(
                "message {} is outside Alice's message set",
                setup.alice_message
            )));
        }
        if setup.knowledge.family() != self.family.id() {
            return Err(domain("knowledge belongs to a different family"));
        }
        let mut round = Round {
            scenario: self,
            key: setup.true_key,
            events: Vec::with_capacity(8),
            record: record_knowledge,
            after: None,
        };
        let outcome = match self.variant {
            Variant::Plain => round.plain(&setup, rng)?,
            Variant::Salted { .. } => round.salted(&setup, rng)?,
        };
        let transcript = RoundTranscript {
            true_key: setup.true_key,
            events: round.events,
            knowledge_before: record_knowledge.then(|| setup.knowledge.to_vec()),
            knowledge_after: if record_knowledge {
                Some(round.after.unwrap_or_else(|| setup.knowledge.to_vec()))
            } else {
                None
            },
        };
        Ok((transcript, outcome))
    }

    pub fn play_trial<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        record_knowledge: bool,
    ) -> Result<(RoundTranscript, RoundOutcome)> {
        let setup = self.draw_setup(rng)?;
        self.play(setup, rng, record_knowledge)
    }
}

struct Round<'a> {
    scenario: &'a Scenario,
    key: KeyIndex,
    events: Vec<Event>,
    record: bool,
    after: Option<Vec<KeyIndex>>,
}

impl Round<'_> {
    fn family(&self) -> &HashFamily {
        &self.scenario.family
    }

    fn eval(&self, key: KeyIndex, input: Message) -> Tag {
        self.family().eval_unchecked(key, input)
    }

    /// Eve's candidates that also agree with the observed pair.
    fn constrain(&mut self, knowledge: &KeySet, input: Message, tag: Tag) -> Vec<KeyIndex> {
        let keys: Vec<KeyIndex> = match &self.scenario.design {
            Some(d) if d.summary.input == input && d.knowledge == *knowledge => {
                d.by_tag[tag as usize].clone()
            }
            _ => knowledge
                .iter()
                .filter(|&k| self.eval(k, input) == tag)
                .collect(),
        };
        if self.record {
            self.after = Some(keys.clone());
        }
        keys
    }

    /// The tag most of `keys` give `input`; ties go to the smallest tag.
    fn likeliest_tag(&self, keys: &[KeyIndex], input: Message) -> Tag {
        let mut tags: Vec<Tag> = keys.iter().map(|&k| self.eval(k, input)).collect();
        tags.sort_unstable();
        let mut best = (0usize, 0 as Tag);
        for run in tags.chunk_by(|a, b| a == b) {
            if run.len() > best.0 {
                best = (run.len(), run[0]);
            }
        }
        best.1
    }

    fn deliver_honest<R: Rng + ?Sized>(
        &mut self,
        expected: Tag,
        sent: Tag,
        rng: &mut R,
    ) -> RoundOutcome {
        let corrupted = self.scenario.noise > 0.0 && rng.random_bool(self.scenario.noise);
        let received = if corrupted {
            ((sent as u64 + 1) % self.family().num_tags()) as Tag
        } else {
            sent
        };
        let accept = received == expected;
        self.events.push(Event::BobVerdict { accept });
        RoundOutcome {
            honest_accepted: accept,
            ..RoundOutcome::default()
        }
    }

    fn deliver_forgery(&mut self, expected: Tag, forged: Tag) -> RoundOutcome {
        let accept = forged == expected;
        self.events.push(Event::BobVerdict { accept });
        RoundOutcome {
            forgery_accepted: accept,
            honest_accepted: false,
            eve_attempted: true,
            eve_detected: !accept,
        }
    }

    fn plain<R: Rng + ?Sized>(&mut self, setup: &RoundSetup, rng: &mut R) -> Result<RoundOutcome> {
        let m_a = setup.alice_message;
        let t_a = self.eval(self.key, m_a);
        self.events.push(Event::AliceSendsMessage { message: m_a });
        self.events.push(Event::AliceSendsTag { tag: t_a });
        self.events.push(Event::EveObserves {
            field: Field::Message,
            value: m_a,
        });
        self.events.push(Event::EveObserves {
            field: Field::Tag,
            value: t_a as u64,
        });
        let other = if m_a == 0 { 1 } else { 0 };

        let attempt = match self.scenario.strategy {
            Strategy::Passive => None,
            Strategy::BlindGuess => {
                let cands = self.constrain(&setup.knowledge, m_a, t_a);
                Some((other, self.likeliest_tag(&cands, other)))
            }
            Strategy::InterceptCertain { capability } | Strategy::Engineered { capability, .. } => {
                let cands = self.constrain(&setup.knowledge, m_a, t_a);
                let concrete = || forgeable_in(self.family(), &cands, m_a).next();
                match capability {
                    Capability::Concrete => concrete(),
                    Capability::Oracle if self.family().admits_good(cands.len() as u64) => {
                        concrete().or_else(|| Some((other, self.eval(self.key, other))))
                    }
                    Capability::Oracle => None,
                }
            }
        };
        Ok(match attempt {
            Some((m_e, t_e)) => {
                self.events.push(Event::EveReplaces {
                    field: Field::Message,
                    old: m_a,
                    new: m_e,
                });
                self.events.push(Event::EveReplaces {
                    field: Field::Tag,
                    old: t_a as u64,
                    new: t_e as u64,
                });
                let expected = self.eval(self.key, m_e);
                self.deliver_forgery(expected, t_e)
            }
            None => self.deliver_honest(t_a, t_a, rng),
        })
    }

    fn salted<R: Rng + ?Sized>(&mut self, setup: &RoundSetup, rng: &mut R) -> Result<RoundOutcome> {
        let layout = self.scenario.layout;
        let m_a = setup.alice_message;
        let attacking = matches!(
            self.scenario.strategy,
            Strategy::BlindGuess | Strategy::Engineered { .. }
        );
        self.events.push(Event::AliceSendsMessage { message: m_a });

        let m_e = if m_a == 0 { 1 } else { 0 };
        let m_bob = if attacking {
            self.events.push(Event::EveReplaces {
                field: Field::Message,
                old: m_a,
                new: m_e,
            });
            m_e
        } else {
            self.events.push(Event::EveObserves {
                field: Field::Message,
                value: m_a,
            });
            m_a
        };

        let s_b = rng.random_range(0..1u64 << layout.salt_bits);
        self.events.push(Event::BobSendsSalt { salt: s_b });
        let s_alice = match setup.designed_salt {
            Some(s_e) if attacking && s_e != s_b => {
                self.events.push(Event::EveReplaces {
                    field: Field::Salt,
                    old: s_b,
                    new: s_e,
                });
                s_e
            }
            _ => {
                self.events.push(Event::EveObserves {
                    field: Field::Salt,
                    value: s_b,
                });
                s_b
            }
        };

        let x_a = layout.tag_input(m_a, s_alice)?;
        let t_a = self.eval(self.key, x_a);
        self.events.push(Event::AliceSendsTag { tag: t_a });
        self.events.push(Event::EveObserves {
            field: Field::Tag,
            value: t_a as u64,
        });
        let x_bob = layout.tag_input(m_bob, s_b)?;
        let expected = self.eval(self.key, x_bob);

        if !attacking {
            return Ok(self.deliver_honest(expected, t_a, rng));
        }
        let cands = self.constrain(&setup.knowledge, x_a, t_a);
        let t_e = match self.scenario.strategy {
            Strategy::Engineered {
                capability: Capability::Oracle,
                ..
            } => {
                // success exactly when the true key is among the first
                // ⌊ε|𝓗|/|𝓣|⌋ candidates: probability min(1, ε|𝓗|/|𝓣| / |cands|)
                let rank = cands
                    .binary_search(&self.key)
                    .map_err(|_| domain("true key not a candidate"))?;
                if (rank as u64) < self.family().good_threshold() {
                    expected
                } else {
                    ((expected as u64 + 1) % self.family().num_tags()) as Tag
                }
            }
            _ => self.likeliest_tag(&cands, x_bob),
        };
        self.events.push(Event::EveReplaces {
            field: Field::Tag,
            old: t_a as u64,
            new: t_e as u64,
        });
        Ok(self.deliver_forgery(expected, t_e))
    }
}

/// Plays a single round with a fresh scenario and no channel noise.
pub fn run_round<R: Rng + ?Sized>(
    family: &HashFamily,
    variant: Variant,
    strategy: Strategy,
    r: f64,
    rng: &mut R,
) -> Result<(RoundTranscript, RoundOutcome)> {
    let scenario = Scenario::new(family.clone(), variant, strategy, r, 0.0, true)?;
    scenario.play_trial(rng, true)
}
