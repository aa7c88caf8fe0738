//! The adversary's view of the key: which keys she can still not rule out.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use bitvec::prelude::*;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{budget, domain, Result};
use crate::families::{FamilyId, HashFamily};
use crate::{KeyIndex, Message, Tag};

/// Upper limit on `|𝓜|·|keys|` for the exhaustive message searches.
pub const SEARCH_BUDGET: u128 = 1_000_000_000;

/// A subset of a family's key indices, stored densely.
///
/// Serialises as the sorted list of member indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySet {
    family: FamilyId,
    bits: BitVec<u64, Lsb0>,
}

impl KeySet {
    pub fn empty(family: &HashFamily) -> Self {
        KeySet {
            family: family.id(),
            bits: bitvec![u64, Lsb0; 0; family.num_keys() as usize],
        }
    }

    pub fn full(family: &HashFamily) -> Self {
        KeySet {
            family: family.id(),
            bits: bitvec![u64, Lsb0; 1; family.num_keys() as usize],
        }
    }

    pub fn from_indices(
        family: &HashFamily,
        keys: impl IntoIterator<Item = KeyIndex>,
    ) -> Result<Self> {
        let mut set = Self::empty(family);
        for k in keys {
            if k as u64 >= family.num_keys() {
                return Err(domain(format!(
                    "key {k} out of range (|H| = {})",
                    family.num_keys()
                )));
            }
            set.bits.set(k as usize, true);
        }
        Ok(set)
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn len(&self) -> u64 {
        self.bits.count_ones() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn contains(&self, key: KeyIndex) -> bool {
        self.bits.get(key as usize).is_some_and(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = KeyIndex> + '_ {
        self.bits.iter_ones().map(|k| k as KeyIndex)
    }

    pub fn to_vec(&self) -> Vec<KeyIndex> {
        self.iter().collect()
    }

    /// |members| / |𝓗|, the fraction r of keys not ruled out.
    pub fn fraction(&self) -> f64 {
        self.len() as f64 / self.bits.len() as f64
    }

    pub(crate) fn insert(&mut self, key: KeyIndex) {
        self.bits.set(key as usize, true);
    }

    pub fn intersect(&self, other: &KeySet) -> Result<KeySet> {
        if self.family != other.family || self.bits.len() != other.bits.len() {
            return Err(domain("key sets belong to different families"));
        }
        let mut bits = self.bits.clone();
        bits &= other.bits.as_bitslice();
        Ok(KeySet {
            family: self.family,
            bits,
        })
    }
}

impl Serialize for KeySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// `𝓗_t = {k : h_k(m) = t}`, the keys consistent with an observed pair.
pub fn constraint_set(family: &HashFamily, message: Message, tag: Tag) -> Result<KeySet> {
    family.check_message(message)?;
    family.check_tag(tag)?;
    let mut set = KeySet::empty(family);
    for k in 0..family.num_keys() as KeyIndex {
        if family.eval_unchecked(k, message) == tag {
            set.insert(k);
        }
    }
    Ok(set)
}

pub fn intersect(a: &KeySet, b: &KeySet) -> Result<KeySet> {
    a.intersect(b)
}

/// Number of keys left after eliminating all but a fraction `r` of `n` keys,
/// rounded half to even.
pub fn surviving_count(num_keys: u64, r: f64) -> Result<u64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(domain(format!("r = {r} is outside (0, 1]")));
    }
    let size = (r * num_keys as f64).round_ties_even() as u64;
    if size == 0 {
        return Err(domain(format!("r = {r} leaves no key out of {num_keys}")));
    }
    Ok(size.min(num_keys))
}

/// Eve's knowledge modelled as uniform elimination: a set of `round(r·|𝓗|)`
/// keys that always contains `true_key`, the rest drawn uniformly without
/// replacement from the other keys.
pub fn random_elimination<R: Rng + ?Sized>(
    family: &HashFamily,
    true_key: KeyIndex,
    r: f64,
    rng: &mut R,
) -> Result<KeySet> {
    if true_key as u64 >= family.num_keys() {
        return Err(domain(format!("true key {true_key} out of range")));
    }
    let size = surviving_count(family.num_keys(), r)?;
    let others = family.num_keys() as usize - 1;
    let mut set = KeySet::empty(family);
    set.insert(true_key);
    for i in rand::seq::index::sample(rng, others, size as usize - 1) {
        let k = if i < true_key as usize { i } else { i + 1 };
        set.insert(k as KeyIndex);
    }
    Ok(set)
}

/// The tag every key in `keys` assigns to `message`, if they all agree.
pub(crate) fn agreed_tag(
    family: &HashFamily,
    keys: impl IntoIterator<Item = KeyIndex>,
    message: Message,
) -> Option<Tag> {
    let mut keys = keys.into_iter();
    let first = family.eval_unchecked(keys.next()?, message);
    keys.all(|k| family.eval_unchecked(k, message) == first)
        .then_some(first)
}

/// The tag for `m_forge` if every surviving key agrees on it.
pub fn certain_forgery(
    family: &HashFamily,
    surviving: &KeySet,
    m_forge: Message,
) -> Result<Option<Tag>> {
    family.check_message(m_forge)?;
    if surviving.is_empty() {
        return Err(domain("surviving key set is empty"));
    }
    Ok(agreed_tag(family, surviving.iter(), m_forge))
}

pub(crate) fn forgeable_in<'a>(
    family: &'a HashFamily,
    keys: &'a [KeyIndex],
    exclude: Message,
) -> impl Iterator<Item = (Message, Tag)> + 'a {
    (0..family.num_messages())
        .filter(move |&m| m != exclude)
        .filter_map(move |m| agreed_tag(family, keys.iter().copied(), m).map(|t| (m, t)))
}

/// Every message other than `exclude` on which all surviving keys agree, with
/// the tag they force.
pub fn forgeable_messages(
    family: &HashFamily,
    surviving: &KeySet,
    exclude: Message,
) -> Result<Vec<(Message, Tag)>> {
    if surviving.is_empty() {
        return Err(domain("surviving key set is empty"));
    }
    check_search_budget(family, surviving.len())?;
    let keys = surviving.to_vec();
    Ok(forgeable_in(family, &keys, exclude).collect())
}

fn check_search_budget(family: &HashFamily, keys: u64) -> Result<()> {
    let work = family.num_messages() as u128 * keys as u128;
    if work > SEARCH_BUDGET {
        return Err(budget(format!("message search needs {work} evaluations")));
    }
    Ok(())
}

/// How the surviving keys spread over the tag classes of one message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionProfile {
    pub message: Message,
    /// Nonzero class sizes, keyed by tag.
    pub subset_sizes: BTreeMap<Tag, u64>,
    /// Tags whose class holds between 1 and ε·|𝓗|/|𝓣| surviving keys.
    pub good_subsets: Vec<Tag>,
}

impl PartitionProfile {
    /// Surviving keys that sit in good subsets.
    pub fn keys_in_good_subsets(&self) -> u64 {
        self.good_subsets.iter().map(|t| self.subset_sizes[t]).sum()
    }
}

/// Counts tags with a dense array when |𝓣| is small, a map otherwise.
enum TagCounter {
    Dense { counts: Vec<u64>, touched: Vec<Tag> },
    Sparse(HashMap<Tag, u64>),
}

impl TagCounter {
    fn new(num_tags: u64) -> Self {
        if num_tags <= 1 << 16 {
            TagCounter::Dense {
                counts: vec![0; num_tags as usize],
                touched: Vec::new(),
            }
        } else {
            TagCounter::Sparse(HashMap::new())
        }
    }

    fn add(&mut self, tag: Tag) {
        match self {
            TagCounter::Dense { counts, touched } => {
                if counts[tag as usize] == 0 {
                    touched.push(tag);
                }
                counts[tag as usize] += 1;
            }
            TagCounter::Sparse(map) => *map.entry(tag).or_default() += 1,
        }
    }

    /// Returns the nonzero (tag, count) pairs and resets the counter.
    fn drain(&mut self) -> Vec<(Tag, u64)> {
        let mut out: Vec<(Tag, u64)> = match self {
            TagCounter::Dense { counts, touched } => touched
                .drain(..)
                .map(|t| (t, std::mem::take(&mut counts[t as usize])))
                .collect(),
            TagCounter::Sparse(map) => map.drain().collect(),
        };
        out.sort_unstable();
        out
    }
}

fn histogram(
    family: &HashFamily,
    keys: &[KeyIndex],
    message: Message,
    counter: &mut TagCounter,
) -> Vec<(Tag, u64)> {
    for &k in keys {
        counter.add(family.eval_unchecked(k, message));
    }
    counter.drain()
}

fn good_weight(family: &HashFamily, classes: &[(Tag, u64)]) -> u64 {
    classes
        .iter()
        .filter(|(_, c)| family.admits_good(*c))
        .map(|(_, c)| c)
        .sum()
}

pub fn partition_by_message(
    family: &HashFamily,
    surviving: &KeySet,
    message: Message,
) -> Result<PartitionProfile> {
    family.check_message(message)?;
    if surviving.is_empty() {
        return Err(domain("surviving key set is empty"));
    }
    let keys = surviving.to_vec();
    let classes = histogram(
        family,
        &keys,
        message,
        &mut TagCounter::new(family.num_tags()),
    );
    let good_subsets = classes
        .iter()
        .filter(|(_, c)| family.admits_good(*c))
        .map(|(t, _)| *t)
        .collect();
    Ok(PartitionProfile {
        message,
        subset_sizes: classes.into_iter().collect(),
        good_subsets,
    })
}

/// Picks, among `candidates`, the message whose tag classes put the most
/// surviving keys into good subsets. Ties go to the earliest candidate; `None`
/// if no candidate has a good subset.
pub(crate) fn craft_among(
    family: &HashFamily,
    keys: &[KeyIndex],
    candidates: impl IntoIterator<Item = Message>,
) -> Option<Message> {
    let mut counter = TagCounter::new(family.num_tags());
    let mut best: Option<(u64, Message)> = None;
    for m in candidates {
        let weight = good_weight(family, &histogram(family, keys, m, &mut counter));
        if weight > 0 && best.is_none_or(|(w, _)| weight > w) {
            best = Some((weight, m));
        }
    }
    best.map(|(_, m)| m)
}

/// The message Eve would steer Alice towards: the one that maximises the
/// number of her surviving keys lying in good subsets.
pub fn craft_influenced_message(
    family: &HashFamily,
    eve_knowledge: &KeySet,
    exclude: &BTreeSet<Message>,
) -> Result<Option<Message>> {
    if eve_knowledge.is_empty() {
        return Err(domain("surviving key set is empty"));
    }
    check_search_budget(family, eve_knowledge.len())?;
    let keys = eve_knowledge.to_vec();
    Ok(craft_among(
        family,
        &keys,
        (0..family.num_messages()).filter(|m| !exclude.contains(m)),
    ))
}
