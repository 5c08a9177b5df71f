//! Per-item usage state, the logical clock, and lazily evaluated decay.
//!
//! Base vectors are never rewritten. An item's decay is the integer count
//! of stale steps it has seen (`decay_exponent` plus whatever is still
//! pending), so its strength is `multiplier * alpha^events` and only the
//! items a query touches need any write.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, MemoryConfig, Violations};

pub const MAX_ID_BYTES: usize = 256;

/// Opaque, non-empty UTF-8 identifier of at most [`MAX_ID_BYTES`] bytes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ItemId(String);

impl ItemId {
    pub fn new(id: impl Into<String>) -> Result<Self, StoreError> {
        let id = id.into();
        if id.is_empty() {
            return Err(StoreError::InvalidId("identifier is empty".into()));
        }
        if id.len() > MAX_ID_BYTES {
            return Err(StoreError::InvalidId(format!(
                "identifier is {} bytes, limit is {MAX_ID_BYTES}",
                id.len()
            )));
        }
        Ok(ItemId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ItemId {
    type Error = StoreError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        ItemId::new(value)
    }
}

impl TryFrom<&str> for ItemId {
    type Error = StoreError;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        ItemId::new(value)
    }
}

impl From<ItemId> for String {
    fn from(id: ItemId) -> String {
        id.0
    }
}

impl AsRef<str> for ItemId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for ItemId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StoreError {
    #[error("invalid item id: {0}")]
    InvalidId(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("item '{0}' already exists or was removed earlier in this session")]
    DuplicateId(String),
    #[error("component {index} is not finite")]
    NonFiniteComponent { index: usize },
    #[error("item '{0}' not found")]
    NotFound(String),
    #[error("retrieved id '{0}' is not in the store")]
    UnknownId(String),
    #[error("retrieved id '{0}' appears more than once")]
    DuplicateRetrieved(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("prune threshold {0} must lie in [0,1)")]
    InvalidThreshold(f64),
    #[error("rejected setting: {0}")]
    InvalidValue(Violations),
}

/// Usage bookkeeping for one item.
#[derive(Clone, Debug, PartialEq)]
pub struct UsageState {
    pub access_count: u64,
    pub last_access_step: u64,
    pub remembered: bool,
    /// Decay events already folded in (under the current alpha).
    pub decay_exponent: u64,
    /// Step up to which pending decay has been folded into `decay_exponent`.
    pub materialized_at_step: u64,
    /// Decay accumulated under earlier alpha values; 1.0 otherwise.
    pub strength_multiplier: f64,
}

impl UsageState {
    pub(crate) fn fresh(now: u64) -> Self {
        UsageState {
            access_count: 0,
            last_access_step: now,
            remembered: false,
            decay_exponent: 0,
            materialized_at_step: now,
            strength_multiplier: 1.0,
        }
    }

    /// Stale steps `s` in `(materialized_at_step, now]` with
    /// `s - last_access_step > gamma`. Always 0 for remembered items.
    pub fn pending_decays(&self, now: u64, gamma: u32) -> u64 {
        if self.remembered {
            return 0;
        }
        let first_free = self
            .materialized_at_step
            .max(self.last_access_step.saturating_add(u64::from(gamma)));
        now.saturating_sub(first_free)
    }

    /// Decay events under the current alpha, folded or pending.
    pub fn decay_events(&self, now: u64, gamma: u32) -> u64 {
        self.decay_exponent + self.pending_decays(now, gamma)
    }

    pub fn strength(&self, now: u64, config: &MemoryConfig) -> f64 {
        self.strength_multiplier * pow_events(config.alpha, self.decay_events(now, config.gamma))
    }

    /// Folds pending decay up to `now` into the exponent.
    pub(crate) fn materialize(&mut self, now: u64, gamma: u32) -> u64 {
        let pending = self.pending_decays(now, gamma);
        self.decay_exponent += pending;
        self.materialized_at_step = self.materialized_at_step.max(now);
        pending
    }
}

pub(crate) fn pow_events(alpha: f64, events: u64) -> f64 {
    match i32::try_from(events) {
        Ok(n) => alpha.powi(n),
        Err(_) => alpha.powf(events as f64),
    }
}

/// Owned copy of one item, as returned by [`MemoryStore::remove`].
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryItem {
    pub id: ItemId,
    pub base_vector: Vec<f32>,
    pub usage: UsageState,
}

/// Borrowed view of one item evaluated at the store's current clock.
#[derive(Clone, Copy, Debug)]
pub struct ItemView<'a> {
    pub id: &'a ItemId,
    pub base_vector: &'a [f32],
    pub usage: &'a UsageState,
    now: u64,
    config: &'a MemoryConfig,
}

impl<'a> ItemView<'a> {
    pub fn pending_decays(&self) -> u64 {
        self.usage.pending_decays(self.now, self.config.gamma)
    }

    pub fn decay_events(&self) -> u64 {
        self.usage.decay_events(self.now, self.config.gamma)
    }

    pub fn effective_strength(&self) -> f64 {
        self.usage.strength(self.now, self.config)
    }

    /// Base vector scaled by the effective strength.
    pub fn effective_vector(&self) -> Vec<f64> {
        let s = self.effective_strength();
        self.base_vector.iter().map(|&x| f64::from(x) * s).collect()
    }

    pub fn base_norm(&self) -> f64 {
        self.base_vector
            .iter()
            .map(|&x| f64::from(x) * f64::from(x))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_item(&self) -> MemoryItem {
        MemoryItem {
            id: self.id.clone(),
            base_vector: self.base_vector.to_vec(),
            usage: self.usage.clone(),
        }
    }
}

/// The dynamic embedding layer: items, their usage state and the clock.
///
/// Items live in dense slots (`ids`, `usage` and a row-major `vectors`
/// matrix share an index) so a full scoring pass is a linear scan.
#[derive(Clone, Debug)]
pub struct MemoryStore {
    pub(crate) config: MemoryConfig,
    pub(crate) clock: u64,
    pub(crate) ids: Vec<ItemId>,
    pub(crate) usage: Vec<UsageState>,
    pub(crate) vectors: Vec<f32>,
    pub(crate) index: HashMap<ItemId, usize>,
    retired: HashSet<ItemId>,
}

pub(crate) fn check_vector(vector: &[f32], dimension: usize) -> Result<(), StoreError> {
    if vector.len() != dimension {
        return Err(StoreError::DimensionMismatch {
            expected: dimension,
            found: vector.len(),
        });
    }
    if let Some(index) = vector.iter().position(|x| !x.is_finite()) {
        return Err(StoreError::NonFiniteComponent { index });
    }
    Ok(())
}

impl MemoryStore {
    pub fn new(config: MemoryConfig) -> Result<Self, ConfigError> {
        config.validate().map_err(ConfigError::Invalid)?;
        Ok(MemoryStore {
            config,
            clock: 0,
            ids: Vec::new(),
            usage: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
            retired: HashSet::new(),
        })
    }

    /// Rebuilds a store from persisted parts. Items must already be
    /// validated against `config` and `clock`.
    pub(crate) fn from_parts(config: MemoryConfig, clock: u64, items: Vec<MemoryItem>) -> Self {
        let mut store = MemoryStore {
            config,
            clock,
            ids: Vec::with_capacity(items.len()),
            usage: Vec::with_capacity(items.len()),
            vectors: Vec::with_capacity(items.len() * config.dimension),
            index: HashMap::with_capacity(items.len()),
            retired: HashSet::new(),
        };
        for item in items {
            store.push_slot(item.id, &item.base_vector, item.usage);
        }
        store
    }

    pub fn config(&self) -> &MemoryConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    /// Logical time: number of queries processed so far.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn insert(&mut self, id: &str, vector: &[f32]) -> Result<(), StoreError> {
        let id = ItemId::new(id)?;
        check_vector(vector, self.config.dimension)?;
        if self.index.contains_key(&id) || self.retired.contains(&id) {
            return Err(StoreError::DuplicateId(id.0));
        }
        let usage = UsageState::fresh(self.clock);
        self.push_slot(id, vector, usage);
        Ok(())
    }

    fn push_slot(&mut self, id: ItemId, vector: &[f32], usage: UsageState) {
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.usage.push(usage);
        self.vectors.extend_from_slice(vector);
    }

    pub fn remove(&mut self, id: &str) -> Result<MemoryItem, StoreError> {
        let slot = self
            .index
            .remove(id)
            .ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        let d = self.config.dimension;
        let last = self.ids.len() - 1;
        let base_vector = self.vectors[slot * d..(slot + 1) * d].to_vec();
        if slot != last {
            self.vectors.copy_within(last * d..(last + 1) * d, slot * d);
        }
        self.vectors.truncate(last * d);
        let id = self.ids.swap_remove(slot);
        let usage = self.usage.swap_remove(slot);
        if slot != last {
            self.index.insert(self.ids[slot].clone(), slot);
        }
        self.retired.insert(id.clone());
        Ok(MemoryItem { id, base_vector, usage })
    }

    /// Removes every slot for which `drop` is true, keeping slot order.
    pub(crate) fn remove_where(&mut self, mut drop: impl FnMut(usize) -> bool) -> Vec<ItemId> {
        let d = self.config.dimension;
        let mut removed = Vec::new();
        let mut write = 0;
        for read in 0..self.ids.len() {
            if drop(read) {
                removed.push(self.ids[read].clone());
                continue;
            }
            if write != read {
                self.ids.swap(write, read);
                self.usage.swap(write, read);
                self.vectors.copy_within(read * d..(read + 1) * d, write * d);
            }
            write += 1;
        }
        if removed.is_empty() {
            return removed;
        }
        self.ids.truncate(write);
        self.usage.truncate(write);
        self.vectors.truncate(write * d);
        self.index.clear();
        for (slot, id) in self.ids.iter().enumerate() {
            self.index.insert(id.clone(), slot);
        }
        self.retired.extend(removed.iter().cloned());
        removed
    }

    pub fn get(&self, id: &str) -> Option<ItemView<'_>> {
        self.index.get(id).map(|&slot| self.view(slot))
    }

    pub(crate) fn slot(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn view(&self, slot: usize) -> ItemView<'_> {
        let d = self.config.dimension;
        ItemView {
            id: &self.ids[slot],
            base_vector: &self.vectors[slot * d..(slot + 1) * d],
            usage: &self.usage[slot],
            now: self.clock,
            config: &self.config,
        }
    }

    /// Items in storage order.
    pub fn iter(&self) -> impl Iterator<Item = ItemView<'_>> + '_ {
        (0..self.ids.len()).map(move |slot| self.view(slot))
    }

    /// Items sorted by ascending id.
    pub fn iter_sorted(&self) -> impl Iterator<Item = ItemView<'_>> + '_ {
        let mut slots: Vec<usize> = (0..self.ids.len()).collect();
        slots.sort_unstable_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        slots.into_iter().map(move |slot| self.view(slot))
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.ids
    }

    pub fn effective_strength(&self, id: &str) -> Option<f64> {
        self.get(id).map(|v| v.effective_strength())
    }

    pub(crate) fn strength_at(&self, slot: usize) -> f64 {
        self.usage[slot].strength(self.clock, &self.config)
    }

    /// Folds pending decay of every item up to the current clock.
    /// O(N); only used when the decay parameters change.
    pub(crate) fn materialize_all(&mut self) {
        let (now, gamma) = (self.clock, self.config.gamma);
        for usage in &mut self.usage {
            usage.materialize(now, gamma);
        }
    }
}

/// Equality of observable state: configuration, clock and the item set.
/// Slot order and the session's retired-id set are not compared.
impl PartialEq for MemoryStore {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.clock == other.clock
            && self.len() == other.len()
            && self.iter().all(|a| match other.get(a.id.as_str()) {
                Some(b) => a.base_vector == b.base_vector && a.usage == b.usage,
                None => false,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Profile;

    fn store(d: usize) -> MemoryStore {
        MemoryStore::new(MemoryConfig::profile(Profile::Balanced, d)).unwrap()
    }

    fn usage(tau: u64, materialized: u64) -> UsageState {
        UsageState {
            last_access_step: tau,
            materialized_at_step: materialized,
            ..UsageState::fresh(0)
        }
    }

    #[test]
    fn insert_fresh_item() {
        let mut s = store(2);
        s.insert("a", &[1.0, 0.0]).unwrap();
        assert_eq!(s.len(), 1);
        let a = s.get("a").unwrap();
        assert_eq!(a.effective_strength(), 1.0);
        assert_eq!(a.base_vector, &[1.0, 0.0]);
        assert_eq!(*a.usage, UsageState::fresh(0));
    }

    #[test]
    fn insert_errors() {
        let mut s = store(2);
        assert_eq!(
            s.insert("a", &[1.0]),
            Err(StoreError::DimensionMismatch { expected: 2, found: 1 })
        );
        s.insert("a", &[1.0, 0.0]).unwrap();
        assert_eq!(s.insert("a", &[0.0, 1.0]), Err(StoreError::DuplicateId("a".into())));
        assert_eq!(
            s.insert("b", &[0.0, f32::NAN]),
            Err(StoreError::NonFiniteComponent { index: 1 })
        );
        assert!(matches!(s.insert("", &[0.0, 1.0]), Err(StoreError::InvalidId(_))));
        let long = "x".repeat(MAX_ID_BYTES + 1);
        assert!(matches!(s.insert(&long, &[0.0, 1.0]), Err(StoreError::InvalidId(_))));
        s.insert(&"y".repeat(MAX_ID_BYTES), &[0.0, 1.0]).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn remove_and_get() {
        let mut s = store(2);
        s.insert("a", &[1.0, 0.0]).unwrap();
        s.insert("b", &[0.0, 1.0]).unwrap();
        s.insert("c", &[1.0, 1.0]).unwrap();
        let removed = s.remove("a").unwrap();
        assert_eq!(removed.id.as_str(), "a");
        assert_eq!(removed.base_vector, vec![1.0, 0.0]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("c").unwrap().base_vector, &[1.0, 1.0]);
        assert_eq!(s.get("b").unwrap().base_vector, &[0.0, 1.0]);
        assert_eq!(s.remove("a"), Err(StoreError::NotFound("a".into())));
        // removed ids are not reusable within a session
        assert_eq!(s.insert("a", &[1.0, 0.0]), Err(StoreError::DuplicateId("a".into())));
    }

    #[test]
    fn pending_decay_counts() {
        // decays at steps 8, 9, 10
        assert_eq!(usage(2, 2).pending_decays(10, 5), 3);
        // t - tau == gamma is still inside the grace period
        assert_eq!(usage(2, 2).pending_decays(7, 5), 0);
        assert_eq!(usage(2, 2).pending_decays(8, 5), 1);
        // materialization point later than the grace boundary
        assert_eq!(usage(2, 9).pending_decays(10, 5), 1);
        let mut r = usage(2, 2);
        r.remembered = true;
        for now in [2, 7, 8, 100, u64::MAX] {
            assert_eq!(r.pending_decays(now, 5), 0);
        }
    }

    #[test]
    fn strength_closed_form() {
        let mut u = usage(0, 0);
        u.decay_exponent = 10;
        let balanced = MemoryConfig::profile(Profile::Balanced, 1);
        assert!((u.strength(0, &balanced) - 0.598_736_939_238_378_1).abs() < 1e-12);
        let ultra = MemoryConfig::profile(Profile::UltraEfficient, 1);
        assert!((u.strength(0, &ultra) - 0.348_678_440_1).abs() < 1e-12);
    }

    #[test]
    fn effective_vector_scales_base() {
        let mut s = store(2);
        s.insert("a", &[2.0, 0.0]).unwrap();
        assert_eq!(s.get("a").unwrap().effective_vector(), vec![2.0, 0.0]);
        s.usage[0].decay_exponent = 1;
        let v = s.get("a").unwrap().effective_vector();
        assert!((v[0] - 1.9).abs() < 1e-12 && v[1] == 0.0);
        assert_eq!(s.get("a").unwrap().base_vector, &[2.0, 0.0]);
    }

    #[test]
    fn remove_where_keeps_index_consistent() {
        let mut s = store(1);
        for (i, id) in ["a", "b", "c", "d", "e"].iter().enumerate() {
            s.insert(id, &[i as f32]).unwrap();
        }
        let removed = s.remove_where(|slot| slot % 2 == 0);
        assert_eq!(removed, ["a", "c", "e"].map(|x| ItemId::new(x).unwrap()));
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("b").unwrap().base_vector, &[1.0]);
        assert_eq!(s.get("d").unwrap().base_vector, &[3.0]);
        assert!(s.get("a").is_none());
    }
}
