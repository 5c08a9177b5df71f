//! The per-query remembrance and decay update, pruning and counts.
//!
//! [`MemoryStore::step`] writes only the retrieved items. Items outside
//! the retrieved set keep their decay pending; it is folded in the next
//! time they are touched (or when the decay parameters change).

use std::collections::HashSet;

use crate::memory::{ItemId, MemoryStore, StoreError};

/// What one query's update did.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    /// Logical time of the update.
    pub step: u64,
    pub retrieved: Vec<ItemId>,
    /// Items that became remembered in this step.
    pub promoted: Vec<ItemId>,
    /// Items whose stored state was written.
    pub touched_count: usize,
    /// Decay events folded into stored exponents in this step.
    pub materialized_decays: u64,
}

/// [`StepReport`] before ids are resolved.
#[derive(Debug)]
pub(crate) struct SlotUpdate {
    pub step: u64,
    pub promoted: Vec<usize>,
    pub touched_count: usize,
    pub materialized_decays: u64,
}

impl MemoryStore {
    /// Applies one query's update for the retrieved set.
    ///
    /// The clock advances first; then, for each retrieved item in order,
    /// decay accrued before this step is materialized, the access count is
    /// incremented, the last-access step is set, and the item is promoted
    /// once its count reaches theta. All ids are validated before anything
    /// is written.
    pub fn step<S: AsRef<str>>(&mut self, retrieved: &[S]) -> Result<StepReport, StoreError> {
        let mut slots = Vec::with_capacity(retrieved.len());
        let mut seen = HashSet::with_capacity(retrieved.len());
        for id in retrieved {
            let id = id.as_ref();
            let slot = self.slot(id).ok_or_else(|| StoreError::UnknownId(id.to_string()))?;
            if !seen.insert(slot) {
                return Err(StoreError::DuplicateRetrieved(id.to_string()));
            }
            slots.push(slot);
        }
        Ok(self.step_slots(&slots))
    }

    /// `slots` must be valid and distinct.
    pub(crate) fn step_slots(&mut self, slots: &[usize]) -> StepReport {
        let update = self.apply_update(slots);
        self.report(slots, update)
    }

    /// The bare state update: writes only the usage records of `slots` and
    /// reports by slot, so no id is read or cloned.
    pub(crate) fn apply_update(&mut self, slots: &[usize]) -> SlotUpdate {
        self.clock += 1;
        let t = self.clock;
        let (theta, gamma) = (u64::from(self.config.theta), self.config.gamma);
        let mut update = SlotUpdate {
            step: t,
            promoted: Vec::new(),
            touched_count: 0,
            materialized_decays: 0,
        };
        for &slot in slots {
            let usage = &mut self.usage[slot];
            // Step t itself never decays an item accessed at t.
            update.materialized_decays += usage.materialize(t - 1, gamma);
            usage.materialized_at_step = t;
            usage.access_count += 1;
            usage.last_access_step = t;
            if !usage.remembered && usage.access_count >= theta {
                usage.remembered = true;
                update.promoted.push(slot);
            }
            update.touched_count += 1;
        }
        update
    }

    pub(crate) fn report(&self, slots: &[usize], update: SlotUpdate) -> StepReport {
        StepReport {
            step: update.step,
            retrieved: slots.iter().map(|&s| self.ids[s].clone()).collect(),
            promoted: update.promoted.iter().map(|&s| self.ids[s].clone()).collect(),
            touched_count: update.touched_count,
            materialized_decays: update.materialized_decays,
        }
    }

    /// Removes unremembered items whose effective strength is below
    /// `threshold`. Returns removed ids in ascending order.
    pub fn prune(&mut self, threshold: f64) -> Result<Vec<ItemId>, StoreError> {
        if !(0.0..1.0).contains(&threshold) {
            return Err(StoreError::InvalidThreshold(threshold));
        }
        let (now, config) = (self.clock, self.config);
        let usage = self.usage.clone();
        let mut removed = self.remove_where(|slot| {
            let u = &usage[slot];
            !u.remembered && u.strength(now, &config) < threshold
        });
        removed.sort_unstable();
        Ok(removed)
    }

    /// Prunes with the configured threshold.
    pub fn prune_default(&mut self) -> Result<Vec<ItemId>, StoreError> {
        self.prune(self.config.prune_threshold)
    }

    pub fn remembered_count(&self) -> usize {
        self.usage.iter().filter(|u| u.remembered).count()
    }
}
