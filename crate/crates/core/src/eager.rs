//! Reference implementation that executes the update literally: every
//! step sweeps all unremembered items and scales the stale ones in place.
//!
//! It is O(N) per query and exists to check the lazy store against.

use std::collections::{HashMap, HashSet};

use crate::config::{check_alpha, check_prune_threshold, check_theta, MemoryConfig, Violations};
use crate::engine::StepReport;
use crate::memory::{check_vector, ItemId, StoreError};

#[derive(Clone, Debug, PartialEq)]
pub struct EagerItem {
    pub id: ItemId,
    /// Mutated in place by every decay.
    pub vector: Vec<f64>,
    /// Product of every decay factor applied so far.
    pub strength: f64,
    pub access_count: u64,
    pub last_access_step: u64,
    pub remembered: bool,
}

#[derive(Clone, Debug)]
pub struct EagerStore {
    config: MemoryConfig,
    clock: u64,
    items: Vec<EagerItem>,
    index: HashMap<ItemId, usize>,
}

impl EagerStore {
    pub fn new(config: MemoryConfig) -> Result<Self, Violations> {
        config.validate()?;
        Ok(EagerStore {
            config,
            clock: 0,
            items: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn config(&self) -> &MemoryConfig {
        &self.config
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn insert(&mut self, id: &str, vector: &[f32]) -> Result<(), StoreError> {
        let id = ItemId::new(id)?;
        check_vector(vector, self.config.dimension)?;
        if self.index.contains_key(&id) {
            return Err(StoreError::DuplicateId(id.to_string()));
        }
        self.index.insert(id.clone(), self.items.len());
        self.items.push(EagerItem {
            id,
            vector: vector.iter().map(|&x| f64::from(x)).collect(),
            strength: 1.0,
            access_count: 0,
            last_access_step: self.clock,
            remembered: false,
        });
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&EagerItem> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn items(&self) -> &[EagerItem] {
        &self.items
    }

    /// Retrieval updates for the whole set first, then one decay sweep at
    /// the same step. `touched_count` counts every item written, decayed
    /// ones included.
    pub fn step<S: AsRef<str>>(&mut self, retrieved: &[S]) -> Result<StepReport, StoreError> {
        let mut slots = Vec::with_capacity(retrieved.len());
        let mut seen = HashSet::new();
        for id in retrieved {
            let id = id.as_ref();
            let slot = *self
                .index
                .get(id)
                .ok_or_else(|| StoreError::UnknownId(id.to_string()))?;
            if !seen.insert(slot) {
                return Err(StoreError::DuplicateRetrieved(id.to_string()));
            }
            slots.push(slot);
        }

        self.clock += 1;
        let t = self.clock;
        let mut report = StepReport {
            step: t,
            retrieved: Vec::new(),
            promoted: Vec::new(),
            touched_count: 0,
            materialized_decays: 0,
        };
        for slot in slots {
            let item = &mut self.items[slot];
            item.access_count += 1;
            item.last_access_step = t;
            if item.access_count >= u64::from(self.config.theta) && !item.remembered {
                item.remembered = true;
                report.promoted.push(item.id.clone());
            }
            report.retrieved.push(item.id.clone());
            report.touched_count += 1;
        }
        let (alpha, gamma) = (self.config.alpha, u64::from(self.config.gamma));
        for item in self.items.iter_mut().filter(|i| !i.remembered) {
            if t - item.last_access_step > gamma {
                for x in &mut item.vector {
                    *x *= alpha;
                }
                item.strength *= alpha;
                report.materialized_decays += 1;
                if item.last_access_step != t {
                    report.touched_count += 1;
                }
            }
        }
        Ok(report)
    }

    pub fn prune(&mut self, threshold: f64) -> Result<Vec<ItemId>, StoreError> {
        if !(0.0..1.0).contains(&threshold) {
            return Err(StoreError::InvalidThreshold(threshold));
        }
        let mut removed: Vec<ItemId> = Vec::new();
        self.items.retain(|i| {
            let drop = !i.remembered && i.strength < threshold;
            if drop {
                removed.push(i.id.clone());
            }
            !drop
        });
        self.index = self
            .items
            .iter()
            .enumerate()
            .map(|(i, item)| (item.id.clone(), i))
            .collect();
        removed.sort_unstable();
        Ok(removed)
    }

    pub fn set_alpha(&mut self, alpha: f64) -> Result<(), StoreError> {
        if let Some(v) = check_alpha(alpha) {
            return Err(StoreError::InvalidValue(Violations(vec![v])));
        }
        self.config.alpha = alpha;
        Ok(())
    }

    pub fn set_theta(&mut self, theta: u32) -> Result<(), StoreError> {
        if let Some(v) = check_theta(theta) {
            return Err(StoreError::InvalidValue(Violations(vec![v])));
        }
        self.config.theta = theta;
        Ok(())
    }

    pub fn set_gamma(&mut self, gamma: u32) -> Result<(), StoreError> {
        self.config.gamma = gamma;
        Ok(())
    }

    pub fn set_prune_threshold(&mut self, threshold: f64) -> Result<(), StoreError> {
        if let Some(v) = check_prune_threshold(threshold) {
            return Err(StoreError::InvalidValue(Violations(vec![v])));
        }
        self.config.prune_threshold = threshold;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Profile;

    fn eager(ids: &[&str]) -> EagerStore {
        let mut s = EagerStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
        for id in ids {
            s.insert(id, &[2.0, 0.0]).unwrap();
        }
        s
    }

    #[test]
    fn empty_retrieval_shrinks_stale_items() {
        let mut s = eager(&["a", "b"]);
        for _ in 0..5 {
            s.step::<&str>(&[]).unwrap();
        }
        assert_eq!(s.get("a").unwrap().strength, 1.0);
        s.step::<&str>(&[]).unwrap();
        let a = s.get("a").unwrap();
        assert_eq!(a.strength, 0.95);
        assert_eq!(a.vector, vec![2.0 * 0.95, 0.0]);
    }

    #[test]
    fn remembered_items_never_change() {
        let mut s = eager(&["a"]);
        s.set_theta(1).unwrap();
        s.step(&["a"]).unwrap();
        let before = s.get("a").unwrap().vector.clone();
        for _ in 0..100 {
            s.step::<&str>(&[]).unwrap();
        }
        assert_eq!(s.get("a").unwrap().vector, before);
    }
}
