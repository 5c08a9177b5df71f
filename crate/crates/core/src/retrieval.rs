//! Exact top-k scoring over decayed vectors, and the fused
//! retrieve-then-update query.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::engine::StepReport;
use crate::memory::{check_vector, ItemId, MemoryStore, StoreError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoredItem {
    pub id: ItemId,
    pub score: f64,
}

/// Ranked results: scores non-increasing, ties by ascending id.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievalResult {
    /// Clock value at which the scores were computed.
    pub step: u64,
    pub entries: Vec<ScoredItem>,
}

impl RetrievalResult {
    pub fn ids(&self) -> impl Iterator<Item = &ItemId> {
        self.entries.iter().map(|e| &e.id)
    }
}

/// Heap entry ordered so that the *worst* candidate is the maximum.
struct Candidate<'a> {
    score: f64,
    id: &'a ItemId,
    slot: usize,
}

impl Candidate<'_> {
    /// `Less` means ranked ahead.
    fn rank_cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score).then_with(|| self.id.cmp(other.id))
    }
}

impl PartialEq for Candidate<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.rank_cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate<'_> {}

impl PartialOrd for Candidate<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank_cmp(other)
    }
}

pub(crate) fn dot(query: &[f64], row: &[f32]) -> f64 {
    query.iter().zip(row).map(|(&q, &x)| q * f64::from(x)).sum()
}

impl MemoryStore {
    /// Scores every item as `dot(query, base) * strength` and returns the
    /// best `k`. Does not mutate the store.
    pub fn top_k(&self, query: &[f32], k: usize) -> Result<RetrievalResult, StoreError> {
        let ranked = self.top_k_slots(query, k)?;
        Ok(RetrievalResult {
            step: self.clock,
            entries: ranked
                .into_iter()
                .map(|(slot, score)| ScoredItem {
                    id: self.ids[slot].clone(),
                    score,
                })
                .collect(),
        })
    }

    pub(crate) fn top_k_slots(&self, query: &[f32], k: usize) -> Result<Vec<(usize, f64)>, StoreError> {
        if k == 0 {
            return Err(StoreError::InvalidK);
        }
        check_vector(query, self.config.dimension)?;
        let d = self.config.dimension;
        let q: Vec<f64> = query.iter().map(|&x| f64::from(x)).collect();
        let mut heap: BinaryHeap<Candidate<'_>> = BinaryHeap::with_capacity(k + 1);
        for (slot, row) in self.vectors.chunks_exact(d).enumerate() {
            let cand = Candidate {
                score: dot(&q, row) * self.strength_at(slot),
                id: &self.ids[slot],
                slot,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if let Some(worst) = heap.peek() {
                if cand.rank_cmp(worst) == Ordering::Less {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        Ok(heap.into_sorted_vec().into_iter().map(|c| (c.slot, c.score)).collect())
    }

    /// Retrieves at the current clock, then applies the update for the
    /// retrieved set. Exactly one clock tick per call.
    pub fn query(&mut self, query: &[f32], k: usize) -> Result<(RetrievalResult, StepReport), StoreError> {
        let ranked = self.top_k_slots(query, k)?;
        let result = RetrievalResult {
            step: self.clock,
            entries: ranked
                .iter()
                .map(|&(slot, score)| ScoredItem {
                    id: self.ids[slot].clone(),
                    score,
                })
                .collect(),
        };
        let slots: Vec<usize> = ranked.into_iter().map(|(slot, _)| slot).collect();
        let report = self.step_slots(&slots);
        Ok((result, report))
    }
}
