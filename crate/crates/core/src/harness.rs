//! Drives a query stream through a store, timing the retrieval and update
//! phases separately and recording telemetry.

use std::time::Instant;

use crate::engine::StepReport;
use crate::memory::{MemoryStore, StoreError};
use crate::telemetry::{LatencyRecord, StatsSnapshot};
use crate::workload::WorkloadQuery;

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub k: usize,
    /// Take a [`StatsSnapshot`] after every step (O(N) each).
    pub record_stats: bool,
    /// Keep every [`StepReport`].
    pub keep_reports: bool,
}

impl RunOptions {
    pub fn new(k: usize) -> Self {
        RunOptions {
            k,
            record_stats: true,
            keep_reports: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub stats: Vec<StatsSnapshot>,
    pub latency: Vec<LatencyRecord>,
    pub reports: Vec<StepReport>,
    /// Queries whose target item was among the retrieved results.
    pub target_hits: usize,
}

fn micros(since: Instant) -> f64 {
    since.elapsed().as_nanos() as f64 / 1_000.0
}

pub fn run_workload(
    store: &mut MemoryStore,
    queries: &[WorkloadQuery],
    opts: RunOptions,
) -> Result<RunLog, StoreError> {
    let mut log = RunLog {
        latency: Vec::with_capacity(queries.len()),
        ..RunLog::default()
    };
    for q in queries {
        let started = Instant::now();
        let ranked = store.top_k_slots(&q.vector, opts.k)?;
        let retrieval_micros = micros(started);

        let slots: Vec<usize> = ranked.iter().map(|&(slot, _)| slot).collect();
        if slots.iter().any(|&s| store.ids[s] == q.target) {
            log.target_hits += 1;
        }
        let started = Instant::now();
        // Timed without resolving ids for the report.
        let update = store.apply_update(&slots);
        let update_micros = micros(started);

        log.latency.push(LatencyRecord {
            step: update.step,
            retrieval_micros,
            update_micros,
            touched_count: update.touched_count,
        });
        if opts.record_stats {
            log.stats.push(store.stats());
        }
        if opts.keep_reports {
            log.reports.push(store.report(&slots, update));
        }
    }
    Ok(log)
}
