//! Store statistics over time and their CSV/JSON export.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::memory::MemoryStore;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsSnapshot {
    pub step: u64,
    pub item_count: usize,
    pub remembered_count: usize,
    pub remembered_fraction: f64,
    /// Sum of effective-vector l2 norms over unremembered items.
    pub stale_norm_sum: f64,
    /// Mean effective strength; 1.0 for an empty store.
    pub mean_strength: f64,
    /// Items whose strength is above the configured prune threshold.
    pub nonzero_embeddings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyRecord {
    pub step: u64,
    pub retrieval_micros: f64,
    pub update_micros: f64,
    pub touched_count: usize,
}

/// End-of-run summary printed by the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: u64,
    pub p50_update_micros: f64,
    pub p99_update_micros: f64,
    pub final_remembered_fraction: f64,
    pub final_item_count: usize,
}

/// Reads the store at its current clock. Never mutates.
pub fn snapshot(store: &MemoryStore) -> StatsSnapshot {
    let threshold = store.config().prune_threshold;
    let mut remembered = 0;
    let mut stale_norm_sum = 0.0;
    let mut strength_sum = 0.0;
    let mut nonzero = 0;
    for item in store.iter() {
        let s = item.effective_strength();
        strength_sum += s;
        if s > threshold {
            nonzero += 1;
        }
        if item.usage.remembered {
            remembered += 1;
        } else {
            stale_norm_sum += item.base_norm() * s;
        }
    }
    let n = store.len();
    StatsSnapshot {
        step: store.clock(),
        item_count: n,
        remembered_count: remembered,
        remembered_fraction: remembered as f64 / n.max(1) as f64,
        stale_norm_sum,
        mean_strength: if n == 0 { 1.0 } else { strength_sum / n as f64 },
        nonzero_embeddings: nonzero,
    }
}

impl MemoryStore {
    pub fn stats(&self) -> StatsSnapshot {
        snapshot(self)
    }
}

/// Nearest-rank percentile, `q` in [0, 1]. 0.0 for an empty slice.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (q * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

pub fn summarize(stats: &[StatsSnapshot], latency: &[LatencyRecord], final_stats: &StatsSnapshot) -> RunSummary {
    let update: Vec<f64> = latency.iter().map(|r| r.update_micros).collect();
    RunSummary {
        steps: stats.len() as u64,
        p50_update_micros: percentile(&update, 0.50),
        p99_update_micros: percentile(&update, 0.99),
        final_remembered_fraction: final_stats.remembered_fraction,
        final_item_count: final_stats.item_count,
    }
}

/// Outcome of the remembered-set stabilization check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub non_decreasing: bool,
    /// Remembered count identical across the final `window` rows.
    pub plateau: bool,
    pub window: usize,
}

impl Stabilization {
    pub fn passed(&self) -> bool {
        self.non_decreasing && self.plateau
    }
}

/// Checks that the remembered count never drops and is constant over the
/// final `tail_fraction` of the series.
pub fn check_stabilization(series: &[StatsSnapshot], tail_fraction: f64) -> Stabilization {
    let counts: Vec<usize> = series.iter().map(|s| s.remembered_count).collect();
    let non_decreasing = counts.windows(2).all(|w| w[0] <= w[1]);
    let window = ((counts.len() as f64) * tail_fraction).ceil() as usize;
    let tail = &counts[counts.len() - window.min(counts.len())..];
    let plateau = tail.windows(2).all(|w| w[0] == w[1]);
    Stabilization {
        non_decreasing,
        plateau,
        window,
    }
}

/// Formats `x` with nine significant digits in positional notation.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-300..=300).contains(&magnitude) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A row type with a fixed column layout.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRecord for StatsSnapshot {
    const HEADER: &'static [&'static str] = &[
        "step",
        "item_count",
        "remembered_count",
        "remembered_fraction",
        "stale_norm_sum",
        "mean_strength",
        "nonzero_embeddings",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.step.to_string(),
            self.item_count.to_string(),
            self.remembered_count.to_string(),
            format_sig(self.remembered_fraction),
            format_sig(self.stale_norm_sum),
            format_sig(self.mean_strength),
            self.nonzero_embeddings.to_string(),
        ]
    }
}

impl CsvRecord for LatencyRecord {
    const HEADER: &'static [&'static str] = &["step", "retrieval_micros", "update_micros", "touched_count"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.step.to_string(),
            format_sig(self.retrieval_micros),
            format_sig(self.update_micros),
            self.touched_count.to_string(),
        ]
    }
}

/// Header row plus one row per record.
pub fn export_csv<T: CsvRecord>(records: &[T], path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(T::HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()
}

/// Reads back a file written by [`export_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_path(path)?.into_deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MemoryConfig, Profile};

    fn store() -> MemoryStore {
        let mut s = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
        s.insert("a", &[3.0, 4.0]).unwrap();
        s.insert("b", &[1.0, 0.0]).unwrap();
        s.insert("c", &[0.0, 2.0]).unwrap();
        s
    }

    #[test]
    fn fresh_store_snapshot() {
        let s = store().stats();
        assert_eq!(s.item_count, 3);
        assert_eq!(s.remembered_fraction, 0.0);
        assert!((s.stale_norm_sum - 8.0).abs() < 1e-12);
        assert_eq!(s.mean_strength, 1.0);
        assert_eq!(s.nonzero_embeddings, 3);
    }

    #[test]
    fn remembered_items_excluded_from_stale_norm() {
        let mut s = store();
        s.set_theta(1).unwrap();
        s.step(&["a", "b", "c"]).unwrap();
        let snap = s.stats();
        assert_eq!(snap.stale_norm_sum, 0.0);
        assert_eq!(snap.remembered_fraction, 1.0);
    }

    #[test]
    fn stale_norm_tracks_decay() {
        let mut s = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
        s.insert("u", &[0.6, 0.8]).unwrap();
        for _ in 0..15 {
            s.step::<&str>(&[]).unwrap();
        }
        let mut expected = 1.0;
        for _ in 0..10 {
            expected *= 0.95;
        }
        assert!((s.stats().stale_norm_sum - expected).abs() < 1e-7);
        assert_eq!(s.stats(), s.stats());
    }

    #[test]
    fn empty_store_snapshot() {
        let s = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
        let snap = s.stats();
        assert_eq!(
            (snap.item_count, snap.remembered_fraction, snap.mean_strength),
            (0, 0.0, 1.0)
        );
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.598_736_939_238_378), "0.598736939");
        assert_eq!(format_sig(1_234.567_891_23), "1234.56789");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1.00000000");
        assert_eq!(format_sig(1e12), "1000000000000");
    }

    #[test]
    fn percentiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.5), 50.0);
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&[], 0.5), 0.0);
    }

    #[test]
    fn stabilization_check() {
        let row = |c| StatsSnapshot {
            remembered_count: c,
            ..store().stats()
        };
        let ok: Vec<_> = [0, 1, 2, 3, 3, 3, 3, 3, 3, 3].into_iter().map(row).collect();
        assert!(check_stabilization(&ok, 0.2).passed());
        let late: Vec<_> = [0, 1, 2, 3, 3, 3, 3, 3, 3, 4].into_iter().map(row).collect();
        assert!(!check_stabilization(&late, 0.2).plateau);
        let drop: Vec<_> = [0, 2, 1, 1, 1].into_iter().map(row).collect();
        assert!(!check_stabilization(&drop, 0.2).non_decreasing);
    }

    #[test]
    fn csv_export_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        export_csv::<StatsSnapshot>(&[], &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "step,item_count,remembered_count,remembered_fraction,stale_norm_sum,mean_strength,nonzero_embeddings\n"
        );

        let rows = vec![
            LatencyRecord {
                step: 1,
                retrieval_micros: 12.345_678_912_3,
                update_micros: 0.25,
                touched_count: 5,
            },
            LatencyRecord {
                step: 2,
                retrieval_micros: 1.0 / 3.0,
                update_micros: 7.0,
                touched_count: 4,
            },
        ];
        let path = dir.path().join("lat.csv");
        export_csv(&rows, &path).unwrap();
        let back: Vec<LatencyRecord> = read_csv(&path).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.step, b.step);
            assert_eq!(a.touched_count, b.touched_count);
            assert!((a.retrieval_micros - b.retrieval_micros).abs() <= 1e-8 * a.retrieval_micros);
            assert_eq!(a.update_micros, b.update_micros);
        }
    }
}
