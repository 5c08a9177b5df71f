#![allow(dead_code)]

pub mod metric_oracle;

use arm_memory::workload::{generate, synthetic_corpus, WorkloadKind, WorkloadQuery, WorkloadSpec};
use arm_memory::{EagerStore, MemoryConfig, MemoryStore};

/// A lazy store and the eager reference fed the same inputs.
pub struct Twin {
    pub lazy: MemoryStore,
    pub eager: EagerStore,
}

impl Twin {
    pub fn new(config: MemoryConfig, n: usize, steps: u64, seed: u64) -> (Self, Vec<WorkloadQuery>) {
        let corpus = synthetic_corpus(n, config.dimension, seed);
        let mut lazy = MemoryStore::new(config).unwrap();
        let mut eager = EagerStore::new(config).unwrap();
        for (id, v) in &corpus {
            lazy.insert(id.as_str(), v).unwrap();
            eager.insert(id.as_str(), v).unwrap();
        }
        let (ids, vecs): (Vec<_>, Vec<_>) = corpus.into_iter().unzip();
        let spec = WorkloadSpec {
            kind: WorkloadKind::Zipf { s: 1.0 },
            n_steps: steps,
            noise_sigma: 0.05,
            seed: seed ^ 0x5eed,
        };
        let queries = if ids.is_empty() {
            Vec::new()
        } else {
            generate(&spec, &ids, &vecs).unwrap()
        };
        (Twin { lazy, eager }, queries)
    }

    /// Retrieves with the lazy store and applies the same retrieved set to
    /// both implementations.
    pub fn query(&mut self, vector: &[f32], k: usize) {
        let result = self.lazy.top_k(vector, k).unwrap();
        let ids: Vec<_> = result.ids().cloned().collect();
        let lazy = self.lazy.step(&ids).unwrap();
        let eager = self.eager.step(&ids).unwrap();
        assert_eq!(lazy.promoted, eager.promoted);
        assert!(lazy.touched_count <= ids.len());
    }

    /// Compares counts, last access, flags, strengths and vectors.
    pub fn compare(&self, rel_tol: f64) -> Result<(), String> {
        if self.lazy.len() != self.eager.len() || self.lazy.clock() != self.eager.clock() {
            return Err(format!(
                "size/clock differ: lazy {}@{} eager {}@{}",
                self.lazy.len(),
                self.lazy.clock(),
                self.eager.len(),
                self.eager.clock()
            ));
        }
        for e in self.eager.items() {
            let l = self
                .lazy
                .get(e.id.as_str())
                .ok_or_else(|| format!("{} missing from lazy store", e.id))?;
            let u = l.usage;
            if (u.access_count, u.last_access_step, u.remembered) != (e.access_count, e.last_access_step, e.remembered)
            {
                return Err(format!(
                    "{}: lazy (c={}, tau={}, rem={}) eager (c={}, tau={}, rem={})",
                    e.id,
                    u.access_count,
                    u.last_access_step,
                    u.remembered,
                    e.access_count,
                    e.last_access_step,
                    e.remembered
                ));
            }
            let s = l.effective_strength();
            if !close(s, e.strength, rel_tol) {
                return Err(format!("{}: strength lazy {s} eager {}", e.id, e.strength));
            }
            for (a, b) in l.effective_vector().iter().zip(&e.vector) {
                if !close(*a, *b, rel_tol) {
                    return Err(format!("{}: vector component lazy {a} eager {b}", e.id));
                }
            }
        }
        Ok(())
    }
}

pub fn close(a: f64, b: f64, rel_tol: f64) -> bool {
    a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}

/// `alpha` multiplied `n` times.
pub fn repeated(alpha: f64, n: u64) -> f64 {
    let mut s = 1.0;
    for _ in 0..n {
        s *= alpha;
    }
    s
}
