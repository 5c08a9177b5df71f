// The three built-in profiles on the same skewed query stream.

use std::error::Error;

use arm_memory::harness::{run_workload, RunOptions};
use arm_memory::workload::{generate, synthetic_corpus};
use arm_memory::{MemoryConfig, MemoryStore, Profile, WorkloadKind, WorkloadSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (n, d) = (200, 32);
    let corpus = synthetic_corpus(n, d, 1);
    let (ids, vectors): (Vec<_>, Vec<_>) = corpus.iter().cloned().unzip();
    let spec = WorkloadSpec {
        kind: WorkloadKind::Zipf { s: 1.1 },
        n_steps: 500,
        noise_sigma: 0.05,
        seed: 9,
    };
    let queries = generate(&spec, &ids, &vectors)?;

    println!(
        "{:<16} {:>5} {:>5} {:>7} {:>10} {:>9}",
        "profile", "theta", "gamma", "alpha", "remembered", "hit rate"
    );
    for profile in Profile::ALL {
        let mut store = MemoryStore::new(MemoryConfig::profile(profile, d))?;
        for (id, v) in &corpus {
            store.insert(id.as_str(), v)?;
        }
        let log = run_workload(&mut store, &queries, RunOptions::new(5))?;
        let last = log.stats.last().unwrap();
        let c = store.config();
        println!(
            "{:<16} {:>5} {:>5} {:>7.2} {:>10} {:>8.1}%",
            profile.name(),
            c.theta,
            c.gamma,
            c.alpha,
            last.remembered_count,
            100.0 * log.target_hits as f64 / queries.len() as f64
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("profiles failed");
}
