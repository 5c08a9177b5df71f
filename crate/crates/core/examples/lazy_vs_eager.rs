// The lazy store touches only the retrieved items per step; the eager
// reference sweeps the whole collection. Both end in the same state.

use std::error::Error;
use std::time::Instant;

use arm_memory::workload::{generate, synthetic_corpus};
use arm_memory::{EagerStore, MemoryConfig, MemoryStore, Profile, WorkloadKind, WorkloadSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (n, d, k) = (5_000, 16, 5);
    let config = MemoryConfig::profile(Profile::UltraEfficient, d);
    let corpus = synthetic_corpus(n, d, 8);
    let (ids, vectors): (Vec<_>, Vec<_>) = corpus.iter().cloned().unzip();
    let queries = generate(
        &WorkloadSpec {
            kind: WorkloadKind::Uniform,
            n_steps: 300,
            noise_sigma: 0.05,
            seed: 8,
        },
        &ids,
        &vectors,
    )?;

    let mut lazy = MemoryStore::new(config)?;
    let mut eager = EagerStore::new(config)?;
    for (id, v) in &corpus {
        lazy.insert(id.as_str(), v)?;
        eager.insert(id.as_str(), v)?;
    }

    let (mut lazy_time, mut eager_time) = (0.0, 0.0);
    let (mut lazy_touched, mut eager_touched) = (0, 0);
    for q in &queries {
        let retrieved: Vec<String> = lazy.top_k(&q.vector, k)?.ids().map(|id| id.to_string()).collect();
        let t = Instant::now();
        lazy_touched += lazy.step(&retrieved)?.touched_count;
        lazy_time += t.elapsed().as_secs_f64();
        let t = Instant::now();
        eager_touched += eager.step(&retrieved)?.touched_count;
        eager_time += t.elapsed().as_secs_f64();
    }

    let mut worst = 0.0f64;
    for e in eager.items() {
        let lazy_s = lazy.effective_strength(e.id.as_str()).unwrap();
        worst = worst.max((lazy_s - e.strength).abs() / e.strength.max(f64::MIN_POSITIVE));
    }
    let steps = queries.len() as f64;
    println!(
        "lazy : {:>8.0} items touched/step, {:>8.2} us/step",
        lazy_touched as f64 / steps,
        1e6 * lazy_time / steps
    );
    println!(
        "eager: {:>8.0} items touched/step, {:>8.2} us/step",
        eager_touched as f64 / steps,
        1e6 * eager_time / steps
    );
    println!("max relative strength difference: {worst:.2e}");
    assert!(worst < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("lazy_vs_eager failed");
}
