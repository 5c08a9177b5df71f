// Save a store mid-run, load it back, and continue exactly where it left off.

use std::error::Error;

use arm_memory::persistence::{load, save};
use arm_memory::workload::{generate, synthetic_corpus};
use arm_memory::{MemoryConfig, MemoryStore, Profile, WorkloadKind, WorkloadSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = synthetic_corpus(50, 8, 3);
    let (ids, vectors): (Vec<_>, Vec<_>) = corpus.iter().cloned().unzip();
    let queries = generate(
        &WorkloadSpec {
            kind: WorkloadKind::Zipf { s: 1.0 },
            n_steps: 300,
            noise_sigma: 0.1,
            seed: 4,
        },
        &ids,
        &vectors,
    )?;

    let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 8))?;
    for (id, v) in &corpus {
        store.insert(id.as_str(), v)?;
    }
    let mut reference = store.clone();

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("memory.arm");
    for q in &queries[..120] {
        store.query(&q.vector, 3)?;
    }
    save(&store, &path)?;
    println!(
        "saved {} items at step {} ({} bytes)",
        store.len(),
        store.clock(),
        std::fs::metadata(&path)?.len()
    );

    let mut restored = load(&path)?;
    for q in &queries[120..] {
        restored.query(&q.vector, 3)?;
    }
    for q in &queries {
        reference.query(&q.vector, 3)?;
    }
    assert_eq!(restored, reference);
    println!(
        "resumed run matches the uninterrupted one: step {}, {} remembered",
        restored.clock(),
        restored.remembered_count()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("snapshot_roundtrip failed");
}
