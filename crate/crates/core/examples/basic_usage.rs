// Insert a few items, query, and watch one of them get consolidated.

use std::error::Error;

use arm_memory::{MemoryConfig, MemoryStore, Profile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 3))?;
    store.insert("apple", &[1.0, 0.1, 0.0])?;
    store.insert("banana", &[0.9, 0.3, 0.1])?;
    store.insert("cherry", &[0.0, 0.2, 1.0])?;

    let fruit_query = [1.0, 0.0, 0.0];
    for _ in 0..3 {
        let (result, report) = store.query(&fruit_query, 1)?;
        let top = &result.entries[0];
        println!(
            "step {:>2}: top = {} (score {:.3}), promoted = {:?}",
            report.step, top.id, top.score, report.promoted
        );
    }

    // Idle for a while: unremembered items start fading once past the grace period.
    for _ in 0..10 {
        store.step::<&str>(&[])?;
    }
    for item in store.iter_sorted() {
        println!(
            "{:<7} c={} remembered={:<5} strength={:.4}",
            item.id,
            item.usage.access_count,
            item.usage.remembered,
            item.effective_strength()
        );
    }
    assert!(store.get("apple").unwrap().usage.remembered);
    assert!(store.effective_strength("cherry").unwrap() < 1.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("basic_usage failed");
}
