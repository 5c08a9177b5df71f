// Strength of an idle item over time, next to one that is accessed a few
// times with gaps, decays in between, and freezes once consolidated.

use std::error::Error;

use arm_memory::{MemoryConfig, MemoryStore, Profile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = MemoryConfig::profile(Profile::Balanced, 2);
    let (gamma, alpha) = (config.gamma, config.alpha);
    let mut store = MemoryStore::new(config)?;
    store.insert("idle", &[1.0, 0.0])?;
    store.insert("kept", &[0.0, 1.0])?;

    println!("step  idle      kept");
    for t in 1..=60u64 {
        let retrieved: &[&str] = if [1, 12, 20].contains(&t) { &["kept"] } else { &[] };
        store.step(retrieved)?;
        let idle = store.effective_strength("idle").unwrap();
        let kept = store.effective_strength("kept").unwrap();
        if t % 5 == 0 || !retrieved.is_empty() {
            println!(
                "{t:>4}  {idle:.6}  {kept:.6}{}",
                if retrieved.is_empty() { "" } else { "  <- kept accessed" }
            );
        }
        // never accessed, so its grace period counts from step 0
        let expected = alpha.powi(t.saturating_sub(u64::from(gamma)) as i32);
        assert!((idle - expected).abs() <= 1e-12 * expected);
    }
    let kept = store.get("kept").unwrap();
    println!(
        "kept: remembered={} after {} decay events, frozen at {:.6}",
        kept.usage.remembered,
        kept.decay_events(),
        kept.effective_strength()
    );
    // steps 7..=11 and 18..=19
    assert_eq!(kept.decay_events(), 7);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("decay_curve failed");
}
