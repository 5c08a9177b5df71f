// Changing parameters on a live store: new values only apply from now on,
// and invalid values are rejected without touching anything.

use std::error::Error;

use arm_memory::{MemoryConfig, MemoryStore, Profile, StoreError};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2))?;
    store.insert("x", &[1.0, 0.0])?;

    // Four decays at 0.95 (steps 6..9), then three at 0.90.
    for _ in 0..9 {
        store.step::<&str>(&[])?;
    }
    store.set_alpha(0.90)?;
    for _ in 0..3 {
        store.step::<&str>(&[])?;
    }
    let s = store.effective_strength("x").unwrap();
    println!(
        "strength after the switch: {s:.6} (0.95^4 * 0.90^3 = {:.6})",
        0.95f64.powi(4) * 0.9f64.powi(3)
    );

    let before = store.clone();
    match store.set_alpha(1.5) {
        Err(StoreError::InvalidValue(v)) => println!("rejected: {v}"),
        other => return Err(format!("expected a rejection, got {other:?}").into()),
    }
    assert_eq!(store, before);

    // Lowering theta does not promote items that already crossed it.
    store.step(&["x"])?;
    store.set_theta(1)?;
    println!(
        "after theta -> 1, remembered = {}",
        store.get("x").unwrap().usage.remembered
    );
    store.step(&["x"])?;
    println!("next access, remembered = {}", store.get("x").unwrap().usage.remembered);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("runtime_reconfig failed");
}
