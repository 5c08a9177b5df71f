use arm_memory::{MemoryConfig, MemoryStore, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scores every item, sorts everything, truncates.
fn naive_top_k(store: &MemoryStore, query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = store
        .iter()
        .map(|item| {
            let dot: f64 = item
                .base_vector
                .iter()
                .zip(query)
                .map(|(&x, &q)| f64::from(x) * f64::from(q))
                .sum();
            (item.id.to_string(), dot * item.effective_strength())
        })
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

#[test]
fn top_k_matches_full_sort_on_random_stores() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let d = rng.random_range(1..8);
        let n = rng.random_range(0..40);
        let k = rng.random_range(1..12);
        let mut store = MemoryStore::new(MemoryConfig::profile(Profile::UltraEfficient, d)).unwrap();
        for i in 0..n {
            // coarse grid values so exact ties are common
            let v: Vec<f32> = (0..d).map(|_| rng.random_range(-2..3) as f32 * 0.5).collect();
            store.insert(&format!("i{i:03}"), &v).unwrap();
        }
        // random usage history so strengths differ
        for _ in 0..rng.random_range(0..30) {
            let picks: Vec<String> = (0..n)
                .filter(|_| rng.random_bool(0.1))
                .map(|i| format!("i{i:03}"))
                .collect();
            store.step(&picks).unwrap();
        }
        let q: Vec<f32> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got: Vec<(String, f64)> = store
            .top_k(&q, k)
            .unwrap()
            .entries
            .into_iter()
            .map(|e| (e.id.to_string(), e.score))
            .collect();
        let want = naive_top_k(&store, &q, k);
        assert_eq!(
            got.iter().map(|g| &g.0).collect::<Vec<_>>(),
            want.iter().map(|w| &w.0).collect::<Vec<_>>(),
            "case {case}"
        );
        assert!(got.windows(2).all(|w| w[0].1 >= w[1].1));
    }
}

#[test]
fn decay_overturns_base_similarity() {
    // "near" has the higher base similarity but is never retrieved; "far"
    // is consolidated. Once near decays enough, far wins top-1.
    let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
    store.insert("near", &[1.0, 0.0]).unwrap();
    store.insert("far", &[0.6, 0.8]).unwrap();
    let query = [1.0, 0.0];
    assert_eq!(store.top_k(&query, 1).unwrap().entries[0].id.as_str(), "near");

    for _ in 0..3 {
        store.step(&["far"]).unwrap();
    }
    let mut overturned_at = None;
    for _ in 0..40 {
        store.step::<&str>(&[]).unwrap();
        let top = store.top_k(&query, 1).unwrap();
        if top.entries[0].id.as_str() == "far" {
            overturned_at = Some(store.clock());
            break;
        }
    }
    // near decays from step 6; 0.95^n < 0.6 first at n = 10 -> clock 15
    assert_eq!(overturned_at, Some(15));
}

#[test]
fn halving_strength_halves_score() {
    let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 3)).unwrap();
    store.insert("a", &[0.2, 0.3, 0.4]).unwrap();
    let before = store.top_k(&[1.0, 1.0, 1.0], 1).unwrap().entries[0].score;
    store.set_gamma(0).unwrap();
    store.set_alpha(0.5).unwrap();
    store.step::<&str>(&[]).unwrap();
    let after = store.top_k(&[1.0, 1.0, 1.0], 1).unwrap().entries[0].score;
    assert!((after - before / 2.0).abs() < 1e-12);
}
