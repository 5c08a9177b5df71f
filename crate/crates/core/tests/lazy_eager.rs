mod common;

use arm_memory::{EagerStore, MemoryConfig, MemoryStore, Profile};
use common::{close, repeated, Twin};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Op {
    Query,
    Idle,
    Prune(f64),
    SetAlpha(f64),
    SetGamma(u32),
    SetTheta(u32),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        12 => Just(Op::Query),
        3 => Just(Op::Idle),
        1 => (0.0..0.6f64).prop_map(Op::Prune),
        1 => (0.5..0.999f64).prop_map(Op::SetAlpha),
        1 => (0u32..8).prop_map(Op::SetGamma),
        1 => (1u32..6).prop_map(Op::SetTheta),
    ]
}

fn profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        Just(Profile::Balanced),
        Just(Profile::UltraEfficient),
        Just(Profile::Aggressive)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lazy_matches_eager_under_mixed_operations(
        profile in profile(),
        seed in any::<u64>(),
        k in 1usize..6,
        ops in prop::collection::vec(op(), 1..150),
    ) {
        let (mut twin, queries) = Twin::new(MemoryConfig::profile(profile, 8), 30, ops.len() as u64, seed);
        for (i, op) in ops.iter().enumerate() {
            match op {
                Op::Query => twin.query(&queries[i].vector, k),
                Op::Idle => {
                    twin.lazy.step::<&str>(&[]).unwrap();
                    twin.eager.step::<&str>(&[]).unwrap();
                }
                Op::Prune(t) => {
                    prop_assert_eq!(twin.lazy.prune(*t).unwrap(), twin.eager.prune(*t).unwrap());
                }
                Op::SetAlpha(a) => {
                    twin.lazy.set_alpha(*a).unwrap();
                    twin.eager.set_alpha(*a).unwrap();
                }
                Op::SetGamma(g) => {
                    twin.lazy.set_gamma(*g).unwrap();
                    twin.eager.set_gamma(*g).unwrap();
                }
                Op::SetTheta(t) => {
                    twin.lazy.set_theta(*t).unwrap();
                    twin.eager.set_theta(*t).unwrap();
                }
            }
            if let Err(e) = twin.compare(1e-9) {
                return Err(TestCaseError::fail(format!("after op {i} ({op:?}): {e}")));
            }
        }
    }

    #[test]
    fn strength_stays_in_unit_interval(seed in any::<u64>(), steps in 1u64..300) {
        let (mut twin, queries) = Twin::new(MemoryConfig::profile(Profile::UltraEfficient, 8), 20, steps, seed);
        for q in &queries {
            twin.query(&q.vector, 3);
            for item in twin.lazy.iter() {
                let s = item.effective_strength();
                prop_assert!(s > 0.0 && s <= 1.0);
            }
        }
    }

    #[test]
    fn remembered_never_reverts(seed in any::<u64>()) {
        let (mut twin, queries) = Twin::new(MemoryConfig::profile(Profile::Balanced, 8), 25, 200, seed);
        let mut remembered = std::collections::HashSet::new();
        for q in &queries {
            twin.query(&q.vector, 5);
            for item in twin.lazy.iter() {
                if remembered.contains(item.id) {
                    prop_assert!(item.usage.remembered);
                }
                if item.usage.remembered {
                    remembered.insert(item.id.clone());
                }
            }
        }
    }
}

#[test]
fn untouched_item_forgets_monotonically() {
    for profile in Profile::ALL {
        let cfg = MemoryConfig::profile(profile, 2);
        let mut s = MemoryStore::new(cfg).unwrap();
        s.insert("x", &[1.0, 0.0]).unwrap();
        let mut prev = 1.0;
        for t in 1..=200u64 {
            s.step::<&str>(&[]).unwrap();
            let cur = s.effective_strength("x").unwrap();
            if t > u64::from(cfg.gamma) {
                assert!(cur < prev, "{profile}: t={t}");
            } else {
                assert_eq!(cur, 1.0);
            }
            prev = cur;
        }
    }
}

#[test]
fn remembered_strength_is_frozen() {
    let mut s = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
    s.insert("x", &[1.0, 0.0]).unwrap();
    s.step(&["x"]).unwrap();
    for _ in 0..20 {
        s.step::<&str>(&[]).unwrap();
    }
    s.step(&["x"]).unwrap();
    s.step(&["x"]).unwrap();
    let frozen = s.effective_strength("x").unwrap();
    assert!(frozen < 1.0);
    for _ in 0..500 {
        s.step::<&str>(&[]).unwrap();
        assert_eq!(s.effective_strength("x").unwrap(), frozen);
    }
    assert_eq!(s.get("x").unwrap().usage.decay_exponent, 15);
}

#[test]
fn closed_form_matches_repeated_multiplication() {
    for alpha in [0.5, 0.9, 0.95, 0.99] {
        let mut cfg = MemoryConfig::profile(Profile::Balanced, 1);
        cfg.alpha = alpha;
        cfg.gamma = 0;
        let mut s = MemoryStore::new(cfg).unwrap();
        s.insert("x", &[1.0]).unwrap();
        for n in 1..=400u64 {
            s.step::<&str>(&[]).unwrap();
            let got = s.effective_strength("x").unwrap();
            assert!(close(got, repeated(alpha, n), 1e-12), "alpha={alpha} n={n}");
        }
    }
}

#[test]
fn theta_lowered_does_not_promote_retroactively() {
    let mut s = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 1)).unwrap();
    s.insert("x", &[1.0]).unwrap();
    s.step(&["x"]).unwrap();
    s.step(&["x"]).unwrap();
    s.set_theta(1).unwrap();
    assert!(!s.get("x").unwrap().usage.remembered);
    assert_eq!(s.remembered_count(), 0);
    let r = s.step(&["x"]).unwrap();
    assert_eq!(r.promoted.len(), 1);
}

#[test]
fn two_phase_alpha_history() {
    let cfg = MemoryConfig::profile(Profile::Balanced, 1);
    let mut lazy = MemoryStore::new(cfg).unwrap();
    let mut eager = EagerStore::new(cfg).unwrap();
    lazy.insert("x", &[1.0]).unwrap();
    eager.insert("x", &[1.0]).unwrap();
    // 5 grace steps + 4 decay events
    for _ in 0..9 {
        lazy.step::<&str>(&[]).unwrap();
        eager.step::<&str>(&[]).unwrap();
    }
    lazy.set_alpha(0.90).unwrap();
    eager.set_alpha(0.90).unwrap();
    for _ in 0..3 {
        lazy.step::<&str>(&[]).unwrap();
        eager.step::<&str>(&[]).unwrap();
    }
    let expected = repeated(0.95, 4) * repeated(0.90, 3);
    let got = lazy.effective_strength("x").unwrap();
    assert!(close(got, expected, 1e-12));
    assert!(close(got, eager.get("x").unwrap().strength, 1e-12));
    assert!((got - 0.593_775).abs() < 1e-6);
}
