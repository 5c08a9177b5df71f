//! Metrics recomputed from first principles: the ideal DCG is found by
//! enumerating every ordering of the judged corpus, and hit counts are taken
//! from the judgment side rather than the ranking.

use std::collections::BTreeMap;

use arm_memory::Judgment;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

pub fn dcg(order: &[String], grades: &BTreeMap<String, u32>, k: usize) -> f64 {
    let mut total = 0.0;
    for (pos, id) in order.iter().enumerate().take(k) {
        let g = grades.get(id).copied().unwrap_or(0);
        total += (2f64.powi(g as i32) - 1.0) / ((pos + 2) as f64).log2();
    }
    total
}

pub struct Oracle {
    pub ndcg: f64,
    pub precision: f64,
    pub recall: f64,
}

pub fn oracle(ranked: &[String], corpus: &[String], j: &Judgment, k: usize) -> Oracle {
    let best = permutations(corpus)
        .iter()
        .map(|p| dcg(p, &j.relevant, k))
        .fold(0.0, f64::max);
    let relevant: Vec<&String> = j.relevant.iter().filter(|(_, &g)| g > 0).map(|(id, _)| id).collect();
    let hits = relevant
        .iter()
        .filter(|id| ranked.iter().position(|r| r == **id).is_some_and(|p| p < k))
        .count();
    Oracle {
        ndcg: dcg(ranked, &j.relevant, k) / best,
        precision: hits as f64 / k as f64,
        recall: hits as f64 / relevant.len() as f64,
    }
}

/// Random corpus of `n` items, graded 0..=3 with at least one positive,
/// and a random ranking of a prefix of a shuffled corpus.
pub fn instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<String>, Vec<String>, Judgment) {
    let corpus: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    let mut grades: Vec<(String, u32)> = corpus.iter().map(|id| (id.clone(), rng.random_range(0..4))).collect();
    if grades.iter().all(|(_, g)| *g == 0) {
        grades[rng.random_range(0..n)].1 = 1;
    }
    let j = Judgment::new("q", grades).unwrap();
    let mut ranked = corpus.clone();
    ranked.shuffle(rng);
    ranked.truncate(rng.random_range(1..=n));
    (corpus, ranked, j)
}
