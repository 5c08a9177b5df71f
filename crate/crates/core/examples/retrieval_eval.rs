// NDCG / precision / recall of frozen versus dynamic retrieval. Frozen
// scoring never updates the store; dynamic scoring counts every result as
// an access. After a long run of Go questions the Rust documents have
// faded, so the Go/Rust interop guide (kept fresh by the Go queries)
// outranks them when the topic switches.

use std::error::Error;

use arm_memory::metrics::{aggregate, MetricError};
use arm_memory::{Judgment, MemoryConfig, MemoryStore, Metric, Profile};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 3))?;
    store.insert("rust-book", &[1.0, 0.0, 0.0])?;
    store.insert("rust-nomicon", &[0.8, 0.0, 0.6])?;
    store.insert("go-tour", &[0.0, 1.0, 0.0])?;
    store.insert("cgo-interop", &[0.6, 0.8, 0.0])?;

    let go = Judgment::new("go", [("go-tour", 2u32), ("cgo-interop", 1)])?;
    let rust = Judgment::new("rust", [("rust-book", 2u32), ("rust-nomicon", 1)])?;
    let mut stream = vec![([0.0, 1.0, 0.0], &go); 15];
    stream.extend(vec![([1.0, 0.0, 0.0], &rust); 5]);

    let k = 2;
    for dynamic in [false, true] {
        let mut s = store.clone();
        let mut scores = vec![Vec::new(); Metric::ALL.len()];
        for (vector, judgment) in &stream {
            let result = if dynamic {
                s.query(vector, k)?.0
            } else {
                s.top_k(vector, k)?
            };
            let ranked: Vec<&str> = result.ids().map(|id| id.as_str()).collect();
            for (m, out) in Metric::ALL.iter().zip(&mut scores) {
                out.push(m.evaluate(&ranked, judgment, k)?);
            }
        }
        let line = Metric::ALL
            .iter()
            .zip(&scores)
            .map(|(m, v)| Ok(format!("{}@{k}={:.4}", m.name(), aggregate(v)?)))
            .collect::<Result<Vec<_>, MetricError>>()?;
        println!("{:<8} {}", if dynamic { "dynamic" } else { "frozen" }, line.join("  "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("retrieval_eval failed");
}
