//! Embedded vector memory with selective remembrance and decay.
//!
//! Items retrieved often enough are consolidated ("remembered") and stop
//! decaying; unremembered items that go unretrieved past a grace period
//! shrink multiplicatively each query, which lowers their retrieval scores
//! until they can be pruned.
//!
//! ```
//! use arm_memory::{MemoryConfig, MemoryStore, Profile};
//!
//! let mut store = MemoryStore::new(MemoryConfig::profile(Profile::Balanced, 2)).unwrap();
//! store.insert("a", &[1.0, 0.0]).unwrap();
//! store.insert("b", &[0.0, 1.0]).unwrap();
//! for _ in 0..3 {
//!     store.query(&[1.0, 0.0], 1).unwrap();
//! }
//! assert!(store.get("a").unwrap().usage.remembered);
//! ```

pub mod cli;
pub mod config;
pub mod eager;
pub mod engine;
pub mod harness;
pub mod memory;
pub mod metrics;
pub mod persistence;
pub mod retrieval;
pub mod telemetry;
pub mod workload;

pub use config::{ConfigError, MemoryConfig, Profile, Violation, Violations};
pub use eager::EagerStore;
pub use engine::StepReport;
pub use memory::{ItemId, ItemView, MemoryItem, MemoryStore, StoreError, UsageState};
pub use metrics::{Judgment, Metric};
pub use retrieval::{RetrievalResult, ScoredItem};
pub use telemetry::{LatencyRecord, StatsSnapshot};
pub use workload::{WorkloadKind, WorkloadSpec};
