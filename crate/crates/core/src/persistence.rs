//! Binary store snapshots and JSON Lines ingestion of precomputed vectors.
//!
//! Snapshot layout, all integers little-endian:
//!
//! ```text
//! header   magic "ARM1" | version u16 | dimension u32 | item_count u64
//!          | clock u64 | theta u32 | gamma u32 | alpha f64 | prune_threshold f64
//! record*  id_len u16 | id bytes | d x f32 | access_count u64
//!          | last_access_step u64 | remembered u8 | decay_exponent u64
//!          | materialized_at_step u64 | strength_multiplier f64
//! ```
//!
//! Records are sorted by id, so equal stores produce identical files.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Deserialize;

use crate::config::{MemoryConfig, Violations};
use crate::memory::{ItemId, MemoryItem, MemoryStore, UsageState};

pub const MAGIC: [u8; 4] = *b"ARM1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 4 + 8 + 8 + 4 + 4 + 8 + 8;
const ITEM_COUNT_OFFSET: usize = 4 + 2 + 4;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u16),
    #[error("corrupt snapshot at byte {offset}: {reason}")]
    CorruptRecord { offset: usize, reason: String },
    #[error("snapshot holds an invalid configuration: {0}")]
    InvalidConfig(Violations),
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: dimension {found} differs from {expected} set by the first record")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: component {index} is not finite")]
    NonFiniteComponent { line: usize, index: usize },
    #[error("line {line}: zero vector cannot be normalized")]
    ZeroVector { line: usize },
}

/// Serializes the store into the snapshot byte layout.
pub fn encode(store: &MemoryStore) -> Vec<u8> {
    let config = store.config();
    let d = config.dimension;
    let mut buf = Vec::with_capacity(HEADER_LEN + store.len() * (4 * d + 60));
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(d as u32).to_le_bytes());
    buf.extend_from_slice(&(store.len() as u64).to_le_bytes());
    buf.extend_from_slice(&store.clock().to_le_bytes());
    buf.extend_from_slice(&config.theta.to_le_bytes());
    buf.extend_from_slice(&config.gamma.to_le_bytes());
    buf.extend_from_slice(&config.alpha.to_le_bytes());
    buf.extend_from_slice(&config.prune_threshold.to_le_bytes());
    for item in store.iter_sorted() {
        let id = item.id.as_str().as_bytes();
        buf.extend_from_slice(&(id.len() as u16).to_le_bytes());
        buf.extend_from_slice(id);
        for x in item.base_vector {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        let u = item.usage;
        buf.extend_from_slice(&u.access_count.to_le_bytes());
        buf.extend_from_slice(&u.last_access_step.to_le_bytes());
        buf.push(u8::from(u.remembered));
        buf.extend_from_slice(&u.decay_exponent.to_le_bytes());
        buf.extend_from_slice(&u.materialized_at_step.to_le_bytes());
        buf.extend_from_slice(&u.strength_multiplier.to_le_bytes());
    }
    buf
}

/// Writes the snapshot atomically (temp file in the same directory, then
/// rename).
pub fn save(store: &MemoryStore, path: &Path) -> Result<(), PersistError> {
    let bytes = encode(store);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| PersistError::Io(e.error))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<MemoryStore, PersistError> {
    decode(&std::fs::read(path)?)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], PersistError> {
        match self.bytes.get(self.pos..self.pos + n) {
            Some(s) => {
                self.pos += n;
                Ok(s)
            }
            None => Err(PersistError::CorruptRecord {
                offset: self.pos,
                reason: format!("truncated while reading {what}"),
            }),
        }
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N], PersistError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u16(&mut self, what: &str) -> Result<u16, PersistError> {
        Ok(u16::from_le_bytes(self.array(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.array(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.array(what)?))
    }

    fn corrupt(&self, offset: usize, reason: impl Into<String>) -> PersistError {
        PersistError::CorruptRecord {
            offset,
            reason: reason.into(),
        }
    }
}

/// Parses snapshot bytes. Either the whole store is valid or an error is
/// returned.
pub fn decode(bytes: &[u8]) -> Result<MemoryStore, PersistError> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return Err(PersistError::BadMagic);
    }
    r.pos = MAGIC.len();
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let dimension = r.u32("dimension")? as usize;
    let item_count = r.u64("item count")?;
    let clock = r.u64("clock")?;
    let config = MemoryConfig {
        theta: r.u32("theta")?,
        gamma: r.u32("gamma")?,
        alpha: r.f64("alpha")?,
        prune_threshold: r.f64("prune threshold")?,
        dimension,
    };
    config.validate().map_err(PersistError::InvalidConfig)?;

    let record_min = 2 + 1 + 4 * dimension + 8 * 5 + 1;
    let remaining = bytes.len() - r.pos;
    if item_count > (remaining / record_min) as u64 {
        return Err(r.corrupt(
            ITEM_COUNT_OFFSET,
            format!("header declares {item_count} items but only {remaining} bytes follow"),
        ));
    }

    let mut items = Vec::with_capacity(item_count as usize);
    let mut seen = HashSet::with_capacity(item_count as usize);
    for _ in 0..item_count {
        let start = r.pos;
        let id_len = r.u16("id length")? as usize;
        let id_bytes = r.take(id_len, "id")?;
        let id = std::str::from_utf8(id_bytes)
            .map_err(|_| r.corrupt(start, "id is not valid UTF-8"))
            .and_then(|s| ItemId::new(s).map_err(|e| r.corrupt(start, e.to_string())))?;
        if !seen.insert(id.clone()) {
            return Err(r.corrupt(start, format!("duplicate id '{id}'")));
        }
        let mut base_vector = Vec::with_capacity(dimension);
        for i in 0..dimension {
            let x = f32::from_le_bytes(r.array("vector component")?);
            if !x.is_finite() {
                return Err(r.corrupt(r.pos - 4, format!("component {i} of '{id}' is not finite")));
            }
            base_vector.push(x);
        }
        let access_count = r.u64("access count")?;
        let last_access_step = r.u64("last access step")?;
        let flag_at = r.pos;
        let remembered = match r.array::<1>("remembered flag")?[0] {
            0 => false,
            1 => true,
            b => return Err(r.corrupt(flag_at, format!("remembered flag {b} is not 0 or 1"))),
        };
        let decay_exponent = r.u64("decay exponent")?;
        let materialized_at_step = r.u64("materialized step")?;
        let strength_multiplier = r.f64("strength multiplier")?;
        if last_access_step > clock || materialized_at_step > clock {
            return Err(r.corrupt(start, format!("'{id}' records a step beyond clock {clock}")));
        }
        if !(strength_multiplier > 0.0 && strength_multiplier <= 1.0) {
            return Err(r.corrupt(start, format!("'{id}' has strength multiplier {strength_multiplier}")));
        }
        items.push(MemoryItem {
            id,
            base_vector,
            usage: UsageState {
                access_count,
                last_access_step,
                remembered,
                decay_exponent,
                materialized_at_step,
                strength_multiplier,
            },
        });
    }
    if r.pos != bytes.len() {
        return Err(r.corrupt(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(MemoryStore::from_parts(config, clock, items))
}

#[derive(Deserialize)]
struct IngestRecord {
    id: String,
    vector: Vec<f64>,
}

/// Reads `{"id": str, "vector": [floats]}` lines. The first record fixes
/// the dimension; blank lines are skipped.
pub fn ingest_jsonl(path: &Path, normalize: bool) -> Result<Vec<(ItemId, Vec<f32>)>, IngestError> {
    let file = std::fs::File::open(path)?;
    let mut out: Vec<(ItemId, Vec<f32>)> = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: IngestRecord = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = ItemId::new(rec.id).map_err(|e| IngestError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some((_, first)) = out.first() {
            if first.len() != rec.vector.len() {
                return Err(IngestError::DimensionMismatch {
                    line: line_no,
                    expected: first.len(),
                    found: rec.vector.len(),
                });
            }
        } else if rec.vector.is_empty() {
            return Err(IngestError::Parse {
                line: line_no,
                message: "vector is empty".into(),
            });
        }
        let mut v = rec.vector;
        if normalize {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(IngestError::ZeroVector { line: line_no });
            }
            for x in &mut v {
                *x /= norm;
            }
        }
        let v: Vec<f32> = v.into_iter().map(|x| x as f32).collect();
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(IngestError::NonFiniteComponent { line: line_no, index });
        }
        out.push((id, v));
    }
    Ok(out)
}
