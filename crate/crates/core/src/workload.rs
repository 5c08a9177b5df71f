//! Seeded synthetic query streams (uniform, Zipfian, drifting Zipfian)
//! and synthetic unit-norm corpora.
//!
//! Popularity rank follows ascending id order: the smallest id is rank 1.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::memory::ItemId;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WorkloadError {
    #[error("cannot draw queries from an empty store")]
    EmptyStore,
    #[error("invalid workload: {0}")]
    InvalidSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WorkloadKind {
    Uniform,
    Zipf {
        s: f64,
    },
    /// Zipf whose popularity ranking swaps head and tail halves at
    /// `switch_step`.
    Drift {
        s: f64,
        switch_step: u64,
    },
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkloadKind::Uniform => f.write_str("uniform"),
            WorkloadKind::Zipf { s } => write!(f, "zipf:{s}"),
            WorkloadKind::Drift { s, switch_step } => write!(f, "drift:{s}:{switch_step}"),
        }
    }
}

/// Parses `uniform`, `zipf:S` or `drift:S:T`.
impl FromStr for WorkloadKind {
    type Err = WorkloadError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| WorkloadError::InvalidSpec(format!("'{text}': {why}"));
        let parts: Vec<&str> = text.trim().split(':').collect();
        let exponent = |p: &str| p.parse::<f64>().map_err(|_| bad("exponent is not a number"));
        match parts.as_slice() {
            ["uniform"] => Ok(WorkloadKind::Uniform),
            ["zipf", s] => Ok(WorkloadKind::Zipf { s: exponent(s)? }),
            ["drift", s, t] => Ok(WorkloadKind::Drift {
                s: exponent(s)?,
                switch_step: t.parse().map_err(|_| bad("switch step is not an integer"))?,
            }),
            _ => Err(bad("expected uniform, zipf:S or drift:S:T")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub n_steps: u64,
    /// Per-component Gaussian noise added to the target's base vector.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let bad = |why: String| Err(WorkloadError::InvalidSpec(why));
        if self.n_steps == 0 {
            return bad("n_steps must be positive".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!(
                "noise_sigma {} must be finite and non-negative",
                self.noise_sigma
            ));
        }
        match self.kind {
            WorkloadKind::Uniform => Ok(()),
            WorkloadKind::Zipf { s } | WorkloadKind::Drift { s, .. } if !(s.is_finite() && s > 0.0) => {
                bad(format!("zipf exponent {s} must be positive (use uniform for s = 0)"))
            }
            WorkloadKind::Drift { switch_step, .. } if switch_step >= self.n_steps => bad(format!(
                "switch_step {switch_step} must be below n_steps {}",
                self.n_steps
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadQuery {
    /// Clock value the query will be processed at (1-based).
    pub step: u64,
    pub target: ItemId,
    pub vector: Vec<f32>,
}

/// Inverse-CDF sampler over ranks `0..n` with weight `1 / (rank+1)^s`.
#[derive(Clone, Debug)]
pub struct ZipfSampler {
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(n: usize, s: f64) -> Self {
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for r in 1..=n {
            acc += (r as f64).powf(-s);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        ZipfSampler { cdf }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Draws the full query stream. `ids` and `vectors` are aligned.
pub fn generate(
    spec: &WorkloadSpec,
    ids: &[ItemId],
    vectors: &[Vec<f32>],
) -> Result<Vec<WorkloadQuery>, WorkloadError> {
    spec.validate()?;
    if ids.is_empty() {
        return Err(WorkloadError::EmptyStore);
    }
    if ids.len() != vectors.len() {
        return Err(WorkloadError::InvalidSpec(format!(
            "{} ids but {} vectors",
            ids.len(),
            vectors.len()
        )));
    }
    let n = ids.len();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let half = n / 2;
    let drifted: Vec<usize> = by_rank[half..].iter().chain(&by_rank[..half]).copied().collect();

    let sampler = match spec.kind {
        WorkloadKind::Uniform => None,
        WorkloadKind::Zipf { s } | WorkloadKind::Drift { s, .. } => Some(ZipfSampler::new(n, s)),
    };
    let noise = (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma validated"));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut out = Vec::with_capacity(spec.n_steps as usize);
    for step in 1..=spec.n_steps {
        let rank = match &sampler {
            None => rng.random_range(0..n),
            Some(z) => z.sample(&mut rng),
        };
        let ranking = match spec.kind {
            WorkloadKind::Drift { switch_step, .. } if step > switch_step => &drifted,
            _ => &by_rank,
        };
        let target = ranking[rank];
        let mut vector = vectors[target].clone();
        if let Some(noise) = &noise {
            for x in &mut vector {
                *x += noise.sample(&mut rng) as f32;
            }
        }
        out.push(WorkloadQuery {
            step,
            target: ids[target].clone(),
            vector,
        });
    }
    Ok(out)
}

/// `n` random unit vectors of dimension `d` with ids `item-0000`,
/// `item-0001`, ... (zero-padded so id order equals index order).
pub fn synthetic_corpus(n: usize, d: usize, seed: u64) -> Vec<(ItemId, Vec<f32>)> {
    let width = n.saturating_sub(1).to_string().len().max(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let id = ItemId::new(format!("item-{i:0width$}")).expect("synthetic ids are valid");
            (id, random_unit_vector(&mut rng, d))
        })
        .collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f32> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| (x / norm) as f32).collect();
        }
    }
}

/// Writes the `step,target_id` stream and a `<path>.seed.json` sidecar
/// recording the spec that produced it.
pub fn dump_stream(path: &Path, spec: &WorkloadSpec, queries: &[WorkloadQuery]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "target_id"])?;
    for q in queries {
        w.write_record([q.step.to_string().as_str(), q.target.as_str()])?;
    }
    w.flush()?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".seed.json");
    let json = serde_json::to_string_pretty(spec).map_err(std::io::Error::other)?;
    std::fs::write(sidecar, json + "\n")
}
