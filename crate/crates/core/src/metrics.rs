//! NDCG@k, Precision@k and Recall@k over graded relevance judgments.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricError {
    #[error("judgment has no positive grade")]
    EmptyJudgment,
    #[error("cannot aggregate an empty list")]
    EmptyInput,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("ranked list repeats id '{0}'")]
    DuplicateRanked(String),
    #[error("unknown metric '{0}' (expected ndcg, precision or recall)")]
    UnknownMetric(String),
}

#[derive(Debug, thiserror::Error)]
pub enum QrelsError {
    #[error("cannot read judgments: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Relevance grades for one query. Ungraded items count as grade 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub query_id: String,
    pub relevant: BTreeMap<String, u32>,
}

impl Judgment {
    pub fn new(
        query_id: impl Into<String>,
        relevant: impl IntoIterator<Item = (impl Into<String>, u32)>,
    ) -> Result<Self, MetricError> {
        let j = Judgment {
            query_id: query_id.into(),
            relevant: relevant.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        };
        j.check()?;
        Ok(j)
    }

    fn check(&self) -> Result<(), MetricError> {
        if self.relevant.values().any(|&g| g > 0) {
            Ok(())
        } else {
            Err(MetricError::EmptyJudgment)
        }
    }

    pub fn grade(&self, id: &str) -> u32 {
        self.relevant.get(id).copied().unwrap_or(0)
    }

    pub fn relevant_count(&self) -> usize {
        self.relevant.values().filter(|&&g| g > 0).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Ndcg,
    Precision,
    Recall,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Ndcg, Metric::Precision, Metric::Recall];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ndcg => "ndcg",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
        }
    }

    pub fn evaluate<S: AsRef<str>>(self, ranked: &[S], judgment: &Judgment, k: usize) -> Result<f64, MetricError> {
        match self {
            Metric::Ndcg => ndcg_at_k(ranked, judgment, k),
            Metric::Precision => precision_at_k(ranked, judgment, k),
            Metric::Recall => recall_at_k(ranked, judgment, k),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ndcg" => Ok(Metric::Ndcg),
            "precision" | "p" => Ok(Metric::Precision),
            "recall" | "r" => Ok(Metric::Recall),
            other => Err(MetricError::UnknownMetric(other.to_string())),
        }
    }
}

fn check_inputs<S: AsRef<str>>(ranked: &[S], judgment: &Judgment, k: usize) -> Result<(), MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidK);
    }
    judgment.check()?;
    let mut seen = HashSet::with_capacity(ranked.len());
    for id in ranked {
        if !seen.insert(id.as_ref()) {
            return Err(MetricError::DuplicateRanked(id.as_ref().to_string()));
        }
    }
    Ok(())
}

fn gain(grade: u32) -> f64 {
    2f64.powi(grade as i32) - 1.0
}

fn discount(rank: usize) -> f64 {
    // rank is 1-based
    ((rank + 1) as f64).log2()
}

/// Normalized DCG with exponential gains `2^g - 1`.
pub fn ndcg_at_k<S: AsRef<str>>(ranked: &[S], judgment: &Judgment, k: usize) -> Result<f64, MetricError> {
    check_inputs(ranked, judgment, k)?;
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, id)| gain(judgment.grade(id.as_ref())) / discount(i + 1))
        .sum();
    let mut ideal: Vec<u32> = judgment.relevant.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain(g) / discount(i + 1))
        .sum();
    Ok(dcg / idcg)
}

fn hits<S: AsRef<str>>(ranked: &[S], judgment: &Judgment, k: usize) -> usize {
    ranked
        .iter()
        .take(k)
        .filter(|id| judgment.grade(id.as_ref()) > 0)
        .count()
}

/// Relevant hits in the top k, divided by k.
pub fn precision_at_k<S: AsRef<str>>(ranked: &[S], judgment: &Judgment, k: usize) -> Result<f64, MetricError> {
    check_inputs(ranked, judgment, k)?;
    Ok(hits(ranked, judgment, k) as f64 / k as f64)
}

/// Relevant hits in the top k, divided by the number of relevant items.
pub fn recall_at_k<S: AsRef<str>>(ranked: &[S], judgment: &Judgment, k: usize) -> Result<f64, MetricError> {
    check_inputs(ranked, judgment, k)?;
    Ok(hits(ranked, judgment, k) as f64 / judgment.relevant_count() as f64)
}

pub fn aggregate(values: &[f64]) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Reads a judgments file: one `{"query_id", "relevant": {id: grade}}`
/// object per line. Blank lines are skipped.
pub fn load_judgments(path: &Path) -> Result<Vec<Judgment>, QrelsError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| QrelsError::Parse { line: i + 1, message };
        let j: Judgment = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        j.check().map_err(|e| parse_err(e.to_string()))?;
        out.push(j);
    }
    Ok(out)
}
