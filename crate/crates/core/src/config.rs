//! Remembrance/decay hyperparameters, named profiles and validation.
//!
//! A [`MemoryConfig`] is a plain value and may hold out-of-range settings;
//! [`MemoryConfig::validate`] reports every violated bound. Stores refuse
//! to be built from, or reconfigured into, an invalid configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::memory::{MemoryStore, StoreError};

/// Prune threshold used by every named profile.
///
/// A balanced-profile item becomes eligible after about 135 stale steps
/// (0.95^135 is just under 1e-3).
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    /// Remembrance threshold: access count at which an item is consolidated.
    pub theta: u32,
    /// Grace period in logical steps after the last access.
    pub gamma: u32,
    /// Multiplicative decay applied per stale step, strictly in (0, 1).
    pub alpha: f64,
    /// Strength below which unremembered items may be pruned, in [0, 1).
    pub prune_threshold: f64,
    pub dimension: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    /// theta=3, gamma=5, alpha=0.95.
    Balanced,
    /// theta=10, gamma=1, alpha=0.90: faster forgetting, smaller footprint.
    UltraEfficient,
    /// theta=1, gamma=20, alpha=0.99: broad consolidation, slow forgetting.
    Aggressive,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Balanced, Profile::UltraEfficient, Profile::Aggressive];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Balanced => "balanced",
            Profile::UltraEfficient => "ultra_efficient",
            Profile::Aggressive => "aggressive",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "balanced" => Ok(Profile::Balanced),
            "ultra_efficient" => Ok(Profile::UltraEfficient),
            "aggressive" => Ok(Profile::Aggressive),
            _ => Err(ConfigError::UnknownProfile(s.to_string())),
        }
    }
}

/// One violated bound, with the offending value rendered as text.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub value: String,
    pub message: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.field, self.value, self.message)
    }
}

/// Non-empty list of violations.
#[derive(Clone, Debug, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown profile '{0}' (expected balanced, ultra_efficient or aggressive)")]
    UnknownProfile(String),
    #[error("invalid configuration: {0}")]
    Invalid(Violations),
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config file: {0}")]
    Parse(#[from] serde_json::Error),
}

pub(crate) const ALPHA_MSG: &str = "alpha must lie strictly in (0,1)";
pub(crate) const THETA_MSG: &str = "theta must be at least 1";
pub(crate) const GAMMA_MSG: &str = "gamma must be a non-negative integer";
pub(crate) const PRUNE_MSG: &str = "prune_threshold must lie in [0,1)";
pub(crate) const DIM_MSG: &str = "dimension must be a positive integer";

pub(crate) fn check_alpha(alpha: f64) -> Option<Violation> {
    (!(alpha > 0.0 && alpha < 1.0)).then(|| Violation {
        field: "alpha",
        value: alpha.to_string(),
        message: ALPHA_MSG,
    })
}

pub(crate) fn check_theta(theta: u32) -> Option<Violation> {
    (theta < 1).then(|| Violation {
        field: "theta",
        value: theta.to_string(),
        message: THETA_MSG,
    })
}

pub(crate) fn check_prune_threshold(t: f64) -> Option<Violation> {
    (!(0.0..1.0).contains(&t)).then(|| Violation {
        field: "prune_threshold",
        value: t.to_string(),
        message: PRUNE_MSG,
    })
}

impl MemoryConfig {
    pub fn profile(profile: Profile, dimension: usize) -> Self {
        let (theta, gamma, alpha) = match profile {
            Profile::Balanced => (3, 5, 0.95),
            Profile::UltraEfficient => (10, 1, 0.90),
            Profile::Aggressive => (1, 20, 0.99),
        };
        MemoryConfig {
            theta,
            gamma,
            alpha,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            dimension,
        }
    }

    pub fn from_profile_name(name: &str, dimension: usize) -> Result<Self, ConfigError> {
        Ok(Self::profile(name.parse()?, dimension))
    }

    /// Every violated bound; empty when the configuration is usable.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        out.extend(check_theta(self.theta));
        out.extend(check_alpha(self.alpha));
        out.extend(check_prune_threshold(self.prune_threshold));
        if self.dimension == 0 {
            out.push(Violation {
                field: "dimension",
                value: "0".into(),
                message: DIM_MSG,
            });
        }
        out
    }

    pub fn validate(&self) -> Result<(), Violations> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Violations(v))
        }
    }

    /// Reads a JSON config object. Missing fields fall back to `base`.
    ///
    /// Integers outside their field's range are reported as violations
    /// rather than parse failures.
    pub fn from_json_file(path: &Path, base: MemoryConfig) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, base)
    }

    pub fn from_json_str(text: &str, base: MemoryConfig) -> Result<Self, ConfigError> {
        let raw: ConfigFile = serde_json::from_str(text)?;
        raw.merge(base)
    }
}

/// Loosely typed mirror of the config file so range errors become
/// violations instead of deserialization failures.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub theta: Option<i64>,
    pub gamma: Option<i64>,
    pub alpha: Option<f64>,
    pub prune_threshold: Option<f64>,
    pub dimension: Option<i64>,
}

impl ConfigFile {
    pub fn merge(&self, base: MemoryConfig) -> Result<MemoryConfig, ConfigError> {
        let mut violations = Vec::new();
        let mut cfg = base;
        if let Some(theta) = self.theta {
            match u32::try_from(theta) {
                Ok(t) => cfg.theta = t,
                Err(_) => violations.push(Violation {
                    field: "theta",
                    value: theta.to_string(),
                    message: THETA_MSG,
                }),
            }
        }
        if let Some(gamma) = self.gamma {
            match u32::try_from(gamma) {
                Ok(g) => cfg.gamma = g,
                Err(_) => violations.push(Violation {
                    field: "gamma",
                    value: gamma.to_string(),
                    message: GAMMA_MSG,
                }),
            }
        }
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(p) = self.prune_threshold {
            cfg.prune_threshold = p;
        }
        if let Some(dim) = self.dimension {
            match usize::try_from(dim) {
                Ok(d) => cfg.dimension = d,
                Err(_) => violations.push(Violation {
                    field: "dimension",
                    value: dim.to_string(),
                    message: DIM_MSG,
                }),
            }
        }
        violations.extend(cfg.violations());
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(Violations(violations)))
        }
    }
}

impl MemoryStore {
    /// Changes the decay rate. Decay accrued so far is folded into each
    /// item's strength multiplier under the old rate first, so history
    /// is preserved exactly. An invalid value leaves the store untouched.
    pub fn set_alpha(&mut self, alpha: f64) -> Result<(), StoreError> {
        if let Some(v) = check_alpha(alpha) {
            return Err(StoreError::InvalidValue(Violations(vec![v])));
        }
        self.materialize_all();
        let old = self.config.alpha;
        for usage in &mut self.usage {
            if usage.decay_exponent > 0 {
                usage.strength_multiplier *= crate::memory::pow_events(old, usage.decay_exponent);
                usage.decay_exponent = 0;
            }
        }
        self.config.alpha = alpha;
        Ok(())
    }

    /// Takes effect at the next step; never promotes retroactively.
    pub fn set_theta(&mut self, theta: u32) -> Result<(), StoreError> {
        if let Some(v) = check_theta(theta) {
            return Err(StoreError::InvalidValue(Violations(vec![v])));
        }
        self.config.theta = theta;
        Ok(())
    }

    /// Pending decay is materialized under the old grace period, so the
    /// new value only governs steps after the change.
    pub fn set_gamma(&mut self, gamma: u32) -> Result<(), StoreError> {
        self.materialize_all();
        self.config.gamma = gamma;
        Ok(())
    }

    pub fn set_prune_threshold(&mut self, threshold: f64) -> Result<(), StoreError> {
        if let Some(v) = check_prune_threshold(threshold) {
            return Err(StoreError::InvalidValue(Violations(vec![v])));
        }
        self.config.prune_threshold = threshold;
        Ok(())
    }
}
