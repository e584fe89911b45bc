//! Experiment configuration: a flat key-value file plus flag overrides.
//!
//! Precedence: built-in defaults < config file < `ECGLAB_SEED` < flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ecg::MeasureChoice;
use crate::subgroup::SubgroupSpec;
use crate::{EcgError, Result};

/// Documented default master seed.
pub const DEFAULT_SEED: u64 = 0xEC61AB;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExperimentKind {
    Ecg,
    Growth,
    Maxima,
    Sl2zExample,
    Validate,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ecg" => Ok(Self::Ecg),
            "growth" => Ok(Self::Growth),
            "maxima" => Ok(Self::Maxima),
            "sl2z-example" => Ok(Self::Sl2zExample),
            "validate" => Ok(Self::Validate),
            _ => Err(EcgError::Config(format!("unknown experiment kind '{s}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ecg => "ecg",
            Self::Growth => "growth",
            Self::Maxima => "maxima",
            Self::Sl2zExample => "sl2z-example",
            Self::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelSpec {
    TreeFull,
    TreeSubgroup,
    CircleHarmonic,
}

impl ModelSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tree-full" => Ok(Self::TreeFull),
            "tree-subgroup" => Ok(Self::TreeSubgroup),
            "circle-harmonic" => Ok(Self::CircleHarmonic),
            _ => Err(EcgError::Config(format!(
                "unknown model '{s}' (tree-full, tree-subgroup, circle-harmonic)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::TreeFull => "tree-full",
            Self::TreeSubgroup => "tree-subgroup",
            Self::CircleHarmonic => "circle-harmonic",
        }
    }
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelSpec,
    pub rank: u32,
    #[serde(serialize_with = "ser_subgroup")]
    pub subgroup: SubgroupSpec,
    pub measure: MeasureChoice,
    pub alpha: f64,
    pub n_min: u32,
    pub n_max: u32,
    /// radii of the maxima experiment
    pub radii: Vec<u32>,
    pub m_min: u32,
    pub m_max: u32,
    pub samples: usize,
    pub replicates: usize,
    pub series_terms: usize,
    pub ps_depth: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
}

fn ser_subgroup<S: serde::Serializer>(
    s: &SubgroupSpec,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&s.to_string())
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Ecg,
            model: ModelSpec::TreeFull,
            rank: 2,
            subgroup: SubgroupSpec::zk_exponent_kernel(),
            measure: MeasureChoice::SubgroupPatterson,
            alpha: 1.5,
            n_min: 1,
            n_max: 10,
            radii: vec![4, 6, 8],
            m_min: 1,
            m_max: 30,
            samples: 1000,
            replicates: 400,
            series_terms: 1000,
            ps_depth: 14,
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
            threads: 0,
        }
    }
}

/// Unvalidated key-value overlay coming from file or flags.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverlay {
    pub entries: BTreeMap<String, String>,
}

impl ConfigOverlay {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    /// Parses a flat `key = value` file; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut overlay = ConfigOverlay::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                EcgError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let value = value.trim().trim_matches('"');
            overlay.set(key.trim(), value);
        }
        Ok(overlay)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "model",
    "rank",
    "subgroup",
    "measure",
    "alpha",
    "n_min",
    "n_max",
    "radii",
    "m_min",
    "m_max",
    "samples",
    "replicates",
    "series_terms",
    "ps_depth",
    "seed",
    "out",
    "threads",
];

impl ExperimentConfig {
    /// Applies an overlay, rejecting unknown keys and malformed numerics.
    pub fn apply(&mut self, overlay: &ConfigOverlay) -> Result<()> {
        for (key, value) in &overlay.entries {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(EcgError::Config(format!("unknown config key '{key}'")));
            }
            match key.as_str() {
                "kind" => self.kind = ExperimentKind::parse(value)?,
                "model" => self.model = ModelSpec::parse(value)?,
                "rank" => self.rank = parse_num(key, value)?,
                "subgroup" => self.subgroup = value.parse()?,
                "measure" => {
                    self.measure = match value.as_str() {
                        "subgroup-patterson" => MeasureChoice::SubgroupPatterson,
                        "ambient-uniform" => MeasureChoice::AmbientUniform,
                        _ => {
                            return Err(EcgError::Config(format!(
                                "unknown measure '{value}' (subgroup-patterson, ambient-uniform)"
                            )))
                        }
                    }
                }
                "alpha" => self.alpha = parse_num(key, value)?,
                "n_min" => self.n_min = parse_num(key, value)?,
                "n_max" => self.n_max = parse_num(key, value)?,
                "radii" => {
                    self.radii = value
                        .split(',')
                        .map(|t| parse_num("radii", t.trim()))
                        .collect::<Result<Vec<u32>>>()?;
                }
                "m_min" => self.m_min = parse_num(key, value)?,
                "m_max" => self.m_max = parse_num(key, value)?,
                "samples" => self.samples = parse_num(key, value)?,
                "replicates" => self.replicates = parse_num(key, value)?,
                "series_terms" => self.series_terms = parse_num(key, value)?,
                "ps_depth" => self.ps_depth = parse_num(key, value)?,
                "seed" => self.seed = parse_num(key, value)?,
                "out" => self.out = PathBuf::from(value),
                "threads" => self.threads = parse_num(key, value)?,
                _ => unreachable!("key filtered by KNOWN_KEYS"),
            }
        }
        Ok(())
    }

    /// Cap and range validation, applied once all overlays are in.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(EcgError::Config(format!(
                "alpha must lie strictly inside (0, 2), got {}",
                self.alpha
            )));
        }
        if self.rank < 2 || self.rank > 6 {
            return Err(EcgError::Config(format!(
                "rank must be in 2..=6, got {}",
                self.rank
            )));
        }
        if self.n_min > self.n_max {
            return Err(EcgError::Config("n_min must not exceed n_max".into()));
        }
        let n_cap = match self.model {
            ModelSpec::CircleHarmonic => 10,
            _ => 24,
        };
        if self.n_max > n_cap {
            return Err(EcgError::Config(format!(
                "n_max {} exceeds the cap {n_cap} for model {}",
                self.n_max,
                self.model.name()
            )));
        }
        if let Some(&r) = self.radii.iter().max() {
            if r > n_cap {
                return Err(EcgError::Config(format!(
                    "radius {r} exceeds the cap {n_cap}"
                )));
            }
        }
        if self.m_min > self.m_max {
            return Err(EcgError::Config("m_min must not exceed m_max".into()));
        }
        let m_cap = match self.subgroup {
            SubgroupSpec::KernelToC2C3 { .. } => crate::subgroup::C2C3_BRUTE_CAP,
            _ => 36,
        };
        if self.kind == ExperimentKind::Growth && self.m_max > m_cap {
            return Err(EcgError::Config(format!(
                "m_max {} exceeds the counting cap {m_cap}",
                self.m_max
            )));
        }
        if self.samples < 2 {
            return Err(EcgError::Config("samples must be >= 2".into()));
        }
        if self.replicates < 1 {
            return Err(EcgError::Config("replicates must be >= 1".into()));
        }
        if self.series_terms < 50 {
            return Err(EcgError::Config("series_terms must be >= 50".into()));
        }
        if self.ps_depth > 20 {
            return Err(EcgError::Config(format!(
                "ps_depth {} exceeds the enumeration cap 20",
                self.ps_depth
            )));
        }
        self.subgroup.validate(self.rank)?;
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| EcgError::Config(format!("malformed numeric value '{value}' for '{key}'")))
}

/// Resolves the final configuration from an optional file, the environment
/// and explicit flag overrides (highest precedence).
pub fn resolve_config(
    file: Option<&Path>,
    flags: &ConfigOverlay,
    env_seed: Option<&str>,
) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = file {
        let overlay = ConfigOverlay::from_file(path)?;
        config.apply(&overlay)?;
    }
    if let Some(seed) = env_seed {
        config.seed = parse_num("ECGLAB_SEED", seed)?;
    }
    config.apply(flags)?;
    config.validate()?;
    Ok(config)
}
