//! Flat key/value dataset configuration.
//!
//! Keys (all optional except `name`):
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `name` | dataset name, used in example ids | |
//! | `depth` | reasoning hops | 1 |
//! | `p_conf`, `p_conf_type1`, `p_miss_info` | generation probabilities | 0.5 each |
//! | `distractors` | distractors per step | 1 |
//! | `force_conflict_at_root` | always inject a conflict for the question | false |
//! | `labels` | `three-way` or `binary` | `three-way` |
//! | `rule_types` | structural shapes, e.g. `["T1", "T3"]` or `"T1,T3"` | T1 T2 T3 T4 T6 |
//! | `train_size`, `validation_size`, `test_size` | split sizes | 1000 / 500 / 1000 |
//! | `sizes` | the three sizes at once, `"30/15/30"` | |
//! | `seed` | master seed | 0 |
//! | `vocab`, `templates`, `knowledge` | data files replacing the bundled ones | bundled |
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::generator::GenParams;
use crate::theory::{Label, TemplateKind};
use crate::vocab::Split;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {reason}")]
    BadValue { key: String, reason: String },
    #[error("override {0:?} is not of the form key=value")]
    BadOverride(String),
    #[error("config has no name")]
    MissingName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSet {
    ThreeWay,
    Binary,
}

impl LabelSet {
    pub fn labels(self) -> &'static [Label] {
        match self {
            LabelSet::ThreeWay => &Label::ALL,
            LabelSet::Binary => &[Label::Proved, Label::Disproved],
        }
    }
}

impl FromStr for LabelSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "three-way" => Ok(LabelSet::ThreeWay),
            "binary" => Ok(LabelSet::Binary),
            other => Err(format!("expected three-way or binary, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl Sizes {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Validation => self.validation,
            Split::Test => self.test,
        }
    }
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            train: 1000,
            validation: 500,
            test: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetConfig {
    pub name: String,
    pub gen: GenParams,
    pub labels: LabelSet,
    pub sizes: Sizes,
    pub seed: u64,
    pub vocab: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub knowledge: Option<PathBuf>,
}

impl DatasetConfig {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            gen: GenParams::default(),
            labels: LabelSet::ThreeWay,
            sizes: Sizes::default(),
            seed: 0,
            vocab: None,
            templates: None,
            knowledge: None,
        }
    }

    /// Reads a config file; `presets/main-d1` also finds `presets/main-d1.toml`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut with_ext = path.as_os_str().to_owned();
        with_ext.push(".toml");
        let with_ext = PathBuf::from(with_ext);
        let path = if !path.exists() && with_ext.exists() {
            with_ext.as_path()
        } else {
            path
        };
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.vocab, &mut cfg.templates, &mut cfg.knowledge].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let name = match table.get("name") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => return Err(bad("name", "expected a string")),
            None => return Err(ConfigError::MissingName),
        };
        let mut cfg = Self::new(&name);
        for (k, v) in &table {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Applies `key=value`; the value is read as TOML, falling back to a bare string.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(kv.to_string()))?;
        let k = k.trim();
        let v = v.trim();
        let value = format!("v = {v}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(v.to_string()));
        self.set(k, &value)
    }

    pub fn set(&mut self, key: &str, v: &toml::Value) -> Result<(), ConfigError> {
        match key {
            "name" => self.name = string(key, v)?,
            "depth" => self.gen.depth = uint(key, v)?,
            "p_conf" => self.gen.p_conf = prob(key, v)?,
            "p_conf_type1" => self.gen.p_conf_type1 = prob(key, v)?,
            "p_miss_info" => self.gen.p_miss_info = prob(key, v)?,
            "distractors" => self.gen.distractors_per_step = uint(key, v)?,
            "force_conflict_at_root" => {
                self.gen.force_conflict_at_root = v.as_bool().ok_or_else(|| bad(key, "expected true or false"))?
            }
            "labels" => self.labels = string(key, v)?.parse().map_err(|e: String| bad(key, &e))?,
            "rule_types" => self.gen.rule_types = rule_types(key, v)?,
            "train_size" => self.sizes.train = uint(key, v)?,
            "validation_size" => self.sizes.validation = uint(key, v)?,
            "test_size" => self.sizes.test = uint(key, v)?,
            "sizes" => self.sizes = sizes(key, v)?,
            "seed" => self.seed = uint(key, v)? as u64,
            "vocab" => self.vocab = Some(PathBuf::from(string(key, v)?)),
            "templates" => self.templates = Some(PathBuf::from(string(key, v)?)),
            "knowledge" => self.knowledge = Some(PathBuf::from(string(key, v)?)),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        if key.starts_with("p_") || key == "rule_types" {
            self.gen.validate().map_err(|e| bad(key, &e.to_string()))?;
        }
        Ok(())
    }
}

fn bad(key: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn string(key: &str, v: &toml::Value) -> Result<String, ConfigError> {
    v.as_str().map(str::to_string).ok_or_else(|| bad(key, "expected a string"))
}

fn uint(key: &str, v: &toml::Value) -> Result<usize, ConfigError> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        toml::Value::String(s) => s.parse().map_err(|_| bad(key, "expected a non-negative integer")),
        _ => Err(bad(key, "expected a non-negative integer")),
    }
}

fn prob(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let p = match v {
        toml::Value::Float(f) => *f,
        toml::Value::Integer(i) => *i as f64,
        _ => return Err(bad(key, "expected a number")),
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(bad(key, "must lie in [0, 1]"));
    }
    Ok(p)
}

fn rule_types(key: &str, v: &toml::Value) -> Result<Vec<TemplateKind>, ConfigError> {
    let names: Vec<String> = match v {
        toml::Value::String(s) => s.split(',').map(|x| x.trim().to_string()).collect(),
        toml::Value::Array(a) => a
            .iter()
            .map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad(key, "expected names")))
            .collect::<Result<_, _>>()?,
        _ => return Err(bad(key, "expected a list of template names")),
    };
    names
        .iter()
        .map(|n| TemplateKind::from_name(n).ok_or_else(|| bad(key, &format!("unknown template {n:?}"))))
        .collect()
}

fn sizes(key: &str, v: &toml::Value) -> Result<Sizes, ConfigError> {
    let s = string(key, v)?;
    let parts: Vec<usize> = s
        .split('/')
        .map(|x| x.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(key, "expected train/validation/test counts"))?;
    match parts[..] {
        [train, validation, test] => Ok(Sizes {
            train,
            validation,
            test,
        }),
        _ => Err(bad(key, "expected three counts")),
    }
}
