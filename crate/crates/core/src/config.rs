//! Plain `key = value` configuration files.
//!
//! ```text
//! # comments start with '#'
//! strec.alpha = 0.05
//! strec.proximity = path
//! strec.max_depth = 2
//! pcm.dimensions = both
//! ```
//!
//! Keys are namespaced by the component they configure. Unknown keys are
//! rejected.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::foldcons::{PcmConfig, PcmDimensions, ProfileSide};
use crate::graph::ProximityMode;
use crate::recommend::{StrecConfig, TrainConfig};

pub const KNOWN_KEYS: &[&str] = &[
    "strec.alpha",
    "strec.proximity",
    "strec.max_depth",
    "graph.min_proximity",
    "pitf.dim",
    "pitf.learning_rate",
    "pitf.regularization",
    "pitf.iterations",
    "pitf.init_stddev",
    "pitf.seed",
    "pcm.dimensions",
    "pcm.normalize",
    "pcm.references",
    "eval.k_min",
    "eval.k_max",
    "eval.pool",
    "eval.seed",
    "eval.recommender",
    "eval.rerank",
    "eval.profile",
    "eval.workers",
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Settings> {
        let mut out = Settings::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("expected 'key = value', found '{line}'"),
                });
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("unknown key '{key}'"),
                });
            }
            out.values.insert(key.to_owned(), value.trim().to_owned());
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_owned(), value.to_string());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses `key` if present.
    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| Error::Config(format!("{key} = {v}: {e}")))
            })
            .transpose()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Later values win.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in other.iter() {
            self.set(k, v);
        }
    }

    /// Renders as a config file, keys sorted.
    pub fn to_text(&self) -> String {
        self.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

impl FromStr for PcmDimensions {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "item" => Ok(PcmDimensions::Item),
            "user" => Ok(PcmDimensions::User),
            "both" => Ok(PcmDimensions::Both),
            _ => Err(Error::Config(format!(
                "unknown PCM dimensions '{s}' (item|user|both)"
            ))),
        }
    }
}

impl Display for PcmDimensions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PcmDimensions::Item => "item",
            PcmDimensions::User => "user",
            PcmDimensions::Both => "both",
        })
    }
}

impl FromStr for ProfileSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" => Ok(ProfileSide::User),
            "item" => Ok(ProfileSide::Item),
            "both" => Ok(ProfileSide::Both),
            _ => Err(Error::Config(format!(
                "unknown profile side '{s}' (user|item|both)"
            ))),
        }
    }
}

impl Display for ProfileSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProfileSide::User => "user",
            ProfileSide::Item => "item",
            ProfileSide::Both => "both",
        })
    }
}

impl StrecConfig {
    pub fn from_settings(s: &Settings) -> Result<StrecConfig> {
        let mut cfg = StrecConfig::default();
        if let Some(alpha) = s.get_parsed("strec.alpha")? {
            cfg.alpha = alpha;
        }
        let depth = s.get_parsed::<u32>("strec.max_depth")?;
        cfg.proximity = match s.get("strec.proximity") {
            None | Some("path") => ProximityMode::Path {
                max_depth: depth.unwrap_or(2),
            },
            Some("direct") => ProximityMode::Direct,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown proximity mode '{other}' (direct|path)"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_settings(&self, s: &mut Settings) {
        s.set("strec.alpha", self.alpha);
        match self.proximity {
            ProximityMode::Direct => s.set("strec.proximity", "direct"),
            ProximityMode::Path { max_depth } => {
                s.set("strec.proximity", "path");
                s.set("strec.max_depth", max_depth);
            }
        }
    }
}

impl TrainConfig {
    pub fn from_settings(s: &Settings) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::default();
        if let Some(v) = s.get_parsed("pitf.dim")? {
            cfg.dim = v;
        }
        if let Some(v) = s.get_parsed("pitf.learning_rate")? {
            cfg.learning_rate = v;
        }
        if let Some(v) = s.get_parsed("pitf.regularization")? {
            cfg.regularization = v;
        }
        if let Some(v) = s.get_parsed("pitf.iterations")? {
            cfg.iterations = v;
        }
        if let Some(v) = s.get_parsed("pitf.init_stddev")? {
            cfg.init_stddev = v;
        }
        if let Some(v) = s.get_parsed("pitf.seed")? {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_settings(&self, s: &mut Settings) {
        s.set("pitf.dim", self.dim);
        s.set("pitf.learning_rate", self.learning_rate);
        s.set("pitf.regularization", self.regularization);
        s.set("pitf.iterations", self.iterations);
        s.set("pitf.init_stddev", self.init_stddev);
        s.set("pitf.seed", self.seed);
    }
}

impl PcmConfig {
    pub fn from_settings(s: &Settings) -> Result<PcmConfig> {
        let mut cfg = PcmConfig::default();
        if let Some(v) = s.get_parsed("pcm.dimensions")? {
            cfg.dimensions = v;
        }
        if let Some(v) = s.get_parsed("pcm.normalize")? {
            cfg.normalize = v;
        }
        if let Some(v) = s.get_parsed("pcm.references")? {
            cfg.references = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_settings(&self, s: &mut Settings) {
        s.set("pcm.dimensions", self.dimensions);
        s.set("pcm.normalize", self.normalize);
        s.set("pcm.references", self.references);
    }
}
