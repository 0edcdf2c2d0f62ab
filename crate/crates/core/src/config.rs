//! Run configuration: one TOML or JSON document, validated on load.
//!
//! ```toml
//! policy = "scripted:trot_tracker"
//! output_dir = "runs"
//!
//! [backend]
//! kind = "reference"
//!
//! [plan]
//! terrains = ["flat", "wave"]
//! dr_set = "default9"
//! workers = 8
//!
//! [plan.level]
//! seed_root = 7
//! ```
//!
//! Unknown keys are rejected with the path of the offending key.
//! Environment variables named `LOCOBENCH_<KEY>` override keys, with `__`
//! separating nesting levels: `LOCOBENCH_PLAN__WORKERS=8` sets
//! `plan.workers`, `LOCOBENCH_PLAN__LEVEL__SEED_ROOT=3` sets
//! `plan.level.seed_root`. Values are read as JSON when they parse, as
//! strings otherwise.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::bridge::RemoteFactory;
use crate::error::{Error, Result};
use crate::goals::GoalConfig;
use crate::metrics::NormalizationConfig;
use crate::pipelines::StressPlan;
use crate::policy::{scripted_policy, weights, MoEArch, MoEPolicy, Policy, ScriptedKind};
use crate::robot::RobotDescription;
use crate::sim::reference::{ReferenceConfig, ReferenceFactory};
use crate::sim::{BackendFactory, SimConfig};

pub const ENV_PREFIX: &str = "LOCOBENCH_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Reference {
        #[serde(default)]
        reference: ReferenceConfig,
    },
    Bridge {
        address: String,
        #[serde(default = "default_timeout")]
        timeout_secs: f64,
    },
}

fn default_timeout() -> f64 {
    30.0
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Reference {
            reference: ReferenceConfig::default(),
        }
    }
}

impl BackendConfig {
    pub fn build(&self) -> Result<Box<dyn BackendFactory>> {
        match self {
            BackendConfig::Reference { reference } => Ok(Box::new(ReferenceFactory::new(reference.clone()))),
            BackendConfig::Bridge { address, timeout_secs } => {
                if !(timeout_secs.is_finite() && *timeout_secs > 0.0) {
                    return Err(Error::Config {
                        path: "backend.timeout_secs".into(),
                        reason: "must be positive".into(),
                    });
                }
                let mut f = RemoteFactory::new(address.clone());
                f.timeout = std::time::Duration::from_secs_f64(*timeout_secs);
                Ok(Box::new(f))
            }
        }
    }
}

/// Where a policy comes from: `scripted:<kind>`, `random:<seed>` (an
/// untrained MoE with the default architecture) or a weights file path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySource {
    Scripted(ScriptedKind),
    Random(u64),
    File(PathBuf),
}

impl PolicySource {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(kind) = s.strip_prefix("scripted:") {
            return Ok(PolicySource::Scripted(kind.parse()?));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed.parse().map_err(|_| Error::Config {
                path: "policy".into(),
                reason: format!("bad seed in `{s}`"),
            })?;
            return Ok(PolicySource::Random(seed));
        }
        Ok(PolicySource::File(PathBuf::from(s)))
    }

    pub fn load(&self) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySource::Scripted(kind) => Box::new(scripted_policy(*kind)),
            PolicySource::Random(seed) => Box::new(MoEPolicy::random(MoEArch::default(), *seed)?),
            PolicySource::File(path) => Box::new(weights::load(path)?),
        })
    }

    /// SHA-256 of the weights file, or of the source string otherwise.
    pub fn hash(&self) -> Result<String> {
        let bytes = match self {
            PolicySource::File(path) => std::fs::read(path)?,
            PolicySource::Scripted(kind) => format!("scripted:{kind}").into_bytes(),
            PolicySource::Random(seed) => format!("random:{seed}").into_bytes(),
        };
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Robot description JSON; the built-in Go2 layout when absent.
    pub robot: Option<PathBuf>,
    pub policy: String,
    pub backend: BackendConfig,
    pub sim: SimConfig,
    pub goals: GoalConfig,
    /// Replaces the per-terrain normalization constants when set.
    pub normalization: Option<NormalizationConfig>,
    pub plan: StressPlan,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            robot: None,
            policy: "scripted:trot_tracker".into(),
            backend: BackendConfig::default(),
            sim: SimConfig::default(),
            goals: GoalConfig::default(),
            normalization: None,
            plan: StressPlan::default(),
            output_dir: PathBuf::from("runs"),
        }
    }
}

fn config_err(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Parses TOML (or JSON when the file ends in `.json`), applies
    /// environment overrides and validates.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path.display().to_string(), e.to_string()))?;
        let json = path.extension().is_some_and(|e| e == "json");
        Self::from_str_with_env(&text, json, std::env::vars())
    }

    pub fn from_str_with_env(
        text: &str,
        json: bool,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self> {
        let mut value: Value = if json {
            serde_json::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?
        } else {
            let t: toml::Value = toml::from_str(text).map_err(|e| config_err("<document>", e.to_string()))?;
            serde_json::to_value(t)?
        };
        if value.is_null() {
            value = Value::Object(Default::default());
        }
        apply_env(&mut value, env)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            config_err(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |path: &str, r: Result<()>| r.map_err(|e| config_err(path, e.to_string()));
        wrap("sim", self.sim.validate())?;
        wrap("plan", self.plan.validate())?;
        if let Some(n) = &self.normalization {
            wrap("normalization", n.validate())?;
        }
        PolicySource::parse(&self.policy).map_err(|e| config_err("policy", e.to_string()))?;
        Ok(())
    }

    pub fn policy_source(&self) -> Result<PolicySource> {
        PolicySource::parse(&self.policy)
    }

    pub fn robot_description(&self) -> Result<Arc<RobotDescription>> {
        Ok(Arc::new(match &self.robot {
            Some(p) => RobotDescription::load(p)?,
            None => RobotDescription::go2(),
        }))
    }

    /// SHA-256 over the canonical JSON form. The worker count and output
    /// directory do not affect results and are left out.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.plan.workers = 1;
        canonical.output_dir = PathBuf::new();
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(&canonical)?)))
    }
}

/// Sets keys from `LOCOBENCH_*` variables into a JSON document.
pub fn apply_env(value: &mut Value, env: impl IntoIterator<Item = (String, String)>) -> Result<()> {
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (key, raw) in vars {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(|s| s.to_ascii_lowercase())
            .collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(config_err(key, "empty key segment"));
        }
        let parsed = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        let mut node = &mut *value;
        for (i, seg) in path.iter().enumerate() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| config_err(path[..i].join("."), "is not a table"))?;
            if i + 1 == path.len() {
                obj.insert(seg.clone(), parsed.clone());
                break;
            }
            node = obj.entry(seg.clone()).or_insert_with(|| Value::Object(Default::default()));
        }
    }
    Ok(())
}
