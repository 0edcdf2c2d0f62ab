//! Record of one run, sufficient to repeat it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stress::dr_presets;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::goals::GoalKind;
use crate::scoring::dr_key;
use crate::terrain::TerrainKind;

/// What the run evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunCommand {
    Stress,
    Level {
        terrain: TerrainKind,
        dr_index: usize,
    },
    Base {
        terrain: TerrainKind,
        level: u8,
        dr_index: usize,
        goal: GoalKind,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub engine_version: String,
    pub created_at: String,
    pub command: RunCommand,
    pub config: RunConfig,
    pub config_hash: String,
    pub policy_hash: String,
    pub seed_root: u64,
    /// `terrain/drNN` keys in evaluation order.
    pub cells: Vec<String>,
}

impl RunManifest {
    pub fn new(command: RunCommand, config: RunConfig, created_at: String) -> Result<Self> {
        let cells = match &command {
            RunCommand::Stress => {
                let n = dr_presets(config.plan.dr_set).len();
                config
                    .plan
                    .terrains
                    .iter()
                    .flat_map(|t| (0..n).map(move |j| format!("{t}/{}", dr_key(j))))
                    .collect()
            }
            RunCommand::Level { terrain, dr_index } => vec![format!("{terrain}/{}", dr_key(*dr_index))],
            RunCommand::Base {
                terrain,
                level,
                dr_index,
                goal,
                ..
            } => vec![format!("{terrain}/{}/L{level}/{goal}", dr_key(*dr_index))],
        };
        Ok(RunManifest {
            engine_version: crate::ENGINE_VERSION.into(),
            created_at,
            command,
            config_hash: config.hash()?,
            policy_hash: config.policy_source()?.hash()?,
            seed_root: config.plan.level.seed_root,
            config,
            cells,
        })
    }

    /// Checks that the recorded hashes still describe the config and policy.
    pub fn verify(&self) -> Result<()> {
        let config_hash = self.config.hash()?;
        if config_hash != self.config_hash {
            return Err(Error::InvalidState(format!(
                "config hash {config_hash} differs from recorded {}",
                self.config_hash
            )));
        }
        let policy_hash = self.config.policy_source()?.hash()?;
        if policy_hash != self.policy_hash {
            return Err(Error::InvalidState(format!(
                "policy hash {policy_hash} differs from recorded {}",
                self.policy_hash
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: RunManifest = serde_json::from_str(&text)?;
        m.config.validate()?;
        Ok(m)
    }
}
