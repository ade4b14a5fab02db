//! TOML configuration schema and conversion into core types.
//!
//! All keys are optional; missing sections fall back to the defaults the
//! library ships. A minimal config file is an empty file.
//!
//! ```toml
//! seed = 7                        # run seed (--seed wins)
//!
//! [net]
//! widths = [19, 10, 8]
//! bias_floor = 5.0
//! init_range = 3.0
//! epsilon = 0.01                  # per-layer quiescence threshold
//!
//! [train]
//! learning_rate = 1.0
//! epochs = 3000
//! threshold = 0.5
//! dataset = "square-verb"         # or "square-verb-varied-location"
//! context = "alice-lab"           # training context label
//!
//! [table]
//! total = 10
//! person_dependent = 8
//! photo_tolerant = 2
//! location_dependent = 0
//! memory_transparent = 1
//!
//! [scenario]
//! backend = "symbolic"            # or "neural"
//! strategies = ["spoof-photo", "recall-memory", "learn-tag-strip"]
//! retrain_cost = 3000
//!
//! [qa]
//! state = "out/state.txt"         # state file written by `scenario`
//! preset = "post-tag-strip"       # or bob-baseline / alice-present
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use nullstate_core::codec::{ContextCode, ContextRegistry};
use nullstate_core::machine::TableConfig;
use nullstate_core::net::{self, TrainConfig};
use nullstate_core::scenario::{
    BackendChoice, NeuralSettings, RecoveryStrategy, RetrainSettings, ScenarioConfig,
};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub net: NetSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub table: TableSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub qa: QaSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetSection {
    pub widths: Vec<usize>,
    pub bias_floor: f64,
    pub init_range: f64,
    pub epsilon: f64,
}

impl Default for NetSection {
    fn default() -> Self {
        NetSection {
            widths: net::DEFAULT_WIDTHS.to_vec(),
            bias_floor: net::DEFAULT_BIAS_FLOOR,
            init_range: net::DEFAULT_INIT_RANGE,
            epsilon: net::DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub epochs: usize,
    pub threshold: f64,
    pub dataset: String,
    pub context: String,
}

impl Default for TrainSection {
    fn default() -> Self {
        let cfg = TrainConfig::default();
        TrainSection {
            learning_rate: cfg.learning_rate,
            epochs: cfg.epochs,
            threshold: cfg.threshold,
            dataset: "square-verb".to_string(),
            context: "alice-lab".to_string(),
        }
    }
}

impl TrainSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed,
            threshold: self.threshold,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableSection {
    pub total: usize,
    pub person_dependent: usize,
    pub photo_tolerant: usize,
    pub location_dependent: usize,
    pub memory_transparent: usize,
}

impl Default for TableSection {
    fn default() -> Self {
        let cfg = TableConfig::default();
        TableSection {
            total: cfg.total,
            person_dependent: cfg.person_dependent,
            photo_tolerant: cfg.photo_tolerant,
            location_dependent: cfg.location_dependent,
            memory_transparent: cfg.memory_transparent,
        }
    }
}

impl TableSection {
    pub fn table_config(&self) -> TableConfig {
        TableConfig {
            total: self.total,
            person_dependent: self.person_dependent,
            photo_tolerant: self.photo_tolerant,
            location_dependent: self.location_dependent,
            memory_transparent: self.memory_transparent,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub backend: String,
    pub strategies: Vec<String>,
    pub retrain_cost: u64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            backend: "symbolic".to_string(),
            strategies: ScenarioConfig::default()
                .strategies
                .iter()
                .map(|s| s.token().to_string())
                .collect(),
            retrain_cost: RetrainSettings::default().symbolic_cost,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaSection {
    pub state: Option<PathBuf>,
    pub preset: Option<String>,
}

impl FileConfig {
    /// Loads a TOML file, or the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<(FileConfig, String)> {
        match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                let cfg: FileConfig = toml::from_str(&text)
                    .with_context(|| format!("cannot parse config {}", path.display()))?;
                Ok((cfg, text))
            }
            None => Ok((FileConfig::default(), String::new())),
        }
    }

    pub fn scenario_config(&self, seed: u64) -> Result<ScenarioConfig> {
        let backend = match self.scenario.backend.as_str() {
            "symbolic" => BackendChoice::Symbolic,
            "neural" => BackendChoice::Neural(NeuralSettings {
                widths: self.net.widths.clone(),
                bias_floor: self.net.bias_floor,
                epsilon: self.net.epsilon,
                train: self.train.train_config(seed),
            }),
            other => bail!("unknown backend {other:?} (symbolic|neural)"),
        };
        let strategies = self
            .scenario
            .strategies
            .iter()
            .map(|s| {
                RecoveryStrategy::from_token(s).ok_or_else(|| {
                    anyhow!(
                        "unknown strategy {s:?}; valid: {}",
                        RecoveryStrategy::ALL
                            .iter()
                            .map(|r| r.token())
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScenarioConfig {
            seed,
            table: self.table.table_config(),
            backend,
            strategies,
            retrain: RetrainSettings {
                symbolic_cost: self.scenario.retrain_cost,
                net: self.train.train_config(seed),
            },
        })
    }
}

/// The registry the command line works with: the standard codes plus the
/// extra training locations.
pub fn registry() -> ContextRegistry {
    let mut reg = ContextRegistry::standard();
    reg.register("alice-lab-2", ContextCode::ALICE_LAB_2)
        .expect("fresh registry");
    reg.register("alice-lab-3", ContextCode::ALICE_LAB_3)
        .expect("fresh registry");
    reg
}

/// Looks a context label up in the command-line registry.
pub fn context_by_label(label: &str) -> Result<ContextCode> {
    registry()
        .code(label)
        .ok_or_else(|| anyhow!("unknown context label {label:?}"))
}
