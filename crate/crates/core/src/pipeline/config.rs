use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ardl::{LagSearch, PssCase};
use crate::diagnostics::DiagnosticsOptions;
use crate::error::{Error, Result};
use crate::index::{DisasterMetricKind, IndexRecipe};
use crate::unitroot::{Bandwidth, DeterministicSpec, LagCriterion, UnitRootOptions, VotingRule};

/// The four disaster exposure series, one per model by default.
pub const DISASTER_SERIES: [&str; 4] = ["QUAKE", "STORM", "FLOOD", "TOTAL"];

/// Macro controls shared by every default model.
pub const DEFAULT_CONTROLS: [&str; 7] = ["GDP", "TRADE", "GENGOV", "CURRACC", "GROSSFIX", "AGRCLTR", "FOREST"];

/// Environment variable overriding [`OutputOptions::dir`].
pub const ENV_OUT_DIR: &str = "PIPELINE_OUT_DIR";
/// Environment variable overriding [`OutputOptions::seed`].
pub const ENV_SEED: &str = "PIPELINE_SEED";

/// Full pipeline configuration, read from TOML.
///
/// Only `[data]` is required. Relative data paths and the output directory
/// are resolved against the directory holding the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataPaths,
    #[serde(default)]
    pub index: IndexRecipe,
    #[serde(default)]
    pub disasters: DisasterOptions,
    #[serde(default = "default_models")]
    pub models: Vec<ModelConfig>,
    #[serde(default)]
    pub lags: LagSearch,
    #[serde(default)]
    pub unit_root: UnitRootStage,
    #[serde(default)]
    pub bounds: BoundsOptions,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    /// Year column plus the index indicators.
    pub indicators: PathBuf,
    /// Year column plus the controls and the disaster denominators.
    #[serde(rename = "macro")]
    pub macro_data: PathBuf,
    /// `year,kind,affected,deaths,damage_usd` records.
    pub events: PathBuf,
    #[serde(default = "default_year_column")]
    pub year_column: String,
}

fn default_year_column() -> String {
    "year".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisasterOptions {
    pub metric: DisasterMetricKind,
    /// Denominator of the affected and deaths metrics.
    pub population_column: String,
    /// Denominator of the damage metric.
    pub gdp_column: String,
    /// Z-score each disaster series after forming the ratio.
    pub standardize: bool,
}

impl Default for DisasterOptions {
    fn default() -> Self {
        DisasterOptions {
            metric: DisasterMetricKind::Damage,
            population_column: "POP".into(),
            gdp_column: "GDP_USD".into(),
            standardize: true,
        }
    }
}

impl DisasterOptions {
    pub fn denominator(&self) -> &str {
        match self.metric {
            DisasterMetricKind::Damage => &self.gdp_column,
            DisasterMetricKind::Affected | DisasterMetricKind::Deaths => &self.population_column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    /// Defaults to the index name.
    #[serde(default)]
    pub dependent: Option<String>,
    pub regressors: Vec<String>,
}

impl ModelConfig {
    pub fn dependent<'a>(&'a self, index_name: &'a str) -> &'a str {
        self.dependent.as_deref().unwrap_or(index_name)
    }
}

/// Common controls plus one disaster series per model.
pub fn default_models() -> Vec<ModelConfig> {
    DISASTER_SERIES
        .iter()
        .enumerate()
        .map(|(i, d)| ModelConfig {
            name: format!("Model {}", i + 1),
            dependent: None,
            regressors: DEFAULT_CONTROLS
                .iter()
                .chain(std::iter::once(d))
                .map(|s| s.to_string())
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "UnitRootTable", into = "UnitRootTable")]
pub struct UnitRootStage {
    pub options: UnitRootOptions,
    /// Deterministic terms whose battery decides the integration order.
    pub classify_spec: DeterministicSpec,
}

/// Flat on-disk form of [`UnitRootStage`]; `flatten` would defeat `deny_unknown_fields`.
#[derive(Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct UnitRootTable {
    max_lag: Option<usize>,
    criterion: LagCriterion,
    bandwidth: Bandwidth,
    voting: VotingRule,
    classify_spec: DeterministicSpec,
}

impl From<UnitRootTable> for UnitRootStage {
    fn from(t: UnitRootTable) -> Self {
        UnitRootStage {
            options: UnitRootOptions {
                max_lag: t.max_lag,
                criterion: t.criterion,
                bandwidth: t.bandwidth,
                voting: t.voting,
            },
            classify_spec: t.classify_spec,
        }
    }
}

impl From<UnitRootStage> for UnitRootTable {
    fn from(s: UnitRootStage) -> Self {
        let o = s.options;
        UnitRootTable {
            max_lag: o.max_lag,
            criterion: o.criterion,
            bandwidth: o.bandwidth,
            voting: o.voting,
            classify_spec: s.classify_spec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsOptions {
    pub case: PssCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub seed: u64,
    /// Abort when the dependent variable is stationary in levels.
    pub strict: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            dir: PathBuf::from("out"),
            seed: 0,
            strict: false,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Parses TOML; relative paths are resolved against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        resolve(base_dir, &mut config.data.indicators);
        resolve(base_dir, &mut config.data.macro_data);
        resolve(base_dir, &mut config.data.events);
        resolve(base_dir, &mut config.output.dir);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    /// Structural checks that need no data.
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("model list is empty".into()));
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.models {
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("duplicate model name {:?}", m.name)));
            }
            if m.regressors.is_empty() {
                return Err(Error::Config(format!("{} has no regressors", m.name)));
            }
        }
        if self.lags.p_max == 0 {
            return Err(Error::Config("lags.p_max must be at least 1".into()));
        }
        if self.index.indicators.is_empty() {
            return Err(Error::Config("index has no indicators".into()));
        }
        Ok(())
    }

    /// Replaces the output directory and seed where given.
    pub fn apply_overrides(&mut self, out_dir: Option<PathBuf>, seed: Option<u64>) {
        if let Some(d) = out_dir {
            self.output.dir = d;
        }
        if let Some(s) = seed {
            self.output.seed = s;
        }
    }

    /// Applies [`ENV_OUT_DIR`] and [`ENV_SEED`] when set.
    pub fn apply_env(&mut self) -> Result<()> {
        let out = std::env::var_os(ENV_OUT_DIR).map(PathBuf::from);
        let seed = match std::env::var(ENV_SEED) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{ENV_SEED}={v:?} is not an integer")))?,
            ),
            Err(_) => None,
        };
        self.apply_overrides(out, seed);
        Ok(())
    }
}
