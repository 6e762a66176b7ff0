//! The run configuration: one TOML document covering every stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempvec::corpus::{InputFormat, PreprocessConfig};
use tempvec::recsys::EvalConfig;
use tempvec::temporal::TemporalConfig;
use tempvec::trainer::TrainConfig;
use tempvec::weighting::WeightConfig;

use crate::error::{CliError, Result};
use crate::grid::GridSpec;

/// Raw log location and column mapping.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    #[serde(flatten)]
    pub format: InputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Drives training initialization, shuffling and RMSE negative sampling.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub data: DataConfig,
    pub preprocess: PreprocessConfig,
    pub temporal: TemporalConfig,
    pub weight: WeightConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub grid: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            output_dir: PathBuf::from("out"),
            data: DataConfig::default(),
            preprocess: PreprocessConfig::default(),
            temporal: TemporalConfig::default(),
            weight: WeightConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            grid: GridSpec::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string().trim().replace('\n', " ")))
    }

    /// Reads a config file. Relative paths inside it are resolved against the
    /// file's directory and made absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::new("io", format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &Path| std::path::absolute(base.join(p)).map_err(CliError::from);
        if let Some(p) = &cfg.data.path {
            cfg.data.path = Some(resolve(p)?);
        }
        cfg.output_dir = resolve(&cfg.output_dir)?;
        Ok(cfg)
    }

    /// Applies overrides, propagates the master seed and validates.
    pub fn finalize(mut self, o: &Overrides) -> Result<Self> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(w) = o.workers {
            self.train.workers = w;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        self.train.seed = self.seed;
        self.eval.seed = self.seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.temporal.validate()?;
        self.weight.validate()?;
        self.train.validate()?;
        if self.eval.cutoffs.is_empty() || self.eval.cutoffs.contains(&0) {
            return Err(CliError::config("eval.cutoffs must be non-empty and >= 1"));
        }
        self.grid.metric()?;
        Ok(())
    }

    /// Binarization range: the preprocessing setting, else the one given
    /// with the input format.
    pub fn rating_range(&self) -> Option<(f64, f64)> {
        self.preprocess
            .rating_range
            .or(self.data.format.rating_range)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// The config as `# `-prefixed lines, for echoing into outputs.
    pub fn echo(&self) -> String {
        self.to_toml().lines().map(|l| format!("# {l}\n")).collect()
    }
}
