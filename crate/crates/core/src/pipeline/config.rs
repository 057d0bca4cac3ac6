use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ExposureModel;
use crate::recommenders::{
    Algorithm, AlgorithmConfigs, BprConfig, ImplicitMfConfig, ItemKnnConfig, DEFAULT_LIST_LENGTH,
};
use crate::windowing::SplitConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExposureSettings {
    pub gamma: f64,
    pub k: usize,
}

impl Default for ExposureSettings {
    fn default() -> Self {
        ExposureSettings {
            gamma: 0.85,
            k: DEFAULT_LIST_LENGTH,
        }
    }
}

/// Input file locations. Relative paths in a config file resolve against the
/// file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputPaths {
    pub interactions: PathBuf,
    pub genres: PathBuf,
    pub authors: PathBuf,
}

/// Everything a profile or experiment run needs, as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: InputPaths,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Splits evaluated concurrently.
    pub workers: usize,
    pub algorithms: Vec<Algorithm>,
    pub windowing: SplitConfig,
    pub exposure: ExposureSettings,
    pub itemknn: ItemKnnConfig,
    pub implicitmf: ImplicitMfConfig,
    pub bpr: BprConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: InputPaths::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            workers: 1,
            algorithms: Algorithm::ALL.to_vec(),
            windowing: SplitConfig::default(),
            exposure: ExposureSettings::default(),
            itemknn: ItemKnnConfig::default(),
            implicitmf: ImplicitMfConfig::default(),
            bpr: BprConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Read a config file, resolving relative input paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            for p in [
                &mut config.inputs.interactions,
                &mut config.inputs.genres,
                &mut config.inputs.authors,
            ] {
                if p.is_relative() && !p.as_os_str().is_empty() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn algorithm_configs(&self) -> AlgorithmConfigs {
        AlgorithmConfigs {
            itemknn: self.itemknn.clone(),
            implicitmf: self.implicitmf.clone(),
            bpr: self.bpr.clone(),
        }
    }

    pub fn exposure_model(&self) -> Result<ExposureModel> {
        ExposureModel::new(self.exposure.gamma, self.exposure.k)
    }

    /// Checks that need no file contents: inputs exist, k ≥ 1, γ in (0, 1), and so on.
    pub fn validate(&self) -> Result<()> {
        self.exposure_model()?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        for (name, p) in [
            ("interactions", &self.inputs.interactions),
            ("genres", &self.inputs.genres),
            ("authors", &self.inputs.authors),
        ] {
            if p.as_os_str().is_empty() {
                return Err(Error::Config(format!("missing {name} input path")));
            }
            if !p.is_file() {
                return Err(Error::Config(format!(
                    "{name} input {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }
}
