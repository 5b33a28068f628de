use std::path::Path;

use serde::Deserialize;

/// Optional settings file. Any key may be omitted; command-line flags take
/// precedence over values found here.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    pub clock: Option<String>,
    pub seed: Option<u64>,
    pub gap: Option<f64>,

    pub samples: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub train_fraction: Option<f64>,
    pub stochastic: Option<bool>,

    pub model: Option<String>,
    pub sweep: Option<Vec<f64>>,
    pub iterations: Option<usize>,
    pub hidden: Option<usize>,

    pub mode: Option<String>,
    pub fl: Option<String>,
    pub count: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}
