//! Optional key=value config file.
//!
//! Recognized keys mirror the runtime defaults:
//!
//! ```text
//! mu_default=0.42        # fallback share of possession-ending free throws
//! mu_source=estimated    # estimated | literal (literal skips pbp estimation)
//! per100=false           # present ratings per 100 possessions
//! data_dir=/path         # base dir for relative --box/--pbp paths
//! output_format=csv      # csv | json
//! seed=0                 # default simulation seed
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::path::{Path, PathBuf};

use fourfactors::ratings::MU_2022_23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuSource {
    Literal,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub mu_default: f64,
    pub mu_source: MuSource,
    pub per100: bool,
    pub data_dir: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mu_default: MU_2022_23,
            mu_source: MuSource::Estimated,
            per100: false,
            data_dir: None,
            output_format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut config = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mu_default" => {
                    let mu: f64 = value
                        .parse()
                        .map_err(|_| format!("config line {}: bad mu_default", lineno + 1))?;
                    if !(mu > 0.0 && mu <= 1.0) {
                        return Err(format!("config line {}: mu_default must be in (0, 1]", lineno + 1));
                    }
                    config.mu_default = mu;
                }
                "mu_source" => {
                    config.mu_source = match value {
                        "literal" => MuSource::Literal,
                        "estimated" => MuSource::Estimated,
                        _ => return Err(format!("config line {}: mu_source must be literal or estimated", lineno + 1)),
                    }
                }
                "per100" => {
                    config.per100 = match value {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        _ => return Err(format!("config line {}: bad per100", lineno + 1)),
                    }
                }
                "data_dir" => config.data_dir = Some(PathBuf::from(value)),
                "output_format" => {
                    config.output_format = match value {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        _ => return Err(format!("config line {}: output_format must be csv or json", lineno + 1)),
                    }
                }
                "seed" => {
                    config.seed = value
                        .parse()
                        .map_err(|_| format!("config line {}: bad seed", lineno + 1))?;
                }
                other => return Err(format!("config line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(config)
    }

    /// Resolves an input path against `data_dir` when the path is relative.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        match (&self.data_dir, path.is_relative()) {
            (Some(base), true) => base.join(path),
            _ => path.to_path_buf(),
        }
    }
}
