use std::path::PathBuf;
use std::sync::Arc;

use pel_core::hecke::PrimeBehavior;
use pel_core::padic::FieldContext;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable that overrides `--cache-dir`.
pub const CACHE_ENV: &str = "PEL_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u64,
    pub precision: u32,
    pub schedule: Vec<usize>,
    /// The character parameter, at least 1.
    pub a: i64,
    pub prime_behavior: PrimeBehavior,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3,
            precision: 20,
            schedule: vec![10, 20],
            a: 1,
            prime_behavior: PrimeBehavior::Inert,
            format: Format::Json,
            cache_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.context()?;
        if self.schedule.is_empty() || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Input(format!("schedule {:?} must be nonempty and strictly increasing", self.schedule)));
        }
        if self.a < 1 {
            return Err(CliError::Input(format!("a must be at least 1, got {}", self.a)));
        }
        Ok(())
    }

    pub fn context(&self) -> Result<Arc<FieldContext>, CliError> {
        FieldContext::new(self.p, self.precision).map_err(CliError::input)
    }

    /// Applies the environment override to the cache directory.
    pub fn with_env_cache(mut self) -> Self {
        if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
            self.cache_dir = Some(PathBuf::from(dir));
        }
        self
    }
}
