//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use hybrid_ntt::{EngineConfig, ModulusContext};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_PRIME_FLOOR: u64 = 1 << 59;
pub const DEFAULT_FREQ_MHZ: u64 = 300;
pub const DEFAULT_HBM_GBPS: f64 = 460.0;

#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// JSON file with any of n, n_part, p, q, freq_mhz, hbm_gbps, seed.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "npart")]
    pub n_part: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Modulus; discovered from the prime floor when absent.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long = "freq-mhz")]
    pub freq_mhz: Option<u64>,
    #[arg(long = "hbm-gbps")]
    pub hbm_gbps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// On-disk shape; every field optional so files can be partial.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    n_part: Option<usize>,
    p: Option<usize>,
    q: Option<u64>,
    freq_mhz: Option<u64>,
    hbm_gbps: Option<f64>,
    seed: Option<u64>,
}

/// Resolved configuration. `n` may still be unknown for commands that can
/// take it from elsewhere (an input file, a sweep).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub n_part: Option<usize>,
    pub p: Option<usize>,
    pub q: Option<u64>,
    pub freq_mhz: u64,
    pub hbm_gbps: f64,
    pub seed: u64,
}

/// Fully specified configuration in the documented JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigRecord {
    pub n: usize,
    pub n_part: usize,
    pub p: usize,
    pub q: u64,
    pub freq_mhz: u64,
    pub hbm_gbps: f64,
    pub seed: u64,
}

fn load(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => load(path)?,
            None => ConfigFile::default(),
        };
        Ok(RunConfig {
            n: self.n.or(file.n),
            n_part: self.n_part.or(file.n_part),
            p: self.p.or(file.p),
            q: self.q.or(file.q),
            freq_mhz: self.freq_mhz.or(file.freq_mhz).unwrap_or(DEFAULT_FREQ_MHZ),
            hbm_gbps: self.hbm_gbps.or(file.hbm_gbps).unwrap_or(DEFAULT_HBM_GBPS),
            seed: self.seed.or(file.seed).unwrap_or(0),
        })
    }
}

impl RunConfig {
    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n
            .ok_or_else(|| CliError::config("missing transform length (--n or \"n\")"))
    }

    /// `n_part` defaults to `min(256, n)`, `p` to `min(16, n_part / 2)`.
    pub fn engine(&self, n: usize) -> Result<EngineConfig, CliError> {
        let n_part = self.n_part.unwrap_or(n.min(256));
        let p = self.p.unwrap_or((n_part / 2).clamp(1, 16));
        Ok(EngineConfig::with_clock(
            n,
            n_part,
            p,
            self.freq_mhz as f64,
            self.hbm_gbps,
        )?)
    }

    /// Explicit `q` is validated; otherwise the smallest NTT prime at or
    /// above `floor`.
    pub fn context(&self, n: usize, floor: u64) -> Result<ModulusContext, CliError> {
        Ok(match self.q {
            Some(q) => ModulusContext::new(q, n)?,
            None => ModulusContext::with_prime_floor(n, floor)?,
        })
    }

    pub fn record(&self, engine: &EngineConfig, ctx: &ModulusContext) -> ConfigRecord {
        ConfigRecord {
            n: engine.n,
            n_part: engine.n_part,
            p: engine.p,
            q: ctx.q(),
            freq_mhz: self.freq_mhz,
            hbm_gbps: self.hbm_gbps,
            seed: self.seed,
        }
    }
}
