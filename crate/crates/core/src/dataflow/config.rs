use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architectural parameters of the engine.
///
/// `n` is the full transform length, `n_part` the length of the on-chip
/// engine (it spans `log2 n_part` partial stages) and `p` the number of
/// butterfly units per partial stage, i.e. `p / 2` NTT units of two
/// butterflies each. Every cycle moves `2p` coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub n: usize,
    pub n_part: usize,
    pub p: usize,
    pub freq_mhz: f64,
    pub hbm_gbps: f64,
}

pub const DEFAULT_FREQ_MHZ: f64 = 300.0;
pub const DEFAULT_HBM_GBPS: f64 = 460.0;

impl EngineConfig {
    pub fn new(n: usize, n_part: usize, p: usize) -> Result<Self> {
        Self::with_clock(n, n_part, p, DEFAULT_FREQ_MHZ, DEFAULT_HBM_GBPS)
    }

    pub fn with_clock(
        n: usize,
        n_part: usize,
        p: usize,
        freq_mhz: f64,
        hbm_gbps: f64,
    ) -> Result<Self> {
        let cfg = Self {
            n,
            n_part,
            p,
            freq_mhz,
            hbm_gbps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { n, n_part, p, .. } = *self;
        for (name, v) in [("n", n), ("n_part", n_part), ("p", p)] {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::BadConfig(format!(
                    "{name} = {v} is not a power of two"
                )));
            }
        }
        if p < 2 {
            return Err(Error::BadConfig(format!("p = {p} must be at least 2")));
        }
        if 2 * p > n_part {
            return Err(Error::BadConfig(format!(
                "2p = {} exceeds n_part = {n_part}",
                2 * p
            )));
        }
        if n_part > n {
            return Err(Error::BadConfig(format!(
                "n_part = {n_part} exceeds n = {n}"
            )));
        }
        if n_part.checked_mul(n_part).is_some_and(|sq| n > sq) {
            return Err(Error::BadConfig(format!(
                "n = {n} exceeds n_part^2 = {}; two engine passes cannot cover all stages",
                n_part * n_part
            )));
        }
        if !(self.freq_mhz > 0.0 && self.hbm_gbps > 0.0) {
            return Err(Error::BadConfig(
                "clock and bandwidth must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn log_n(&self) -> u32 {
        self.n.trailing_zeros()
    }

    pub fn log_n_part(&self) -> u32 {
        self.n_part.trailing_zeros()
    }

    /// Number of on-chip banks, `2p`.
    pub fn banks(&self) -> usize {
        2 * self.p
    }

    /// Words per bank, `n / 2p`.
    pub fn bank_depth(&self) -> usize {
        self.n / self.banks()
    }

    pub fn nttus_per_stage(&self) -> usize {
        self.p / 2
    }

    /// Parallel read (or write) rounds per engine iteration, `n_part / 2p`.
    pub fn rounds_per_iteration(&self) -> usize {
        self.n_part / self.banks()
    }

    pub fn is_single_pass(&self) -> bool {
        self.n == self.n_part
    }

    /// Engine iterations per half, `n / n_part`.
    pub fn iterations_per_half(&self) -> usize {
        self.n / self.n_part
    }

    /// Total engine iterations: `2n / n_part`, or one when `n == n_part`.
    pub fn iterations(&self) -> usize {
        if self.is_single_pass() {
            1
        } else {
            2 * self.iterations_per_half()
        }
    }

    /// Splits a global iteration index into its half and in-half index.
    pub fn locate(&self, iteration: usize) -> (Half, usize) {
        if self.is_single_pass() {
            (Half::Single, 0)
        } else if iteration < self.iterations_per_half() {
            (Half::First, iteration)
        } else {
            (Half::Second, iteration - self.iterations_per_half())
        }
    }

    /// Global coefficient index handled at engine position `k` of `iteration`.
    ///
    /// First-half iterations own a residue class modulo `n / n_part` (the
    /// leading `log2 n_part` stages never mix classes); second-half iterations
    /// own a contiguous block of `n_part` coefficients.
    pub fn global_index(&self, iteration: usize, k: usize) -> usize {
        match self.locate(iteration) {
            (Half::Single, _) => k,
            (Half::First, c) => c + k * self.iterations_per_half(),
            (Half::Second, c) => c * self.n_part + k,
        }
    }

    /// Inverse of [`global_index`](Self::global_index) for the owning iteration.
    pub fn local_index(&self, iteration: usize, global: usize) -> usize {
        match self.locate(iteration) {
            (Half::Single, _) => global,
            (Half::First, _) => global / self.iterations_per_half(),
            (Half::Second, _) => global % self.n_part,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    /// `n == n_part`: one all-butterfly pass.
    Single,
    First,
    Second,
}
