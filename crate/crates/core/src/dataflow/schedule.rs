//! Butterfly-unit mode scheduling and partial-stage classification.

use std::fmt;

use serde::Serialize;

use super::config::{EngineConfig, Half};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BuMode {
    Butterfly,
    /// Pass the pair through untouched; no arithmetic is performed.
    Swap,
}

/// Mode split of one iteration half: leading Swap stages, trailing Butterfly stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HalfModes {
    pub swap_stages: u32,
    pub butterfly_stages: u32,
}

impl HalfModes {
    pub fn mode(&self, stage: u32) -> BuMode {
        if stage < self.swap_stages {
            BuMode::Swap
        } else {
            BuMode::Butterfly
        }
    }
}

impl fmt::Display for HalfModes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S×{},B×{}", self.swap_stages, self.butterfly_stages)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModeSchedule {
    pub iterations: usize,
    pub partial_stages: u32,
    pub first_half: HalfModes,
    pub second_half: HalfModes,
}

impl ModeSchedule {
    pub fn half(&self, half: Half) -> HalfModes {
        match half {
            Half::Single | Half::First => self.first_half,
            Half::Second => self.second_half,
        }
    }

    /// `"S×i,B×j / S×k,B×l"` for the two halves.
    pub fn notation(&self) -> String {
        format!("{} / {}", self.first_half, self.second_half)
    }
}

/// Mode schedule for an `n`-point transform on an `n_part`-point engine.
///
/// The second half runs Butterfly mode on the last
/// `S - S_part * floor((S - 1) / S_part)` partial stages and Swap mode before
/// them.
pub fn mode_schedule(n: usize, n_part: usize) -> Result<ModeSchedule> {
    if !n.is_power_of_two() || !n_part.is_power_of_two() || n_part < 4 {
        return Err(Error::BadConfig(format!(
            "n = {n} and n_part = {n_part} must be powers of two with n_part >= 4"
        )));
    }
    if n < n_part || n > n_part * n_part {
        return Err(Error::BadConfig(format!(
            "n = {n} outside [n_part, n_part^2] for n_part = {n_part}"
        )));
    }
    let s = n.trailing_zeros();
    let sp = n_part.trailing_zeros();
    let tail = s - sp * ((s - 1) / sp);
    let iterations = if n == n_part { 1 } else { 2 * n / n_part };
    Ok(ModeSchedule {
        iterations,
        partial_stages: sp,
        first_half: HalfModes {
            swap_stages: 0,
            butterfly_stages: sp,
        },
        second_half: HalfModes {
            swap_stages: sp - tail,
            butterfly_stages: tail,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    /// Both operands of every butterfly arrive on different input streams.
    Independent,
    /// Both operands of every butterfly arrive on the same input stream.
    Dependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StageClass {
    pub stage: u32,
    /// Engine-local distance between butterfly operands, `n_part / 2^(stage+1)`.
    pub stride: usize,
    pub kind: StageKind,
}

/// A stage is dependent when its stride is below `p`; there are `log2 p` of them.
pub fn classify_stages(config: &EngineConfig) -> Vec<StageClass> {
    (0..config.log_n_part())
        .map(|stage| {
            let stride = config.n_part >> (stage + 1);
            let kind = if stride < config.p {
                StageKind::Dependent
            } else {
                StageKind::Independent
            };
            StageClass {
                stage,
                stride,
                kind,
            }
        })
        .collect()
}
