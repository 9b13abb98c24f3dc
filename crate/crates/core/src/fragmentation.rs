//! Conflict-free fragmentation of the transform across `2p` on-chip banks.
//!
//! Coefficient `i` lives in bank `(i ^ (i / n_part)) mod 2p` at word
//! `i / 2p`. Streaming `0..n` in order fills every bank front to back, so
//! loads and stores can run as bursts, and every parallel round issued by
//! [`access_schedule`] touches `2p` distinct banks.
//!
//! Round gather order. Write `m = log2(n / n_part)`, `B = log2(2p)`,
//! `S_part = log2(n_part)` and `v = min(m, B)`. A first-half iteration `c`
//! owns the coefficients `c + k * 2^m`; a round varies the `B` bits of the
//! engine position `k` at `[0, B - v)` and `[S_part - m, S_part - m + v)`
//! and fixes the rest from the round number. The high group is exactly the
//! part of `k` that lands in `i / n_part`, which is what the XOR term
//! spreads across banks. When `m <= B` the top bit of `k` is in the varying
//! set, so stride-`n/2` butterfly partners are fetched in the same round.
//! Second-half iterations and the single-pass case read `2p` consecutive
//! engine positions.

use std::collections::BTreeSet;
use std::io::Write;

use serde::Serialize;

use crate::dataflow::config::{EngineConfig, Half};
use crate::dataflow::schedule::ModeSchedule;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BankLayout {
    config: EngineConfig,
    /// `arrangement[bank][offset]` is the global coefficient index stored there.
    arrangement: Vec<Vec<usize>>,
    placement: Vec<(usize, usize)>,
}

impl BankLayout {
    /// The XOR fragmentation mapping.
    pub fn map(n: usize, n_part: usize, p: usize) -> Result<Self> {
        let config = EngineConfig::new(n, n_part, p)?;
        Self::from_config(&config)
    }

    pub fn from_config(config: &EngineConfig) -> Result<Self> {
        let (n_part, banks) = (config.n_part, config.banks());
        Self::with_bank_fn(config, |i| (i ^ (i / n_part)) % banks)
    }

    /// Baseline without the XOR term, `bank = i mod 2p`. Only useful as a
    /// counterexample for the conflict checker.
    pub fn identity(config: &EngineConfig) -> Result<Self> {
        let banks = config.banks();
        Self::with_bank_fn(config, |i| i % banks)
    }

    /// Layout with `offset = i / 2p` and a caller-chosen bank function, which
    /// must be a bijection within each group of `2p` consecutive indices.
    pub fn with_bank_fn(config: &EngineConfig, bank_of: impl Fn(usize) -> usize) -> Result<Self> {
        config.validate()?;
        let (banks, depth) = (config.banks(), config.bank_depth());
        let mut arrangement = vec![vec![usize::MAX; depth]; banks];
        let mut placement = Vec::with_capacity(config.n);
        for i in 0..config.n {
            let bank = bank_of(i);
            let offset = i / banks;
            let cell = arrangement
                .get_mut(bank)
                .map(|b| &mut b[offset])
                .ok_or_else(|| {
                    Error::BadConfig(format!("bank {bank} out of range for index {i}"))
                })?;
            if *cell != usize::MAX {
                return Err(Error::BadConfig(format!(
                    "indices {} and {i} collide at bank {bank}, offset {offset}",
                    *cell
                )));
            }
            *cell = i;
            placement.push((bank, offset));
        }
        Ok(Self {
            config: *config,
            arrangement,
            placement,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn banks(&self) -> usize {
        self.arrangement.len()
    }

    pub fn depth(&self) -> usize {
        self.config.bank_depth()
    }

    pub fn bank(&self, index: usize) -> usize {
        self.placement[index].0
    }

    pub fn offset(&self, index: usize) -> usize {
        self.placement[index].1
    }

    pub fn placement(&self, index: usize) -> (usize, usize) {
        self.placement[index]
    }

    pub fn at(&self, bank: usize, offset: usize) -> usize {
        self.arrangement[bank][offset]
    }

    pub fn arrangement(&self) -> &[Vec<usize>] {
        &self.arrangement
    }

    /// `index,bank,offset` rows in index order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,bank,offset")?;
        for (i, (b, o)) in self.placement.iter().enumerate() {
            writeln!(out, "{i},{b},{o}")?;
        }
        Ok(())
    }
}

pub fn map_layout(n: usize, n_part: usize, p: usize) -> Result<BankLayout> {
    BankLayout::map(n, n_part, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Touch {
    pub bank: usize,
    pub offset: usize,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccessRound {
    pub iteration: usize,
    pub round: usize,
    pub direction: Direction,
    pub touches: Vec<Touch>,
}

/// Engine positions gathered by `round` of `iteration`, in ascending global order.
pub fn round_positions(config: &EngineConfig, iteration: usize, round: usize) -> Vec<usize> {
    let width = config.banks();
    let mut ks: Vec<usize> = match config.locate(iteration).0 {
        Half::Second => (width * round..width * (round + 1)).collect(),
        Half::First | Half::Single => {
            let sp = config.log_n_part();
            let b = width.trailing_zeros();
            let m = config.iterations_per_half().trailing_zeros();
            let v = m.min(b);
            let lo = 0..b - v;
            let hi = sp - m..sp - m + v;
            let varying: Vec<u32> = lo.clone().chain(hi.clone()).collect();
            let fixed: Vec<u32> = (0..sp)
                .filter(|t| !lo.contains(t) && !hi.contains(t))
                .collect();
            let base = deposit(round, &fixed);
            (0..width).map(|j| base | deposit(j, &varying)).collect()
        }
    };
    ks.sort_unstable_by_key(|&k| config.global_index(iteration, k));
    ks
}

fn deposit(value: usize, positions: &[u32]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (t, &pos)| acc | (((value >> t) & 1) << pos))
}

/// Touches for one round of one iteration.
pub fn round_touches(layout: &BankLayout, iteration: usize, round: usize) -> Vec<Touch> {
    let config = layout.config();
    round_positions(config, iteration, round)
        .into_iter()
        .map(|k| {
            let index = config.global_index(iteration, k);
            let (bank, offset) = layout.placement(index);
            Touch {
                bank,
                offset,
                index,
            }
        })
        .collect()
}

/// Every read and write round of every iteration: per iteration, its reads
/// then its writes. Writes return results to the slots they were read from.
pub fn access_schedule(
    layout: &BankLayout,
    config: &EngineConfig,
    schedule: &ModeSchedule,
) -> Result<Vec<AccessRound>> {
    if layout.config().n != config.n
        || layout.config().n_part != config.n_part
        || layout.config().p != config.p
    {
        return Err(Error::BadConfig(
            "layout was built for a different configuration".into(),
        ));
    }
    if schedule.iterations != config.iterations() {
        return Err(Error::BadConfig(format!(
            "schedule has {} iterations, configuration needs {}",
            schedule.iterations,
            config.iterations()
        )));
    }
    let rounds = config.rounds_per_iteration();
    let mut out = Vec::with_capacity(2 * schedule.iterations * rounds);
    for iteration in 0..schedule.iterations {
        let per_round: Vec<Vec<Touch>> = (0..rounds)
            .map(|r| round_touches(layout, iteration, r))
            .collect();
        for direction in [Direction::Read, Direction::Write] {
            for (round, touches) in per_round.iter().enumerate() {
                out.push(AccessRound {
                    iteration,
                    round,
                    direction,
                    touches: touches.clone(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub iteration: usize,
    pub round: usize,
    pub direction: Direction,
    pub touches: usize,
    pub distinct_banks: usize,
    /// Banks hit more than once.
    pub contended_banks: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConflictReport {
    pub rounds_checked: usize,
    pub conflicts: Vec<Conflict>,
    /// Largest number of distinct word offsets within one round.
    pub max_offsets_per_round: usize,
}

impl ConflictReport {
    pub fn is_conflict_free(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Flags every round whose touches do not cover `2p` distinct banks.
pub fn verify_conflict_free(rounds: &[AccessRound], banks: usize) -> ConflictReport {
    let mut report = ConflictReport {
        rounds_checked: rounds.len(),
        ..Default::default()
    };
    for r in rounds {
        let mut hits = vec![0usize; banks.max(1)];
        let mut out_of_range = false;
        for t in &r.touches {
            match hits.get_mut(t.bank) {
                Some(h) => *h += 1,
                None => out_of_range = true,
            }
        }
        let distinct = hits.iter().filter(|&&h| h > 0).count();
        let offsets: BTreeSet<usize> = r.touches.iter().map(|t| t.offset).collect();
        report.max_offsets_per_round = report.max_offsets_per_round.max(offsets.len());
        if out_of_range || distinct != banks || r.touches.len() != banks {
            report.conflicts.push(Conflict {
                iteration: r.iteration,
                round: r.round,
                direction: r.direction,
                touches: r.touches.len(),
                distinct_banks: distinct,
                contended_banks: hits
                    .iter()
                    .enumerate()
                    .filter(|(_, &h)| h > 1)
                    .map(|(b, _)| b)
                    .collect(),
            });
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BurstViolation {
    pub index: usize,
    pub bank: usize,
    pub expected_offset: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BurstReport {
    pub burst_clean: bool,
    pub violations: Vec<BurstViolation>,
}

/// Streams indices `0..n` and checks each bank receives offsets `0, 1, 2, ...`
/// in arrival order and ends up full.
pub fn verify_burst(layout: &BankLayout) -> BurstReport {
    let mut next = vec![0usize; layout.banks()];
    let mut violations = Vec::new();
    for index in 0..layout.config().n {
        let (bank, offset) = layout.placement(index);
        if offset != next[bank] {
            violations.push(BurstViolation {
                index,
                bank,
                expected_offset: next[bank],
                offset,
            });
        }
        next[bank] = offset + 1;
    }
    let full = next.iter().all(|&d| d == layout.depth());
    BurstReport {
        burst_clean: violations.is_empty() && full,
        violations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutConfig {
    pub n: usize,
    pub n_part: usize,
    pub p: usize,
}

/// Combined conflict and burst audit, serialised for the `map` command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutAudit {
    pub config: LayoutConfig,
    pub rounds_checked: usize,
    pub conflicts: Vec<Conflict>,
    pub burst_clean: bool,
    pub max_offsets_per_round: usize,
}

impl LayoutAudit {
    pub fn passed(&self) -> bool {
        self.conflicts.is_empty() && self.burst_clean
    }
}

pub fn audit_layout(layout: &BankLayout, schedule: &ModeSchedule) -> Result<LayoutAudit> {
    let config = layout.config();
    let rounds = access_schedule(layout, config, schedule)?;
    let conflicts = verify_conflict_free(&rounds, config.banks());
    let burst = verify_burst(layout);
    Ok(LayoutAudit {
        config: LayoutConfig {
            n: config.n,
            n_part: config.n_part,
            p: config.p,
        },
        rounds_checked: conflicts.rounds_checked,
        conflicts: conflicts.conflicts,
        burst_clean: burst.burst_clean,
        max_offsets_per_round: conflicts.max_offsets_per_round,
    })
}
