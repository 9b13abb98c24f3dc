//! Per-NTT-unit twiddle storage.
//!
//! Each `(iteration, partial stage, NTT unit)` slot receives the list of
//! forward-table indices its two butterfly units consume, round by round
//! (unit 0 then unit 1 within a round). Swap-mode slots consume nothing.
//!
//! First-half (and single-pass) iterations replay one `n_part`-point
//! transform, so stage `s` at engine position `j` uses index
//! `2^s + (j >> (S_part - s))`: the same `n_part - 1` factors every time.
//! Second-half iteration `c` realises global stage `g = s + S - S_part` and
//! uses `2^g + c * 2^s + (j >> (S_part - s))`.

use std::collections::{BTreeMap, BTreeSet};

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::dataflow::config::{EngineConfig, Half};
use crate::dataflow::schedule::{BuMode, ModeSchedule};
use crate::error::{Error, Result};
use crate::modmath::ModulusContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotKey {
    pub iteration: usize,
    pub stage: u32,
    pub nttu: usize,
}

impl SlotKey {
    /// `it{i}.st{s}.u{u}`
    pub fn label(&self) -> String {
        format!("it{}.st{}.u{}", self.iteration, self.stage, self.nttu)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwiddleAssignment {
    config: EngineConfig,
    grid: BTreeMap<SlotKey, Vec<usize>>,
}

impl TwiddleAssignment {
    pub fn get(&self, key: &SlotKey) -> Option<&[usize]> {
        self.grid.get(key).map(Vec::as_slice)
    }

    pub fn slots(&self) -> impl Iterator<Item = (&SlotKey, &[usize])> {
        self.grid.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Checks that every NTT unit's consumption in every round is served
    /// from its own slot list. Returns the offending slots.
    pub fn check_independence(&self) -> Vec<SlotKey> {
        let rounds = self.config.rounds_per_iteration();
        self.grid
            .iter()
            .filter(|(_, list)| !(list.is_empty() || list.len() == 2 * rounds))
            .map(|(k, _)| *k)
            .collect()
    }
}

impl Serialize for TwiddleAssignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.grid.len()))?;
        for (k, v) in &self.grid {
            map.serialize_entry(&k.label(), v)?;
        }
        map.end()
    }
}

pub fn arrange_twiddles(
    config: &EngineConfig,
    schedule: &ModeSchedule,
    ctx: &ModulusContext,
) -> Result<TwiddleAssignment> {
    config.validate()?;
    if ctx.n() != config.n {
        return Err(Error::BadConfig(format!(
            "twiddle table has length {}, transform needs {}",
            ctx.n(),
            config.n
        )));
    }
    if schedule.iterations != config.iterations() || schedule.partial_stages != config.log_n_part()
    {
        return Err(Error::BadConfig(
            "mode schedule does not match configuration".into(),
        ));
    }
    let sp = config.log_n_part();
    let lift = config.log_n() - sp;
    let p = config.p;
    let rounds = config.rounds_per_iteration();
    let mut grid = BTreeMap::new();
    for iteration in 0..config.iterations() {
        let (half, c) = config.locate(iteration);
        let modes = schedule.half(half);
        for stage in 0..sp {
            let t = config.n_part >> (stage + 1);
            let mut lists = vec![Vec::new(); config.nttus_per_stage()];
            if modes.mode(stage) == BuMode::Butterfly {
                for b in 0..rounds * p {
                    let j = (b / t) * 2 * t + b % t;
                    let block = j >> (sp - stage);
                    let idx = match half {
                        Half::Single | Half::First => (1 << stage) + block,
                        Half::Second => (1 << (stage + lift)) + (c << stage) + block,
                    };
                    lists[(b % p) / 2].push(idx);
                }
            }
            for (nttu, list) in lists.into_iter().enumerate() {
                grid.insert(
                    SlotKey {
                        iteration,
                        stage,
                        nttu,
                    },
                    list,
                );
            }
        }
    }
    Ok(TwiddleAssignment {
        config: *config,
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ReplicationStats {
    /// Distinct factors used by the reusable `n_part`-point pass.
    pub distinct: usize,
    /// Distinct factors over the whole transform.
    pub distinct_total: usize,
    /// Sum over slots of the distinct factors each slot stores.
    pub stored_copies: usize,
    /// `stored_copies / distinct_total`.
    pub replication_ratio: f64,
    /// Sum over `(stage, NTT unit)` of the distinct factors that unit ever
    /// stores, i.e. storage when lists persist across iterations.
    pub per_unit_copies: usize,
    pub per_unit_ratio: f64,
    /// `log2(n_part) / 2`, for comparison only.
    pub reference_ratio: f64,
}

pub fn replication_report(assignment: &TwiddleAssignment) -> ReplicationStats {
    let config = assignment.config();
    let mut engine = BTreeSet::new();
    let mut all = BTreeSet::new();
    let mut per_unit: BTreeMap<(u32, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut stored = 0;
    for (key, list) in assignment.slots() {
        let uniq: BTreeSet<usize> = list.iter().copied().collect();
        stored += uniq.len();
        if config.locate(key.iteration).0 != Half::Second {
            engine.extend(uniq.iter().copied());
        }
        all.extend(uniq.iter().copied());
        per_unit
            .entry((key.stage, key.nttu))
            .or_default()
            .extend(uniq);
    }
    let per_unit_copies: usize = per_unit.values().map(BTreeSet::len).sum();
    let ratio = |x: usize| {
        if all.is_empty() {
            0.0
        } else {
            x as f64 / all.len() as f64
        }
    };
    ReplicationStats {
        distinct: engine.len(),
        distinct_total: all.len(),
        stored_copies: stored,
        replication_ratio: ratio(stored),
        per_unit_copies,
        per_unit_ratio: ratio(per_unit_copies),
        reference_ratio: config.log_n_part() as f64 / 2.0,
    }
}
