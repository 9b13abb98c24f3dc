//! Functional simulation of the banked hybrid-dataflow engine.
//!
//! A run burst-loads the polynomial into `2p` banks, executes
//! `2n / n_part` engine iterations (one when `n == n_part`) and burst-stores
//! the banks back out. Each iteration issues `n_part / 2p` parallel read
//! rounds, pushes the gathered coefficients through `log2 n_part` partial
//! stages of `p` butterfly units, and writes the results back in place so
//! the second half finds them on chip.
//!
//! Stages are evaluated in dependency order: a stage sees the whole
//! iteration's output of the previous stage, which stands in for the
//! inter-stage reorder buffers. Cycle timing is left to [`crate::perf`].
//!
//! Butterfly `b` of a stage with stride `t` runs in round `b / p` on unit
//! `b % p` and combines engine positions `j = (b / t) * 2t + b % t` and
//! `j + t`. Unit `u` belongs to NTT unit `u / 2`. Within a round the `2p`
//! operand positions, sorted, form the round window; the lower `p` are input
//! stream 0 and the upper `p` stream 1.

use std::io::Write;

use serde::Serialize;

use super::config::{EngineConfig, Half};
use super::schedule::{mode_schedule, BuMode, ModeSchedule};
use crate::error::{Error, Result};
use crate::fragmentation::{round_positions, round_touches, BankLayout, Touch};
use crate::modmath::{add_mod, mul_mod_shoup, sub_mod, ModulusContext, ShoupPair};
use crate::poly::Polynomial;

/// One butterfly unit evaluation. Swap mode passes the pair through in place.
#[inline]
pub fn butterfly(x1: u64, x2: u64, w: ShoupPair, mode: BuMode, q: u64) -> (u64, u64) {
    match mode {
        BuMode::Butterfly => {
            let t = mul_mod_shoup(x2, w, q);
            (add_mod(x1, t, q), sub_mod(x1, t, q))
        }
        BuMode::Swap => (x1, x2),
    }
}

/// A butterfly unit that counts the modular multiplications it performs.
#[derive(Clone, Copy, Debug, Default)]
pub struct ButterflyUnit {
    pub multiplications: u64,
}

impl ButterflyUnit {
    #[inline]
    pub fn exec(
        &mut self,
        x1: u64,
        x2: u64,
        w: Option<ShoupPair>,
        mode: BuMode,
        q: u64,
    ) -> (u64, u64) {
        match (mode, w) {
            (BuMode::Butterfly, Some(w)) => {
                self.multiplications += 1;
                butterfly(x1, x2, w, mode, q)
            }
            (BuMode::Butterfly, None) => panic!("butterfly mode needs a twiddle factor"),
            (BuMode::Swap, _) => (x1, x2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BuOp {
    pub nttu: usize,
    pub bu: usize,
    pub mode: BuMode,
    /// Engine positions of `(x1, x2)`.
    pub positions: [usize; 2],
    /// Input stream (window half) each operand arrived on.
    pub streams: [u8; 2],
    pub inputs: [u64; 2],
    pub twiddle: Option<usize>,
    pub outputs: [u64; 2],
    pub multiplications: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Read {
        iteration: usize,
        round: usize,
        touches: Vec<Touch>,
    },
    /// One cycle of one partial stage: `p` butterfly-unit operations.
    Stage {
        iteration: usize,
        round: usize,
        stage: u32,
        ops: Vec<BuOp>,
    },
    Write {
        iteration: usize,
        round: usize,
        touches: Vec<Touch>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SimTrace {
    pub records: Vec<TraceRecord>,
    pub read_rounds: usize,
    pub write_rounds: usize,
    pub elements_read: usize,
    pub elements_written: usize,
    pub multiplications: u64,
}

impl SimTrace {
    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Owns the banked buffer for one configuration; reusable across runs.
pub struct Simulator<'a> {
    config: EngineConfig,
    ctx: &'a ModulusContext,
    layout: BankLayout,
    schedule: ModeSchedule,
    banks: Vec<Vec<u64>>,
    /// Per iteration and round, the engine positions gathered.
    gathers: Vec<Vec<Vec<usize>>>,
}

impl<'a> Simulator<'a> {
    pub fn new(config: EngineConfig, ctx: &'a ModulusContext) -> Result<Self> {
        config.validate()?;
        if ctx.n() != config.n {
            return Err(Error::BadConfig(format!(
                "context length {} does not match n = {}",
                ctx.n(),
                config.n
            )));
        }
        let layout = BankLayout::from_config(&config)?;
        let schedule = mode_schedule(config.n, config.n_part)?;
        let gathers = (0..config.iterations())
            .map(|it| {
                (0..config.rounds_per_iteration())
                    .map(|r| round_positions(&config, it, r))
                    .collect()
            })
            .collect();
        Ok(Self {
            banks: vec![vec![0; config.bank_depth()]; config.banks()],
            config,
            ctx,
            layout,
            schedule,
            gathers,
        })
    }

    pub fn layout(&self) -> &BankLayout {
        &self.layout
    }

    pub fn schedule(&self) -> &ModeSchedule {
        &self.schedule
    }

    pub fn run(
        &mut self,
        poly: &Polynomial,
        trace: bool,
    ) -> Result<(Polynomial, Option<SimTrace>)> {
        poly.check_ring(self.ctx)?;
        let mut tr = trace.then(SimTrace::default);

        // burst load
        for (i, &c) in poly.coeffs().iter().enumerate() {
            let (b, o) = self.layout.placement(i);
            self.banks[b][o] = c;
        }
        let mut engine = vec![0u64; self.config.n_part];
        for iteration in 0..self.config.iterations() {
            self.run_iteration(iteration, &mut engine, tr.as_mut());
        }
        // burst store
        let out: Vec<u64> = (0..self.config.n)
            .map(|i| {
                let (b, o) = self.layout.placement(i);
                self.banks[b][o]
            })
            .collect();
        Ok((Polynomial::from_parts(self.ctx.q(), out)?, tr))
    }

    fn run_iteration(
        &mut self,
        iteration: usize,
        engine: &mut [u64],
        mut tr: Option<&mut SimTrace>,
    ) {
        let cfg = self.config;
        let q = self.ctx.q();
        let table = self.ctx.fwd_twiddles();
        let (half, _) = cfg.locate(iteration);
        let modes = self.schedule.half(half);
        let s_total = cfg.log_n();
        let sp = cfg.log_n_part();
        let lift = if half == Half::Second {
            s_total - sp
        } else {
            0
        };
        let rounds = cfg.rounds_per_iteration();
        let p = cfg.p;

        for (round, ks) in self.gathers[iteration].iter().enumerate() {
            for &k in ks {
                let (b, o) = self.layout.placement(cfg.global_index(iteration, k));
                engine[k] = self.banks[b][o];
            }
            if let Some(tr) = tr.as_deref_mut() {
                tr.read_rounds += 1;
                tr.elements_read += ks.len();
                tr.records.push(TraceRecord::Read {
                    iteration,
                    round,
                    touches: round_touches(&self.layout, iteration, round),
                });
            }
        }

        let mut units = vec![ButterflyUnit::default(); p];
        for stage in 0..sp {
            let t = cfg.n_part >> (stage + 1);
            let mode = modes.mode(stage);
            let g = stage + lift;
            for round in 0..rounds {
                let mut ops = tr.as_ref().map(|_| Vec::with_capacity(p));
                let window_base = if t < p { 2 * p * round } else { 0 };
                for (slot, unit) in units.iter_mut().enumerate() {
                    let b = round * p + slot;
                    let j = (b / t) * 2 * t + b % t;
                    let (x1, x2) = (engine[j], engine[j + t]);
                    let twiddle = (mode == BuMode::Butterfly)
                        .then(|| (1usize << g) + (cfg.global_index(iteration, j) >> (s_total - g)));
                    let before = unit.multiplications;
                    let (y1, y2) = unit.exec(x1, x2, twiddle.map(|ix| table[ix]), mode, q);
                    engine[j] = y1;
                    engine[j + t] = y2;
                    if let Some(ops) = ops.as_mut() {
                        // window positions: independent stages pair slot with p + slot,
                        // dependent stages hold a contiguous 2p run
                        let win = if t >= p {
                            [slot, p + slot]
                        } else {
                            [j - window_base, j + t - window_base]
                        };
                        ops.push(BuOp {
                            nttu: slot / 2,
                            bu: slot % 2,
                            mode,
                            positions: [j, j + t],
                            streams: win.map(|w| (w >= p) as u8),
                            inputs: [x1, x2],
                            twiddle,
                            outputs: [y1, y2],
                            multiplications: unit.multiplications - before,
                        });
                    }
                }
                if let (Some(tr), Some(ops)) = (tr.as_deref_mut(), ops) {
                    tr.records.push(TraceRecord::Stage {
                        iteration,
                        round,
                        stage,
                        ops,
                    });
                }
            }
        }

        for (round, ks) in self.gathers[iteration].iter().enumerate() {
            for &k in ks {
                let (b, o) = self.layout.placement(cfg.global_index(iteration, k));
                self.banks[b][o] = engine[k];
            }
            if let Some(tr) = tr.as_deref_mut() {
                tr.write_rounds += 1;
                tr.elements_written += ks.len();
                tr.records.push(TraceRecord::Write {
                    iteration,
                    round,
                    touches: round_touches(&self.layout, iteration, round),
                });
            }
        }
        if let Some(tr) = tr {
            tr.multiplications += units.iter().map(|u| u.multiplications).sum::<u64>();
        }
    }
}

/// Runs one forward transform through the engine model.
pub fn run_transform(
    poly: &Polynomial,
    config: &EngineConfig,
    ctx: &ModulusContext,
    trace: bool,
) -> Result<(Polynomial, Option<SimTrace>)> {
    Simulator::new(*config, ctx)?.run(poly, trace)
}
