//! Cross-checks a simulation trace against the layout, schedule and twiddle grid.

use std::collections::BTreeMap;

use serde::Serialize;

use super::config::EngineConfig;
use super::schedule::{classify_stages, BuMode, ModeSchedule, StageKind};
use super::sim::{SimTrace, TraceRecord};
use crate::fragmentation::{access_schedule, BankLayout, Direction};
use crate::modmath::{add_mod, mul_mod, sub_mod, ModulusContext};
use crate::twiddle::{SlotKey, TwiddleAssignment};

const MAX_LISTED: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    pub passed: bool,
    pub failure_count: usize,
    /// First few failures, with coordinates.
    pub failures: Vec<String>,
}

impl AuditCheck {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        self.passed = false;
        self.failure_count += 1;
        if self.failures.len() < MAX_LISTED {
            self.failures.push(msg());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const ROUND_WIDTH: &str = "round_width";
pub const SWAP_IS_ARITHMETIC_FREE: &str = "swap_is_arithmetic_free";
pub const TWIDDLE_CONSUMPTION: &str = "twiddle_consumption";
pub const BANK_ROUNDS: &str = "bank_rounds";
pub const BUTTERFLY_EQUATIONS: &str = "butterfly_equations";
pub const STREAM_ROUTING: &str = "stream_routing";
pub const ROUND_COUNT: &str = "round_count";

/// Audits a trace produced with tracing on.
///
/// Checks: every read/write round moves exactly `2p` coefficients; Swap slots
/// do no arithmetic; twiddle consumption per slot equals `assignment`; the
/// read/write rounds equal the fragmentation access schedule; Butterfly
/// records satisfy the Cooley-Tukey equations; operand streams follow the
/// stage class; and the round count is `iterations * n_part / 2p`.
pub fn audit_trace(
    trace: &SimTrace,
    config: &EngineConfig,
    schedule: &ModeSchedule,
    assignment: &TwiddleAssignment,
    ctx: &ModulusContext,
) -> AuditReport {
    let banks = config.banks();
    let q = ctx.q();
    let classes = classify_stages(config);

    let mut width = AuditCheck::new(ROUND_WIDTH);
    let mut swap = AuditCheck::new(SWAP_IS_ARITHMETIC_FREE);
    let mut twiddles = AuditCheck::new(TWIDDLE_CONSUMPTION);
    let mut bank_rounds = AuditCheck::new(BANK_ROUNDS);
    let mut equations = AuditCheck::new(BUTTERFLY_EQUATIONS);
    let mut routing = AuditCheck::new(STREAM_ROUTING);
    let mut count = AuditCheck::new(ROUND_COUNT);

    let mut consumed: BTreeMap<SlotKey, Vec<usize>> = BTreeMap::new();
    let mut trace_rounds = Vec::new();

    for rec in &trace.records {
        match rec {
            TraceRecord::Read {
                iteration,
                round,
                touches,
            }
            | TraceRecord::Write {
                iteration,
                round,
                touches,
            } => {
                let dir = if matches!(rec, TraceRecord::Read { .. }) {
                    Direction::Read
                } else {
                    Direction::Write
                };
                if touches.len() != banks {
                    width.fail(|| {
                        format!(
                            "{dir:?} iteration {iteration} round {round}: {} touches, expected {banks}",
                            touches.len()
                        )
                    });
                }
                trace_rounds.push((*iteration, *round, dir, touches));
            }
            TraceRecord::Stage {
                iteration,
                round,
                stage,
                ops,
            } => {
                let want_mode = schedule.half(config.locate(*iteration).0).mode(*stage);
                let kind = classes[*stage as usize].kind;
                let at = || format!("iteration {iteration} round {round} stage {stage}");
                for op in ops {
                    let who = || format!("{} nttu {} bu {}", at(), op.nttu, op.bu);
                    if op.mode != want_mode {
                        equations.fail(|| {
                            format!("{}: mode {:?}, schedule says {want_mode:?}", who(), op.mode)
                        });
                    }
                    match op.mode {
                        BuMode::Swap => {
                            if op.multiplications != 0
                                || op.twiddle.is_some()
                                || op.outputs != op.inputs
                            {
                                swap.fail(|| format!("{}: swap slot did arithmetic", who()));
                            }
                        }
                        BuMode::Butterfly => {
                            let Some(ix) = op.twiddle.filter(|&ix| ix < ctx.n()) else {
                                equations
                                    .fail(|| format!("{}: missing or out-of-range twiddle", who()));
                                continue;
                            };
                            let v = mul_mod(op.inputs[1], ctx.fwd_twiddles()[ix].value, q);
                            let want = [add_mod(op.inputs[0], v, q), sub_mod(op.inputs[0], v, q)];
                            if op.outputs != want || op.multiplications != 1 {
                                equations.fail(|| {
                                    format!(
                                        "{}: outputs {:?}, expected {want:?}",
                                        who(),
                                        op.outputs
                                    )
                                });
                            }
                            consumed
                                .entry(SlotKey {
                                    iteration: *iteration,
                                    stage: *stage,
                                    nttu: op.nttu,
                                })
                                .or_default()
                                .push(ix);
                        }
                    }
                    let crossing = op.streams[0] != op.streams[1];
                    let ok = match kind {
                        StageKind::Independent => crossing,
                        StageKind::Dependent => !crossing,
                    };
                    if !ok {
                        routing.fail(|| {
                            format!("{}: streams {:?} in a {kind:?} stage", who(), op.streams)
                        });
                    }
                }
            }
        }
    }

    for (key, list) in assignment.slots() {
        let got = consumed.remove(key).unwrap_or_default();
        if got != list {
            twiddles.fail(|| format!("{}: consumed {got:?}, assigned {list:?}", key.label()));
        }
    }
    for key in consumed.keys() {
        twiddles.fail(|| format!("{}: consumption with no assignment", key.label()));
    }

    let per_dir = config.iterations() * config.rounds_per_iteration();
    if trace.read_rounds != per_dir || trace.write_rounds != per_dir {
        count.fail(|| {
            format!(
                "{} reads / {} writes, expected {per_dir} each",
                trace.read_rounds, trace.write_rounds
            )
        });
    }

    match BankLayout::from_config(config).and_then(|l| access_schedule(&l, config, schedule)) {
        Ok(expected) => {
            if expected.len() != trace_rounds.len() {
                bank_rounds.fail(|| {
                    format!(
                        "{} rounds traced, {} scheduled",
                        trace_rounds.len(),
                        expected.len()
                    )
                });
            }
            let mut sorted = trace_rounds.clone();
            sorted.sort_by_key(|&(it, r, d, _)| (it, d == Direction::Write, r));
            for (want, (it, r, d, touches)) in expected.iter().zip(sorted) {
                if (want.iteration, want.round, want.direction) != (it, r, d)
                    || &want.touches != touches
                {
                    bank_rounds.fail(|| {
                        format!(
                            "{d:?} iteration {it} round {r}: touches differ from access schedule"
                        )
                    });
                }
            }
        }
        Err(e) => bank_rounds.fail(|| format!("cannot rebuild access schedule: {e}")),
    }

    AuditReport {
        checks: vec![
            width,
            swap,
            twiddles,
            bank_rounds,
            equations,
            routing,
            count,
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::schedule::mode_schedule;
    use crate::dataflow::sim::run_transform;
    use crate::fragmentation::Touch;
    use crate::poly::random_polynomial;
    use crate::twiddle::arrange_twiddles;
    use rand_core::SeedableRng;
    use rand_xoshiro::SplitMix64;

    struct Fixture {
        cfg: EngineConfig,
        ctx: ModulusContext,
        sched: ModeSchedule,
        grid: TwiddleAssignment,
        trace: SimTrace,
    }

    fn fixture(n: usize, np: usize, p: usize) -> Fixture {
        let cfg = EngineConfig::new(n, np, p).unwrap();
        let ctx = ModulusContext::with_prime_floor(n, 1 << 59).unwrap();
        let sched = mode_schedule(n, np).unwrap();
        let grid = arrange_twiddles(&cfg, &sched, &ctx).unwrap();
        let a = random_polynomial(&ctx, &mut SplitMix64::seed_from_u64(n as u64));
        let trace = run_transform(&a, &cfg, &ctx, true).unwrap().1.unwrap();
        Fixture {
            cfg,
            ctx,
            sched,
            grid,
            trace,
        }
    }

    impl Fixture {
        fn audit(&self) -> AuditReport {
            audit_trace(&self.trace, &self.cfg, &self.sched, &self.grid, &self.ctx)
        }
    }

    #[test]
    fn clean_runs_pass() {
        for (n, np, p) in [(16, 8, 2), (64, 8, 2), (256, 16, 4), (1 << 13, 256, 16)] {
            let report = fixture(n, np, p).audit();
            assert!(report.passed(), "({n},{np},{p}): {report:#?}");
        }
    }

    #[test]
    fn forged_touch_is_located() {
        let mut f = fixture(16, 8, 2);
        let idx = f
            .trace
            .records
            .iter()
            .position(|r| {
                matches!(
                    r,
                    TraceRecord::Read {
                        iteration: 1,
                        round: 1,
                        ..
                    }
                )
            })
            .unwrap();
        if let TraceRecord::Read { touches, .. } = &mut f.trace.records[idx] {
            touches.push(Touch {
                bank: 0,
                offset: 0,
                index: 0,
            });
        }
        let report = f.audit();
        let width = report.check(ROUND_WIDTH).unwrap();
        assert!(!width.passed);
        assert_eq!(width.failure_count, 1);
        assert!(
            width.failures[0].contains("iteration 1 round 1"),
            "{:?}",
            width.failures
        );
        assert!(!report.check(BANK_ROUNDS).unwrap().passed);
        assert!(report.check(TWIDDLE_CONSUMPTION).unwrap().passed);
    }

    #[test]
    fn forged_arithmetic_is_caught() {
        let mut f = fixture(16, 8, 2);
        let mut swapped = false;
        let mut bfly = false;
        for rec in &mut f.trace.records {
            if let TraceRecord::Stage { ops, .. } = rec {
                for op in ops {
                    if op.mode == BuMode::Swap && !swapped {
                        op.multiplications = 1;
                        swapped = true;
                    } else if op.mode == BuMode::Butterfly && !bfly {
                        op.twiddle = op.twiddle.map(|t| t ^ 1);
                        bfly = true;
                    }
                }
            }
        }
        let report = f.audit();
        assert!(!report.check(SWAP_IS_ARITHMETIC_FREE).unwrap().passed);
        assert!(!report.check(TWIDDLE_CONSUMPTION).unwrap().passed);
        assert!(!report.check(BUTTERFLY_EQUATIONS).unwrap().passed);
        assert!(report.check(STREAM_ROUTING).unwrap().passed);
    }
}
