use std::collections::HashSet;

use hybrid_ntt::dataflow::{audit_trace, classify_stages, mode_schedule, BuMode, Half, StageKind};
use hybrid_ntt::fragmentation::{access_schedule, audit_layout, verify_conflict_free};
use hybrid_ntt::poly::{random_polynomial, reference_forward_ntt, reference_inverse_ntt};
use hybrid_ntt::{arrange_twiddles, run_transform, BankLayout, EngineConfig, ModulusContext};
use proptest::prelude::*;
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

/// Legal `(n, n_part, p)` with `n <= 2^12`.
fn engine_shape() -> impl Strategy<Value = EngineConfig> {
    (2u32..=8, 1u32..=4, 0u32..=8).prop_filter_map("illegal shape", |(sp, lp, extra)| {
        let n_part = 1usize << sp;
        let p = 1usize << lp;
        let log_n = (sp + extra).min(2 * sp).min(12);
        EngineConfig::new(1 << log_n, n_part, p).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn layout_is_a_bijection(cfg in engine_shape()) {
        let layout = BankLayout::from_config(&cfg).unwrap();
        let mut seen = HashSet::new();
        for i in 0..cfg.n {
            let (bank, offset) = layout.placement(i);
            prop_assert!(bank < cfg.banks() && offset < cfg.bank_depth());
            prop_assert!(seen.insert((bank, offset)));
            prop_assert_eq!(layout.at(bank, offset), i);
        }
    }

    #[test]
    fn layout_is_conflict_free(cfg in engine_shape()) {
        let layout = BankLayout::from_config(&cfg).unwrap();
        let sched = mode_schedule(cfg.n, cfg.n_part).unwrap();
        prop_assert!(audit_layout(&layout, &sched).unwrap().passed());
    }

    #[test]
    fn rounds_cover_every_coefficient_once(cfg in engine_shape()) {
        let layout = BankLayout::from_config(&cfg).unwrap();
        let sched = mode_schedule(cfg.n, cfg.n_part).unwrap();
        let rounds = access_schedule(&layout, &cfg, &sched).unwrap();
        prop_assert!(verify_conflict_free(&rounds, cfg.banks()).is_conflict_free());
        for it in 0..cfg.iterations() {
            let reads: Vec<usize> = rounds
                .iter()
                .filter(|r| r.iteration == it && r.direction == hybrid_ntt::fragmentation::Direction::Read)
                .flat_map(|r| r.touches.iter().map(|t| t.index))
                .collect();
            let distinct: HashSet<usize> = reads.iter().copied().collect();
            prop_assert_eq!(reads.len(), cfg.n_part);
            prop_assert_eq!(distinct.len(), cfg.n_part);
        }
    }

    #[test]
    fn engine_matches_reference(cfg in engine_shape(), seed in any::<u64>()) {
        let ctx = ModulusContext::with_prime_floor(cfg.n, 1 << 59).unwrap();
        let a = random_polynomial(&ctx, &mut SplitMix64::seed_from_u64(seed));
        let (got, _) = run_transform(&a, &cfg, &ctx, false).unwrap();
        prop_assert_eq!(&got, &reference_forward_ntt(&ctx, &a).unwrap());
        prop_assert_eq!(reference_inverse_ntt(&ctx, &got).unwrap(), a);
    }

    #[test]
    fn traces_pass_every_audit(cfg in engine_shape(), seed in any::<u64>()) {
        let ctx = ModulusContext::with_prime_floor(cfg.n, 1 << 40).unwrap();
        let sched = mode_schedule(cfg.n, cfg.n_part).unwrap();
        let grid = arrange_twiddles(&cfg, &sched, &ctx).unwrap();
        let a = random_polynomial(&ctx, &mut SplitMix64::seed_from_u64(seed));
        let trace = run_transform(&a, &cfg, &ctx, true).unwrap().1.unwrap();
        let report = audit_trace(&trace, &cfg, &sched, &grid, &ctx);
        prop_assert!(report.passed(), "{:#?}", report);
    }

    #[test]
    fn butterfly_stage_count_is_log_n(cfg in engine_shape()) {
        let sched = mode_schedule(cfg.n, cfg.n_part).unwrap();
        let sp = cfg.log_n_part();
        let mut butterflies = 0;
        for it in 0..cfg.iterations() {
            let (half, _) = cfg.locate(it);
            butterflies += (0..sp).filter(|&s| sched.half(half).mode(s) == BuMode::Butterfly).count();
        }
        let passes = match cfg.locate(0).0 {
            Half::Single => 1,
            _ => cfg.iterations() / 2,
        };
        prop_assert_eq!(butterflies, passes * cfg.log_n() as usize);
        let dependent = classify_stages(&cfg).iter().filter(|c| c.kind == StageKind::Dependent).count();
        prop_assert_eq!(dependent, cfg.p.trailing_zeros() as usize);
    }
}
