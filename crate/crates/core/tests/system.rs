mod common;

use mmofdm::system::{
    build_allocation, pilot_plan, sample_power_coefficients, validate_config, NvRule, PowerMode,
    SystemConfig,
};
use mmofdm::Error;
use proptest::prelude::*;

fn grouping() -> impl Strategy<Value = (usize, usize)> {
    (0u32..8, 0u32..10).prop_map(|(u, c)| (1usize << u, 1usize << c))
}

#[test]
fn reference_plan() {
    let (cfg, plan) = common::setup(|_| {});
    assert_eq!(cfg.n_coherence(), 30);
    assert_eq!(plan.pilot.pilot_length, 4);
    assert_eq!(plan.pilot.pilots_per_ue, 1);
    assert!(plan.is_uniform());
}

#[test]
fn grouping_mismatch_names_the_problem() {
    let mut c = SystemConfig::paper_defaults();
    c.subcarriers_per_user = 3;
    let e = validate_config(c).unwrap_err();
    assert!(matches!(e, Error::Grouping(_)));
}

proptest! {
    #[test]
    fn pilot_plan_invariants((n_u, n_c) in grouping(), single in any::<bool>()) {
        let cfg = validate_config(common::grouped(n_u, n_c)).unwrap();
        let rule = if single { NvRule::Single } else { NvRule::PerCoherenceBlock };
        let p = pilot_plan(&cfg, rule);
        let n_h = cfg.n_coherence();
        prop_assert!(p.pilot_length >= 1 && p.pilot_length <= n_u);
        prop_assert!(p.pilot_length * n_c.min(n_h) >= n_u);
        prop_assert_eq!(p.rosters.len(), n_c);
        prop_assert_eq!(p.blocks.len(), p.pilots_per_ue);
        for block in &p.blocks {
            let mut seen: Vec<usize> = block.clone().flat_map(|c| p.rosters[c].iter().copied()).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n_u).collect::<Vec<_>>());
        }
        if p.pilots_per_ue == 1 {
            prop_assert!(p.is_contamination_free());
        }
    }

    #[test]
    fn allocation_partitions((n_u, n_c) in grouping()) {
        let cfg = validate_config(common::grouped(n_u, n_c)).unwrap();
        let plan = build_allocation(&cfg);
        prop_assert_eq!(plan.n_subcarriers(), cfg.n_subcarriers);
        prop_assert_eq!(plan.ue_groups.last().unwrap().end, cfg.n_users);
        for g in 0..plan.n_groups {
            for j in plan.subcarrier_groups[g].clone() {
                prop_assert_eq!(plan.group_of_subcarrier(j), g);
                prop_assert_eq!(plan.ue_index(j, 0), plan.ue_groups[g].start);
            }
        }
    }

    #[test]
    fn random_power_lies_on_the_simplex((n_u, n_c) in grouping(), seed in any::<u64>()) {
        let cfg = validate_config(common::grouped(n_u, n_c)).unwrap();
        let plan = sample_power_coefficients(&build_allocation(&cfg), PowerMode::Random, seed);
        for g in (0..plan.n_groups).step_by(37) {
            for k in 0..n_u {
                prop_assert!((plan.ue_power_sum(g, k) - 1.0).abs() < 1e-12);
                for j in plan.subcarrier_groups[g].clone() {
                    prop_assert!(plan.eta(j, k) >= 0.0);
                }
            }
        }
        let again = sample_power_coefficients(&build_allocation(&cfg), PowerMode::Random, seed);
        prop_assert_eq!(plan, again);
    }
}
