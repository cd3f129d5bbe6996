mod common;

use mmofdm::rate::{
    optimize_frame_length, per_symbol_rate, pilot_percentage, sum_rate, sum_rate_with, Combiner,
    LinkModel,
};
use mmofdm::system::{sample_power_coefficients, PowerMode};
use proptest::prelude::*;

#[test]
fn pilot_percentage_values() {
    assert_eq!(pilot_percentage(4, 28), 12.5);
    assert_eq!(pilot_percentage(4, 4), 50.0);
}

#[test]
fn symbol_zero_is_rejected() {
    let (cfg, plan) = common::setup(|_| {});
    let m = LinkModel::new(&cfg, &plan, 10).unwrap();
    assert!(m.sinr_uniform(Combiner::Zf, 0).is_err());
    assert!(m.sinr_uniform(Combiner::Zf, 11).is_err());
    assert!(m.sinr(Combiner::Mrc, 1, 0.9, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rate_is_monotone_in_sinr(a in 0.0f64..1e6, d in 0.0f64..1e6) {
        prop_assert!(per_symbol_rate(a, 1e4) <= per_symbol_rate(a + d, 1e4));
        prop_assert_eq!(per_symbol_rate(0.0, 1e4), 0.0);
    }

    #[test]
    fn collapsed_form_matches_general_form(v in 0.0f64..100.0, u in 2u32..8, n in 1usize..30) {
        let (cfg, plan) = common::setup(|c| { c.v_max = v; *c = c.clone().with_users_per_subcarrier(1 << u); });
        let m = LinkModel::new(&cfg, &plan, 30).unwrap();
        for c in Combiner::ALL {
            let a = m.sinr_uniform(c, n).unwrap();
            let b = m.sinr(c, n, plan.eta(0, 0), plan.eta_bar(0)).unwrap();
            prop_assert!((a / b - 1.0).abs() < 1e-12, "{c}: {a} vs {b}");
        }
    }

    #[test]
    fn sinr_decays_over_the_frame(v in 0.0f64..25.0) {
        let (cfg, plan) = common::setup(|c| c.v_max = v);
        let m = LinkModel::new(&cfg, &plan, 30).unwrap();
        for c in Combiner::ALL {
            for n in 1..30 {
                prop_assert!(m.sinr_uniform(c, n + 1).unwrap() <= m.sinr_uniform(c, n).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn faster_users_lose_rate(v in 0.0f64..95.0, dv in 1.0f64..50.0) {
        let (slow, sp) = common::setup(|c| c.v_max = v);
        let (fast, fp) = common::setup(|c| c.v_max = v + dv);
        for c in Combiner::ALL {
            prop_assert!(sum_rate(c, &fast, &fp).unwrap().system_sum_rate <= sum_rate(c, &slow, &sp).unwrap().system_sum_rate);
        }
    }

    #[test]
    fn uniform_sum_counts_every_pair(n_d in 1usize..64) {
        let (cfg, plan) = common::setup(|_| {});
        let m = LinkModel::new(&cfg, &plan, 64).unwrap();
        let pairs = (plan.n_subcarriers() * plan.users_per_group) as f64;
        for c in Combiner::ALL {
            let r = sum_rate_with(&m, c, &plan, n_d).unwrap();
            prop_assert!((r.system_sum_rate - pairs * r.per_ue_frame_rate).abs() <= 1e-9 * r.system_sum_rate);
            prop_assert_eq!(r.per_symbol_rate.len(), n_d);
            prop_assert_eq!(r.pilot_percentage, pilot_percentage(plan.pilot.pilot_length, n_d));
        }
    }

    #[test]
    fn random_power_sum_is_bounded(seed in any::<u64>()) {
        let (cfg, plan) = common::setup(|c| { c.n_subcarriers = 64; c.n_users = 256; c.frame_data_length = 8; });
        let random = sample_power_coefficients(&plan, PowerMode::Random, seed);
        for c in Combiner::ALL {
            let r = sum_rate(c, &cfg, &random).unwrap();
            prop_assert!(r.system_sum_rate.is_finite() && r.system_sum_rate > 0.0);
        }
    }

    #[test]
    fn optimum_dominates_the_grid(v in 5.0f64..100.0) {
        let (cfg, plan) = common::setup(|c| c.v_max = v);
        let grid: Vec<usize> = (1..=64).collect();
        let m = LinkModel::new(&cfg, &plan, 64).unwrap();
        for c in Combiner::ALL {
            let (best, r) = optimize_frame_length(c, &cfg, &plan, &grid).unwrap();
            prop_assert_eq!(best, r.frame_data_length);
            for &n_d in &grid {
                prop_assert!(sum_rate_with(&m, c, &plan, n_d).unwrap().system_sum_rate <= r.system_sum_rate);
            }
        }
    }
}
