mod common;

use mmofdm::channel::{draw_ue_states, evolve_channel};
use mmofdm::estimation::{ls_estimate, nmse, pilot_book, sigma_hhat_sq, NmseMode};
use mmofdm::system::SystemConfig;
use mmofdm::Complex64;
use proptest::prelude::*;

fn small(
    f: impl FnOnce(&mut SystemConfig),
) -> (mmofdm::system::ValidConfig, mmofdm::system::AllocationPlan) {
    common::setup(|c| {
        c.n_antennas = 32;
        c.frame_data_length = 1;
        f(c);
    })
}

#[test]
fn hhat_variance_and_error_independence() {
    let (cfg, plan) = small(|c| c.v_max = 100.0);
    let target = sigma_hhat_sq(&cfg, &plan);
    let (mut s, mut s2, mut x, mut x2, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 0..600u64 {
        let states = draw_ue_states(&cfg, cfg.users_per_subcarrier, t);
        let block = evolve_channel(t, &states, &cfg).unwrap();
        let est = ls_estimate(&block, &plan, &cfg, 7_000 + t).unwrap();
        assert_eq!(est.sigma_hhat_sq, target);
        for (e, h) in est.estimate.iter().zip(block.pilot.iter()) {
            let p = e.norm_sqr();
            s += p;
            s2 += p * p;
            let c = ((e - h) * h.conj()).re;
            x += c;
            x2 += c * c;
            count += 1.0;
        }
    }
    let (m, se) = (
        s / count,
        ((s2 / count - (s / count).powi(2)) / count).sqrt(),
    );
    assert!((m - target).abs() < 4.0 * se, "{m} vs {target} ({se})");
    let (m, se) = (
        x / count,
        ((x2 / count - (x / count).powi(2)) / count).sqrt(),
    );
    assert!(m.abs() < 4.0 * se, "error-channel correlation {m} ({se})");
}

#[test]
fn estimate_is_seed_deterministic() {
    let (cfg, plan) = small(|_| {});
    let states = draw_ue_states(&cfg, cfg.users_per_subcarrier, 1);
    let block = evolve_channel(2, &states, &cfg).unwrap();
    assert_eq!(
        ls_estimate(&block, &plan, &cfg, 3).unwrap(),
        ls_estimate(&block, &plan, &cfg, 3).unwrap()
    );
    assert_ne!(
        ls_estimate(&block, &plan, &cfg, 3).unwrap(),
        ls_estimate(&block, &plan, &cfg, 4).unwrap()
    );
}

#[test]
fn empirical_nmse_tracks_analytic() {
    let (cfg, plan) = small(|c| c.effective_tx_power = 1.0);
    let a = nmse(&cfg, &plan, NmseMode::Analytic).unwrap();
    let e = nmse(
        &cfg,
        &plan,
        NmseMode::Empirical {
            trials: 2000,
            seed: 11,
        },
    )
    .unwrap();
    assert!((e / a - 1.0).abs() < 0.03, "{e} vs {a}");
    assert!(nmse(&cfg, &plan, NmseMode::Empirical { trials: 0, seed: 0 }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nmse_falls_with_snr(db in -20.0f64..40.0, step in 0.1f64..20.0, v in 0.0f64..100.0) {
        let (lo, lo_plan) = small(|c| { c.v_max = v; c.effective_tx_power = 10f64.powf(db / 10.0); });
        let (hi, hi_plan) = small(|c| { c.v_max = v; c.effective_tx_power = 10f64.powf((db + step) / 10.0); });
        let a = nmse(&lo, &lo_plan, NmseMode::Analytic).unwrap();
        let b = nmse(&hi, &hi_plan, NmseMode::Analytic).unwrap();
        prop_assert!(b <= a);
        prop_assert!(b > 0.0);
    }

    #[test]
    fn pilot_rows_are_orthogonal(n in 1usize..40, a in 0usize..40, b in 0usize..40) {
        let (a, b) = (a % n, b % n);
        let phi = pilot_book(n).unwrap().matrix;
        let dot: Complex64 = (0..n).map(|j| phi[(a, j)] * phi[(b, j)].conj()).sum();
        let want = if a == b { n as f64 } else { 0.0 };
        prop_assert!((dot - Complex64::new(want, 0.0)).norm() < 1e-9);
    }
}
