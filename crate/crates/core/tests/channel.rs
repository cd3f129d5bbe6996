mod common;

use mmofdm::channel::{draw_ue_states, evolve_channel, jakes_rho, lambda_bar, lambda_bar_table};
use proptest::prelude::*;

#[test]
fn rho_reference_value() {
    let (cfg, _) = common::setup(|_| {});
    let a = 2.0 * std::f64::consts::PI * 25.0 * 3e9 / 2.998e8 * 1e-4;
    let series = 1.0 - a * a / 4.0 + a.powi(4) / 64.0;
    assert!((jakes_rho(25.0, 1, &cfg) - series).abs() < 1e-8);
    assert_eq!(jakes_rho(0.0, 30, &cfg), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn aging_moment_decays(v in 0.0f64..100.0) {
        let (cfg, _) = common::setup(|c| c.v_max = v);
        let t = lambda_bar_table(&cfg, cfg.lambda_horizon).unwrap();
        prop_assert_eq!(t[0], 1.0);
        for w in t.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
            prop_assert!((0.0..=1.0).contains(&w[1]));
        }
        let n = cfg.lambda_horizon;
        prop_assert!(lambda_bar(n + 1, &cfg).is_err());
        let rho_max = jakes_rho(v, 1, &cfg);
        prop_assert!(t[1] >= rho_max * rho_max - 1e-12);
    }

    #[test]
    fn states_respect_the_speed_cap(v in 0.0f64..100.0, seed in any::<u64>()) {
        let (cfg, _) = common::setup(|c| c.v_max = v);
        let s = draw_ue_states(&cfg, 16, seed);
        prop_assert_eq!(&s, &draw_ue_states(&cfg, 16, seed));
        for u in s {
            prop_assert!((0.0..=v).contains(&u.velocity));
            prop_assert!((0.0..2.0 * std::f64::consts::PI).contains(&u.angle));
        }
    }

    #[test]
    fn evolution_is_deterministic(seed in any::<u64>()) {
        let (cfg, _) = common::setup(|c| { c.n_antennas = 16; c.frame_data_length = 4; });
        let s = draw_ue_states(&cfg, cfg.users_per_subcarrier, seed);
        let a = evolve_channel(seed, &s, &cfg).unwrap();
        prop_assert_eq!(&a, &evolve_channel(seed, &s, &cfg).unwrap());
        prop_assert_eq!(a.symbols, vec![1, 2, 3, 4]);
    }
}

#[test]
fn innovation_is_uncorrelated_and_power_is_conserved() {
    let (cfg, _) = common::setup(|c| {
        c.n_antennas = 64;
        c.v_max = 100.0;
        c.frame_data_length = 30;
    });
    let trials = 400;
    let (mut cross, mut cross_sq, mut pow, mut pow_sq, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 0..trials {
        let s = draw_ue_states(&cfg, cfg.users_per_subcarrier, t);
        let b = evolve_channel(1000 + t, &s, &cfg).unwrap();
        let g = b.innovation_at(30).unwrap();
        let h = b.aged_at(30).unwrap();
        for (i, x) in g.iter().enumerate() {
            let c = (x * b.pilot[i].conj()).re;
            cross += c;
            cross_sq += c * c;
            let p = h[i].norm_sqr();
            pow += p;
            pow_sq += p * p;
            count += 1.0;
        }
    }
    let (m, se) = (
        cross / count,
        ((cross_sq / count - (cross / count).powi(2)) / count).sqrt(),
    );
    assert!(m.abs() < 4.0 * se, "innovation correlation {m} ({se})");
    let (p, pse) = (
        pow / count,
        ((pow_sq / count - (pow / count).powi(2)) / count).sqrt(),
    );
    assert!((p - 1.0).abs() < 4.0 * pse, "aged power {p} ({pse})");
}
