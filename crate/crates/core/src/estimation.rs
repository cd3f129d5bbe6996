//! Pilot transmission and least-squares channel estimation.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{gaussian_matrix, ChannelBlock};
use crate::error::{domain, Error, Result};
use crate::ici::sigma_u_sq;
use crate::system::{AllocationPlan, ValidConfig};
use crate::{CMatrix, Complex64};

/// Orthogonal pilot sequences, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook {
    pub matrix: CMatrix,
}

impl PilotBook {
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }
}

/// DFT pilot book: entry `(a, b)` is `exp(-2 pi i a b / N_P)`.
pub fn pilot_book(n_p: usize) -> Result<PilotBook> {
    if n_p == 0 {
        return domain("pilot length must be positive");
    }
    let matrix = CMatrix::from_fn(n_p, n_p, |a, b| {
        let phase = -2.0 * PI * ((a * b) % n_p) as f64 / n_p as f64;
        Complex64::from_polar(1.0, phase)
    });
    Ok(PilotBook { matrix })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateBlock {
    /// `N_B x N_U`
    pub estimate: CMatrix,
    /// `estimate - pilot channel`
    pub error: CMatrix,
    pub sigma_hhat_sq: f64,
}

impl EstimateBlock {
    /// Estimate scaled to unit per-entry variance.
    pub fn normalized(&self) -> CMatrix {
        &self.estimate / Complex64::from(self.sigma_hhat_sq.sqrt())
    }
}

/// Per-symbol, per-antenna variance of ICI plus noise during the pilot phase.
pub fn pilot_disturbance_variance(cfg: &ValidConfig) -> f64 {
    let n_u = cfg.users_per_subcarrier as f64;
    let n_c = cfg.subcarriers_per_user as f64;
    n_u * cfg.effective_tx_power * sigma_u_sq(cfg) / n_c + cfg.noise_variance
}

/// Per-entry variance of the LS estimate.
pub fn sigma_hhat_sq(cfg: &ValidConfig, plan: &AllocationPlan) -> f64 {
    hhat_variance(cfg, plan, sigma_u_sq(cfg))
}

pub(crate) fn hhat_variance(cfg: &ValidConfig, plan: &AllocationPlan, sigma_u: f64) -> f64 {
    cfg.channel_variance + estimation_error_variance(cfg, plan, sigma_u)
}

// per-entry variance of the LS error
fn estimation_error_variance(cfg: &ValidConfig, plan: &AllocationPlan, sigma_u: f64) -> f64 {
    let n_v = plan.pilot.pilots_per_ue as f64;
    let n_p = plan.pilot.pilot_length as f64;
    let n_u = plan.users_per_group as f64;
    let n_c = plan.subcarriers_per_group as f64;
    n_v * n_u / (n_p * n_c) * sigma_u + n_v / (n_p * cfg.effective_tx_power) * cfg.noise_variance
}

pub fn ls_estimate(
    block: &ChannelBlock,
    plan: &AllocationPlan,
    cfg: &ValidConfig,
    seed: u64,
) -> Result<EstimateBlock> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ls_estimate_with(&mut rng, &block.pilot, plan, cfg)
}

/// Simulates the pilot phase over the first pilot block of a group and forms
/// the LS estimate of `pilot` (`N_B x N_U`).
///
/// Each roster transmits for `N_P` symbols, row `p` of the pilot book going
/// to the `p`-th UE of the roster at power `P_T / N_V`. Every UE of the
/// group sees the same channel inside the block, so the estimate from its own
/// pilot subcarrier stands for the whole group.
pub fn ls_estimate_with<R: Rng + ?Sized>(
    rng: &mut R,
    pilot: &CMatrix,
    plan: &AllocationPlan,
    cfg: &ValidConfig,
) -> Result<EstimateBlock> {
    let n_u = plan.users_per_group;
    let n_b = pilot.nrows();
    if pilot.ncols() != n_u {
        return Err(Error::Plan(format!(
            "channel has {} columns for {n_u} UE slots",
            pilot.ncols()
        )));
    }
    let n_p = plan.pilot.pilot_length;
    let n_v = plan.pilot.pilots_per_ue as f64;
    let book = pilot_book(n_p)?;
    let block = plan
        .pilot
        .blocks
        .first()
        .ok_or_else(|| Error::Plan("pilot plan has no blocks".into()))?;
    let amp = (cfg.effective_tx_power / n_v).sqrt();
    let disturbance = pilot_disturbance_variance(cfg);
    let gain = (1.0 / n_p as f64) * (n_v / cfg.effective_tx_power).sqrt();
    let mut estimate = CMatrix::zeros(n_b, n_u);
    let mut covered = vec![false; n_u];
    for c in block.clone() {
        let roster = &plan.pilot.rosters[c];
        if roster.is_empty() {
            continue;
        }
        if roster.len() > n_p {
            return Err(Error::Plan(format!(
                "roster of {} UEs exceeds pilot length {n_p}",
                roster.len()
            )));
        }
        let mut y = gaussian_matrix(rng, n_b, n_p, disturbance);
        for (p, &k) in roster.iter().enumerate() {
            for t in 0..n_p {
                let s = book.matrix[(p, t)] * amp;
                for m in 0..n_b {
                    y[(m, t)] += pilot[(m, k)] * s;
                }
            }
        }
        for (p, &k) in roster.iter().enumerate() {
            if covered[k] {
                return Err(Error::Plan(format!(
                    "UE slot {k} pilots twice in one block"
                )));
            }
            covered[k] = true;
            for m in 0..n_b {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..n_p {
                    acc += y[(m, t)] * book.matrix[(p, t)].conj();
                }
                estimate[(m, k)] = acc * gain;
            }
        }
    }
    if let Some(k) = covered.iter().position(|c| !c) {
        return Err(Error::Plan(format!(
            "UE slot {k} has no pilot in the first block"
        )));
    }
    let error = &estimate - pilot;
    Ok(EstimateBlock {
        estimate,
        error,
        sigma_hhat_sq: sigma_hhat_sq(cfg, plan),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmseMode {
    Analytic,
    Empirical { trials: usize, seed: u64 },
}

pub fn nmse(cfg: &ValidConfig, plan: &AllocationPlan, mode: NmseMode) -> Result<f64> {
    match mode {
        NmseMode::Analytic => {
            Ok(estimation_error_variance(cfg, plan, sigma_u_sq(cfg)) / cfg.channel_variance)
        }
        NmseMode::Empirical { trials, seed } => {
            if trials == 0 {
                return domain("empirical NMSE needs at least one trial");
            }
            let mut total = 0.0;
            for trial in 0..trials {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial as u64);
                let h = gaussian_matrix(
                    &mut rng,
                    cfg.n_antennas,
                    plan.users_per_group,
                    cfg.channel_variance,
                );
                let est = ls_estimate_with(&mut rng, &h, plan, cfg)?;
                total += est.error.norm_squared() / h.norm_squared();
            }
            Ok(total / trials as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_ue_states, evolve_channel};
    use crate::system::{build_allocation, validate_config, SystemConfig};

    fn cfg(f: impl FnOnce(&mut SystemConfig)) -> ValidConfig {
        let mut c = SystemConfig::paper_defaults();
        c.n_antennas = 32;
        c.users_per_subcarrier = 4;
        c.subcarriers_per_user = 1;
        f(&mut c);
        validate_config(c).unwrap()
    }

    #[test]
    fn dft_book_gram_identity() {
        assert_eq!(
            pilot_book(1).unwrap().matrix[(0, 0)],
            Complex64::new(1.0, 0.0)
        );
        let two = pilot_book(2).unwrap().matrix;
        assert!((two[(1, 1)] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        for n in [2, 5, 8] {
            let phi = pilot_book(n).unwrap().matrix;
            let gram = &phi * phi.adjoint();
            let target = CMatrix::identity(n, n) * Complex64::from(n as f64);
            assert!((gram - target).norm() < 1e-10);
        }
        assert!(pilot_book(0).is_err());
    }

    #[test]
    fn sigma_hhat_reference_point() {
        let c = cfg(|_| {});
        let plan = build_allocation(&c);
        let s = sigma_hhat_sq(&c, &plan);
        let su = sigma_u_sq(&c);
        assert!((s - (1.0 + su + 0.025)).abs() < 1e-15);
        assert!((s - 1.02534).abs() < 1e-5);
    }

    #[test]
    fn doubling_pilot_length_halves_corrections() {
        let c = cfg(|_| {});
        let mut plan = build_allocation(&c);
        let base = sigma_hhat_sq(&c, &plan) - 1.0;
        plan.pilot.pilot_length *= 2;
        let half = sigma_hhat_sq(&c, &plan) - 1.0;
        assert!((2.0 * half - base).abs() < 1e-15);
    }

    #[test]
    fn noiseless_pilots_recover_channel() {
        let c = cfg(|c| {
            c.v_max = 0.0;
            c.noise_variance = 1e-300;
        });
        let plan = build_allocation(&c);
        let states = draw_ue_states(&c, 4, 1);
        let block = evolve_channel(2, &states, &c).unwrap();
        let est = ls_estimate(&block, &plan, &c, 3).unwrap();
        assert!(est.error.norm() < 1e-12 * block.pilot.norm());
        assert_eq!(est, ls_estimate(&block, &plan, &c, 3).unwrap());
        assert_eq!(&est.estimate - &block.pilot, est.error);
    }

    #[test]
    fn error_variance_matches_prediction() {
        let c = cfg(|c| c.v_max = 25.0);
        let plan = build_allocation(&c);
        let trials = 10_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..trials {
            let h = gaussian_matrix(&mut rng, 32, 4, 1.0);
            let est = ls_estimate_with(&mut rng, &h, &plan, &c).unwrap();
            let e = est.error[(0, 0)].norm_sqr();
            sum += e;
            sum_sq += e * e;
        }
        let mean = sum / trials as f64;
        let se = ((sum_sq / trials as f64 - mean * mean) / trials as f64).sqrt();
        let want = sigma_hhat_sq(&c, &plan) - 1.0;
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
    }

    #[test]
    fn ls_error_is_independent_of_the_channel_not_the_estimate() {
        // the error is correlated with the estimate: E[g conj(hhat)] = var(g)
        let c = cfg(|c| c.v_max = 25.0);
        let plan = build_allocation(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 20_000;
        let mut with_h = Complex64::new(0.0, 0.0);
        let mut with_hhat = Complex64::new(0.0, 0.0);
        for _ in 0..trials {
            let h = gaussian_matrix(&mut rng, 32, 4, 1.0);
            let est = ls_estimate_with(&mut rng, &h, &plan, &c).unwrap();
            with_h += est.error[(3, 1)] * h[(3, 1)].conj();
            with_hhat += est.error[(3, 1)] * est.estimate[(3, 1)].conj();
        }
        let var_e = sigma_hhat_sq(&c, &plan) - 1.0;
        let n = trials as f64;
        assert!((with_h / n).norm() < 3.0 * (var_e / n).sqrt());
        assert!(((with_hhat / n).re - var_e).abs() < 3.0 * (var_e * 1.03 / n).sqrt());
    }

    #[test]
    fn nmse_modes() {
        let c = cfg(|c| {
            c.v_max = 0.0;
            c.effective_tx_power = 1e4;
        });
        let plan = build_allocation(&c);
        let a = nmse(&c, &plan, NmseMode::Analytic).unwrap();
        assert!((a - 1.0 / (4.0 * 1e4)).abs() < 1e-18);
        assert!(nmse(&c, &plan, NmseMode::Empirical { trials: 0, seed: 1 }).is_err());
        let e = nmse(
            &c,
            &plan,
            NmseMode::Empirical {
                trials: 2000,
                seed: 1,
            },
        )
        .unwrap();
        assert!((e - a).abs() / a < 0.05);
    }

    #[test]
    fn contaminated_roster_is_rejected() {
        let c = cfg(|c| {
            c.users_per_subcarrier = 128;
            c.subcarriers_per_user = 32;
            c.n_antennas = 256;
        });
        let plan = build_allocation(&c);
        let h = CMatrix::zeros(256, 128);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            ls_estimate_with(&mut rng, &h, &plan, &c),
            Err(Error::Plan(_))
        ));
    }
}
