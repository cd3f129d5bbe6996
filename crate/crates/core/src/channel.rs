//! UE mobility and channel aging.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::numerics::{integrate, j0, QuadratureSpec};
use crate::system::ValidConfig;
use crate::{CMatrix, Complex64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UePhysicalState {
    /// m/s
    pub velocity: f64,
    /// radians in `[0, 2 pi)`
    pub angle: f64,
    /// Hz
    pub max_doppler: f64,
}

pub fn draw_ue_states(cfg: &ValidConfig, count: usize, seed: u64) -> Vec<UePhysicalState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_ue_states_with(cfg, count, &mut rng)
}

pub fn draw_ue_states_with<R: Rng + ?Sized>(
    cfg: &ValidConfig,
    count: usize,
    rng: &mut R,
) -> Vec<UePhysicalState> {
    (0..count)
        .map(|_| {
            let velocity = cfg.v_max * rng.random::<f64>();
            let angle = 2.0 * PI * rng.random::<f64>();
            UePhysicalState {
                velocity,
                angle,
                max_doppler: velocity * cfg.carrier_frequency / cfg.speed_of_light,
            }
        })
        .collect()
}

/// Correlation between a UE's channel now and `n` symbols later.
pub fn jakes_rho(v: f64, n: usize, cfg: &ValidConfig) -> f64 {
    let fd = v * cfg.carrier_frequency / cfg.speed_of_light;
    j0(2.0 * PI * fd * n as f64 * cfg.symbol_duration)
}

/// Squared correlation `J0^2` averaged over speeds uniform on `[0, V_max]`.
pub fn lambda_bar(n: usize, cfg: &ValidConfig) -> Result<f64> {
    if n > cfg.lambda_horizon {
        return domain(format!(
            "symbol index {n} is beyond the aging horizon {}",
            cfg.lambda_horizon
        ));
    }
    if n == 0 || cfg.v_max == 0.0 {
        return Ok(1.0);
    }
    let a = 2.0 * PI * cfg.v_max * cfg.carrier_frequency * n as f64 * cfg.symbol_duration
        / cfg.speed_of_light;
    integrate(|s| j0(a * s).powi(2), 0.0, 1.0, &QuadratureSpec::default())
}

/// `lambda_bar(n)` for `n = 0..=n_max`.
pub fn lambda_bar_table(cfg: &ValidConfig, n_max: usize) -> Result<Vec<f64>> {
    (0..=n_max).map(|n| lambda_bar(n, cfg)).collect()
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance).sqrt() * FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    // column-major fill, matching nalgebra storage
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, variance))
}

/// Pilot-epoch channel of one subcarrier and its aged copies.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBlock {
    /// `N_B x N_U`
    pub pilot: CMatrix,
    pub states: Vec<UePhysicalState>,
    /// Data symbol indices held by the block, ascending.
    pub symbols: Vec<usize>,
    /// `rho[t][k]` for symbol `symbols[t]` and UE slot `k`.
    pub rho: Vec<Vec<f64>>,
    pub aged: Vec<CMatrix>,
    pub innovation: Vec<CMatrix>,
}

impl ChannelBlock {
    fn position(&self, n: usize) -> Option<usize> {
        self.symbols.binary_search(&n).ok()
    }

    pub fn aged_at(&self, n: usize) -> Option<&CMatrix> {
        self.position(n).map(|t| &self.aged[t])
    }

    pub fn innovation_at(&self, n: usize) -> Option<&CMatrix> {
        self.position(n).map(|t| &self.innovation[t])
    }

    pub fn rho_at(&self, n: usize) -> Option<&[f64]> {
        self.position(n).map(|t| self.rho[t].as_slice())
    }
}

/// Draws a pilot channel and ages it over data symbols `1..=N_D`.
pub fn evolve_channel(
    seed: u64,
    states: &[UePhysicalState],
    cfg: &ValidConfig,
) -> Result<ChannelBlock> {
    let symbols: Vec<usize> = (1..=cfg.frame_data_length).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    evolve_channel_with(&mut rng, states, cfg, &symbols)
}

/// Like [`evolve_channel`] for an explicit ascending set of symbol indices.
pub fn evolve_channel_with<R: Rng + ?Sized>(
    rng: &mut R,
    states: &[UePhysicalState],
    cfg: &ValidConfig,
    symbols: &[usize],
) -> Result<ChannelBlock> {
    if states.len() != cfg.users_per_subcarrier {
        return domain(format!(
            "{} UE states for {} slots",
            states.len(),
            cfg.users_per_subcarrier
        ));
    }
    if symbols.windows(2).any(|w| w[0] >= w[1]) {
        return domain("symbol indices must be strictly ascending");
    }
    let n_b = cfg.n_antennas;
    let n_u = cfg.users_per_subcarrier;
    let var = cfg.channel_variance;
    let pilot = gaussian_matrix(rng, n_b, n_u, var);
    let mut rho = Vec::with_capacity(symbols.len());
    let mut aged = Vec::with_capacity(symbols.len());
    let mut innovation = Vec::with_capacity(symbols.len());
    for &n in symbols {
        let r: Vec<f64> = states
            .iter()
            .map(|s| jakes_rho(s.velocity, n, cfg))
            .collect();
        let mut g = CMatrix::zeros(n_b, n_u);
        for k in 0..n_u {
            let v = var * (1.0 - r[k] * r[k]).max(0.0);
            for m in 0..n_b {
                g[(m, k)] = complex_gaussian(rng, v);
            }
        }
        let mut h = g.clone();
        for k in 0..n_u {
            for m in 0..n_b {
                h[(m, k)] += pilot[(m, k)] * r[k];
            }
        }
        rho.push(r);
        aged.push(h);
        innovation.push(g);
    }
    Ok(ChannelBlock {
        pilot,
        states: states.to_vec(),
        symbols: symbols.to_vec(),
        rho,
        aged,
        innovation,
    })
}
