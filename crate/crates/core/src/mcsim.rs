//! Monte Carlo simulation of the uplink with estimated channels.
//!
//! One trial draws UE speeds, a pilot-epoch channel with its aged copies,
//! runs the pilot phase and forms the LS estimate, then synthesizes every
//! requested data symbol and combines it with each requested receiver. The
//! desired term is the part of the combiner output a receiver can attribute
//! to the UE's own symbol:
//!
//! * ZF: `sqrt(P_T) rho_k sqrt(eta_k) x_k`, what remains after nulling the
//!   known channel;
//! * MRC: `sqrt(P_T) rho_k sqrt(eta_k) N_B s_hh x_k`, the mean beamforming
//!   gain times the symbol.
//!
//! Everything else in the output counts as interference plus noise. The SINR
//! of a symbol index is the ratio of the trial-mean powers.
//!
//! Each trial owns a ChaCha8 stream selected by its index, so results do not
//! depend on how trials are spread over threads.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{complex_gaussian, draw_ue_states_with, evolve_channel_with, ChannelBlock};
use crate::error::{domain, Error, Result};
use crate::estimation::{ls_estimate_with, EstimateBlock};
use crate::ici::{sigma_u_sq, LeakageTable};
use crate::rate::{per_symbol_rate, Combiner, LinkModel};
use crate::system::{build_allocation, validate_config, AllocationPlan, SystemConfig, ValidConfig};
use crate::{CMatrix, CVector, Complex64};

/// Largest band for which ICI may be synthesized from individual subcarriers.
pub const EXPLICIT_LEAKAGE_MAX_SUBCARRIERS: usize = 64;

#[derive(Debug, Clone)]
pub enum IciSource {
    /// Circularly symmetric Gaussian with the given per-antenna variance.
    Gaussian { variance: f64 },
    /// Sum of the leaked signals of every other subcarrier; `weights[j]` is
    /// the leakage from subcarrier `j` into the simulated one.
    Explicit {
        weights: Vec<f64>,
        eta: Vec<Vec<f64>>,
    },
}

impl IciSource {
    pub fn gaussian(cfg: &ValidConfig) -> Self {
        let variance = cfg.users_per_subcarrier as f64 * cfg.effective_tx_power * sigma_u_sq(cfg)
            / cfg.subcarriers_per_user as f64;
        IciSource::Gaussian { variance }
    }

    /// Explicit leakage into subcarrier `target` from the rest of the band.
    pub fn explicit(
        cfg: &ValidConfig,
        plan: &AllocationPlan,
        table: &LeakageTable,
        target: usize,
    ) -> Result<Self> {
        let n = plan.n_subcarriers();
        if n > EXPLICIT_LEAKAGE_MAX_SUBCARRIERS {
            return domain(format!(
                "explicit leakage supports at most {EXPLICIT_LEAKAGE_MAX_SUBCARRIERS} subcarriers, got {n}"
            ));
        }
        if !table.matches(cfg) {
            return domain("leakage table was built for a different configuration");
        }
        let mut weights = vec![0.0; n];
        for (j, w) in weights.iter_mut().enumerate() {
            if j != target {
                *w = table.pair(target, j)?;
            }
        }
        let eta = (0..n)
            .map(|j| (0..plan.users_per_group).map(|k| plan.eta(j, k)).collect())
            .collect();
        Ok(IciSource::Explicit { weights, eta })
    }

    fn draw<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n_b: usize,
        tx_power: f64,
        channel_variance: f64,
    ) -> CVector {
        match self {
            IciSource::Gaussian { variance } => {
                CVector::from_fn(n_b, |_, _| complex_gaussian(rng, *variance))
            }
            IciSource::Explicit { weights, eta } => {
                let mut u = CVector::zeros(n_b);
                for (j, &w) in weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for &e in &eta[j] {
                        let x = unit_symbol(rng) * (tx_power * w * e).sqrt();
                        for m in 0..n_b {
                            u[m] += complex_gaussian(rng, channel_variance) * x;
                        }
                    }
                }
                u
            }
        }
    }
}

fn unit_symbol<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>())
}

/// One received data vector with its additive components.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSymbol {
    pub n: usize,
    /// Transmitted unit-modulus symbols, one per UE slot.
    pub symbols: CVector,
    /// Desired signal through the known part of the channel, `sqrt(P_T) Hhat Lambda D x`.
    pub known: CVector,
    /// `-sqrt(P_T) G_P Lambda D x`
    pub estimation_error: CVector,
    /// `sqrt(P_T) G_D D x`
    pub aging: CVector,
    pub ici: CVector,
    pub noise: CVector,
    /// Sum of the five components above, in declaration order.
    pub r: CVector,
}

impl ReceivedSymbol {
    /// Signal through the true aged channel, `sqrt(P_T) H_D D x`.
    pub fn desired(&self) -> CVector {
        &self.known + &self.estimation_error + &self.aging
    }
}

/// Draws the data symbols, ICI and noise for symbol `n` of `block`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_symbol<R: Rng + ?Sized>(
    rng: &mut R,
    block: &ChannelBlock,
    est: &EstimateBlock,
    n: usize,
    eta: &[f64],
    cfg: &ValidConfig,
    ici: &IciSource,
) -> Result<ReceivedSymbol> {
    let rho = block
        .rho_at(n)
        .ok_or_else(|| Error::Domain(format!("symbol {n} is not in the channel block")))?;
    let innovation = block
        .innovation_at(n)
        .expect("rho and innovation share indices");
    let n_u = eta.len();
    if n_u != block.pilot.ncols() {
        return domain("one power coefficient per UE slot is required");
    }
    let sqrt_p = cfg.effective_tx_power.sqrt();
    let symbols = CVector::from_fn(n_u, |_, _| unit_symbol(rng));
    let scaled = CVector::from_fn(n_u, |k, _| symbols[k] * eta[k].sqrt() * sqrt_p);
    let aged_scaled = CVector::from_fn(n_u, |k, _| scaled[k] * rho[k]);
    let known = &est.estimate * &aged_scaled;
    let estimation_error = -(&est.error * &aged_scaled);
    let aging = innovation * &scaled;
    let n_b = block.pilot.nrows();
    let ici = ici.draw(rng, n_b, cfg.effective_tx_power, cfg.channel_variance);
    let noise = CVector::from_fn(n_b, |_, _| complex_gaussian(rng, cfg.noise_variance));
    let r = &known + &estimation_error + &aging + &ici + &noise;
    Ok(ReceivedSymbol {
        n,
        symbols,
        known,
        estimation_error,
        aging,
        ici,
        noise,
        r,
    })
}

/// Linear combiner built from a channel estimate, `N_U x N_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombiningMatrix {
    pub combiner: Combiner,
    pub matrix: CMatrix,
}

impl CombiningMatrix {
    /// ZF uses the pseudoinverse `(Hhat^H Hhat)^-1 Hhat^H`, MRC the conjugate transpose.
    pub fn new(est: &CMatrix, combiner: Combiner) -> Result<Self> {
        let adj = est.adjoint();
        let matrix = match combiner {
            Combiner::Mrc => adj,
            Combiner::Zf => {
                let gram = &adj * est;
                let scale = (0..gram.nrows())
                    .map(|i| gram[(i, i)].re)
                    .fold(0.0, f64::max);
                let chol = Cholesky::new(gram).ok_or(Error::Singular)?;
                let l = chol.l_dirty();
                let floor = scale * f64::EPSILON * est.nrows() as f64;
                if scale == 0.0 || (0..l.nrows()).any(|i| l[(i, i)].re.powi(2) <= floor) {
                    return Err(Error::Singular);
                }
                chol.solve(&adj)
            }
        };
        Ok(CombiningMatrix { combiner, matrix })
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }
}

/// Combiner output split along the components of the received vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSymbol {
    pub y: CVector,
    pub known: CVector,
    pub estimation_error: CVector,
    pub aging: CVector,
    pub ici: CVector,
    pub noise: CVector,
}

impl CombinedSymbol {
    pub fn component_sum(&self) -> CVector {
        &self.known + &self.estimation_error + &self.aging + &self.ici + &self.noise
    }
}

pub fn combine(
    sym: &ReceivedSymbol,
    est: &EstimateBlock,
    combiner: Combiner,
) -> Result<CombinedSymbol> {
    let w = CombiningMatrix::new(&est.estimate, combiner)?;
    Ok(combine_with(sym, &w))
}

pub fn combine_with(sym: &ReceivedSymbol, w: &CombiningMatrix) -> CombinedSymbol {
    CombinedSymbol {
        y: w.apply(&sym.r),
        known: w.apply(&sym.known),
        estimation_error: w.apply(&sym.estimation_error),
        aging: w.apply(&sym.aging),
        ici: w.apply(&sym.ici),
        noise: w.apply(&sym.noise),
    }
}

/// Desired-signal term of UE slot `k` as credited by `combiner`.
pub fn desired_term(
    combiner: Combiner,
    sym: &ReceivedSymbol,
    rho: &[f64],
    eta: &[f64],
    k: usize,
    cfg: &ValidConfig,
    sigma_hhat_sq: f64,
) -> Complex64 {
    let base = sym.symbols[k] * (cfg.effective_tx_power * eta[k]).sqrt() * rho[k];
    match combiner {
        Combiner::Zf => base,
        Combiner::Mrc => base * (cfg.n_antennas as f64 * sigma_hhat_sq),
    }
}

#[derive(Debug, Clone)]
pub struct McSettings {
    pub trials: usize,
    /// Reported SINR when the measured interference is zero or the ratio exceeds it.
    pub sinr_ceiling: f64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    pub explicit_ici: bool,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            trials: 20_000,
            sinr_ceiling: 1e12,
            threads: None,
            explicit_ici: false,
        }
    }
}

/// What to measure in one batch of shared trials.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    /// Ascending data symbol indices.
    pub symbols: Vec<usize>,
    pub combiners: Vec<Combiner>,
    pub master_seed: u64,
    /// Added to the trial index to select a trial's stream.
    pub stream_offset: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStats {
    pub combiner: Combiner,
    pub n: usize,
    /// Trial-mean desired power, pooled over UE slots.
    pub signal_power: f64,
    pub interference_power: f64,
    pub sinr: f64,
    pub capped: bool,
    pub rate: f64,
    pub rate_stderr: f64,
    pub slot_signal_power: Vec<f64>,
    pub slot_interference_power: Vec<f64>,
}

// pooled per-trial powers for one combiner, index [t]
#[derive(Debug, Clone, PartialEq)]
struct TrialPowers {
    signal: Vec<f64>,
    interference: Vec<f64>,
    slot_signal: Vec<f64>,
    slot_interference: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub symbols: Vec<usize>,
    pub combiners: Vec<Combiner>,
    pub trials: usize,
    /// Trials dropped per combiner (singular estimate under ZF).
    pub failed_trials: Vec<usize>,
    /// `stats[c * symbols.len() + t]`
    pub stats: Vec<SymbolStats>,
    subcarrier_spacing: f64,
    sinr_ceiling: f64,
    // per combiner, per completed trial
    records: Vec<Vec<TrialPowers>>,
}

impl TrialResult {
    fn combiner_index(&self, combiner: Combiner) -> Result<usize> {
        self.combiners
            .iter()
            .position(|&c| c == combiner)
            .ok_or_else(|| Error::Domain(format!("combiner {combiner} was not measured")))
    }

    pub fn stat(&self, combiner: Combiner, n: usize) -> Result<&SymbolStats> {
        let c = self.combiner_index(combiner)?;
        let t = self
            .symbols
            .iter()
            .position(|&s| s == n)
            .ok_or_else(|| Error::Domain(format!("symbol {n} was not measured")))?;
        Ok(&self.stats[c * self.symbols.len() + t])
    }

    pub fn failed(&self, combiner: Combiner) -> Result<usize> {
        Ok(self.failed_trials[self.combiner_index(combiner)?])
    }

    /// Frame-averaged empirical rate over symbols `1..=n_d` and a pilot
    /// overhead of `pilot_length` symbols, with its delta-method standard error.
    pub fn frame_rate(
        &self,
        combiner: Combiner,
        n_d: usize,
        pilot_length: usize,
    ) -> Result<(f64, f64)> {
        let c = self.combiner_index(combiner)?;
        let positions: Vec<usize> = (1..=n_d)
            .map(|n| {
                self.symbols
                    .iter()
                    .position(|&s| s == n)
                    .ok_or_else(|| Error::Domain(format!("symbol {n} was not measured")))
            })
            .collect::<Result<_>>()?;
        let frame = (pilot_length + n_d) as f64;
        let stats = &self.stats[c * self.symbols.len()..(c + 1) * self.symbols.len()];
        let rate: f64 = positions.iter().map(|&t| stats[t].rate).sum::<f64>() / frame;
        let grads: Vec<(f64, f64)> = positions
            .iter()
            .map(|&t| rate_gradient(&stats[t], self.subcarrier_spacing, frame))
            .collect();
        let records = &self.records[c];
        let q: Vec<f64> = records
            .iter()
            .map(|r| {
                positions
                    .iter()
                    .zip(&grads)
                    .map(|(&t, &(gs, gi))| gs * r.signal[t] + gi * r.interference[t])
                    .sum()
            })
            .collect();
        Ok((rate, mean_stderr(&q)))
    }

    pub fn sinr_ceiling(&self) -> f64 {
        self.sinr_ceiling
    }
}

// d rate / d (S, I) for rate = scale * df * log2(1 + S / I)
fn rate_gradient(s: &SymbolStats, df: f64, frame: f64) -> (f64, f64) {
    if s.capped || s.interference_power == 0.0 {
        return (0.0, 0.0);
    }
    let ratio = s.signal_power / s.interference_power;
    let common = df / (std::f64::consts::LN_2 * (1.0 + ratio) * frame);
    (
        common / s.interference_power,
        -common * ratio / s.interference_power,
    )
}

fn mean_stderr(q: &[f64]) -> f64 {
    let n = q.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = q.iter().sum::<f64>() / n as f64;
    let var = q.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Subcarrier whose UE slots the simulator follows.
pub fn representative_subcarrier(plan: &AllocationPlan) -> usize {
    plan.n_subcarriers() / 2
}

/// Generator of one trial: stream `stream` of the ChaCha8 key derived from `master_seed`.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

struct TrialContext<'a> {
    cfg: &'a ValidConfig,
    plan: &'a AllocationPlan,
    spec: &'a MeasureSpec,
    eta: Vec<f64>,
    ici: IciSource,
}

impl TrialContext<'_> {
    fn run(&self, trial: u64) -> Result<Vec<Option<TrialPowers>>> {
        let cfg = self.cfg;
        let mut rng = trial_rng(
            self.spec.master_seed,
            self.spec.stream_offset.wrapping_add(trial),
        );
        let n_u = cfg.users_per_subcarrier;
        let states = draw_ue_states_with(cfg, n_u, &mut rng);
        let block = evolve_channel_with(&mut rng, &states, cfg, &self.spec.symbols)?;
        let est = ls_estimate_with(&mut rng, &block.pilot, self.plan, cfg)?;
        let matrices: Vec<Option<CombiningMatrix>> = self
            .spec
            .combiners
            .iter()
            .map(|&c| match CombiningMatrix::new(&est.estimate, c) {
                Ok(w) => Ok(Some(w)),
                Err(Error::Singular) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let n_sym = self.spec.symbols.len();
        let mut out: Vec<Option<TrialPowers>> = matrices
            .iter()
            .map(|w| {
                w.as_ref().map(|_| TrialPowers {
                    signal: vec![0.0; n_sym],
                    interference: vec![0.0; n_sym],
                    slot_signal: vec![0.0; n_sym * n_u],
                    slot_interference: vec![0.0; n_sym * n_u],
                })
            })
            .collect();
        for (t, &n) in self.spec.symbols.iter().enumerate() {
            let sym = synthesize_symbol(&mut rng, &block, &est, n, &self.eta, cfg, &self.ici)?;
            let rho = &block.rho[t];
            for (ci, w) in matrices.iter().enumerate() {
                let (Some(w), Some(rec)) = (w, out[ci].as_mut()) else {
                    continue;
                };
                let y = w.apply(&sym.r);
                let mut s_sum = 0.0;
                let mut i_sum = 0.0;
                for k in 0..n_u {
                    let d =
                        desired_term(w.combiner, &sym, rho, &self.eta, k, cfg, est.sigma_hhat_sq);
                    let s = d.norm_sqr();
                    let i = (y[k] - d).norm_sqr();
                    rec.slot_signal[t * n_u + k] = s;
                    rec.slot_interference[t * n_u + k] = i;
                    s_sum += s;
                    i_sum += i;
                }
                rec.signal[t] = s_sum / n_u as f64;
                rec.interference[t] = i_sum / n_u as f64;
            }
        }
        Ok(out)
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Domain(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs `settings.trials` shared trials and reports per-symbol SINR and rate
/// statistics for every combiner in `spec`.
pub fn measure_sinr(
    cfg: &ValidConfig,
    plan: &AllocationPlan,
    spec: &MeasureSpec,
    settings: &McSettings,
) -> Result<TrialResult> {
    if settings.trials == 0 {
        return domain("at least one trial is required");
    }
    if spec.symbols.is_empty() || spec.combiners.is_empty() {
        return domain("nothing to measure");
    }
    if spec.symbols[0] == 0 {
        return domain("data symbol indices start at 1");
    }
    let target = representative_subcarrier(plan);
    let ici = if settings.explicit_ici {
        let table = LeakageTable::new(cfg);
        IciSource::explicit(cfg, plan, &table, target)?
    } else {
        IciSource::gaussian(cfg)
    };
    let ctx = TrialContext {
        cfg,
        plan,
        spec,
        eta: (0..plan.users_per_group)
            .map(|k| plan.eta(target, k))
            .collect(),
        ici,
    };
    let per_trial: Vec<Result<Vec<Option<TrialPowers>>>> = with_threads(settings.threads, || {
        (0..settings.trials as u64)
            .into_par_iter()
            .map(|t| ctx.run(t))
            .collect()
    })?;
    let n_c = spec.combiners.len();
    let mut records: Vec<Vec<TrialPowers>> = vec![Vec::new(); n_c];
    let mut failed = vec![0usize; n_c];
    for r in per_trial {
        for (ci, p) in r?.into_iter().enumerate() {
            match p {
                Some(p) => records[ci].push(p),
                None => failed[ci] += 1,
            }
        }
    }
    let n_sym = spec.symbols.len();
    let n_u = plan.users_per_group;
    let mut stats = Vec::with_capacity(n_c * n_sym);
    for (ci, &combiner) in spec.combiners.iter().enumerate() {
        let recs = &records[ci];
        if recs.is_empty() {
            return Err(Error::Singular);
        }
        let count = recs.len() as f64;
        for (t, &n) in spec.symbols.iter().enumerate() {
            let signal = recs.iter().map(|r| r.signal[t]).sum::<f64>() / count;
            let interference = recs.iter().map(|r| r.interference[t]).sum::<f64>() / count;
            let slot_signal_power: Vec<f64> = (0..n_u)
                .map(|k| recs.iter().map(|r| r.slot_signal[t * n_u + k]).sum::<f64>() / count)
                .collect();
            let slot_interference_power: Vec<f64> = (0..n_u)
                .map(|k| {
                    recs.iter()
                        .map(|r| r.slot_interference[t * n_u + k])
                        .sum::<f64>()
                        / count
                })
                .collect();
            let raw = if interference > 0.0 {
                signal / interference
            } else {
                f64::INFINITY
            };
            let capped = raw.is_nan() || raw > settings.sinr_ceiling;
            let sinr = if capped { settings.sinr_ceiling } else { raw };
            let mut st = SymbolStats {
                combiner,
                n,
                signal_power: signal,
                interference_power: interference,
                sinr,
                capped,
                rate: per_symbol_rate(sinr, cfg.subcarrier_spacing),
                rate_stderr: 0.0,
                slot_signal_power,
                slot_interference_power,
            };
            let (gs, gi) = rate_gradient(&st, cfg.subcarrier_spacing, 1.0);
            let q: Vec<f64> = recs
                .iter()
                .map(|r| gs * r.signal[t] + gi * r.interference[t])
                .collect();
            st.rate_stderr = if capped { 0.0 } else { mean_stderr(&q) };
            stats.push(st);
        }
    }
    Ok(TrialResult {
        symbols: spec.symbols.clone(),
        combiners: spec.combiners.clone(),
        trials: settings.trials,
        failed_trials: failed,
        stats,
        subcarrier_spacing: cfg.subcarrier_spacing,
        sinr_ceiling: settings.sinr_ceiling,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Data symbol index; one row per index from a single batch of trials.
    SymbolIndex,
    /// Maximum UE speed in m/s.
    VMax,
    /// Users per subcarrier; subcarriers per user follow the grouping.
    UsersPerSubcarrier,
    /// Frame length; one batch of trials covers every prefix.
    FrameLength,
    /// Receive SNR in dB, applied through the transmit power.
    SnrDb,
}

impl SweepAxis {
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::SymbolIndex => "n",
            SweepAxis::VMax => "v_max_mps",
            SweepAxis::UsersPerSubcarrier => "n_u",
            SweepAxis::FrameLength => "n_d",
            SweepAxis::SnrDb => "snr_db",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepAxis::SymbolIndex),
            "v_max" | "v_max_mps" => Ok(SweepAxis::VMax),
            "n_u" => Ok(SweepAxis::UsersPerSubcarrier),
            "n_d" => Ok(SweepAxis::FrameLength),
            "snr" | "snr_db" => Ok(SweepAxis::SnrDb),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub combiners: Vec<Combiner>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignRow {
    pub value: f64,
    pub combiner: Combiner,
    /// Per-symbol rate for the symbol-index axis, frame-averaged otherwise (bits/s).
    pub analytic_rate: f64,
    pub empirical_rate: f64,
    pub empirical_stderr: f64,
    pub failed_trials: usize,
}

fn as_count(v: f64, what: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64 {
        Ok(v as usize)
    } else {
        domain(format!("{what} must be a positive integer, got {v}"))
    }
}

/// Applies one sweep coordinate to a base configuration.
pub fn apply_axis(base: &SystemConfig, axis: SweepAxis, value: f64) -> Result<SystemConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::SymbolIndex => {}
        SweepAxis::VMax => cfg.v_max = value,
        SweepAxis::UsersPerSubcarrier => {
            cfg = cfg.with_users_per_subcarrier(as_count(value, "n_u")?)
        }
        SweepAxis::FrameLength => cfg.frame_data_length = as_count(value, "n_d")?,
        SweepAxis::SnrDb => {
            cfg.effective_tx_power =
                10f64.powf(value / 10.0) * cfg.noise_variance / cfg.channel_variance;
        }
    }
    Ok(cfg)
}

/// Runs the sweep and returns one row per grid point and combiner, grid-major.
pub fn run_campaign(
    sweep: &Sweep,
    base: &SystemConfig,
    settings: &McSettings,
    master_seed: u64,
) -> Result<Vec<CampaignRow>> {
    if sweep.grid.is_empty() {
        return domain("sweep grid is empty");
    }
    if sweep.combiners.is_empty() {
        return domain("no combiner selected");
    }
    let mut rows = Vec::new();
    match sweep.axis {
        SweepAxis::SymbolIndex | SweepAxis::FrameLength => {
            let counts: Vec<usize> = sweep
                .grid
                .iter()
                .map(|&v| as_count(v, sweep.axis.column()))
                .collect::<Result<_>>()?;
            let cfg = validate_config(base.clone())?;
            let plan = build_allocation(&cfg);
            let mut symbols: Vec<usize> = if sweep.axis == SweepAxis::SymbolIndex {
                counts.clone()
            } else {
                (1..=*counts.iter().max().expect("nonempty")).collect()
            };
            symbols.sort_unstable();
            symbols.dedup();
            let last = *symbols.last().expect("nonempty");
            let model = LinkModel::new(&cfg, &plan, last)?;
            let spec = MeasureSpec {
                symbols,
                combiners: sweep.combiners.clone(),
                master_seed,
                stream_offset: 0,
            };
            let result = measure_sinr(&cfg, &plan, &spec, settings)?;
            let target = representative_subcarrier(&plan);
            let (eta, eta_bar) = (plan.eta(target, 0), plan.eta_bar(target));
            for (&value, &count) in sweep.grid.iter().zip(&counts) {
                for &c in &sweep.combiners {
                    let (analytic, empirical, stderr) = if sweep.axis == SweepAxis::SymbolIndex {
                        let st = result.stat(c, count)?;
                        (
                            model.per_symbol_rate(model.sinr(c, count, eta, eta_bar)?),
                            st.rate,
                            st.rate_stderr,
                        )
                    } else {
                        let (e, se) = result.frame_rate(c, count, plan.pilot.pilot_length)?;
                        (model.frame_rate(c, count, eta, eta_bar)?, e, se)
                    };
                    rows.push(CampaignRow {
                        value,
                        combiner: c,
                        analytic_rate: analytic,
                        empirical_rate: empirical,
                        empirical_stderr: stderr,
                        failed_trials: result.failed(c)?,
                    });
                }
            }
        }
        SweepAxis::VMax | SweepAxis::UsersPerSubcarrier | SweepAxis::SnrDb => {
            for (point, &value) in sweep.grid.iter().enumerate() {
                let cfg = validate_config(apply_axis(base, sweep.axis, value)?)?;
                let plan = build_allocation(&cfg);
                let n_d = cfg.frame_data_length;
                if n_d == 0 {
                    return domain("frame_data_length must be positive for a Monte Carlo sweep");
                }
                let model = LinkModel::new(&cfg, &plan, n_d)?;
                let spec = MeasureSpec {
                    symbols: (1..=n_d).collect(),
                    combiners: sweep.combiners.clone(),
                    master_seed,
                    stream_offset: (point as u64) << 40,
                };
                let result = measure_sinr(&cfg, &plan, &spec, settings)?;
                let target = representative_subcarrier(&plan);
                let (eta, eta_bar) = (plan.eta(target, 0), plan.eta_bar(target));
                for &c in &sweep.combiners {
                    let (e, se) = result.frame_rate(c, n_d, plan.pilot.pilot_length)?;
                    rows.push(CampaignRow {
                        value,
                        combiner: c,
                        analytic_rate: model.frame_rate(c, n_d, eta, eta_bar)?,
                        empirical_rate: e,
                        empirical_stderr: se,
                        failed_trials: result.failed(c)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}
