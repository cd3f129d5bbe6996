//! Achievable uplink rates with zero-forcing and maximal-ratio combining.
//!
//! Both receivers combine with the LS estimate and treat every term except
//! the desired one as uncorrelated noise. The resulting SINR lower bounds
//! depend on the data symbol index `n` only through the velocity-averaged
//! aging moment `lambda_bar(n)`, so a [`LinkModel`] tabulates it once and
//! evaluates SINRs in constant time.
//!
//! For power coefficient `eta` of a UE on a subcarrier whose total
//! coefficient is `eta_bar`, with `D = (N_U s_u / N_C + s_n / P_T)(1 + N_V eta_bar l / N_P) + eta_bar s_h (1 - l)`:
//!
//! * ZF: `(N_B - N_U + 1) eta s_hh l / D`
//! * MRC: `N_B eta s_hh l / (D + s_hh eta_bar l)`
//!
//! where `l = lambda_bar(n)`, `s_hh` is the estimate variance and `s_u`
//! the normalised ICI power.

use std::fmt;
use std::str::FromStr;

use crate::channel::lambda_bar_table;
use crate::error::{domain, Error, Result};
use crate::estimation::sigma_hhat_sq;
use crate::ici::sigma_u_sq;
use crate::system::{AllocationPlan, ValidConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combiner {
    Zf,
    Mrc,
}

impl Combiner {
    pub const ALL: [Combiner; 2] = [Combiner::Zf, Combiner::Mrc];

    pub fn as_str(self) -> &'static str {
        match self {
            Combiner::Zf => "zf",
            Combiner::Mrc => "mrc",
        }
    }
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Combiner {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zf" => Ok(Combiner::Zf),
            "mrc" => Ok(Combiner::Mrc),
            _ => Err(Error::Config(format!("unknown combiner `{s}`"))),
        }
    }
}

/// Link-level constants of one configuration with a tabulated aging moment.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkModel {
    pub n_antennas: f64,
    pub users_per_subcarrier: f64,
    pub subcarriers_per_user: f64,
    pub pilot_length: usize,
    pub pilots_per_ue: f64,
    pub tx_power: f64,
    pub noise_variance: f64,
    pub channel_variance: f64,
    pub ici_variance: f64,
    pub estimate_variance: f64,
    pub subcarrier_spacing: f64,
    lambda: Vec<f64>,
}

impl LinkModel {
    /// Tabulates the aging moment for `n = 0..=max_symbol`.
    pub fn new(cfg: &ValidConfig, plan: &AllocationPlan, max_symbol: usize) -> Result<Self> {
        Ok(LinkModel {
            n_antennas: cfg.n_antennas as f64,
            users_per_subcarrier: plan.users_per_group as f64,
            subcarriers_per_user: plan.subcarriers_per_group as f64,
            pilot_length: plan.pilot.pilot_length,
            pilots_per_ue: plan.pilot.pilots_per_ue as f64,
            tx_power: cfg.effective_tx_power,
            noise_variance: cfg.noise_variance,
            channel_variance: cfg.channel_variance,
            ici_variance: sigma_u_sq(cfg),
            estimate_variance: sigma_hhat_sq(cfg, plan),
            subcarrier_spacing: cfg.subcarrier_spacing,
            lambda: lambda_bar_table(cfg, max_symbol)?,
        })
    }

    pub fn max_symbol(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambda_bar(&self, n: usize) -> Result<f64> {
        self.lambda.get(n).copied().ok_or_else(|| {
            Error::Domain(format!(
                "symbol index {n} beyond tabulated {}",
                self.max_symbol()
            ))
        })
    }

    fn check(&self, n: usize, eta: f64, eta_bar: f64) -> Result<f64> {
        if n == 0 {
            return domain("data symbol indices start at 1");
        }
        if !(0.0..=1.0).contains(&eta) || eta > eta_bar * (1.0 + 1e-12) {
            return domain(format!(
                "power coefficients eta={eta}, eta_bar={eta_bar} out of range"
            ));
        }
        self.lambda_bar(n)
    }

    fn shared_denominator(&self, l: f64, eta_bar: f64) -> f64 {
        let disturbance = self.users_per_subcarrier * self.ici_variance / self.subcarriers_per_user
            + self.noise_variance / self.tx_power;
        disturbance * (1.0 + self.pilots_per_ue * eta_bar / self.pilot_length as f64 * l)
            + eta_bar * self.channel_variance * (1.0 - l)
    }

    pub fn zf_sinr(&self, n: usize, eta: f64, eta_bar: f64) -> Result<f64> {
        if self.n_antennas <= self.users_per_subcarrier - 1.0 {
            return Err(Error::Regime(
                "zero forcing needs more antennas than users".into(),
            ));
        }
        let l = self.check(n, eta, eta_bar)?;
        let num =
            (self.n_antennas - self.users_per_subcarrier + 1.0) * eta * self.estimate_variance * l;
        Ok(num / self.shared_denominator(l, eta_bar))
    }

    pub fn mrc_sinr(&self, n: usize, eta: f64, eta_bar: f64) -> Result<f64> {
        let l = self.check(n, eta, eta_bar)?;
        let num = self.n_antennas * eta * self.estimate_variance * l;
        Ok(num / (self.shared_denominator(l, eta_bar) + self.estimate_variance * eta_bar * l))
    }

    pub fn sinr(&self, combiner: Combiner, n: usize, eta: f64, eta_bar: f64) -> Result<f64> {
        match combiner {
            Combiner::Zf => self.zf_sinr(n, eta, eta_bar),
            Combiner::Mrc => self.mrc_sinr(n, eta, eta_bar),
        }
    }

    /// SINR with every UE spreading its power evenly, in the collapsed form
    /// where the subcarrier count moves to the denominator.
    pub fn sinr_uniform(&self, combiner: Combiner, n: usize) -> Result<f64> {
        if n == 0 {
            return domain("data symbol indices start at 1");
        }
        let l = self.lambda_bar(n)?;
        let nu = self.users_per_subcarrier;
        let nc = self.subcarriers_per_user;
        let load = nu / nc;
        let mut inner = (nu * self.ici_variance / nc + self.noise_variance / self.tx_power)
            * (1.0 + self.pilots_per_ue * nu / (self.pilot_length as f64 * nc) * l)
            + load * self.channel_variance * (1.0 - l);
        let gain = match combiner {
            Combiner::Zf => {
                if self.n_antennas <= nu - 1.0 {
                    return Err(Error::Regime(
                        "zero forcing needs more antennas than users".into(),
                    ));
                }
                self.n_antennas - nu + 1.0
            }
            Combiner::Mrc => {
                inner += load * self.estimate_variance * l;
                self.n_antennas
            }
        };
        Ok(gain * self.estimate_variance * l / (nc * inner))
    }

    pub fn per_symbol_rate(&self, sinr: f64) -> f64 {
        per_symbol_rate(sinr, self.subcarrier_spacing)
    }

    /// Average rate of one UE on one subcarrier over a frame of `n_d` data
    /// symbols and the pilot overhead.
    pub fn frame_rate(
        &self,
        combiner: Combiner,
        n_d: usize,
        eta: f64,
        eta_bar: f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        for n in 1..=n_d {
            total += self.per_symbol_rate(self.sinr(combiner, n, eta, eta_bar)?);
        }
        Ok(total / (self.pilot_length + n_d) as f64)
    }

    pub fn frame_rate_uniform(&self, combiner: Combiner, n_d: usize) -> Result<f64> {
        let mut total = 0.0;
        for n in 1..=n_d {
            total += self.per_symbol_rate(self.sinr_uniform(combiner, n)?);
        }
        Ok(total / (self.pilot_length + n_d) as f64)
    }
}

/// `delta_f * log2(1 + sinr)` in bits/s.
pub fn per_symbol_rate(sinr: f64, subcarrier_spacing: f64) -> f64 {
    subcarrier_spacing * sinr.max(0.0).ln_1p() / std::f64::consts::LN_2
}

pub fn pilot_percentage(n_p: usize, n_d: usize) -> f64 {
    100.0 * n_p as f64 / (n_p + n_d) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub combiner: Combiner,
    pub frame_data_length: usize,
    /// SINR of UE slot 0 on subcarrier 0 for `n = 1..=N_D`.
    pub per_symbol_sinr: Vec<f64>,
    pub per_symbol_rate: Vec<f64>,
    /// Frame-averaged rate of one UE on one subcarrier, averaged over all pairs.
    pub per_ue_frame_rate: f64,
    pub system_sum_rate: f64,
    pub pilot_percentage: f64,
}

pub fn sum_rate(
    combiner: Combiner,
    cfg: &ValidConfig,
    plan: &AllocationPlan,
) -> Result<RateResult> {
    let model = LinkModel::new(cfg, plan, cfg.frame_data_length)?;
    sum_rate_with(&model, combiner, plan, cfg.frame_data_length)
}

/// Sum rate over all subcarriers and UE slots for a frame of `n_d` data symbols.
pub fn sum_rate_with(
    model: &LinkModel,
    combiner: Combiner,
    plan: &AllocationPlan,
    n_d: usize,
) -> Result<RateResult> {
    let pairs = (plan.n_subcarriers() * plan.users_per_group) as f64;
    let (per_symbol_sinr, per_ue, total) = if plan.is_uniform() {
        let sinr: Vec<f64> = (1..=n_d)
            .map(|n| model.sinr_uniform(combiner, n))
            .collect::<Result<_>>()?;
        let avg = model.frame_rate_uniform(combiner, n_d)?;
        (sinr, avg, avg * pairs)
    } else {
        let eta_bar0 = plan.eta_bar(0);
        let sinr: Vec<f64> = (1..=n_d)
            .map(|n| model.sinr(combiner, n, plan.eta(0, 0), eta_bar0))
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        for i in 0..plan.n_subcarriers() {
            let eta_bar = plan.eta_bar(i);
            for k in 0..plan.users_per_group {
                total += model.frame_rate(combiner, n_d, plan.eta(i, k), eta_bar)?;
            }
        }
        (sinr, total / pairs, total)
    };
    let per_symbol_rate = per_symbol_sinr
        .iter()
        .map(|&s| model.per_symbol_rate(s))
        .collect();
    Ok(RateResult {
        combiner,
        frame_data_length: n_d,
        per_symbol_sinr,
        per_symbol_rate,
        per_ue_frame_rate: per_ue,
        system_sum_rate: total,
        pilot_percentage: pilot_percentage(model.pilot_length, n_d),
    })
}

/// Evaluates the sum rate for every frame length in `grid` and returns the
/// best one, preferring the shorter frame on ties.
pub fn optimize_frame_length(
    combiner: Combiner,
    cfg: &ValidConfig,
    plan: &AllocationPlan,
    grid: &[usize],
) -> Result<(usize, RateResult)> {
    let max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::Domain("empty frame-length grid".into()))?;
    let model = LinkModel::new(cfg, plan, max)?;
    let mut best: Option<RateResult> = None;
    for &n_d in grid {
        let r = sum_rate_with(&model, combiner, plan, n_d)?;
        let better = match &best {
            None => true,
            Some(b) => {
                r.system_sum_rate > b.system_sum_rate
                    || (r.system_sum_rate == b.system_sum_rate && n_d < b.frame_data_length)
            }
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.expect("grid is nonempty");
    Ok((best.frame_data_length, best))
}
