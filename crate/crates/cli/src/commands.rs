//! Table builders shared by the subcommands and the figure presets.

use anyhow::{bail, Context, Result};
use mmofdm::config::db_to_linear;
use mmofdm::estimation::{nmse, NmseMode};
use mmofdm::ici::{ici_power_closed_form, ici_power_exact, LeakageTable};
use mmofdm::mcsim::{representative_subcarrier, run_campaign, McSettings, Sweep, SweepAxis};
use mmofdm::rate::{optimize_frame_length, pilot_percentage, sum_rate_with, Combiner, LinkModel};
use mmofdm::system::{
    build_allocation, sample_power_coefficients, validate_config, AllocationPlan, PowerMode,
    SystemConfig, ValidConfig,
};

use crate::table::{Table, Value};

pub fn prepare(cfg: SystemConfig) -> Result<(ValidConfig, AllocationPlan)> {
    let v = validate_config(cfg)?;
    let p = build_allocation(&v);
    Ok((v, p))
}

/// Base configuration with the speed and load replaced.
pub fn point(base: &SystemConfig, v_max: f64, n_u: usize) -> Result<(ValidConfig, AllocationPlan)> {
    let mut c = base.clone().with_users_per_subcarrier(n_u);
    c.v_max = v_max;
    prepare(c).with_context(|| format!("at v_max={v_max}, n_u={n_u}"))
}

/// Transmit power reaching the given receive SNR in dB.
pub fn with_snr_db(base: &SystemConfig, snr_db: f64) -> SystemConfig {
    let mut c = base.clone();
    c.effective_tx_power = db_to_linear(snr_db) * c.noise_variance / c.channel_variance;
    c
}

/// Data length giving pilot percentage `mu` with the pilot length fixed.
pub fn frame_length_for(pilot_length: usize, mu: f64) -> Result<usize> {
    if !(mu > 0.0 && mu < 100.0) {
        bail!("pilot percentage must lie in (0, 100), got {mu}");
    }
    let n_d = (pilot_length as f64 * (100.0 - mu) / mu).round();
    if n_d < 1.0 {
        bail!("pilot percentage {mu} leaves no data symbols");
    }
    Ok(n_d as usize)
}

pub fn summary(cfg: &ValidConfig, plan: &AllocationPlan) -> Vec<String> {
    vec![
        format!("N_B={}", cfg.n_antennas),
        format!("N_R={}", cfg.n_users),
        format!("N_G={}", cfg.n_subcarriers),
        format!("N_U={}", cfg.users_per_subcarrier),
        format!("N_C={}", cfg.subcarriers_per_user),
        format!("L={}", cfg.n_groups()),
        format!("N_H={}", cfg.n_coherence()),
        format!("N_P={}", plan.pilot.pilot_length),
        format!("N_V={}", plan.pilot.pilots_per_ue),
        format!("contamination_free={}", plan.pilot.is_contamination_free()),
        format!("b={}", mmofdm::ici::doppler_b(cfg)),
        format!("sigma_u_sq={}", mmofdm::ici::sigma_u_sq(cfg)),
    ]
}

/// Exact per-subcarrier ICI power next to the closed form.
pub fn ici_table(
    base: &SystemConfig,
    v_grid: &[f64],
    nu_grid: &[usize],
    power: PowerMode,
    seed: u64,
) -> Result<Table> {
    let mut t = Table::new(&["v_max_mps", "n_u", "subcarrier", "ici_power", "closed_form"]);
    for &v in v_grid {
        let mut table: Option<LeakageTable> = None;
        for &n_u in nu_grid {
            let (cfg, plan) = point(base, v, n_u)?;
            let plan = sample_power_coefficients(&plan, power, seed);
            let leak = match table.take() {
                Some(l) if l.matches(&cfg) => l,
                _ => LeakageTable::new(&cfg),
            };
            let closed = ici_power_closed_form(&cfg)?;
            for i in 0..plan.n_subcarriers() {
                let p = ici_power_exact(&cfg, &plan, &leak, i)?;
                t.push(vec![
                    v.into(),
                    n_u.into(),
                    i.into(),
                    p.into(),
                    closed.into(),
                ]);
            }
            table = Some(leak);
        }
    }
    Ok(t)
}

/// Analytic NMSE against pilot SNR, with and without ICI.
pub fn nmse_table(
    base: &SystemConfig,
    snr_grid: &[f64],
    empirical: Option<(usize, u64)>,
) -> Result<Table> {
    let mut header = vec!["pilot_snr_db", "multi_carrier_nmse", "single_carrier_nmse"];
    if empirical.is_some() {
        header.push("empirical_nmse");
    }
    let mut t = Table::new(&header);
    for &snr in snr_grid {
        let (cfg, plan) = prepare(with_snr_db(base, snr))?;
        let mut still = cfg.config().clone();
        still.v_max = 0.0;
        let (still, still_plan) = prepare(still)?;
        let mut row: Vec<Value> = vec![
            snr.into(),
            nmse(&cfg, &plan, NmseMode::Analytic)?.into(),
            nmse(&still, &still_plan, NmseMode::Analytic)?.into(),
        ];
        if let Some((trials, seed)) = empirical {
            row.push(nmse(&cfg, &plan, NmseMode::Empirical { trials, seed })?.into());
        }
        t.push(row);
    }
    Ok(t)
}

pub const RATE_HEADER: [&str; 6] = [
    "v_max_mps",
    "n_u",
    "n",
    "combiner",
    "rate_bps",
    "ue_rate_bps",
];

/// Analytic per-symbol rate of one UE on one subcarrier (`rate_bps`) and
/// over all its subcarriers (`ue_rate_bps`).
pub fn rate_table(
    base: &SystemConfig,
    v_grid: &[f64],
    nu_grid: &[usize],
    n_max: usize,
    combiners: &[Combiner],
) -> Result<Table> {
    let mut t = Table::new(&RATE_HEADER);
    for &v in v_grid {
        for &n_u in nu_grid {
            let (cfg, plan) = point(base, v, n_u)?;
            for &c in combiners {
                for (n, r) in analytic_symbol_rates(&cfg, &plan, c, n_max)?
                    .into_iter()
                    .enumerate()
                {
                    let ue = r * cfg.subcarriers_per_user as f64;
                    t.push(vec![
                        v.into(),
                        n_u.into(),
                        (n + 1).into(),
                        c.as_str().into(),
                        r.into(),
                        ue.into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

/// Per-symbol analytic rates for `n = 1..=n_max` on the simulated subcarrier.
pub fn analytic_symbol_rates(
    cfg: &ValidConfig,
    plan: &AllocationPlan,
    c: Combiner,
    n_max: usize,
) -> Result<Vec<f64>> {
    let model = LinkModel::new(cfg, plan, n_max)?;
    let rep = representative_subcarrier(plan);
    (1..=n_max)
        .map(|n| {
            Ok(model.per_symbol_rate(model.sinr(c, n, plan.eta(rep, 0), plan.eta_bar(rep))?))
        })
        .collect()
}

/// How the frame length of a sum-rate sweep is given.
#[derive(Debug, Clone)]
pub enum FrameGrid {
    PilotPercent(Vec<f64>),
    DataLength(Vec<usize>),
}

pub const SUMRATE_HEADER: [&str; 6] = [
    "v_max_mps",
    "n_u",
    "n_d",
    "mu_pct",
    "combiner",
    "sum_rate_bps",
];

pub fn sumrate_table(
    base: &SystemConfig,
    v_grid: &[f64],
    nu_grid: &[usize],
    frames: &FrameGrid,
    combiners: &[Combiner],
) -> Result<Table> {
    let mut t = Table::new(&SUMRATE_HEADER);
    for &v in v_grid {
        for &n_u in nu_grid {
            let (cfg, plan) = point(base, v, n_u)?;
            let n_p = plan.pilot.pilot_length;
            let lengths: Vec<usize> = match frames {
                FrameGrid::PilotPercent(mus) => mus
                    .iter()
                    .map(|&m| frame_length_for(n_p, m))
                    .collect::<Result<_>>()?,
                FrameGrid::DataLength(nds) => nds.clone(),
            };
            let n_max = lengths.iter().copied().max().unwrap_or(0);
            if n_max == 0 {
                bail!("frame length grid is empty or zero");
            }
            let model = LinkModel::new(&cfg, &plan, n_max)?;
            for &n_d in &lengths {
                for &c in combiners {
                    let r = sum_rate_with(&model, c, &plan, n_d)?;
                    t.push(vec![
                        v.into(),
                        n_u.into(),
                        n_d.into(),
                        pilot_percentage(n_p, n_d).into(),
                        c.as_str().into(),
                        r.system_sum_rate.into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

/// Sum rate maximised over the frame length, against receive SNR.
pub fn optimal_sumrate_table(
    base: &SystemConfig,
    v_grid: &[f64],
    nu_grid: &[usize],
    snr_grid: &[f64],
    n_d_grid: &[usize],
    combiners: &[Combiner],
) -> Result<Table> {
    let mut t = Table::new(&[
        "v_max_mps",
        "n_u",
        "snr_db",
        "combiner",
        "best_n_d",
        "mu_pct",
        "sum_rate_bps",
    ]);
    for &v in v_grid {
        for &n_u in nu_grid {
            for &snr in snr_grid {
                let (cfg, plan) = point(&with_snr_db(base, snr), v, n_u)?;
                for &c in combiners {
                    let (n_d, r) = optimize_frame_length(c, &cfg, &plan, n_d_grid)?;
                    t.push(vec![
                        v.into(),
                        n_u.into(),
                        snr.into(),
                        c.as_str().into(),
                        n_d.into(),
                        r.pilot_percentage.into(),
                        r.system_sum_rate.into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

pub const MC_TAIL: [&str; 5] = [
    "combiner",
    "analytic_rate",
    "empirical_rate",
    "empirical_stderr",
    "failed_trials",
];

pub fn mc_table(
    base: &SystemConfig,
    sweep: &Sweep,
    settings: &McSettings,
    seed: u64,
) -> Result<Table> {
    let mut header = vec![sweep.axis.column()];
    header.extend(MC_TAIL);
    let mut t = Table::new(&header);
    let integer_axis = matches!(
        sweep.axis,
        SweepAxis::SymbolIndex | SweepAxis::FrameLength | SweepAxis::UsersPerSubcarrier
    );
    for row in run_campaign(sweep, base, settings, seed)? {
        let value: Value = if integer_axis {
            (row.value as usize).into()
        } else {
            row.value.into()
        };
        t.push(vec![
            value,
            row.combiner.as_str().into(),
            row.analytic_rate.into(),
            row.empirical_rate.into(),
            row.empirical_stderr.into(),
            row.failed_trials.into(),
        ]);
    }
    Ok(t)
}
