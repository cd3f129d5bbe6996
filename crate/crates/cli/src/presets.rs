//! Sweeps behind the figure presets.

use anyhow::Result;
use clap::ValueEnum;
use mmofdm::mcsim::{run_campaign, McSettings, Sweep, SweepAxis};
use mmofdm::rate::{pilot_percentage, sum_rate_with, Combiner, LinkModel};
use mmofdm::system::SystemConfig;

use crate::commands::{
    frame_length_for, mc_table, optimal_sumrate_table, point, rate_table, sumrate_table, FrameGrid,
    MC_TAIL,
};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Per-symbol rate against symbol index, analytic and simulated.
    Fig3,
    /// Per-symbol rate against symbol index for every load.
    Fig4,
    /// Sum rate against speed for three pilot percentages, analytic and simulated.
    Fig5,
    /// ZF sum rate against speed for every load.
    Fig6,
    /// MRC sum rate against speed for every load.
    Fig7,
    /// Sum rate against frame length.
    Fig8,
    /// Frame-length-optimised sum rate against receive SNR.
    Fig9,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Scale {
    /// 64 antennas and 2e4 trials for the simulated presets.
    #[default]
    Desk,
    /// Antenna count from the configuration and 5e4 trials.
    Paper,
}

pub const DESK_ANTENNAS: usize = 64;
pub const DESK_TRIALS: usize = 20_000;
pub const PAPER_TRIALS: usize = 50_000;

pub const SPEEDS: [f64; 3] = [5.0, 25.0, 100.0];
pub const PILOT_PERCENTAGES: [f64; 3] = [12.5, 25.0, 50.0];
pub const LOADS: [usize; 6] = [4, 8, 16, 32, 64, 128];
pub const SYMBOL_HORIZON: usize = 30;
pub const FRAME_HORIZON: usize = 64;

pub fn speed_grid() -> Vec<f64> {
    (1..=20).map(|i| 5.0 * i as f64).collect()
}

pub fn snr_grid() -> Vec<f64> {
    (0..=8).map(|i| -10.0 + 5.0 * i as f64).collect()
}

#[derive(Debug, Clone)]
pub struct PresetRun {
    pub scale: Scale,
    pub combiners: Option<Vec<Combiner>>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub threads: Option<usize>,
}

impl PresetRun {
    fn simulated(&self, base: &SystemConfig) -> (SystemConfig, McSettings) {
        let mut cfg = base.clone();
        let trials = match self.scale {
            Scale::Desk => {
                cfg.n_antennas = DESK_ANTENNAS;
                DESK_TRIALS
            }
            Scale::Paper => PAPER_TRIALS,
        };
        let settings = McSettings {
            trials: self.trials.unwrap_or(trials),
            threads: self.threads,
            ..McSettings::default()
        };
        (cfg, settings)
    }

    fn combiners(&self, default: &[Combiner]) -> Vec<Combiner> {
        self.combiners.clone().unwrap_or_else(|| default.to_vec())
    }
}

pub fn run_preset(preset: Preset, base: &SystemConfig, run: &PresetRun) -> Result<Table> {
    let both = Combiner::ALL;
    match preset {
        Preset::Fig3 => {
            let (cfg, settings) = run.simulated(&base.clone().with_users_per_subcarrier(8));
            let mut header = vec!["v_max_mps", "n"];
            header.extend(MC_TAIL);
            let mut out = Table::new(&header);
            let sweep = Sweep {
                axis: SweepAxis::SymbolIndex,
                grid: (1..=SYMBOL_HORIZON).map(|n| n as f64).collect(),
                combiners: run.combiners(&both),
            };
            for v in SPEEDS {
                let mut c = cfg.clone();
                c.v_max = v;
                for row in mc_table(&c, &sweep, &settings, run.seed)?.rows {
                    let mut r = vec![v.into()];
                    r.extend(row);
                    out.push(r);
                }
            }
            Ok(out)
        }
        Preset::Fig4 => rate_table(base, &SPEEDS, &LOADS, SYMBOL_HORIZON, &run.combiners(&both)),
        Preset::Fig5 => fig5(base, run),
        Preset::Fig6 | Preset::Fig7 => {
            let default = if preset == Preset::Fig6 {
                Combiner::Zf
            } else {
                Combiner::Mrc
            };
            let t = sumrate_table(
                base,
                &speed_grid(),
                &LOADS,
                &FrameGrid::PilotPercent(PILOT_PERCENTAGES.to_vec()),
                &run.combiners(&[default]),
            )?;
            let pick = ["v_max_mps", "mu_pct", "combiner", "sum_rate_bps", "n_u"];
            let idx: Vec<usize> = pick
                .iter()
                .map(|h| t.column(h).expect("sumrate column"))
                .collect();
            let mut out = Table::new(&pick);
            for row in &t.rows {
                out.push(idx.iter().map(|&i| row[i].clone()).collect());
            }
            Ok(out)
        }
        Preset::Fig8 => sumrate_table(
            base,
            &SPEEDS,
            &LOADS,
            &FrameGrid::DataLength((1..=FRAME_HORIZON).collect()),
            &run.combiners(&both),
        ),
        Preset::Fig9 => optimal_sumrate_table(
            base,
            &SPEEDS,
            &LOADS[2..],
            &snr_grid(),
            &(1..=FRAME_HORIZON).collect::<Vec<_>>(),
            &run.combiners(&both),
        ),
    }
}

fn fig5(base: &SystemConfig, run: &PresetRun) -> Result<Table> {
    let (cfg, settings) = run.simulated(base);
    let combiners = run.combiners(&Combiner::ALL);
    let mut out = Table::new(&[
        "v_max_mps",
        "mu_pct",
        "combiner",
        "sum_rate_bps",
        "empirical_sum_rate_bps",
        "empirical_stderr_bps",
        "failed_trials",
    ]);
    for v in speed_grid() {
        let (vc, plan) = point(&cfg, v, 8)?;
        let n_p = plan.pilot.pilot_length;
        let lengths: Vec<usize> = PILOT_PERCENTAGES
            .iter()
            .map(|&m| frame_length_for(n_p, m))
            .collect::<Result<_>>()?;
        let model = LinkModel::new(&vc, &plan, *lengths.iter().max().expect("three lengths"))?;
        let pairs = (plan.n_subcarriers() * plan.users_per_group) as f64;
        let sweep = Sweep {
            axis: SweepAxis::FrameLength,
            grid: lengths.iter().map(|&n| n as f64).collect(),
            combiners: combiners.clone(),
        };
        let rows = run_campaign(&sweep, vc.config(), &settings, run.seed)?;
        for (i, &n_d) in lengths.iter().enumerate() {
            for (j, &c) in combiners.iter().enumerate() {
                let mc = &rows[i * combiners.len() + j];
                let analytic = sum_rate_with(&model, c, &plan, n_d)?.system_sum_rate;
                out.push(vec![
                    v.into(),
                    pilot_percentage(n_p, n_d).into(),
                    c.as_str().into(),
                    analytic.into(),
                    (mc.empirical_rate * pairs).into(),
                    (mc.empirical_stderr * pairs).into(),
                    mc.failed_trials.into(),
                ]);
            }
        }
    }
    Ok(out)
}
