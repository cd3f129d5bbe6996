//! Command-line front end for the `mmofdm` library.
//!
//! Every subcommand writes one CSV table to `--out` or stdout, except
//! `validate`, which prints the derived plan of a configuration.

pub mod commands;
pub mod presets;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use mmofdm::config::load_config;
use mmofdm::mcsim::{McSettings, Sweep, SweepAxis};
use mmofdm::rate::Combiner;
use mmofdm::system::{PowerMode, SystemConfig};

use crate::commands::FrameGrid;
use crate::presets::{Preset, PresetRun, Scale};
use crate::table::emit_csv;

#[derive(Debug, Parser)]
#[command(
    name = "mmofdm",
    version,
    about = "Uplink rate analysis for multi-carrier massive MIMO with mobile users"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` configuration file; missing keys keep the reference values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub combiner: Option<CombinerArg>,
    #[arg(long, global = true, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Worker threads for Monte Carlo trials.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Monte Carlo trials per grid point.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombinerArg {
    Zf,
    Mrc,
    Both,
}

impl CombinerArg {
    pub fn combiners(self) -> Vec<Combiner> {
        match self {
            CombinerArg::Zf => vec![Combiner::Zf],
            CombinerArg::Mrc => vec![Combiner::Mrc],
            CombinerArg::Both => Combiner::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerArg {
    Uniform,
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and print its derived plan.
    Validate,
    /// Per-subcarrier ICI power and the closed form.
    Ici {
        #[arg(long = "v-max", value_delimiter = ',')]
        v_max: Vec<f64>,
        #[arg(long = "n-u", value_delimiter = ',')]
        n_u: Vec<usize>,
        #[arg(long, value_enum, default_value_t = PowerArg::Uniform)]
        power: PowerArg,
    },
    /// Estimation NMSE against pilot SNR.
    Nmse {
        #[arg(long = "snr-db", value_delimiter = ',', allow_negative_numbers = true)]
        snr_db: Vec<f64>,
        #[arg(long = "n-u")]
        n_u: Option<usize>,
        /// Add a simulated column using `--trials` trials.
        #[arg(long)]
        empirical: bool,
    },
    /// Analytic per-symbol rate against symbol index.
    Rate {
        #[arg(long = "v-max", value_delimiter = ',')]
        v_max: Vec<f64>,
        #[arg(long = "n-u", value_delimiter = ',')]
        n_u: Vec<usize>,
        #[arg(long = "n-max", default_value_t = 30)]
        n_max: usize,
    },
    /// Analytic system sum rate.
    Sumrate {
        #[arg(long = "v-max", value_delimiter = ',')]
        v_max: Vec<f64>,
        #[arg(long = "n-u", value_delimiter = ',')]
        n_u: Vec<usize>,
        /// Pilot percentages; the data length follows with the pilot length fixed.
        #[arg(long, value_delimiter = ',', conflicts_with = "n_d")]
        mu: Vec<f64>,
        #[arg(long = "n-d", value_delimiter = ',')]
        n_d: Vec<usize>,
    },
    /// Monte Carlo campaign along one axis.
    Mc {
        /// One of n, v_max, n_u, n_d, snr_db.
        #[arg(long)]
        axis: String,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        grid: Vec<f64>,
    },
    /// Reproduce one of the figure sweeps.
    Preset {
        #[arg(value_enum)]
        name: Preset,
    },
}

fn base_config(cli: &Cli) -> Result<SystemConfig> {
    Ok(match &cli.config {
        Some(p) => load_config(p)?,
        None => SystemConfig::paper_defaults(),
    })
}

fn or_default<T: Clone>(v: &[T], d: T) -> Vec<T> {
    if v.is_empty() {
        vec![d]
    } else {
        v.to_vec()
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let base = base_config(cli)?;
    let combiners = cli.combiner.map(CombinerArg::combiners);
    let all = || combiners.clone().unwrap_or_else(|| Combiner::ALL.to_vec());
    let out = cli.out.as_deref();
    let table = match &cli.command {
        Command::Validate => {
            let (cfg, plan) = commands::prepare(base)?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "config ok")?;
            for line in commands::summary(&cfg, &plan) {
                writeln!(stdout, "{line}")?;
            }
            return Ok(());
        }
        Command::Ici { v_max, n_u, power } => {
            let mode = match power {
                PowerArg::Uniform => PowerMode::Uniform,
                PowerArg::Random => PowerMode::Random,
            };
            commands::ici_table(
                &base,
                &or_default(v_max, base.v_max),
                &or_default(n_u, base.users_per_subcarrier),
                mode,
                cli.seed,
            )?
        }
        Command::Nmse {
            snr_db,
            n_u,
            empirical,
        } => {
            let base = match n_u {
                Some(k) => base.clone().with_users_per_subcarrier(*k),
                None => base.clone(),
            };
            let grid = if snr_db.is_empty() {
                (0..=12).map(|i| -10.0 + 5.0 * i as f64).collect()
            } else {
                snr_db.clone()
            };
            let emp = empirical.then(|| (cli.trials.unwrap_or(10_000), cli.seed));
            commands::nmse_table(&base, &grid, emp)?
        }
        Command::Rate { v_max, n_u, n_max } => commands::rate_table(
            &base,
            &or_default(v_max, base.v_max),
            &or_default(n_u, base.users_per_subcarrier),
            *n_max,
            &all(),
        )?,
        Command::Sumrate {
            v_max,
            n_u,
            mu,
            n_d,
        } => {
            let frames = if !mu.is_empty() {
                FrameGrid::PilotPercent(mu.clone())
            } else {
                FrameGrid::DataLength(or_default(n_d, base.frame_data_length))
            };
            commands::sumrate_table(
                &base,
                &or_default(v_max, base.v_max),
                &or_default(n_u, base.users_per_subcarrier),
                &frames,
                &all(),
            )?
        }
        Command::Mc { axis, grid } => {
            let axis: SweepAxis = axis.parse()?;
            let settings = McSettings {
                trials: cli.trials.unwrap_or(presets::DESK_TRIALS),
                threads: cli.threads,
                ..McSettings::default()
            };
            let sweep = Sweep {
                axis,
                grid: grid.clone(),
                combiners: all(),
            };
            commands::mc_table(&base, &sweep, &settings, cli.seed)?
        }
        Command::Preset { name } => {
            let run = PresetRun {
                scale: cli.scale,
                combiners,
                seed: cli.seed,
                trials: cli.trials,
                threads: cli.threads,
            };
            presets::run_preset(*name, &base, &run)?
        }
    };
    emit_csv(&table, out)
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) if is_broken_pipe(&e) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<std::io::Error>().or_else(|| {
            c.downcast_ref::<csv::Error>().and_then(|e| match e.kind() {
                csv::ErrorKind::Io(io) => Some(io),
                _ => None,
            })
        });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}
