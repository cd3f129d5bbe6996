//! Flat `key = value` configuration files.
//!
//! Keys are the [`SystemConfig`] field names. Lines starting with `#` and
//! trailing `# ...` are comments. The three power fields
//! (`effective_tx_power`, `noise_variance`, `channel_variance`) are written in
//! dB and stored linear. Keys that are absent keep their reference defaults.

use std::path::Path;

use crate::error::{Error, Result};
use crate::system::SystemConfig;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let mut cfg = SystemConfig::paper_defaults();
    let mut seen = std::collections::HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let int = || {
            value
                .parse::<usize>()
                .map_err(|e| err(format!("{key}: {e}")))
        };
        let real = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
        match key {
            "n_antennas" => cfg.n_antennas = int()?,
            "n_users" => cfg.n_users = int()?,
            "n_subcarriers" => cfg.n_subcarriers = int()?,
            "users_per_subcarrier" => cfg.users_per_subcarrier = int()?,
            "subcarriers_per_user" => cfg.subcarriers_per_user = int()?,
            "subcarrier_spacing" => cfg.subcarrier_spacing = real()?,
            "total_bandwidth" => cfg.total_bandwidth = real()?,
            "carrier_frequency" => cfg.carrier_frequency = real()?,
            "symbol_duration" => cfg.symbol_duration = real()?,
            "v_max" => cfg.v_max = real()?,
            "effective_tx_power" => cfg.effective_tx_power = db_to_linear(real()?),
            "noise_variance" => cfg.noise_variance = db_to_linear(real()?),
            "channel_variance" => cfg.channel_variance = db_to_linear(real()?),
            "coherence_bandwidth" => cfg.coherence_bandwidth = real()?,
            "frame_data_length" => cfg.frame_data_length = int()?,
            "speed_of_light" => cfg.speed_of_light = real()?,
            "nv_rule" => cfg.nv_rule = value.parse().map_err(|e: Error| err(e.to_string()))?,
            "lambda_horizon" => cfg.lambda_horizon = int()?,
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    if seen.contains("subcarrier_spacing") && !seen.contains("symbol_duration") {
        cfg.symbol_duration = 1.0 / cfg.subcarrier_spacing;
    }
    if !seen.contains("total_bandwidth") {
        cfg.total_bandwidth = cfg.n_subcarriers as f64 * cfg.subcarrier_spacing;
    }
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Renders a configuration in the file format accepted by [`parse_config`].
pub fn render_config(cfg: &SystemConfig) -> String {
    let nv = match cfg.nv_rule {
        crate::system::NvRule::PerCoherenceBlock => "per-block",
        crate::system::NvRule::Single => "single",
    };
    format!(
        "n_antennas = {}\nn_users = {}\nn_subcarriers = {}\nusers_per_subcarrier = {}\n\
         subcarriers_per_user = {}\nsubcarrier_spacing = {:?}\ntotal_bandwidth = {:?}\n\
         carrier_frequency = {:?}\nsymbol_duration = {:?}\nv_max = {:?}\n\
         effective_tx_power = {:?}  # dB\nnoise_variance = {:?}  # dB\nchannel_variance = {:?}  # dB\n\
         coherence_bandwidth = {:?}\nframe_data_length = {}\nspeed_of_light = {:?}\n\
         nv_rule = {nv}\nlambda_horizon = {}\n",
        cfg.n_antennas,
        cfg.n_users,
        cfg.n_subcarriers,
        cfg.users_per_subcarrier,
        cfg.subcarriers_per_user,
        cfg.subcarrier_spacing,
        cfg.total_bandwidth,
        cfg.carrier_frequency,
        cfg.symbol_duration,
        cfg.v_max,
        linear_to_db(cfg.effective_tx_power),
        linear_to_db(cfg.noise_variance),
        linear_to_db(cfg.channel_variance),
        cfg.coherence_bandwidth,
        cfg.frame_data_length,
        cfg.speed_of_light,
        cfg.lambda_horizon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_powers_in_db() {
        let cfg = parse_config(
            "# reference point\nn_antennas = 64\neffective_tx_power = 10 # dB\nnoise_variance = 0\nv_max=5\n",
        )
        .unwrap();
        assert_eq!(cfg.n_antennas, 64);
        assert!((cfg.effective_tx_power - 10.0).abs() < 1e-12);
        assert_eq!(cfg.noise_variance, 1.0);
        assert_eq!(cfg.v_max, 5.0);
    }

    #[test]
    fn spacing_sets_symbol_duration() {
        let cfg = parse_config("subcarrier_spacing = 15000\n").unwrap();
        assert_eq!(cfg.symbol_duration, 1.0 / 15000.0);
        assert_eq!(cfg.total_bandwidth, 512.0 * 15000.0);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(parse_config("n_antenas = 3").is_err());
        assert!(parse_config("n_antennas 3").is_err());
        assert!(parse_config("n_antennas = three").is_err());
        assert!(parse_config("v_max = 1\nv_max = 2").is_err());
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = SystemConfig::paper_defaults();
        cfg.v_max = 37.5;
        cfg.nv_rule = crate::system::NvRule::Single;
        let back = parse_config(&render_config(&cfg)).unwrap();
        assert_eq!(back.v_max, cfg.v_max);
        assert_eq!(back.nv_rule, cfg.nv_rule);
        assert!((back.effective_tx_power - cfg.effective_tx_power).abs() < 1e-12);
        assert_eq!(back.n_users, cfg.n_users);
    }
}
