//! Inter-carrier interference from user mobility.
//!
//! A UE moving at speed `v` with arrival angle `psi` shifts every subcarrier
//! by `(v / c) f_c cos(psi)`. The fraction of power that subcarrier `j` leaks
//! into subcarrier `i` is the average of `sinc^2((f_i - f_j + shift) T_s)`
//! over speeds uniform on `[0, V_max]` and angles uniform on the circle, and
//! depends only on the subcarrier offset `i - j`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, OnceLock};

use crate::error::{domain, Result};
use crate::numerics::{integrate, sinc_unchecked, sine_integral, try_integrate, QuadratureSpec};
use crate::system::{AllocationPlan, ValidConfig};

/// Dimensionless Doppler parameter `pi V_max f_c T_s / c`.
pub fn doppler_b(cfg: &ValidConfig) -> f64 {
    PI * max_shift(cfg)
}

// largest normalised frequency offset V_max f_c T_s / c
fn max_shift(cfg: &ValidConfig) -> f64 {
    cfg.v_max * cfg.carrier_frequency * cfg.symbol_duration / cfg.speed_of_light
}

/// Normalised ICI power `b^2 / 18`.
pub fn sigma_u_sq(cfg: &ValidConfig) -> f64 {
    let b = doppler_b(cfg);
    b * b / 18.0
}

fn leakage_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_subdivisions: 2000,
    }
}

// (1/pi) int_0^pi int_0^1 sinc^2(offset + s * shift * cos psi) ds dpsi
fn leakage_at(offset: f64, shift: f64, spec: &QuadratureSpec) -> Result<f64> {
    if shift == 0.0 {
        return Ok(sinc_unchecked(offset).powi(2));
    }
    let outer = try_integrate(
        |psi| {
            let w = shift * psi.cos();
            integrate(|s| sinc_unchecked(offset + s * w).powi(2), 0.0, 1.0, spec)
        },
        0.0,
        PI,
        spec,
    )?;
    Ok(outer / PI)
}

/// Leakage from subcarrier `j` into subcarrier `i` (0-based indices).
pub fn leakage(cfg: &ValidConfig, i: usize, j: usize) -> Result<f64> {
    if i >= cfg.n_subcarriers || j >= cfg.n_subcarriers {
        return domain(format!("subcarrier pair ({i}, {j}) is outside the band"));
    }
    let offset = i.abs_diff(j) as f64 * cfg.subcarrier_spacing * cfg.symbol_duration;
    leakage_at(offset, max_shift(cfg), &leakage_spec())
}

/// Leakage values keyed by `|i - j|`, filled on first use.
///
/// Each entry is computed at most once and the table can be shared across
/// threads.
#[derive(Debug)]
pub struct LeakageTable {
    shift: f64,
    spacing_product: f64,
    cells: Vec<OnceLock<Result<f64>>>,
}

impl LeakageTable {
    pub fn new(cfg: &ValidConfig) -> Self {
        LeakageTable {
            shift: max_shift(cfg),
            spacing_product: cfg.subcarrier_spacing * cfg.symbol_duration,
            cells: (0..cfg.n_subcarriers).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Cache key: bit patterns of the quantities the leakage depends on.
    pub fn key(&self) -> (u64, u64) {
        (self.shift.to_bits(), self.spacing_product.to_bits())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn matches(&self, cfg: &ValidConfig) -> bool {
        self.key() == LeakageTable::new_key(cfg) && self.cells.len() == cfg.n_subcarriers
    }

    fn new_key(cfg: &ValidConfig) -> (u64, u64) {
        (
            max_shift(cfg).to_bits(),
            (cfg.subcarrier_spacing * cfg.symbol_duration).to_bits(),
        )
    }

    /// Leakage at offset `d = |i - j|`.
    pub fn get(&self, d: usize) -> Result<f64> {
        let cell = self
            .cells
            .get(d)
            .ok_or_else(|| crate::Error::Domain(format!("offset {d} exceeds the band")))?;
        cell.get_or_init(|| {
            leakage_at(d as f64 * self.spacing_product, self.shift, &leakage_spec())
        })
        .clone()
    }

    pub fn pair(&self, i: usize, j: usize) -> Result<f64> {
        self.get(i.abs_diff(j))
    }

    /// Number of offsets evaluated so far.
    pub fn filled(&self) -> usize {
        self.cells.iter().filter(|c| c.get().is_some()).count()
    }
}

/// Exact ICI power on subcarrier `i`: the leakage-weighted sum of the transmit
/// power on every other subcarrier.
pub fn ici_power_exact(
    cfg: &ValidConfig,
    plan: &AllocationPlan,
    table: &LeakageTable,
    i: usize,
) -> Result<f64> {
    if !table.matches(cfg) {
        return domain("leakage table was built for a different configuration");
    }
    let n = plan.n_subcarriers();
    if i >= n {
        return domain(format!("subcarrier {i} is outside the band"));
    }
    let mut total = 0.0;
    for j in 0..n {
        if j != i {
            total += plan.eta_bar(j) * table.pair(i, j)?;
        }
    }
    Ok(cfg.effective_tx_power * total)
}

// 1 - g(beta), g(beta) = Si(2 beta)/beta - sin^2(beta)/beta^2
fn leakage_complement(beta: f64) -> Result<f64> {
    let beta = beta.abs();
    if beta < 1.0 {
        // 1 - g = sum_{m>=1} (-1)^(m+1) 2^(2m+1) beta^(2m) [1/((2m+1)(2m+1)!) - 1/(2m+2)!]
        let b2 = beta * beta;
        let mut pow = 2.0; // 2^(2m+1) beta^(2m) / (2m+1)!, m = 0
        let mut sum = 0.0;
        for m in 1..40 {
            let mm = m as f64;
            pow *= 4.0 * b2 / ((2.0 * mm) * (2.0 * mm + 1.0));
            let odd = 2.0 * mm + 1.0;
            let term = pow * (1.0 / odd - 1.0 / (2.0 * mm + 2.0));
            let signed = if m % 2 == 1 { term } else { -term };
            sum += signed;
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        Ok(sum)
    } else {
        let s = beta.sin();
        Ok(1.0 - sine_integral(2.0 * beta)? / beta + s * s / (beta * beta))
    }
}

/// Fraction of a subcarrier's power lost to its neighbours, averaged over the
/// arrival angle, as a function of the Doppler parameter `b`.
pub fn ici_factor(b: f64) -> Result<f64> {
    if !(b.is_finite() && b >= 0.0) {
        return domain(format!("Doppler parameter {b} must be nonnegative"));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec {
        abs_tol: 1e-16,
        rel_tol: 1e-12,
        max_subdivisions: 2000,
    };
    let v = try_integrate(
        |psi| leakage_complement(b * psi.cos()),
        0.0,
        FRAC_PI_2,
        &spec,
    )?;
    Ok(v / FRAC_PI_2)
}

/// Closed-form total ICI power per subcarrier under uniform power coefficients.
pub fn ici_power_closed_form(cfg: &ValidConfig) -> Result<f64> {
    let scale =
        cfg.users_per_subcarrier as f64 * cfg.effective_tx_power / cfg.subcarriers_per_user as f64;
    Ok(scale * ici_factor(doppler_b(cfg))?)
}

/// Quadratic small-Doppler approximation of [`ici_power_closed_form`].
pub fn ici_power_small_b(cfg: &ValidConfig) -> f64 {
    cfg.users_per_subcarrier as f64 * cfg.effective_tx_power / cfg.subcarriers_per_user as f64
        * sigma_u_sq(cfg)
}

/// Doppler summary for a configuration plus per-subcarrier exact ICI powers.
#[derive(Debug, Clone)]
pub struct IciModel {
    pub b: f64,
    pub sigma_u_sq: f64,
    pub leakage: Arc<LeakageTable>,
    pub per_subcarrier_power: Vec<f64>,
}

impl IciModel {
    /// Builds the model without evaluating any leakage.
    pub fn new(cfg: &ValidConfig) -> Self {
        IciModel {
            b: doppler_b(cfg),
            sigma_u_sq: sigma_u_sq(cfg),
            leakage: Arc::new(LeakageTable::new(cfg)),
            per_subcarrier_power: Vec::new(),
        }
    }

    /// Fills `per_subcarrier_power` for every subcarrier of `plan`.
    pub fn with_exact_powers(mut self, cfg: &ValidConfig, plan: &AllocationPlan) -> Result<Self> {
        self.per_subcarrier_power = (0..plan.n_subcarriers())
            .map(|i| ici_power_exact(cfg, plan, &self.leakage, i))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// Variance of the Gaussian ICI term seen on one antenna.
    pub fn gaussian_variance(&self, cfg: &ValidConfig) -> f64 {
        cfg.users_per_subcarrier as f64 * cfg.effective_tx_power * self.sigma_u_sq
            / cfg.subcarriers_per_user as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{build_allocation, validate_config, SystemConfig};

    fn cfg(v_max: f64) -> ValidConfig {
        let mut c = SystemConfig::paper_defaults();
        c.v_max = v_max;
        c.users_per_subcarrier = 4;
        c.subcarriers_per_user = 1;
        validate_config(c).unwrap()
    }

    #[test]
    fn doppler_parameter() {
        assert_eq!(doppler_b(&cfg(0.0)), 0.0);
        assert!((doppler_b(&cfg(25.0)) - 0.078_592_211_147_176_3).abs() < 1e-15);
        let mut c = SystemConfig::paper_defaults();
        c.v_max = 27.78;
        c.carrier_frequency = 2e9;
        c.symbol_duration = 70e-6;
        c.subcarrier_spacing = 1.0 / 70e-6;
        let b = doppler_b(&validate_config(c).unwrap());
        assert!((b - 0.0407).abs() < 5e-4, "{b}");
    }

    #[test]
    fn sigma_u_sq_values() {
        assert_eq!(sigma_u_sq(&cfg(0.0)), 0.0);
        let s = sigma_u_sq(&cfg(25.0));
        assert!((s - 3.43e-4).abs() < 1e-6, "{s}");
    }

    #[test]
    fn static_leakage_is_orthogonal() {
        let c = cfg(0.0);
        assert_eq!(leakage(&c, 3, 3).unwrap(), 1.0);
        assert_eq!(leakage(&c, 3, 4).unwrap(), 0.0);
        assert_eq!(leakage(&c, 0, 511).unwrap(), 0.0);
        assert!(leakage(&c, 0, 512).is_err());
    }

    #[test]
    fn leakage_is_symmetric() {
        let c = cfg(100.0);
        let a = leakage(&c, 5, 9).unwrap();
        let b = leakage(&c, 9, 5).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn leakage_sums_to_one() {
        // the sum over all integer offsets is exactly one; beyond the band each
        // term is close to E[sin^2(pi x)] / (pi d)^2 with x the normalised shift
        let c = cfg(100.0);
        let t = LeakageTable::new(&c);
        let inside: f64 =
            t.get(0).unwrap() + 2.0 * (1..512).map(|d| t.get(d).unwrap()).sum::<f64>();
        let shift = max_shift(&c);
        let x2 = shift.powi(2) / 6.0;
        let x4 = shift.powi(4) * 3.0 / 40.0;
        let weight = x2 - PI * PI * x4 / 3.0;
        let tail = weight * 2.0 / 511.5; // sum of 1/d^2 over d >= 512
        assert!((inside + tail - 1.0).abs() < 2e-9, "{inside} + {tail}");
    }

    #[test]
    fn closed_form_matches_one_minus_self_leakage() {
        for v in [5.0, 25.0, 100.0] {
            let c = cfg(v);
            let l0 = leakage(&c, 7, 7).unwrap();
            let f = ici_factor(doppler_b(&c)).unwrap();
            assert!(((1.0 - l0) - f).abs() < 1e-10, "v={v}: {} vs {f}", 1.0 - l0);
        }
    }

    #[test]
    fn complement_series_matches_direct_form() {
        for beta in [0.3f64, 0.6, 0.9] {
            let s = beta.sin();
            let direct = 1.0 - sine_integral(2.0 * beta).unwrap() / beta + s * s / (beta * beta);
            assert!((leakage_complement(beta).unwrap() - direct).abs() < 1e-12);
        }
        let b: f64 = 1e-3;
        let two_terms = b * b / 9.0 - 2.0 * b.powi(4) / 225.0;
        assert!((leakage_complement(b).unwrap() - two_terms).abs() < 1e-20);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(ici_power_closed_form(&cfg(0.0)).unwrap(), 0.0);
        let c = cfg(25.0);
        let cf = ici_power_closed_form(&c).unwrap();
        let approx = 4.0 * 10.0 * sigma_u_sq(&c);
        assert!((cf - approx).abs() / cf < 5e-3);
        assert!((cf - 1.37e-2).abs() < 1e-4);
        let mut doubled = c.config().clone();
        doubled.users_per_subcarrier = 8;
        doubled.n_users = 4096;
        let d = ici_power_closed_form(&validate_config(doubled).unwrap()).unwrap();
        assert!((d - 2.0 * cf).abs() <= 4.0 * f64::EPSILON * d);
    }

    #[test]
    fn exact_power_vanishes_without_mobility() {
        let c = cfg(0.0);
        let plan = build_allocation(&c);
        let t = LeakageTable::new(&c);
        assert_eq!(ici_power_exact(&c, &plan, &t, 100).unwrap(), 0.0);
        let mut single = c.config().clone();
        single.n_subcarriers = 1;
        single.n_users = 4;
        let s = validate_config(single).unwrap();
        let plan = build_allocation(&s);
        let t = LeakageTable::new(&s);
        assert_eq!(ici_power_exact(&s, &plan, &t, 0).unwrap(), 0.0);
    }

    #[test]
    fn table_fills_lazily_and_checks_config() {
        let c = cfg(25.0);
        let t = LeakageTable::new(&c);
        assert_eq!(t.filled(), 0);
        t.pair(10, 13).unwrap();
        t.pair(13, 10).unwrap();
        assert_eq!(t.filled(), 1);
        let plan = build_allocation(&c);
        assert!(ici_power_exact(&cfg(5.0), &plan, &t, 0).is_err());
    }
}
