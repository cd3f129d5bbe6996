//! System configuration, UE/subcarrier grouping, pilot plans and power coefficients.

use std::ops::{Deref, Range};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// How many pilot carriers each UE uses when a group spans several coherence blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NvRule {
    /// One pilot per coherence block the group occupies: `max(1, ceil(N_C / N_H))`.
    #[default]
    PerCoherenceBlock,
    /// Always one pilot carrier: `min(1, ceil(N_C / N_H))`.
    Single,
}

impl std::str::FromStr for NvRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-block" | "per_block" | "max" => Ok(NvRule::PerCoherenceBlock),
            "single" | "min" => Ok(NvRule::Single),
            _ => Err(Error::Config(format!(
                "unknown nv_rule `{s}` (expected per-block or single)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    pub n_subcarriers: usize,
    pub users_per_subcarrier: usize,
    pub subcarriers_per_user: usize,
    /// Hz
    pub subcarrier_spacing: f64,
    /// Hz; informational, the occupied band is `n_subcarriers * subcarrier_spacing`.
    pub total_bandwidth: f64,
    /// Hz
    pub carrier_frequency: f64,
    /// seconds, must equal `1 / subcarrier_spacing`
    pub symbol_duration: f64,
    /// m/s
    pub v_max: f64,
    /// linear
    pub effective_tx_power: f64,
    /// linear
    pub noise_variance: f64,
    /// linear
    pub channel_variance: f64,
    /// Hz
    pub coherence_bandwidth: f64,
    pub frame_data_length: usize,
    pub speed_of_light: f64,
    pub nv_rule: NvRule,
    /// Largest symbol index for which the aging moment is evaluated.
    pub lambda_horizon: usize,
}

impl SystemConfig {
    /// The reference deployment: 256 antennas, 2048 users on 512 subcarriers at 3 GHz,
    /// 8 users per subcarrier, 10 dB SNR, 25 m/s.
    pub fn paper_defaults() -> Self {
        SystemConfig {
            n_antennas: 256,
            n_users: 2048,
            n_subcarriers: 512,
            users_per_subcarrier: 8,
            subcarriers_per_user: 2,
            subcarrier_spacing: 1e4,
            total_bandwidth: 5e6,
            carrier_frequency: 3e9,
            symbol_duration: 1e-4,
            v_max: 25.0,
            effective_tx_power: 10.0,
            noise_variance: 1.0,
            channel_variance: 1.0,
            coherence_bandwidth: 3e5,
            frame_data_length: 28,
            speed_of_light: SPEED_OF_LIGHT,
            nv_rule: NvRule::PerCoherenceBlock,
            lambda_horizon: 64,
        }
    }

    /// Sets the users per subcarrier and rescales the subcarriers per user so the
    /// grouping stays consistent with `n_users / n_subcarriers`.
    pub fn with_users_per_subcarrier(mut self, n_u: usize) -> Self {
        self.users_per_subcarrier = n_u;
        self.subcarriers_per_user = (n_u * self.n_subcarriers / self.n_users.max(1)).max(1);
        self
    }
}

/// A configuration that passed [`validate_config`], with derived counts attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidConfig {
    cfg: SystemConfig,
    n_groups: usize,
    n_coherence: usize,
}

impl ValidConfig {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn into_inner(self) -> SystemConfig {
        self.cfg
    }

    /// Number of UE groups, equal to the number of subcarrier groups.
    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    /// Subcarriers per coherence bandwidth.
    pub fn n_coherence(&self) -> usize {
        self.n_coherence
    }
}

impl Deref for ValidConfig {
    type Target = SystemConfig;
    fn deref(&self) -> &SystemConfig {
        &self.cfg
    }
}

pub fn validate_config(cfg: SystemConfig) -> Result<ValidConfig> {
    let counts = [
        ("n_antennas", cfg.n_antennas),
        ("n_users", cfg.n_users),
        ("n_subcarriers", cfg.n_subcarriers),
        ("users_per_subcarrier", cfg.users_per_subcarrier),
        ("subcarriers_per_user", cfg.subcarriers_per_user),
        ("lambda_horizon", cfg.lambda_horizon),
    ];
    for (name, v) in counts {
        if v == 0 {
            return domain(format!("{name} must be positive"));
        }
    }
    let positives = [
        ("subcarrier_spacing", cfg.subcarrier_spacing),
        ("total_bandwidth", cfg.total_bandwidth),
        ("carrier_frequency", cfg.carrier_frequency),
        ("symbol_duration", cfg.symbol_duration),
        ("effective_tx_power", cfg.effective_tx_power),
        ("noise_variance", cfg.noise_variance),
        ("channel_variance", cfg.channel_variance),
        ("coherence_bandwidth", cfg.coherence_bandwidth),
    ];
    for (name, v) in positives {
        if !(v.is_finite() && v > 0.0) {
            return domain(format!("{name} must be positive and finite, got {v}"));
        }
    }
    if !(cfg.v_max.is_finite() && cfg.v_max >= 0.0) {
        return domain(format!(
            "v_max must be nonnegative and finite, got {}",
            cfg.v_max
        ));
    }
    if cfg.speed_of_light != SPEED_OF_LIGHT {
        return domain(format!(
            "speed_of_light is fixed at {SPEED_OF_LIGHT}, got {}",
            cfg.speed_of_light
        ));
    }
    if ((cfg.symbol_duration * cfg.subcarrier_spacing) - 1.0).abs() > 1e-9 {
        return domain(format!(
            "symbol_duration {} must equal 1/subcarrier_spacing",
            cfg.symbol_duration
        ));
    }
    if !cfg.n_users.is_multiple_of(cfg.users_per_subcarrier) {
        return Err(Error::Grouping(format!(
            "n_users {} is not a multiple of users_per_subcarrier {}",
            cfg.n_users, cfg.users_per_subcarrier
        )));
    }
    if !cfg.n_subcarriers.is_multiple_of(cfg.subcarriers_per_user) {
        return Err(Error::Grouping(format!(
            "n_subcarriers {} is not a multiple of subcarriers_per_user {}",
            cfg.n_subcarriers, cfg.subcarriers_per_user
        )));
    }
    let ue_groups = cfg.n_users / cfg.users_per_subcarrier;
    let sc_groups = cfg.n_subcarriers / cfg.subcarriers_per_user;
    if ue_groups != sc_groups {
        return Err(Error::Grouping(format!(
            "{ue_groups} UE groups but {sc_groups} subcarrier groups"
        )));
    }
    if cfg.users_per_subcarrier >= cfg.n_antennas {
        return Err(Error::Regime(format!(
            "users_per_subcarrier {} must be below n_antennas {}",
            cfg.users_per_subcarrier, cfg.n_antennas
        )));
    }
    let n_coherence = (cfg.coherence_bandwidth / cfg.subcarrier_spacing + 1e-9).floor() as usize;
    if n_coherence == 0 {
        return domain("coherence_bandwidth is narrower than one subcarrier");
    }
    Ok(ValidConfig {
        cfg,
        n_groups: ue_groups,
        n_coherence,
    })
}

/// Pilot length, pilots per UE and the per-subcarrier pilot rosters of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPlan {
    pub pilot_length: usize,
    pub pilots_per_ue: usize,
    pub n_coherence: usize,
    /// Contiguous pilot blocks covering the group's subcarriers (group-local indices).
    pub blocks: Vec<Range<usize>>,
    /// `rosters[c]` lists the UE slots that send pilots on group-local subcarrier `c`.
    pub rosters: Vec<Vec<usize>>,
}

impl PilotPlan {
    /// Roster of global subcarrier `j`; every group uses the same pattern.
    pub fn roster(&self, j: usize) -> &[usize] {
        &self.rosters[j % self.rosters.len()]
    }

    pub fn max_roster(&self) -> usize {
        self.rosters.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when every roster fits in one orthogonal pilot book.
    pub fn is_contamination_free(&self) -> bool {
        self.max_roster() <= self.pilot_length
    }

    /// Group-local subcarrier on which slot `k` pilots inside pilot block `block`.
    pub fn pilot_subcarrier(&self, block: usize, k: usize) -> Option<usize> {
        self.blocks
            .get(block)?
            .clone()
            .find(|&c| self.rosters[c].contains(&k))
    }
}

pub fn pilot_plan(cfg: &ValidConfig, rule: NvRule) -> PilotPlan {
    let n_u = cfg.users_per_subcarrier;
    let n_c = cfg.subcarriers_per_user;
    let n_h = cfg.n_coherence();
    let pilot_length = n_u.div_ceil(n_c.min(n_h));
    let blocks_needed = n_c.div_ceil(n_h);
    let pilots_per_ue = match rule {
        NvRule::PerCoherenceBlock => blocks_needed.max(1),
        NvRule::Single => blocks_needed.min(1),
    };
    // near-equal contiguous split of the group into one block per pilot
    let blocks: Vec<Range<usize>> = (0..pilots_per_ue)
        .map(|b| (b * n_c / pilots_per_ue)..((b + 1) * n_c / pilots_per_ue))
        .collect();
    let mut rosters = vec![Vec::new(); n_c];
    for block in &blocks {
        let width = block.len();
        for k in 0..n_u {
            rosters[block.start + k % width].push(k);
        }
    }
    PilotPlan {
        pilot_length,
        pilots_per_ue,
        n_coherence: n_h,
        blocks,
        rosters,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    Uniform,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    pub n_groups: usize,
    pub users_per_group: usize,
    pub subcarriers_per_group: usize,
    /// 0-based subcarrier ranges, one per group.
    pub subcarrier_groups: Vec<Range<usize>>,
    /// 0-based UE ranges, one per group; group `g` of UEs uses subcarrier group `g`.
    pub ue_groups: Vec<Range<usize>>,
    pub pilot: PilotPlan,
    /// Row-major `[subcarrier][slot]` power coefficients.
    eta: Vec<f64>,
}

impl AllocationPlan {
    pub fn n_subcarriers(&self) -> usize {
        self.n_groups * self.subcarriers_per_group
    }

    pub fn eta(&self, subcarrier: usize, slot: usize) -> f64 {
        self.eta[subcarrier * self.users_per_group + slot]
    }

    /// Total power coefficient on a subcarrier, summed over its slots.
    pub fn eta_bar(&self, subcarrier: usize) -> f64 {
        let row = subcarrier * self.users_per_group;
        self.eta[row..row + self.users_per_group].iter().sum()
    }

    pub fn group_of_subcarrier(&self, subcarrier: usize) -> usize {
        subcarrier / self.subcarriers_per_group
    }

    /// Global UE index behind slot `k` of subcarrier `j`.
    pub fn ue_index(&self, subcarrier: usize, slot: usize) -> usize {
        self.ue_groups[self.group_of_subcarrier(subcarrier)].start + slot
    }

    /// Sum of a UE's coefficients over its group's subcarriers.
    pub fn ue_power_sum(&self, group: usize, slot: usize) -> f64 {
        self.subcarrier_groups[group]
            .clone()
            .map(|j| self.eta(j, slot))
            .sum()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.subcarriers_per_group as f64;
        self.eta.iter().all(|&e| e == u)
    }
}

pub fn build_allocation(cfg: &ValidConfig) -> AllocationPlan {
    let l = cfg.n_groups();
    let n_c = cfg.subcarriers_per_user;
    let n_u = cfg.users_per_subcarrier;
    AllocationPlan {
        n_groups: l,
        users_per_group: n_u,
        subcarriers_per_group: n_c,
        subcarrier_groups: (0..l).map(|g| g * n_c..(g + 1) * n_c).collect(),
        ue_groups: (0..l).map(|g| g * n_u..(g + 1) * n_u).collect(),
        pilot: pilot_plan(cfg, cfg.nv_rule),
        eta: vec![1.0 / n_c as f64; l * n_c * n_u],
    }
}

/// Returns `plan` with fresh power coefficients.
///
/// Random mode gives each UE a point drawn uniformly from the simplex over its
/// group's subcarriers, as the spacings of sorted uniforms.
pub fn sample_power_coefficients(
    plan: &AllocationPlan,
    mode: PowerMode,
    seed: u64,
) -> AllocationPlan {
    let mut out = plan.clone();
    let n_c = plan.subcarriers_per_group;
    let n_u = plan.users_per_group;
    match mode {
        PowerMode::Uniform => out.eta.fill(1.0 / n_c as f64),
        PowerMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cuts = vec![0.0; n_c + 1];
            for g in 0..plan.n_groups {
                for k in 0..n_u {
                    cuts[0] = 0.0;
                    cuts[n_c] = 1.0;
                    for c in cuts.iter_mut().take(n_c).skip(1) {
                        *c = rng.random::<f64>();
                    }
                    cuts[1..n_c].sort_by(f64::total_cmp);
                    let base = g * n_c;
                    let mut acc = 0.0;
                    for c in 0..n_c {
                        // last spacing absorbs rounding so the row sums to one
                        let e = if c + 1 == n_c {
                            1.0 - acc
                        } else {
                            cuts[c + 1] - cuts[c]
                        };
                        acc += e;
                        out.eta[(base + c) * n_u + k] = e;
                    }
                }
            }
        }
    }
    out
}
