//! Power consumption, harvested energy and the base-station mode table.
//!
//! An active station draws `P_c + beta * (w / W) * P_t`: a constant part for
//! baseband and cooling plus an RF part that scales with the share of
//! bandwidth in use. Time slots are one second long, so joules per slot and
//! watts are used interchangeably.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::EnergyError;
use crate::state::{BaseStation, NetworkState};
use crate::topology::BsKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BsMode {
    Active,
    Sleep,
    Off,
}

impl BsMode {
    pub const ALL: [BsMode; 3] = [BsMode::Active, BsMode::Sleep, BsMode::Off];
}

/// Modes each tier may take: the macro and hybrid cells are always on,
/// conventional cells can sleep and renewable cells can switch off.
pub fn allowed_modes(kind: BsKind) -> &'static [BsMode] {
    match kind {
        BsKind::Mbs => &[BsMode::Active],
        BsKind::Csbs => &[BsMode::Active, BsMode::Sleep],
        BsKind::Rsbs => &[BsMode::Active, BsMode::Off],
        BsKind::Hsbs => &[BsMode::Active],
    }
}

pub fn is_allowed(kind: BsKind, mode: BsMode) -> bool {
    allowed_modes(kind).contains(&mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    /// Constant power for baseband and cooling, watts.
    pub p_const: f64,
    /// Inverse power-amplifier efficiency.
    pub beta: f64,
    /// Nominal transmit power, watts.
    pub p_tx: f64,
    pub p_tx_min: f64,
    pub p_tx_max: f64,
    /// Total bandwidth, hertz.
    pub total_bandwidth: f64,
    pub n_subcarriers: usize,
    /// Draw while sleeping, watts.
    pub sleep_power: f64,
}

impl PowerModel {
    pub fn macro_default() -> Self {
        Self {
            p_const: 354.44,
            beta: 21.45,
            p_tx: 40.0,
            p_tx_min: 40.0,
            p_tx_max: 40.0,
            total_bandwidth: 10e6,
            n_subcarriers: 1000,
            sleep_power: 0.0,
        }
    }

    pub fn small_default() -> Self {
        Self {
            p_const: 38.0,
            beta: 5.5,
            p_tx: 30.0,
            p_tx_min: 1.0,
            p_tx_max: 30.0,
            total_bandwidth: 5e6,
            n_subcarriers: 500,
            sleep_power: 0.0,
        }
    }

    /// Maximum active draw, reached when every sub-carrier is in use.
    pub fn full_load_power(&self) -> f64 {
        self.p_const + self.beta * self.p_tx
    }

    pub fn subcarrier_bandwidth(&self) -> f64 {
        self.total_bandwidth / self.n_subcarriers as f64
    }

    /// Returns the names and reasons of every violated invariant.
    pub fn check(&self) -> Vec<(&'static str, String)> {
        let mut issues = Vec::new();
        let positive = [
            ("p_const", self.p_const),
            ("beta", self.beta),
            ("total_bandwidth", self.total_bandwidth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                issues.push((name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.n_subcarriers == 0 {
            issues.push(("n_subcarriers", "must be at least 1".to_string()));
        }
        if !(self.sleep_power.is_finite() && self.sleep_power >= 0.0) {
            issues.push(("sleep_power", format!("must be >= 0, got {}", self.sleep_power)));
        }
        if !(0.0 <= self.p_tx_min && self.p_tx_min <= self.p_tx && self.p_tx <= self.p_tx_max) {
            issues.push((
                "p_tx",
                format!(
                    "need 0 <= p_tx_min ({}) <= p_tx ({}) <= p_tx_max ({})",
                    self.p_tx_min, self.p_tx, self.p_tx_max
                ),
            ));
        }
        issues
    }
}

/// Harvested versus consumed energy of one energy-harvesting cell for one
/// slot. `delta` is always `harvested - consumed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub harvested: f64,
    pub consumed: f64,
    pub margin: f64,
    pub delta: f64,
}

impl EnergyLedger {
    pub fn new(harvested: f64, margin: f64) -> Self {
        Self {
            harvested,
            consumed: 0.0,
            margin,
            delta: harvested,
        }
    }

    /// True when `delta` lies in the target band `[0, margin]`.
    pub fn settled(&self) -> bool {
        self.delta >= 0.0 && self.delta <= self.margin
    }
}

/// Records this slot's consumption. Nothing carries over between slots.
pub fn ledger_update(ledger: EnergyLedger, consumed: f64) -> EnergyLedger {
    EnergyLedger {
        consumed,
        delta: ledger.harvested - consumed,
        ..ledger
    }
}

/// Largest Poisson mean handled by a single inverse-CDF draw; `exp(-mean)`
/// stays well clear of underflow.
const HARVEST_CHUNK: f64 = 400.0;

/// Smallest `k` with `P(X <= k) >= u` for `X ~ Poisson(mean)`.
///
/// For a fixed `u` the result is nondecreasing in `mean`.
pub fn poisson_inverse_cdf(mean: f64, u: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p < f64::MIN_POSITIVE && k as f64 > mean {
            break;
        }
    }
    k
}

/// Number of unit-energy packets (joules) that arrive in one slot at rate
/// `rate` J/s.
///
/// Uses inverse-CDF sampling so two calls with the same generator state and
/// rates `a <= b` return harvests `h(a) <= h(b)`. Rates above the chunk size
/// are split into independent Poisson pieces.
pub fn harvest_energy<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if !(rate.is_finite() && rate > 0.0) {
        return 0.0;
    }
    let mut remaining = rate;
    let mut total = 0u64;
    while remaining > 0.0 {
        let piece = remaining.min(HARVEST_CHUNK);
        total += poisson_inverse_cdf(piece, rng.random::<f64>());
        remaining -= piece;
    }
    total as f64
}

/// Power drawn by `bs` with `used_bandwidth` hertz in use.
///
/// Sleeping stations draw `sleep_power` and switched-off stations nothing.
pub fn bs_power(bs: &BaseStation, used_bandwidth: f64) -> Result<f64, EnergyError> {
    let m = &bs.model;
    if !(used_bandwidth >= 0.0) || used_bandwidth > m.total_bandwidth * (1.0 + 1e-12) {
        return Err(EnergyError::OverSubscribed {
            used: used_bandwidth,
            total: m.total_bandwidth,
        });
    }
    Ok(match bs.mode {
        BsMode::Active => m.p_const + m.beta * (used_bandwidth / m.total_bandwidth) * bs.p_tx,
        BsMode::Sleep => m.sleep_power,
        BsMode::Off => 0.0,
    })
}

/// RF part of the active draw only.
pub fn rf_power(bs: &BaseStation) -> f64 {
    match bs.mode {
        BsMode::Active => bs.model.beta * (bs.used_bandwidth / bs.model.total_bandwidth) * bs.p_tx,
        _ => 0.0,
    }
}

/// Current draw of `bs` given its bandwidth ledger.
pub fn consumption(bs: &BaseStation) -> f64 {
    bs_power(bs, bs.used_bandwidth.min(bs.model.total_bandwidth))
        .expect("bandwidth ledger is bounded by total bandwidth")
}

/// Energy an energy-harvesting cell books against its harvest. With
/// `rf_only` set only the RF term counts.
pub fn ledger_consumption(bs: &BaseStation, rf_only: bool) -> f64 {
    if rf_only {
        rf_power(bs)
    } else {
        consumption(bs)
    }
}

/// Share of a station's draw that comes from the grid.
///
/// Renewable cells never touch the grid, hybrid cells spend their harvest
/// first and top up the remainder, and grid cells draw everything.
pub fn grid_draw(bs: &BaseStation) -> f64 {
    match bs.kind {
        BsKind::Rsbs => 0.0,
        BsKind::Hsbs => (consumption(bs) - bs.harvested).max(0.0),
        BsKind::Mbs | BsKind::Csbs => consumption(bs),
    }
}

/// Total on-grid power of the network.
pub fn grid_power(state: &NetworkState) -> f64 {
    state.stations.iter().map(grid_draw).sum()
}

/// Moves `bs` into `target`, shedding its users when it stops serving.
pub fn mode_transition(mut bs: BaseStation, target: BsMode) -> Result<BaseStation, EnergyError> {
    if !is_allowed(bs.kind, target) {
        return Err(EnergyError::IllegalTransition {
            kind: bs.kind,
            target,
        });
    }
    bs.mode = target;
    if target != BsMode::Active {
        bs.users = 0;
        bs.used_bandwidth = 0.0;
    }
    Ok(bs)
}
