//! Monte Carlo engine.
//!
//! A sample is one slot: users are drawn, every energy-harvesting cell
//! harvests, the scheme runs, and on-grid power and sum rate are measured.
//! Samples are seeded from `(master seed, density, sample index)` only, so
//! all schemes and harvest rates at a given density see the same users,
//! fading and harvest uniforms (common random numbers).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::association::{run_scheme, AlgoParams, AssociationResult, SchemeKind};
use crate::channel::{sum_rate, Fading};
use crate::energy::{grid_power, harvest_energy, ledger_consumption, PowerModel};
use crate::error::{LayoutError, SimError};
use crate::state::NetworkState;
use crate::topology::{build_layout, sample_users, BsKind, LayoutConfig, NetworkLayout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub layout: LayoutConfig,
    pub macro_power: PowerModel,
    pub small_power: PowerModel,
    pub path_loss_exponent: f64,
    pub fading: Fading,
    pub subcarriers_per_user: usize,
    pub algorithm: AlgoParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            layout: LayoutConfig::default(),
            macro_power: PowerModel::macro_default(),
            small_power: PowerModel::small_default(),
            path_loss_exponent: 3.5,
            fading: Fading::Rayleigh,
            subcarriers_per_user: 1,
            algorithm: AlgoParams::default(),
        }
    }
}

/// How per-cell energy efficiency is estimated from the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EeEstimator {
    /// `mean(R) / mean(P)`: efficiency of the aggregate network.
    #[default]
    RatioOfMeans,
    /// `mean(R / P)`.
    MeanOfRatios,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub schemes: Vec<SchemeKind>,
    /// Expected users per macro cell.
    pub densities: Vec<f64>,
    /// Energy arrival rates, J/s.
    pub lambda_e: Vec<f64>,
    pub n_samples: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    pub ee_estimator: EeEstimator,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schemes: SchemeKind::ALL.to_vec(),
            densities: vec![0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 800.0, 1000.0],
            lambda_e: vec![44.0, 45.0],
            n_samples: 5000,
            master_seed: 1,
            threads: None,
            ee_estimator: EeEstimator::RatioOfMeans,
        }
    }
}

/// Measurements from one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub grid_power: f64,
    pub sum_rate: f64,
    pub users: usize,
    pub unserved: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Active renewable cells consuming more than they harvested.
    pub causality_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self::default();
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub scheme: SchemeKind,
    pub density: f64,
    pub lambda_e: f64,
    pub grid_power: Estimate,
    pub sum_rate: Estimate,
    pub energy_efficiency: Estimate,
    pub unconverged_fraction: f64,
    pub unserved_fraction: f64,
    pub samples: usize,
    pub causality_violations: usize,
}

impl MetricsRow {
    pub fn aggregate(
        scheme: SchemeKind,
        density: f64,
        lambda_e: f64,
        outcomes: &[SampleOutcome],
        estimator: EeEstimator,
    ) -> Self {
        let n = outcomes.len();
        let power: Vec<f64> = outcomes.iter().map(|o| o.grid_power).collect();
        let rate: Vec<f64> = outcomes.iter().map(|o| o.sum_rate).collect();
        let grid_power = Estimate::from_samples(&power);
        let sum_rate = Estimate::from_samples(&rate);

        let energy_efficiency = match estimator {
            EeEstimator::RatioOfMeans => {
                if grid_power.mean > 0.0 {
                    let ee = sum_rate.mean / grid_power.mean;
                    // Delta method on R - ee * P.
                    let resid: Vec<f64> = outcomes.iter().map(|o| o.sum_rate - ee * o.grid_power).collect();
                    let se = Estimate::from_samples(&resid).stderr / grid_power.mean;
                    Estimate { mean: ee, stderr: se }
                } else {
                    Estimate::default()
                }
            }
            EeEstimator::MeanOfRatios => {
                let ratios: Vec<f64> = outcomes
                    .iter()
                    .map(|o| if o.grid_power > 0.0 { o.sum_rate / o.grid_power } else { 0.0 })
                    .collect();
                Estimate::from_samples(&ratios)
            }
        };

        let total_users: usize = outcomes.iter().map(|o| o.users).sum();
        let unserved: usize = outcomes.iter().map(|o| o.unserved).sum();
        let unconverged = outcomes.iter().filter(|o| !o.converged).count();
        Self {
            scheme,
            density,
            lambda_e,
            grid_power,
            sum_rate,
            energy_efficiency,
            unconverged_fraction: if n == 0 { 0.0 } else { unconverged as f64 / n as f64 },
            unserved_fraction: if total_users == 0 {
                0.0
            } else {
                unserved as f64 / total_users as f64
            },
            samples: n,
            causality_violations: outcomes.iter().map(|o| o.causality_violations).sum(),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` at `density`. Independent of scheme and harvest
/// rate so those comparisons are paired.
pub fn sample_seed(master: u64, density: f64, index: u64) -> u64 {
    let cell = splitmix64(master ^ splitmix64(density.to_bits()));
    splitmix64(cell ^ splitmix64(index.wrapping_add(0x5151_5151)))
}

const USER_STREAM: u64 = 0;
const FADING_STREAM: u64 = 1;
const HARVEST_STREAM_BASE: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A validated configuration together with its prebuilt layout.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    layout: NetworkLayout,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self, LayoutError> {
        let layout = build_layout(&cfg.layout)?;
        Ok(Self { cfg, layout })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &NetworkLayout {
        &self.layout
    }

    /// Users, fading and harvest for one sample, before any scheme runs.
    pub fn build_state(&self, density: f64, lambda_e: f64, seed: u64) -> NetworkState {
        let mut user_rng = stream(seed, USER_STREAM);
        let users = sample_users(density, self.layout.macro_radius, &mut user_rng);
        let mut state = NetworkState::new(
            &self.layout,
            self.cfg.macro_power,
            self.cfg.small_power,
            self.cfg.path_loss_exponent,
            self.cfg.subcarriers_per_user,
            users,
        );
        if self.cfg.fading == Fading::Rayleigh {
            state.draw_rayleigh_fading(&mut stream(seed, FADING_STREAM));
        }
        for b in &mut state.stations {
            if b.kind.harvests_energy() {
                let mut rng = stream(seed, HARVEST_STREAM_BASE + b.id as u64);
                b.harvested = harvest_energy(lambda_e, &mut rng);
            }
        }
        state
    }

    /// Runs one scheme on one sample and returns the final state as well.
    pub fn run_sample_detailed(
        &self,
        scheme: SchemeKind,
        density: f64,
        lambda_e: f64,
        seed: u64,
    ) -> Result<(NetworkState, AssociationResult, SampleOutcome), SimError> {
        let mut state = self.build_state(density, lambda_e, seed);
        let result = run_scheme(&mut state, scheme, &self.cfg.algorithm);
        let rf_only = self.cfg.algorithm.rf_only_ledger;
        let outcome = SampleOutcome {
            grid_power: grid_power(&state),
            sum_rate: sum_rate(&state)?,
            users: state.users.len(),
            unserved: result.unserved(),
            converged: result.converged,
            iterations: result.iterations,
            causality_violations: state
                .stations
                .iter()
                .filter(|b| b.kind == BsKind::Rsbs && b.is_active())
                .filter(|b| ledger_consumption(b, rf_only) > b.harvested + 1e-9)
                .count(),
        };
        Ok((state, result, outcome))
    }

    pub fn run_sample(&self, scheme: SchemeKind, density: f64, lambda_e: f64, seed: u64) -> Result<SampleOutcome, SimError> {
        self.run_sample_detailed(scheme, density, lambda_e, seed)
            .map(|(_, _, o)| o)
    }

    /// All samples of one `(scheme, density, lambda_e)` cell, in index order.
    pub fn run_cell(
        &self,
        scheme: SchemeKind,
        density: f64,
        lambda_e: f64,
        sweep: &SweepConfig,
    ) -> Result<Vec<SampleOutcome>, SimError> {
        let one = |i: usize| self.run_sample(scheme, density, lambda_e, sample_seed(sweep.master_seed, density, i as u64));
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..sweep.n_samples).into_par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..sweep.n_samples).map(one).collect()
        }
    }
}

fn sorted_grid(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Runs every cell of the sweep grid, calling `on_row` as each cell
/// completes. Rows arrive sorted by `(scheme, lambda_e, density)`.
pub fn run_sweep_with<F>(sim: &Simulator, sweep: &SweepConfig, mut on_row: F) -> Result<Vec<MetricsRow>, SimError>
where
    F: FnMut(&MetricsRow) -> Result<(), SimError>,
{
    if sweep.schemes.is_empty() {
        return Err(SimError::EmptyGrid("schemes"));
    }
    if sweep.densities.is_empty() {
        return Err(SimError::EmptyGrid("densities"));
    }
    if sweep.lambda_e.is_empty() {
        return Err(SimError::EmptyGrid("lambda_e"));
    }
    let mut schemes = sweep.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let densities = sorted_grid(&sweep.densities);
    let lambdas = sorted_grid(&sweep.lambda_e);

    #[cfg(feature = "parallel")]
    let pool = match sweep.threads {
        Some(threads) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| SimError::Io(std::io::Error::other(e)))?,
        ),
        None => None,
    };
    let cell = |scheme, density, lambda_e| {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &pool {
            return pool.install(|| sim.run_cell(scheme, density, lambda_e, sweep));
        }
        sim.run_cell(scheme, density, lambda_e, sweep)
    };

    let mut rows = Vec::with_capacity(schemes.len() * densities.len() * lambdas.len());
    for &scheme in &schemes {
        for &lambda_e in &lambdas {
            for &density in &densities {
                let outcomes = cell(scheme, density, lambda_e)?;
                let row = MetricsRow::aggregate(scheme, density, lambda_e, &outcomes, sweep.ee_estimator);
                on_row(&row)?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

pub fn run_sweep(sim: &Simulator, sweep: &SweepConfig) -> Result<Vec<MetricsRow>, SimError> {
    run_sweep_with(sim, sweep, |_| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_sweep(n: usize) -> SweepConfig {
        SweepConfig {
            densities: vec![0.0, 100.0],
            n_samples: n,
            threads: Some(1),
            ..SweepConfig::default()
        }
    }

    #[test]
    fn zero_density_has_zero_rate() {
        let sim = Simulator::new(SimConfig::default()).unwrap();
        for scheme in SchemeKind::ALL {
            let o = sim.run_sample(scheme, 0.0, 44.0, 3).unwrap();
            assert_eq!(o.sum_rate, 0.0);
            assert_eq!(o.users, 0);
        }
    }

    #[test]
    fn samples_replay_bit_identically() {
        let sim = Simulator::new(SimConfig::default()).unwrap();
        for scheme in SchemeKind::ALL {
            let a = sim.run_sample(scheme, 300.0, 44.0, 99).unwrap();
            let b = sim.run_sample(scheme, 300.0, 44.0, 99).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn grid_cardinality_and_order() {
        let sim = Simulator::new(SimConfig::default()).unwrap();
        let sweep = SweepConfig {
            densities: vec![400.0, 0.0, 100.0, 200.0, 300.0],
            n_samples: 2,
            threads: Some(1),
            ..SweepConfig::default()
        };
        let rows = run_sweep(&sim, &sweep).unwrap();
        assert_eq!(rows.len(), 30);
        let keys: Vec<_> = rows.iter().map(|r| (r.scheme, r.lambda_e, r.density)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        assert_eq!(keys, sorted);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let sim = Simulator::new(SimConfig::default()).unwrap();
        let sweep = SweepConfig {
            densities: vec![],
            ..small_sweep(1)
        };
        assert!(matches!(run_sweep(&sim, &sweep), Err(SimError::EmptyGrid("densities"))));
    }

    #[test]
    fn stderr_shrinks_with_more_samples() {
        let sim = Simulator::new(SimConfig::default()).unwrap();
        let small = run_sweep(&sim, &SweepConfig { schemes: vec![SchemeKind::NearestBs], lambda_e: vec![44.0], densities: vec![200.0], ..small_sweep(50) }).unwrap();
        let large = run_sweep(&sim, &SweepConfig { schemes: vec![SchemeKind::NearestBs], lambda_e: vec![44.0], densities: vec![200.0], ..small_sweep(200) }).unwrap();
        let ratio = small[0].sum_rate.stderr / large[0].sum_rate.stderr;
        // Expect about 2; allow sampling noise in the stderr estimates.
        assert!((1.5..2.7).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn estimate_basics() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.stderr - sd / 2.0).abs() < 1e-12);
        assert_eq!(Estimate::from_samples(&[7.0]).stderr, 0.0);
    }

    #[test]
    fn ratio_of_means_estimator() {
        let mk = |p, r| SampleOutcome {
            grid_power: p,
            sum_rate: r,
            users: 1,
            unserved: 0,
            converged: true,
            iterations: 1,
            causality_violations: 0,
        };
        let outs = [mk(100.0, 1000.0), mk(300.0, 1000.0)];
        let rom = MetricsRow::aggregate(SchemeKind::Joint, 1.0, 44.0, &outs, EeEstimator::RatioOfMeans);
        assert_eq!(rom.energy_efficiency.mean, 5.0);
        let mor = MetricsRow::aggregate(SchemeKind::Joint, 1.0, 44.0, &outs, EeEstimator::MeanOfRatios);
        assert!((mor.energy_efficiency.mean - (10.0 + 10.0 / 3.0) / 2.0).abs() < 1e-12);
    }
}
