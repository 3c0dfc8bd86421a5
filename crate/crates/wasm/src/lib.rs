//! Browser bindings for the hcn-sim demo page.
//!
//! Each export returns a JSON string. The plain functions do the work so
//! they can be tested natively; the `#[wasm_bindgen]` wrappers only turn
//! errors into JS exceptions.

use hcn_sim::energy::{bs_power, consumption, grid_draw};
use hcn_sim::topology::Site;
use hcn_sim::{
    run_sweep, BaseStation, BsKind, BsMode, PowerModel, SchemeKind, SimConfig, Simulator, SweepConfig,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bound on samples per cell so a click never freezes the page for long.
pub const MAX_DEMO_SAMPLES: usize = 200;

#[derive(Debug, Serialize)]
pub struct StationView {
    pub id: usize,
    pub kind: &'static str,
    pub x: f64,
    pub y: f64,
    pub mode: &'static str,
    pub p_tx: f64,
    pub radius: f64,
    pub users: usize,
    pub harvested: f64,
    pub consumed: f64,
    pub grid: f64,
}

#[derive(Debug, Serialize)]
pub struct UserView {
    pub x: f64,
    pub y: f64,
    pub server: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Snapshot {
    pub scheme: &'static str,
    pub macro_radius: f64,
    pub stations: Vec<StationView>,
    pub users: Vec<UserView>,
    pub grid_power: f64,
    pub sum_rate: f64,
    pub unserved: usize,
    pub iterations: usize,
}

#[derive(Debug, Serialize)]
pub struct CurvePoint {
    pub scheme: &'static str,
    pub lambda_e: f64,
    pub density: f64,
    pub grid_power: f64,
    pub sum_rate: f64,
    pub energy_efficiency: f64,
}

fn parse_scheme(name: &str) -> Result<SchemeKind, String> {
    name.parse()
}

fn parse_kind(name: &str) -> Result<BsKind, String> {
    BsKind::ALL
        .into_iter()
        .find(|k| k.label().eq_ignore_ascii_case(name))
        .ok_or_else(|| format!("unknown station kind {name:?}"))
}

fn mode_label(mode: BsMode) -> &'static str {
    match mode {
        BsMode::Active => "active",
        BsMode::Sleep => "sleep",
        BsMode::Off => "off",
    }
}

fn check_density(density: f64) -> Result<(), String> {
    if density.is_finite() && (0.0..=2000.0).contains(&density) {
        Ok(())
    } else {
        Err(format!("density must be in [0, 2000], got {density}"))
    }
}

/// One sample of `scheme` with every station and user, for drawing.
pub fn snapshot(scheme: &str, density: f64, lambda_e: f64, seed: u64) -> Result<Snapshot, String> {
    let scheme = parse_scheme(scheme)?;
    check_density(density)?;
    if !(lambda_e.is_finite() && lambda_e >= 0.0) {
        return Err(format!("harvest rate must be >= 0, got {lambda_e}"));
    }
    let sim = Simulator::new(SimConfig::default()).map_err(|e| e.to_string())?;
    let (state, result, outcome) = sim
        .run_sample_detailed(scheme, density, lambda_e, seed)
        .map_err(|e| e.to_string())?;
    let alpha = state.path_loss_exponent;
    let stations = state
        .stations
        .iter()
        .map(|b| StationView {
            id: b.id,
            kind: b.kind.label(),
            x: b.position.x,
            y: b.position.y,
            mode: mode_label(b.mode),
            p_tx: b.p_tx,
            radius: if b.kind == BsKind::Mbs {
                state.macro_radius
            } else {
                b.coverage_radius(alpha)
            },
            users: b.users,
            harvested: b.harvested,
            consumed: consumption(b),
            grid: grid_draw(b),
        })
        .collect();
    let users = state
        .users
        .iter()
        .map(|u| UserView {
            x: u.position.x,
            y: u.position.y,
            server: u.server,
        })
        .collect();
    Ok(Snapshot {
        scheme: scheme.label(),
        macro_radius: state.macro_radius,
        stations,
        users,
        grid_power: outcome.grid_power,
        sum_rate: outcome.sum_rate,
        unserved: outcome.unserved,
        iterations: result.iterations,
    })
}

/// Mean grid power, sum rate and energy efficiency of all three schemes
/// over `densities`, with `n_samples` samples per cell.
pub fn curves(densities: &[f64], lambda_e: f64, n_samples: usize, seed: u64) -> Result<Vec<CurvePoint>, String> {
    if densities.is_empty() {
        return Err("no densities given".into());
    }
    for &d in densities {
        check_density(d)?;
    }
    if n_samples == 0 || n_samples > MAX_DEMO_SAMPLES {
        return Err(format!("samples must be in 1..={MAX_DEMO_SAMPLES}, got {n_samples}"));
    }
    let sim = Simulator::new(SimConfig::default()).map_err(|e| e.to_string())?;
    let sweep = SweepConfig {
        densities: densities.to_vec(),
        lambda_e: vec![lambda_e],
        n_samples,
        master_seed: seed,
        ..SweepConfig::default()
    };
    let rows = run_sweep(&sim, &sweep).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .map(|r| CurvePoint {
            scheme: r.scheme.label(),
            lambda_e: r.lambda_e,
            density: r.density,
            grid_power: r.grid_power.mean,
            sum_rate: r.sum_rate.mean,
            energy_efficiency: r.energy_efficiency.mean,
        })
        .collect())
}

/// Draw of a default station of `kind` at the given load share in [0, 1].
pub fn station_power(kind: &str, load: f64) -> Result<f64, String> {
    let kind = parse_kind(kind)?;
    if !(0.0..=1.0).contains(&load) {
        return Err(format!("load must be in [0, 1], got {load}"));
    }
    let model = if kind == BsKind::Mbs {
        PowerModel::macro_default()
    } else {
        PowerModel::small_default()
    };
    let site = Site {
        kind,
        position: hcn_sim::Position::ORIGIN,
        nominal_radius: 350.0,
    };
    let bs = BaseStation::new(0, &site, model, 1);
    bs_power(&bs, load * model.total_bandwidth).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = snapshot)]
pub fn snapshot_js(scheme: &str, density: f64, lambda_e: f64, seed: u32) -> Result<String, JsError> {
    let snap = snapshot(scheme, density, lambda_e, seed as u64).map_err(|e| JsError::new(&e))?;
    to_json(&snap)
}

#[wasm_bindgen(js_name = curves)]
pub fn curves_js(densities: Vec<f64>, lambda_e: f64, n_samples: u32, seed: u32) -> Result<String, JsError> {
    let points = curves(&densities, lambda_e, n_samples as usize, seed as u64).map_err(|e| JsError::new(&e))?;
    to_json(&points)
}

#[wasm_bindgen(js_name = stationPower)]
pub fn station_power_js(kind: &str, load: f64) -> Result<f64, JsError> {
    station_power(kind, load).map_err(|e| JsError::new(&e))
}
