//! TOML run configuration.
//!
//! The file mirrors the defaults exactly, so an empty file is a valid
//! configuration and the echoed effective config reproduces a run. Counts
//! are read as signed integers so that a negative value is reported against
//! its field instead of failing inside the TOML decoder.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::association::{AlgoParams, SchemeKind};
use crate::channel::Fading;
use crate::energy::PowerModel;
use crate::error::{ConfigError, FieldIssue};
use crate::simulation::{EeEstimator, SimConfig, SweepConfig};
use crate::topology::{build_layout, LayoutConfig, Placement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutSection {
    pub macro_radius: f64,
    pub small_cell_radius: f64,
    pub n_csbs: i64,
    pub n_rsbs: i64,
    pub n_hsbs: i64,
    pub min_separation: f64,
    /// `"rings"` or `"uniform_random"`.
    pub placement: String,
    /// Seed for `uniform_random` placement.
    pub placement_seed: i64,
}

impl Default for LayoutSection {
    fn default() -> Self {
        let d = LayoutConfig::default();
        Self {
            macro_radius: d.macro_radius,
            small_cell_radius: d.small_cell_radius,
            n_csbs: d.n_csbs as i64,
            n_rsbs: d.n_rsbs as i64,
            n_hsbs: d.n_hsbs as i64,
            min_separation: d.min_separation,
            placement: "rings".into(),
            placement_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub p_const: f64,
    pub beta: f64,
    pub p_tx: f64,
    pub total_bandwidth: f64,
    pub n_subcarriers: i64,
    pub sleep_power: f64,
}

impl PowerSection {
    fn from_model(m: &PowerModel) -> Self {
        Self {
            p_const: m.p_const,
            beta: m.beta,
            p_tx: m.p_tx,
            total_bandwidth: m.total_bandwidth,
            n_subcarriers: m.n_subcarriers as i64,
            sleep_power: m.sleep_power,
        }
    }
}

impl Default for PowerSection {
    fn default() -> Self {
        Self::from_model(&PowerModel::small_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModels {
    #[serde(rename = "macro")]
    pub macro_cell: PowerSection,
    pub small: PowerSection,
}

impl Default for PowerModels {
    fn default() -> Self {
        Self {
            macro_cell: PowerSection::from_model(&PowerModel::macro_default()),
            small: PowerSection::from_model(&PowerModel::small_default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub path_loss_exponent: f64,
    pub fading: Fading,
    pub subcarriers_per_user: i64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            path_loss_exponent: 3.5,
            fading: Fading::Rayleigh,
            subcarriers_per_user: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmSection {
    pub u_min: i64,
    pub n_th: i64,
    pub margin: f64,
    pub step: f64,
    pub max_iter: i64,
    /// Small-cell transmit power bounds, watts.
    pub p_min: f64,
    pub p_max: f64,
    pub rf_only_ledger: bool,
    pub shrink_to_load: bool,
}

impl Default for AlgorithmSection {
    fn default() -> Self {
        let a = AlgoParams::default();
        let small = PowerModel::small_default();
        Self {
            u_min: a.u_min as i64,
            n_th: a.n_th as i64,
            margin: a.margin,
            step: a.step,
            max_iter: a.max_iter as i64,
            p_min: small.p_tx_min,
            p_max: small.p_tx_max,
            rf_only_ledger: a.rf_only_ledger,
            shrink_to_load: a.shrink_to_load,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub schemes: Vec<String>,
    pub densities: Vec<f64>,
    pub lambda_e: Vec<f64>,
    pub n_samples: i64,
    pub master_seed: i64,
    pub ee_estimator: EeEstimator,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        Self {
            schemes: s.schemes.iter().map(|k| k.label().to_string()).collect(),
            densities: s.densities,
            lambda_e: s.lambda_e,
            n_samples: s.n_samples as i64,
            master_seed: s.master_seed as i64,
            ee_estimator: s.ee_estimator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Also write per-figure CSVs and gnuplot scripts.
    pub plot_data: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            plot_data: true,
        }
    }
}

/// Everything a `run` needs, as written in the config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub layout: LayoutSection,
    pub power: PowerModels,
    pub channel: ChannelSection,
    pub algorithm: AlgorithmSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

/// A checked configuration ready to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidConfig {
    pub sim: SimConfig,
    pub sweep: SweepConfig,
    pub output: OutputSection,
}

struct Issues(Vec<FieldIssue>);

impl Issues {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldIssue {
            field: field.into(),
            message: message.into(),
        });
    }

    fn count(&mut self, field: &str, v: i64, min: i64) -> usize {
        if v < min {
            self.push(field, format!("must be an integer >= {min}, got {v}"));
            return min.max(0) as usize;
        }
        v as usize
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.push(field, format!("must be finite and > 0, got {v}"));
        }
    }

    fn non_negative(&mut self, field: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.push(field, format!("must be finite and >= 0, got {v}"));
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The effective configuration as TOML, suitable for re-running.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config sections are plain TOML values")
    }

    /// Checks every field, collecting all problems, then builds the layout
    /// once to catch geometric conflicts.
    pub fn validate(&self) -> Result<ValidConfig, ConfigError> {
        let mut issues = Issues(Vec::new());
        let l = &self.layout;
        issues.positive("layout.macro_radius", l.macro_radius);
        issues.positive("layout.small_cell_radius", l.small_cell_radius);
        issues.non_negative("layout.min_separation", l.min_separation);
        let n_csbs = issues.count("layout.n_csbs", l.n_csbs, 0);
        let n_rsbs = issues.count("layout.n_rsbs", l.n_rsbs, 0);
        let n_hsbs = issues.count("layout.n_hsbs", l.n_hsbs, 0);
        let placement = match l.placement.as_str() {
            "rings" => Placement::Rings,
            "uniform_random" => {
                let seed = issues.count("layout.placement_seed", l.placement_seed, 0);
                Placement::UniformRandom { seed: seed as u64 }
            }
            other => {
                issues.push(
                    "layout.placement",
                    format!("expected \"rings\" or \"uniform_random\", got {other:?}"),
                );
                Placement::Rings
            }
        };

        let a = &self.algorithm;
        let mut models = Vec::new();
        for (name, section, small) in [
            ("power.macro", &self.power.macro_cell, false),
            ("power.small", &self.power.small, true),
        ] {
            let n_sub = issues.count(&format!("{name}.n_subcarriers"), section.n_subcarriers, 1);
            issues.positive(&format!("{name}.p_tx"), section.p_tx);
            // The macro never adapts its power; small cells use the
            // algorithm bounds.
            let (lo, hi) = if small { (a.p_min, a.p_max) } else { (section.p_tx, section.p_tx) };
            let model = PowerModel {
                p_const: section.p_const,
                beta: section.beta,
                p_tx: section.p_tx,
                p_tx_min: lo,
                p_tx_max: hi,
                total_bandwidth: section.total_bandwidth,
                n_subcarriers: n_sub,
                sleep_power: section.sleep_power,
            };
            for (field, message) in model.check() {
                let field = match field {
                    "p_tx" if small => "algorithm.p_min/p_tx/p_max".to_string(),
                    f => format!("{name}.{f}"),
                };
                issues.push(field, message);
            }
            models.push(model);
        }

        let c = &self.channel;
        issues.positive("channel.path_loss_exponent", c.path_loss_exponent);
        let spu = issues.count("channel.subcarriers_per_user", c.subcarriers_per_user, 1);
        let fewest = models.iter().map(|m| m.n_subcarriers).min().unwrap_or(1);
        if spu > fewest {
            issues.push(
                "channel.subcarriers_per_user",
                format!("exceeds the {fewest} sub-carriers of the smallest station"),
            );
        }

        let u_min = issues.count("algorithm.u_min", a.u_min, 0);
        let n_th = issues.count("algorithm.n_th", a.n_th, 0);
        let max_iter = issues.count("algorithm.max_iter", a.max_iter, 1);
        issues.positive("algorithm.margin", a.margin);
        if !(a.step > 0.0 && a.step < 1.0) {
            issues.push("algorithm.step", format!("must lie in (0, 1), got {}", a.step));
        }

        let s = &self.sweep;
        let mut schemes = Vec::new();
        for label in &s.schemes {
            match label.parse::<SchemeKind>() {
                Ok(k) => schemes.push(k),
                Err(e) => issues.push("sweep.schemes", e.to_string()),
            }
        }
        for (field, grid) in [("sweep.schemes", s.schemes.len()), ("sweep.densities", s.densities.len()), ("sweep.lambda_e", s.lambda_e.len())] {
            if grid == 0 {
                issues.push(field, "must not be empty");
            }
        }
        for &d in &s.densities {
            issues.non_negative("sweep.densities", d);
        }
        for &x in &s.lambda_e {
            issues.non_negative("sweep.lambda_e", x);
        }
        let n_samples = issues.count("sweep.n_samples", s.n_samples, 1);
        let master_seed = issues.count("sweep.master_seed", s.master_seed, 0) as u64;

        if !issues.0.is_empty() {
            return Err(ConfigError::Invalid(issues.0));
        }

        let sim = SimConfig {
            layout: LayoutConfig {
                macro_radius: l.macro_radius,
                small_cell_radius: l.small_cell_radius,
                n_csbs,
                n_rsbs,
                n_hsbs,
                min_separation: l.min_separation,
                placement,
            },
            macro_power: models[0],
            small_power: models[1],
            path_loss_exponent: c.path_loss_exponent,
            fading: c.fading,
            subcarriers_per_user: spu,
            algorithm: AlgoParams {
                u_min,
                n_th,
                margin: a.margin,
                step: a.step,
                max_iter,
                rf_only_ledger: a.rf_only_ledger,
                shrink_to_load: a.shrink_to_load,
            },
        };
        build_layout(&sim.layout)?;
        let sweep = SweepConfig {
            schemes,
            densities: s.densities.clone(),
            lambda_e: s.lambda_e.clone(),
            n_samples,
            master_seed,
            threads: None,
            ee_estimator: s.ee_estimator,
        };
        Ok(ValidConfig {
            sim,
            sweep,
            output: self.output.clone(),
        })
    }
}
