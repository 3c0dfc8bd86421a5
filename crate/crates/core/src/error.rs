use thiserror::Error;

use crate::energy::BsMode;
use crate::topology::BsKind;

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("{field} must be finite and positive, got {value}")]
    InvalidRadius { field: &'static str, value: f64 },
    #[error(
        "{} #{} and {} #{} are {distance:.1} m apart (minimum separation {min_separation} m)",
        first.1, first.0, second.1, second.0
    )]
    TooClose {
        first: (usize, BsKind),
        second: (usize, BsKind),
        distance: f64,
        min_separation: f64,
    },
    #[error("{kind} #{id} lies {norm:.1} m from the macro site, outside the macro cell")]
    OutsideMacroCell { id: usize, kind: BsKind, norm: f64 },
    #[error("could not place {kind} after {placed} stations without violating the minimum separation")]
    PlacementExhausted { kind: BsKind, placed: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("link distance must be positive, got {0} m")]
    ZeroDistance(f64),
    #[error("serving station #{0} is not active")]
    InactiveServer(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("used bandwidth {used} Hz exceeds total bandwidth {total} Hz")]
    OverSubscribed { used: f64, total: f64 },
    #[error("{kind} cannot enter {target:?} mode")]
    IllegalTransition { kind: BsKind, target: BsMode },
}

/// One offending configuration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("invalid configuration:{}", format_issues(.0))]
    Invalid(Vec<FieldIssue>),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

fn format_issues(issues: &[FieldIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("\n  {}: {}", i.field, i.message))
        .collect()
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("sweep grid is empty: {0}")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
