//! System-level Monte Carlo simulator for a single macro cell of a
//! heterogeneous cellular network with energy-harvesting small cells.
//!
//! The crate models grid-powered (CSBS), renewable (RSBS) and hybrid (HSBS)
//! small cells around a macro base station, associates Poisson-distributed
//! users under three schemes, and reports on-grid power, sum rate and energy
//! efficiency.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod oracle;
pub mod output;
pub mod simulation;
pub mod state;
pub mod topology;

pub use association::{AlgoParams, AssociationResult, SchemeKind, UserClass};
pub use config::{RunConfig, ValidConfig};
pub use energy::{BsMode, EnergyLedger, PowerModel};
pub use error::{ChannelError, ConfigError, EnergyError, LayoutError, SimError};
pub use output::{emit_plot_data, MetricsWriter};
pub use simulation::{run_sweep, run_sweep_with, EeEstimator, Estimate, MetricsRow, SampleOutcome, SimConfig, Simulator, SweepConfig};
pub use state::{BaseStation, NetworkState, UserTerminal};
pub use topology::{build_layout, sample_users, BsKind, LayoutConfig, NetworkLayout, Position};
