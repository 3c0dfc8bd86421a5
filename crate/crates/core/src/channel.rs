//! Path loss, signal-to-interference ratio and Shannon rate.
//!
//! Thermal noise is neglected; every active station other than the server
//! interferes at its current transmit power.

use serde::{Deserialize, Serialize};

use crate::error::ChannelError;
use crate::state::{BsId, NetworkState};

/// SIR reported when a user sees no interferer at all (about 90 dB).
pub const SIR_CAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    /// Unit-mean exponential power gain per link.
    #[default]
    Rayleigh,
    /// Every gain is exactly one.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGain {
    pub path_loss_exponent: f64,
    pub fading: f64,
    pub distance: f64,
}

/// `p_tx * h * r^-alpha`.
pub fn received_power(p_tx: f64, gain: LinkGain) -> Result<f64, ChannelError> {
    if !(gain.distance > 0.0) {
        return Err(ChannelError::ZeroDistance(gain.distance));
    }
    Ok(p_tx * gain.fading * path_gain(gain.distance, gain.path_loss_exponent))
}

/// `r^-alpha`, with a `powi`/`sqrt` fast path for half-integer exponents.
pub fn path_gain(distance: f64, path_loss_exponent: f64) -> f64 {
    let twice = 2.0 * path_loss_exponent;
    if twice.fract() == 0.0 && twice.abs() < 64.0 {
        let whole = path_loss_exponent.trunc() as i32;
        let attenuation = distance.powi(whole);
        if path_loss_exponent.fract() == 0.0 {
            1.0 / attenuation
        } else {
            1.0 / (attenuation * distance.sqrt())
        }
    } else {
        distance.powf(-path_loss_exponent)
    }
}

fn link(state: &NetworkState, user: usize, bs: BsId) -> LinkGain {
    LinkGain {
        path_loss_exponent: state.path_loss_exponent,
        fading: state.fading(user, bs),
        distance: state.distance(user, bs),
    }
}

/// SIR of `user` when served by `server`.
pub fn sir(state: &NetworkState, user: usize, server: BsId) -> Result<f64, ChannelError> {
    let serving = &state.stations[server];
    if !serving.is_active() {
        return Err(ChannelError::InactiveServer(server));
    }
    let signal = received_power(serving.p_tx, link(state, user, server))?;
    let mut interference = 0.0;
    for bs in state.stations.iter().filter(|b| b.is_active() && b.id != server) {
        interference += received_power(bs.p_tx, link(state, user, bs.id))?;
    }
    if interference <= 0.0 {
        return Ok(SIR_CAP);
    }
    Ok((signal / interference).min(SIR_CAP))
}

/// Achievable rate `B * log2(1 + sir)` in bits per second.
pub fn user_rate(bandwidth: f64, sir: f64) -> f64 {
    bandwidth * (1.0 + sir).log2()
}

/// Sum of achievable rates over every served user.
pub fn sum_rate(state: &NetworkState) -> Result<f64, ChannelError> {
    let mut total = 0.0;
    for u in &state.users {
        if let Some(server) = u.server {
            total += user_rate(u.bandwidth, sir(state, u.id, server)?);
        }
    }
    Ok(total)
}
