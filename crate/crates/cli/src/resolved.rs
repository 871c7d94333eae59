//! Fully resolved parameter sets: config file and flags merged, defaults
//! filled in. A manifest stores one of these, and executing it again
//! reproduces the run's artifacts.

use pingpong_core::attack::AttackParams;
use pingpong_core::channel::ChannelParams;
use pingpong_core::protocol::{BackwardChannelParams, SessionConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyrateParams {
    pub p01_prime: f64,
    pub p10_prime: f64,
    pub eta_bwd: f64,
    pub qber: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub channel: ChannelParams,
    pub from_km: f64,
    pub to_km: f64,
    pub step_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub session: SessionConfig,
    pub attack: AttackParams,
    pub backward: BackwardChannelParams,
    pub transcript: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackRunParams {
    pub attack: AttackParams,
    pub eta_bwd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "snake_case")]
pub enum Resolved {
    Keyrate(KeyrateParams),
    Sweep(SweepParams),
    Simulate(SimulateParams),
    Attack(AttackRunParams),
}

impl Resolved {
    pub fn name(&self) -> &'static str {
        match self {
            Resolved::Keyrate(_) => "keyrate",
            Resolved::Sweep(_) => "sweep",
            Resolved::Simulate(_) => "simulate",
            Resolved::Attack(_) => "attack",
        }
    }

    pub fn rng_seed(&self) -> Option<u64> {
        match self {
            Resolved::Simulate(p) => Some(p.session.rng_seed),
            _ => None,
        }
    }
}
