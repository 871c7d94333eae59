//! The shared configuration document. Every section is optional; commands
//! read the sections they need.
//!
//! ```json
//! {
//!   "attack":   {"p0v": 0.1, "p00": 0.88, "p01": 0.02, "p1v": 0.1, "p10": 0.02, "p11": 0.88},
//!   "backward": {"q_v0": 0.1, "q_00": 0.9, "q_01": 0.0, "q_v1": 0.1, "q_10": 0.0, "q_11": 0.9},
//!   "channel":  {"distance_km": 25.0},
//!   "session":  {"n_trials": 100000, "message_mode_prob": 0.5, "rng_seed": 7}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::attack::AttackParams;
use crate::channel::ChannelParams;
use crate::error::{invalid, Result};
use crate::protocol::{BackwardChannelParams, SessionConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<AttackParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward: Option<BackwardChannelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionConfig>,
}

impl ConfigDocument {
    /// Forward and backward channels for a session: explicit `attack` and
    /// `backward` sections win; a missing one is derived from `channel`.
    pub fn session_channels(&self) -> Result<(AttackParams, BackwardChannelParams)> {
        let mapped = self.channel.map(|c| c.to_session_channels()).transpose()?;
        let fwd = self
            .attack
            .or(mapped.map(|(f, _)| f))
            .ok_or_else(|| invalid("config needs an \"attack\" or \"channel\" section"))?;
        let bwd = self
            .backward
            .or(mapped.map(|(_, b)| b))
            .ok_or_else(|| invalid("config needs a \"backward\" or \"channel\" section"))?;
        Ok((fwd, bwd))
    }
}
