//! Security analysis and simulation of the modified Ping-Pong two-way QKD
//! protocol with a vacuum-aware encoding.
//!
//! - [`qmath`]: dense complex matrices, density operators, entropies.
//! - [`attack`]: Eve's forward-channel collective attack and the explicit
//!   density matrices it induces.
//! - [`bounds`]: the analytic key-rate bound and its entropy decomposition.
//! - [`protocol`]: Monte Carlo simulation of whole sessions.
//! - [`channel`]: fiber/detector model and distance sweeps.
//! - [`config`]: the shared JSON configuration document.

pub mod attack;
pub mod bounds;
pub mod channel;
pub mod config;
pub mod error;
pub mod par;
pub mod protocol;
pub mod qmath;

pub use error::{Error, Result};
pub use par::Execution;
