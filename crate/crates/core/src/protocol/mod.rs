//! Monte Carlo simulation of complete protocol sessions.
//!
//! Each round: Bob prepares `|Φ+>`, the travel qubit crosses the forward
//! channel, Alice either measures it (control) or applies one of the four
//! encodings (message), it crosses the backward channel, and Bob either
//! Z-measures his home qubit (control) or performs a Bell measurement
//! (message). States are evolved as density matrices; outcomes are sampled
//! from the Born probabilities of the evolved state.
//!
//! Rounds are independent. Round `i` draws from the ChaCha8 stream `i` of the
//! session seed, so results do not depend on how rounds are scheduled.

mod measure;
mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attack::{
    apply_to_travel, check_transition_rows, coherent_kraus, forward_kraus, hermitize, phi_plus,
    qubit_level, AttackParams, EncodingOp, TRAVEL_DIM, VACUUM,
};
use crate::bounds::KeyRateReport;
use crate::error::{invalid, Error, Result};
use crate::par::{self, Execution};
use crate::qmath::{re, tensor, ComplexMatrix, DensityOperator};

pub use measure::{
    bell_measure, bell_probabilities, home_z_measure, home_z_probabilities, sample_index,
    travel_collapse, travel_probabilities, BobResult, TravelOutcome,
};
pub use stats::{
    estimate_statistics, rate_from_statistics, ControlCounts, ObservedStatistics, PHat,
};

/// What Bob does with Ψ± Bell outcomes in message rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiOutcomePolicy {
    #[default]
    CountAsError,
    Discard,
}

/// Kraus realization of the forward channel used for the travel qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardRealization {
    /// Phase-preserving channel with the configured transition probabilities.
    #[default]
    Coherent,
    /// Eve's orthonormal-ancilla attack: she learns the Z value of every
    /// photon, which dephases the Bell pair.
    OrthonormalAncilla,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub n_trials: u64,
    /// Probability `c` that a party picks message mode, drawn independently
    /// by Alice and Bob each round.
    pub message_mode_prob: f64,
    pub rng_seed: u64,
    pub psi_outcome_policy: PsiOutcomePolicy,
    pub forward_realization: ForwardRealization,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            message_mode_prob: 0.5,
            rng_seed: 0,
            psi_outcome_policy: PsiOutcomePolicy::CountAsError,
            forward_realization: ForwardRealization::Coherent,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(invalid("n_trials must be positive"));
        }
        let c = self.message_mode_prob;
        if !(c > 0.0 && c <= 1.0) {
            return Err(invalid(format!(
                "message_mode_prob = {c} must lie in (0, 1]"
            )));
        }
        Ok(())
    }
}

/// Backward (Alice to Bob) channel. `q_ji` is the probability that qubit
/// input `|i>` arrives at Bob as `|j>` (`v` for vacuum); the vacuum stays
/// vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBackward")]
pub struct BackwardChannelParams {
    pub q_v0: f64,
    pub q_00: f64,
    pub q_01: f64,
    pub q_v1: f64,
    pub q_10: f64,
    pub q_11: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackward {
    q_v0: f64,
    q_00: f64,
    q_01: f64,
    q_v1: f64,
    q_10: f64,
    q_11: f64,
}

impl TryFrom<RawBackward> for BackwardChannelParams {
    type Error = Error;

    fn try_from(r: RawBackward) -> Result<Self> {
        BackwardChannelParams::new(r.q_v0, r.q_00, r.q_01, r.q_v1, r.q_10, r.q_11)
    }
}

impl BackwardChannelParams {
    pub fn new(q_v0: f64, q_00: f64, q_01: f64, q_v1: f64, q_10: f64, q_11: f64) -> Result<Self> {
        let p = Self {
            q_v0,
            q_00,
            q_01,
            q_v1,
            q_10,
            q_11,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_transition_rows(
            "backward",
            [
                ("q_v0", self.q_v0),
                ("q_00", self.q_00),
                ("q_01", self.q_01),
                ("q_v1", self.q_v1),
                ("q_10", self.q_10),
                ("q_11", self.q_11),
            ],
        )
    }

    pub fn identity() -> Self {
        Self {
            q_v0: 0.0,
            q_00: 1.0,
            q_01: 0.0,
            q_v1: 0.0,
            q_10: 0.0,
            q_11: 1.0,
        }
    }

    pub fn loss_flip(eta: f64, flip: f64) -> Result<Self> {
        Self::new(
            1.0 - eta,
            eta * (1.0 - flip),
            eta * flip,
            1.0 - eta,
            eta * flip,
            eta * (1.0 - flip),
        )
    }

    /// Arrival probability of a `|0>` input (equal to that of `|1>` for
    /// symmetric channels).
    pub fn efficiency(&self) -> f64 {
        self.q_00 + self.q_01
    }

    /// Qutrit-to-qutrit Kraus operators: phase-preserving keep and flip
    /// branches, per-input loss, and the identity on the vacuum.
    pub fn kraus(&self) -> Result<Vec<ComplexMatrix>> {
        self.validate()?;
        let (z, o) = (qubit_level(0), qubit_level(1));
        let op = |entries: &[(usize, usize, f64)]| {
            let mut k = ComplexMatrix::zeros(TRAVEL_DIM, TRAVEL_DIM);
            for &(to, from, p) in entries {
                k[(to, from)] = re(p.sqrt());
            }
            k
        };
        Ok(vec![
            op(&[(z, z, self.q_00), (o, o, self.q_11)]),
            op(&[(o, z, self.q_01), (z, o, self.q_10)]),
            op(&[(VACUUM, z, self.q_v0)]),
            op(&[(VACUUM, o, self.q_v1)]),
            op(&[(VACUUM, VACUUM, 1.0)]),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Message,
    Control,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Message => "message",
            Mode::Control => "control",
        }
    }
}

/// Everything recorded about one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub mode_alice: Mode,
    pub mode_bob: Mode,
    pub alice_bit: Option<u8>,
    pub alice_op: Option<EncodingOp>,
    pub bob_result: BobResult,
    pub alice_control_result: Option<TravelOutcome>,
}

/// States reached after each of Alice's choices, evolved once per session.
struct Branches {
    /// Indexed like `EncodingOp::ALL`.
    message: Vec<DensityOperator>,
    control_probs: [f64; 3],
    /// Indexed like `TravelOutcome::ALL`; `None` for impossible outcomes.
    control: Vec<Option<DensityOperator>>,
}

/// Precomputed density-matrix evolution for a fixed channel pair.
pub struct SessionEngine {
    config: SessionConfig,
    forward_state: DensityOperator,
    branches: Branches,
}

impl SessionEngine {
    pub fn new(
        config: SessionConfig,
        fwd: &AttackParams,
        bwd: &BackwardChannelParams,
    ) -> Result<Self> {
        config.validate()?;
        let fwd_kraus = match config.forward_realization {
            ForwardRealization::Coherent => coherent_kraus(fwd)?,
            ForwardRealization::OrthonormalAncilla => forward_kraus(fwd)?,
        };
        let bwd_kraus = bwd.kraus()?;
        let forward_state = apply_to_travel(&phi_plus(), &fwd_kraus)?;
        let backward = |rho: &DensityOperator| apply_backward(rho, &bwd_kraus);

        let message = EncodingOp::ALL
            .iter()
            .map(|&op| {
                let u = tensor(&ComplexMatrix::identity(2), &op.matrix());
                let encoded = DensityOperator::new(
                    hermitize(u.conjugate(forward_state.matrix())),
                    vec![2, TRAVEL_DIM],
                )?;
                backward(&encoded)
            })
            .collect::<Result<Vec<_>>>()?;
        let control_probs = travel_probabilities(&forward_state);
        let control = TravelOutcome::ALL
            .iter()
            .map(|&o| {
                travel_collapse(&forward_state, o)
                    .map(|s| backward(&s))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            forward_state,
            branches: Branches {
                message,
                control_probs,
                control,
            },
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    /// Home ⊗ travel state on Alice's side, before her operation.
    pub fn forward_state(&self) -> &DensityOperator {
        &self.forward_state
    }

    /// State reaching Bob after Alice applies `op`.
    pub fn message_state(&self, op: EncodingOp) -> &DensityOperator {
        &self.branches.message[op_index(op)]
    }

    /// State reaching Bob after Alice's control result `outcome`.
    pub fn control_state(&self, outcome: TravelOutcome) -> Option<&DensityOperator> {
        self.branches.control[outcome_index(outcome)].as_ref()
    }

    /// Every state the engine evolved, for invariant checks.
    pub fn evolved_states(&self) -> Vec<&DensityOperator> {
        let mut v = vec![&self.forward_state];
        v.extend(self.branches.message.iter());
        v.extend(self.branches.control.iter().flatten());
        v
    }

    fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        rng.set_stream(trial);
        rng
    }

    /// Simulates round `trial` on its own random stream.
    pub fn run_trial(&self, trial: u64) -> TrialOutcome {
        let mut rng = self.stream(trial);
        let c = self.config.message_mode_prob;
        let u_alice_mode: f64 = rng.random();
        let u_bob_mode: f64 = rng.random();
        let u_alice: f64 = rng.random();
        let u_bob: f64 = rng.random();
        let mode_alice = if u_alice_mode < c {
            Mode::Message
        } else {
            Mode::Control
        };
        let mode_bob = if u_bob_mode < c {
            Mode::Message
        } else {
            Mode::Control
        };

        let (alice_op, alice_control_result, state) = match mode_alice {
            Mode::Message => {
                let op = EncodingOp::ALL[((u_alice * 4.0) as usize).min(3)];
                (Some(op), None, self.message_state(op))
            }
            Mode::Control => {
                let outcome =
                    TravelOutcome::ALL[sample_index(&self.branches.control_probs, u_alice)];
                let state = self
                    .control_state(outcome)
                    .expect("sampled outcomes have positive probability");
                (None, Some(outcome), state)
            }
        };
        let bob_result = match mode_bob {
            Mode::Message => bell_measure(state, u_bob),
            Mode::Control => home_z_measure(state, u_bob),
        };
        TrialOutcome {
            mode_alice,
            mode_bob,
            alice_bit: alice_op.map(EncodingOp::key_bit),
            alice_op,
            bob_result,
            alice_control_result,
        }
    }

    pub fn simulate(&self, exec: Execution) -> Vec<TrialOutcome> {
        par::map_range(exec, self.config.n_trials, |i| self.run_trial(i))
    }
}

fn op_index(op: EncodingOp) -> usize {
    EncodingOp::ALL
        .iter()
        .position(|&o| o == op)
        .expect("listed")
}

fn outcome_index(o: TravelOutcome) -> usize {
    TravelOutcome::ALL
        .iter()
        .position(|&x| x == o)
        .expect("listed")
}

fn apply_backward(rho: &DensityOperator, kraus: &[ComplexMatrix]) -> Result<DensityOperator> {
    let home = ComplexMatrix::identity(2);
    let n = rho.dim();
    let m = kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
        acc.add(&tensor(&home, k).conjugate(rho.matrix()))
    });
    DensityOperator::new(hermitize(m), rho.factor_dims().to_vec())
}

/// Every round of a session, in trial order.
pub fn simulate_trials(
    exec: Execution,
    config: &SessionConfig,
    fwd: &AttackParams,
    bwd: &BackwardChannelParams,
) -> Result<Vec<TrialOutcome>> {
    Ok(SessionEngine::new(*config, fwd, bwd)?.simulate(exec))
}

/// Simulates a session and evaluates the key-rate bound on its estimates.
pub fn run_session(
    config: &SessionConfig,
    fwd: &AttackParams,
    bwd: &BackwardChannelParams,
) -> Result<(ObservedStatistics, KeyRateReport)> {
    run_session_with(Execution::default(), config, fwd, bwd)
}

pub fn run_session_with(
    exec: Execution,
    config: &SessionConfig,
    fwd: &AttackParams,
    bwd: &BackwardChannelParams,
) -> Result<(ObservedStatistics, KeyRateReport)> {
    let outcomes = simulate_trials(exec, config, fwd, bwd)?;
    let stats = estimate_statistics(&outcomes, config.psi_outcome_policy)?;
    let report = rate_from_statistics(&stats)?;
    Ok((stats, report))
}
