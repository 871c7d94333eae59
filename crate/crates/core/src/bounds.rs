//! Analytic key-rate bound: forward entropy deficit, its division by the
//! backward efficiency, and the final asymptotic rate.

use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, Error, Result};
use crate::qmath::binary_entropy;

/// Every intermediate of a key-rate evaluation.
///
/// `rate_raw = prefactor · (eve_bound − h_e)` and `rate = max(0, rate_raw)`.
/// For a degenerate channel (`eta_bwd = 0`) the bound is undefined:
/// `eve_bound` and `rate_raw` are `None` and `rate` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub p01_prime: f64,
    pub p10_prime: f64,
    pub eta_bwd: f64,
    pub qber: f64,
    pub h_fwd: f64,
    pub eve_bound: Option<f64>,
    pub h_e: f64,
    pub rate_raw: Option<f64>,
    pub rate: f64,
    pub prefactor: f64,
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl KeyRateReport {
    /// Rescales the report to a per-trial rate with the given prefactor.
    pub fn with_prefactor(mut self, prefactor: f64) -> Self {
        self.prefactor = prefactor;
        if let Some(bound) = self.eve_bound {
            let raw = prefactor * (bound - self.h_e);
            self.rate_raw = Some(raw);
            self.rate = raw.max(0.0);
        }
        self
    }

    /// Per-detected-pair rate, i.e. `rate_raw / prefactor`.
    pub fn unscaled_rate_raw(&self) -> Option<f64> {
        self.eve_bound.map(|b| b - self.h_e)
    }

    /// A zero-rate report for inputs where no bound can be computed. The
    /// forward terms take their uninformative values (`p' = 1/2`).
    pub fn undefined(reason: impl Into<String>) -> Self {
        Self {
            p01_prime: 0.5,
            p10_prime: 0.5,
            eta_bwd: 0.0,
            qber: 0.0,
            h_fwd: 1.0,
            eve_bound: None,
            h_e: 0.0,
            rate_raw: None,
            rate: 0.0,
            prefactor: 1.0,
            degenerate: true,
            diagnostics: vec![reason.into()],
        }
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {p} is not a probability")))
    }
}

/// `(H(p'01) + H(p'10)) / 2`.
pub fn forward_entropy_bound(p01_prime: f64, p10_prime: f64) -> Result<f64> {
    check_probability("p01_prime", p01_prime)?;
    check_probability("p10_prime", p10_prime)?;
    Ok((binary_entropy(p01_prime)? + binary_entropy(p10_prime)?) / 2.0)
}

/// Lower bound on Eve's conditional entropy over received rounds,
/// `1 − h_fwd_avg / η←`, with unreceived rounds assigned maximal entropy.
/// May be negative.
pub fn received_entropy_bound(h_fwd_avg: f64, eta_bwd: f64) -> Result<f64> {
    if !h_fwd_avg.is_finite() || h_fwd_avg < 0.0 {
        return Err(invalid(format!(
            "forward entropy term {h_fwd_avg} must be non-negative"
        )));
    }
    check_probability("eta_bwd", eta_bwd)?;
    if eta_bwd == 0.0 {
        return Err(degenerate(
            "backward efficiency is zero; no round is received",
        ));
    }
    Ok(1.0 - h_fwd_avg / eta_bwd)
}

/// `R = 1 − (H(p'01) + H(p'10)) / (2η←) − H(e)`, clamped at zero.
///
/// A zero backward efficiency yields a degenerate report with rate 0 rather
/// than an error; out-of-range inputs are rejected.
pub fn key_rate(p01_prime: f64, p10_prime: f64, eta_bwd: f64, qber: f64) -> Result<KeyRateReport> {
    check_probability("qber", qber)?;
    let h_fwd = forward_entropy_bound(p01_prime, p10_prime)?;
    let h_e = binary_entropy(qber)?;
    let (eve_bound, degenerate, diagnostics) = match received_entropy_bound(h_fwd, eta_bwd) {
        Ok(b) => (Some(b), false, Vec::new()),
        Err(Error::DegenerateChannel(msg)) => (None, true, vec![msg]),
        Err(e) => return Err(e),
    };
    let rate_raw = eve_bound.map(|b| b - h_e);
    Ok(KeyRateReport {
        p01_prime,
        p10_prime,
        eta_bwd,
        qber,
        h_fwd,
        eve_bound,
        h_e,
        rate_raw,
        rate: rate_raw.map_or(0.0, |r| r.max(0.0)),
        prefactor: 1.0,
        degenerate,
        diagnostics,
    })
}

/// Received/unreceived decomposition of Eve's conditional entropy.
///
/// A flag register `F` (received or not) is orthogonal, so for the state
/// `η← |r><r| ⊗ ρ_rec + (1−η←) |u><u| ⊗ ρ_unrec` the conditional entropy
/// splits as `S(A'|FAE) = η← S(A'|AE)_rec + (1−η←) S(A'|AE)_unrec`.
pub mod decomposition {
    use crate::attack::classical_quantum_state;
    use crate::error::{invalid, Result};
    use crate::qmath::{
        partial_trace, tensor, von_neumann_entropy, ComplexMatrix, DensityOperator,
    };

    /// Key bit `A'` (first factor) held jointly with a quantum system.
    #[derive(Debug, Clone)]
    pub struct CqState {
        state: DensityOperator,
    }

    impl CqState {
        /// `½|0><0| ⊗ ρ0 + ½|1><1| ⊗ ρ1`.
        pub fn from_encodings(bit0: &DensityOperator, bit1: &DensityOperator) -> Result<Self> {
            Ok(Self {
                state: classical_quantum_state(bit0, bit1)?,
            })
        }

        /// Both bits leave the same state: Eve has maximal uncertainty.
        pub fn uninformative(sigma: &DensityOperator) -> Result<Self> {
            Self::from_encodings(sigma, sigma)
        }

        pub fn state(&self) -> &DensityOperator {
            &self.state
        }

        /// `S(A'|Q) = S(ρ^{A'Q}) − S(ρ^{Q})`.
        pub fn conditional_entropy(&self) -> Result<f64> {
            let rest: Vec<usize> = (1..self.state.factor_dims().len()).collect();
            let marginal = partial_trace(&self.state, &rest)?;
            Ok(von_neumann_entropy(&self.state) - von_neumann_entropy(&marginal))
        }
    }

    /// Joint state with the received flag prepended: layout `[2, 2, ...]` with
    /// factors `F`, `A'`, then the quantum system.
    pub fn flagged_mixture(
        eta_bwd: f64,
        received: &CqState,
        unreceived: &CqState,
    ) -> Result<DensityOperator> {
        if !(0.0..=1.0).contains(&eta_bwd) {
            return Err(invalid(format!("eta_bwd = {eta_bwd} is not a probability")));
        }
        if received.state.factor_dims() != unreceived.state.factor_dims() {
            return Err(invalid(
                "received and unreceived blocks have different layouts",
            ));
        }
        let flag_r = ComplexMatrix::from_real_diagonal(&[eta_bwd, 0.0]);
        let flag_u = ComplexMatrix::from_real_diagonal(&[0.0, 1.0 - eta_bwd]);
        let m = tensor(&flag_r, received.state.matrix())
            .add(&tensor(&flag_u, unreceived.state.matrix()));
        let mut dims = vec![2];
        dims.extend_from_slice(received.state.factor_dims());
        DensityOperator::new(m, dims)
    }

    /// `S(A'|FAE)` of the flagged mixture, computed from explicit matrices.
    pub fn flagged_conditional_entropy(
        eta_bwd: f64,
        received: &CqState,
        unreceived: &CqState,
    ) -> Result<f64> {
        let joint = flagged_mixture(eta_bwd, received, unreceived)?;
        let keep: Vec<usize> = (0..joint.factor_dims().len()).filter(|&i| i != 1).collect();
        let without_key = partial_trace(&joint, &keep)?;
        Ok(von_neumann_entropy(&joint) - von_neumann_entropy(&without_key))
    }

    /// Inverts the split for the received block when the unreceived block is
    /// assigned one bit of entropy: `(S_total − (1−η←)) / η←`.
    pub fn received_from_total(total: f64, eta_bwd: f64) -> f64 {
        (total - (1.0 - eta_bwd)) / eta_bwd
    }
}
