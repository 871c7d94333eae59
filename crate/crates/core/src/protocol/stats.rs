//! Parameter estimation from a session transcript.

use serde::{Deserialize, Serialize};

use super::{BobResult, Mode, PsiOutcomePolicy, TravelOutcome, TrialOutcome};
use crate::bounds::{key_rate, KeyRateReport};
use crate::error::{invalid, Result};

/// Counts of `(Bob's home Z result, Alice's control result)` over rounds in
/// which both parties chose control mode. Keys read `<bob><alice>`, e.g.
/// `"0v"` or `"11"`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlCounts {
    #[serde(rename = "0v")]
    pub c0v: u64,
    #[serde(rename = "00")]
    pub c00: u64,
    #[serde(rename = "01")]
    pub c01: u64,
    #[serde(rename = "1v")]
    pub c1v: u64,
    #[serde(rename = "10")]
    pub c10: u64,
    #[serde(rename = "11")]
    pub c11: u64,
}

impl ControlCounts {
    pub fn add(&mut self, home: u8, alice: TravelOutcome) {
        let slot = match (home, alice) {
            (0, TravelOutcome::Vacuum) => &mut self.c0v,
            (0, TravelOutcome::Zero) => &mut self.c00,
            (0, TravelOutcome::One) => &mut self.c01,
            (_, TravelOutcome::Vacuum) => &mut self.c1v,
            (_, TravelOutcome::Zero) => &mut self.c10,
            (_, TravelOutcome::One) => &mut self.c11,
        };
        *slot += 1;
    }

    /// `(vacuum, 0, 1)` counts for Bob's home result `home`.
    pub fn row(&self, home: u8) -> [u64; 3] {
        if home == 0 {
            [self.c0v, self.c00, self.c01]
        } else {
            [self.c1v, self.c10, self.c11]
        }
    }

    pub fn total(&self) -> u64 {
        self.row(0).iter().chain(self.row(1).iter()).sum()
    }

    /// Rounds where Alice found a qubit rather than the vacuum.
    pub fn arrivals(&self) -> u64 {
        self.c00 + self.c01 + self.c10 + self.c11
    }
}

/// Estimated forward transition probabilities; `None` for a branch with no
/// control rounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PHat {
    pub p0v: Option<f64>,
    pub p00: Option<f64>,
    pub p01: Option<f64>,
    pub p1v: Option<f64>,
    pub p10: Option<f64>,
    pub p11: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedStatistics {
    pub n_trials: u64,
    pub counts: ControlCounts,
    pub p_hat: PHat,
    /// `p̂01 / (p̂00 + p̂01)`; `None` if branch 0 never arrived.
    pub p01_prime_hat: Option<f64>,
    pub p10_prime_hat: Option<f64>,
    pub eta_fwd_hat: Option<f64>,
    pub eta_bwd_hat: Option<f64>,
    pub qber_hat: Option<f64>,
    pub qber_errors: u64,
    pub qber_denominator: u64,
    /// Rounds with both parties in message mode.
    pub n_message: u64,
    /// Rounds with both parties in control mode.
    pub n_control: u64,
    /// Mismatched-mode rounds, discarded.
    pub n_mixed: u64,
    /// Message rounds where Bob's Bell measurement clicked.
    pub n_detected: u64,
    pub n_psi: u64,
    pub psi_outcome_policy: PsiOutcomePolicy,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Aggregates a transcript: forward probabilities from both-control rounds
/// (conditioned on Bob's home result), backward efficiency from the
/// message-round detection fraction divided by the forward efficiency, and
/// the error rate from decoded message rounds.
pub fn estimate_statistics(
    outcomes: &[TrialOutcome],
    policy: PsiOutcomePolicy,
) -> Result<ObservedStatistics> {
    if outcomes.is_empty() {
        return Err(invalid(
            "cannot estimate statistics from an empty transcript",
        ));
    }
    let mut counts = ControlCounts::default();
    let (mut n_message, mut n_control, mut n_mixed) = (0u64, 0u64, 0u64);
    let (mut n_detected, mut n_psi, mut errors, mut denominator) = (0u64, 0u64, 0u64, 0u64);

    for t in outcomes {
        match (t.mode_alice, t.mode_bob) {
            (Mode::Control, Mode::Control) => {
                n_control += 1;
                let home = match t.bob_result {
                    BobResult::Z0 => 0,
                    BobResult::Z1 => 1,
                    other => {
                        return Err(invalid(format!(
                            "control round has Bell result {}",
                            other.label()
                        )))
                    }
                };
                let alice = t
                    .alice_control_result
                    .ok_or_else(|| invalid("control round without Alice's result"))?;
                counts.add(home, alice);
            }
            (Mode::Message, Mode::Message) => {
                n_message += 1;
                let bit = t
                    .alice_bit
                    .ok_or_else(|| invalid("message round without Alice's bit"))?;
                if t.bob_result == BobResult::NoDetection {
                    continue;
                }
                n_detected += 1;
                if t.bob_result.is_psi() {
                    n_psi += 1;
                    if policy == PsiOutcomePolicy::CountAsError {
                        errors += 1;
                        denominator += 1;
                    }
                    continue;
                }
                let decoded = t
                    .bob_result
                    .decoded_bit()
                    .ok_or_else(|| invalid("message round has a Z result"))?;
                denominator += 1;
                if decoded != bit {
                    errors += 1;
                }
            }
            _ => n_mixed += 1,
        }
    }

    let mut diagnostics = Vec::new();
    let mut p_hat = PHat::default();
    let mut primes = [None, None];
    for home in [0u8, 1] {
        let [v, a, b] = counts.row(home);
        let n = v + a + b;
        if n == 0 {
            diagnostics.push(format!(
                "no control rounds with home result {home}; row unestimated"
            ));
            continue;
        }
        let row = [ratio(v, n), ratio(a, n), ratio(b, n)];
        if home == 0 {
            (p_hat.p0v, p_hat.p00, p_hat.p01) = (row[0], row[1], row[2]);
            primes[0] = ratio(b, a + b);
        } else {
            (p_hat.p1v, p_hat.p10, p_hat.p11) = (row[0], row[1], row[2]);
            primes[1] = ratio(a, a + b);
        }
        if a + b == 0 {
            diagnostics.push(format!("branch {home} never arrived as a qubit"));
        }
    }

    let eta_fwd_hat = ratio(counts.arrivals(), n_control);
    let detection = ratio(n_detected, n_message);
    let eta_bwd_hat = match (detection, eta_fwd_hat) {
        (Some(d), Some(f)) if f > 0.0 => Some((d / f).min(1.0)),
        _ => None,
    };
    if n_message == 0 {
        diagnostics.push("no rounds with both parties in message mode".into());
    }
    let qber_hat = ratio(errors, denominator);
    if qber_hat.is_none() {
        diagnostics.push("no decoded message rounds; error rate undefined".into());
    }

    Ok(ObservedStatistics {
        n_trials: outcomes.len() as u64,
        counts,
        p_hat,
        p01_prime_hat: primes[0],
        p10_prime_hat: primes[1],
        eta_fwd_hat,
        eta_bwd_hat,
        qber_hat,
        qber_errors: errors,
        qber_denominator: denominator,
        n_message,
        n_control,
        n_mixed,
        n_detected,
        n_psi,
        psi_outcome_policy: policy,
        diagnostics,
    })
}

/// Key-rate bound evaluated on the estimates. Any missing estimate gives a
/// degenerate zero-rate report carrying the diagnostics.
pub fn rate_from_statistics(stats: &ObservedStatistics) -> Result<KeyRateReport> {
    match (
        stats.p01_prime_hat,
        stats.p10_prime_hat,
        stats.eta_bwd_hat,
        stats.qber_hat,
    ) {
        (Some(p01), Some(p10), Some(eta), Some(e)) => key_rate(p01, p10, eta, e),
        _ => {
            let mut report =
                KeyRateReport::undefined("statistics insufficient for a key-rate bound");
            report.diagnostics.extend(stats.diagnostics.iter().cloned());
            Ok(report)
        }
    }
}
