//! Born-rule measurements on the `[2, 3]` home ⊗ travel state.

use serde::{Deserialize, Serialize};

use crate::attack::{qubit_level, TRAVEL_DIM, VACUUM};
use crate::qmath::{ComplexMatrix, DensityOperator};

/// Bob's recorded result for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobResult {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    NoDetection,
    Z0,
    Z1,
}

impl BobResult {
    /// Bell outcomes in sampling order.
    pub const BELL_ORDER: [BobResult; 5] = [
        BobResult::NoDetection,
        BobResult::PhiPlus,
        BobResult::PhiMinus,
        BobResult::PsiPlus,
        BobResult::PsiMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BobResult::PhiPlus => "phi_plus",
            BobResult::PhiMinus => "phi_minus",
            BobResult::PsiPlus => "psi_plus",
            BobResult::PsiMinus => "psi_minus",
            BobResult::NoDetection => "no_detection",
            BobResult::Z0 => "z0",
            BobResult::Z1 => "z1",
        }
    }

    /// Decoded key bit: Φ+ is 0, Φ− is 1.
    pub fn decoded_bit(self) -> Option<u8> {
        match self {
            BobResult::PhiPlus => Some(0),
            BobResult::PhiMinus => Some(1),
            _ => None,
        }
    }

    pub fn is_psi(self) -> bool {
        matches!(self, BobResult::PsiPlus | BobResult::PsiMinus)
    }
}

/// Alice's control-mode result on the travel system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TravelOutcome {
    #[serde(rename = "v")]
    Vacuum,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl TravelOutcome {
    pub const ALL: [TravelOutcome; 3] = [
        TravelOutcome::Vacuum,
        TravelOutcome::Zero,
        TravelOutcome::One,
    ];

    pub fn level(self) -> usize {
        match self {
            TravelOutcome::Vacuum => VACUUM,
            TravelOutcome::Zero => qubit_level(0),
            TravelOutcome::One => qubit_level(1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TravelOutcome::Vacuum => "v",
            TravelOutcome::Zero => "0",
            TravelOutcome::One => "1",
        }
    }
}

/// Index into `probs` selected by `u ∈ [0, 1)` on the cumulative sum.
/// Rounding slack at the top end goes to the last outcome with nonzero weight.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

fn idx(home: usize, travel: usize) -> usize {
    home * TRAVEL_DIM + travel
}

/// `<ψ|ρ|ψ>` for a ket given as sparse `(index, amplitude)` pairs.
fn expectation(m: &ComplexMatrix, ket: &[(usize, f64)]) -> f64 {
    let mut acc = 0.0;
    for &(i, a) in ket {
        for &(j, b) in ket {
            acc += a * b * m[(i, j)].re;
        }
    }
    acc
}

/// Probabilities in `BELL_ORDER`: the vacuum-block weight, then the four Bell
/// projections of the non-vacuum 2x2 block.
pub fn bell_probabilities(rho: &DensityOperator) -> [f64; 5] {
    debug_assert_eq!(rho.factor_dims(), &[2, TRAVEL_DIM]);
    let m = rho.matrix();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (z, o) = (qubit_level(0), qubit_level(1));
    let vacuum = m[(idx(0, VACUUM), idx(0, VACUUM))].re + m[(idx(1, VACUUM), idx(1, VACUUM))].re;
    let phi_plus = expectation(m, &[(idx(0, z), h), (idx(1, o), h)]);
    let phi_minus = expectation(m, &[(idx(0, z), h), (idx(1, o), -h)]);
    let psi_plus = expectation(m, &[(idx(0, o), h), (idx(1, z), h)]);
    let psi_minus = expectation(m, &[(idx(0, o), h), (idx(1, z), -h)]);
    [vacuum, phi_plus, phi_minus, psi_plus, psi_minus].map(|p| p.max(0.0))
}

/// Bell-state measurement on home ⊗ travel; the vacuum block is a miss.
pub fn bell_measure(rho: &DensityOperator, u: f64) -> BobResult {
    BobResult::BELL_ORDER[sample_index(&bell_probabilities(rho), u)]
}

/// Z-basis probabilities of the home qubit.
pub fn home_z_probabilities(rho: &DensityOperator) -> [f64; 2] {
    let m = rho.matrix();
    let weight = |home: usize| {
        (0..TRAVEL_DIM)
            .map(|t| m[(idx(home, t), idx(home, t))].re)
            .sum::<f64>()
    };
    [weight(0).max(0.0), weight(1).max(0.0)]
}

pub fn home_z_measure(rho: &DensityOperator, u: f64) -> BobResult {
    match sample_index(&home_z_probabilities(rho), u) {
        0 => BobResult::Z0,
        _ => BobResult::Z1,
    }
}

/// Probabilities of Alice's `{|v>, |0>, |1>}` projectors on the travel system.
pub fn travel_probabilities(rho: &DensityOperator) -> [f64; 3] {
    let m = rho.matrix();
    TravelOutcome::ALL.map(|o| {
        let t = o.level();
        (m[(idx(0, t), idx(0, t))].re + m[(idx(1, t), idx(1, t))].re).max(0.0)
    })
}

/// Post-measurement state after Alice observes `outcome`, or `None` if that
/// outcome has zero probability.
pub fn travel_collapse(rho: &DensityOperator, outcome: TravelOutcome) -> Option<DensityOperator> {
    let t = outcome.level();
    let m = rho.matrix();
    let keep = [idx(0, t), idx(1, t)];
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for &i in &keep {
        for &j in &keep {
            out[(i, j)] = m[(i, j)];
        }
    }
    let p = out.trace().re;
    if p <= 0.0 {
        return None;
    }
    DensityOperator::new(out.scale_real(1.0 / p), rho.factor_dims().to_vec()).ok()
}
