//! Eve's collective attack on the forward (Bob to Alice) channel.
//!
//! The travel system is a qutrit with ordered basis `(|v>, |0>, |1>)`, where
//! `|v>` is the vacuum. Eve's ancilla is six-dimensional with orthonormal
//! basis `(E0v, E00, E01, E1v, E10, E11)`, one vector per transition branch.

use serde::{Deserialize, Serialize};

use crate::error::{degenerate, invalid, Error, Result};
use crate::qmath::{
    re, tensor, von_neumann_entropy, ComplexMatrix, DensityOperator, StateVector, ZERO,
};

/// Index of the vacuum in the travel basis.
pub const VACUUM: usize = 0;
/// Travel basis index of the qubit state `|bit>`.
pub const fn qubit_level(bit: usize) -> usize {
    bit + 1
}
pub const TRAVEL_DIM: usize = 3;
pub const ANCILLA_DIM: usize = 6;

const ROW_TOL: f64 = 1e-10;

/// Transition probabilities of the forward attack. `pij` is the probability
/// that input `|i>` reaches Alice as `|j>` (`v` for vacuum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAttackParams")]
pub struct AttackParams {
    pub p0v: f64,
    pub p00: f64,
    pub p01: f64,
    pub p1v: f64,
    pub p10: f64,
    pub p11: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttackParams {
    p0v: f64,
    p00: f64,
    p01: f64,
    p1v: f64,
    p10: f64,
    p11: f64,
}

impl TryFrom<RawAttackParams> for AttackParams {
    type Error = Error;

    fn try_from(r: RawAttackParams) -> Result<Self> {
        AttackParams::new(r.p0v, r.p00, r.p01, r.p1v, r.p10, r.p11)
    }
}

impl AttackParams {
    pub fn new(p0v: f64, p00: f64, p01: f64, p1v: f64, p10: f64, p11: f64) -> Result<Self> {
        let params = Self {
            p0v,
            p00,
            p01,
            p1v,
            p10,
            p11,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_transition_rows(
            "forward",
            [
                ("p0v", self.p0v),
                ("p00", self.p00),
                ("p01", self.p01),
                ("p1v", self.p1v),
                ("p10", self.p10),
                ("p11", self.p11),
            ],
        )
    }

    /// Lossless, noiseless channel.
    pub fn identity() -> Self {
        Self {
            p0v: 0.0,
            p00: 1.0,
            p01: 0.0,
            p1v: 0.0,
            p10: 0.0,
            p11: 1.0,
        }
    }

    /// Every photon is lost.
    pub fn pure_loss() -> Self {
        Self {
            p0v: 1.0,
            p00: 0.0,
            p01: 0.0,
            p1v: 1.0,
            p10: 0.0,
            p11: 0.0,
        }
    }

    /// Symmetric channel with transmission `eta` and conditional flip
    /// probability `flip` on arrival.
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

    /// `(p_iv, p_i0, p_i1)` for travel input `|branch>`.
    pub fn row(&self, branch: Branch) -> [f64; 3] {
        match branch {
            Branch::Zero => [self.p0v, self.p00, self.p01],
            Branch::One => [self.p1v, self.p10, self.p11],
        }
    }

    /// Non-vacuum arrival probability for the given branch.
    pub fn efficiency(&self, branch: Branch) -> f64 {
        let [_, a, b] = self.row(branch);
        a + b
    }
}

/// Validates two rows of (vacuum, 0, 1) transition probabilities.
pub(crate) fn check_transition_rows(channel: &str, entries: [(&str, f64); 6]) -> Result<()> {
    for (name, p) in entries {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!(
                "{channel} channel: {name} = {p} is not a probability"
            )));
        }
    }
    for (row, chunk) in entries.chunks(3).enumerate() {
        let sum: f64 = chunk.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > ROW_TOL {
            let names: Vec<&str> = chunk.iter().map(|(n, _)| *n).collect();
            return Err(invalid(format!(
                "{channel} channel row {row} ({}) sums to {sum}, not 1",
                names.join("+")
            )));
        }
    }
    Ok(())
}

/// Which computational state the travel qubit collapsed into (Bob's home
/// qubit, measured in Z, reveals it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Zero,
    One,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Zero, Branch::One];

    pub fn index(self) -> usize {
        match self {
            Branch::Zero => 0,
            Branch::One => 1,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Branch::Zero),
            1 => Ok(Branch::One),
            _ => Err(invalid(format!("travel branch must be 0 or 1, got {i}"))),
        }
    }

    /// Ancilla indices `(E_iv, E_i0, E_i1)` for this branch.
    pub fn ancillas(self) -> [usize; 3] {
        let base = 3 * self.index();
        [base, base + 1, base + 2]
    }
}

/// Conditional forward statistics after excluding the vacuum.
///
/// A branch with zero efficiency has no defined conditional distribution; its
/// primed probabilities are reported as `1/2` each, the Eve-indistinguishable
/// value, which only lowers any rate computed from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveForwardStats {
    pub eta_fwd: f64,
    pub p00_prime: f64,
    pub p01_prime: f64,
    pub eta_fwd_1: f64,
    pub p10_prime: f64,
    pub p11_prime: f64,
}

impl EffectiveForwardStats {
    pub fn from_params(params: &AttackParams) -> Self {
        let cond = |same: f64, flip: f64| {
            let eta = same + flip;
            if eta > 0.0 {
                (eta, same / eta, flip / eta)
            } else {
                (0.0, 0.5, 0.5)
            }
        };
        let (eta_fwd, p00_prime, p01_prime) = cond(params.p00, params.p01);
        let (eta_fwd_1, p11_prime, p10_prime) = cond(params.p11, params.p10);
        Self {
            eta_fwd,
            p00_prime,
            p01_prime,
            eta_fwd_1,
            p10_prime,
            p11_prime,
        }
    }

    pub fn efficiency(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Zero => self.eta_fwd,
            Branch::One => self.eta_fwd_1,
        }
    }

    /// Conditional probability that the branch arrives as `|0>` and `|1>`.
    pub fn conditional(&self, branch: Branch) -> (f64, f64) {
        match branch {
            Branch::Zero => (self.p00_prime, self.p01_prime),
            Branch::One => (self.p10_prime, self.p11_prime),
        }
    }

    /// Conditional flip probability for the branch (`p'01` or `p'10`).
    pub fn flip(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Zero => self.p01_prime,
            Branch::One => self.p10_prime,
        }
    }
}

/// Alice's message-mode operations. Diagonal unitaries on `(|v>, |0>, |1>)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingOp {
    I0,
    I1,
    Y0,
    Y1,
}

impl EncodingOp {
    pub const ALL: [EncodingOp; 4] = [
        EncodingOp::I0,
        EncodingOp::I1,
        EncodingOp::Y0,
        EncodingOp::Y1,
    ];

    pub fn diagonal(self) -> [f64; 3] {
        match self {
            EncodingOp::I0 => [1.0, 1.0, 1.0],
            EncodingOp::I1 => [1.0, -1.0, -1.0],
            EncodingOp::Y0 => [1.0, 1.0, -1.0],
            EncodingOp::Y1 => [1.0, -1.0, 1.0],
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.diagonal())
    }

    pub fn key_bit(self) -> u8 {
        match self {
            EncodingOp::I0 | EncodingOp::I1 => 0,
            EncodingOp::Y0 | EncodingOp::Y1 => 1,
        }
    }

    /// The two operations that encode `bit`.
    pub fn for_bit(bit: u8) -> [EncodingOp; 2] {
        if bit == 0 {
            [EncodingOp::I0, EncodingOp::I1]
        } else {
            [EncodingOp::Y0, EncodingOp::Y1]
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EncodingOp::I0 => "I0",
            EncodingOp::I1 => "I1",
            EncodingOp::Y0 => "Y0",
            EncodingOp::Y1 => "Y1",
        }
    }
}

/// `½ Σ U ρ U†` over the two operations encoding `bit`.
pub fn average_encoding(rho: &ComplexMatrix, bit: u8) -> ComplexMatrix {
    let [a, b] = EncodingOp::for_bit(bit);
    a.matrix()
        .conjugate(rho)
        .add(&b.matrix().conjugate(rho))
        .scale_real(0.5)
}

/// Kraus operators `√p_ij |j><i|` (3x2, qubit into qutrit), one per ancilla
/// branch, ordered `(0v, 00, 01, 1v, 10, 11)`.
pub fn forward_kraus(params: &AttackParams) -> Result<Vec<ComplexMatrix>> {
    params.validate()?;
    let mut ops = Vec::with_capacity(6);
    for branch in Branch::BOTH {
        for (target, p) in branch_targets(params, branch) {
            let mut k = ComplexMatrix::zeros(TRAVEL_DIM, 2);
            k[(target, branch.index())] = re(p.sqrt());
            ops.push(k);
        }
    }
    Ok(ops)
}

/// Kraus operators with the same transition probabilities as
/// [`forward_kraus`] that keep the relative phase between the `|0>` and `|1>`
/// inputs: the no-flip and flip transitions of both inputs share one ancilla
/// outcome each. This is the honest physical channel used by the session
/// simulator; [`forward_kraus`] is Eve's fully-informed realization.
pub fn coherent_kraus(params: &AttackParams) -> Result<Vec<ComplexMatrix>> {
    params.validate()?;
    let mut keep = ComplexMatrix::zeros(TRAVEL_DIM, 2);
    keep[(qubit_level(0), 0)] = re(params.p00.sqrt());
    keep[(qubit_level(1), 1)] = re(params.p11.sqrt());
    let mut flip = ComplexMatrix::zeros(TRAVEL_DIM, 2);
    flip[(qubit_level(1), 0)] = re(params.p01.sqrt());
    flip[(qubit_level(0), 1)] = re(params.p10.sqrt());
    let mut lose0 = ComplexMatrix::zeros(TRAVEL_DIM, 2);
    lose0[(VACUUM, 0)] = re(params.p0v.sqrt());
    let mut lose1 = ComplexMatrix::zeros(TRAVEL_DIM, 2);
    lose1[(VACUUM, 1)] = re(params.p1v.sqrt());
    Ok(vec![keep, flip, lose0, lose1])
}

fn branch_targets(params: &AttackParams, branch: Branch) -> [(usize, f64); 3] {
    let [pv, p0, p1] = params.row(branch);
    [(VACUUM, pv), (qubit_level(0), p0), (qubit_level(1), p1)]
}

/// `Σ K†K`; equals the identity for a trace-preserving channel.
pub fn kraus_completeness(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let n = ops.first().map_or(0, ComplexMatrix::cols);
    ops.iter().fold(ComplexMatrix::zeros(n, n), |acc, k| {
        acc.add(&k.adjoint().matmul(k))
    })
}

/// Travel-qutrit ⊗ ancilla ket `Σ_j √p_ij |j>|E_ij>` for one branch.
fn branch_ket(params: &AttackParams, branch: Branch) -> StateVector {
    let mut amps = vec![ZERO; TRAVEL_DIM * ANCILLA_DIM];
    for ((target, p), anc) in branch_targets(params, branch)
        .into_iter()
        .zip(branch.ancillas())
    {
        amps[target * ANCILLA_DIM + anc] = re(p.sqrt());
    }
    StateVector::new(amps).expect("validated rows are normalized")
}

/// Joint travel ⊗ ancilla state after the forward attack, with Bob's home
/// qubit traced out. Layout `[3, 6]`.
pub fn joint_state_after_forward(params: &AttackParams) -> Result<DensityOperator> {
    params.validate()?;
    let m = Branch::BOTH
        .iter()
        .map(|&b| branch_ket(params, b).projector().scale_real(0.5))
        .reduce(|a, b| a.add(&b))
        .expect("two branches");
    DensityOperator::new(m, vec![TRAVEL_DIM, ANCILLA_DIM])
}

fn encoding_on_joint(op: EncodingOp) -> ComplexMatrix {
    tensor(&op.matrix(), &ComplexMatrix::identity(ANCILLA_DIM))
}

/// Joint states after Alice encodes bit 0 and bit 1 on the given branch,
/// each the equal mixture over the two operations of that bit.
pub fn encoded_states(
    params: &AttackParams,
    branch: Branch,
) -> Result<(DensityOperator, DensityOperator)> {
    params.validate()?;
    let p = branch_ket(params, branch).projector();
    let encode = |bit: u8| {
        let [a, b] = EncodingOp::for_bit(bit);
        let m = encoding_on_joint(a)
            .conjugate(&p)
            .add(&encoding_on_joint(b).conjugate(&p))
            .scale_real(0.5);
        DensityOperator::new(m, vec![TRAVEL_DIM, ANCILLA_DIM])
    };
    Ok((encode(0)?, encode(1)?))
}

/// The vacuum-excluded, renormalized 2x2 encoding matrices of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrices {
    pub stats: EffectiveForwardStats,
    pub bit0: DensityOperator,
    pub bit1: DensityOperator,
    pub average: DensityOperator,
}

/// Closed-form effective matrices in the basis `{|0>|E_b0>, |1>|E_b1>}`.
pub fn effective_matrices(params: &AttackParams, branch: Branch) -> Result<EffectiveMatrices> {
    params.validate()?;
    let stats = EffectiveForwardStats::from_params(params);
    if stats.efficiency(branch) <= 0.0 {
        return Err(degenerate(format!(
            "forward branch {} never arrives as a qubit",
            branch.index()
        )));
    }
    let (a, b) = stats.conditional(branch);
    let off = (a * b).sqrt();
    let bit0 = ComplexMatrix::from_real(2, 2, &[a, off, off, b])?;
    let bit1 = ComplexMatrix::from_real(2, 2, &[a, -off, -off, b])?;
    let average = ComplexMatrix::from_real_diagonal(&[a, b]);
    Ok(EffectiveMatrices {
        stats,
        bit0: DensityOperator::new(bit0, vec![2])?,
        bit1: DensityOperator::new(bit1, vec![2])?,
        average: DensityOperator::new(average, vec![2])?,
    })
}

/// Projects an encoded joint state onto the non-vacuum subspace, renormalizes,
/// and restricts it to `{|0>|E_b0>, |1>|E_b1>}`, the only non-vacuum support
/// of a branch state.
pub fn compress_to_branch_basis(
    state: &DensityOperator,
    branch: Branch,
) -> Result<DensityOperator> {
    let [_, e0, e1] = branch.ancillas();
    let idx = [
        qubit_level(0) * ANCILLA_DIM + e0,
        qubit_level(1) * ANCILLA_DIM + e1,
    ];
    let mut non_vacuum = state.matrix().clone();
    for i in 0..ANCILLA_DIM {
        for j in 0..TRAVEL_DIM * ANCILLA_DIM {
            non_vacuum[(VACUUM * ANCILLA_DIM + i, j)] = ZERO;
            non_vacuum[(j, VACUUM * ANCILLA_DIM + i)] = ZERO;
        }
    }
    let weight = non_vacuum.trace().re;
    if weight <= 0.0 {
        return Err(degenerate(format!(
            "forward branch {} never arrives as a qubit",
            branch.index()
        )));
    }
    let leak = weight - non_vacuum.submatrix(&idx).trace().re;
    debug_assert!(
        leak.abs() < 1e-12,
        "non-vacuum weight outside the branch basis"
    );
    DensityOperator::new(non_vacuum.submatrix(&idx).scale_real(1.0 / weight), vec![2])
}

/// `½|0><0| ⊗ ρ0 + ½|1><1| ⊗ ρ1` with a classical key-bit register first.
pub fn classical_quantum_state(
    bit0: &DensityOperator,
    bit1: &DensityOperator,
) -> Result<DensityOperator> {
    let k0 = ComplexMatrix::from_real_diagonal(&[0.5, 0.0]);
    let k1 = ComplexMatrix::from_real_diagonal(&[0.0, 0.5]);
    let m = tensor(&k0, bit0.matrix()).add(&tensor(&k1, bit1.matrix()));
    let mut dims = vec![2];
    dims.extend_from_slice(bit0.factor_dims());
    DensityOperator::new(m, dims)
}

/// `S(A'|AE)` computed from explicit matrices: the encoded joint states are
/// vacuum-projected numerically, assembled into the classical-quantum state
/// with the key bit, and the entropy of the average is subtracted.
pub fn eve_entropy_oracle(params: &AttackParams, branch: Branch) -> Result<f64> {
    let (enc0, enc1) = encoded_states(params, branch)?;
    let rho0 = compress_to_branch_basis(&enc0, branch)?;
    let rho1 = compress_to_branch_basis(&enc1, branch)?;
    let cq = classical_quantum_state(&rho0, &rho1)?;
    let avg = DensityOperator::mixture(&[(0.5, &rho0), (0.5, &rho1)])?;
    Ok(von_neumann_entropy(&cq) - von_neumann_entropy(&avg))
}

/// Applies a qubit-input Kraus channel (3x2 operators) to the travel half of a
/// `[2, 2]` home ⊗ travel state, giving a `[2, 3]` state.
pub fn apply_to_travel(
    home_travel: &DensityOperator,
    kraus: &[ComplexMatrix],
) -> Result<DensityOperator> {
    let home_id = ComplexMatrix::identity(home_travel.factor_dims()[0]);
    let out_dim = home_id.rows() * kraus[0].rows();
    let m = kraus
        .iter()
        .fold(ComplexMatrix::zeros(out_dim, out_dim), |acc, k| {
            acc.add(&tensor(&home_id, k).conjugate(home_travel.matrix()))
        });
    DensityOperator::new(hermitize(m), vec![home_id.rows(), kraus[0].rows()])
}

/// Removes the anti-Hermitian rounding residue of a product of operators.
pub(crate) fn hermitize(m: ComplexMatrix) -> ComplexMatrix {
    m.add(&m.adjoint()).scale_real(0.5)
}

/// `|Φ+> = (|00> + |11>)/√2` on home ⊗ travel qubits.
pub fn phi_plus() -> DensityOperator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = StateVector::new(vec![re(h), ZERO, ZERO, re(h)]).expect("normalized");
    DensityOperator::from_pure(&ket, vec![2, 2]).expect("pure state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{binary_entropy, partial_trace, ONE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_params<R: Rng>(rng: &mut R) -> AttackParams {
        let row = |rng: &mut R| {
            let mut w = [
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
            ];
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w
        };
        let [a, b, c] = row(rng);
        let [d, e, f] = row(rng);
        AttackParams::new(a, b, c, d, e, f).unwrap()
    }

    #[test]
    fn rejects_invalid_rows() {
        assert!(AttackParams::new(0.1, 0.9, 0.1, 0.0, 0.0, 1.0).is_err());
        assert!(AttackParams::new(-0.1, 1.1, 0.0, 0.0, 0.0, 1.0).is_err());
        let err = AttackParams::new(0.0, 1.0, 0.0, 0.5, 0.0, 0.4).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn identity_attack_kraus() {
        let ops = forward_kraus(&AttackParams::identity()).unwrap();
        let nonzero: Vec<_> = ops
            .iter()
            .filter(|k| k.entries().iter().any(|z| z.norm() > 0.0))
            .collect();
        assert_eq!(nonzero.len(), 2);
        assert_eq!(nonzero[0][(qubit_level(0), 0)], ONE);
        assert_eq!(nonzero[1][(qubit_level(1), 1)], ONE);
    }

    #[test]
    fn pure_loss_outputs_vacuum() {
        let params = AttackParams::pure_loss();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let input = crate::qmath::random::random_density_operator(&mut rng, 2);
        for ops in [
            forward_kraus(&params).unwrap(),
            coherent_kraus(&params).unwrap(),
        ] {
            let out = ops.iter().fold(ComplexMatrix::zeros(3, 3), |acc, k| {
                acc.add(&k.conjugate(input.matrix()))
            });
            let vac = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]);
            assert!(out.max_abs_diff(&vac) < 1e-15);
        }
    }

    #[test]
    fn completeness_on_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            for ops in [forward_kraus(&p).unwrap(), coherent_kraus(&p).unwrap()] {
                let c = kraus_completeness(&ops);
                assert!(c.max_abs_diff(&ComplexMatrix::identity(2)) <= 1e-12);
            }
        }
    }

    #[test]
    fn joint_state_identity_attack() {
        let rho = joint_state_after_forward(&AttackParams::identity()).unwrap();
        let mut expected = ComplexMatrix::zeros(18, 18);
        expected[(qubit_level(0) * 6 + 1, qubit_level(0) * 6 + 1)] = re(0.5);
        expected[(qubit_level(1) * 6 + 5, qubit_level(1) * 6 + 5)] = re(0.5);
        assert!(rho.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn joint_state_travel_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            let rho = joint_state_after_forward(&p).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-10);
            let travel = partial_trace(&rho, &[0]).unwrap();
            let expect = [
                (p.p0v + p.p1v) / 2.0,
                (p.p00 + p.p10) / 2.0,
                (p.p01 + p.p11) / 2.0,
            ];
            for (i, e) in expect.iter().enumerate() {
                assert!((travel.matrix()[(i, i)].re - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn encoded_states_identity_attack() {
        let (bit0, bit1) = encoded_states(&AttackParams::identity(), Branch::Zero).unwrap();
        let mut expected = ComplexMatrix::zeros(18, 18);
        expected[(qubit_level(0) * 6 + 1, qubit_level(0) * 6 + 1)] = ONE;
        assert!(bit0.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(bit1.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn encoded_states_match_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let p = random_params(&mut rng);
            for branch in Branch::BOTH {
                let (bit0, bit1) = encoded_states(&p, branch).unwrap();
                assert!((bit0.matrix().trace().re - 1.0).abs() < 1e-10);
                assert!((bit1.matrix().trace().re - 1.0).abs() < 1e-10);
                let [pv, pa, pb] = p.row(branch);
                let [ev, ea, eb] = branch.ancillas();
                // vacuum part: p_iv P{|v>|E_iv>}
                let vac = VACUUM * 6 + ev;
                assert!((bit0.matrix()[(vac, vac)].re - pv).abs() < 1e-12);
                // non-vacuum part: rank-1 projector, sign flipped for bit 1
                let ia = qubit_level(0) * 6 + ea;
                let ib = qubit_level(1) * 6 + eb;
                let mut ket = vec![ZERO; 18];
                ket[ia] = re(pa.sqrt());
                ket[ib] = re(pb.sqrt());
                let proj = ComplexMatrix::outer(&ket, &ket);
                let block = [ia, ib];
                assert!(
                    bit0.matrix()
                        .submatrix(&block)
                        .max_abs_diff(&proj.submatrix(&block))
                        < 1e-12
                );
                assert!((bit1.matrix()[(ia, ib)].re + (pa * pb).sqrt()).abs() < 1e-12);
                // no qubit-vacuum coherence survives
                for j in [ia, ib] {
                    assert!(bit0.matrix()[(vac, j)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn effective_matrices_symmetric_flip() {
        let p = AttackParams::new(0.2, 0.4, 0.4, 0.2, 0.4, 0.4).unwrap();
        let m = effective_matrices(&p, Branch::Zero).unwrap();
        let half = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(m.bit0.matrix().max_abs_diff(&half) < 1e-15);
        assert!(
            m.average
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
                < 1e-15
        );
    }

    #[test]
    fn effective_matrices_error_free() {
        let p = AttackParams::new(0.3, 0.7, 0.0, 0.3, 0.0, 0.7).unwrap();
        let m = effective_matrices(&p, Branch::Zero).unwrap();
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(m.bit0.matrix().max_abs_diff(&d) < 1e-15);
        assert!(m.bit1.matrix().max_abs_diff(&d) < 1e-15);
    }

    #[test]
    fn effective_matrices_match_projected_encodings() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let p = random_params(&mut rng);
            for branch in Branch::BOTH {
                let eff = effective_matrices(&p, branch).unwrap();
                let (e0, e1) = encoded_states(&p, branch).unwrap();
                let r0 = compress_to_branch_basis(&e0, branch).unwrap();
                let r1 = compress_to_branch_basis(&e1, branch).unwrap();
                assert!(eff.bit0.matrix().max_abs_diff(r0.matrix()) <= 1e-10);
                assert!(eff.bit1.matrix().max_abs_diff(r1.matrix()) <= 1e-10);
                let avg = r0.matrix().add(r1.matrix()).scale_real(0.5);
                assert!(eff.average.matrix().max_abs_diff(&avg) <= 1e-10);
                assert!(eff.average.matrix()[(0, 1)].norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn dead_branch_is_degenerate() {
        let p = AttackParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            effective_matrices(&p, Branch::Zero),
            Err(Error::DegenerateChannel(_))
        ));
        assert!(matches!(
            eve_entropy_oracle(&p, Branch::Zero),
            Err(Error::DegenerateChannel(_))
        ));
        assert!(effective_matrices(&p, Branch::One).is_ok());
        let stats = EffectiveForwardStats::from_params(&p);
        assert_eq!((stats.p00_prime, stats.p01_prime), (0.5, 0.5));
    }

    #[test]
    fn oracle_boundary_values() {
        let clean = AttackParams::new(0.1, 0.9, 0.0, 0.1, 0.0, 0.9).unwrap();
        assert!((eve_entropy_oracle(&clean, Branch::Zero).unwrap() - 1.0).abs() < 1e-12);
        let noisy = AttackParams::new(0.0, 0.5, 0.5, 0.0, 0.5, 0.5).unwrap();
        assert!(eve_entropy_oracle(&noisy, Branch::Zero).unwrap().abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let stats = EffectiveForwardStats::from_params(&p);
            for branch in Branch::BOTH {
                let s = eve_entropy_oracle(&p, branch).unwrap();
                let analytic = 1.0 - binary_entropy(stats.flip(branch)).unwrap();
                assert!((s - analytic).abs() <= 1e-9, "{s} vs {analytic}");
            }
        }
    }

    #[test]
    fn encoding_ops_structure() {
        for a in EncodingOp::ALL {
            let m = a.matrix();
            assert!(
                m.matmul(&m.adjoint())
                    .max_abs_diff(&ComplexMatrix::identity(3))
                    == 0.0
            );
            assert_eq!(m[(0, 0)], ONE);
            for b in EncodingOp::ALL {
                let mb = b.matrix();
                assert_eq!(m.matmul(&mb), mb.matmul(&m));
            }
        }
        let qubit = |op: EncodingOp| op.matrix().submatrix(&[1, 2]);
        assert_eq!(
            qubit(EncodingOp::I1),
            qubit(EncodingOp::I0).scale_real(-1.0)
        );
        assert_eq!(
            qubit(EncodingOp::Y1),
            qubit(EncodingOp::Y0).scale_real(-1.0)
        );
        assert_eq!(EncodingOp::I1.key_bit(), 0);
        assert_eq!(EncodingOp::Y1.key_bit(), 1);
    }

    #[test]
    fn averaging_kills_vacuum_coherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let rho = crate::qmath::random::random_density_operator(&mut rng, 3);
            for bit in [0, 1] {
                let avg = average_encoding(rho.matrix(), bit);
                for q in 1..3 {
                    assert!(avg[(0, q)].norm() <= 1e-12);
                    assert!(avg[(q, 0)].norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn coherent_channel_preserves_bell_phase() {
        let out = apply_to_travel(
            &phi_plus(),
            &coherent_kraus(&AttackParams::identity()).unwrap(),
        )
        .unwrap();
        // |00> and |11> coherence survives in the [2,3] layout
        assert!((out.matrix()[(qubit_level(0), 3 + qubit_level(1))].re - 0.5).abs() < 1e-15);
        let dephased = apply_to_travel(
            &phi_plus(),
            &forward_kraus(&AttackParams::identity()).unwrap(),
        )
        .unwrap();
        assert!(dephased.matrix()[(qubit_level(0), 3 + qubit_level(1))].norm() < 1e-15);
    }

    #[test]
    fn params_json_schema() {
        let p: AttackParams = serde_json::from_str(
            r#"{"p0v":0.1,"p00":0.88,"p01":0.02,"p1v":0.1,"p10":0.02,"p11":0.88}"#,
        )
        .unwrap();
        assert_eq!(p.p00, 0.88);
        let bad = serde_json::from_str::<AttackParams>(
            r#"{"p0v":0.5,"p00":0.88,"p01":0.02,"p1v":0.1,"p10":0.02,"p11":0.88}"#,
        );
        assert!(bad.unwrap_err().to_string().contains("row 0"));
        let back = serde_json::to_string(&p).unwrap();
        assert!(back.contains("\"p0v\":0.1"));
    }
}
