//! Minimal pure-state quantum engine for one and two qubits.
//!
//! Supports exactly what the protocol needs: preparing Bell pairs and
//! polarization states, applying I/X/Z, projective measurement in a
//! rotated basis B(θ), and Bell-basis measurement. Global phase is
//! ignored everywhere; [`fidelity`] is the only state comparison.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use thiserror::Error;

pub type Amplitude = Complex64;

/// Tolerance on Σ|amp|² for accepting a state as normalized.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QsimError {
    #[error("qubit index {index} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("amplitude vector of length {0} is not a 1- or 2-qubit register")]
    BadLength(usize),
    #[error("state norm² = {0}, expected 1")]
    NotNormalized(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("basis angle {0} outside [0, pi/2)")]
    BadBasisAngle(f64),
    #[error("dimension mismatch: {0}-qubit vs {1}-qubit state")]
    DimensionMismatch(usize, usize),
    #[error("expected a 2-qubit state, got {0} qubits")]
    NotTwoQubits(usize),
    #[error("qubit {0} is entangled with the rest of the register")]
    Entangled(usize),
}

/// Result of a projective measurement: the + or − eigenstate branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
        })
    }
}

/// Measuring basis B(θ) with eigenstates
/// |+θ⟩ = cosθ|0⟩ + sinθ|1⟩ and |−θ⟩ = −sinθ|0⟩ + cosθ|1⟩, θ ∈ [0, π/2).
///
/// B(0) is σ_z and B(π/4) is σ_x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasBasis {
    theta: f64,
}

impl MeasBasis {
    pub fn new(theta: f64) -> Result<Self, QsimError> {
        if !theta.is_finite() || !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(QsimError::BadBasisAngle(theta));
        }
        Ok(Self { theta })
    }

    pub fn sigma_z() -> Self {
        Self { theta: 0.0 }
    }

    pub fn sigma_x() -> Self {
        Self { theta: FRAC_PI_4 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_sigma_z(&self) -> bool {
        self.theta == 0.0
    }

    pub fn is_sigma_x(&self) -> bool {
        self.theta == FRAC_PI_4
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl std::fmt::Display for BellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
        })
    }
}

/// Single-qubit operations the protocol and channel use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SingleQubitOp {
    I,
    X,
    Z,
}

impl SingleQubitOp {
    /// Row-major 2×2 matrix in the computational basis.
    fn matrix(self) -> [[Amplitude; 2]; 2] {
        let o = Amplitude::new(0.0, 0.0);
        let l = Amplitude::new(1.0, 0.0);
        match self {
            SingleQubitOp::I => [[l, o], [o, l]],
            SingleQubitOp::X => [[o, l], [l, o]],
            SingleQubitOp::Z => [[l, o], [o, -l]],
        }
    }
}

impl std::fmt::Display for SingleQubitOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SingleQubitOp::I => "I",
            SingleQubitOp::X => "X",
            SingleQubitOp::Z => "Z",
        })
    }
}

/// Dense pure state over 1 or 2 qubits.
///
/// Qubit 0 owns the most significant bit of the amplitude index, so for
/// two qubits the order is |00⟩, |01⟩, |10⟩, |11⟩. In protocol terms
/// qubit 0 is Bob's home qubit H and qubit 1 the travel qubit T.
#[derive(Debug, Clone)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Builds a state from raw amplitudes; rejects wrong lengths,
    /// non-finite entries and non-normalized vectors.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self, QsimError> {
        let num_qubits = match amps.len() {
            2 => 1,
            4 => 2,
            n => return Err(QsimError::BadLength(n)),
        };
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QsimError::NonFinite);
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(QsimError::NotNormalized(norm2));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Computational basis state |index⟩ of a 1- or 2-qubit register.
    pub fn computational(num_qubits: usize, index: usize) -> Self {
        assert!(
            (1..=2).contains(&num_qubits) && index < (1 << num_qubits),
            "bad computational basis state ({num_qubits} qubits, index {index})"
        );
        let mut amps = vec![Amplitude::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Amplitude::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    fn check_target(&self, target: usize) -> Result<(), QsimError> {
        if target >= self.num_qubits {
            return Err(QsimError::QubitOutOfRange {
                index: target,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Bit mask selecting the target qubit inside an amplitude index.
    fn mask(&self, target: usize) -> usize {
        1 << (self.num_qubits - 1 - target)
    }
}

/// |+θ⟩ for `Outcome::Plus`, |−θ⟩ for `Outcome::Minus`.
pub fn basis_state(basis: MeasBasis, sign: Outcome) -> StateVector {
    let (c, s) = (basis.theta.cos(), basis.theta.sin());
    let amps = match sign {
        Outcome::Plus => vec![Amplitude::new(c, 0.0), Amplitude::new(s, 0.0)],
        Outcome::Minus => vec![Amplitude::new(-s, 0.0), Amplitude::new(c, 0.0)],
    };
    StateVector {
        num_qubits: 1,
        amps,
    }
}

/// The named Bell state; qubit 0 is the home qubit, qubit 1 the travel qubit.
pub fn prepare_bell(label: BellLabel) -> StateVector {
    let r = Amplitude::new(FRAC_1_SQRT_2, 0.0);
    let o = Amplitude::new(0.0, 0.0);
    let amps = match label {
        BellLabel::PhiPlus => vec![r, o, o, r],
        BellLabel::PhiMinus => vec![r, o, o, -r],
        BellLabel::PsiPlus => vec![o, r, r, o],
        BellLabel::PsiMinus => vec![o, r, -r, o],
    };
    StateVector {
        num_qubits: 2,
        amps,
    }
}

/// Applies a single-qubit unitary to the target qubit.
pub fn apply_op(
    state: &StateVector,
    op: SingleQubitOp,
    target: usize,
) -> Result<StateVector, QsimError> {
    state.check_target(target)?;
    let m = op.matrix();
    let mask = state.mask(target);
    let mut amps = state.amps.clone();
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a0, a1) = (state.amps[i], state.amps[j]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
    Ok(StateVector {
        num_qubits: state.num_qubits,
        amps,
    })
}

/// Rotates the target qubit by R(θ)† so that B(θ) becomes the
/// computational basis (`undo = false`), or back (`undo = true`).
fn rotate_basis(state: &StateVector, target: usize, theta: f64, undo: bool) -> StateVector {
    let (c, s) = (theta.cos(), theta.sin());
    // R(θ) columns are |+θ⟩ and |−θ⟩; forward direction applies R(θ)†.
    let (m01, m10) = if undo { (-s, s) } else { (s, -s) };
    let mask = state.mask(target);
    let mut amps = state.amps.clone();
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a0, a1) = (state.amps[i], state.amps[j]);
            amps[i] = a0 * c + a1 * m01;
            amps[j] = a0 * m10 + a1 * c;
        }
    }
    StateVector {
        num_qubits: state.num_qubits,
        amps,
    }
}

/// Projective measurement of one qubit in B(θ).
///
/// Draws the outcome with Born probabilities from one uniform draw and
/// returns the renormalized post-measurement state. A zero-probability
/// branch is never returned.
pub fn measure<R: Rng + ?Sized>(
    state: &StateVector,
    target: usize,
    basis: MeasBasis,
    rng: &mut R,
) -> Result<(Outcome, StateVector), QsimError> {
    state.check_target(target)?;
    let rotated = rotate_basis(state, target, basis.theta, false);
    let mask = rotated.mask(target);
    let mut p_plus = 0.0;
    let mut p_minus = 0.0;
    for (i, a) in rotated.amps.iter().enumerate() {
        if i & mask == 0 {
            p_plus += a.norm_sqr();
        } else {
            p_minus += a.norm_sqr();
        }
    }
    // One uniform draw against the + branch; the scaling by the branch sum
    // keeps the split exact even with 1e-9 norm drift.
    let u: f64 = rng.random();
    let (outcome, keep_bit, p) = if u * (p_plus + p_minus) < p_plus {
        (Outcome::Plus, 0, p_plus)
    } else {
        (Outcome::Minus, mask, p_minus)
    };
    let scale = Amplitude::new(1.0 / p.sqrt(), 0.0);
    let mut amps = rotated.amps;
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == keep_bit {
            *a *= scale;
        } else {
            *a = Amplitude::new(0.0, 0.0);
        }
    }
    let collapsed = rotate_basis(
        &StateVector {
            num_qubits: state.num_qubits,
            amps,
        },
        target,
        basis.theta,
        true,
    );
    Ok((outcome, collapsed))
}

/// Bell-basis measurement of a 2-qubit state.
///
/// The label is drawn with probabilities |⟨Bell|state⟩|² and the collapsed
/// state is the corresponding Bell state.
pub fn bell_measure<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(BellLabel, StateVector), QsimError> {
    if state.num_qubits != 2 {
        return Err(QsimError::NotTwoQubits(state.num_qubits));
    }
    let a = &state.amps;
    let r = FRAC_1_SQRT_2;
    let overlaps = [
        (BellLabel::PsiPlus, (a[1] + a[2]) * r),
        (BellLabel::PsiMinus, (a[1] - a[2]) * r),
        (BellLabel::PhiPlus, (a[0] + a[3]) * r),
        (BellLabel::PhiMinus, (a[0] - a[3]) * r),
    ];
    let total: f64 = overlaps.iter().map(|(_, o)| o.norm_sqr()).sum();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = None;
    for (label, overlap) in overlaps {
        let p = overlap.norm_sqr();
        if p == 0.0 {
            continue;
        }
        acc += p;
        chosen = Some(label);
        if u * total < acc {
            break;
        }
    }
    let label = chosen.expect("normalized state has a nonzero Bell overlap");
    Ok((label, prepare_bell(label)))
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, QsimError> {
    if a.num_qubits != b.num_qubits {
        return Err(QsimError::DimensionMismatch(a.num_qubits, b.num_qubits));
    }
    let inner: Amplitude = a
        .amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(inner.norm_sqr())
}

/// Tensor product; `a`'s qubits come first.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector, QsimError> {
    let num_qubits = a.num_qubits + b.num_qubits;
    if num_qubits > 2 {
        return Err(QsimError::BadLength(1 << num_qubits));
    }
    let mut amps = Vec::with_capacity(1 << num_qubits);
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    Ok(StateVector { num_qubits, amps })
}

/// Factors one qubit out of a product state.
///
/// Errors if the register is still entangled (the 2×2 amplitude matrix has
/// a non-negligible determinant, i.e. nonzero concurrence).
pub fn extract_qubit(state: &StateVector, keep: usize) -> Result<StateVector, QsimError> {
    state.check_target(keep)?;
    if state.num_qubits == 1 {
        return Ok(state.clone());
    }
    let at = |kb: usize, ob: usize| {
        let idx = if keep == 0 { (kb << 1) | ob } else { (ob << 1) | kb };
        state.amps[idx]
    };
    let det = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
    if det.norm() > 1e-9 {
        return Err(QsimError::Entangled(keep));
    }
    // Columns over the other qubit's index are all proportional to the kept
    // qubit's state; take the one with the larger norm and renormalize.
    let col = |ob: usize| (at(0, ob), at(1, ob));
    let norm2 = |c: (Amplitude, Amplitude)| c.0.norm_sqr() + c.1.norm_sqr();
    let (c0, c1) = if norm2(col(0)) >= norm2(col(1)) {
        col(0)
    } else {
        col(1)
    };
    let scale = Amplitude::new(1.0 / norm2((c0, c1)).sqrt(), 0.0);
    Ok(StateVector {
        num_qubits: 1,
        amps: vec![c0 * scale, c1 * scale],
    })
}
