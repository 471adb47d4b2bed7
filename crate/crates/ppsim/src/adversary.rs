//! Eavesdropping strategies, centrally the multi-photon fake-signal
//! attack that exploits detector dead time.
//!
//! Eve intercepts the travel qubit on its way to Alice, measures it in
//! σ_z and substitutes a fake signal. On the way back she splits off all
//! but one photon and measures them in the basis aligned with her forward
//! outcome; a single − click reveals that Alice coded Z.

use crate::qsim::{
    self, MeasBasis, Outcome, QsimError, SingleQubitOp, StateVector,
};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("the no-attack strategy has no interception hooks")]
    NoAttackHook,
    #[error("photon-number splitting needs at least 2 photons, got {0}")]
    TooFewPhotons(usize),
    #[error("n_photons must be at least 2, got {0}")]
    BadPhotonCount(u32),
    #[error("return leg expects exactly one photon, got {0}")]
    UnexpectedBurst(usize),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Parameters of the multi-photon fake-signal attack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnsConfig {
    pub n_photons: u32,
    /// Fake-signal angle; the sampling error Eve introduces is sin²θ.
    pub theta: f64,
    /// When set, Eve re-injects the baseline loss and noise rates toward
    /// the honest parties so her presence does not shift their
    /// observables; when off her substituted segments are simply ideal.
    pub emulate_baseline: bool,
}

impl PnsConfig {
    pub fn new(n_photons: u32, theta: f64, emulate_baseline: bool) -> Result<Self, AdversaryError> {
        if n_photons < 2 {
            return Err(AdversaryError::BadPhotonCount(n_photons));
        }
        MeasBasis::new(theta)?;
        Ok(Self {
            n_photons,
            theta,
            emulate_baseline,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackStrategy {
    NoAttack,
    /// Measure the travel qubit in σ_z and resend the collapsed eigenstate.
    InterceptResendZ,
    Pns(PnsConfig),
}

impl AttackStrategy {
    pub fn is_attack(&self) -> bool {
        !matches!(self, AttackStrategy::NoAttack)
    }

    /// Excess of sin²θ over the tolerated error rate, if the configured
    /// fake angle violates the detectability bound sin²θ ≤ eps_c.
    pub fn bound_violation(&self, eps_c: f64) -> Option<f64> {
        match self {
            AttackStrategy::Pns(cfg) => {
                let eps_e = cfg.theta.sin().powi(2);
                (eps_e > eps_c + 1e-12).then_some(eps_e - eps_c)
            }
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AttackStrategy::NoAttack => "none",
            AttackStrategy::InterceptResendZ => "intercept",
            AttackStrategy::Pns(_) => "pns",
        }
    }
}

/// Eve's per-round bookkeeping.
#[derive(Debug, Clone)]
pub struct EveRecord {
    /// Her σ_z result on the intercepted travel qubit.
    pub forward_outcome: Outcome,
    /// Results on the photons she kept from the return leg.
    pub return_outcomes: Vec<Outcome>,
    /// Her bit guess, set once the return leg is measured.
    pub guess: Option<bool>,
    pub saw_minus: bool,
}

/// Everything Eve produces on the forward leg: the signal she forwards
/// to Alice and the collapsed state of the register she measured.
#[derive(Debug, Clone)]
pub struct ForwardIntercept {
    pub to_alice: Vec<StateVector>,
    pub collapsed: StateVector,
    pub eve: EveRecord,
}

/// Intercepts the travel qubit on the forward leg.
///
/// Measures qubit `travel` of `state` in σ_z (collapsing any partner
/// qubit with it) and fabricates the substitute signal: N copies of
/// |+θ⟩ for outcome +, of X|+θ⟩ for outcome −, or the bare eigenstate
/// for intercept-resend.
pub fn on_forward<R: Rng + ?Sized>(
    state: &StateVector,
    travel: usize,
    strategy: &AttackStrategy,
    rng: &mut R,
) -> Result<ForwardIntercept, AdversaryError> {
    let (forward_outcome, collapsed) = match strategy {
        AttackStrategy::NoAttack => return Err(AdversaryError::NoAttackHook),
        _ => qsim::measure(state, travel, MeasBasis::sigma_z(), rng)?,
    };
    let to_alice = match strategy {
        AttackStrategy::NoAttack => unreachable!(),
        AttackStrategy::InterceptResendZ => {
            let bit = match forward_outcome {
                Outcome::Plus => 0,
                Outcome::Minus => 1,
            };
            vec![StateVector::computational(1, bit)]
        }
        AttackStrategy::Pns(cfg) => {
            let plus = qsim::basis_state(MeasBasis::new(cfg.theta)?, Outcome::Plus);
            let fake = match forward_outcome {
                Outcome::Plus => plus,
                Outcome::Minus => qsim::apply_op(&plus, SingleQubitOp::X, 0)?,
            };
            vec![fake; cfg.n_photons as usize]
        }
    };
    Ok(ForwardIntercept {
        to_alice,
        collapsed,
        eve: EveRecord {
            forward_outcome,
            return_outcomes: Vec::new(),
            guess: None,
            saw_minus: false,
        },
    })
}

/// Intercepts the coded signal on the return leg.
///
/// Forwards the first photon to Bob untouched and measures the rest in
/// the basis aligned with the forward outcome: B(θ) after +, the
/// X-mirrored basis B(π/2−θ) after − (realized by conjugating with X,
/// which has identical statistics). Any − click means the uncoded fake
/// state was disturbed, so Eve guesses Z; all + means I.
pub fn on_return<R: Rng + ?Sized>(
    coded: &[StateVector],
    eve: &EveRecord,
    strategy: &AttackStrategy,
    rng: &mut R,
) -> Result<(StateVector, EveRecord), AdversaryError> {
    match strategy {
        AttackStrategy::NoAttack => Err(AdversaryError::NoAttackHook),
        AttackStrategy::InterceptResendZ => {
            let [photon] = coded else {
                return Err(AdversaryError::UnexpectedBurst(coded.len()));
            };
            Ok((photon.clone(), eve.clone()))
        }
        AttackStrategy::Pns(cfg) => {
            if coded.len() < 2 {
                return Err(AdversaryError::TooFewPhotons(coded.len()));
            }
            let to_bob = coded[0].clone();
            let basis = MeasBasis::new(cfg.theta)?;
            let mut return_outcomes = Vec::with_capacity(coded.len() - 1);
            for photon in &coded[1..] {
                let aligned = match eve.forward_outcome {
                    Outcome::Plus => photon.clone(),
                    Outcome::Minus => qsim::apply_op(photon, SingleQubitOp::X, 0)?,
                };
                let (o, _) = qsim::measure(&aligned, 0, basis, rng)?;
                return_outcomes.push(o);
            }
            let saw_minus = return_outcomes.contains(&Outcome::Minus);
            Ok((
                to_bob,
                EveRecord {
                    forward_outcome: eve.forward_outcome,
                    return_outcomes,
                    guess: Some(saw_minus),
                    saw_minus,
                },
            ))
        }
    }
}

/// Fraction of rounds where Eve's guess equals the true bit.
pub fn guess_accuracy(records: &[(EveRecord, bool)]) -> Result<f64, AdversaryError> {
    if records.is_empty() {
        return Err(AdversaryError::TooFewPhotons(0));
    }
    let correct = records
        .iter()
        .filter(|(record, bit)| record.guess == Some(*bit))
        .count();
    Ok(correct as f64 / records.len() as f64)
}
