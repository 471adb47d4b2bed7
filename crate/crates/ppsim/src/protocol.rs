//! The ping-pong protocol state machine for honest Alice and Bob.
//!
//! Bob prepares |ψ+⟩, keeps the home qubit H and sends the travel qubit
//! T to Alice. In control mode Alice measures T and both compare against
//! the Bell correlations; in message mode she codes T with I or Z and
//! returns it for Bob's Bell-basis decode. The Original variant checks
//! only in σ_z; the Improved variant draws σ_z or σ_x uniformly.

use crate::adversary::{self, AdversaryError, AttackStrategy, EveRecord};
use crate::channel::{self, ChannelError, ChannelModel, DetectorModel, TransmitResult};
use crate::qsim::{
    self, BellLabel, MeasBasis, Outcome, QsimError, SingleQubitOp, StateVector,
};
use rand::Rng;
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

/// Home qubit index in Bob's register.
pub const HOME: usize = 0;
/// Travel qubit index in Bob's register.
pub const TRAVEL: usize = 1;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("control probability {0} outside [0,1]")]
    BadControlProb(f64),
    #[error("fixed message source needs at least one bit")]
    EmptyFixedMessage,
    #[error("no correlation defined for check basis theta = {0}")]
    UnsupportedCheckBasis(f64),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Control,
    Message,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Control => "control",
            Mode::Message => "message",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolVariant {
    Original,
    Improved,
}

impl std::fmt::Display for ProtocolVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProtocolVariant::Original => "original",
            ProtocolVariant::Improved => "improved",
        })
    }
}

/// Expected relation between Alice's and Bob's check outcomes on |ψ+⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    Same,
    Opposite,
}

/// 0 → I, 1 → Z.
pub fn encode(bit: bool) -> SingleQubitOp {
    if bit {
        SingleQubitOp::Z
    } else {
        SingleQubitOp::I
    }
}

/// Bob's decode of his Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Bit(bool),
    /// φ± outcome: the channel or an adversary corrupted the pair.
    Anomaly,
}

pub fn decode(label: BellLabel) -> Decoded {
    match label {
        BellLabel::PsiPlus => Decoded::Bit(false),
        BellLabel::PsiMinus => Decoded::Bit(true),
        BellLabel::PhiPlus | BellLabel::PhiMinus => Decoded::Anomaly,
    }
}

/// |ψ+⟩ anti-correlates in σ_z and correlates in σ_x.
pub fn expected_correlation(basis: MeasBasis) -> Result<Correlation, ProtocolError> {
    if basis.theta() == 0.0 {
        Ok(Correlation::Opposite)
    } else if (basis.theta() - FRAC_PI_4).abs() < 1e-12 {
        Ok(Correlation::Same)
    } else {
        Err(ProtocolError::UnsupportedCheckBasis(basis.theta()))
    }
}

/// Where Alice's message bits come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageSource {
    /// Uniform bit per message round.
    Random,
    /// Cycles through a fixed pattern.
    Fixed(Vec<bool>),
}

/// Stateful reader over a [`MessageSource`].
#[derive(Debug, Clone)]
pub struct MessageStream {
    source: MessageSource,
    cursor: usize,
}

impl MessageStream {
    pub fn new(source: MessageSource) -> Result<Self, ProtocolError> {
        if matches!(&source, MessageSource::Fixed(bits) if bits.is_empty()) {
            return Err(ProtocolError::EmptyFixedMessage);
        }
        Ok(Self { source, cursor: 0 })
    }

    pub fn next_bit<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        match &self.source {
            MessageSource::Random => rng.random::<f64>() < 0.5,
            MessageSource::Fixed(bits) => {
                let bit = bits[self.cursor % bits.len()];
                self.cursor += 1;
                bit
            }
        }
    }
}

/// Everything observed in one protocol round.
///
/// Control rounds populate the check fields, message rounds the coding
/// fields; lost rounds populate neither.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub mode: Mode,
    pub lost: bool,
    pub check_basis: Option<MeasBasis>,
    pub alice_outcome: Option<Outcome>,
    pub bob_outcome: Option<Outcome>,
    pub mismatch: Option<bool>,
    pub alice_op: Option<SingleQubitOp>,
    pub message_bit: Option<bool>,
    pub decoded_bit: Option<bool>,
    pub decode_anomaly: bool,
    pub eve_guess: Option<bool>,
}

impl RoundRecord {
    fn lost(mode: Mode) -> Self {
        Self {
            mode,
            lost: true,
            check_basis: None,
            alice_outcome: None,
            bob_outcome: None,
            mismatch: None,
            alice_op: None,
            message_bit: None,
            decoded_bit: None,
            decode_anomaly: false,
            eve_guess: None,
        }
    }
}

/// The signal Alice receives: either the still-entangled travel qubit or
/// Eve's substituted photon burst alongside the collapsed pair.
enum ForwardSignal {
    Entangled(StateVector),
    Burst {
        photons: Vec<StateVector>,
        pair: StateVector,
        eve: EveRecord,
    },
}

/// Runs one full protocol round.
///
/// Mode is drawn with probability `control_prob` for control. Whether the
/// honest channel or Eve owns the line depends on `strategy`: under an
/// attack Eve intercepts right at Bob's lab, and only a baseline-emulating
/// attack re-injects channel loss and noise toward the honest parties.
pub fn run_round<R: Rng + ?Sized>(
    variant: ProtocolVariant,
    control_prob: f64,
    channel_model: &ChannelModel,
    detector: &DetectorModel,
    strategy: &AttackStrategy,
    source: &mut MessageStream,
    rng: &mut R,
) -> Result<RoundRecord, ProtocolError> {
    if !control_prob.is_finite() || !(0.0..=1.0).contains(&control_prob) {
        return Err(ProtocolError::BadControlProb(control_prob));
    }
    let mode = if rng.random::<f64>() < control_prob {
        Mode::Control
    } else {
        Mode::Message
    };

    let pair = qsim::prepare_bell(BellLabel::PsiPlus);
    let emulate_baseline = matches!(
        strategy,
        AttackStrategy::Pns(cfg) if cfg.emulate_baseline
    );

    let signal = if strategy.is_attack() {
        let intercept = adversary::on_forward(&pair, TRAVEL, strategy, rng)?;
        // Eve's fake burst rides her own line; with baseline emulation the
        // whole burst is subject to one Bernoulli loss at the honest rate.
        if emulate_baseline && rng.random::<f64>() < channel_model.loss_prob {
            return Ok(RoundRecord::lost(mode));
        }
        ForwardSignal::Burst {
            photons: intercept.to_alice,
            pair: intercept.collapsed,
            eve: intercept.eve,
        }
    } else {
        match channel::transmit(&pair, TRAVEL, channel_model, rng)? {
            TransmitResult::Lost => return Ok(RoundRecord::lost(mode)),
            TransmitResult::Delivered(pair) => ForwardSignal::Entangled(pair),
        }
    };

    match mode {
        Mode::Control => {
            let basis = match variant {
                ProtocolVariant::Original => MeasBasis::sigma_z(),
                ProtocolVariant::Improved => {
                    if rng.random::<f64>() < 0.5 {
                        MeasBasis::sigma_z()
                    } else {
                        MeasBasis::sigma_x()
                    }
                }
            };
            let (alice_outcome, bob_pair) = match &signal {
                ForwardSignal::Entangled(pair) => {
                    let (o, collapsed) = qsim::measure(pair, TRAVEL, basis, rng)?;
                    (o, collapsed)
                }
                ForwardSignal::Burst { photons, pair, .. } => {
                    let detection = channel::detect_burst(photons, basis, detector, rng)?;
                    (detection.outcome, pair.clone())
                }
            };
            let (bob_outcome, _) = qsim::measure(&bob_pair, HOME, basis, rng)?;
            let observed = if alice_outcome == bob_outcome {
                Correlation::Same
            } else {
                Correlation::Opposite
            };
            let mismatch = observed != expected_correlation(basis)?;
            Ok(RoundRecord {
                mode,
                lost: false,
                check_basis: Some(basis),
                alice_outcome: Some(alice_outcome),
                bob_outcome: Some(bob_outcome),
                mismatch: Some(mismatch),
                alice_op: None,
                message_bit: None,
                decoded_bit: None,
                decode_anomaly: false,
                eve_guess: None,
            })
        }
        Mode::Message => {
            let bit = source.next_bit(rng);
            let op = encode(bit);
            let (joint, eve_guess) = match signal {
                ForwardSignal::Entangled(pair) => {
                    let coded = qsim::apply_op(&pair, op, TRAVEL)?;
                    match channel::transmit(&coded, TRAVEL, channel_model, rng)? {
                        TransmitResult::Lost => return Ok(RoundRecord::lost(mode)),
                        TransmitResult::Delivered(pair) => (pair, None),
                    }
                }
                ForwardSignal::Burst { photons, pair, eve } => {
                    let coded: Result<Vec<StateVector>, QsimError> = photons
                        .iter()
                        .map(|photon| qsim::apply_op(photon, op, 0))
                        .collect();
                    let (to_bob, eve) = adversary::on_return(&coded?, &eve, strategy, rng)?;
                    let to_bob = if emulate_baseline {
                        match channel::transmit(&to_bob, 0, channel_model, rng)? {
                            TransmitResult::Lost => return Ok(RoundRecord::lost(mode)),
                            TransmitResult::Delivered(photon) => photon,
                        }
                    } else {
                        to_bob
                    };
                    let home = qsim::extract_qubit(&pair, HOME)?;
                    (qsim::tensor(&home, &to_bob)?, eve.guess)
                }
            };
            let (label, _) = qsim::bell_measure(&joint, rng)?;
            let (decoded_bit, decode_anomaly) = match decode(label) {
                Decoded::Bit(b) => (Some(b), false),
                Decoded::Anomaly => (None, true),
            };
            Ok(RoundRecord {
                mode,
                lost: false,
                check_basis: None,
                alice_outcome: None,
                bob_outcome: None,
                mismatch: None,
                alice_op: Some(op),
                message_bit: Some(bit),
                decoded_bit,
                decode_anomaly,
                eve_guess,
            })
        }
    }
}
