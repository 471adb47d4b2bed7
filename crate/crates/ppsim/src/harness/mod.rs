//! Seeded Monte Carlo experiment engine with estimators, analytic
//! prediction joins and parameter sweeps.

mod config;
mod csv;
mod stats;

pub use config::{parse_attack, parse_message, parse_noise_kind, parse_variant, AttackChoice, ConfigBuilder};
pub use csv::{
    format_f64, summary_row, write_rounds_csv, write_summary_csv, ROUNDS_HEADER, SUMMARY_HEADER,
};
pub use stats::{empirical_mutual_information, Counter, RateEstimate, WILSON_Z_95};

use crate::adversary::{AdversaryError, AttackStrategy, PnsConfig};
use crate::analytics::{self, AnalyticsError};
use crate::channel::{self, ChannelError, ChannelModel, DetectorModel, NoiseKind};
use crate::protocol::{
    self, MessageSource, MessageStream, Mode, ProtocolError, ProtocolVariant, RoundRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("sweep parameter {0} does not apply to this configuration")]
    InapplicableParameter(&'static str),
    #[error("sweep needs at least one value")]
    EmptySweep,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] ::csv::Error),
}

impl HarnessError {
    /// Process exit code the CLI maps this error to: I/O problems are 2,
    /// everything else is a configuration error, 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) | HarnessError::Csv(_) => 2,
            _ => 1,
        }
    }
}

/// Noise family selector; the rate is always derived from `eps_c` via
/// [`channel::calibrate_from_error_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSelector {
    None,
    BitFlip,
    Depolarizing,
}

impl NoiseSelector {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseSelector::None => "none",
            NoiseSelector::BitFlip => "bitflip",
            NoiseSelector::Depolarizing => "depolarizing",
        }
    }
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub variant: ProtocolVariant,
    pub rounds: u64,
    /// Probability of control mode per round.
    pub c: f64,
    /// Baseline channel error rate; also the attack's noise budget.
    pub eps_c: f64,
    pub noise_kind: NoiseSelector,
    pub loss_prob: f64,
    pub attack: AttackStrategy,
    pub seed: u64,
    pub message: MessageSource,
    pub per_round_log: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.rounds < 1 {
            return Err(HarnessError::Config("rounds must be at least 1".into()));
        }
        for (value, name) in [(self.c, "c"), (self.loss_prob, "loss_prob")] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(HarnessError::Config(format!(
                    "{name} = {value} outside [0,1]"
                )));
            }
        }
        if !self.eps_c.is_finite() || !(0.0..=0.5).contains(&self.eps_c) {
            return Err(HarnessError::Config(format!(
                "eps_c = {} outside [0,0.5]",
                self.eps_c
            )));
        }
        if let AttackStrategy::Pns(pns) = self.attack {
            // Re-validates fields that sweeps may have rewritten.
            PnsConfig::new(pns.n_photons, pns.theta, pns.emulate_baseline)?;
        }
        Ok(())
    }

    /// Non-fatal findings: currently only a fake angle loud enough to
    /// stand out of the noise floor (the detectability bound).
    pub fn warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if let Some(excess) = self.attack.bound_violation(self.eps_c) {
            warnings.push(format!(
                "attack angle exceeds the detectability bound: sin^2(theta) is {excess:.6} above eps_c; \
                 the sampling error will stand out of the noise floor"
            ));
        }
        warnings
    }

    /// Errors instead of warning when the detectability bound is broken.
    pub fn enforce_bound(&self) -> Result<(), HarnessError> {
        match self.attack.bound_violation(self.eps_c) {
            Some(excess) => Err(HarnessError::Config(format!(
                "sin^2(theta) exceeds eps_c by {excess:.6}"
            ))),
            None => Ok(()),
        }
    }

    /// The honest parties' channel: noise calibrated to eps_c plus loss.
    pub fn channel_model(&self) -> Result<ChannelModel, HarnessError> {
        let kind = match self.noise_kind {
            NoiseSelector::None => NoiseKind::None,
            NoiseSelector::BitFlip => NoiseKind::BitFlip(0.0),
            NoiseSelector::Depolarizing => NoiseKind::Depolarizing(0.0),
        };
        let calibrated = channel::calibrate_from_error_rate(self.eps_c, kind)?;
        Ok(ChannelModel::new(calibrated.noise_kind, self.loss_prob)?)
    }

    /// Baseline per-check mismatch rates (σ_z, σ_x) of the calibrated
    /// channel. Bit flips are invisible to σ_x; the depolarizing Z and XZ
    /// branches flip both bases at the same eps_c rate.
    fn noise_mismatch_rates(&self) -> (f64, f64) {
        match self.noise_kind {
            NoiseSelector::None => (0.0, 0.0),
            NoiseSelector::BitFlip => (self.eps_c, 0.0),
            NoiseSelector::Depolarizing => (self.eps_c, self.eps_c),
        }
    }
}

/// Derives the independent random stream for one round: the master seed
/// keys the ChaCha state and the round index selects the stream. Rounds
/// can therefore run in any order, or in parallel, without changing any
/// draw.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

/// Estimators over one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub total_rounds: u64,
    pub control_rounds: u64,
    pub message_rounds: u64,
    pub lost_rounds: u64,
    /// Mismatch over all completed control rounds.
    pub control_mismatch: RateEstimate,
    /// Conditional on σ_z checks.
    pub control_mismatch_z: RateEstimate,
    /// Conditional on σ_x checks (Improved variant only).
    pub control_mismatch_x: RateEstimate,
    /// Correct guesses over message rounds where Eve guessed.
    pub eve_guess_accuracy: RateEstimate,
    /// Guess = I conditional on Alice coding Z: the empirical P_F.
    pub eve_fail_given_z: RateEstimate,
    /// Decode disagreement over conclusive (ψ±) decodes.
    pub bob_message_error: RateEstimate,
    /// φ± outcomes over completed message rounds.
    pub bob_anomaly: RateEstimate,
    pub loss_rate: RateEstimate,
    /// Plug-in mutual information between message bit and Eve's guess.
    pub eve_info_empirical: f64,
}

#[derive(Debug, Default)]
struct Accumulator {
    total: u64,
    control: u64,
    message: u64,
    lost: u64,
    control_mismatch: Counter,
    control_mismatch_z: Counter,
    control_mismatch_x: Counter,
    eve_correct: Counter,
    eve_fail_given_z: Counter,
    bob_error: Counter,
    bob_anomaly: Counter,
    loss: Counter,
    joint: [[u64; 2]; 2],
}

impl Accumulator {
    fn observe(&mut self, r: &RoundRecord) {
        self.total += 1;
        self.loss.record(r.lost);
        if r.lost {
            self.lost += 1;
            return;
        }
        match r.mode {
            Mode::Control => {
                self.control += 1;
                let mismatch = r.mismatch.expect("control rounds carry mismatch");
                self.control_mismatch.record(mismatch);
                if let Some(basis) = r.check_basis {
                    if basis.is_sigma_z() {
                        self.control_mismatch_z.record(mismatch);
                    } else if basis.is_sigma_x() {
                        self.control_mismatch_x.record(mismatch);
                    }
                }
            }
            Mode::Message => {
                self.message += 1;
                let bit = r.message_bit.expect("message rounds carry the bit");
                self.bob_anomaly.record(r.decode_anomaly);
                if let Some(decoded) = r.decoded_bit {
                    self.bob_error.record(decoded != bit);
                }
                if let Some(guess) = r.eve_guess {
                    self.eve_correct.record(guess == bit);
                    self.joint[usize::from(bit)][usize::from(guess)] += 1;
                    if bit {
                        self.eve_fail_given_z.record(!guess);
                    }
                }
            }
        }
    }

    fn summarize(&self) -> SummaryStats {
        SummaryStats {
            total_rounds: self.total,
            control_rounds: self.control,
            message_rounds: self.message,
            lost_rounds: self.lost,
            control_mismatch: self.control_mismatch.estimate(),
            control_mismatch_z: self.control_mismatch_z.estimate(),
            control_mismatch_x: self.control_mismatch_x.estimate(),
            eve_guess_accuracy: self.eve_correct.estimate(),
            eve_fail_given_z: self.eve_fail_given_z.estimate(),
            bob_message_error: self.bob_error.estimate(),
            bob_anomaly: self.bob_anomaly.estimate(),
            loss_rate: self.loss.estimate(),
            eve_info_empirical: empirical_mutual_information(&self.joint),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub summary: SummaryStats,
    /// Present when the config asked for a per-round log.
    pub records: Option<Vec<RoundRecord>>,
}

/// Runs the configured number of independent rounds sequentially.
///
/// Results are identical for any execution order because every round
/// draws from its own [`round_rng`] stream; only the fixed-message
/// cursor is inherently sequential, and it advances deterministically.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    let channel_model = config.channel_model()?;
    let detector = DetectorModel::default();
    let mut source = MessageStream::new(config.message.clone())?;
    let mut acc = Accumulator::default();
    let mut records = config.per_round_log.then(Vec::new);
    for round in 0..config.rounds {
        let mut rng = round_rng(config.seed, round);
        let record = protocol::run_round(
            config.variant,
            config.c,
            &channel_model,
            &detector,
            &config.attack,
            &mut source,
            &mut rng,
        )?;
        acc.observe(&record);
        if let Some(records) = &mut records {
            records.push(record);
        }
    }
    Ok(ExperimentOutput {
        summary: acc.summarize(),
        records,
    })
}

/// Closed-form expectations for an experiment, where they exist.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Predictions {
    pub control_mismatch: Option<f64>,
    pub control_mismatch_z: Option<f64>,
    pub control_mismatch_x: Option<f64>,
    pub p_fail: Option<f64>,
    pub eve_accuracy: Option<f64>,
    pub eve_info_bits: Option<f64>,
    pub loss_rate: Option<f64>,
}

impl Predictions {
    pub fn for_config(config: &ExperimentConfig) -> Self {
        let improved = config.variant == ProtocolVariant::Improved;
        let mix = |z: f64, x: f64| if improved { (z + x) / 2.0 } else { z };
        // Loss strikes the forward leg always and the return leg of
        // surviving message rounds.
        let l = config.loss_prob;
        let baseline_loss = l + (1.0 - l) * (1.0 - config.c) * l;
        match config.attack {
            AttackStrategy::NoAttack => {
                let (z, x) = config.noise_mismatch_rates();
                Self {
                    control_mismatch: Some(mix(z, x)),
                    control_mismatch_z: Some(z),
                    control_mismatch_x: improved.then_some(x),
                    loss_rate: Some(baseline_loss),
                    ..Self::default()
                }
            }
            AttackStrategy::InterceptResendZ => Self {
                control_mismatch: Some(mix(0.0, 0.5)),
                control_mismatch_z: Some(0.0),
                control_mismatch_x: improved.then_some(0.5),
                loss_rate: Some(0.0),
                ..Self::default()
            },
            AttackStrategy::Pns(pns) => {
                let eps_e = analytics::epsilon_e(pns.theta).expect("validated theta");
                let p_fail =
                    analytics::p_fail(pns.theta, pns.n_photons).expect("validated attack");
                Self {
                    control_mismatch: Some(mix(eps_e, 0.5)),
                    control_mismatch_z: Some(eps_e),
                    control_mismatch_x: improved.then_some(0.5),
                    p_fail: Some(p_fail),
                    eve_accuracy: Some(1.0 - p_fail / 2.0),
                    eve_info_bits: Some(
                        analytics::eve_info_bits(p_fail).expect("p_fail is a probability"),
                    ),
                    loss_rate: Some(if pns.emulate_baseline {
                        baseline_loss
                    } else {
                        0.0
                    }),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Theta,
    NPhotons,
    EpsC,
    C,
}

impl SweepParameter {
    pub fn key(&self) -> &'static str {
        match self {
            SweepParameter::Theta => "theta",
            SweepParameter::NPhotons => "n_photons",
            SweepParameter::EpsC => "eps_c",
            SweepParameter::C => "c",
        }
    }

    pub fn parse(name: &str) -> Result<Self, HarnessError> {
        match name {
            "theta" => Ok(SweepParameter::Theta),
            "n_photons" => Ok(SweepParameter::NPhotons),
            "eps_c" => Ok(SweepParameter::EpsC),
            "c" => Ok(SweepParameter::C),
            _ => Err(HarnessError::Config(format!(
                "unknown sweep parameter {name:?}; expected theta|n_photons|eps_c|c"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scenario_id: String,
    pub config: ExperimentConfig,
    pub summary: SummaryStats,
    pub predictions: Predictions,
}

/// Runs the base experiment once per value of the swept parameter.
///
/// Only the named parameter changes between rows; in particular a swept
/// eps_c does not re-derive the attack angle, and every row reuses the
/// base seed.
pub fn sweep(
    base: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<SweepRow>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    values
        .iter()
        .map(|&value| {
            let mut config = base.clone();
            match parameter {
                SweepParameter::Theta => match &mut config.attack {
                    AttackStrategy::Pns(pns) => pns.theta = value,
                    _ => return Err(HarnessError::InapplicableParameter("theta")),
                },
                SweepParameter::NPhotons => match &mut config.attack {
                    AttackStrategy::Pns(pns) => {
                        if value.fract() != 0.0 || !(2.0..=u32::MAX as f64).contains(&value) {
                            return Err(HarnessError::Config(format!(
                                "n_photons value {value} is not an integer >= 2"
                            )));
                        }
                        pns.n_photons = value as u32;
                    }
                    _ => return Err(HarnessError::InapplicableParameter("n_photons")),
                },
                SweepParameter::EpsC => config.eps_c = value,
                SweepParameter::C => config.c = value,
            }
            config.validate()?;
            let output = run_experiment(&config)?;
            Ok(SweepRow {
                scenario_id: format!("{}={}", parameter.key(), format_f64(value)),
                predictions: Predictions::for_config(&config),
                summary: output.summary,
                config,
            })
        })
        .collect()
}
