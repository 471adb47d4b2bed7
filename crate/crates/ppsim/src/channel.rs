//! Lossy/noisy quantum channel between Bob and Alice plus the detector
//! dead-time behavior the multi-photon attack exploits.

use crate::qsim::{self, MeasBasis, Outcome, QsimError, SingleQubitOp, StateVector};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("probability {0} outside [0,1]")]
    BadProbability(f64),
    #[error("error rate {0} outside [0,0.5]")]
    BadErrorRate(f64),
    #[error("detect_burst needs at least one photon")]
    EmptyBurst,
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Noise applied to a delivered qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    None,
    /// Applies X with probability p.
    BitFlip(f64),
    /// Pauli twirl: X, Z and XZ each with probability p/4, identity with
    /// 1 − 3p/4.
    Depolarizing(f64),
}

impl NoiseKind {
    fn validate(self) -> Result<(), ChannelError> {
        let p = match self {
            NoiseKind::None => return Ok(()),
            NoiseKind::BitFlip(p) | NoiseKind::Depolarizing(p) => p,
        };
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::BadProbability(p));
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::BitFlip(_) => "bitflip",
            NoiseKind::Depolarizing(_) => "depolarizing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub noise_kind: NoiseKind,
    pub loss_prob: f64,
}

impl ChannelModel {
    pub fn new(noise_kind: NoiseKind, loss_prob: f64) -> Result<Self, ChannelError> {
        noise_kind.validate()?;
        if !loss_prob.is_finite() || !(0.0..=1.0).contains(&loss_prob) {
            return Err(ChannelError::BadProbability(loss_prob));
        }
        Ok(Self {
            noise_kind,
            loss_prob,
        })
    }

    pub fn ideal() -> Self {
        Self {
            noise_kind: NoiseKind::None,
            loss_prob: 0.0,
        }
    }
}

/// Detector behavior for multi-photon arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorModel {
    /// When set, an N-photon burst inside the dead time is recorded as a
    /// single click; the extra photons are never resolved.
    pub dead_time_collapse: bool,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            dead_time_collapse: true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TransmitResult {
    Lost,
    Delivered(StateVector),
}

/// Sends one qubit of `state` through the channel: Bernoulli loss first,
/// then the configured noise on the target qubit.
pub fn transmit<R: Rng + ?Sized>(
    state: &StateVector,
    target: usize,
    model: &ChannelModel,
    rng: &mut R,
) -> Result<TransmitResult, ChannelError> {
    if model.loss_prob > 0.0 && rng.random::<f64>() < model.loss_prob {
        return Ok(TransmitResult::Lost);
    }
    let noisy = match model.noise_kind {
        NoiseKind::None => state.clone(),
        NoiseKind::BitFlip(p) => {
            if rng.random::<f64>() < p {
                qsim::apply_op(state, SingleQubitOp::X, target)?
            } else {
                state.clone()
            }
        }
        NoiseKind::Depolarizing(p) => {
            let u: f64 = rng.random();
            if u < p / 4.0 {
                qsim::apply_op(state, SingleQubitOp::X, target)?
            } else if u < p / 2.0 {
                qsim::apply_op(state, SingleQubitOp::Z, target)?
            } else if u < 3.0 * p / 4.0 {
                let flipped = qsim::apply_op(state, SingleQubitOp::X, target)?;
                qsim::apply_op(&flipped, SingleQubitOp::Z, target)?
            } else {
                state.clone()
            }
        }
    };
    Ok(TransmitResult::Delivered(noisy))
}

/// Builds a channel whose σ_z control-check error rate equals `eps_c`.
///
/// BitFlip flips the σ_z outcome with probability p, so p = eps_c.
/// Under depolarizing noise the X and XZ branches (p/2 total) flip it,
/// so p = 2·eps_c.
pub fn calibrate_from_error_rate(eps_c: f64, kind: NoiseKind) -> Result<ChannelModel, ChannelError> {
    if !eps_c.is_finite() || !(0.0..=0.5).contains(&eps_c) {
        return Err(ChannelError::BadErrorRate(eps_c));
    }
    let noise_kind = match kind {
        NoiseKind::None => NoiseKind::None,
        NoiseKind::BitFlip(_) => NoiseKind::BitFlip(eps_c),
        NoiseKind::Depolarizing(_) => NoiseKind::Depolarizing(2.0 * eps_c),
    };
    Ok(ChannelModel {
        noise_kind,
        loss_prob: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BurstDetection {
    pub outcome: Outcome,
    /// More than one distinct click would have been visible. Only
    /// meaningful when dead-time collapse is off; exposed for the
    /// countermeasure discussion.
    pub multi_click: bool,
}

/// Measures an arriving photon burst in the given basis.
///
/// With dead-time collapse the detector resolves only the first photon.
/// Without it every photon is measured; the record keeps the first
/// outcome and flags whether the outcomes disagreed.
pub fn detect_burst<R: Rng + ?Sized>(
    photons: &[StateVector],
    basis: MeasBasis,
    detector: &DetectorModel,
    rng: &mut R,
) -> Result<BurstDetection, ChannelError> {
    let first = photons.first().ok_or(ChannelError::EmptyBurst)?;
    let (outcome, _) = qsim::measure(first, 0, basis, rng)?;
    if detector.dead_time_collapse {
        return Ok(BurstDetection {
            outcome,
            multi_click: false,
        });
    }
    let mut multi_click = false;
    for photon in &photons[1..] {
        let (o, _) = qsim::measure(photon, 0, basis, rng)?;
        multi_click |= o != outcome;
    }
    Ok(BurstDetection {
        outcome,
        multi_click,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{basis_state, bell_measure, fidelity, measure, prepare_bell, BellLabel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binom_sigma(p: f64, n: u32) -> f64 {
        (p * (1.0 - p) / f64::from(n)).sqrt()
    }

    #[test]
    fn ideal_channel_delivers_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = prepare_bell(BellLabel::PsiPlus);
        for _ in 0..100 {
            match transmit(&s, 1, &ChannelModel::ideal(), &mut rng).unwrap() {
                TransmitResult::Delivered(out) => {
                    assert!((fidelity(&out, &s).unwrap() - 1.0).abs() < 1e-12);
                }
                TransmitResult::Lost => panic!("ideal channel lost a photon"),
            }
        }
    }

    #[test]
    fn bitflip_breaks_anticorrelation_at_rate_p() {
        // Oracle: a single X on T turns the σ_z outcomes of |ψ+⟩ from
        // opposite to equal, so the mismatch rate is exactly p.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = ChannelModel::new(NoiseKind::BitFlip(0.1), 0.0).unwrap();
        let n = 100_000;
        let mut mismatches = 0u32;
        for _ in 0..n {
            let pair = prepare_bell(BellLabel::PsiPlus);
            let TransmitResult::Delivered(pair) = transmit(&pair, 1, &model, &mut rng).unwrap()
            else {
                panic!("lossless channel lost a photon");
            };
            let (a, pair) = measure(&pair, 1, MeasBasis::sigma_z(), &mut rng).unwrap();
            let (b, _) = measure(&pair, 0, MeasBasis::sigma_z(), &mut rng).unwrap();
            if a == b {
                mismatches += 1;
            }
        }
        let rate = f64::from(mismatches) / f64::from(n);
        assert!((rate - 0.1).abs() < 3.0 * binom_sigma(0.1, n), "rate {rate}");
    }

    #[test]
    fn loss_fraction_matches_bernoulli() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = ChannelModel::new(NoiseKind::None, 0.25).unwrap();
        let s = StateVector::computational(1, 0);
        let n = 100_000;
        let mut lost = 0u32;
        for _ in 0..n {
            if matches!(
                transmit(&s, 0, &model, &mut rng).unwrap(),
                TransmitResult::Lost
            ) {
                lost += 1;
            }
        }
        let rate = f64::from(lost) / f64::from(n);
        assert!(
            (rate - 0.25).abs() < 3.0 * binom_sigma(0.25, n),
            "rate {rate}"
        );
    }

    #[test]
    fn loss_and_noise_are_independent() {
        // With loss and bit flips active at once, the delivered fraction
        // still sees the configured flip rate and the loss rate is
        // unaffected by the noise setting.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = ChannelModel::new(NoiseKind::BitFlip(0.2), 0.3).unwrap();
        let s = StateVector::computational(1, 0);
        let n = 100_000u32;
        let (mut lost, mut delivered, mut flipped) = (0u32, 0u32, 0u32);
        for _ in 0..n {
            match transmit(&s, 0, &model, &mut rng).unwrap() {
                TransmitResult::Lost => lost += 1,
                TransmitResult::Delivered(out) => {
                    delivered += 1;
                    let (o, _) = measure(&out, 0, MeasBasis::sigma_z(), &mut rng).unwrap();
                    if o == Outcome::Minus {
                        flipped += 1;
                    }
                }
            }
        }
        let loss_rate = f64::from(lost) / f64::from(n);
        assert!((loss_rate - 0.3).abs() < 3.0 * binom_sigma(0.3, n));
        let flip_rate = f64::from(flipped) / f64::from(delivered);
        assert!((flip_rate - 0.2).abs() < 3.0 * binom_sigma(0.2, delivered));
    }

    #[test]
    fn calibration_trivial_and_paper_points() {
        let m = calibrate_from_error_rate(0.0, NoiseKind::BitFlip(0.0)).unwrap();
        assert_eq!(m.noise_kind, NoiseKind::BitFlip(0.0));
        let m = calibrate_from_error_rate(0.1, NoiseKind::BitFlip(0.0)).unwrap();
        assert_eq!(m.noise_kind, NoiseKind::BitFlip(0.1));
        let m = calibrate_from_error_rate(0.1, NoiseKind::Depolarizing(0.0)).unwrap();
        assert_eq!(m.noise_kind, NoiseKind::Depolarizing(0.2));
        assert!(calibrate_from_error_rate(0.6, NoiseKind::BitFlip(0.0)).is_err());
        assert!(calibrate_from_error_rate(-0.1, NoiseKind::None).is_err());
    }

    fn sigma_z_mismatch_rate(model: &ChannelModel, seed: u64, n: u32) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mismatches = 0u32;
        for _ in 0..n {
            let pair = prepare_bell(BellLabel::PsiPlus);
            let TransmitResult::Delivered(pair) = transmit(&pair, 1, model, &mut rng).unwrap()
            else {
                panic!("lossless channel lost a photon");
            };
            let (a, pair) = measure(&pair, 1, MeasBasis::sigma_z(), &mut rng).unwrap();
            let (b, _) = measure(&pair, 0, MeasBasis::sigma_z(), &mut rng).unwrap();
            if a == b {
                mismatches += 1;
            }
        }
        f64::from(mismatches) / f64::from(n)
    }

    #[test]
    fn calibration_law_holds_for_both_noise_kinds() {
        let n = 100_000;
        let tol = 3.0 * binom_sigma(0.1, n);
        for (seed, kind) in [(5, NoiseKind::BitFlip(0.0)), (6, NoiseKind::Depolarizing(0.0))] {
            let model = calibrate_from_error_rate(0.1, kind).unwrap();
            let rate = sigma_z_mismatch_rate(&model, seed, n);
            assert!((rate - 0.1).abs() < tol, "{kind:?} rate {rate}");
        }
    }

    #[test]
    fn depolarizing_preserves_delivered_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = ChannelModel::new(NoiseKind::Depolarizing(0.8), 0.0).unwrap();
        let theta = MeasBasis::new(0.6).unwrap();
        let s = basis_state(theta, Outcome::Plus);
        for _ in 0..1000 {
            let TransmitResult::Delivered(out) = transmit(&s, 0, &model, &mut rng).unwrap() else {
                panic!("lossless channel lost a photon");
            };
            let norm2: f64 = out.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn depolarizing_z_branch_shows_up_in_bell_decode() {
        // The Z and XZ branches each land with probability p/4; together
        // with X they steer |ψ+⟩ to ψ− (p/4), φ+ (p/4) and φ− (p/4).
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = ChannelModel::new(NoiseKind::Depolarizing(0.4), 0.0).unwrap();
        let n = 100_000;
        let mut counts = [0u32; 4];
        for _ in 0..n {
            let pair = prepare_bell(BellLabel::PsiPlus);
            let TransmitResult::Delivered(pair) = transmit(&pair, 1, &model, &mut rng).unwrap()
            else {
                panic!("lossless channel lost a photon");
            };
            let (label, _) = bell_measure(&pair, &mut rng).unwrap();
            counts[match label {
                BellLabel::PsiPlus => 0,
                BellLabel::PsiMinus => 1,
                BellLabel::PhiPlus => 2,
                BellLabel::PhiMinus => 3,
            }] += 1;
        }
        for (count, expect) in counts.iter().zip([0.7, 0.1, 0.1, 0.1]) {
            let rate = f64::from(*count) / f64::from(n);
            assert!(
                (rate - expect).abs() < 3.0 * binom_sigma(expect, n),
                "rate {rate} expect {expect}"
            );
        }
    }

    #[test]
    fn burst_with_dead_time_sees_single_photon_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let theta = MeasBasis::new(0.1_f64.sqrt().asin()).unwrap();
        let photons = vec![basis_state(theta, Outcome::Plus); 4];
        let detector = DetectorModel::default();
        let n = 100_000;
        let mut minus = 0u32;
        for _ in 0..n {
            let d = detect_burst(&photons, MeasBasis::sigma_z(), &detector, &mut rng).unwrap();
            assert!(!d.multi_click);
            if d.outcome == Outcome::Minus {
                minus += 1;
            }
        }
        let rate = f64::from(minus) / f64::from(n);
        assert!((rate - 0.1).abs() < 3.0 * binom_sigma(0.1, n), "rate {rate}");
    }

    #[test]
    fn single_computational_photon_always_clicks_plus() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let photons = vec![StateVector::computational(1, 0)];
        let detector = DetectorModel {
            dead_time_collapse: false,
        };
        for _ in 0..1000 {
            let d = detect_burst(&photons, MeasBasis::sigma_z(), &detector, &mut rng).unwrap();
            assert_eq!(d.outcome, Outcome::Plus);
            assert!(!d.multi_click);
        }
    }

    #[test]
    fn burst_without_dead_time_raises_multi_click() {
        // Oracle: enumerate the 2⁴ outcome patterns; multi-click misses
        // only the two all-same patterns.
        let eps = 0.1f64;
        let mut expect = 0.0;
        for pattern in 0u32..16 {
            let minus_count = pattern.count_ones();
            let p = eps.powi(minus_count as i32) * (1.0 - eps).powi(4 - minus_count as i32);
            if minus_count != 0 && minus_count != 4 {
                expect += p;
            }
        }
        assert!((expect - (1.0 - 0.9f64.powi(4) - 0.1f64.powi(4))).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let theta = MeasBasis::new(eps.sqrt().asin()).unwrap();
        let photons = vec![basis_state(theta, Outcome::Plus); 4];
        let detector = DetectorModel {
            dead_time_collapse: false,
        };
        let n = 100_000;
        let mut multi = 0u32;
        for _ in 0..n {
            let d = detect_burst(&photons, MeasBasis::sigma_z(), &detector, &mut rng).unwrap();
            if d.multi_click {
                multi += 1;
            }
        }
        let rate = f64::from(multi) / f64::from(n);
        assert!(
            (rate - expect).abs() < 3.0 * binom_sigma(expect, n),
            "rate {rate} expect {expect}"
        );
    }

    #[test]
    fn detect_burst_rejects_empty_list() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let result = detect_burst(
            &[],
            MeasBasis::sigma_z(),
            &DetectorModel::default(),
            &mut rng,
        );
        assert!(matches!(result, Err(ChannelError::EmptyBurst)));
    }

    #[test]
    fn model_constructors_validate_probabilities() {
        assert!(ChannelModel::new(NoiseKind::BitFlip(1.5), 0.0).is_err());
        assert!(ChannelModel::new(NoiseKind::None, -0.2).is_err());
        assert!(ChannelModel::new(NoiseKind::Depolarizing(1.0), 1.0).is_ok());
    }
}
