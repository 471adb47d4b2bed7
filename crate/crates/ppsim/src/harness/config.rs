//! Experiment configuration: the flat `key = value` file format and the
//! builder the CLI layers its flag overrides onto.

use super::{ExperimentConfig, HarnessError, NoiseSelector};
use crate::adversary::{AttackStrategy, PnsConfig};
use crate::analytics;
use crate::protocol::{MessageSource, ProtocolVariant};
use std::collections::HashSet;
use std::path::Path;

/// Which attack the config names; parameters are joined in at build time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackChoice {
    None,
    Intercept,
    Pns,
}

/// Accumulates settings from a config file and flag overrides, then
/// resolves defaults into an [`ExperimentConfig`].
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    pub variant: Option<ProtocolVariant>,
    pub rounds: Option<u64>,
    pub c: Option<f64>,
    pub eps_c: Option<f64>,
    pub noise_kind: Option<NoiseSelector>,
    pub loss_prob: Option<f64>,
    pub attack: Option<AttackChoice>,
    pub n_photons: Option<u32>,
    pub theta: Option<f64>,
    pub emulate_baseline: Option<bool>,
    pub seed: Option<u64>,
    pub message: Option<MessageSource>,
    pub per_round_log: Option<bool>,
}

fn bad_value(key: &str, value: &str, expect: &str) -> HarnessError {
    HarnessError::Config(format!(
        "bad value {value:?} for key {key}: expected {expect}"
    ))
}

pub fn parse_variant(value: &str) -> Result<ProtocolVariant, HarnessError> {
    match value {
        "original" => Ok(ProtocolVariant::Original),
        "improved" => Ok(ProtocolVariant::Improved),
        _ => Err(bad_value("variant", value, "original|improved")),
    }
}

pub fn parse_noise_kind(value: &str) -> Result<NoiseSelector, HarnessError> {
    match value {
        "none" => Ok(NoiseSelector::None),
        "bitflip" => Ok(NoiseSelector::BitFlip),
        "depolarizing" => Ok(NoiseSelector::Depolarizing),
        _ => Err(bad_value(
            "noise_kind",
            value,
            "none|bitflip|depolarizing",
        )),
    }
}

pub fn parse_attack(value: &str) -> Result<AttackChoice, HarnessError> {
    match value {
        "none" => Ok(AttackChoice::None),
        "intercept" => Ok(AttackChoice::Intercept),
        "pns" => Ok(AttackChoice::Pns),
        _ => Err(bad_value("attack", value, "none|intercept|pns")),
    }
}

pub fn parse_message(value: &str) -> Result<MessageSource, HarnessError> {
    if value == "random" {
        return Ok(MessageSource::Random);
    }
    if let Some(bits) = value.strip_prefix("fixed:") {
        if bits.is_empty() {
            return Err(bad_value("message", value, "at least one bit after fixed:"));
        }
        let parsed: Result<Vec<bool>, HarnessError> = bits
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(bad_value("message", value, "bits 0/1 after fixed:")),
            })
            .collect();
        return Ok(MessageSource::Fixed(parsed?));
    }
    Err(bad_value("message", value, "random or fixed:<bits>"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, HarnessError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad_value(key, value, "true|false")),
    }
}

impl ConfigBuilder {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key {
            "variant" => self.variant = Some(parse_variant(value)?),
            "rounds" => {
                self.rounds =
                    Some(value.parse().map_err(|_| bad_value(key, value, "a positive integer"))?)
            }
            "c" => self.c = Some(value.parse().map_err(|_| bad_value(key, value, "a real"))?),
            "eps_c" => {
                self.eps_c = Some(value.parse().map_err(|_| bad_value(key, value, "a real"))?)
            }
            "noise_kind" => self.noise_kind = Some(parse_noise_kind(value)?),
            "loss_prob" => {
                self.loss_prob =
                    Some(value.parse().map_err(|_| bad_value(key, value, "a real"))?)
            }
            "attack" => self.attack = Some(parse_attack(value)?),
            "n_photons" => {
                self.n_photons =
                    Some(value.parse().map_err(|_| bad_value(key, value, "an integer >= 2"))?)
            }
            "theta" => {
                self.theta =
                    Some(value.parse().map_err(|_| bad_value(key, value, "a real in [0, pi/2)"))?)
            }
            "emulate_baseline" => self.emulate_baseline = Some(parse_bool(key, value)?),
            "seed" => {
                self.seed =
                    Some(value.parse().map_err(|_| bad_value(key, value, "an unsigned integer"))?)
            }
            "message" => self.message = Some(parse_message(value)?),
            "per_round_log" => self.per_round_log = Some(parse_bool(key, value)?),
            _ => return Err(HarnessError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a whole config file body. Unknown and duplicate keys are
    /// errors; `#` starts a comment.
    pub fn apply_contents(&mut self, contents: &str) -> Result<(), HarnessError> {
        let mut seen: HashSet<String> = HashSet::new();
        for (idx, raw) in contents.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at_line =
                |e: HarnessError| HarnessError::Config(format!("line {}: {e}", idx + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at_line(HarnessError::Config("expected key = value".into())))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(at_line(HarnessError::Config(format!(
                    "duplicate key {key:?}"
                ))));
            }
            self.set(key, value).map_err(at_line)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), HarnessError> {
        let contents = std::fs::read_to_string(path)?;
        self.apply_contents(&contents)
    }

    /// Resolves defaults and joins the attack parameters into a validated
    /// experiment configuration.
    pub fn build(self) -> Result<ExperimentConfig, HarnessError> {
        let eps_c = self.eps_c.unwrap_or(0.1);
        let attack_choice = self.attack.unwrap_or(AttackChoice::None);
        if attack_choice != AttackChoice::Pns {
            for (given, key) in [
                (self.n_photons.is_some(), "n_photons"),
                (self.theta.is_some(), "theta"),
                (self.emulate_baseline.is_some(), "emulate_baseline"),
            ] {
                if given {
                    return Err(HarnessError::Config(format!(
                        "key {key} only applies to attack = pns"
                    )));
                }
            }
        }
        let attack = match attack_choice {
            AttackChoice::None => AttackStrategy::NoAttack,
            AttackChoice::Intercept => AttackStrategy::InterceptResendZ,
            AttackChoice::Pns => {
                let theta = match self.theta {
                    Some(theta) => theta,
                    None => analytics::theta_for_noise(eps_c)?,
                };
                AttackStrategy::Pns(PnsConfig::new(
                    self.n_photons.unwrap_or(4),
                    theta,
                    self.emulate_baseline.unwrap_or(true),
                )?)
            }
        };
        let config = ExperimentConfig {
            variant: self.variant.unwrap_or(ProtocolVariant::Original),
            rounds: self.rounds.unwrap_or(100_000),
            c: self.c.unwrap_or(0.5),
            eps_c,
            noise_kind: self.noise_kind.unwrap_or(NoiseSelector::Depolarizing),
            loss_prob: self.loss_prob.unwrap_or(0.0),
            attack,
            seed: self.seed.unwrap_or(0),
            message: self.message.unwrap_or(MessageSource::Random),
            per_round_log: self.per_round_log.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_baseline_experiment() {
        let config = ConfigBuilder::default().build().unwrap();
        assert_eq!(config.variant, ProtocolVariant::Original);
        assert_eq!(config.rounds, 100_000);
        assert_eq!(config.c, 0.5);
        assert_eq!(config.eps_c, 0.1);
        assert_eq!(config.noise_kind, NoiseSelector::Depolarizing);
        assert_eq!(config.attack, AttackStrategy::NoAttack);
        assert_eq!(config.seed, 0);
        assert!(!config.per_round_log);
    }

    #[test]
    fn parses_full_config_file() {
        let mut builder = ConfigBuilder::default();
        builder
            .apply_contents(
                "# attack scenario\n\
                 variant = improved\n\
                 rounds = 5000\n\
                 c = 0.25   # sampling rate\n\
                 eps_c = 0.1\n\
                 noise_kind = bitflip\n\
                 loss_prob = 0.05\n\
                 attack = pns\n\
                 n_photons = 8\n\
                 emulate_baseline = false\n\
                 seed = 42\n\
                 message = fixed:1011\n\
                 per_round_log = true\n",
            )
            .unwrap();
        let config = builder.build().unwrap();
        assert_eq!(config.variant, ProtocolVariant::Improved);
        assert_eq!(config.rounds, 5000);
        assert_eq!(config.c, 0.25);
        assert_eq!(config.noise_kind, NoiseSelector::BitFlip);
        assert_eq!(config.loss_prob, 0.05);
        let AttackStrategy::Pns(pns) = config.attack else {
            panic!("expected pns attack");
        };
        assert_eq!(pns.n_photons, 8);
        assert!(!pns.emulate_baseline);
        // theta defaults to the bound-saturating angle for eps_c.
        assert!((pns.theta.sin().powi(2) - 0.1).abs() < 1e-12);
        assert_eq!(config.seed, 42);
        assert_eq!(
            config.message,
            MessageSource::Fixed(vec![true, false, true, true])
        );
        assert!(config.per_round_log);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let mut builder = ConfigBuilder::default();
        let err = builder.apply_contents("bogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));

        let mut builder = ConfigBuilder::default();
        let err = builder
            .apply_contents("seed = 1\nseed = 2\n")
            .unwrap_err();
        assert!(err.to_string().contains("duplicate key"));
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        let mut builder = ConfigBuilder::default();
        assert!(builder.apply_contents("just a line\n").is_err());
        let mut builder = ConfigBuilder::default();
        assert!(builder.apply_contents("rounds = many\n").is_err());
        let mut builder = ConfigBuilder::default();
        assert!(builder.apply_contents("message = fixed:102\n").is_err());
        let mut builder = ConfigBuilder::default();
        assert!(builder.apply_contents("variant = both\n").is_err());
    }

    #[test]
    fn rejects_attack_parameters_without_pns() {
        let mut builder = ConfigBuilder::default();
        builder.apply_contents("n_photons = 4\n").unwrap();
        let err = builder.build().unwrap_err();
        assert!(err.to_string().contains("only applies to attack = pns"));
    }

    #[test]
    fn rejects_out_of_range_settings_at_build() {
        let mut builder = ConfigBuilder::default();
        builder.apply_contents("rounds = 0\n").unwrap();
        assert!(builder.build().is_err());

        let mut builder = ConfigBuilder::default();
        builder.apply_contents("c = 1.5\n").unwrap();
        assert!(builder.build().is_err());

        let mut builder = ConfigBuilder::default();
        builder.apply_contents("eps_c = 0.7\n").unwrap();
        assert!(builder.build().is_err());

        let mut builder = ConfigBuilder::default();
        builder
            .apply_contents("attack = pns\nn_photons = 1\n")
            .unwrap();
        assert!(builder.build().is_err());
    }
}
