//! Acceptance suite. Each test prints one pass/fail line for its
//! criterion; tolerances on Monte Carlo estimates are three binomial
//! standard errors around the closed-form value.

use ppsim::adversary::{AttackStrategy, PnsConfig};
use ppsim::analytics;
use ppsim::cli::cli_main;
use ppsim::harness::{
    run_experiment, sweep, ExperimentConfig, NoiseSelector, SummaryStats, SweepParameter,
};
use ppsim::protocol::{MessageSource, ProtocolVariant, HOME};
use ppsim::qsim::{
    apply_op, basis_state, fidelity, prepare_bell, BellLabel, MeasBasis, Outcome, SingleQubitOp,
};

fn report(number: u32, name: &str, pass: bool) {
    println!(
        "criterion {number:02} ({name}): {}",
        if pass { "pass" } else { "fail" }
    );
    assert!(pass, "criterion {number:02} ({name}) failed");
}

/// Three binomial standard errors of a rate p estimated from n trials.
fn tol(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn theta_10() -> f64 {
    analytics::theta_for_noise(0.1).unwrap()
}

fn base() -> ExperimentConfig {
    ExperimentConfig {
        variant: ProtocolVariant::Original,
        rounds: 100_000,
        c: 0.5,
        eps_c: 0.1,
        noise_kind: NoiseSelector::Depolarizing,
        loss_prob: 0.0,
        attack: AttackStrategy::NoAttack,
        seed: 0xACCE97,
        message: MessageSource::Random,
        per_round_log: false,
    }
}

/// A quiet lab: no noise, no loss, nothing for an attack to hide under.
fn quiet() -> ExperimentConfig {
    ExperimentConfig {
        eps_c: 0.0,
        noise_kind: NoiseSelector::None,
        ..base()
    }
}

fn run(config: &ExperimentConfig) -> SummaryStats {
    run_experiment(config).unwrap().summary
}

#[test]
fn criterion_01_coding_flips_psi_plus_to_psi_minus() {
    let coded = apply_op(&prepare_bell(BellLabel::PsiPlus), SingleQubitOp::Z, HOME).unwrap();
    let f = fidelity(&coded, &prepare_bell(BellLabel::PsiMinus)).unwrap();
    report(1, "Z turns psi+ into psi-", (f - 1.0).abs() < 1e-12);
}

#[test]
fn criterion_02_single_photon_indistinguishability() {
    let basis = MeasBasis::new(theta_10()).unwrap();
    let plus = basis_state(basis, Outcome::Plus);
    let coded = apply_op(&plus, SingleQubitOp::Z, 0).unwrap();
    let f = fidelity(&plus, &coded).unwrap();
    report(2, "coded-state overlap 0.64", (f - 0.64).abs() < 1e-12);
}

#[test]
fn criterion_03_four_photon_failure_probability() {
    let p_fail = analytics::p_fail(theta_10(), 4).unwrap();
    let exact = (p_fail - 0.262144).abs() < 1e-12;

    // Every round is a message round coding Z, so the conditional
    // estimate gets the full 10^5 rounds.
    let config = ExperimentConfig {
        c: 0.0,
        message: MessageSource::Fixed(vec![true]),
        attack: AttackStrategy::Pns(PnsConfig::new(4, theta_10(), false).unwrap()),
        ..quiet()
    };
    let summary = run(&config);
    let est = summary.eve_fail_given_z;
    let sampled = est.trials >= 100_000
        && (est.rate - 0.262144).abs() < tol(0.262144, est.trials);
    report(3, "P_F(N=4) = 0.262144", exact && sampled);
}

#[test]
fn criterion_04_geometric_law_reaches_the_64_photon_value() {
    let p64 = analytics::p_fail(theta_10(), 64).unwrap();
    let closed_form = (p64 - 6.16e-13).abs() / 6.16e-13 < 0.01;

    let base = ExperimentConfig {
        rounds: 30_000,
        c: 0.0,
        message: MessageSource::Fixed(vec![true]),
        attack: AttackStrategy::Pns(PnsConfig::new(2, theta_10(), false).unwrap()),
        ..quiet()
    };
    let rows = sweep(&base, SweepParameter::NPhotons, &[2.0, 4.0, 8.0]).unwrap();
    let fits = rows.iter().zip([2i32, 4, 8]).all(|(row, n)| {
        let law = 0.64f64.powi(n - 1);
        let est = &row.summary.eve_fail_given_z;
        (est.rate - law).abs() < tol(law, est.trials)
    });
    report(4, "P_F(N=64) ~ 6.16e-13 and geometric law", closed_form && fits);
}

#[test]
fn criterion_05_attack_is_camouflaged_in_noise_and_loss() {
    let baseline = ExperimentConfig {
        loss_prob: 0.15,
        seed: 0xACCE97 + 5,
        ..base()
    };
    let attacked = ExperimentConfig {
        attack: AttackStrategy::Pns(PnsConfig::new(4, theta_10(), true).unwrap()),
        seed: 0xACCE97 + 6,
        ..baseline.clone()
    };
    let a = run(&baseline);
    let b = run(&attacked);

    let mismatch_tol = {
        let (pa, pb) = (0.1, 0.1);
        (tol(pa, a.control_mismatch.trials).powi(2)
            + tol(pb, b.control_mismatch.trials).powi(2))
        .sqrt()
    };
    let mismatch_close =
        (a.control_mismatch.rate - b.control_mismatch.rate).abs() < mismatch_tol;

    let p_loss = 0.15 + 0.85 * 0.5 * 0.15;
    let loss_tol = (tol(p_loss, a.loss_rate.trials).powi(2)
        + tol(p_loss, b.loss_rate.trials).powi(2))
    .sqrt();
    let loss_close = (a.loss_rate.rate - b.loss_rate.rate).abs() < loss_tol;

    report(5, "no extra error rate or loss", mismatch_close && loss_close);
}

#[test]
fn criterion_06_eve_accuracy_and_information() {
    let config = ExperimentConfig {
        c: 0.0,
        seed: 0xACCE97 + 7,
        attack: AttackStrategy::Pns(PnsConfig::new(4, theta_10(), false).unwrap()),
        ..quiet()
    };
    let summary = run(&config);
    let acc = summary.eve_guess_accuracy;
    let accuracy_ok = (acc.rate - 0.868928).abs() < tol(0.868928, acc.trials);
    let info = analytics::eve_info_bits(0.262144).unwrap();
    let info_ok = (summary.eve_info_empirical - info).abs() < 0.02;
    report(6, "accuracy 0.868928 and ~0.535 bits", accuracy_ok && info_ok);
}

#[test]
fn criterion_07_intercept_resend_invisible_to_sigma_z() {
    let config = ExperimentConfig {
        attack: AttackStrategy::InterceptResendZ,
        ..quiet()
    };
    let summary = run(&config);
    let invisible =
        summary.control_mismatch.successes == 0 && summary.control_mismatch.trials > 0;
    report(7, "zero sigma_z mismatches", invisible);
}

#[test]
fn criterion_08_improved_variant_detects_both_attacks() {
    let pns = ExperimentConfig {
        variant: ProtocolVariant::Improved,
        seed: 0xACCE97 + 8,
        attack: AttackStrategy::Pns(PnsConfig::new(4, theta_10(), false).unwrap()),
        ..quiet()
    };
    let s = run(&pns);
    let x = s.control_mismatch_x;
    let x_ok = (x.rate - 0.5).abs() < tol(0.5, x.trials);
    let overall = s.control_mismatch;
    let overall_ok = (overall.rate - 0.3).abs() < tol(0.3, overall.trials);

    let intercept = ExperimentConfig {
        variant: ProtocolVariant::Improved,
        seed: 0xACCE97 + 9,
        attack: AttackStrategy::InterceptResendZ,
        ..quiet()
    };
    let i = run(&intercept).control_mismatch;
    let intercept_ok = (i.rate - 0.25).abs() < tol(0.25, i.trials);

    report(8, "detection rates 0.5 / 0.3 / 0.25", x_ok && overall_ok && intercept_ok);
}

#[test]
fn criterion_09_honest_protocol_sanity() {
    let clean = run(&quiet());
    let clean_ok = clean.control_mismatch.successes == 0
        && clean.bob_message_error.successes == 0
        && clean.bob_anomaly.successes == 0;

    let noisy = ExperimentConfig {
        seed: 0xACCE97 + 10,
        ..base()
    };
    let z = run(&noisy).control_mismatch_z;
    let noisy_ok = (z.rate - 0.1).abs() < tol(0.1, z.trials);
    report(9, "clean run exact, calibrated noise at 0.1", clean_ok && noisy_ok);
}

#[test]
fn criterion_10_simulate_is_byte_deterministic() {
    let dir = std::env::temp_dir();
    let cfg = dir.join(format!("ppsim-acc-{}.cfg", std::process::id()));
    std::fs::write(
        &cfg,
        "rounds = 20000\nseed = 42\nc = 0.4\neps_c = 0.1\nloss_prob = 0.15\n\
         attack = pns\nn_photons = 4\ntheta = 0.3217505543966422\n",
    )
    .unwrap();
    let outs = [
        dir.join(format!("ppsim-acc-{}-a.csv", std::process::id())),
        dir.join(format!("ppsim-acc-{}-b.csv", std::process::id())),
    ];
    for out in &outs {
        let code = cli_main([
            "ppsim",
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let a = std::fs::read(&outs[0]).unwrap();
    let b = std::fs::read(&outs[1]).unwrap();
    for p in outs.iter().chain([&cfg]) {
        let _ = std::fs::remove_file(p);
    }
    report(10, "byte-identical CSV", !a.is_empty() && a == b);
}
