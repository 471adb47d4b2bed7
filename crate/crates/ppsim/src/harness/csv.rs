//! CSV rendering for experiment summaries, sweeps and per-round logs.
//!
//! Numbers are formatted with Rust's shortest round-trip decimal form,
//! so parsing an emitted file recovers every value bit-exactly. Column
//! order is fixed; absent values (non-attack photon counts, undefined
//! predictions) are empty cells.

use super::stats::RateEstimate;
use super::{ExperimentConfig, HarnessError, Predictions, SummaryStats};
use crate::adversary::AttackStrategy;
use crate::protocol::RoundRecord;
use std::io::Write;

pub const SUMMARY_HEADER: [&str; 47] = [
    "scenario_id",
    "variant",
    "rounds",
    "c",
    "eps_c",
    "noise_kind",
    "loss_prob",
    "attack",
    "n_photons",
    "theta",
    "seed",
    "total_rounds",
    "control_rounds",
    "message_rounds",
    "lost_rounds",
    "control_mismatch",
    "control_mismatch_lo",
    "control_mismatch_hi",
    "control_mismatch_z",
    "control_mismatch_z_lo",
    "control_mismatch_z_hi",
    "control_mismatch_x",
    "control_mismatch_x_lo",
    "control_mismatch_x_hi",
    "eve_guess_accuracy",
    "eve_guess_accuracy_lo",
    "eve_guess_accuracy_hi",
    "eve_fail_given_z",
    "eve_fail_given_z_lo",
    "eve_fail_given_z_hi",
    "bob_message_error",
    "bob_message_error_lo",
    "bob_message_error_hi",
    "bob_anomaly",
    "bob_anomaly_lo",
    "bob_anomaly_hi",
    "loss_rate",
    "loss_rate_lo",
    "loss_rate_hi",
    "eve_info_empirical",
    "pred_control_mismatch",
    "pred_control_mismatch_z",
    "pred_control_mismatch_x",
    "pred_p_fail",
    "pred_eve_accuracy",
    "pred_eve_info_bits",
    "pred_loss_rate",
];

/// Shortest decimal that parses back to the same f64.
pub fn format_f64(x: f64) -> String {
    format!("{x}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn push_rate(row: &mut Vec<String>, est: &RateEstimate) {
    row.push(format_f64(est.rate));
    row.push(format_f64(est.lo));
    row.push(format_f64(est.hi));
}

/// One summary line: scenario label, configuration echo, estimators and
/// analytic predictions.
pub fn summary_row(
    scenario_id: &str,
    config: &ExperimentConfig,
    summary: &SummaryStats,
    predictions: &Predictions,
) -> Vec<String> {
    let mut row = Vec::with_capacity(SUMMARY_HEADER.len());
    row.push(scenario_id.to_string());
    row.push(config.variant.to_string());
    row.push(config.rounds.to_string());
    row.push(format_f64(config.c));
    row.push(format_f64(config.eps_c));
    row.push(config.noise_kind.label().to_string());
    row.push(format_f64(config.loss_prob));
    row.push(config.attack.label().to_string());
    match config.attack {
        AttackStrategy::Pns(pns) => {
            row.push(pns.n_photons.to_string());
            row.push(format_f64(pns.theta));
        }
        _ => {
            row.push(String::new());
            row.push(String::new());
        }
    }
    row.push(config.seed.to_string());
    row.push(summary.total_rounds.to_string());
    row.push(summary.control_rounds.to_string());
    row.push(summary.message_rounds.to_string());
    row.push(summary.lost_rounds.to_string());
    push_rate(&mut row, &summary.control_mismatch);
    push_rate(&mut row, &summary.control_mismatch_z);
    push_rate(&mut row, &summary.control_mismatch_x);
    push_rate(&mut row, &summary.eve_guess_accuracy);
    push_rate(&mut row, &summary.eve_fail_given_z);
    push_rate(&mut row, &summary.bob_message_error);
    push_rate(&mut row, &summary.bob_anomaly);
    push_rate(&mut row, &summary.loss_rate);
    row.push(format_f64(summary.eve_info_empirical));
    row.push(format_opt(predictions.control_mismatch));
    row.push(format_opt(predictions.control_mismatch_z));
    row.push(format_opt(predictions.control_mismatch_x));
    row.push(format_opt(predictions.p_fail));
    row.push(format_opt(predictions.eve_accuracy));
    row.push(format_opt(predictions.eve_info_bits));
    row.push(format_opt(predictions.loss_rate));
    debug_assert_eq!(row.len(), SUMMARY_HEADER.len());
    row
}

pub fn write_summary_csv<W: Write>(
    out: W,
    rows: &[Vec<String>],
) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(SUMMARY_HEADER)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub const ROUNDS_HEADER: [&str; 12] = [
    "round",
    "mode",
    "lost",
    "check_theta",
    "alice_outcome",
    "bob_outcome",
    "mismatch",
    "alice_op",
    "message_bit",
    "decoded_bit",
    "decode_anomaly",
    "eve_guess",
];

pub fn write_rounds_csv<W: Write>(
    out: W,
    records: &[RoundRecord],
) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(ROUNDS_HEADER)?;
    let fmt_bool = |b: Option<bool>| b.map(|v| v.to_string()).unwrap_or_default();
    let fmt_bit = |b: Option<bool>| b.map(|v| u8::from(v).to_string()).unwrap_or_default();
    for (round, r) in records.iter().enumerate() {
        writer.write_record([
            round.to_string(),
            r.mode.to_string(),
            r.lost.to_string(),
            r.check_basis.map(|b| format_f64(b.theta())).unwrap_or_default(),
            r.alice_outcome.map(|o| o.to_string()).unwrap_or_default(),
            r.bob_outcome.map(|o| o.to_string()).unwrap_or_default(),
            fmt_bool(r.mismatch),
            r.alice_op.map(|o| o.to_string()).unwrap_or_default(),
            fmt_bit(r.message_bit),
            fmt_bit(r.decoded_bit),
            r.decode_anomaly.to_string(),
            fmt_bit(r.eve_guess),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
