//! Command-line interface: `analyze` prints closed-form attack tables,
//! `simulate` runs one seeded experiment, `sweep` runs one experiment
//! per value of a chosen parameter. CSV goes to `--out` or standard
//! output; the human-readable digest goes to standard error.

use crate::adversary::AttackStrategy;
use crate::analytics;
use crate::harness::{
    format_f64, run_experiment, summary_row, sweep, write_rounds_csv, ConfigBuilder,
    ExperimentConfig, HarnessError, Predictions, RateEstimate, SummaryStats, SweepParameter,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "ppsim",
    about = "Ping-pong protocol eavesdropping simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form attack tables over angle and photon-number ranges.
    Analyze(AnalyzeArgs),
    /// Run one Monte Carlo experiment.
    Simulate(SimulateArgs),
    /// Run the experiment once per value of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write CSV to this path instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Emit the CSV table (default).
    #[arg(long, overrides_with = "no_csv")]
    csv: bool,
    /// Suppress the CSV table.
    #[arg(long)]
    no_csv: bool,
}

impl OutputArgs {
    fn emit_csv(&self) -> bool {
        !self.no_csv
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Channel error rates; the fake-photon angle is derived from each.
    #[arg(long = "eps-c", value_name = "LIST", conflicts_with = "theta")]
    eps_c: Option<String>,
    /// Fake-photon angles in radians, overriding the eps-c derivation.
    #[arg(long, value_name = "LIST")]
    theta: Option<String>,
    /// Burst sizes N.
    #[arg(long = "photons", value_name = "LIST", default_value = "4")]
    photons: String,
    /// Also report the burst size needed to push P_F below this value.
    #[arg(long = "target-pf", value_name = "F")]
    target_pf: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Improved,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AttackArg {
    None,
    Intercept,
    Pns,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment description file (`key = value` lines, `#` comments).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for the per-round random streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of protocol rounds.
    #[arg(long)]
    rounds: Option<u64>,
    /// Channel error rate; noise is calibrated so checks mismatch at this rate.
    #[arg(long = "eps-c")]
    eps_c: Option<f64>,
    /// PNS burst size (needs --attack pns).
    #[arg(long = "photons")]
    photons: Option<u32>,
    /// Fake-photon angle in radians (needs --attack pns).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    attack: Option<AttackArg>,
    /// Fail instead of warning when sin^2(theta) exceeds eps-c.
    #[arg(long)]
    enforce_bound: bool,
}

impl ExperimentArgs {
    /// Config file first, then flag overrides.
    fn build(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut builder = ConfigBuilder::default();
        if let Some(path) = &self.config {
            builder.apply_file(path)?;
        }
        if let Some(v) = self.variant {
            let name = match v {
                VariantArg::Original => "original",
                VariantArg::Improved => "improved",
            };
            builder.set("variant", name)?;
        }
        if let Some(v) = self.attack {
            let name = match v {
                AttackArg::None => "none",
                AttackArg::Intercept => "intercept",
                AttackArg::Pns => "pns",
            };
            builder.set("attack", name)?;
        }
        if let Some(v) = self.seed {
            builder.set("seed", &v.to_string())?;
        }
        if let Some(v) = self.rounds {
            builder.set("rounds", &v.to_string())?;
        }
        if let Some(v) = self.eps_c {
            builder.set("eps_c", &format_f64(v))?;
        }
        if let Some(v) = self.photons {
            builder.set("n_photons", &v.to_string())?;
        }
        if let Some(v) = self.theta {
            builder.set("theta", &format_f64(v))?;
        }
        let config = builder.build()?;
        for warning in config.warnings() {
            eprintln!("warning: {warning}");
        }
        if self.enforce_bound {
            config.enforce_bound()?;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Parameter to sweep: theta|n_photons|eps_c|c.
    #[arg(long, value_name = "NAME")]
    param: String,
    /// Comma-separated parameter values.
    #[arg(long, value_name = "LIST")]
    values: String,
    #[command(flatten)]
    output: OutputArgs,
}

/// Entry point used by both `main` and the tests; returns the process
/// exit code: 0 success, 1 configuration error, 2 I/O error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => run_analyze(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Sweep(args) => run_sweep(&args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn parse_f64_list(name: &str, text: &str) -> Result<Vec<f64>, HarnessError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("bad {name} value {t:?}")))
        })
        .collect()
}

fn parse_u32_list(name: &str, text: &str) -> Result<Vec<u32>, HarnessError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<u32>()
                .map_err(|_| HarnessError::Config(format!("bad {name} value {t:?}")))
        })
        .collect()
}

fn write_csv_rows(
    output: &OutputArgs,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), HarnessError> {
    if !output.emit_csv() {
        return Ok(());
    }
    match &output.out {
        Some(path) => write_csv_to(File::create(path)?, header, rows),
        None => write_csv_to(std::io::stdout().lock(), header, rows),
    }
}

fn write_csv_to<W: Write>(
    out: W,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

const ANALYZE_HEADER: [&str; 11] = [
    "eps_c",
    "theta",
    "sin2_theta",
    "coded_overlap",
    "n_photons",
    "p_fail",
    "eve_accuracy",
    "eve_info_bits",
    "improved_detection_rate",
    "target_pf",
    "min_photons",
];

fn run_analyze(args: &AnalyzeArgs) -> Result<(), HarnessError> {
    // Angle column: explicit angles, or one derived angle per eps_c.
    let angles: Vec<(Option<f64>, f64)> = match (&args.theta, &args.eps_c) {
        (Some(thetas), _) => parse_f64_list("theta", thetas)?
            .into_iter()
            .map(|t| (None, t))
            .collect(),
        (None, eps_list) => {
            let eps = match eps_list {
                Some(list) => parse_f64_list("eps-c", list)?,
                None => vec![0.1],
            };
            eps.into_iter()
                .map(|e| Ok((Some(e), analytics::theta_for_noise(e)?)))
                .collect::<Result<_, HarnessError>>()?
        }
    };
    let photons = parse_u32_list("photons", &args.photons)?;

    let mut rows = Vec::new();
    let mut digest = String::new();
    for &(eps_c, theta) in &angles {
        for &n in &photons {
            let sin2 = analytics::epsilon_e(theta)?;
            let overlap = analytics::coded_overlap(theta)?;
            let p_fail = analytics::p_fail(theta, n)?;
            let accuracy = 1.0 - p_fail / 2.0;
            let info = analytics::eve_info_bits(p_fail)?;
            let improved = analytics::improved_detection_rate(theta)?;
            let min_photons = match args.target_pf {
                Some(target) => match analytics::min_photons(theta, target) {
                    Ok(n) => Some(n),
                    Err(analytics::AnalyticsError::UnreachableTarget(_)) => {
                        eprintln!(
                            "warning: P_F target {target} unreachable at theta = {theta}; \
                             leaving min_photons blank"
                        );
                        None
                    }
                    Err(err) => return Err(err.into()),
                },
                None => None,
            };
            rows.push(vec![
                eps_c.map(format_f64).unwrap_or_default(),
                format_f64(theta),
                format_f64(sin2),
                format_f64(overlap),
                n.to_string(),
                format_f64(p_fail),
                format_f64(accuracy),
                format_f64(info),
                format_f64(improved),
                args.target_pf.map(format_f64).unwrap_or_default(),
                min_photons.map(|n| n.to_string()).unwrap_or_default(),
            ]);
            let _ = writeln!(
                digest,
                "theta {theta:.6} (sin^2 {sin2:.4}), N {n}: P_F {p_fail:.6}, \
                 accuracy {accuracy:.6}, {info:.4} bits/round"
            );
        }
    }
    eprint!("{digest}");
    write_csv_rows(&args.output, &ANALYZE_HEADER, &rows)
}

fn fmt_rate(est: &RateEstimate) -> String {
    if est.trials == 0 {
        return "n/a".into();
    }
    format!(
        "{:.4} [{:.4}, {:.4}] ({}/{})",
        est.rate, est.lo, est.hi, est.successes, est.trials
    )
}

fn fmt_pred(value: Option<f64>) -> String {
    value.map(|v| format!(", expected {v:.6}")).unwrap_or_default()
}

fn human_summary(
    config: &ExperimentConfig,
    summary: &SummaryStats,
    pred: &Predictions,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "variant {}, {} rounds, c = {}, seed {}",
        config.variant, config.rounds, config.c, config.seed
    );
    let _ = writeln!(
        s,
        "channel: {} noise at eps_c = {}, loss {}",
        config.noise_kind.label(),
        config.eps_c,
        config.loss_prob
    );
    match config.attack {
        AttackStrategy::Pns(pns) => {
            let _ = writeln!(
                s,
                "attack: pns, N = {}, theta = {:.6}, baseline emulation {}",
                pns.n_photons,
                pns.theta,
                if pns.emulate_baseline { "on" } else { "off" }
            );
        }
        attack => {
            let _ = writeln!(s, "attack: {}", attack.label());
        }
    }
    let _ = writeln!(
        s,
        "rounds: {} control, {} message, {} lost",
        summary.control_rounds, summary.message_rounds, summary.lost_rounds
    );
    let _ = writeln!(
        s,
        "control mismatch {}{}",
        fmt_rate(&summary.control_mismatch),
        fmt_pred(pred.control_mismatch)
    );
    let _ = writeln!(
        s,
        "  sigma_z checks {}{}",
        fmt_rate(&summary.control_mismatch_z),
        fmt_pred(pred.control_mismatch_z)
    );
    if summary.control_mismatch_x.trials > 0 || pred.control_mismatch_x.is_some() {
        let _ = writeln!(
            s,
            "  B(pi/4) checks {}{}",
            fmt_rate(&summary.control_mismatch_x),
            fmt_pred(pred.control_mismatch_x)
        );
    }
    if summary.eve_guess_accuracy.trials > 0 {
        let _ = writeln!(
            s,
            "eve guess accuracy {}{}",
            fmt_rate(&summary.eve_guess_accuracy),
            fmt_pred(pred.eve_accuracy)
        );
        let _ = writeln!(
            s,
            "eve P_F given Z {}{}",
            fmt_rate(&summary.eve_fail_given_z),
            fmt_pred(pred.p_fail)
        );
        let _ = writeln!(
            s,
            "eve info {:.4} bits/round{}",
            summary.eve_info_empirical,
            fmt_pred(pred.eve_info_bits)
        );
    }
    let _ = writeln!(s, "bob message error {}", fmt_rate(&summary.bob_message_error));
    let _ = writeln!(s, "bob anomaly rate {}", fmt_rate(&summary.bob_anomaly));
    let _ = writeln!(
        s,
        "loss rate {}{}",
        fmt_rate(&summary.loss_rate),
        fmt_pred(pred.loss_rate)
    );
    s
}

/// `results.csv` keeps the summary; the per-round log saves next to it.
fn rounds_path(out: &Path) -> PathBuf {
    out.with_extension("rounds.csv")
}

fn run_simulate(args: &SimulateArgs) -> Result<(), HarnessError> {
    let config = args.experiment.build()?;
    if config.per_round_log && args.output.out.is_none() {
        return Err(HarnessError::Config(
            "per_round_log = true needs --out PATH for the per-round file".into(),
        ));
    }
    let output = run_experiment(&config)?;
    let predictions = Predictions::for_config(&config);
    eprint!("{}", human_summary(&config, &output.summary, &predictions));
    let row = summary_row("simulate", &config, &output.summary, &predictions);
    write_csv_rows(&args.output, &crate::harness::SUMMARY_HEADER, &[row])?;
    if let (Some(records), Some(out)) = (&output.records, &args.output.out) {
        let path = rounds_path(out);
        write_rounds_csv(File::create(&path)?, records)?;
        eprintln!("per-round log: {}", path.display());
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> Result<(), HarnessError> {
    let base = args.experiment.build()?;
    if base.per_round_log {
        return Err(HarnessError::Config(
            "per-round logs are only available from simulate".into(),
        ));
    }
    let parameter = SweepParameter::parse(&args.param)?;
    let values = parse_f64_list("values", &args.values)?;
    let rows = sweep(&base, parameter, &values)?;
    for row in &rows {
        for warning in row.config.warnings() {
            eprintln!("warning: {}: {warning}", row.scenario_id);
        }
        eprintln!(
            "{}: mismatch {}, P_F {}, loss {}",
            row.scenario_id,
            fmt_rate(&row.summary.control_mismatch),
            fmt_rate(&row.summary.eve_fail_given_z),
            fmt_rate(&row.summary.loss_rate),
        );
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| summary_row(&r.scenario_id, &r.config, &r.summary, &r.predictions))
        .collect();
    write_csv_rows(&args.output, &crate::harness::SUMMARY_HEADER, &csv_rows)
}
