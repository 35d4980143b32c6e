mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use uskd_core::experiments::{
    fig2_avg_over_channel, fig2_avg_over_coupler, fig2_individual, fig2_repeat_trials,
    fig3b_averaging, Fig3bSpec, SweepSpec, TraceResult,
};
use uskd_core::mzi::PhaseSetting;
use uskd_core::noise::{CouplerMode, NoiseModel};
use uskd_core::protocol::{
    run_rounds, EveStrategy, SessionConfig, SessionStats, DEFAULT_GUARD_BAND,
};
use uskd_core::verify::{all_passed, run_checks, VerifyOptions};

use config::ConfigFile;
use output::{fmt12, OutputWriter};

// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error,
// 4 threshold breach.
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "uskd", version, about = "Round-trip MZI key-distribution laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the intensity-figure panels as CSV traces.
    Fig2(Fig2Args),
    /// Averaging-number fluctuation analysis over a deterministic coupler sweep.
    Fig3b(Fig3bArgs),
    /// Run a key-distribution session and write per-round records and stats.
    Keygen(KeygenArgs),
    /// Run the invariant suite and print per-check PASS/FAIL lines.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct Fig2Args {
    /// Panel: top | avg-coupler | repeats | avg-channel
    #[arg(long)]
    panel: Option<String>,
    /// Coupler-noise ranges in radians, comma separated.
    #[arg(long, value_delimiter = ',')]
    ranges: Option<Vec<f64>>,
    /// Bob's phase in radians.
    #[arg(long)]
    phi: Option<f64>,
    /// Alice's phase in radians.
    #[arg(long)]
    psi: Option<f64>,
    /// Samples averaged per grid point.
    #[arg(long)]
    n: Option<usize>,
    /// Grid points along the swept axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Coupler sampling mode: direct | per-arm
    #[arg(long)]
    mode: Option<String>,
    /// Channel-noise range in radians.
    #[arg(long)]
    chan_range: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct Fig3bArgs {
    #[arg(long)]
    n_small: Option<usize>,
    #[arg(long)]
    n_large: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct KeygenArgs {
    #[arg(long)]
    rounds: Option<usize>,
    /// Coupler-noise range in radians.
    #[arg(long)]
    coupler_range: Option<f64>,
    /// Channel-noise range in radians.
    #[arg(long)]
    chan_range: Option<f64>,
    /// Guard band around I0/2 for inconclusive detections.
    #[arg(long)]
    guard: Option<f64>,
    /// Eavesdropper: none | tap | mzi
    #[arg(long)]
    eve: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with code 4 if the key error rate exceeds this bound.
    #[arg(long)]
    max_error: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Reduced draw counts; every check still runs.
    #[arg(long)]
    quick: bool,
    /// Negative control: inject a beam-splitter sign fault.
    #[arg(long)]
    self_test_negative: bool,
}

enum CliError {
    Usage(String),
    Io(String),
    VerifyFailed,
    Threshold(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::VerifyFailed => EXIT_VERIFY_FAILED,
            CliError::Threshold(_) => EXIT_THRESHOLD,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Threshold(m) => Some(m),
            CliError::VerifyFailed => None,
        }
    }
}

impl From<uskd_core::Error> for CliError {
    fn from(e: uskd_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fig2(args) => cmd_fig2(args),
        Command::Fig3b(args) => cmd_fig3b(args),
        Command::Keygen(args) => cmd_keygen(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(msg) = e.message() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}

/// Seed resolution order: flag, config file, USKD_SEED, then 1.
fn resolve_seed(flag: Option<u64>, cfg: &ConfigFile) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = cfg.parse("seed")? {
        return Ok(s);
    }
    match std::env::var("USKD_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("USKD_SEED is not a valid seed: {v}"))),
        Err(_) => Ok(1),
    }
}

fn resolve_out(flag: Option<PathBuf>, cfg: &ConfigFile) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.get("out").map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("missing required --out".into()))
}

fn parse_mode(s: &str) -> Result<CouplerMode, CliError> {
    match s {
        "direct" => Ok(CouplerMode::Direct),
        "per-arm" => Ok(CouplerMode::PerArm),
        other => Err(CliError::Usage(format!(
            "unknown coupler mode '{other}' (expected direct | per-arm)"
        ))),
    }
}

fn cmd_fig2(args: Fig2Args) -> Result<(), CliError> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let panel = args
        .panel
        .or_else(|| cfg.get("panel").map(str::to_owned))
        .ok_or_else(|| CliError::Usage("missing required --panel".into()))?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let out = resolve_out(args.out, &cfg)?;

    let mut spec = SweepSpec::new(seed);
    if let Some(phi) = args.phi.or(cfg.parse("phi")?) {
        spec.phi = PhaseSetting::new(phi)?;
    }
    if let Some(psi) = args.psi.or(cfg.parse("psi")?) {
        spec.psi = PhaseSetting::new(psi)?;
    }
    if let Some(ranges) = args.ranges.or(cfg.parse_list("ranges")?) {
        spec.coupler_ranges = ranges;
    }
    if let Some(n) = args.n.or(cfg.parse("n")?) {
        spec.samples_per_point = n;
    }
    if let Some(grid) = args.grid.or(cfg.parse("grid")?) {
        spec.zeta_grid = grid;
    }
    if let Some(repeats) = args.repeats.or(cfg.parse("repeats")?) {
        spec.repeats = repeats;
    }
    if let Some(chan_range) = args.chan_range.or(cfg.parse("chan-range")?) {
        spec.chan_range = chan_range;
    }
    if let Some(mode) = args.mode.or_else(|| cfg.get("mode").map(str::to_owned)) {
        spec.coupler_mode = parse_mode(&mode)?;
    }
    spec.validate()?;

    let mut writer = OutputWriter::new(&out, spec.digest(), seed)?;
    match panel.as_str() {
        "top" => {
            let trace = fig2_individual(&spec)?;
            writer.write_trace("fig2_top.csv", &trace)?;
        }
        "avg-coupler" => {
            let traces = fig2_avg_over_coupler(&spec)?;
            write_range_traces(&mut writer, "fig2_avg_coupler", &spec.coupler_ranges, &traces)?;
        }
        "repeats" => {
            let traces = fig2_repeat_trials(&spec)?;
            for (i, trace) in traces.iter().enumerate() {
                writer.write_trace(&format!("fig2_repeats_{i:02}.csv"), trace)?;
            }
        }
        "avg-channel" => {
            let traces = fig2_avg_over_channel(&spec)?;
            write_range_traces(&mut writer, "fig2_avg_channel", &spec.coupler_ranges, &traces)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown panel '{other}' (expected top | avg-coupler | repeats | avg-channel)"
            )))
        }
    }
    writer.finish()?;
    Ok(())
}

fn write_range_traces(
    writer: &mut OutputWriter,
    stem: &str,
    ranges: &[f64],
    traces: &[TraceResult],
) -> Result<(), CliError> {
    for (i, trace) in traces.iter().enumerate() {
        writer.write_trace(&format!("{stem}_r{i:02}_{:.4}.csv", ranges[i]), trace)?;
    }
    Ok(())
}

fn cmd_fig3b(args: Fig3bArgs) -> Result<(), CliError> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let out = resolve_out(args.out, &cfg)?;
    let n_small = args
        .n_small
        .or(cfg.parse("n-small")?)
        .ok_or_else(|| CliError::Usage("missing required --n-small".into()))?;
    let n_large = args
        .n_large
        .or(cfg.parse("n-large")?)
        .ok_or_else(|| CliError::Usage("missing required --n-large".into()))?;

    let mut spec = Fig3bSpec::new(seed);
    spec.n_small = n_small;
    spec.n_large = n_large;
    if let Some(grid) = args.grid.or(cfg.parse("grid")?) {
        spec.zeta_grid = grid;
    }
    if let Some(repeats) = args.repeats.or(cfg.parse("repeats")?) {
        spec.repeats = repeats;
    }
    spec.validate()?;

    let (small, large) = fig3b_averaging(&spec)?;
    let mut writer = OutputWriter::new(&out, spec.digest(), seed)?;
    writer.write_trace(&format!("fig3b_n{}.csv", spec.n_small), &small)?;
    writer.write_trace(&format!("fig3b_n{}.csv", spec.n_large), &large)?;

    let mut rows = String::from("zeta_double_prime,std_n_small,std_n_large\n");
    for i in 0..small.axis.len() {
        rows.push_str(&format!(
            "{},{},{}\n",
            fmt12(small.axis[i]),
            fmt12(small.std_ia[i]),
            fmt12(large.std_ia[i]),
        ));
    }
    writer.write_text("fig3b_fluctuation_std.csv", &rows)?;
    writer.finish()?;
    Ok(())
}

fn cmd_keygen(args: KeygenArgs) -> Result<(), CliError> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let out = resolve_out(args.out, &cfg)?;
    let rounds = args
        .rounds
        .or(cfg.parse("rounds")?)
        .ok_or_else(|| CliError::Usage("missing required --rounds".into()))?;
    let coupler_range = args.coupler_range.or(cfg.parse("coupler-range")?).unwrap_or(0.0);
    let chan_range = args
        .chan_range
        .or(cfg.parse("chan-range")?)
        .unwrap_or(std::f64::consts::TAU);
    let guard = args.guard.or(cfg.parse("guard")?).unwrap_or(DEFAULT_GUARD_BAND);
    let eve_name = args
        .eve
        .or_else(|| cfg.get("eve").map(str::to_owned))
        .unwrap_or_else(|| "none".into());
    let eve = match eve_name.as_str() {
        "none" => EveStrategy::None,
        "tap" => EveStrategy::IntensityTap,
        "mzi" => EveStrategy::InterferometricTap { assume_zeta: None },
        other => {
            return Err(CliError::Usage(format!(
                "unknown eve strategy '{other}' (expected none | tap | mzi)"
            )))
        }
    };

    let mut session = SessionConfig::new(
        rounds,
        NoiseModel::iid_uniform(chan_range)?,
        NoiseModel::iid_uniform(coupler_range)?,
        seed,
    );
    session.guard_band = guard;
    session.eve = eve;
    session.validate()?;

    let records = run_rounds(&session)?;
    let stats = SessionStats::from_records(&records);

    let digest = format!(
        "rounds={rounds};coupler_range={coupler_range};chan_range={chan_range};\
         guard={guard};eve={eve_name};seed={seed}"
    );
    let mut writer = OutputWriter::new(&out, OutputWriter::digest_of(&digest), seed)?;
    writer.write_rounds("rounds.csv", &records)?;
    writer.write_stats("stats.txt", &stats)?;
    writer.finish()?;

    if let Some(max_error) = args.max_error.or(cfg.parse("max-error")?) {
        if stats.error_rate > max_error {
            return Err(CliError::Threshold(format!(
                "error rate {} exceeds bound {max_error}",
                stats.error_rate
            )));
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let checks = run_checks(VerifyOptions {
        quick: args.quick,
        flip_bs_sign: args.self_test_negative,
    });
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {} ({})", c.name, c.detail);
    }
    if all_passed(&checks) {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}
