use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rowfollow_harness::config::keys_help;
use rowfollow_harness::metrics::CSV_HEADER;
use rowfollow_harness::{
    compare_modes, load_scenario, replay_file, run_episode, summarize, sweep, EpisodeOptions, HarnessError, Mode,
    RecordError, RunConfig,
};
use rowfollow_sim::SimError;

#[derive(Parser)]
#[command(name = "rowfollow", version, about = "Simulated under-canopy row following: run, compare, sweep and replay")]
#[command(after_long_help = config_help())]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

fn config_help() -> String {
    format!(
        "Scenarios are preset names (clean, lane-a, lane-b, curve, production) or scenario JSON files.\n\
         Exit codes: 0 success, 2 config error, 3 parse error, 1 anything else.\n\n\
         Config keys (TOML file via --config, or --set key=value):\n{}",
        keys_help()
    )
}

#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config override `key=value`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Metrics output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one episode and print its metrics.
    Run {
        scenario: String,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON Lines run log here (with raw scans, so it can be replayed).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run PL and PL+EKF on paired seeds 0..N.
    Compare {
        scenario: String,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute a run log and print its metrics.
    Replay {
        log: PathBuf,
        /// Recompute under this mode instead of the logged one.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Perception-rate ablation over paired seeds.
    Sweep {
        scenario: String,
        #[arg(long = "rate-hz", value_delimiter = ',', default_values_t = [40.0, 10.0, 5.0])]
        rate_hz: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| format!("unknown mode `{s}` (expected PL or PL+EKF)"))
}

fn load_config(common: &Common) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&common.overrides)?;
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("metrics serialize"));
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Cmd::Run { scenario, mode, seed, out, common } => {
            let cfg = load_config(&common)?;
            let (id, spec) = load_scenario(&scenario)?;
            let mode = mode.unwrap_or(cfg.default_mode());
            let opts = EpisodeOptions { keep_scans: out.is_some() };
            let record = run_episode(&id, &spec, mode, &cfg, seed, opts)?;
            if let Some(path) = out {
                let io = |source| HarnessError::Io { path: path.display().to_string(), source };
                let mut w = BufWriter::new(File::create(&path).map_err(io)?);
                record.write_jsonl(&mut w).and_then(|_| w.flush()).map_err(io)?;
            }
            let summary = summarize(&record)?;
            match common.format {
                Format::Json => print_json(&summary),
                Format::Csv => println!("{CSV_HEADER}\n{}", summary.csv_row()),
            }
        }
        Cmd::Compare { scenario, seeds, common } => {
            let cfg = load_config(&common)?;
            let (id, spec) = load_scenario(&scenario)?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let report = compare_modes(&id, &spec, &seeds, &cfg)?;
            match common.format {
                Format::Json => print_json(&report),
                Format::Csv => print!("{}", report.to_csv()),
            }
        }
        Cmd::Replay { log, mode, format } => {
            let replayed = replay_file(&log, mode)?;
            for w in &replayed.warnings {
                eprintln!("warning: {w}");
            }
            let summary = summarize(&replayed.record)?;
            match format {
                Format::Json => print_json(&summary),
                Format::Csv => println!("{CSV_HEADER}\n{}", summary.csv_row()),
            }
        }
        Cmd::Sweep { scenario, rate_hz, seeds, common } => {
            let cfg = load_config(&common)?;
            let (id, spec) = load_scenario(&scenario)?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let report = sweep(&id, &spec, &rate_hz, &Mode::BOTH, &seeds, &cfg)?;
            match common.format {
                Format::Json => print_json(&report.rows),
                Format::Csv => print!("{}", report.to_csv()),
            }
        }
    }
    Ok(())
}

fn exit_code(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) | HarnessError::Sim(SimError::InvalidSpec(_)) => 2,
        HarnessError::Sim(SimError::Json(_)) | HarnessError::Record(RecordError::Parse { .. } | RecordError::Schema { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
