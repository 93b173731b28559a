//! Experiment runner and audit CLI.
//!
//! Exit codes: 0 pass, 1 audit violation, 2 usage/config error,
//! 3 enumeration budget exceeded.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kakeya_hash_cli::config::{parse_set_size, ExperimentConfig, ExperimentKind};
use kakeya_hash_cli::params::{run_params, ParamInputs, ParamRule};
use kakeya_hash_cli::runner::{run, OutputFormat, RunError, RunOutput};

#[derive(Parser)]
#[command(
    name = "kakeya-hash",
    about = "Linear hashing over finite fields: seeded experiments and exhaustive audits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads for trial execution (output is identical for any value).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override the enumeration budget (also settable via KAKEYA_HASH_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// jsonl: one record per line plus a trailing summary; csv: aggregated
    /// max-bucket histogram.
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
}

#[derive(Subcommand)]
enum AuditFamily {
    /// Shift-balance fraction and the concentration-claim audit.
    Balance(RunArgs),
    /// Exhaustive size lower-bound audit over all subsets of a tiny space.
    Furstenberg(RunArgs),
    /// Rank predictions, multiplicity bounds, derivative identities.
    Polymethod(RunArgs),
}

#[derive(Args)]
struct ParamsArgs {
    /// Which rule to evaluate: large-field, injective, binary-direct,
    /// binary-two-stage, binary-direct-large-tau,
    /// binary-two-stage-large-tau, hypothesis-main, hypothesis-improved.
    #[arg(long)]
    rule: String,
    /// Field characteristic (large-field and hypothesis rules).
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Field extension degree.
    #[arg(long, default_value_t = 1)]
    ell: u32,
    /// Ambient dimension.
    #[arg(long)]
    n: Option<u64>,
    /// Set size, decimal or "2^k".
    #[arg(long)]
    set_size: Option<String>,
    /// Balance parameter, "num/den".
    #[arg(long)]
    tau: Option<String>,
    /// Failure fraction, "num/den".
    #[arg(long)]
    delta: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample surjective maps against a set; per-trial bucket statistics.
    HashBalance(RunArgs),
    /// Max-bucket loads: linear maps vs a truly random function.
    Baseline(RunArgs),
    /// Exhaustive audit families.
    #[command(subcommand)]
    Audit(AuditFamily),
    /// Evaluate a parameter rule and print the outcome.
    Params(ParamsArgs),
}

fn load_config(args: &RunArgs, expect: ExperimentKind) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Config(format!("reading {}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text).map_err(|e| RunError::Config(e.to_string()))?;
    if config.kind != expect {
        return Err(RunError::Config(format!(
            "config kind {:?} does not match the subcommand",
            config.kind
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(trials) = args.trials {
        config.trials = Some(trials);
    }
    if let Some(budget) = args.budget {
        config.budget = Some(budget);
    }
    Ok(config)
}

fn emit(args: &RunArgs, output: &RunOutput) -> Result<(), RunError> {
    let bytes = output.to_bytes();
    match &args.out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| RunError::Config(format!("writing {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| RunError::Config(format!("stdout: {e}")))
        }
    }
}

fn execute(args: &RunArgs, kind: ExperimentKind) -> Result<u8, RunError> {
    let config = load_config(args, kind)?;
    let format = match args.format {
        FormatArg::Jsonl => OutputFormat::Jsonl,
        FormatArg::Csv => OutputFormat::Csv,
    };
    let output = run(&config, args.jobs, format)?;
    emit(args, &output)?;
    Ok(if output.violations > 0 { 1 } else { 0 })
}

fn dispatch(cli: Cli) -> Result<u8, RunError> {
    match &cli.command {
        Command::HashBalance(args) => execute(args, ExperimentKind::HashBalance),
        Command::Baseline(args) => execute(args, ExperimentKind::BaselineCompare),
        Command::Audit(family) => match family {
            AuditFamily::Balance(args) => execute(args, ExperimentKind::BalanceAudit),
            AuditFamily::Furstenberg(args) => execute(args, ExperimentKind::FurstenbergAudit),
            AuditFamily::Polymethod(args) => execute(args, ExperimentKind::PolymethodSelfcheck),
        },
        Command::Params(args) => {
            let inputs = ParamInputs {
                rule: ParamRule::parse(&args.rule)?,
                p: args.p,
                ell: args.ell,
                n: args.n,
                set_size: args
                    .set_size
                    .as_deref()
                    .map(parse_set_size)
                    .transpose()
                    .map_err(|e| RunError::Config(e.to_string()))?,
                tau: args
                    .tau
                    .as_deref()
                    .map(kakeya_hash::util::rational_from_string)
                    .transpose()
                    .map_err(|e| RunError::Config(format!("--tau: {e}")))?,
                delta: args
                    .delta
                    .as_deref()
                    .map(kakeya_hash::util::rational_from_string)
                    .transpose()
                    .map_err(|e| RunError::Config(format!("--delta: {e}")))?,
            };
            let line = run_params(&inputs)?;
            println!("{line}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(RunError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
