use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use covert_cli::grid::{parse_n_grid, parse_real_grid};
use covert_cli::{
    source, tables, CliError, Result, SimTarget, SimulateOptions, SweepFamily, Table, Units,
};
use covert_core::sim::ThresholdRule;

/// Limits of covert communication over discrete memoryless and Gaussian
/// channels.
#[derive(Parser)]
#[command(name = "covert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel file (JSON)
    #[arg(long, value_name = "FILE")]
    channel: Option<String>,
    /// Built-in channel: bsc:P, bsc-off:P, kary:K,P or ternary
    #[arg(long, value_name = "SPEC")]
    family: Option<String>,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
    /// Display information quantities in bits
    #[arg(long)]
    bits: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Bsc,
    Kary,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    /// ln|M| / sqrt(n) + offset
    MessageSet,
    /// mean density times (1 - offset)
    FractionOfMean,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a channel and report its covert-communication limits
    Analyze {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        output: Output,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Blahut-Arimoto stopping tolerance (nats)
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Tabulate L over a crossover grid for a channel family
    Sweep {
        #[arg(long, value_enum, default_value = "bsc")]
        family: SweepKind,
        /// Crossover grid, A:B:STEP or a comma list
        #[arg(long, default_value = "0.005:0.495:0.005")]
        p_grid: String,
        /// Alphabet sizes for the k-ary family
        #[arg(long, default_value = "3")]
        k: String,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Trace the exponential family from the off output toward Q*
    Geodesic {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value = "0:1:0.01")]
        lambda: String,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Converse and achievability curves for the Gaussian channel
    Awgn {
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Blocklengths, A:B:STEP, A:B:xF or a comma list
        #[arg(long, default_value = "10:1e6:x10")]
        n_grid: String,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo decoding error of random covert codebooks
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Simulate the Gaussian channel instead of a DMC
        #[arg(long)]
        awgn: bool,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, conflicts_with = "n_grid")]
        n: Option<u64>,
        #[arg(long)]
        n_grid: Option<String>,
        /// ln|M| as a multiple of L sqrt(n delta)
        #[arg(long, default_value_t = 0.8)]
        rate_factor: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "message-set")]
        threshold_rule: RuleKind,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        threshold_offset: f64,
        #[arg(long, default_value_t = 256)]
        is_samples: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn emit(text: &str, out: &Option<String>) -> Result<()> {
    match out {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_table(table: &Table, out: &Option<String>) -> Result<()> {
    emit(&table.to_csv_string()?, out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            channel,
            output,
            format,
            tol,
        } => {
            let ch = source::load(channel.channel.as_deref(), channel.family.as_deref())?;
            let report = covert_cli::analyze(&ch, tol)?;
            let units = Units::from_bits_flag(output.bits);
            let text = match format {
                Format::Text => report.to_text(units),
                Format::Json => report.to_json(units)?,
            };
            emit(&text, &output.out)
        }
        Command::Sweep {
            family,
            p_grid,
            k,
            output,
            tol,
        } => {
            let family = match family {
                SweepKind::Bsc => SweepFamily::Bsc,
                SweepKind::Kary => {
                    SweepFamily::Kary(parse_n_grid(&k)?.into_iter().map(|k| k as usize).collect())
                }
            };
            let table = tables::sweep(
                &family,
                &parse_real_grid(&p_grid)?,
                tol,
                Units::from_bits_flag(output.bits),
            )?;
            emit_table(&table, &output.out)
        }
        Command::Geodesic {
            channel,
            lambda,
            output,
            tol,
        } => {
            let ch = source::load(channel.channel.as_deref(), channel.family.as_deref())?;
            emit_table(
                &tables::geodesic(&ch, &parse_real_grid(&lambda)?, tol)?,
                &output.out,
            )
        }
        Command::Awgn {
            sigma2,
            delta,
            n_grid,
            output,
        } => {
            let table = tables::awgn(
                sigma2,
                delta,
                &parse_n_grid(&n_grid)?,
                Units::from_bits_flag(output.bits),
            )?;
            emit_table(&table, &output.out)
        }
        Command::Simulate {
            channel,
            awgn,
            sigma2,
            delta,
            n,
            n_grid,
            rate_factor,
            trials,
            seed,
            threshold_rule,
            threshold_offset,
            is_samples,
            output,
        } => {
            let n_values = match (n, n_grid) {
                (Some(n), None) => vec![n],
                (None, Some(g)) => parse_n_grid(&g)?,
                _ => return Err(CliError::Usage("give --n or --n-grid".into())),
            };
            let threshold = match threshold_rule {
                RuleKind::MessageSet => ThresholdRule::MessageSet {
                    offset: threshold_offset,
                },
                RuleKind::FractionOfMean => ThresholdRule::FractionOfMean {
                    offset: threshold_offset,
                },
            };
            let opts = SimulateOptions {
                delta,
                rate_factor,
                trials,
                seed,
                threshold,
                is_samples,
            };
            let ch;
            let target = if awgn {
                if channel.channel.is_some() || channel.family.is_some() {
                    return Err(CliError::Usage(
                        "--awgn excludes --channel and --family".into(),
                    ));
                }
                SimTarget::Awgn(sigma2)
            } else {
                ch = source::load(channel.channel.as_deref(), channel.family.as_deref())?;
                SimTarget::Dmc(&ch)
            };
            let table =
                tables::simulate(target, &n_values, &opts, Units::from_bits_flag(output.bits))?;
            emit_table(&table, &output.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
