use std::fs::File;
use std::io::{self, BufReader, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fockrat::{Accuracy, Error, Radix, Statistics};
use fockrat_cli::bench::{run_bench, BenchParams, Suite};
use fockrat_cli::mix::{format_probability, mix, parse_superposition, report, MixOp};
use fockrat_cli::session::SessionConfig;
use fockrat_cli::{
    eval_line, exit_code, render_error, run_batch, run_repl, OutputFormat, EXIT_OTHER,
};
use serde_json::json;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Boson,
    Fermion,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MixArg {
    Add,
    Mul,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Normalize,
    Mul,
    Inv,
}

/// Exact arithmetic on occupation-number states.
#[derive(Debug, Parser)]
#[command(name = "fockrat", version)]
struct Cli {
    /// Statistics of every state built from an expression.
    #[arg(long, value_enum, default_value_t = Mode::Boson, global = true)]
    mode: Mode,
    #[arg(long, default_value_t = 2, global = true)]
    radix: u32,
    /// Default accuracy for `/`, `inv` and `sqrt`.
    #[arg(long, default_value_t = 16, global = true)]
    ell: u32,
    /// Print every normalization step of `norm(...)`.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one expression.
    Eval {
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Evaluate one expression per line of a file (or stdin); `#` starts a comment line.
    Batch { file: Option<PathBuf> },
    /// Interactive loop (the default).
    Repl,
    /// Outcome distribution of `left op right` for superpositions written
    /// as `[amplitude:]expr; ...`.
    Mix {
        #[arg(value_enum)]
        op: MixArg,
        left: String,
        right: String,
    },
    /// Seeded micro-benchmarks with cross-checks.
    Bench {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Sites (normalize, default 64), systems per operand (mul, default
        /// 8) or site window (inv, default 16).
        #[arg(long)]
        size: Option<i64>,
        #[arg(long, default_value_t = 100)]
        max_count: u64,
    },
}

fn config(cli: &Cli) -> Result<SessionConfig, Error> {
    Ok(SessionConfig {
        statistics: match cli.mode {
            Mode::Boson => Statistics::Boson,
            Mode::Fermion => Statistics::Fermion,
        },
        radix: Radix::new(cli.radix)?,
        default_ell: Accuracy::new(cli.ell)?,
        trace: cli.trace,
    })
}

fn fail(line: &str, e: &Error, format: OutputFormat) -> ExitCode {
    eprintln!("{}", render_error(line, e, format));
    ExitCode::from(exit_code(e) as u8)
}

fn io_fail(e: io::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_OTHER as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match config(&cli) {
        Ok(c) => c,
        Err(e) => return fail("", &e, cli.format),
    };
    let stdout = io::stdout();
    match cli.command.unwrap_or(Command::Repl) {
        Command::Eval { expr } => match eval_line(&expr, &config, cli.format) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&expr, &e, cli.format),
        },
        Command::Batch { file } => {
            let result = match file.filter(|p| p.as_os_str() != "-") {
                Some(path) => match File::open(&path) {
                    Ok(f) => run_batch(BufReader::new(f), stdout.lock(), &config, cli.format),
                    Err(e) => return io_fail(e),
                },
                None => run_batch(io::stdin().lock(), stdout.lock(), &config, cli.format),
            };
            match result {
                Ok(code) => ExitCode::from(code as u8),
                Err(e) => io_fail(e),
            }
        }
        Command::Repl => {
            let prompt = io::stdin().is_terminal();
            match run_repl(
                io::stdin().lock(),
                stdout.lock(),
                config,
                cli.format,
                prompt,
            ) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => io_fail(e),
            }
        }
        Command::Mix { op, left, right } => {
            let op = match op {
                MixArg::Add => MixOp::Add,
                MixArg::Mul => MixOp::Mul,
            };
            let result = parse_superposition(&left, &config)
                .map_err(|e| (left.clone(), e))
                .and_then(|l| {
                    Ok((
                        l,
                        parse_superposition(&right, &config).map_err(|e| (right.clone(), e))?,
                    ))
                })
                .and_then(|(l, r)| mix(op, &l, &r).map_err(|e| (String::new(), e)));
            let mixture = match result {
                Ok(m) => m,
                Err((line, e)) => return fail(&line, &e, cli.format),
            };
            let mut out = stdout.lock();
            let written = match cli.format {
                OutputFormat::Text => report(&mixture, &config)
                    .iter()
                    .try_for_each(|l| writeln!(out, "{l}")),
                OutputFormat::Json => {
                    let rows: Vec<_> = mixture
                        .sorted_terms()
                        .iter()
                        .map(|(p, s)| {
                            json!({
                                "p": format_probability(*p),
                                "state": s.to_string(),
                                "eval": fockrat::eval_n(s, config.radix).to_string(),
                            })
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::Value::from(rows))
                }
            };
            written.map_or_else(io_fail, |()| ExitCode::SUCCESS)
        }
        Command::Bench {
            suite,
            seed,
            count,
            size,
            max_count,
        } => {
            let (suite, default_size) = match suite {
                SuiteArg::Normalize => (Suite::Normalize, 64),
                SuiteArg::Mul => (Suite::Mul, 8),
                SuiteArg::Inv => (Suite::Inv, 16),
            };
            let params = BenchParams {
                suite,
                seed,
                count,
                size: size.unwrap_or(default_size),
                max_count,
                ell: config.default_ell,
            };
            match run_bench(&params, &config) {
                Ok(lines) => {
                    lines.iter().for_each(|l| println!("{l}"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail("", &e, cli.format),
            }
        }
    }
}
