//! Expression evaluator, REPL and batch runner over `fockrat` states.

pub mod bench;
pub mod expr;
pub mod mix;
pub mod session;

use std::io::{self, BufRead, Write};

use fockrat::{Accuracy, Error, Radix, Statistics};
use serde_json::json;

use crate::session::{run, SessionConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Radix { .. } => EXIT_PARSE,
        Error::Domain(_) => EXIT_DOMAIN,
        _ => EXIT_OTHER,
    }
}

/// Parses and runs one expression, rendered in `format`.
pub fn eval_line(
    line: &str,
    config: &SessionConfig,
    format: OutputFormat,
) -> Result<String, Error> {
    let expr = expr::parse(line, config.radix)?;
    let outcome = run(&expr, config)?;
    Ok(match format {
        OutputFormat::Text => outcome.to_text(config),
        OutputFormat::Json => outcome.to_json().to_string(),
    })
}

/// Error text; parse errors get the source line with a caret under the
/// offending offset.
pub fn render_error(line: &str, e: &Error, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            json!({ "error": e.to_string(), "exit_code": exit_code(e) }).to_string()
        }
        OutputFormat::Text => match e {
            Error::Parse { position, .. } | Error::Radix { position, .. } => {
                let col = line.get(..*position).map_or(0, |s| s.chars().count());
                format!("error: {e}\n  {line}\n  {}^", " ".repeat(col))
            }
            _ => format!("error: {e}"),
        },
    }
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Evaluates every non-blank, non-`#` line. Failures are reported inline and
/// do not stop the run; the exit code is that of the first failure.
pub fn run_batch(
    input: impl BufRead,
    mut out: impl Write,
    config: &SessionConfig,
    format: OutputFormat,
) -> io::Result<i32> {
    let mut code = EXIT_OK;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if is_skipped(&line) {
            continue;
        }
        match eval_line(line.trim(), config, format) {
            Ok(text) => writeln!(out, "{text}")?,
            Err(e) => {
                if code == EXIT_OK {
                    code = exit_code(&e);
                }
                match format {
                    OutputFormat::Text => writeln!(
                        out,
                        "line {}: {}",
                        n + 1,
                        render_error(line.trim(), &e, format)
                    )?,
                    OutputFormat::Json => {
                        writeln!(out, "{}", render_error(line.trim(), &e, format))?
                    }
                }
            }
        }
    }
    Ok(code)
}

/// Applies a `:setting value` REPL command.
fn apply_command(
    cmd: &str,
    config: &mut SessionConfig,
    format: &mut OutputFormat,
) -> Result<String, Error> {
    let mut words = cmd.split_whitespace();
    let name = words.next().unwrap_or("");
    let arg = words.next().unwrap_or("");
    let bad = || Error::InvalidArgument(format!("bad value '{arg}' for :{name}"));
    match name {
        "mode" => config.statistics = arg.parse::<Statistics>().map_err(|_| bad())?,
        "radix" => config.radix = Radix::new(arg.parse().map_err(|_| bad())?)?,
        "ell" => config.default_ell = Accuracy::new(arg.parse().map_err(|_| bad())?)?,
        "trace" => {
            config.trace = match arg {
                "on" => true,
                "off" => false,
                _ => return Err(bad()),
            }
        }
        "format" => {
            *format = match arg {
                "text" => OutputFormat::Text,
                "json" => OutputFormat::Json,
                _ => return Err(bad()),
            }
        }
        "help" => {
            return Ok(
                ":mode boson|fermion  :radix K  :ell N  :trace on|off  :format text|json  :quit"
                    .into(),
            )
        }
        _ => return Err(Error::InvalidArgument(format!("unknown command :{name}"))),
    }
    Ok(format!(
        "mode={} radix={} ell={} trace={}",
        config.statistics,
        config.radix,
        config.default_ell.get(),
        if config.trace { "on" } else { "off" }
    ))
}

/// Line-by-line interactive loop. Lines starting with `:` change settings.
pub fn run_repl(
    input: impl BufRead,
    mut out: impl Write,
    mut config: SessionConfig,
    mut format: OutputFormat,
    prompt: bool,
) -> io::Result<()> {
    let show_prompt = |out: &mut dyn Write| -> io::Result<()> {
        if prompt {
            write!(out, "> ")?;
            out.flush()?;
        }
        Ok(())
    };
    show_prompt(&mut out)?;
    for line in input.lines() {
        let line = line?;
        let t = line.trim();
        if t == ":quit" || t == ":q" {
            break;
        }
        if !is_skipped(t) {
            let result = match t.strip_prefix(':') {
                Some(cmd) => apply_command(cmd, &mut config, &mut format),
                None => eval_line(t, &config, format),
            };
            match result {
                Ok(text) => writeln!(out, "{text}")?,
                Err(e) => writeln!(out, "{}", render_error(t, &e, format))?,
            }
        }
        show_prompt(&mut out)?;
    }
    Ok(())
}
