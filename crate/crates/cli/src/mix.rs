//! Arithmetic on superpositions, reported as the distribution of outcomes.
//!
//! A superposition is written as `;`-separated terms `[amplitude:]expr`,
//! e.g. `1: 1; 1: 10` or `0.6: 1; 0.8i: {r-@2}`. Amplitudes default to 1 and
//! the whole is normalized.

use std::str::FromStr;

use fockrat::superposition::{add_entangled, mul_entangled, trace_out, EntangledTerm};
use fockrat::valuation::eval_n;
use fockrat::{Error, Mixture, Result, Superposition};
use num_complex::Complex64;

use crate::expr::parse;
use crate::session::{run, Outcome, SessionConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixOp {
    Add,
    Mul,
}

impl FromStr for MixOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<MixOp> {
        match s {
            "add" => Ok(MixOp::Add),
            "mul" => Ok(MixOp::Mul),
            other => Err(Error::InvalidArgument(format!(
                "unknown mix operation '{other}'"
            ))),
        }
    }
}

/// Parses `[amplitude:]expr; ...`; parse error offsets are relative to
/// the whole text.
pub fn parse_superposition(text: &str, config: &SessionConfig) -> Result<Superposition> {
    let mut terms = Vec::new();
    let mut offset = 0;
    for piece in text.split(';') {
        let (amp, body, body_offset) = match piece.find(':') {
            Some(colon) => {
                let amp_text = piece[..colon].trim();
                let amp = Complex64::from_str(amp_text).map_err(|_| Error::Parse {
                    position: offset,
                    message: format!("bad amplitude '{amp_text}'"),
                })?;
                (amp, &piece[colon + 1..], offset + colon + 1)
            }
            None => (Complex64::new(1.0, 0.0), piece, offset),
        };
        let expr = parse(body, config.radix).map_err(|e| shift(e, body_offset))?;
        let state = match run(&expr, config)? {
            Outcome::Full(ev) | Outcome::Standard(ev) | Outcome::Value(ev) => ev.state,
            Outcome::Order { .. } => {
                return Err(Error::InvalidArgument(format!(
                    "'{}' is not a state",
                    body.trim()
                )))
            }
        };
        terms.push((amp, state));
        offset += piece.len() + 1;
    }
    Superposition::normalized(terms)
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Parse { position, message } => Error::Parse {
            position: position + by,
            message,
        },
        Error::Radix {
            position,
            digit,
            radix,
        } => Error::Radix {
            position: position + by,
            digit,
            radix,
        },
        other => other,
    }
}

/// Applies `op` register-wise and traces out the inputs.
pub fn mix(op: MixOp, left: &Superposition, right: &Superposition) -> Result<Mixture> {
    let entangled: Vec<EntangledTerm> = match op {
        MixOp::Add => add_entangled(left, right)?,
        MixOp::Mul => mul_entangled(left, right)?,
    };
    Ok(trace_out(&entangled))
}

/// Probabilities printed with at most 12 decimals, trailing zeros dropped.
pub fn format_probability(p: f64) -> String {
    let s = format!("{p:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// `p=<p>  <state>  eval=<value>` per outcome, most likely first.
pub fn report(mixture: &Mixture, config: &SessionConfig) -> Vec<String> {
    mixture
        .sorted_terms()
        .iter()
        .map(|(p, s)| {
            format!(
                "p={}  {}  eval={}",
                format_probability(*p),
                s,
                eval_n(s, config.radix)
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_of_two_outcomes() {
        let c = SessionConfig::default();
        let left = parse_superposition("1; 10", &c).unwrap();
        let right = parse_superposition("1", &c).unwrap();
        let lines = report(&mix(MixOp::Add, &left, &right).unwrap(), &c);
        assert_eq!(
            lines,
            vec!["p=0.5  r+@0 r+@1  eval=3", "p=0.5  r+@0^2  eval=2"]
        );
    }

    #[test]
    fn offsets_cover_the_whole_text() {
        let c = SessionConfig::default();
        assert!(matches!(
            parse_superposition("1; 0.5: 12", &c),
            Err(Error::Radix { position: 9, .. })
        ));
        assert!(matches!(
            parse_superposition("x: 1", &c),
            Err(Error::Parse { position: 0, .. })
        ));
    }

    #[test]
    fn probabilities() {
        assert_eq!(format_probability(0.5000000000000001), "0.5");
        assert_eq!(format_probability(1.0), "1");
        assert_eq!(format_probability(0.25), "0.25");
    }
}
