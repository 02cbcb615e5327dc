//! Evaluating parsed expressions and rendering the results.

use std::cmp::Ordering;

use fockrat::arithmetic::{
    add, div_ell, invert_complex, invert_pos_real_traced, mul, negate, sqrt_ell, sub,
};
use fockrat::reduction::normalize_traced;
use fockrat::superposition::{apply_q, apply_t, apply_w};
use fockrat::valuation::{cmp_component, eval_form};
use fockrat::{
    normalize, Accuracy, Error, ExactComplex, Family, NumberState, Radix, Result, Sign,
    StandardForm, Statistics,
};
use serde_json::{json, Value};

use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub statistics: Statistics,
    pub radix: Radix,
    /// Accuracy for `/`, `inv` and `sqrt` without an explicit `ell=`.
    pub default_ell: Accuracy,
    pub trace: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            statistics: Statistics::Boson,
            radix: Radix::BINARY,
            default_ell: Accuracy::default(),
            trace: false,
        }
    }
}

/// A numeric result, normalized for display.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    /// The state as computed, before the final normalization.
    pub state: NumberState,
    pub form: StandardForm,
    pub phase: Sign,
    pub value: ExactComplex,
    pub trace: Vec<String>,
}

/// What a top-level expression asks to see.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// Standard form, exact value and positional string.
    Full(Evaluated),
    /// `norm(e)`: the standard form, after any trace lines.
    Standard(Evaluated),
    /// `eval(e)`: the exact value.
    Value(Evaluated),
    Order {
        ordering: Ordering,
        family: Family,
        trace: Vec<String>,
    },
}

/// Evaluates `expr` under `config`.
pub fn run(expr: &Expr, config: &SessionConfig) -> Result<Outcome> {
    let mut ev = Evaluator {
        config,
        trace: Vec::new(),
    };
    match expr {
        Expr::Cmp { lhs, rhs, family } => {
            let (a, b) = (ev.state(lhs)?, ev.state(rhs)?);
            let ordering = cmp_component(&a, &b, *family, config.radix);
            Ok(Outcome::Order {
                ordering,
                family: *family,
                trace: ev.trace,
            })
        }
        Expr::Norm(inner) => {
            let state = ev.state(inner)?;
            ev.record_normalization(&state);
            Ok(Outcome::Standard(ev.finish(state)))
        }
        Expr::Eval(inner) => {
            let state = ev.state(inner)?;
            Ok(Outcome::Value(ev.finish(state)))
        }
        _ => {
            let state = ev.state(expr)?;
            Ok(Outcome::Full(ev.finish(state)))
        }
    }
}

struct Evaluator<'a> {
    config: &'a SessionConfig,
    trace: Vec<String>,
}

/// Prefixes domain and argument errors with the failing operation.
fn context(op: &str, operands: &[&Expr], e: Error) -> Error {
    let args = operands
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    match e {
        Error::Domain(m) => Error::Domain(format!("{op}({args}): {m}")),
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{op}({args}): {m}")),
        other => other,
    }
}

impl Evaluator<'_> {
    fn radix(&self) -> Radix {
        self.config.radix
    }

    fn ell(&self, explicit: Option<u32>) -> Result<Accuracy> {
        explicit.map_or(Ok(self.config.default_ell), Accuracy::new)
    }

    fn boson_form(&self, state: &NumberState) -> StandardForm {
        normalize(state, self.radix()).0
    }

    fn record_normalization(&mut self, state: &NumberState) {
        if self.config.trace {
            let n = normalize_traced(state, self.radix());
            self.trace.extend(n.steps.iter().map(ToString::to_string));
        }
    }

    fn finish(self, state: NumberState) -> Evaluated {
        let (form, phase) = normalize(&state, self.config.radix);
        let value = eval_form(&form, self.config.radix);
        Evaluated {
            state,
            form,
            phase,
            value,
            trace: self.trace,
        }
    }

    fn state(&mut self, e: &Expr) -> Result<NumberState> {
        let stats = self.config.statistics;
        let s = match e {
            Expr::Literal(l) => {
                let family = if l.imaginary {
                    Family::Imaginary
                } else {
                    Family::Real
                };
                NumberState::from_binary_literal(&l.digits_text(), family, self.radix())?
                    .with_statistics(stats)
            }
            Expr::States(systems) => NumberState::from_systems(systems, stats)?,
            Expr::Vacuum => NumberState::vacuum(stats),
            Expr::Neg(a) => negate(&self.state(a)?),
            Expr::Add(a, b) => {
                let (x, y) = (self.state(a)?, self.state(b)?);
                add(&x, &y).map_err(|err| context("add", &[a, b], err))?
            }
            Expr::Sub(a, b) => {
                let (x, y) = (self.state(a)?, self.state(b)?);
                sub(&x, &y).map_err(|err| context("sub", &[a, b], err))?
            }
            Expr::Mul(a, b) => {
                let (x, y) = (self.state(a)?, self.state(b)?);
                mul(&x, &y).map_err(|err| context("mul", &[a, b], err))?
            }
            Expr::Div { lhs, rhs, ell } => {
                let (x, y) = (self.state(lhs)?, self.state(rhs)?);
                div_ell(&x, &y, self.ell(*ell)?, self.radix())
                    .map_err(|err| context("div", &[lhs, rhs], err))?
            }
            Expr::Inv { arg, ell } => {
                let x = self.state(arg)?;
                let form = self.boson_form(&x);
                let ell = self.ell(*ell)?;
                let positive_real = form.imag.is_none()
                    && form.real.as_ref().is_some_and(|p| p.sign() == Sign::Plus);
                let inverse = if positive_real {
                    let t = invert_pos_real_traced(&form, ell, self.radix())
                        .map_err(|err| context("inv", &[arg], err))?;
                    if self.config.trace {
                        for c in &t.candidates {
                            let verdict = if c.accepted { "accept" } else { "reject" };
                            self.trace.push(format!("candidate h={} {verdict}", c.h));
                        }
                    }
                    t.inverse.to_state(Statistics::Boson, Sign::Plus)
                } else {
                    invert_complex(&form, ell, self.radix())
                        .map_err(|err| context("inv", &[arg], err))?
                };
                inverse.with_statistics(stats)
            }
            Expr::Sqrt { arg, ell } => {
                let x = self.state(arg)?;
                let form = self.boson_form(&x);
                sqrt_ell(&form, self.ell(*ell)?, self.radix())
                    .map_err(|err| context("sqrt", &[arg], err))?
                    .to_state(stats, Sign::Plus)
            }
            Expr::Norm(a) => {
                let x = self.state(a)?;
                self.record_normalization(&x);
                let (form, phase) = normalize(&x, self.radix());
                form.to_state(x.statistics(), phase)
            }
            Expr::Eval(a) => self.state(a)?,
            Expr::Cmp { .. } => {
                return Err(Error::InvalidArgument(format!(
                    "{e} yields an ordering, not a number"
                )))
            }
            Expr::W(a) => apply_w(&self.state(a)?),
            Expr::Q(a) => apply_q(&self.state(a)?),
            Expr::T(a, n) => apply_t(&self.state(a)?, *n),
        };
        Ok(s)
    }
}

/// Standard form text, `0` for the vacuum.
pub fn form_text(form: &StandardForm) -> String {
    if form.is_zero() {
        "0".to_string()
    } else {
        form.to_string()
    }
}

fn ordering_text(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

impl Outcome {
    /// Lines printed in text mode.
    pub fn to_text(&self, config: &SessionConfig) -> String {
        let mut lines: Vec<String> = Vec::new();
        match self {
            Outcome::Full(ev) => {
                lines.extend(ev.trace.iter().cloned());
                lines.push(format!("standard: {}", form_text(&ev.form)));
                lines.push(format!("value: {}", ev.value));
                lines.push(format!("binary: {}", ev.value.to_radix_string()));
                if config.statistics == Statistics::Fermion {
                    lines.push(format!("phase: {}", ev.phase.as_i32()));
                }
            }
            Outcome::Standard(ev) => {
                lines.extend(ev.trace.iter().cloned());
                let mut text = form_text(&ev.form);
                if config.statistics == Statistics::Fermion && ev.phase == Sign::Minus {
                    text.push_str(" phase=-1");
                }
                lines.push(text);
            }
            Outcome::Value(ev) => {
                lines.extend(ev.trace.iter().cloned());
                lines.push(ev.value.to_string());
            }
            Outcome::Order {
                ordering, trace, ..
            } => {
                lines.extend(trace.iter().cloned());
                lines.push(ordering_text(*ordering).to_string());
            }
        }
        lines.join("\n")
    }

    /// One JSON object. Big integers are strings so they survive exactly.
    pub fn to_json(&self) -> Value {
        match self {
            Outcome::Full(ev) | Outcome::Standard(ev) | Outcome::Value(ev) => {
                let (re, im, den) = ev.value.over_common_denominator();
                json!({
                    "standard": form_text(&ev.form),
                    "value": ev.value.to_string(),
                    "eval_num": { "re": re.to_string(), "im": im.to_string() },
                    "eval_den": den.to_string(),
                    "binary": ev.value.to_radix_string(),
                    "phase": ev.phase.as_i32(),
                    "trace": ev.trace,
                })
            }
            Outcome::Order {
                ordering,
                family,
                trace,
            } => json!({
                "cmp": ordering_text(*ordering),
                "family": family.to_string(),
                "trace": trace,
            }),
        }
    }
}
