//! Expression language over number states.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | factor
//! factor  := literal | stateset | 'vac' | '(' expr ')' | func '(' args ')'
//! literal := ['-'] ['i'] digits ['.' digits]
//! stateset:= '{' systok (',' systok)* '}'
//! systok  := ('r'|'i') ('+'|'-') '@' int ['^' count]
//! ```
//!
//! Functions: `norm(e)`, `eval(e)`, `inv(e[, ell=N])`, `sqrt(e[, ell=N])`,
//! `div(a, b[, ell=N])`, `cmp(a, b[, fam=r|i])`, `W(e)`, `Q(e)`, `T(e, n)`.

use std::fmt;

use fockrat::{Error, Family, Radix, Result, Sign, SystemKind};

/// A positional literal as written, digits still in text form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Literal {
    pub negative: bool,
    pub imaginary: bool,
    pub int: String,
    pub frac: Option<String>,
}

impl Literal {
    /// The literal without its `i` marker, as accepted by
    /// `NumberState::from_binary_literal`.
    pub fn digits_text(&self) -> String {
        let sign = if self.negative { "-" } else { "" };
        match &self.frac {
            Some(f) => format!("{sign}{}.{f}", self.int),
            None => format!("{sign}{}", self.int),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        if self.imaginary {
            write!(f, "i")?;
        }
        write!(f, "{}", self.int)?;
        if let Some(frac) = &self.frac {
            write!(f, ".{frac}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Literal(Literal),
    States(Vec<(SystemKind, i64, u64)>),
    Vacuum,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `a / b` leaves `ell` to the session default.
    Div {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        ell: Option<u32>,
    },
    Inv {
        arg: Box<Expr>,
        ell: Option<u32>,
    },
    Sqrt {
        arg: Box<Expr>,
        ell: Option<u32>,
    },
    Norm(Box<Expr>),
    Eval(Box<Expr>),
    Cmp {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        family: Family,
    },
    W(Box<Expr>),
    Q(Box<Expr>),
    T(Box<Expr>, i64),
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div { ell: None, .. } => 2,
        Expr::Neg(_) => 3,
        Expr::Literal(l) if l.negative => 3,
        _ => 4,
    }
}

/// Writes `e`, parenthesized if it binds looser than `min`.
fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_ell(f: &mut fmt::Formatter<'_>, ell: Option<u32>) -> fmt::Result {
    match ell {
        Some(n) => write!(f, ", ell={n})"),
        None => write!(f, ")"),
    }
}

impl fmt::Display for Expr {
    /// Renders text that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(l) => write!(f, "{l}"),
            Expr::Vacuum => write!(f, "vac"),
            Expr::States(systems) => {
                write!(f, "{{")?;
                for (i, (kind, j, c)) in systems.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{kind}@{j}")?;
                    if *c != 1 {
                        write!(f, "^{c}")?;
                    }
                }
                write!(f, "}}")
            }
            // always parenthesized, so that `-(1)` stays a negation rather
            // than turning into the literal `-1`
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Add(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " + ")?;
                write_at(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " - ")?;
                write_at(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_at(f, a, 2)?;
                write!(f, " * ")?;
                write_at(f, b, 3)
            }
            Expr::Div {
                lhs,
                rhs,
                ell: None,
            } => {
                write_at(f, lhs, 2)?;
                write!(f, " / ")?;
                write_at(f, rhs, 3)
            }
            Expr::Div { lhs, rhs, ell } => {
                write!(f, "div({lhs}, {rhs}")?;
                write_ell(f, *ell)
            }
            Expr::Inv { arg, ell } => {
                write!(f, "inv({arg}")?;
                write_ell(f, *ell)
            }
            Expr::Sqrt { arg, ell } => {
                write!(f, "sqrt({arg}")?;
                write_ell(f, *ell)
            }
            Expr::Norm(e) => write!(f, "norm({e})"),
            Expr::Eval(e) => write!(f, "eval({e})"),
            Expr::Cmp { lhs, rhs, family } => write!(f, "cmp({lhs}, {rhs}, fam={family})"),
            Expr::W(e) => write!(f, "W({e})"),
            Expr::Q(e) => write!(f, "Q({e})"),
            Expr::T(e, n) => write!(f, "T({e}, {n})"),
        }
    }
}

/// Parses one expression; digits of literals must be below `radix`.
pub fn parse(text: &str, radix: Radix) -> Result<Expr> {
    let mut p = Parser {
        src: text,
        pos: 0,
        radix,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    radix: Radix,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(match self.peek() {
                Some(found) => format!("expected '{c}', found '{found}'"),
                None => format!("expected '{c}', found end of input"),
            }))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div {
                    lhs: Box::new(lhs),
                    rhs: Box::new(self.unary()?),
                    ell: None,
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_literal(&self) -> bool {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => true,
            Some('i') => self.peek_at(1).is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            self.skip_ws();
            if self.starts_literal() {
                return self.literal(true);
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.starts_literal() {
            return self.literal(false);
        }
        match self.peek() {
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('{') => self.state_set(),
            Some(c) if c.is_ascii_alphabetic() => self.call(),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Result<String> {
        let start = self.pos;
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !c.is_ascii_alphanumeric() || (self.radix.get() <= 10 && !c.is_ascii_digit()) {
                break;
            }
            match c.to_digit(36) {
                Some(d) if d < self.radix.get() => out.push(c),
                _ => {
                    return Err(Error::Radix {
                        position: self.pos,
                        digit: c,
                        radix: self.radix.get(),
                    })
                }
            }
            self.bump();
        }
        if out.is_empty() {
            self.pos = start;
            return Err(self.error("expected digits"));
        }
        Ok(out)
    }

    fn literal(&mut self, negative: bool) -> Result<Expr> {
        let imaginary = self.peek() == Some('i');
        if imaginary {
            self.bump();
        }
        let int = self.digits()?;
        let frac = if self.peek() == Some('.') {
            self.bump();
            Some(self.digits()?)
        } else {
            None
        };
        Ok(Expr::Literal(Literal {
            negative,
            imaginary,
            int,
            frac,
        }))
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') || self.peek() == Some('+') {
            self.bump();
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        self.src[start..self.pos].parse().map_err(|_| {
            let message = format!(
                "expected an integer, found '{}'",
                &self.src[start..self.pos]
            );
            Error::Parse {
                position: start,
                message,
            }
        })
    }

    fn state_set(&mut self) -> Result<Expr> {
        self.expect('{')?;
        let mut systems = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let family = match self.bump() {
                Some('r') => Family::Real,
                Some('i') => Family::Imaginary,
                _ => {
                    return Err(Error::Parse {
                        position: at,
                        message: "expected 'r' or 'i'".into(),
                    })
                }
            };
            let sign = match self.bump() {
                Some('+') => Sign::Plus,
                Some('-') => Sign::Minus,
                _ => return Err(self.error("expected '+' or '-' after the family")),
            };
            if self.bump() != Some('@') {
                return Err(self.error("expected '@' before the site"));
            }
            let j = self.integer()?;
            let count = if self.peek() == Some('^') {
                self.bump();
                let at = self.pos;
                match self.integer()? {
                    c if c >= 1 => c as u64,
                    _ => {
                        return Err(Error::Parse {
                            position: at,
                            message: "multiplicity must be at least 1".into(),
                        })
                    }
                }
            } else {
                1
            };
            systems.push((SystemKind::new(family, sign), j, count));
            if !self.eat(',') {
                break;
            }
        }
        self.expect('}')?;
        Ok(Expr::States(systems))
    }

    fn identifier(&mut self) -> &str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    /// Parses `name=value` after a comma; returns the value's text.
    fn named(&mut self, name: &str) -> Result<String> {
        self.skip_ws();
        let at = self.pos;
        let found = self.identifier().to_string();
        if found != name {
            return Err(Error::Parse {
                position: at,
                message: format!("expected '{name}=', found '{found}'"),
            });
        }
        self.expect('=')?;
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn optional_ell(&mut self) -> Result<Option<u32>> {
        if !self.eat(',') {
            return Ok(None);
        }
        let at = self.pos;
        let text = self.named("ell")?;
        match text.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Parse {
                position: at,
                message: format!("ell must be a positive integer, got '{text}'"),
            }),
        }
    }

    fn call(&mut self) -> Result<Expr> {
        let at = self.pos;
        let name = self.identifier().to_string();
        if name == "vac" || name == "vacuum" {
            return Ok(Expr::Vacuum);
        }
        let known = ["norm", "eval", "inv", "sqrt", "div", "cmp", "W", "Q", "T"];
        if !known.contains(&name.as_str()) {
            return Err(Error::Parse {
                position: at,
                message: format!("unknown function '{name}'"),
            });
        }
        self.expect('(')?;
        let first = Box::new(self.expr()?);
        let e = match name.as_str() {
            "norm" => Expr::Norm(first),
            "eval" => Expr::Eval(first),
            "W" => Expr::W(first),
            "Q" => Expr::Q(first),
            "T" => {
                self.expect(',')?;
                Expr::T(first, self.integer()?)
            }
            "inv" => Expr::Inv {
                arg: first,
                ell: self.optional_ell()?,
            },
            "sqrt" => Expr::Sqrt {
                arg: first,
                ell: self.optional_ell()?,
            },
            "div" => {
                self.expect(',')?;
                let rhs = Box::new(self.expr()?);
                Expr::Div {
                    lhs: first,
                    rhs,
                    ell: self.optional_ell()?,
                }
            }
            "cmp" => {
                self.expect(',')?;
                let rhs = Box::new(self.expr()?);
                let family = if self.eat(',') {
                    let at = self.pos;
                    match self.named("fam")?.as_str() {
                        "r" => Family::Real,
                        "i" => Family::Imaginary,
                        other => {
                            return Err(Error::Parse {
                                position: at,
                                message: format!("fam must be r or i, got '{other}'"),
                            })
                        }
                    }
                } else {
                    Family::Real
                };
                Expr::Cmp {
                    lhs: first,
                    rhs,
                    family,
                }
            }
            _ => unreachable!("checked against the known names"),
        };
        self.expect(')')?;
        Ok(e)
    }
}
