//! Exact values of states and an independent arithmetic oracle over them.
//!
//! Every representable value is k-adic, so [`ExactRational`] stores
//! `numerator * k^exponent` with big-integer numerators. Only division leaves
//! that ring, which is what [`ComplexFraction`] is for.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::reduction::normalize;
use crate::state::{cmp_parts, Family, NumberState, Radix, Sign, StandardForm, SystemKind};

/// `numerator * k^exponent`, kept canonical: the numerator is not divisible
/// by `k` unless it is zero, and zero has exponent 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactRational {
    numerator: BigInt,
    exponent: i64,
    radix: Radix,
}

fn pow_k(radix: Radix, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(radix.get()), e as usize)
}

impl ExactRational {
    pub fn new(numerator: BigInt, exponent: i64, radix: Radix) -> ExactRational {
        if numerator.is_zero() {
            return ExactRational::zero(radix);
        }
        let k = BigInt::from(radix.get());
        let (mut numerator, mut exponent) = (numerator, exponent);
        loop {
            let (q, r) = numerator.div_rem(&k);
            if !r.is_zero() {
                break;
            }
            numerator = q;
            exponent += 1;
        }
        ExactRational {
            numerator,
            exponent,
            radix,
        }
    }

    pub fn zero(radix: Radix) -> ExactRational {
        ExactRational {
            numerator: BigInt::zero(),
            exponent: 0,
            radix,
        }
    }

    pub fn from_integer(n: impl Into<BigInt>, radix: Radix) -> ExactRational {
        ExactRational::new(n.into(), 0, radix)
    }

    /// `sign * k^j`.
    pub fn unit(sign: Sign, j: i64, radix: Radix) -> ExactRational {
        ExactRational {
            numerator: BigInt::from(sign.as_i32()),
            exponent: j,
            radix,
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn signum(&self) -> Sign {
        if self.numerator.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn abs(&self) -> ExactRational {
        ExactRational {
            numerator: self.numerator.abs(),
            ..self.clone()
        }
    }

    fn check_radix(&self, other: &ExactRational) {
        assert_eq!(self.radix, other.radix, "mixing values of different radix");
    }

    /// Both numerators scaled to the smaller exponent.
    fn aligned(&self, other: &ExactRational) -> (BigInt, BigInt, i64) {
        self.check_radix(other);
        let e = self.exponent.min(other.exponent);
        let a = &self.numerator * pow_k(self.radix, (self.exponent - e) as u64);
        let b = &other.numerator * pow_k(self.radix, (other.exponent - e) as u64);
        (a, b, e)
    }

    pub fn to_fraction(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.numerator * pow_k(self.radix, self.exponent as u64))
        } else {
            BigRational::new(
                self.numerator.clone(),
                pow_k(self.radix, self.exponent.unsigned_abs()),
            )
        }
    }

    pub fn to_f64(&self) -> f64 {
        let k = f64::from(self.radix.get());
        let n = self.numerator.to_f64().unwrap_or(f64::NAN);
        n * k.powf(self.exponent as f64)
    }

    /// Exact positional string in base `k`, e.g. `-11.101` (digits beyond 9
    /// use letters). Never uses exponent notation.
    pub fn to_radix_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let k = self.radix.get();
        let mut digits = self.numerator.abs().to_str_radix(k);
        let mut out = String::new();
        if self.numerator.is_negative() {
            out.push('-');
        }
        if self.exponent >= 0 {
            digits.extend(std::iter::repeat_n('0', self.exponent as usize));
            out.push_str(&digits);
        } else {
            let frac = self.exponent.unsigned_abs() as usize;
            if digits.len() <= frac {
                let pad = "0".repeat(frac - digits.len());
                digits = format!("{pad}{digits}");
                out.push('0');
            } else {
                out.push_str(&digits[..digits.len() - frac]);
                digits = digits[digits.len() - frac..].to_string();
            }
            out.push('.');
            out.push_str(&digits);
        }
        out
    }
}

impl Add for &ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: &ExactRational) -> ExactRational {
        let (a, b, e) = self.aligned(rhs);
        ExactRational::new(a + b, e, self.radix)
    }
}

impl Sub for &ExactRational {
    type Output = ExactRational;
    fn sub(self, rhs: &ExactRational) -> ExactRational {
        let (a, b, e) = self.aligned(rhs);
        ExactRational::new(a - b, e, self.radix)
    }
}

impl Mul for &ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: &ExactRational) -> ExactRational {
        self.check_radix(rhs);
        ExactRational::new(
            &self.numerator * &rhs.numerator,
            self.exponent + rhs.exponent,
            self.radix,
        )
    }
}

impl Neg for &ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational {
            numerator: -&self.numerator,
            ..self.clone()
        }
    }
}

impl PartialOrd for ExactRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl fmt::Display for ExactRational {
    /// Lowest-terms fraction, `p/q` or just `p`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fraction(f, &self.to_fraction())
    }
}

fn write_fraction(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

/// `re + i im` with k-adic parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: ExactRational,
    pub im: ExactRational,
}

impl ExactComplex {
    pub fn new(re: ExactRational, im: ExactRational) -> ExactComplex {
        assert_eq!(re.radix, im.radix, "mixing values of different radix");
        ExactComplex { re, im }
    }

    pub fn zero(radix: Radix) -> ExactComplex {
        ExactComplex {
            re: ExactRational::zero(radix),
            im: ExactRational::zero(radix),
        }
    }

    pub fn radix(&self) -> Radix {
        self.re.radix
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn part(&self, family: Family) -> &ExactRational {
        match family {
            Family::Real => &self.re,
            Family::Imaginary => &self.im,
        }
    }

    pub fn conj(&self) -> ExactComplex {
        ExactComplex {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// `(a, b, d)` with `self = (a + ib) / d`, `d > 0` as small as possible.
    pub fn over_common_denominator(&self) -> (BigInt, BigInt, BigInt) {
        let (re, im) = (self.re.to_fraction(), self.im.to_fraction());
        let d = re.denom().lcm(im.denom());
        let scale = |q: &BigRational| q.numer() * (&d / q.denom());
        (scale(&re), scale(&im), d)
    }

    pub fn to_fraction(&self) -> ComplexFraction {
        ComplexFraction {
            re: self.re.to_fraction(),
            im: self.im.to_fraction(),
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Positional form such as `11.111111 - i1000`.
    pub fn to_radix_string(&self) -> String {
        join_parts(
            (!self.re.is_zero()).then(|| self.re.to_radix_string()),
            (!self.im.is_zero()).then(|| {
                let s = self.im.abs().to_radix_string();
                (self.im.signum(), format!("i{s}"))
            }),
        )
    }
}

fn join_parts(re: Option<String>, im: Option<(Sign, String)>) -> String {
    match (re, im) {
        (None, None) => "0".to_string(),
        (Some(r), None) => r,
        (None, Some((Sign::Plus, i))) => i,
        (None, Some((Sign::Minus, i))) => format!("-{i}"),
        (Some(r), Some((s, i))) => format!("{r} {} {i}", s.symbol()),
    }
}

impl Add for &ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: &ExactComplex) -> ExactComplex {
        ExactComplex {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Neg for &ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        ExactComplex {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

fn fmt_complex(f: &mut fmt::Formatter<'_>, re: &BigRational, im: &BigRational) -> fmt::Result {
    if im.is_zero() {
        return write_fraction(f, re);
    }
    if !re.is_zero() {
        write_fraction(f, re)?;
        write!(f, " {} ", if im.is_negative() { '-' } else { '+' })?;
        write_fraction(f, &im.abs())?;
    } else {
        write_fraction(f, im)?;
    }
    write!(f, "i")
}

impl fmt::Display for ExactComplex {
    /// Lowest terms, e.g. `255/64 - 8i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_complex(f, &self.re.to_fraction(), &self.im.to_fraction())
    }
}

/// A complex value with general rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComplexFraction {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexFraction {
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn sub(&self, other: &ComplexFraction) -> ComplexFraction {
        ComplexFraction {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Display for ComplexFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_complex(f, &self.re, &self.im)
    }
}

/// `sign * k^j` in the slot of the kind's family.
pub fn unit_value(kind: SystemKind, j: i64, radix: Radix) -> ExactComplex {
    let unit = ExactRational::unit(kind.sign, j, radix);
    let zero = ExactRational::zero(radix);
    match kind.family {
        Family::Real => ExactComplex { re: unit, im: zero },
        Family::Imaginary => ExactComplex { re: zero, im: unit },
    }
}

/// The value `sum_j k^j (n_r - m_r) + i k^j (n_i - m_i)`. Phase is ignored.
pub fn eval_n(state: &NumberState, radix: Radix) -> ExactComplex {
    let Some(low) = state.lowest_site() else {
        return ExactComplex::zero(radix);
    };
    let k = BigInt::from(radix.get());
    let mut parts = [BigInt::zero(), BigInt::zero()];
    // Horner from the top site down to `low`
    let mut prev = state.highest_site().expect("nonempty");
    for (&j, occ) in state.sites().iter().rev() {
        for (acc, family) in parts.iter_mut().zip(Family::BOTH) {
            if prev > j {
                *acc *= num_traits::pow(k.clone(), (prev - j) as usize);
            }
            let (p, m) = occ.family(family);
            *acc += BigInt::from(p) - BigInt::from(m);
        }
        prev = j;
    }
    let [re, im] = parts;
    ExactComplex {
        re: ExactRational::new(re, low, radix),
        im: ExactRational::new(im, low, radix),
    }
}

/// Value of a standard form.
pub fn eval_form(form: &StandardForm, radix: Radix) -> ExactComplex {
    eval_n(
        &form.to_state(crate::state::Statistics::Boson, Sign::Plus),
        radix,
    )
}

/// Orders the `family` components of two states by value, structurally on
/// their standard forms.
pub fn cmp_component(a: &NumberState, b: &NumberState, family: Family, radix: Radix) -> Ordering {
    let (fa, _) = normalize(a, radix);
    let (fb, _) = normalize(b, radix);
    cmp_parts(fa.part(family), fb.part(family))
}

pub fn oracle_add(x: &ExactComplex, y: &ExactComplex) -> ExactComplex {
    x + y
}

pub fn oracle_sub(x: &ExactComplex, y: &ExactComplex) -> ExactComplex {
    x - y
}

pub fn oracle_mul(x: &ExactComplex, y: &ExactComplex) -> ExactComplex {
    x * y
}

/// Exact `x / y` as a general complex fraction.
pub fn oracle_div(x: &ExactComplex, y: &ExactComplex) -> Result<ComplexFraction> {
    if y.is_zero() {
        return Err(Error::Domain("division by zero".into()));
    }
    let (x, y) = (x.to_fraction(), y.to_fraction());
    let d = y.norm_sqr();
    Ok(ComplexFraction {
        re: (&x.re * &y.re + &x.im * &y.im) / &d,
        im: (&x.im * &y.re - &x.re * &y.im) / &d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Statistics, SystemKind as K};

    const R2: Radix = Radix::BINARY;

    fn st(entries: &[(K, i64, u64)]) -> NumberState {
        NumberState::from_systems(entries, Statistics::Boson).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn canonical_representation() {
        let x = ExactRational::new(BigInt::from(12), -3, R2);
        assert_eq!(x.numerator(), &BigInt::from(3));
        assert_eq!(x.exponent(), -1);
        let z = ExactRational::new(BigInt::zero(), 7, R2);
        assert_eq!((z.numerator().clone(), z.exponent()), (BigInt::zero(), 0));
        assert_eq!(x.to_fraction(), q(3, 2));
    }

    #[test]
    fn eval_examples() {
        let v = eval_n(
            &st(&[
                (K::REAL_PLUS, 3, 1),
                (K::REAL_MINUS, -2, 1),
                (K::IMAG_PLUS, 1, 1),
                (K::IMAG_MINUS, 0, 1),
            ]),
            R2,
        );
        assert_eq!(
            v.to_fraction(),
            ComplexFraction {
                re: q(31, 4),
                im: q(1, 1)
            }
        );
        assert!(eval_n(&NumberState::vacuum(Statistics::Boson), R2).is_zero());
        let v = eval_n(&st(&[(K::REAL_PLUS, 5, 2)]), R2);
        assert_eq!(v.re, ExactRational::unit(Sign::Plus, 6, R2));
    }

    #[test]
    fn worked_value_text() {
        let s = st(&[
            (K::REAL_PLUS, 3, 1),
            (K::IMAG_PLUS, 3, 1),
            (K::REAL_MINUS, 2, 1),
            (K::IMAG_MINUS, 4, 1),
            (K::REAL_MINUS, -6, 1),
        ]);
        let v = eval_n(&s, R2);
        assert_eq!(v.to_string(), "255/64 - 8i");
        assert_eq!(v.to_radix_string(), "11.111111 - i1000");
        let (a, b, d) = v.over_common_denominator();
        assert_eq!(
            (a, b, d),
            (BigInt::from(255), BigInt::from(-512), BigInt::from(64))
        );
        let (a, b, d) = ExactComplex::new(
            ExactRational::new(BigInt::from(1), -2, Radix::new(6).unwrap()),
            ExactRational::new(BigInt::from(1), -1, Radix::new(6).unwrap()),
        )
        .over_common_denominator();
        assert_eq!(
            (a, b, d),
            (BigInt::from(1), BigInt::from(6), BigInt::from(36))
        );
    }

    #[test]
    fn radix_strings() {
        let r3 = Radix::new(3).unwrap();
        assert_eq!(
            ExactRational::new(BigInt::from(7), 0, r3).to_radix_string(),
            "21"
        );
        assert_eq!(
            ExactRational::new(BigInt::from(-1), -3, R2).to_radix_string(),
            "-0.001"
        );
        assert_eq!(
            ExactRational::new(BigInt::from(37), -2, R2).to_radix_string(),
            "1001.01"
        );
        let i = unit_value(K::IMAG_MINUS, 0, R2);
        assert_eq!(i.to_radix_string(), "-i1");
        assert_eq!(i.to_string(), "-1i");
    }

    #[test]
    fn unit_values() {
        assert_eq!(unit_value(K::REAL_PLUS, 4, R2).to_fraction().re, q(16, 1));
        assert_eq!(unit_value(K::IMAG_MINUS, 2, R2).to_fraction().im, q(-4, 1));
        assert_eq!(unit_value(K::REAL_MINUS, 0, R2).to_fraction().re, q(-1, 1));
    }

    #[test]
    fn component_order() {
        let a = st(&[(K::REAL_PLUS, 0, 1)]);
        let b = st(&[(K::REAL_PLUS, 1, 1)]);
        assert_eq!(cmp_component(&a, &b, Family::Real, R2), Ordering::Less);
        let a = st(&[(K::REAL_MINUS, 3, 1)]);
        let b = st(&[(K::REAL_MINUS, 5, 1)]);
        assert_eq!(cmp_component(&a, &b, Family::Real, R2), Ordering::Greater);
        let a = st(&[(K::REAL_PLUS, 0, 2)]);
        let b = st(&[(K::REAL_PLUS, 1, 1)]);
        assert_eq!(cmp_component(&a, &b, Family::Real, R2), Ordering::Equal);
    }

    #[test]
    fn oracle_examples() {
        let one_plus_i = ExactComplex::new(
            ExactRational::from_integer(1, R2),
            ExactRational::from_integer(1, R2),
        );
        assert_eq!(
            oracle_mul(&one_plus_i, &one_plus_i.conj()).to_fraction(),
            ComplexFraction {
                re: q(2, 1),
                im: q(0, 1)
            }
        );

        let a = eval_n(&st(&[(K::REAL_PLUS, 3, 1), (K::REAL_MINUS, 2, 1)]), R2);
        let b = eval_n(&st(&[(K::REAL_MINUS, -6, 1)]), R2);
        assert_eq!(oracle_add(&a, &b).to_fraction().re, q(255, 64));

        let one = eval_n(&st(&[(K::REAL_PLUS, 0, 1)]), R2);
        let y = eval_n(
            &st(&[
                (K::REAL_PLUS, -4, 1),
                (K::REAL_PLUS, -6, 1),
                (K::REAL_PLUS, -9, 1),
            ]),
            R2,
        );
        assert_eq!(oracle_div(&one, &y).unwrap().re, q(4096, 328));
        assert!(matches!(
            oracle_div(&one, &ExactComplex::zero(R2)),
            Err(Error::Domain(_))
        ));
        assert_eq!(oracle_sub(&one, &one), ExactComplex::zero(R2));
    }
}
