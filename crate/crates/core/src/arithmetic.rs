//! Arithmetic directly on number states.
//!
//! Addition is the pointwise sum of occupation maps and multiplication the
//! convolution of occupations under the unit table of the four kinds; both
//! return (generally nonstandard) states. Inversion builds an approximate
//! reciprocal string one exponent at a time, comparing only normalized
//! states, and division multiplies by such an inverse.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::reduction::normalize;
use crate::state::{
    cmp_parts, Family, NumberState, Part, Radix, Sign, SiteOccupancy, StandardForm, Statistics,
    SystemKind,
};

/// The product of two system kinds: the unit values `1, -1, i, -i` multiply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KindProduct;

impl KindProduct {
    pub fn apply(a: SystemKind, b: SystemKind) -> SystemKind {
        use Family::*;
        let (family, extra) = match (a.family, b.family) {
            (Real, Real) => (Real, Sign::Plus),
            (Real, Imaginary) | (Imaginary, Real) => (Imaginary, Sign::Plus),
            (Imaginary, Imaginary) => (Real, Sign::Minus),
        };
        SystemKind::new(family, a.sign * b.sign * extra)
    }

    /// The full 4x4 table, indexed by [`SystemKind::index`].
    pub fn table() -> [[SystemKind; 4]; 4] {
        SystemKind::ALL.map(|a| SystemKind::ALL.map(|b| KindProduct::apply(a, b)))
    }
}

/// Target accuracy `ell`: an inverse is good when its product with the input
/// lies in `[1 - k^-ell, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Accuracy(u32);

impl Accuracy {
    pub fn new(ell: u32) -> Result<Accuracy> {
        if ell == 0 {
            return Err(Error::InvalidArgument("ell must be at least 1".into()));
        }
        Ok(Accuracy(ell))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn padded(self, extra: u32) -> Accuracy {
        Accuracy(self.0.saturating_add(extra))
    }
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy(16)
    }
}

fn same_statistics(x: &NumberState, y: &NumberState, op: &str) -> Result<Statistics> {
    if x.statistics() != y.statistics() {
        return Err(Error::InvalidArgument(format!(
            "{op} of a {} state and a {} state",
            x.statistics(),
            y.statistics()
        )));
    }
    Ok(x.statistics())
}

/// Sign of placing the operators of `y` after those of `x` and sorting the
/// combined product. `y`'s operators take the higher `h` values of each block,
/// so within a block they stand in front of `x`'s.
fn interleave_sign(x: &NumberState, y: &NumberState) -> Sign {
    let mut inversions: u128 = 0;
    for family in Family::BOTH {
        // x operators of this family strictly above each site
        let mut above: u128 = 0;
        let mut x_iter = x.sites().iter().rev().peekable();
        for (&j, occ) in y.sites().iter().rev() {
            while let Some((&xj, xocc)) = x_iter.peek() {
                if xj <= j {
                    break;
                }
                above += u128::from(xocc.family_total(family));
                x_iter.next();
            }
            let (xp, xm) = x.sites().get(&j).map_or((0, 0), |o| o.family(family));
            let (yp, ym) = occ.family(family);
            inversions += u128::from(yp) * (above + u128::from(xp + xm));
            inversions += u128::from(ym) * (above + u128::from(xm));
        }
    }
    Sign::of_count(inversions)
}

/// Pointwise sum of the occupations. Fermion phase: both input phases times
/// the sign of merging the two operator products into canonical order.
pub fn add(x: &NumberState, y: &NumberState) -> Result<NumberState> {
    let statistics = same_statistics(x, y, "addition")?;
    let mut sites = x.sites().clone();
    for (&j, occ) in y.sites() {
        let slot = sites.entry(j).or_default();
        for kind in SystemKind::ALL {
            *slot.count_mut(kind) += occ.count(kind);
        }
    }
    let phase = match statistics {
        Statistics::Boson => Sign::Plus,
        Statistics::Fermion => x.phase() * y.phase() * interleave_sign(x, y),
    };
    Ok(NumberState::from_sites(sites, statistics, phase))
}

/// Every system's sign flipped.
pub fn negate(x: &NumberState) -> NumberState {
    x.negated()
}

pub fn sub(x: &NumberState, y: &NumberState) -> Result<NumberState> {
    add(x, &negate(y))
}

/// Complex conjugate: the imaginary systems change sign.
pub fn conjugate(x: &NumberState) -> NumberState {
    x.conjugated()
}

/// Convolution: counts `c1` of `(a, j1)` and `c2` of `(b, j2)` contribute
/// `c1 c2` systems of kind `a*b` at site `j1 + j2`. Fermion phase is the
/// product of the input phases.
pub fn mul(x: &NumberState, y: &NumberState) -> Result<NumberState> {
    let statistics = same_statistics(x, y, "multiplication")?;
    let mut sites: BTreeMap<i64, SiteOccupancy> = BTreeMap::new();
    for (a, j1, c1) in x.entries() {
        for (b, j2, c2) in y.entries() {
            let slot = sites.entry(j1 + j2).or_default();
            let c = slot.count_mut(KindProduct::apply(a, b));
            *c = c1
                .checked_mul(c2)
                .and_then(|p| c.checked_add(p))
                .ok_or_else(|| Error::InvalidArgument("occupation count overflow".into()))?;
        }
    }
    Ok(NumberState::from_sites(
        sites,
        statistics,
        x.phase() * y.phase(),
    ))
}

fn boson(form: &StandardForm) -> NumberState {
    form.to_state(Statistics::Boson, Sign::Plus)
}

fn mul_forms(a: &StandardForm, b: &StandardForm, radix: Radix) -> StandardForm {
    let product = mul(&boson(a), &boson(b)).expect("boson operands");
    normalize(&product, radix).0
}

fn positive_real_part<'a>(x: &'a StandardForm, what: &str) -> Result<&'a Part> {
    match (&x.real, &x.imag) {
        (Some(p), None) if p.sign() == Sign::Plus => Ok(p),
        (None, None) => Err(Error::Domain(format!("{what} of zero"))),
        _ => Err(Error::Domain(format!(
            "{what} needs a positive real argument, got {x}"
        ))),
    }
}

/// True when `p` lies in `[1 - k^-ell, 1)`: a positive real standard form
/// whose digits at `-1..-ell` are all `k - 1` and which has nothing at or
/// above site 0.
pub fn is_ell_accurate_unit(p: &StandardForm, ell: Accuracy, radix: Radix) -> bool {
    let Ok(part) = positive_real_part(p, "check") else {
        return false;
    };
    let top = radix.max_digit();
    part.leading_exponent() < 0
        && (1..=i64::from(ell.get())).all(|m| part.digits().get(&-m) == Some(&top))
}

/// One candidate exponent tried by the inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InverseCandidate {
    pub h: i64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseTrace {
    pub inverse: StandardForm,
    /// Normalized product of the input and the inverse.
    pub product: StandardForm,
    pub candidates: Vec<InverseCandidate>,
    /// Normalized running product after each accepted candidate.
    pub partial_products: Vec<StandardForm>,
}

/// An `ell`-accurate inverse of a positive real standard form.
pub fn invert_pos_real(x: &StandardForm, ell: Accuracy, radix: Radix) -> Result<StandardForm> {
    invert_pos_real_traced(x, ell, radix).map(|t| t.inverse)
}

/// Builds the inverse string `t = k^h1 + k^h2 + ...` greedily.
///
/// With `k1` the leading exponent of `x` and `m` the first fractional
/// position not yet filled with `k - 1` in the running product `P`, the next
/// candidate is `h = -m - k1` (never above the previous one). If `P + x k^h`
/// would reach 1 the candidate is lowered one site at a time. Lowering always
/// stops by `h = lowest(P) - k1 - 1`, where `x k^h < k^lowest(P) <= 1 - P`.
pub fn invert_pos_real_traced(
    x: &StandardForm,
    ell: Accuracy,
    radix: Radix,
) -> Result<InverseTrace> {
    let part = positive_real_part(x, "inverse")?;
    let k1 = part.leading_exponent();
    let top = radix.max_digit();
    let x_state = boson(x);
    let one = StandardForm::one();

    let mut product = StandardForm::zero();
    let mut digits: BTreeMap<i64, u64> = BTreeMap::new();
    let mut candidates = Vec::new();
    let mut partial_products = Vec::new();
    let mut previous: Option<i64> = None;

    while !is_ell_accurate_unit(&product, ell, radix) {
        let filled = |m: i64| {
            product
                .real
                .as_ref()
                .and_then(|p| p.digits().get(&-m))
                .is_some_and(|&d| d == top)
        };
        let m = (1..).find(|&m| !filled(m)).expect("unbounded search");
        let mut h = -m - k1;
        if let Some(prev) = previous {
            h = h.min(prev);
        }
        while digits.get(&h) == Some(&top) {
            h -= 1;
        }
        // an empty product leaves a gap of exactly 1 = k^0
        let floor = product.real.as_ref().map_or(0, Part::trailing_exponent) - k1 - 1;

        loop {
            let shifted = x_state.translated(h);
            let trial_state = crate::arithmetic::add(&boson(&product), &shifted)?;
            let trial = normalize(&trial_state, radix).0;
            let reaches_one = cmp_parts(trial.real.as_ref(), one.real.as_ref()) != Ordering::Less;
            candidates.push(InverseCandidate {
                h,
                accepted: !reaches_one,
            });
            if !reaches_one {
                product = trial;
                *digits.entry(h).or_default() += 1;
                partial_products.push(product.clone());
                previous = Some(h);
                break;
            }
            debug_assert!(h > floor, "lowering past the guaranteed-safe exponent");
            h -= 1;
            while digits.get(&h) == Some(&top) {
                h -= 1;
            }
        }
    }

    let inverse = StandardForm::new(Part::new(Sign::Plus, digits), None);
    Ok(InverseTrace {
        inverse,
        product,
        candidates,
        partial_products,
    })
}

/// Digit-recurrence square root truncated at site `-ell`: the result `r`
/// satisfies `r^2 <= x < (r + k^-ell)^2`.
pub fn sqrt_ell(x: &StandardForm, ell: Accuracy, radix: Radix) -> Result<StandardForm> {
    let part = match (&x.real, &x.imag) {
        (None, None) => return Ok(StandardForm::zero()),
        (Some(p), None) if p.sign() == Sign::Plus => p,
        _ => {
            return Err(Error::Domain(format!(
                "square root of {x}, which is not a nonnegative real"
            )))
        }
    };
    let start = part.leading_exponent().div_euclid(2) + 1;
    let mut digits: BTreeMap<i64, u64> = BTreeMap::new();
    for e in (-i64::from(ell.get())..=start).rev() {
        for d in (1..=radix.max_digit()).rev() {
            let mut trial_digits = digits.clone();
            trial_digits.insert(e, d);
            let trial = StandardForm::new(Part::new(Sign::Plus, trial_digits.clone()), None);
            let square = mul_forms(&trial, &trial, radix);
            if cmp_parts(square.real.as_ref(), x.real.as_ref()) != Ordering::Greater {
                digits = trial_digits;
                break;
            }
        }
    }
    Ok(StandardForm::new(Part::new(Sign::Plus, digits), None))
}

/// Extra accuracy used for the internal real inversion so that the composed
/// result meets the requested bound.
fn padding(divisor: &StandardForm) -> u32 {
    3 + divisor
        .leading_exponent()
        .unwrap_or(0)
        .clamp(0, i64::from(u32::MAX / 2)) as u32
}

/// `(u - iv) / (u^2 + v^2)` with the real reciprocal taken at padded
/// accuracy. The result is a normalized boson state whose relative error is
/// below `k^-(ell + 3)`.
pub fn invert_complex(x: &StandardForm, ell: Accuracy, radix: Radix) -> Result<NumberState> {
    if x.is_zero() {
        return Err(Error::Domain("inverse of zero".into()));
    }
    let ell = ell.padded(padding(x));
    let norm = mul_forms(x, &x.conjugate(), radix);
    let reciprocal = invert_pos_real(&norm, ell, radix)?;
    let product = mul(&boson(&x.conjugate()), &boson(&reciprocal))?;
    Ok(boson(&normalize(&product, radix).0))
}

/// The variant `(u - iv) / (u^2 + v^2)^(1/2)`, which divides by the modulus
/// instead of its square and so is not a reciprocal. Kept for comparison only.
pub fn invert_complex_modulus_form(
    x: &StandardForm,
    ell: Accuracy,
    radix: Radix,
) -> Result<NumberState> {
    if x.is_zero() {
        return Err(Error::Domain("inverse of zero".into()));
    }
    let ell = ell.padded(padding(x));
    let norm = mul_forms(x, &x.conjugate(), radix);
    let modulus = sqrt_ell(&norm, ell, radix)?;
    let reciprocal = invert_pos_real(&modulus, ell, radix)?;
    let product = mul(&boson(&x.conjugate()), &boson(&reciprocal))?;
    Ok(boson(&normalize(&product, radix).0))
}

/// `x * y^-1` with `y` normalized first. The relative error against the
/// exact quotient is at most `k^-(ell + 3)`. The result is normalized and
/// carries `x`'s statistics; its phase is `x`'s phase times the phases picked
/// up normalizing `y` and the product.
pub fn div_ell(
    x: &NumberState,
    y: &NumberState,
    ell: Accuracy,
    radix: Radix,
) -> Result<NumberState> {
    let statistics = same_statistics(x, y, "division")?;
    let (divisor, divisor_phase) = normalize(y, radix);
    if divisor.is_zero() {
        return Err(Error::Domain(format!("division of {x} by zero")));
    }
    let inverse = invert_complex(&divisor, ell, radix)?
        .with_statistics(statistics)
        .with_phase(divisor_phase * y.phase());
    let (quotient, phase) = normalize(&mul(x, &inverse)?, radix);
    Ok(quotient.to_state(statistics, phase))
}
