//! Superpositions and mixtures of number states.
//!
//! Amplitudes are floating point; all exactness stays in the states. Adding
//! or multiplying two superpositions entangles the inputs with the result,
//! and tracing the inputs out leaves a [`Mixture`] over result states.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::arithmetic::{self, is_ell_accurate_unit, Accuracy};
use crate::error::{Error, Result};
use crate::reduction::normalize;
use crate::state::{NumberState, Part, Radix, Sign, StandardForm, Statistics};
use crate::valuation::eval_n;

/// Tolerance on `sum |d|^2 = 1` and `sum p = 1`.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// `sum_s d_s |s>` over structurally distinct states.
#[derive(Clone, Debug, PartialEq)]
pub struct Superposition {
    terms: Vec<(Complex64, NumberState)>,
}

fn merge<W: Copy + std::ops::AddAssign>(
    terms: impl IntoIterator<Item = (W, NumberState)>,
) -> Vec<(W, NumberState)> {
    let mut merged: Vec<(W, NumberState)> = Vec::new();
    for (w, state) in terms {
        match merged.iter_mut().find(|(_, s)| *s == state) {
            Some((acc, _)) => *acc += w,
            None => merged.push((w, state)),
        }
    }
    merged
}

impl Superposition {
    /// Merges equal states by adding amplitudes, then checks normalization.
    pub fn new(terms: impl IntoIterator<Item = (Complex64, NumberState)>) -> Result<Superposition> {
        let terms = merge(terms);
        let statistics = terms.first().map(|(_, s)| s.statistics());
        if terms
            .iter()
            .any(|(_, s)| Some(s.statistics()) != statistics)
        {
            return Err(Error::InvalidArgument(
                "superposed states must share their statistics".into(),
            ));
        }
        let norm: f64 = terms.iter().map(|(d, _)| d.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "squared amplitudes sum to {norm}, not 1"
            )));
        }
        Ok(Superposition { terms })
    }

    /// Like [`Superposition::new`] but rescales the amplitudes first.
    pub fn normalized(
        terms: impl IntoIterator<Item = (Complex64, NumberState)>,
    ) -> Result<Superposition> {
        let terms = merge(terms);
        let norm: f64 = terms.iter().map(|(d, _)| d.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("all amplitudes are zero".into()));
        }
        Superposition::new(terms.into_iter().map(|(d, s)| (d / norm, s)))
    }

    pub fn basis(state: NumberState) -> Superposition {
        Superposition {
            terms: vec![(Complex64::new(1.0, 0.0), state)],
        }
    }

    /// Equal real amplitudes over the given states.
    pub fn uniform(states: impl IntoIterator<Item = NumberState>) -> Result<Superposition> {
        Superposition::normalized(states.into_iter().map(|s| (Complex64::new(1.0, 0.0), s)))
    }

    pub fn terms(&self) -> &[(Complex64, NumberState)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every branch holds exactly one system, as in
    /// `(|1> + |0.1>)/sqrt 2`: such a state is a plain list of one-system
    /// branches with no register structure to entangle.
    pub fn is_single_system(&self) -> bool {
        self.terms.iter().all(|(_, s)| s.total_count() == 1)
    }

    /// Applies a state map to every branch and re-merges.
    pub fn map_states(&self, f: impl Fn(&NumberState) -> NumberState) -> Superposition {
        Superposition {
            terms: merge(self.terms.iter().map(|(d, s)| (*d, f(s)))),
        }
    }

    /// `sum |d|^2 N(s)`: every basis state is an eigenstate of the valuation.
    pub fn expect_n(&self, radix: Radix) -> Complex64 {
        self.terms
            .iter()
            .map(|(d, s)| d.norm_sqr() * eval_n(s, radix).to_complex64())
            .sum()
    }
}

/// Sign flip of every system.
pub fn apply_w(x: &NumberState) -> NumberState {
    x.negated()
}

/// Real and imaginary systems interchanged.
pub fn apply_q(x: &NumberState) -> NumberState {
    x.families_swapped()
}

/// Translation by `n` sites.
pub fn apply_t(x: &NumberState, n: i64) -> NumberState {
    x.translated(n)
}

pub fn apply_w_sup(psi: &Superposition) -> Superposition {
    psi.map_states(apply_w)
}

pub fn apply_q_sup(psi: &Superposition) -> Superposition {
    psi.map_states(apply_q)
}

pub fn apply_t_sup(psi: &Superposition, n: i64) -> Superposition {
    psi.map_states(|s| apply_t(s, n))
}

/// One branch of an entangled arithmetic result: both inputs stay in their
/// registers next to the output.
#[derive(Clone, Debug, PartialEq)]
pub struct EntangledTerm {
    pub amplitude: Complex64,
    pub in1: NumberState,
    pub in2: NumberState,
    pub out: NumberState,
}

fn entangle(
    psi: &Superposition,
    psi2: &Superposition,
    op: fn(&NumberState, &NumberState) -> Result<NumberState>,
) -> Result<Vec<EntangledTerm>> {
    let mut out = Vec::with_capacity(psi.len() * psi2.len());
    for (d1, s1) in psi.terms() {
        for (d2, s2) in psi2.terms() {
            out.push(EntangledTerm {
                amplitude: d1 * d2,
                in1: s1.clone(),
                in2: s2.clone(),
                out: op(s1, s2)?,
            });
        }
    }
    Ok(out)
}

/// `sum d d' |s, s', s + s'>`.
pub fn add_entangled(psi: &Superposition, psi2: &Superposition) -> Result<Vec<EntangledTerm>> {
    entangle(psi, psi2, arithmetic::add)
}

/// `sum d d' |s, s', s * s'>`.
pub fn mul_entangled(psi: &Superposition, psi2: &Superposition) -> Result<Vec<EntangledTerm>> {
    entangle(psi, psi2, arithmetic::mul)
}

/// Traces out both input registers. Outputs are merged structurally, with
/// the fermion phase dropped since `|d|^2` cannot see it.
pub fn trace_out(entangled: &[EntangledTerm]) -> Mixture {
    Mixture {
        terms: merge(
            entangled
                .iter()
                .map(|t| (t.amplitude.norm_sqr(), t.out.with_phase(Sign::Plus))),
        ),
    }
}

/// A probability distribution over states.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    terms: Vec<(f64, NumberState)>,
}

impl Mixture {
    pub fn new(terms: impl IntoIterator<Item = (f64, NumberState)>) -> Result<Mixture> {
        let terms = merge(terms);
        if terms.iter().any(|(p, _)| *p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = terms.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Mixture { terms })
    }

    pub fn point(state: NumberState) -> Mixture {
        Mixture {
            terms: vec![(1.0, state)],
        }
    }

    /// The measurement distribution of a superposition.
    pub fn from_superposition(psi: &Superposition) -> Mixture {
        Mixture {
            terms: merge(
                psi.terms()
                    .iter()
                    .map(|(d, s)| (d.norm_sqr(), s.with_phase(Sign::Plus))),
            ),
        }
    }

    pub fn terms(&self) -> &[(f64, NumberState)] {
        &self.terms
    }

    /// Terms by descending probability, ties by state text.
    pub fn sorted_terms(&self) -> Vec<(f64, NumberState)> {
        let mut terms = self.terms.clone();
        terms.sort_by(|(pa, sa), (pb, sb)| {
            pb.total_cmp(pa)
                .then_with(|| sa.to_string().cmp(&sb.to_string()))
        });
        terms
    }

    pub fn expect_n(&self, radix: Radix) -> Complex64 {
        self.terms
            .iter()
            .map(|(p, s)| *p * eval_n(s, radix).to_complex64())
            .sum()
    }

    fn combine(
        &self,
        other: &Mixture,
        op: fn(&NumberState, &NumberState) -> Result<NumberState>,
    ) -> Result<Mixture> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (p1, s1) in &self.terms {
            for (p2, s2) in &other.terms {
                terms.push((p1 * p2, op(s1, s2)?.with_phase(Sign::Plus)));
            }
        }
        Ok(Mixture {
            terms: merge(terms),
        })
    }

    /// Distribution of `a + b` for independent draws `a`, `b`.
    pub fn add(&self, other: &Mixture) -> Result<Mixture> {
        self.combine(other, arithmetic::add)
    }

    /// Distribution of `a * b` for independent draws `a`, `b`.
    pub fn mul(&self, other: &Mixture) -> Result<Mixture> {
        self.combine(other, arithmetic::mul)
    }

    /// Probabilities merged over N-equal states.
    pub fn by_standard_form(&self, radix: Radix) -> BTreeMap<StandardForm, f64> {
        let mut out = BTreeMap::new();
        for (p, s) in &self.terms {
            *out.entry(normalize(s, radix).0).or_insert(0.0) += p;
        }
        out
    }
}

/// The two sides of `psi * (psi1 + psi2) = psi * psi1 + psi * psi2` as
/// distributions over standard forms.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributivityCheck {
    pub lhs: BTreeMap<StandardForm, f64>,
    pub rhs: BTreeMap<StandardForm, f64>,
}

impl DistributivityCheck {
    /// Largest probability difference over all outcomes.
    pub fn gap(&self) -> f64 {
        self.lhs
            .keys()
            .chain(self.rhs.keys())
            .map(|k| {
                let a = self.lhs.get(k).copied().unwrap_or(0.0);
                let b = self.rhs.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// On the left `psi` is used once; on the right each product consumes its
/// own copy, so the two draws from `psi` are independent.
pub fn distributivity_gap(
    psi: &Superposition,
    psi1: &Superposition,
    psi2: &Superposition,
    radix: Radix,
) -> Result<DistributivityCheck> {
    let sum = trace_out(&add_entangled(psi1, psi2)?);
    let lhs = Mixture::from_superposition(psi).mul(&sum)?;
    let left = trace_out(&mul_entangled(psi, psi1)?);
    let right = trace_out(&mul_entangled(psi, psi2)?);
    let rhs = left.add(&right)?;
    Ok(DistributivityCheck {
        lhs: lhs.by_standard_form(radix),
        rhs: rhs.by_standard_form(radix),
    })
}

/// Searches every positive real standard form with digits only at sites
/// `low..=high` for one whose product with every branch of `psi` lands in
/// `[1 - k^-ell, 1)`. The window may hold at most 20 sites.
pub fn ell_inverse_witness(
    psi: &Superposition,
    ell: Accuracy,
    low: i64,
    high: i64,
    radix: Radix,
) -> Result<Option<StandardForm>> {
    if high < low || high - low >= 20 {
        return Err(Error::InvalidArgument(format!(
            "search window {low}..={high} must hold 1 to 20 sites"
        )));
    }
    let k = u64::from(radix.get());
    let width = (high - low + 1) as u32;
    let branches: Vec<NumberState> = psi
        .terms()
        .iter()
        .map(|(_, s)| s.with_statistics(Statistics::Boson))
        .collect();
    for code in 1..k.pow(width) {
        let mut digits = BTreeMap::new();
        let mut rest = code;
        for j in low..=high {
            digits.insert(j, rest % k);
            rest /= k;
        }
        let candidate = StandardForm::new(Part::new(Sign::Plus, digits), None);
        let c = candidate.to_state(Statistics::Boson, Sign::Plus);
        let good = branches.iter().all(|b| {
            let product = arithmetic::mul(b, &c).expect("boson operands");
            is_ell_accurate_unit(&normalize(&product, radix).0, ell, radix)
        });
        if good {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Family, SystemKind as K};

    const R2: Radix = Radix::BINARY;

    fn st(entries: &[(K, i64, u64)]) -> NumberState {
        NumberState::from_systems(entries, Statistics::Boson).unwrap()
    }

    fn lit(text: &str) -> NumberState {
        NumberState::from_binary_literal(text, Family::Real, R2).unwrap()
    }

    #[test]
    fn construction_merges_and_checks_norm() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = lit("1");
        let merged = Superposition::new([
            (Complex64::new(h * h, 0.0), s.clone()),
            (Complex64::new(h * h, 0.0), s),
        ]);
        assert_eq!(merged.unwrap().len(), 1);
        assert!(Superposition::new([(Complex64::new(0.5, 0.0), lit("1"))]).is_err());
        assert!(Superposition::uniform([lit("1"), lit("10")]).is_ok());
    }

    #[test]
    fn transforms() {
        let vac = NumberState::vacuum(Statistics::Boson);
        assert_eq!(apply_w(&vac), vac);
        assert_eq!(apply_q(&vac), vac);
        assert_eq!(
            apply_q(&st(&[(K::REAL_PLUS, 3, 1), (K::REAL_MINUS, 0, 1)])),
            st(&[(K::IMAG_PLUS, 3, 1), (K::IMAG_MINUS, 0, 1)])
        );
        let x = st(&[(K::REAL_PLUS, -1, 1)]);
        assert_eq!(apply_t(&x, 2), st(&[(K::REAL_PLUS, 1, 1)]));
    }

    #[test]
    fn entangled_cardinality_and_trace() {
        let one = Superposition::basis(lit("1"));
        let bell = Superposition::uniform([lit("1"), lit("10")]).unwrap();
        let three = Superposition::uniform([lit("1"), lit("10"), lit("11")]).unwrap();
        assert_eq!(add_entangled(&one, &one).unwrap().len(), 1);
        assert_eq!(add_entangled(&bell, &one).unwrap().len(), 2);
        assert_eq!(add_entangled(&bell, &three).unwrap().len(), 6);

        let point = trace_out(&add_entangled(&one, &one).unwrap());
        assert_eq!(point.terms().len(), 1);
        assert!((point.terms()[0].0 - 1.0).abs() < 1e-15);

        let halves = trace_out(&add_entangled(&bell, &one).unwrap());
        assert_eq!(halves.terms().len(), 2);
        assert!(halves.terms().iter().all(|(p, _)| (p - 0.5).abs() < 1e-12));

        // 1 + 10 and 10 + 1 give the same occupation pattern
        let ab = Superposition::uniform([lit("1"), lit("10")]).unwrap();
        let ba = Superposition::uniform([lit("10"), lit("1")]).unwrap();
        let collide = trace_out(&add_entangled(&ab, &ba).unwrap());
        let p11 = collide
            .terms()
            .iter()
            .find(|(_, s)| *s == lit("11"))
            .map(|(p, _)| *p)
            .unwrap();
        assert!((p11 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vacuum_expectation() {
        let m = Mixture::point(NumberState::vacuum(Statistics::Boson));
        assert_eq!(m.expect_n(R2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_system_superposition() {
        let psi = Superposition::uniform([lit("1"), lit("0.1")]).unwrap();
        assert!(psi.is_single_system());
        assert_eq!(psi.len(), 2);
        assert!(!Superposition::basis(lit("11")).is_single_system());
    }

    #[test]
    fn mixture_order() {
        let m = Mixture::new([(0.25, lit("1")), (0.5, lit("10")), (0.25, lit("0.1"))]).unwrap();
        let order: Vec<String> = m
            .sorted_terms()
            .iter()
            .map(|(_, s)| s.to_string())
            .collect();
        assert_eq!(order, ["r+@1", "r+@-1", "r+@0"]);
    }
}
