//! Random states for property tests and benchmarks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::state::{
    Family, NumberState, Part, Radix, Sign, SiteOccupancy, StandardForm, Statistics, SystemKind,
};
use crate::superposition::Superposition;

/// Shape of a random state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StateShape {
    pub min_site: i64,
    pub max_site: i64,
    /// Largest count drawn for any (kind, site).
    pub max_count: u64,
    /// Upper bound on the number of (kind, site) entries drawn.
    pub max_entries: usize,
}

impl Default for StateShape {
    fn default() -> Self {
        StateShape {
            min_site: -32,
            max_site: 32,
            max_count: 50,
            max_entries: 24,
        }
    }
}

fn random_sign(rng: &mut impl Rng) -> Sign {
    if rng.gen() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// An arbitrary (usually nonstandard) state.
pub fn random_state(rng: &mut impl Rng, shape: &StateShape, statistics: Statistics) -> NumberState {
    let entries = rng.gen_range(0..=shape.max_entries);
    let systems: Vec<(SystemKind, i64, u64)> = (0..entries)
        .map(|_| {
            let kind = SystemKind::ALL[rng.gen_range(0..4)];
            let j = rng.gen_range(shape.min_site..=shape.max_site);
            (kind, j, rng.gen_range(1..=shape.max_count))
        })
        .collect();
    NumberState::from_systems(&systems, statistics).expect("counts are positive")
}

fn random_part(rng: &mut impl Rng, shape: &StateShape, radix: Radix, sign: Sign) -> Option<Part> {
    let density: f64 = rng.gen_range(0.05..0.6);
    let mut digits = BTreeMap::new();
    for j in shape.min_site..=shape.max_site {
        if rng.gen_bool(density) {
            digits.insert(j, u64::from(rng.gen_range(1..radix.get())));
        }
    }
    Part::new(sign, digits)
}

/// A random standard form; either component may be absent.
pub fn random_standard_form(rng: &mut impl Rng, shape: &StateShape, radix: Radix) -> StandardForm {
    let mut part = || {
        if rng.gen_bool(0.8) {
            let sign = random_sign(rng);
            random_part(rng, shape, radix, sign)
        } else {
            None
        }
    };
    let real = part();
    let imag = part();
    StandardForm::new(real, imag)
}

/// A nonzero positive real standard form.
pub fn random_positive_real(rng: &mut impl Rng, shape: &StateShape, radix: Radix) -> StandardForm {
    loop {
        if let Some(p) = random_part(rng, shape, radix, Sign::Plus) {
            return StandardForm::new(Some(p), None);
        }
    }
}

/// Either a random standard state or a random nonstandard one.
pub fn random_mixed_state(
    rng: &mut impl Rng,
    shape: &StateShape,
    radix: Radix,
    statistics: Statistics,
) -> NumberState {
    if rng.gen() {
        random_standard_form(rng, shape, radix).to_state(statistics, Sign::Plus)
    } else {
        random_state(rng, shape, statistics)
    }
}

/// A state with heavy cancellation, carries and sign changes packed into few
/// sites, the hard case for normalization.
pub fn random_dense_state(
    rng: &mut impl Rng,
    sites: i64,
    max_count: u64,
    statistics: Statistics,
) -> NumberState {
    let map: BTreeMap<i64, SiteOccupancy> = (0..sites)
        .map(|j| {
            let mut occ = SiteOccupancy::default();
            for family in Family::BOTH {
                for sign in [Sign::Plus, Sign::Minus] {
                    *occ.count_mut(SystemKind::new(family, sign)) = rng.gen_range(0..=max_count);
                }
            }
            (j - sites / 2, occ)
        })
        .collect();
    NumberState::from_sites(map, statistics, Sign::Plus)
}

/// A normalized superposition of up to `max_terms` random states.
pub fn random_superposition(
    rng: &mut impl Rng,
    shape: &StateShape,
    max_terms: usize,
    statistics: Statistics,
) -> Superposition {
    let n = rng.gen_range(1..=max_terms);
    let terms: Vec<(Complex64, NumberState)> = (0..n)
        .map(|_| {
            let d = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (d, random_state(rng, shape, statistics))
        })
        .collect();
    Superposition::normalized(terms)
        .unwrap_or_else(|_| Superposition::basis(NumberState::vacuum(statistics)))
}
