//! Test-side ground truth, computed straight from occupation counts with
//! general rationals. Shares no code with the library's valuation.

#![allow(dead_code)]

use fockrat::{Family, NumberState, Radix, StandardForm};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Value {
    pub re: BigRational,
    pub im: BigRational,
}

impl Value {
    pub fn zero() -> Value {
        Value {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn add(&self, o: &Value) -> Value {
        Value {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn mul(&self, o: &Value) -> Value {
        Value {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn neg(&self) -> Value {
        Value {
            re: -&self.re,
            im: -&self.im,
        }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn div(&self, o: &Value) -> Value {
        let d = o.norm_sqr();
        Value {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }

    pub fn part(&self, family: Family) -> &BigRational {
        match family {
            Family::Real => &self.re,
            Family::Imaginary => &self.im,
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

pub fn power(radix: Radix, j: i64) -> BigRational {
    let p = num_traits::pow(BigInt::from(radix.get()), j.unsigned_abs() as usize);
    if j < 0 {
        BigRational::new(BigInt::one(), p)
    } else {
        BigRational::from_integer(p)
    }
}

/// `sum_j k^j (n_r - m_r) + i k^j (n_i - m_i)`.
pub fn value(state: &NumberState, radix: Radix) -> Value {
    let mut v = Value::zero();
    for (&j, occ) in state.sites() {
        let w = power(radix, j);
        let re = BigInt::from(occ.n_r) - BigInt::from(occ.m_r);
        let im = BigInt::from(occ.n_i) - BigInt::from(occ.m_i);
        v.re += &w * BigRational::from_integer(re);
        v.im += &w * BigRational::from_integer(im);
    }
    v
}

pub fn form_value(form: &StandardForm, radix: Radix) -> Value {
    let mut v = Value::zero();
    for (family, slot) in [(Family::Real, &mut v.re), (Family::Imaginary, &mut v.im)] {
        if let Some(part) = form.part(family) {
            let s = BigRational::from_integer(BigInt::from(part.sign().as_i32()));
            for (&j, &d) in part.digits() {
                *slot += &s * power(radix, j) * BigRational::from_integer(BigInt::from(d));
            }
        }
    }
    v
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Applies `steps` rewrite rules chosen uniformly among those applicable.
pub fn random_rewrites(
    state: &NumberState,
    radix: Radix,
    rng: &mut impl rand::Rng,
    steps: usize,
) -> NumberState {
    let mut current = state.clone();
    for _ in 0..steps {
        let rules = fockrat::reduction::applicable_rewrites(&current, radix);
        if rules.is_empty() {
            break;
        }
        let rule = rules[rng.gen_range(0..rules.len())];
        current = fockrat::reduction::apply_rewrite(&current, rule, radix)
            .expect("listed rules apply")
            .0;
    }
    current
}
