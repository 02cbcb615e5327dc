//! Exact arithmetic on occupation-number states of complex k-adic rationals.
//!
//! A number is a multiset of systems, each of one of four kinds (`r+`, `r-`,
//! `i+`, `i-`) sitting at an integer site `j` and worth `±k^j` or `±i k^j`.
//! Many states share a value; [`reduction::normalize`] picks the unique
//! standard one. Arithmetic works directly on states and never goes through
//! the numeric value.

pub mod arithmetic;
pub mod error;
pub mod reduction;
pub mod sample;
pub mod state;
pub mod superposition;
pub mod valuation;

pub use arithmetic::Accuracy;
pub use error::{Error, Result};
pub use reduction::{n_equal, normalize, normalize_traced, Rewrite, RewriteStep};
pub use state::{
    cmp_parts, fermion_reorder_sign, Family, FermionOp, NumberState, Part, Radix, Sign,
    SiteOccupancy, StandardForm, Statistics, SystemKind,
};
pub use superposition::{Mixture, Superposition};
pub use valuation::{eval_n, ExactComplex, ExactRational};
