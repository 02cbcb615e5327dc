//! Seeded micro-benchmarks with inline correctness checks.

use std::time::{Duration, Instant};

use fockrat::arithmetic::{invert_pos_real_traced, is_ell_accurate_unit, mul};
use fockrat::reduction::{normalize_naive, normalize_traced};
use fockrat::sample::{random_dense_state, random_positive_real, StateShape};
use fockrat::valuation::{eval_n, oracle_mul};
use fockrat::{
    normalize, Accuracy, Error, NumberState, Result, Sign, StandardForm, Statistics, SystemKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::session::SessionConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Normalize,
    Mul,
    Inv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchParams {
    pub suite: Suite,
    pub seed: u64,
    /// Number of random inputs.
    pub count: usize,
    /// Sites per state for `normalize`, systems per operand for `mul`,
    /// site window for `inv`.
    pub size: i64,
    /// Largest count per (kind, site) for `normalize`.
    pub max_count: u64,
    pub ell: Accuracy,
}

fn rate(ops: usize, elapsed: Duration) -> String {
    let secs = elapsed.as_secs_f64();
    if secs == 0.0 {
        return "inf ops/s".into();
    }
    format!("{:.1} ops/s", ops as f64 / secs)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Runs one suite and returns its report. Fails if a cross-check fails.
pub fn run_bench(p: &BenchParams, config: &SessionConfig) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    match p.suite {
        Suite::Normalize => bench_normalize(p, config, &mut rng),
        Suite::Mul => bench_mul(p, config, &mut rng),
        Suite::Inv => bench_inv(p, config, &mut rng),
    }
}

fn bench_normalize(
    p: &BenchParams,
    config: &SessionConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>> {
    let states: Vec<NumberState> = (0..p.count)
        .map(|_| random_dense_state(rng, p.size, p.max_count, config.statistics))
        .collect();
    let (fast, fast_time) = timed(|| {
        states
            .iter()
            .map(|s| normalize_traced(s, config.radix))
            .collect::<Vec<_>>()
    });
    let budget = 1 << 40;
    let (naive, naive_time) = timed(|| {
        states
            .iter()
            .map(|s| normalize_naive(s, config.radix, budget))
            .collect::<Option<Vec<_>>>()
    });
    let naive =
        naive.ok_or_else(|| Error::InvalidState("naive normalization ran out of steps".into()))?;
    let agree = fast
        .iter()
        .zip(&naive)
        .filter(|(f, n)| f.form == n.form)
        .count();
    let fast_steps: u64 = fast.iter().map(|n| n.step_count).sum();
    let naive_steps: u64 = naive.iter().map(|n| n.step_count).sum();
    let max_steps = fast.iter().map(|n| n.step_count).max().unwrap_or(0);
    let lines = vec![
        format!(
            "normalize: {} states, {} sites, counts <= {}, radix {}, seed {}",
            p.count, p.size, p.max_count, config.radix, p.seed
        ),
        format!(
            "  signed-digit: {}, {fast_steps} steps (max {max_steps})",
            rate(p.count, fast_time)
        ),
        format!(
            "  naive:        {}, {naive_steps} steps",
            rate(p.count, naive_time)
        ),
        format!("  cross-check: {agree}/{} forms agree", p.count),
    ];
    if agree != p.count {
        return Err(Error::InvalidState(format!(
            "naive and signed-digit normalization disagree on {} states",
            p.count - agree
        )));
    }
    Ok(lines)
}

fn random_operand(rng: &mut ChaCha8Rng, size: i64, statistics: Statistics) -> Result<NumberState> {
    let systems: Vec<(SystemKind, i64, u64)> = (0..size)
        .map(|_| {
            (
                SystemKind::ALL[rng.gen_range(0..4)],
                rng.gen_range(-2 * size..=2 * size),
                1,
            )
        })
        .collect();
    NumberState::from_systems(&systems, statistics)
}

fn bench_mul(p: &BenchParams, config: &SessionConfig, rng: &mut ChaCha8Rng) -> Result<Vec<String>> {
    let mut pairs = Vec::with_capacity(p.count);
    for _ in 0..p.count {
        pairs.push((
            random_operand(rng, p.size, config.statistics)?,
            random_operand(rng, p.size, config.statistics)?,
        ));
    }
    let (products, time) = timed(|| {
        pairs
            .iter()
            .map(|(a, b)| mul(a, b))
            .collect::<Result<Vec<_>>>()
    });
    let products = products?;
    let (forms, norm_time) = timed(|| {
        products
            .iter()
            .map(|s| normalize_traced(s, config.radix))
            .collect::<Vec<_>>()
    });
    let steps: u64 = forms.iter().map(|n| n.step_count).sum();
    let systems: u64 = products.iter().map(NumberState::total_count).sum();
    for ((a, b), product) in pairs.iter().zip(&products) {
        let expected = oracle_mul(&eval_n(a, config.radix), &eval_n(b, config.radix));
        if eval_n(product, config.radix) != expected {
            return Err(Error::InvalidState(format!(
                "mul({a}, {b}) has the wrong value"
            )));
        }
    }
    Ok(vec![
        format!(
            "mul: {} pairs, {}x{} systems, radix {}, seed {}",
            p.count, p.size, p.size, config.radix, p.seed
        ),
        format!(
            "  product:   {}, {systems} output systems",
            rate(p.count, time)
        ),
        format!("  normalize: {}, {steps} steps", rate(p.count, norm_time)),
        format!("  cross-check: {0}/{0} values agree", p.count),
    ])
}

fn bench_inv(p: &BenchParams, config: &SessionConfig, rng: &mut ChaCha8Rng) -> Result<Vec<String>> {
    let shape = StateShape {
        min_site: -p.size,
        max_site: p.size,
        ..StateShape::default()
    };
    let inputs: Vec<_> = (0..p.count)
        .map(|_| random_positive_real(rng, &shape, config.radix))
        .collect();
    let (traces, time) = timed(|| {
        inputs
            .iter()
            .map(|x| invert_pos_real_traced(x, p.ell, config.radix))
            .collect::<Result<Vec<_>>>()
    });
    let traces = traces?;
    let mut candidates = 0;
    for (x, t) in inputs.iter().zip(&traces) {
        candidates += t.candidates.len();
        let product = normalize(&mul(&boson(x), &boson(&t.inverse))?, config.radix).0;
        if !is_ell_accurate_unit(&product, p.ell, config.radix) {
            return Err(Error::InvalidState(format!(
                "inverse of {x} is not {}-accurate",
                p.ell.get()
            )));
        }
    }
    Ok(vec![
        format!(
            "inv: {} inputs, sites {}..{}, ell {}, radix {}, seed {}",
            p.count,
            -p.size,
            p.size,
            p.ell.get(),
            config.radix,
            p.seed
        ),
        format!(
            "  inverse: {}, {candidates} candidates tried",
            rate(p.count, time)
        ),
        format!(
            "  cross-check: {0}/{0} products are {1}-accurate units",
            p.count,
            p.ell.get()
        ),
    ])
}

fn boson(form: &StandardForm) -> NumberState {
    form.to_state(Statistics::Boson, Sign::Plus)
}
