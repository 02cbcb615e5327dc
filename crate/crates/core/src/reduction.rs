//! N-equality as a rewrite system and normalization to standard form.
//!
//! Three rules generate N-equality, each acting inside one family:
//!
//! * **cancel** removes one `+` and one `-` system from a site,
//! * **carry** replaces `k` equal systems at site `j` by one at `j + 1`,
//! * **borrow** replaces a dominant system at `high` and an opposite one at
//!   `low < high` (nothing in between) by `k - 1` dominant systems on every
//!   site `low..high`.
//!
//! For fermions every removal or insertion of an operator passes the
//! same-family operators standing to its left in canonical order, which gives
//! the `=_±` phase of each step. Removal always takes the highest `h` of a
//! block and insertion always lands on the lowest free `h`.
//!
//! [`normalize`] runs a fixed strategy per family: collapse every site to a
//! signed count, sweep carries from the lowest site upward, then resolve the
//! remaining opposite-sign sites from the top down with borrows.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::state::{
    block_position, Family, NumberState, Radix, Sign, SiteOccupancy, StandardForm, SystemKind,
};

/// A rewrite rule instance: which rule fires where.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rewrite {
    Cancel {
        site: i64,
        family: Family,
    },
    Carry {
        site: i64,
        kind: SystemKind,
    },
    Borrow {
        high: i64,
        low: i64,
        family: Family,
        sign: Sign,
    },
}

impl Rewrite {
    pub fn family(&self) -> Family {
        match *self {
            Rewrite::Cancel { family, .. } | Rewrite::Borrow { family, .. } => family,
            Rewrite::Carry { kind, .. } => kind.family,
        }
    }
}

impl fmt::Display for Rewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rewrite::Cancel { site, family } => write!(f, "cancel j={site} fam={family}"),
            Rewrite::Carry { site, kind } => write!(f, "carry j={site} kind={kind}"),
            Rewrite::Borrow {
                high,
                low,
                family,
                sign,
            } => {
                write!(f, "borrow {high}..{low} fam={family} sign={sign}")
            }
        }
    }
}

/// One applied rewrite together with the fermion phase it produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RewriteStep {
    pub rule: Rewrite,
    pub phase_flip: Sign,
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if self.phase_flip == Sign::Minus {
            write!(f, " phase=-1")?;
        }
        Ok(())
    }
}

/// Result of [`normalize_traced`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub form: StandardForm,
    pub phase: Sign,
    /// Number of elementary rule applications.
    pub step_count: u64,
    /// Elementary steps in order; empty unless a trace was requested.
    pub steps: Vec<RewriteStep>,
}

/// Mutable working copy of a state's occupation map.
struct Rewriter {
    sites: BTreeMap<i64, SiteOccupancy>,
    radix: Radix,
    fermion: bool,
    phase: Sign,
    step_count: u64,
    trace: Option<Vec<RewriteStep>>,
}

fn parity(n: u128) -> Sign {
    Sign::of_count(n)
}

impl Rewriter {
    fn new(state: &NumberState, radix: Radix, trace: bool) -> Rewriter {
        Rewriter {
            sites: state.sites().clone(),
            radix,
            fermion: state.is_fermion(),
            phase: state.phase(),
            step_count: 0,
            trace: trace.then(Vec::new),
        }
    }

    fn into_state(self, template: &NumberState) -> NumberState {
        NumberState::from_sites(self.sites, template.statistics(), self.phase)
    }

    fn k(&self) -> u64 {
        u64::from(self.radix.get())
    }

    fn counts(&self, j: i64, family: Family) -> (u64, u64) {
        self.sites.get(&j).map_or((0, 0), |occ| occ.family(family))
    }

    fn adjust(&mut self, j: i64, kind: SystemKind, delta: i128) {
        let occ = self.sites.entry(j).or_default();
        let c = occ.count_mut(kind);
        *c = (i128::from(*c) + delta) as u64;
        if occ.is_empty() {
            self.sites.remove(&j);
        }
    }

    fn record(&mut self, rule: Rewrite, flip: Sign) {
        self.step_count += 1;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(RewriteStep {
                rule,
                phase_flip: flip,
            });
        }
    }

    fn tracing(&self) -> bool {
        self.trace.is_some()
    }

    /// `times` cancellations at `(j, family)`. Each one removes the top `-`
    /// operator and then the top `+` operator, costing `(-1)^p` where `p` is
    /// the current `+` count.
    fn cancel(&mut self, j: i64, family: Family, times: u64) -> Result<()> {
        if times == 0 {
            return Ok(());
        }
        let (p, m) = self.counts(j, family);
        if p < times || m < times {
            return Err(Error::NotApplicable(format!(
                "cancel at j={j} fam={family} needs both signs present"
            )));
        }
        let rule = Rewrite::Cancel { site: j, family };
        if self.fermion {
            if self.tracing() {
                for r in 0..times {
                    let flip = parity(u128::from(p - r));
                    self.phase *= flip;
                    self.record(rule, flip);
                }
            } else {
                let (t, p) = (u128::from(times), u128::from(p));
                self.phase *= parity(t * p + t * (t - 1) / 2);
                self.step_count += times;
            }
        } else if self.tracing() {
            for _ in 0..times {
                self.record(rule, Sign::Plus);
            }
        } else {
            self.step_count += times;
        }
        self.adjust(j, SystemKind::new(family, Sign::Plus), -i128::from(times));
        self.adjust(j, SystemKind::new(family, Sign::Minus), -i128::from(times));
        Ok(())
    }

    /// `times` carries of `kind` from `j` to `j + 1`. Step `r` removes `k`
    /// operators from the block at `j` (position `A`) and inserts one at
    /// `j + 1`, whose position has dropped by `r k` since the first step.
    fn carry(&mut self, j: i64, kind: SystemKind, times: u64) -> Result<()> {
        if times == 0 {
            return Ok(());
        }
        let k = self.k();
        let available = self.sites.get(&j).map_or(0, |occ| occ.count(kind));
        if available < k.saturating_mul(times) {
            return Err(Error::NotApplicable(format!(
                "carry at j={j} kind={kind} needs {k} systems"
            )));
        }
        let rule = Rewrite::Carry { site: j, kind };
        if self.fermion {
            let a = block_position(&self.sites, kind, j);
            let b0 = block_position(&self.sites, kind, j + 1);
            let k = u128::from(k);
            if self.tracing() {
                for r in 1..=u128::from(times) {
                    let flip = parity(k * a + b0 - r * k);
                    self.phase *= flip;
                    self.record(rule, flip);
                }
            } else {
                let t = u128::from(times);
                self.phase *= parity(t * (k * a + b0) + k * t * (t + 1) / 2);
                self.step_count += times;
            }
        } else if self.tracing() {
            for _ in 0..times {
                self.record(rule, Sign::Plus);
            }
        } else {
            self.step_count += times;
        }
        self.adjust(j, kind, -i128::from(k * times));
        self.adjust(j + 1, kind, i128::from(times));
        Ok(())
    }

    /// One borrow. Order of elementary moves: remove the top opposite operator
    /// at `low`, remove the top dominant operator at `high`, then insert `k - 1`
    /// dominant operators at each site from `low` up to `high - 1`.
    fn borrow(&mut self, high: i64, low: i64, family: Family, sign: Sign) -> Result<()> {
        let dominant = SystemKind::new(family, sign);
        let opposite = dominant.flipped();
        let not_applicable = |why: &str| {
            Err(Error::NotApplicable(format!(
                "borrow {high}..{low} fam={family} sign={sign}: {why}"
            )))
        };
        if low >= high {
            return not_applicable("low site must lie below high site");
        }
        let at_high = self.sites.get(&high).map_or(0, |o| o.count(dominant));
        let at_low = self.sites.get(&low).map_or(0, |o| o.count(opposite));
        if at_high == 0 || at_low == 0 {
            return not_applicable("endpoints are not occupied by the right signs");
        }
        if self
            .sites
            .range(low + 1..high)
            .any(|(_, occ)| occ.family_total(family) > 0)
        {
            return not_applicable("same-family systems lie between the endpoints");
        }

        let k1 = self.k() - 1;
        let mut flip = Sign::Plus;
        if self.fermion {
            let k1 = u128::from(k1);
            let below = block_position(&self.sites, SystemKind::new(family, Sign::Plus), low);
            let (p_low, m_low) = self.counts(low, family);
            let (p_low, m_low) = (u128::from(p_low), u128::from(m_low));
            let (p_high, _) = self.counts(high, family);
            let p_high = u128::from(p_high);

            let remove_low = below
                + if opposite.sign == Sign::Minus {
                    p_low
                } else {
                    0
                };
            let low_total_after = p_low + m_low - 1;
            let remove_high =
                below + low_total_after + if sign == Sign::Minus { p_high } else { 0 };
            let p_low_after = if opposite.sign == Sign::Plus {
                p_low - 1
            } else {
                p_low
            };
            let insert_low = below + if sign == Sign::Minus { p_low_after } else { 0 };
            let low_total_final = low_total_after + k1;
            let gap = (high - low - 1) as u128;
            // sum over the empty sites low+1..high-1 of the operators below each
            let between = gap * (below + low_total_final) + k1 * gap * gap.saturating_sub(1) / 2;
            let total = remove_low + remove_high + k1 * insert_low + k1 * between;
            flip = parity(total);
            self.phase *= flip;
        }
        self.record(
            Rewrite::Borrow {
                high,
                low,
                family,
                sign,
            },
            flip,
        );

        self.adjust(low, opposite, -1);
        self.adjust(high, dominant, -1);
        if k1 > 0 {
            for site in low..high {
                self.adjust(site, dominant, i128::from(k1));
            }
        }
        Ok(())
    }

    fn apply(&mut self, rule: Rewrite) -> Result<()> {
        match rule {
            Rewrite::Cancel { site, family } => self.cancel(site, family, 1),
            Rewrite::Carry { site, kind } => self.carry(site, kind, 1),
            Rewrite::Borrow {
                high,
                low,
                family,
                sign,
            } => self.borrow(high, low, family, sign),
        }
    }

    fn next_family_site(&self, family: Family, from: i64) -> Option<i64> {
        self.sites
            .range(from..)
            .find(|(_, occ)| occ.family_total(family) > 0)
            .map(|(&j, _)| j)
    }

    fn prev_family_site(&self, family: Family, upto: i64) -> Option<i64> {
        self.sites
            .range(..=upto)
            .rev()
            .find(|(_, occ)| occ.family_total(family) > 0)
            .map(|(&j, _)| j)
    }

    fn normalize_family(&mut self, family: Family) -> Result<()> {
        let k = self.k();
        let plus = SystemKind::new(family, Sign::Plus);
        let minus = SystemKind::new(family, Sign::Minus);

        // collapse and carry, bottom-up
        let mut cursor = match self.sites.keys().next() {
            Some(&j) => j,
            None => return Ok(()),
        };
        while let Some(j) = self.next_family_site(family, cursor) {
            let (p, m) = self.counts(j, family);
            self.cancel(j, family, p.min(m))?;
            let (p, m) = self.counts(j, family);
            let (count, kind) = if p > 0 { (p, plus) } else { (m, minus) };
            if count >= k {
                self.carry(j, kind, count / k)?;
            }
            cursor = j + 1;
        }

        // every site now holds fewer than k systems of one sign; the top one
        // fixes the sign of the whole family
        let Some(top) = self.prev_family_site(family, i64::MAX) else {
            return Ok(());
        };
        let (p, _) = self.counts(top, family);
        let dominant = if p > 0 { Sign::Plus } else { Sign::Minus };

        let mut upper = top;
        let mut cursor = top - 1;
        while let Some(j) = self.prev_family_site(family, cursor) {
            let (p, m) = self.counts(j, family);
            let opposite_count = if dominant == Sign::Plus { m } else { p };
            if opposite_count > 0 {
                self.borrow(upper, j, family, dominant)?;
                self.cancel(j, family, opposite_count - 1)?;
            }
            upper = j;
            cursor = j - 1;
        }
        Ok(())
    }
}

fn run_normalize(state: &NumberState, radix: Radix, trace: bool) -> Normalization {
    let mut rw = Rewriter::new(state, radix, trace);
    for family in Family::BOTH {
        rw.normalize_family(family)
            .expect("normalization strategy only fires applicable rules");
    }
    debug_assert!(
        NumberState::from_sites(rw.sites.clone(), state.statistics(), rw.phase).is_standard(radix)
    );
    Normalization {
        form: StandardForm::from_sites_unchecked(&rw.sites),
        phase: rw.phase,
        step_count: rw.step_count,
        steps: rw.trace.unwrap_or_default(),
    }
}

/// The unique standard form N-equal to `state`, with the fermion phase
/// accumulated along the way (always `+1` for bosons).
pub fn normalize(state: &NumberState, radix: Radix) -> (StandardForm, Sign) {
    let n = run_normalize(state, radix, false);
    (n.form, n.phase)
}

/// Like [`normalize`], also returning every elementary step applied.
pub fn normalize_traced(state: &NumberState, radix: Radix) -> Normalization {
    run_normalize(state, radix, true)
}

/// Normalizes and unfolds back into a standard state with the same statistics.
pub fn normalize_state(state: &NumberState, radix: Radix) -> NumberState {
    let (form, phase) = normalize(state, radix);
    form.to_state(state.statistics(), phase)
}

/// Phase-blind N-equality.
pub fn n_equal(a: &NumberState, b: &NumberState, radix: Radix) -> bool {
    normalize(a, radix).0 == normalize(b, radix).0
}

fn apply_one(state: &NumberState, radix: Radix, rule: Rewrite) -> Result<NumberState> {
    let mut rw = Rewriter::new(state, radix, false);
    rw.apply(rule)?;
    Ok(rw.into_state(state))
}

/// Removes one `+` and one `-` system of `family` at site `j`.
pub fn cancel_at(state: &NumberState, j: i64, family: Family) -> Result<NumberState> {
    apply_one(state, Radix::BINARY, Rewrite::Cancel { site: j, family })
}

/// Replaces `k` systems of `kind` at `j` by one at `j + 1`.
pub fn carry_at(
    state: &NumberState,
    j: i64,
    kind: SystemKind,
    radix: Radix,
) -> Result<NumberState> {
    apply_one(state, radix, Rewrite::Carry { site: j, kind })
}

/// `s k^high - s k^low = s (k-1)(k^(high-1) + ... + k^low)` for the dominant
/// sign `s`, applied to one system at each endpoint.
pub fn borrow_run(
    state: &NumberState,
    high: i64,
    low: i64,
    family: Family,
    dominant: Sign,
    radix: Radix,
) -> Result<NumberState> {
    apply_one(
        state,
        radix,
        Rewrite::Borrow {
            high,
            low,
            family,
            sign: dominant,
        },
    )
}

/// Applies a single rule instance and reports the phase it produced.
pub fn apply_rewrite(
    state: &NumberState,
    rule: Rewrite,
    radix: Radix,
) -> Result<(NumberState, RewriteStep)> {
    let mut rw = Rewriter::new(state, radix, true);
    rw.apply(rule)?;
    let step = rw
        .trace
        .as_ref()
        .and_then(|t| t.last().copied())
        .expect("one step recorded");
    Ok((rw.into_state(state), step))
}

/// Every rule instance whose left-hand side is present in `state`.
///
/// Borrows are listed for each pair of adjacent occupied sites of a family
/// where the upper site holds some sign and the lower site the opposite one.
pub fn applicable_rewrites(state: &NumberState, radix: Radix) -> Vec<Rewrite> {
    let k = u64::from(radix.get());
    let mut rules = Vec::new();
    for family in Family::BOTH {
        let occupied: Vec<(i64, u64, u64)> = state
            .sites()
            .iter()
            .filter_map(|(&j, occ)| {
                let (p, m) = occ.family(family);
                (p + m > 0).then_some((j, p, m))
            })
            .collect();
        for &(j, p, m) in &occupied {
            if p > 0 && m > 0 {
                rules.push(Rewrite::Cancel { site: j, family });
            }
            for (count, sign) in [(p, Sign::Plus), (m, Sign::Minus)] {
                if count >= k {
                    rules.push(Rewrite::Carry {
                        site: j,
                        kind: SystemKind::new(family, sign),
                    });
                }
            }
        }
        for pair in occupied.windows(2) {
            let (low, lp, lm) = pair[0];
            let (high, hp, hm) = pair[1];
            if hp > 0 && lm > 0 {
                rules.push(Rewrite::Borrow {
                    high,
                    low,
                    family,
                    sign: Sign::Plus,
                });
            }
            if hm > 0 && lp > 0 {
                rules.push(Rewrite::Borrow {
                    high,
                    low,
                    family,
                    sign: Sign::Minus,
                });
            }
        }
    }
    rules
}

/// Outcome of the rule-at-a-time strategy used as a benchmark baseline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaiveNormalization {
    pub form: StandardForm,
    pub phase: Sign,
    pub step_count: u64,
}

/// Normalizes by firing one elementary rule at a time, rotating between
/// cancel, carry and borrow and rescanning the whole state after every step.
/// Borrows only fire in the direction of the sign held at the top of their
/// family. Returns `None` if `budget` steps were not enough.
pub fn normalize_naive(
    state: &NumberState,
    radix: Radix,
    budget: u64,
) -> Option<NaiveNormalization> {
    let mut current = state.clone();
    let mut steps = 0u64;
    let mut turn = 0usize;
    loop {
        let rules = applicable_rewrites(&current, radix);
        let top_sign = |family: Family| -> Option<Sign> {
            current
                .sites()
                .iter()
                .rev()
                .find(|(_, occ)| occ.family_total(family) > 0)
                .and_then(|(_, occ)| match occ.family(family) {
                    (_, 0) => Some(Sign::Plus),
                    (0, _) => Some(Sign::Minus),
                    _ => None,
                })
        };
        let pick = |wanted: usize| {
            rules.iter().copied().find(|rule| match (wanted, rule) {
                (0, Rewrite::Cancel { .. }) | (1, Rewrite::Carry { .. }) => true,
                (2, Rewrite::Borrow { family, sign, .. }) => top_sign(*family) == Some(*sign),
                _ => false,
            })
        };
        let chosen = (0..3)
            .map(|offset| (turn + offset) % 3)
            .find_map(|w| pick(w).map(|r| (w, r)));
        let Some((which, rule)) = chosen else {
            break;
        };
        if steps >= budget {
            return None;
        }
        current = apply_rewrite(&current, rule, radix).ok()?.0;
        steps += 1;
        turn = (which + 1) % 3;
    }
    Some(NaiveNormalization {
        form: current.to_standard_form(radix).ok()?,
        phase: current.phase(),
        step_count: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Statistics, SystemKind as K};

    const RP: K = K::REAL_PLUS;
    const RM: K = K::REAL_MINUS;
    const IP: K = K::IMAG_PLUS;
    const IM: K = K::IMAG_MINUS;

    fn boson(entries: &[(K, i64, u64)]) -> NumberState {
        NumberState::from_systems(entries, Statistics::Boson).unwrap()
    }

    fn fermion(entries: &[(K, i64, u64)]) -> NumberState {
        NumberState::from_systems(entries, Statistics::Fermion).unwrap()
    }

    #[test]
    fn cancel_examples() {
        assert!(
            cancel_at(&boson(&[(RP, 5, 1), (RM, 5, 1)]), 5, Family::Real)
                .unwrap()
                .is_vacuum()
        );
        assert_eq!(
            cancel_at(&boson(&[(IP, 0, 2), (IM, 0, 1)]), 0, Family::Imaginary).unwrap(),
            boson(&[(IP, 0, 1)])
        );
        assert_eq!(
            cancel_at(
                &boson(&[(RP, 3, 1), (RM, 3, 1), (IP, 1, 1)]),
                3,
                Family::Real
            )
            .unwrap(),
            boson(&[(IP, 1, 1)])
        );
        assert!(matches!(
            cancel_at(&boson(&[(RP, 3, 1)]), 3, Family::Real),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn carry_examples() {
        let r2 = Radix::BINARY;
        assert_eq!(
            carry_at(&boson(&[(RP, 0, 2)]), 0, RP, r2).unwrap(),
            boson(&[(RP, 1, 1)])
        );
        assert_eq!(
            carry_at(&boson(&[(IM, 3, 3)]), 3, IM, r2).unwrap(),
            boson(&[(IM, 3, 1), (IM, 4, 1)])
        );
        let r3 = Radix::new(3).unwrap();
        assert_eq!(
            carry_at(&boson(&[(RP, 0, 3)]), 0, RP, r3).unwrap(),
            boson(&[(RP, 1, 1)])
        );
        assert!(carry_at(&boson(&[(RP, 0, 2)]), 0, RP, r3).is_err());
    }

    #[test]
    fn borrow_examples() {
        let r2 = Radix::BINARY;
        assert_eq!(
            borrow_run(
                &boson(&[(RP, 3, 1), (RM, 0, 1)]),
                3,
                0,
                Family::Real,
                Sign::Plus,
                r2
            )
            .unwrap(),
            boson(&[(RP, 2, 1), (RP, 1, 1), (RP, 0, 1)])
        );
        assert_eq!(
            borrow_run(
                &boson(&[(IM, 2, 1), (IP, 1, 1)]),
                2,
                1,
                Family::Imaginary,
                Sign::Minus,
                r2
            )
            .unwrap(),
            boson(&[(IM, 1, 1)])
        );
        assert_eq!(
            borrow_run(
                &boson(&[(RM, 1, 1), (RP, 0, 1)]),
                1,
                0,
                Family::Real,
                Sign::Minus,
                r2
            )
            .unwrap(),
            boson(&[(RM, 0, 1)])
        );
        // something in between
        assert!(borrow_run(
            &boson(&[(RP, 3, 1), (RP, 2, 1), (RM, 0, 1)]),
            3,
            0,
            Family::Real,
            Sign::Plus,
            r2
        )
        .is_err());
        // k = 3: 9 - 1 = 2*3 + 2
        let r3 = Radix::new(3).unwrap();
        assert_eq!(
            borrow_run(
                &boson(&[(RP, 2, 1), (RM, 0, 1)]),
                2,
                0,
                Family::Real,
                Sign::Plus,
                r3
            )
            .unwrap(),
            boson(&[(RP, 1, 2), (RP, 0, 2)])
        );
    }

    #[test]
    fn normalize_worked_value() {
        let s = boson(&[(RP, 3, 1), (IP, 3, 1), (RM, 2, 1), (IM, 4, 1), (RM, -6, 1)]);
        let (form, phase) = normalize(&s, Radix::BINARY);
        assert_eq!(phase, Sign::Plus);
        assert_eq!(
            form,
            StandardForm::from_exponents(
                Some((Sign::Plus, &[1, 0, -1, -2, -3, -4, -5, -6])),
                Some((Sign::Minus, &[3])),
            )
        );
    }

    #[test]
    fn normalize_conversion_pair() {
        let s = boson(&[(RM, -1, 1), (IM, 6, 1), (IP, 2, 1), (RP, 3, 1)]);
        let (form, _) = normalize(&s, Radix::BINARY);
        assert_eq!(
            form,
            StandardForm::from_exponents(
                Some((Sign::Plus, &[2, 1, 0, -1])),
                Some((Sign::Minus, &[5, 4, 3, 2])),
            )
        );
    }

    #[test]
    fn normalize_vacuum() {
        let n = normalize_traced(&NumberState::vacuum(Statistics::Fermion), Radix::BINARY);
        assert!(n.form.is_zero());
        assert_eq!(n.phase, Sign::Plus);
        assert_eq!(n.step_count, 0);
    }

    #[test]
    fn n_equal_examples() {
        let r = Radix::BINARY;
        let s = boson(&[(RP, 3, 2), (IM, 0, 1)]);
        assert!(n_equal(&s, &s, r));
        assert!(n_equal(&boson(&[(RP, 0, 2)]), &boson(&[(RP, 1, 1)]), r));
        assert!(!n_equal(&boson(&[(RP, 0, 1)]), &boson(&[(RM, 0, 1)]), r));
    }

    #[test]
    fn shortcut_relations_normalize_identically() {
        let r = Radix::BINARY;
        let base = boson(&[(RP, 4, 1), (IM, -1, 2)]);
        // base with one extra r+/r- pair at site 2
        let with_pair = boson(&[(RP, 4, 1), (IM, -1, 2), (RP, 2, 1), (RM, 2, 1)]);
        assert_eq!(normalize(&base, r).0, normalize(&with_pair, r).0);
        // one i+ at j+1 traded for two at j
        let a = boson(&[(IP, 1, 1), (RP, 0, 1)]);
        let b = boson(&[(IP, 0, 2), (RP, 0, 1)]);
        assert_eq!(normalize(&a, r).0, normalize(&b, r).0);
    }

    #[test]
    fn trace_format_and_phase_product() {
        let s = fermion(&[(RP, 0, 3), (RM, 0, 1), (RP, 3, 1), (RM, 1, 2)]);
        let n = normalize_traced(&s, Radix::BINARY);
        assert_eq!(n.steps.len() as u64, n.step_count);
        let product = n
            .steps
            .iter()
            .fold(s.phase(), |acc, st| acc * st.phase_flip);
        assert_eq!(product, n.phase);
        assert_eq!(n.steps[0].rule.to_string(), "cancel j=0 fam=r");
        let text: Vec<String> = n.steps.iter().map(ToString::to_string).collect();
        assert!(text.iter().any(|t| t.starts_with("carry j=0 kind=r+")));
        assert!(text
            .iter()
            .any(|t| t.starts_with("borrow 3..1 fam=r sign=+")));

        let untraced = normalize(&s, Radix::BINARY);
        assert_eq!(untraced, (n.form, n.phase));
    }

    /// Reference phase for one elementary rule: expand the fermion operators,
    /// delete/insert them one at a time as the rule prescribes and let
    /// `fermion_reorder_sign` count the transpositions.
    fn reference_flip(state: &NumberState, rule: Rewrite, radix: Radix) -> Sign {
        use crate::state::{fermion_reorder_sign, FermionOp};

        // sign of removing the top operator of `kind` at `j` = sign of moving it
        // to the front of the canonical sequence
        fn remove(ops: &mut Vec<FermionOp>, kind: K, j: i64) -> Sign {
            let top = ops
                .iter()
                .filter(|o| o.kind == kind && o.j == j)
                .map(|o| o.h)
                .max()
                .unwrap();
            let idx = ops
                .iter()
                .position(|o| o.kind == kind && o.j == j && o.h == top)
                .unwrap();
            let op = ops.remove(idx);
            let mut moved = vec![op];
            moved.extend(ops.iter().copied());
            fermion_reorder_sign(&moved).unwrap()
        }
        // sign of creating at the lowest free h and sorting into place
        fn insert(ops: &mut Vec<FermionOp>, kind: K, j: i64) -> Sign {
            let h = ops.iter().filter(|o| o.kind == kind && o.j == j).count() as u64 + 1;
            let mut seq = vec![FermionOp { kind, h, j }];
            seq.extend(ops.iter().copied());
            let sign = fermion_reorder_sign(&seq).unwrap();
            ops.push(FermionOp { kind, h, j });
            ops.sort_by_key(|o| (o.kind.family, o.j, o.kind.sign, std::cmp::Reverse(o.h)));
            sign
        }

        let mut ops = state.fermion_operators();
        let k = radix.get() as usize;
        let mut flip = Sign::Plus;
        match rule {
            Rewrite::Cancel { site, family } => {
                flip *= remove(&mut ops, K::new(family, Sign::Minus), site);
                flip *= remove(&mut ops, K::new(family, Sign::Plus), site);
            }
            Rewrite::Carry { site, kind } => {
                for _ in 0..k {
                    flip *= remove(&mut ops, kind, site);
                }
                flip *= insert(&mut ops, kind, site + 1);
            }
            Rewrite::Borrow {
                high,
                low,
                family,
                sign,
            } => {
                let dom = K::new(family, sign);
                flip *= remove(&mut ops, dom.flipped(), low);
                flip *= remove(&mut ops, dom, high);
                for site in low..high {
                    for _ in 0..k - 1 {
                        flip *= insert(&mut ops, dom, site);
                    }
                }
            }
        }
        flip
    }

    #[test]
    fn closed_form_phases_match_operator_reordering() {
        let states = [
            fermion(&[(RP, 0, 3), (RM, 0, 2), (RP, -1, 1), (IP, 0, 2), (RM, 2, 1)]),
            fermion(&[(RM, 1, 2), (RP, 1, 1), (RP, 4, 1), (RM, -2, 3), (IM, 1, 1)]),
            fermion(&[(IP, 2, 1), (IM, 0, 3), (IP, -1, 2), (RP, 0, 1), (IM, 2, 2)]),
        ];
        for radix in [Radix::BINARY, Radix::new(3).unwrap()] {
            for s in &states {
                for rule in applicable_rewrites(s, radix) {
                    let (_, step) = apply_rewrite(s, rule, radix).unwrap();
                    assert_eq!(
                        step.phase_flip,
                        reference_flip(s, rule, radix),
                        "{rule} on {s}"
                    );
                }
            }
        }
    }

    #[test]
    fn batched_phase_matches_single_steps() {
        let s = fermion(&[(RP, 0, 7), (RM, 0, 2), (RP, 1, 3), (RM, 2, 1), (RP, -3, 5)]);
        let r = Radix::BINARY;
        let traced = normalize_traced(&s, r);
        let mut current = s.clone();
        for step in &traced.steps {
            let (next, replay) = apply_rewrite(&current, step.rule, r).unwrap();
            assert_eq!(replay.phase_flip, step.phase_flip);
            current = next;
        }
        assert_eq!(current.phase(), traced.phase);
        assert_eq!(normalize(&s, r).1, traced.phase);
    }

    #[test]
    fn naive_strategy_agrees() {
        let s = boson(&[(RP, 0, 9), (RM, 2, 3), (IP, -1, 4), (IM, 3, 1), (RP, 5, 1)]);
        let r = Radix::BINARY;
        let naive = normalize_naive(&s, r, 10_000).unwrap();
        assert_eq!(naive.form, normalize(&s, r).0);
    }

    proptest::proptest! {
        #[test]
        fn random_fermion_steps_match_operator_reordering(
            e in proptest::collection::vec((0usize..4, -4i64..4, 1u64..5), 1..8),
            k in 2u32..5,
        ) {
            let entries: Vec<(K, i64, u64)> = e.iter().map(|&(i, j, c)| (K::ALL[i], j, c)).collect();
            let s = fermion(&entries);
            let radix = Radix::new(k).unwrap();
            for rule in applicable_rewrites(&s, radix) {
                let (_, step) = apply_rewrite(&s, rule, radix).unwrap();
                proptest::prop_assert_eq!(step.phase_flip, reference_flip(&s, rule, radix));
            }
        }
    }
}
