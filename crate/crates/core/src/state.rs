//! Occupation-number states.
//!
//! A [`NumberState`] records, for every lattice site `j`, how many systems of
//! each of the four kinds (`r+`, `r-`, `i+`, `i-`) sit there. A system of kind
//! `r+` at site `j` contributes `+k^j` to the value, `i-` contributes `-i k^j`,
//! and so on. Any occupation pattern is allowed; the *standard* states are the
//! ones with at most `k - 1` systems of one sign per family per site and a
//! single sign per family, and they are packed into a [`StandardForm`].
//!
//! Fermion states carry a phase bit. Operators are kept in the canonical order
//! (sites ascending left to right, `+` block before `-` block inside a site,
//! `h` descending inside a block), so the counts plus the phase describe a
//! fermion state completely.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Mul, MulAssign, Neg};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Real,
    Imaginary,
}

impl Family {
    pub const BOTH: [Family; 2] = [Family::Real, Family::Imaginary];

    pub fn other(self) -> Family {
        match self {
            Family::Real => Family::Imaginary,
            Family::Imaginary => Family::Real,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Family::Real => 'r',
            Family::Imaginary => 'i',
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// `+1` or `-1`. Used both for system signs and for the fermion phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^n` for the parity of `n`.
    pub fn from_parity(odd: bool) -> Sign {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn of_count(n: u128) -> Sign {
        Sign::from_parity(n % 2 == 1)
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl MulAssign for Sign {
    fn mul_assign(&mut self, rhs: Sign) {
        *self = *self * rhs;
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One of the four system kinds `r+`, `r-`, `i+`, `i-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemKind {
    pub family: Family,
    pub sign: Sign,
}

impl SystemKind {
    pub const REAL_PLUS: SystemKind = SystemKind::new(Family::Real, Sign::Plus);
    pub const REAL_MINUS: SystemKind = SystemKind::new(Family::Real, Sign::Minus);
    pub const IMAG_PLUS: SystemKind = SystemKind::new(Family::Imaginary, Sign::Plus);
    pub const IMAG_MINUS: SystemKind = SystemKind::new(Family::Imaginary, Sign::Minus);

    /// All kinds in canonical order.
    pub const ALL: [SystemKind; 4] = [
        SystemKind::REAL_PLUS,
        SystemKind::REAL_MINUS,
        SystemKind::IMAG_PLUS,
        SystemKind::IMAG_MINUS,
    ];

    pub const fn new(family: Family, sign: Sign) -> SystemKind {
        SystemKind { family, sign }
    }

    pub fn index(self) -> usize {
        match (self.family, self.sign) {
            (Family::Real, Sign::Plus) => 0,
            (Family::Real, Sign::Minus) => 1,
            (Family::Imaginary, Sign::Plus) => 2,
            (Family::Imaginary, Sign::Minus) => 3,
        }
    }

    /// Same family, opposite sign.
    pub fn flipped(self) -> SystemKind {
        SystemKind::new(self.family, -self.sign)
    }

    /// Same sign, other family.
    pub fn swapped(self) -> SystemKind {
        SystemKind::new(self.family.other(), self.sign)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.sign)
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r+" => Ok(SystemKind::REAL_PLUS),
            "r-" => Ok(SystemKind::REAL_MINUS),
            "i+" => Ok(SystemKind::IMAG_PLUS),
            "i-" => Ok(SystemKind::IMAG_MINUS),
            _ => Err(Error::parse(0, format!("unknown system kind '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistics {
    #[default]
    Boson,
    Fermion,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Boson => write!(f, "boson"),
            Statistics::Fermion => write!(f, "fermion"),
        }
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boson" => Ok(Statistics::Boson),
            "fermion" => Ok(Statistics::Fermion),
            _ => Err(Error::InvalidArgument(format!("unknown statistics '{s}'"))),
        }
    }
}

/// Base of the positional representation (`k` in `k^j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Radix(u32);

impl Radix {
    pub const BINARY: Radix = Radix(2);

    /// Radices up to 36 are accepted so that literals can use `char::to_digit`.
    pub fn new(k: u32) -> Result<Radix> {
        if (2..=36).contains(&k) {
            Ok(Radix(k))
        } else {
            Err(Error::InvalidArgument(format!(
                "radix must be in 2..=36, got {k}"
            )))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub(crate) fn max_digit(self) -> u64 {
        u64::from(self.0 - 1)
    }
}

impl Default for Radix {
    fn default() -> Self {
        Radix::BINARY
    }
}

impl fmt::Display for Radix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Occupation counts at one lattice site.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SiteOccupancy {
    pub n_r: u64,
    pub m_r: u64,
    pub n_i: u64,
    pub m_i: u64,
}

impl SiteOccupancy {
    pub fn count(&self, kind: SystemKind) -> u64 {
        match kind.index() {
            0 => self.n_r,
            1 => self.m_r,
            2 => self.n_i,
            _ => self.m_i,
        }
    }

    pub fn count_mut(&mut self, kind: SystemKind) -> &mut u64 {
        match kind.index() {
            0 => &mut self.n_r,
            1 => &mut self.m_r,
            2 => &mut self.n_i,
            _ => &mut self.m_i,
        }
    }

    /// `(plus, minus)` counts of one family.
    pub fn family(&self, family: Family) -> (u64, u64) {
        match family {
            Family::Real => (self.n_r, self.m_r),
            Family::Imaginary => (self.n_i, self.m_i),
        }
    }

    pub fn family_total(&self, family: Family) -> u64 {
        let (p, m) = self.family(family);
        p + m
    }

    pub fn total(&self) -> u64 {
        self.n_r + self.m_r + self.n_i + self.m_i
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

/// Number of same-family operators standing to the left of the `kind` block
/// at site `j` in canonical order. Removing the top operator of that block, or
/// inserting a new top operator, costs `(-1)` to this power.
pub(crate) fn block_position(
    sites: &BTreeMap<i64, SiteOccupancy>,
    kind: SystemKind,
    j: i64,
) -> u128 {
    let below: u128 = sites
        .range(..j)
        .map(|(_, occ)| u128::from(occ.family_total(kind.family)))
        .sum();
    let own_plus = match kind.sign {
        Sign::Plus => 0,
        Sign::Minus => sites
            .get(&j)
            .map_or(0, |occ| u128::from(occ.family(kind.family).0)),
    };
    below + own_plus
}

/// A finite occupation pattern of the four system kinds on the integer lattice.
///
/// Zero-count sites are never stored, so structural equality is equality of
/// occupation patterns (plus statistics and phase).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NumberState {
    sites: BTreeMap<i64, SiteOccupancy>,
    statistics: Statistics,
    phase: Sign,
}

impl NumberState {
    pub fn vacuum(statistics: Statistics) -> NumberState {
        NumberState {
            sites: BTreeMap::new(),
            statistics,
            phase: Sign::Plus,
        }
    }

    /// Builds a state from `(kind, site, multiplicity)` entries. Repeated
    /// `(kind, site)` pairs accumulate. Entries are read as already being in
    /// canonical operator order, so the phase is `+1`.
    pub fn from_systems(
        entries: &[(SystemKind, i64, u64)],
        statistics: Statistics,
    ) -> Result<NumberState> {
        let mut sites: BTreeMap<i64, SiteOccupancy> = BTreeMap::new();
        for &(kind, j, multiplicity) in entries {
            if multiplicity == 0 {
                return Err(Error::InvalidArgument(format!(
                    "multiplicity of {kind}@{j} must be at least 1"
                )));
            }
            *sites.entry(j).or_default().count_mut(kind) += multiplicity;
        }
        Ok(NumberState {
            sites,
            statistics,
            phase: Sign::Plus,
        })
    }

    /// Reads a signed positional literal such as `1001.01` or `-111100.0`.
    /// Digit `d` at weight `k^j` becomes `d` systems at site `j`; the family is
    /// given by the caller and the sign by the literal.
    pub fn from_binary_literal(text: &str, family: Family, radix: Radix) -> Result<NumberState> {
        let mut chars = text.char_indices().peekable();
        let mut sign = Sign::Plus;
        if let Some(&(_, c)) = chars.peek() {
            if c == '-' || c == '+' {
                if c == '-' {
                    sign = Sign::Minus;
                }
                chars.next();
            }
        }
        let mut integer: Vec<u32> = Vec::new();
        let mut fraction: Vec<u32> = Vec::new();
        let mut seen_point = false;
        for (pos, c) in chars {
            if c == '.' {
                if seen_point {
                    return Err(Error::parse(pos, "second radix point"));
                }
                seen_point = true;
                continue;
            }
            let Some(d) = c.to_digit(36) else {
                return Err(Error::parse(pos, format!("unexpected character '{c}'")));
            };
            if d >= radix.get() {
                return Err(Error::Radix {
                    position: pos,
                    digit: c,
                    radix: radix.get(),
                });
            }
            if seen_point {
                fraction.push(d);
            } else {
                integer.push(d);
            }
        }
        if integer.is_empty() && fraction.is_empty() {
            return Err(Error::parse(text.len(), "literal has no digits"));
        }

        let mut entries = Vec::new();
        for (i, &d) in integer.iter().rev().enumerate() {
            if d > 0 {
                entries.push((SystemKind::new(family, sign), i as i64, u64::from(d)));
            }
        }
        for (i, &d) in fraction.iter().enumerate() {
            if d > 0 {
                entries.push((SystemKind::new(family, sign), -(i as i64) - 1, u64::from(d)));
            }
        }
        NumberState::from_systems(&entries, Statistics::Boson)
    }

    /// Builds a state from raw counts, dropping zeros. Boson states always get
    /// phase `+1`.
    pub fn from_sites(
        mut sites: BTreeMap<i64, SiteOccupancy>,
        statistics: Statistics,
        phase: Sign,
    ) -> NumberState {
        sites.retain(|_, occ| !occ.is_empty());
        let phase = match statistics {
            Statistics::Boson => Sign::Plus,
            Statistics::Fermion => phase,
        };
        NumberState {
            sites,
            statistics,
            phase,
        }
    }

    pub fn sites(&self) -> &BTreeMap<i64, SiteOccupancy> {
        &self.sites
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn phase(&self) -> Sign {
        self.phase
    }

    pub fn is_fermion(&self) -> bool {
        self.statistics == Statistics::Fermion
    }

    /// Same occupation pattern with a different statistics flag. Switching to
    /// bosons resets the phase.
    pub fn with_statistics(&self, statistics: Statistics) -> NumberState {
        NumberState::from_sites(self.sites.clone(), statistics, self.phase)
    }

    /// Same occupation pattern with the given phase (ignored for bosons).
    pub fn with_phase(&self, phase: Sign) -> NumberState {
        NumberState::from_sites(self.sites.clone(), self.statistics, phase)
    }

    pub fn count(&self, kind: SystemKind, j: i64) -> u64 {
        self.sites.get(&j).map_or(0, |occ| occ.count(kind))
    }

    pub fn is_vacuum(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.sites.values().map(SiteOccupancy::total).sum()
    }

    pub fn lowest_site(&self) -> Option<i64> {
        self.sites.keys().next().copied()
    }

    pub fn highest_site(&self) -> Option<i64> {
        self.sites.keys().next_back().copied()
    }

    /// Width of the occupied window, `highest - lowest + 1`; zero for vacuum.
    pub fn support_span(&self) -> u64 {
        match (self.lowest_site(), self.highest_site()) {
            (Some(lo), Some(hi)) => (hi - lo) as u64 + 1,
            _ => 0,
        }
    }

    /// Flips the sign of every system of the given families. For fermions
    /// the `+` and `-` blocks of each site trade places, costing `n m`
    /// transpositions per site and family.
    fn with_signs_flipped(&self, families: &[Family]) -> NumberState {
        let mut phase = self.phase;
        let sites = self
            .sites
            .iter()
            .map(|(&j, occ)| {
                let mut occ = *occ;
                for &family in families {
                    let (p, m) = occ.family(family);
                    if self.is_fermion() {
                        phase *= Sign::of_count(u128::from(p) * u128::from(m));
                    }
                    *occ.count_mut(SystemKind::new(family, Sign::Plus)) = m;
                    *occ.count_mut(SystemKind::new(family, Sign::Minus)) = p;
                }
                (j, occ)
            })
            .collect();
        NumberState::from_sites(sites, self.statistics, phase)
    }

    /// Interchanges `+` and `-` systems everywhere.
    pub fn negated(&self) -> NumberState {
        self.with_signs_flipped(&Family::BOTH)
    }

    /// Flips the imaginary systems only.
    pub fn conjugated(&self) -> NumberState {
        self.with_signs_flipped(&[Family::Imaginary])
    }

    /// Turns every real system into the imaginary one of the same sign and
    /// vice versa. Each family keeps its internal order, so no phase arises.
    pub fn families_swapped(&self) -> NumberState {
        let sites = self
            .sites
            .iter()
            .map(|(&j, occ)| {
                let swapped = SiteOccupancy {
                    n_r: occ.n_i,
                    m_r: occ.m_i,
                    n_i: occ.n_r,
                    m_i: occ.m_r,
                };
                (j, swapped)
            })
            .collect();
        NumberState::from_sites(sites, self.statistics, self.phase)
    }

    /// Moves every system `n` sites up (multiplication by `k^n`).
    pub fn translated(&self, n: i64) -> NumberState {
        let sites = self.sites.iter().map(|(&j, occ)| (j + n, *occ)).collect();
        NumberState::from_sites(sites, self.statistics, self.phase)
    }

    /// `(kind, site, count)` for every nonzero count, in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (SystemKind, i64, u64)> + '_ {
        self.sites.iter().flat_map(|(&j, occ)| {
            SystemKind::ALL.into_iter().filter_map(move |kind| {
                let c = occ.count(kind);
                (c > 0).then_some((kind, j, c))
            })
        })
    }

    /// True iff the state is a standard representation in radix `k`: per
    /// family, every site holds at most `k - 1` systems of a single sign and
    /// the whole family uses one sign.
    pub fn is_standard(&self, radix: Radix) -> bool {
        Family::BOTH.iter().all(|&family| {
            let mut family_sign = None;
            for occ in self.sites.values() {
                let (p, m) = occ.family(family);
                let (count, sign) = match (p, m) {
                    (0, 0) => continue,
                    (p, 0) => (p, Sign::Plus),
                    (0, m) => (m, Sign::Minus),
                    _ => return false,
                };
                if count > radix.max_digit() {
                    return false;
                }
                match family_sign {
                    None => family_sign = Some(sign),
                    Some(s) if s != sign => return false,
                    _ => {}
                }
            }
            true
        })
    }

    pub fn to_standard_form(&self, radix: Radix) -> Result<StandardForm> {
        if !self.is_standard(radix) {
            return Err(Error::InvalidState(format!(
                "state '{self}' is not standard in radix {radix}"
            )));
        }
        Ok(StandardForm::from_sites_unchecked(&self.sites))
    }

    /// The explicit fermion operator sequence in canonical order, `h` filling
    /// `1..=count` in every block.
    pub fn fermion_operators(&self) -> Vec<FermionOp> {
        let mut ops = Vec::new();
        for (&j, occ) in &self.sites {
            for kind in SystemKind::ALL {
                for h in (1..=occ.count(kind)).rev() {
                    ops.push(FermionOp { kind, h, j });
                }
            }
        }
        ops
    }
}

impl fmt::Display for NumberState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_fermion() {
            write!(f, "fermion: ")?;
        }
        if self.is_vacuum() {
            write!(f, "vac")?;
        } else {
            let mut first = true;
            for (kind, j, c) in self.entries() {
                if !first {
                    write!(f, " ")?;
                }
                first = false;
                write!(f, "{kind}@{j}")?;
                if c != 1 {
                    write!(f, "^{c}")?;
                }
            }
        }
        if self.is_fermion() && self.phase == Sign::Minus {
            write!(f, " phase=-1")?;
        }
        Ok(())
    }
}

/// Parses one `kind@site[^count]` token starting at byte offset `base`.
pub(crate) fn parse_system_token(token: &str, base: usize) -> Result<(SystemKind, i64, u64)> {
    let at = token
        .find('@')
        .ok_or_else(|| Error::parse(base, format!("expected '@' in '{token}'")))?;
    let kind: SystemKind = token[..at]
        .parse()
        .map_err(|_| Error::parse(base, format!("unknown system kind '{}'", &token[..at])))?;
    let rest = &token[at + 1..];
    let (site_text, count_text) = match rest.find('^') {
        Some(caret) => (&rest[..caret], Some(&rest[caret + 1..])),
        None => (rest, None),
    };
    let site: i64 = site_text
        .parse()
        .map_err(|_| Error::parse(base + at + 1, format!("bad site index '{site_text}'")))?;
    let count: u64 = match count_text {
        Some(t) => t.parse().map_err(|_| {
            Error::parse(
                base + at + 1 + site_text.len() + 1,
                format!("bad count '{t}'"),
            )
        })?,
        None => 1,
    };
    if count == 0 {
        return Err(Error::parse(base, "multiplicity must be at least 1"));
    }
    Ok((kind, site, count))
}

impl FromStr for NumberState {
    type Err = Error;

    /// Parses the canonical text format, e.g. `fermion: r+@3 i-@-6^4 phase=-1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut statistics = Statistics::Boson;
        let mut phase = Sign::Plus;
        let mut entries = Vec::new();
        let mut saw_vacuum = false;
        let base = s.as_ptr() as usize;
        let mut tokens = s.split_whitespace().peekable();

        if let Some(&first) = tokens.peek() {
            if let Some(rest) = first.strip_prefix("fermion:") {
                statistics = Statistics::Fermion;
                tokens.next();
                if !rest.is_empty() {
                    let offset = rest.as_ptr() as usize - base;
                    entries.push(parse_system_token(rest, offset)?);
                }
            }
        }
        for token in tokens {
            let offset = token.as_ptr() as usize - base;
            match token {
                "vac" => saw_vacuum = true,
                "phase=-1" => phase = Sign::Minus,
                "phase=1" | "phase=+1" => phase = Sign::Plus,
                _ => entries.push(parse_system_token(token, offset)?),
            }
        }
        if saw_vacuum && !entries.is_empty() {
            return Err(Error::parse(0, "'vac' cannot be combined with systems"));
        }
        if !saw_vacuum && entries.is_empty() {
            return Err(Error::parse(
                s.len(),
                "empty state; write 'vac' for the vacuum",
            ));
        }
        if phase == Sign::Minus && statistics == Statistics::Boson {
            return Err(Error::parse(0, "boson states have no phase"));
        }
        let state = NumberState::from_systems(&entries, statistics)?;
        Ok(state.with_phase(phase))
    }
}

/// One sign and a digit map for a nonzero real or imaginary component of a
/// standard state. Binary parts have every digit equal to 1, so the digit map
/// is just the exponent set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Part {
    sign: Sign,
    digits: BTreeMap<i64, u64>,
}

impl Part {
    /// Returns `None` when no nonzero digit is present.
    pub fn new(sign: Sign, digits: BTreeMap<i64, u64>) -> Option<Part> {
        let digits: BTreeMap<i64, u64> = digits.into_iter().filter(|&(_, d)| d > 0).collect();
        (!digits.is_empty()).then_some(Part { sign, digits })
    }

    pub fn from_exponents(sign: Sign, exponents: impl IntoIterator<Item = i64>) -> Option<Part> {
        Part::new(sign, exponents.into_iter().map(|j| (j, 1)).collect())
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn digits(&self) -> &BTreeMap<i64, u64> {
        &self.digits
    }

    /// Exponents in descending order.
    pub fn exponents(&self) -> Vec<i64> {
        self.digits.keys().rev().copied().collect()
    }

    pub fn leading_exponent(&self) -> i64 {
        *self.digits.keys().next_back().expect("parts are nonempty")
    }

    pub fn trailing_exponent(&self) -> i64 {
        *self.digits.keys().next().expect("parts are nonempty")
    }

    pub fn negated(&self) -> Part {
        Part {
            sign: -self.sign,
            digits: self.digits.clone(),
        }
    }

    /// Compares magnitudes: the first differing digit from the top decides.
    fn cmp_magnitude(&self, other: &Part) -> Ordering {
        let mut a = self.digits.iter().rev();
        let mut b = other.digits.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((ja, da)), Some((jb, db))) => {
                    let ord = ja.cmp(jb).then(da.cmp(db));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }
}

/// Orders two (possibly zero) standard components by value: positive parts are
/// compared digit-wise from the largest exponent down, negative parts by
/// reflection.
pub fn cmp_parts(a: Option<&Part>, b: Option<&Part>) -> Ordering {
    fn rank(p: Option<&Part>) -> i8 {
        match p {
            None => 0,
            Some(p) if p.sign == Sign::Plus => 1,
            Some(_) => -1,
        }
    }
    match rank(a).cmp(&rank(b)) {
        Ordering::Equal => match (a, b) {
            (Some(a), Some(b)) if a.sign == Sign::Plus => a.cmp_magnitude(b),
            (Some(a), Some(b)) => b.cmp_magnitude(a),
            _ => Ordering::Equal,
        },
        other => other,
    }
}

/// The packed form of a standard state: an optional real and an optional
/// imaginary component. Both absent is zero.
///
/// Statistics and phase are deliberately not part of the form; they travel
/// alongside it so that equal values compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StandardForm {
    pub real: Option<Part>,
    pub imag: Option<Part>,
}

impl StandardForm {
    pub fn zero() -> StandardForm {
        StandardForm::default()
    }

    pub fn new(real: Option<Part>, imag: Option<Part>) -> StandardForm {
        StandardForm { real, imag }
    }

    /// A binary standard form from signed exponent sets.
    pub fn from_exponents(
        real: Option<(Sign, &[i64])>,
        imag: Option<(Sign, &[i64])>,
    ) -> StandardForm {
        StandardForm {
            real: real.and_then(|(s, e)| Part::from_exponents(s, e.iter().copied())),
            imag: imag.and_then(|(s, e)| Part::from_exponents(s, e.iter().copied())),
        }
    }

    pub fn one() -> StandardForm {
        StandardForm::from_exponents(Some((Sign::Plus, &[0])), None)
    }

    pub(crate) fn from_sites_unchecked(sites: &BTreeMap<i64, SiteOccupancy>) -> StandardForm {
        let part = |family: Family| {
            let mut sign = Sign::Plus;
            let mut digits = BTreeMap::new();
            for (&j, occ) in sites {
                match occ.family(family) {
                    (0, 0) => {}
                    (p, 0) => {
                        digits.insert(j, p);
                    }
                    (_, m) => {
                        sign = Sign::Minus;
                        digits.insert(j, m);
                    }
                }
            }
            Part::new(sign, digits)
        };
        StandardForm {
            real: part(Family::Real),
            imag: part(Family::Imaginary),
        }
    }

    pub fn part(&self, family: Family) -> Option<&Part> {
        match family {
            Family::Real => self.real.as_ref(),
            Family::Imaginary => self.imag.as_ref(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.real.is_none() && self.imag.is_none()
    }

    /// Largest exponent over both components.
    pub fn leading_exponent(&self) -> Option<i64> {
        [self.real.as_ref(), self.imag.as_ref()]
            .into_iter()
            .flatten()
            .map(Part::leading_exponent)
            .max()
    }

    pub fn conjugate(&self) -> StandardForm {
        StandardForm {
            real: self.real.clone(),
            imag: self.imag.as_ref().map(Part::negated),
        }
    }

    /// Structural per-component order (see [`cmp_parts`]).
    pub fn cmp_component(&self, other: &StandardForm, family: Family) -> Ordering {
        cmp_parts(self.part(family), other.part(family))
    }

    /// Unfolds the form into a state with one system per digit unit.
    pub fn to_state(&self, statistics: Statistics, phase: Sign) -> NumberState {
        let mut sites: BTreeMap<i64, SiteOccupancy> = BTreeMap::new();
        for family in Family::BOTH {
            if let Some(part) = self.part(family) {
                let kind = SystemKind::new(family, part.sign);
                for (&j, &d) in &part.digits {
                    *sites.entry(j).or_default().count_mut(kind) = d;
                }
            }
        }
        NumberState::from_sites(sites, statistics, phase)
    }
}

impl fmt::Display for StandardForm {
    /// Same token syntax as [`NumberState`]; zero prints as `vac`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_state(Statistics::Boson, Sign::Plus))
    }
}

/// An explicit fermion creation operator `c†_{kind,h,j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FermionOp {
    pub kind: SystemKind,
    pub h: u64,
    pub j: i64,
}

impl FermionOp {
    /// Position key in canonical order within a family.
    pub fn canonical_key(&self) -> (i64, u8, std::cmp::Reverse<u64>) {
        let block = match self.kind.sign {
            Sign::Plus => 0,
            Sign::Minus => 1,
        };
        (self.j, block, std::cmp::Reverse(self.h))
    }
}

impl fmt::Display for FermionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[h={}]@{}", self.kind, self.h, self.j)
    }
}

/// Sign of the permutation that sorts `sequence` into canonical order,
/// counting only transpositions of same-family operators (the two families
/// commute with each other).
pub fn fermion_reorder_sign(sequence: &[FermionOp]) -> Result<Sign> {
    let mut inversions: u128 = 0;
    for family in Family::BOTH {
        let ops: Vec<&FermionOp> = sequence
            .iter()
            .filter(|op| op.kind.family == family)
            .collect();
        for (a, first) in ops.iter().enumerate() {
            for second in &ops[a + 1..] {
                match first.canonical_key().cmp(&second.canonical_key()) {
                    Ordering::Greater => inversions += 1,
                    Ordering::Equal => return Err(Error::PauliExclusion(first.to_string())),
                    Ordering::Less => {}
                }
            }
        }
    }
    Ok(Sign::of_count(inversions))
}
