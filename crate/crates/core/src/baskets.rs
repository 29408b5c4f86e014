//! Enumeration of admissible quotient-singularity baskets on combinatorially
//! minimal models of minimal general-type surfaces with `p_g = 0`.
//!
//! Candidates are multisets of singularity types whose exceptional curves
//! exactly fill the Picard-number budget `(10 - k2) - rho0`. Each candidate
//! runs through the filters in a fixed order (component budget, orbifold
//! BMY, determinant squareness, eps lattice embedding, knockouts) and every
//! verdict is recorded, so eliminations always carry a witness.

use num::{BigInt, One, Signed};
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::num::{fmt_rat, rat, rat_is_square, Rat};
use crate::qforms::{embedding_obstruction_diag, EmbeddingOutcome, QformError};
use crate::sing::{
    build_star_graph, classify, cyclic_dx2, dihedral_data, discrepancies, group_order, hj_det,
    BasketPoint, GroupOrder, MinimalGeneralType, SingError, SingTag,
};

#[derive(Debug, Error)]
pub enum BasketError {
    #[error("component budget {0} exceeds the supported maximum of 8")]
    BudgetTooLarge(usize),
    #[error("rho0 must be 1 or 2 (got {0})")]
    BadRho0(u32),
    #[error("num_sing must be at least 1")]
    NoPoints,
    #[error("malformed knockout pattern: {0}")]
    MalformedPattern(String),
    #[error(transparent)]
    Singularity(#[from] SingError),
    #[error(transparent)]
    Qform(#[from] QformError),
}

/// One admissible singularity type with its cached numerical data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateType {
    pub tag: SingTag,
    pub components: usize,
    pub dx2: Rat,
    pub order: GroupOrder,
    /// |det| of the exceptional lattice of this point.
    pub det_abs: BigInt,
    /// Diagonalized lattice entries (all negative).
    pub diag: Vec<Rat>,
}

impl CandidateType {
    fn sort_key(&self) -> (BigInt, u8, Vec<u64>) {
        let shape = match &self.tag {
            SingTag::Cyclic { string, .. } => string.clone(),
            SingTag::Dihedral { b, string, .. } => {
                let mut v = vec![*b];
                v.extend(string);
                v
            }
            SingTag::Toi { b, branches, .. } => {
                let mut v = vec![*b];
                for br in branches {
                    v.push(0);
                    v.extend(br);
                }
                v
            }
            _ => Vec::new(),
        };
        let rank = match &self.tag {
            SingTag::Cyclic { .. } => 0,
            SingTag::Dihedral { .. } => 1,
            SingTag::Toi { .. } => 2,
            _ => 3,
        };
        (self.order.lower_bound().clone(), rank, shape)
    }

    pub fn is_toi(&self) -> bool {
        matches!(self.tag, SingTag::Toi { .. })
    }

    /// The BMY load this point adds: `-dx2 + 3(1 - 1/|G|)`, using the order
    /// lower bound (so the load is a lower bound too).
    fn bmy_load(&self) -> Rat {
        let g = Rat::from_integer(self.order.lower_bound().clone());
        -self.dx2.clone() + rat(3) * (Rat::one() - g.recip())
    }

    fn from_chain(string: &[u64]) -> Result<Self, BasketError> {
        let canonical = {
            let mut rev = string.to_vec();
            rev.reverse();
            if rev < string.to_vec() {
                rev
            } else {
                string.to_vec()
            }
        };
        let (q, q1) = hj_det(&canonical)?;
        let (_, q1_rev) = {
            let mut rev = canonical.clone();
            rev.reverse();
            hj_det(&rev)?
        };
        let dx2 = cyclic_dx2(&canonical)?;
        let diag = crate::qforms::diagonalize_chain(&canonical)
            .expect("valid string diagonalizes")
            .entries;
        Ok(CandidateType {
            tag: SingTag::Cyclic { q: q.clone(), q1, q1_reversed: q1_rev, string: canonical.clone() },
            components: canonical.len(),
            dx2,
            order: GroupOrder::Exact(q.clone()),
            det_abs: q,
            diag,
        })
    }

    fn from_dihedral(b: u64, string: &[u64]) -> Result<Self, BasketError> {
        let data = dihedral_data(b, string)?;
        let (q, q1) = hj_det(string)?;
        let diag = star_tree_diagonal(b, &[&[2], &[2], string]);
        let tag = SingTag::Dihedral { b, string: string.to_vec(), q, q1 };
        let order = group_order(&tag)?;
        Ok(CandidateType {
            tag,
            components: string.len() + 3,
            dx2: data.dx2,
            order,
            det_abs: num::abs(data.det_rx),
            diag,
        })
    }

    fn from_toi(b: u64, branches: [&[u64]; 3]) -> Result<Self, BasketError> {
        let graph = build_star_graph(b, &branches)?;
        let kind = match classify(&graph)?.tag {
            SingTag::Toi { kind, .. } => kind,
            other => {
                return Err(BasketError::MalformedPattern(format!(
                    "branches do not form a T/O/I star: {other}"
                )))
            }
        };
        let dx2 = discrepancies(&graph)?.dx2;
        let diag = star_tree_diagonal(b, &branches);
        // leaf-to-root congruence is unit triangular: the product of the
        // diagonal entries is the lattice determinant on the nose
        let det: Rat = diag.iter().product();
        debug_assert!(det.denom().is_one());
        let tag = SingTag::Toi {
            kind,
            b,
            branches: [branches[0].to_vec(), branches[1].to_vec(), branches[2].to_vec()],
        };
        let order = group_order(&tag)?;
        Ok(CandidateType {
            tag,
            components: graph.curves.len(),
            dx2,
            order,
            det_abs: num::abs(det.numer().clone()),
            diag,
        })
    }
}

impl fmt::Display for CandidateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag)
    }
}

/// Orthogonal diagonal of a star lattice, built leaf-to-root: each vertex
/// contributes `-m_v - sum over processed children of 1/d_child`. This is
/// the congruence diagonalization along a unit-triangular basis change, so
/// the entry product equals the determinant exactly.
fn star_tree_diagonal(b: u64, branches: &[&[u64]]) -> Vec<Rat> {
    let mut entries = Vec::new();
    let mut center = rat(-(b as i64));
    for branch in branches {
        let mut prev: Option<Rat> = None;
        for &m in branch.iter().rev() {
            let mut d = rat(-(m as i64));
            if let Some(p) = &prev {
                d -= p.recip();
            }
            entries.push(d.clone());
            prev = Some(d);
        }
        if let Some(p) = prev {
            center -= p.recip();
        }
    }
    entries.push(center);
    entries
}

fn strings_with_len_and_cap(len: usize, cap: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    if len == 0 || cap < 2 {
        return out;
    }
    let mut cur = vec![2u64; len];
    loop {
        out.push(cur.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < cap {
                cur[i] += 1;
                for v in cur.iter_mut().skip(i + 1) {
                    *v = 2;
                }
                break;
            }
        }
    }
}

fn strings_with_det(q: u64, max_len: usize, cap: u64) -> Vec<Vec<u64>> {
    // every entry of a chain divides into its determinant bound: det >= m_i,
    // and a chain of l nodes already has det l + 1
    let cap = cap.min(q);
    let max_len = max_len.min(q.saturating_sub(1) as usize);
    let mut out = Vec::new();
    for len in 1..=max_len {
        for s in strings_with_len_and_cap(len, cap) {
            if let Ok((det, _)) = hj_det(&s) {
                if det == BigInt::from(q) {
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Strings with entries in `2..=cap` and total excess `sum(m_i - 2)` at
/// most `max_excess`, any length up to `max_len`.
fn strings_with_bounded_excess(max_len: usize, cap: u64, max_excess: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur: Vec<u64> = Vec::new();
    fn rec(
        max_len: usize,
        cap: u64,
        excess_left: u64,
        cur: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max_len {
            return;
        }
        let mut m = 2u64;
        while m <= cap && m - 2 <= excess_left {
            cur.push(m);
            rec(max_len, cap, excess_left - (m - 2), cur, out);
            cur.pop();
            m += 1;
        }
    }
    rec(max_len, cap, max_excess, &mut cur, &mut out);
    out
}

/// Pool of candidate types whose BMY load can possibly stay within
/// `load_bound`. The entry-sum bound is a necessary condition for the load
/// bound (for chains `load > excess - 1/2`, for stars `load > excess +
/// (b - 2) - 1`), so filtering the result by the exact load afterwards
/// yields the same pool as filtering the full type list would, without
/// materializing it.
fn viable_pool(
    max_components: usize,
    m_cap: u64,
    load_bound: &Rat,
) -> Result<Vec<CandidateType>, BasketError> {
    if max_components > 8 {
        return Err(BasketError::BudgetTooLarge(max_components));
    }
    let mut out = Vec::new();
    if load_bound.is_negative() {
        return Ok(out);
    }
    let slack: u64 = (load_bound.ceil().to_integer() + BigInt::one())
        .try_into()
        .unwrap_or(0);
    let mut seen_chains: std::collections::BTreeSet<Vec<u64>> = std::collections::BTreeSet::new();
    for s in strings_with_bounded_excess(max_components, m_cap, slack) {
        let mut rev = s.clone();
        rev.reverse();
        let canon = if rev < s { rev } else { s };
        if seen_chains.insert(canon.clone()) {
            out.push(CandidateType::from_chain(&canon)?);
        }
    }
    if max_components >= 4 {
        for b in 2..=m_cap {
            if b - 2 > slack {
                break;
            }
            for s in strings_with_bounded_excess(max_components - 3, m_cap, slack - (b - 2)) {
                out.push(CandidateType::from_dihedral(b, &s)?);
            }
        }
        let det_strings: BTreeMap<u64, Vec<Vec<u64>>> = [3u64, 4, 5]
            .into_iter()
            .map(|q| (q, strings_with_det(q, max_components.saturating_sub(3), m_cap)))
            .collect();
        for (q2, q3) in [(3u64, 3u64), (3, 4), (3, 5)] {
            for b in 2..=m_cap {
                if b - 2 > slack {
                    break;
                }
                for s2 in &det_strings[&q2] {
                    let room = max_components.saturating_sub(2 + s2.len());
                    for s3 in det_strings[&q3].iter().filter(|s3| s3.len() <= room) {
                        if q2 == q3 && *s3 < *s2 {
                            continue;
                        }
                        out.push(CandidateType::from_toi(b, [&[2], s2, s3])?);
                    }
                }
            }
        }
    }
    out.sort_by_key(CandidateType::sort_key);
    Ok(out)
}

/// All singularity types fitting within `max_components` exceptional
/// curves: cyclic chains up to reversal, dihedral stars, and T/O/I stars
/// (the latter carry order lower bounds only). Entries and central weights
/// are capped at `m_cap`.
pub fn candidate_types(
    max_components: usize,
    m_cap: u64,
) -> Result<Vec<CandidateType>, BasketError> {
    use std::sync::Mutex;
    static CACHE: Mutex<Option<BTreeMap<(usize, u64), Vec<CandidateType>>>> = Mutex::new(None);
    if max_components > 8 {
        return Err(BasketError::BudgetTooLarge(max_components));
    }
    if let Some(cached) = CACHE
        .lock()
        .unwrap()
        .get_or_insert_with(BTreeMap::new)
        .get(&(max_components, m_cap))
    {
        return Ok(cached.clone());
    }
    let mut out: Vec<CandidateType> = Vec::new();
    let mut seen_chains: std::collections::BTreeSet<Vec<u64>> = std::collections::BTreeSet::new();
    for len in 1..=max_components {
        for s in strings_with_len_and_cap(len, m_cap) {
            let mut rev = s.clone();
            rev.reverse();
            let canon = if rev < s { rev } else { s };
            if seen_chains.insert(canon.clone()) {
                out.push(CandidateType::from_chain(&canon)?);
            }
        }
    }
    if max_components >= 4 {
        for b in 2..=m_cap {
            for len in 1..=(max_components - 3) {
                for s in strings_with_len_and_cap(len, m_cap) {
                    out.push(CandidateType::from_dihedral(b, &s)?);
                }
            }
        }
        // T/O/I: branch determinant triples (2,3,3), (2,3,4), (2,3,5).
        let det_strings: BTreeMap<u64, Vec<Vec<u64>>> = [3u64, 4, 5]
            .into_iter()
            .map(|q| (q, strings_with_det(q, max_components.saturating_sub(3), m_cap)))
            .collect();
        for (q2, q3) in [(3u64, 3u64), (3, 4), (3, 5)] {
            for b in 2..=m_cap {
                for s2 in &det_strings[&q2] {
                    let room = max_components.saturating_sub(2 + s2.len());
                    for s3 in det_strings[&q3].iter().filter(|s3| s3.len() <= room) {
                        // two branches of equal determinant are interchangeable
                        if q2 == q3 && *s3 < *s2 {
                            continue;
                        }
                        out.push(CandidateType::from_toi(b, [&[2], s2, s3])?);
                    }
                }
            }
        }
    }
    out.sort_by_key(CandidateType::sort_key);
    CACHE
        .lock()
        .unwrap()
        .get_or_insert_with(BTreeMap::new)
        .insert((max_components, m_cap), out.clone());
    Ok(out)
}

/// A multiset of singularity types proposed for a minimal model with the
/// given `k2` and Picard number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasketCandidate {
    pub k2: i64,
    pub rho0: u32,
    pub points: Vec<CandidateType>,
}

impl BasketCandidate {
    pub fn k0_squared(&self) -> Rat {
        rat(self.k2) - self.points.iter().map(|p| p.dx2.clone()).sum::<Rat>()
    }

    pub fn components(&self) -> usize {
        self.points.iter().map(|p| p.components).sum()
    }

    pub fn contains_toi(&self) -> bool {
        self.points.iter().any(CandidateType::is_toi)
    }

    /// Order tuple in the style `(2^4,3,8)`, ascending; T/O/I orders are
    /// written with a trailing `+` to mark the lower bound.
    pub fn order_tuple(&self) -> String {
        let mut counts: BTreeMap<(BigInt, bool), usize> = BTreeMap::new();
        for p in &self.points {
            let key = (p.order.lower_bound().clone(), !p.order.is_exact());
            *counts.entry(key).or_insert(0) += 1;
        }
        let parts: Vec<String> = counts
            .iter()
            .map(|((o, bound), c)| {
                let o = if *bound { format!("{o}+") } else { o.to_string() };
                if *c == 1 {
                    o
                } else {
                    format!("{o}^{c}")
                }
            })
            .collect();
        format!("({})", parts.join(","))
    }
}

impl fmt::Display for BasketCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut groups: Vec<(String, usize)> = Vec::new();
        for p in &self.points {
            let s = p.to_string();
            match groups.last_mut() {
                Some((name, n)) if *name == s => *n += 1,
                _ => groups.push((s, 1)),
            }
        }
        let body: Vec<String> = groups
            .into_iter()
            .map(|(name, n)| if n == 1 { name } else { format!("{n}x{name}") })
            .collect();
        write!(f, "k2={} rho0={}: {}", self.k2, self.rho0, body.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FilterName {
    ComponentBudget,
    Bmy,
    DetSquare,
    EpsEmbedding,
    Knockout,
}

impl fmt::Display for FilterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterName::ComponentBudget => write!(f, "component-budget"),
            FilterName::Bmy => write!(f, "bmy"),
            FilterName::DetSquare => write!(f, "det-square"),
            FilterName::EpsEmbedding => write!(f, "eps-embedding"),
            FilterName::Knockout => write!(f, "knockout"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterVerdict {
    pub filter: FilterName,
    pub pass: bool,
    pub witness: String,
}

#[derive(Debug, Clone)]
pub struct FilterTrace {
    pub candidate: BasketCandidate,
    pub verdicts: Vec<FilterVerdict>,
    pub survived: bool,
}

/// Externally justified exclusions. Every entry carries its citation.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct KnockoutList {
    pub entries: Vec<KnockoutEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct KnockoutEntry {
    pub cite: String,
    pub pattern: BasketPattern,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasketPattern {
    #[serde(default)]
    pub rho0: Option<u32>,
    #[serde(default)]
    pub k2: Option<i64>,
    #[serde(default)]
    pub points: Option<Vec<PointPattern>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum PointPattern {
    #[serde(rename = "chain")]
    Chain(Vec<u64>),
    #[serde(rename = "star")]
    Star { b: u64, branch: Vec<u64> },
}

impl KnockoutList {
    pub fn from_json(text: &str) -> Result<Self, BasketError> {
        let entries: Vec<KnockoutEntry> = serde_json::from_str(text)
            .map_err(|e| BasketError::MalformedPattern(e.to_string()))?;
        let list = KnockoutList { entries };
        for e in &list.entries {
            if e.cite.trim().is_empty() {
                return Err(BasketError::MalformedPattern(
                    "knockout entry without citation".into(),
                ));
            }
            if let Some(points) = &e.pattern.points {
                for p in points {
                    if let PointPattern::Chain(s) = p {
                        hj_det(s).map_err(|err| BasketError::MalformedPattern(err.to_string()))?;
                    }
                }
            }
        }
        Ok(list)
    }
}

fn point_matches(pattern: &PointPattern, point: &CandidateType) -> bool {
    match (pattern, &point.tag) {
        (PointPattern::Chain(want), SingTag::Cyclic { string, .. }) => {
            let mut rev = want.clone();
            rev.reverse();
            *string == *want || *string == rev
        }
        (PointPattern::Star { b, branch }, SingTag::Dihedral { b: got_b, string, .. }) => {
            b == got_b && branch == string
        }
        _ => false,
    }
}

fn pattern_matches(pattern: &BasketPattern, candidate: &BasketCandidate) -> bool {
    if pattern.rho0.is_some_and(|r| r != candidate.rho0) {
        return false;
    }
    if pattern.k2.is_some_and(|k| k != candidate.k2) {
        return false;
    }
    let Some(points) = &pattern.points else {
        return true;
    };
    if points.len() != candidate.points.len() {
        return false;
    }
    // multiset match: claim each candidate point once
    let mut used = vec![false; candidate.points.len()];
    'outer: for pat in points {
        for (i, point) in candidate.points.iter().enumerate() {
            if !used[i] && point_matches(pat, point) {
                used[i] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Pattern-matched removal; removals report the citation that justified
/// them.
pub fn apply_knockouts<'a>(
    candidates: &[BasketCandidate],
    list: &'a KnockoutList,
) -> (Vec<BasketCandidate>, Vec<(BasketCandidate, &'a str)>) {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for c in candidates {
        match list.entries.iter().find(|e| pattern_matches(&e.pattern, c)) {
            Some(e) => removed.push((c.clone(), e.cite.as_str())),
            None => kept.push(c.clone()),
        }
    }
    (kept, removed)
}

#[derive(Debug, Clone)]
pub struct EnumOptions {
    pub k2_min: i64,
    pub k2_max: i64,
    pub m_cap: u64,
    pub knockouts: KnockoutList,
    pub jobs: Option<usize>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            k2_min: 1,
            k2_max: 9,
            m_cap: 12,
            knockouts: KnockoutList::default(),
            jobs: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub rho0: u32,
    pub num_sing: usize,
    /// Candidates passing every filter, with exact group orders throughout.
    pub survivors: Vec<BasketCandidate>,
    /// Passing candidates containing a T/O/I point: their exact orders are
    /// not derivable here, so they are reported separately rather than
    /// merged into the certified list.
    pub needs_external_data: Vec<BasketCandidate>,
    pub traces: Vec<FilterTrace>,
    pub generated: usize,
    /// Some enumerated type has an entry at the cap; raising `m_cap` could
    /// enlarge the candidate pool.
    pub cap_touched: bool,
    /// Enumerations below the validated range (four points for Picard
    /// number one, five for two) run fine but are not certified results.
    pub validated: bool,
}

fn non_cyclic_limit_ok(rho0: u32, num_sing: usize, non_cyclic: usize) -> bool {
    match rho0 {
        1 => {
            if num_sing >= 2 {
                non_cyclic <= 1
            } else {
                non_cyclic <= 2
            }
        }
        _ => {
            if num_sing >= 5 {
                non_cyclic == 0
            } else {
                non_cyclic <= 1
            }
        }
    }
}

fn run_filters(
    candidate: &BasketCandidate,
    num_sing: usize,
    knockouts: &KnockoutList,
) -> FilterTrace {
    let mut verdicts = Vec::new();
    let ctx = MinimalGeneralType { k2: candidate.k2 };

    // 1. component budget and structural limits on non-cyclic points
    let non_cyclic = candidate.points.iter().filter(|p| !matches!(p.tag, SingTag::Cyclic { .. })).count();
    let budget_ok = non_cyclic_limit_ok(candidate.rho0, num_sing, non_cyclic);
    verdicts.push(FilterVerdict {
        filter: FilterName::ComponentBudget,
        pass: budget_ok,
        witness: format!(
            "{} components for budget {}, {} non-cyclic point(s)",
            candidate.components(),
            (10 - candidate.k2) - candidate.rho0 as i64,
            non_cyclic
        ),
    });

    // 2. orbifold BMY with exact K_0^2
    let points: Vec<BasketPoint> = candidate
        .points
        .iter()
        .map(|p| BasketPoint { tag: p.tag.clone(), dx2: p.dx2.clone() })
        .collect();
    let bmy = crate::sing::bmy_check(ctx, candidate.rho0, &points)
        .expect("enumerated tags have group orders");
    verdicts.push(FilterVerdict {
        filter: FilterName::Bmy,
        pass: bmy.pass,
        witness: format!(
            "K0^2 = {}, 3*e_orb {} {}",
            fmt_rat(&candidate.k0_squared()),
            if bmy.used_order_bound { "<=" } else { "=" },
            fmt_rat(&(candidate.k0_squared() + bmy.margin.clone())),
        ),
    });

    // 3. determinant squareness
    let det_r: BigInt = candidate.points.iter().map(|p| p.det_abs.clone()).product();
    let det_value = match candidate.rho0 {
        1 => Rat::from_integer(det_r.clone()) * candidate.k0_squared(),
        _ => Rat::from_integer(det_r.clone()),
    };
    let det_ok = rat_is_square(&det_value.abs());
    verdicts.push(FilterVerdict {
        filter: FilterName::DetSquare,
        pass: det_ok,
        witness: format!("|det| = {}", fmt_rat(&det_value.abs())),
    });

    // 4. eps lattice embedding
    let mut entries = Vec::new();
    for p in &candidate.points {
        entries.extend(p.diag.iter().cloned());
    }
    let diag = crate::qforms::DiagonalForm::new(entries).expect("negative entries");
    let eps = embedding_obstruction_diag(
        &diag,
        &candidate.k0_squared(),
        candidate.k2,
        candidate.rho0,
        1,
    )
    .expect("ranks match by construction");
    let (eps_ok, eps_witness) = match &eps {
        EmbeddingOutcome::Pass => (true, "embeds at every checked place".to_string()),
        EmbeddingOutcome::Fail(reason) => (false, reason.to_string()),
    };
    verdicts.push(FilterVerdict {
        filter: FilterName::EpsEmbedding,
        pass: eps_ok,
        witness: eps_witness,
    });

    // 5. knockouts
    let hit = knockouts.entries.iter().find(|e| pattern_matches(&e.pattern, candidate));
    verdicts.push(FilterVerdict {
        filter: FilterName::Knockout,
        pass: hit.is_none(),
        witness: hit.map_or_else(|| "no pattern matched".to_string(), |e| e.cite.clone()),
    });

    let survived = verdicts.iter().all(|v| v.pass);
    FilterTrace { candidate: candidate.clone(), verdicts, survived }
}

/// Enumerates baskets of `num_sing` singular points for every `k2` in the
/// requested range, applying the filter pipeline to each candidate.
///
/// The candidate pool is restricted per point by the necessary condition
/// `k2 + load(point) + (num_sing - 1) * load(A1) <= 3(2 + rho0)` derived
/// from the orbifold BMY inequality (every other point carries at least the
/// load of a node); this keeps the composition finite without discarding
/// anything the exact BMY filter would keep.
pub fn enumerate_baskets(
    rho0: u32,
    num_sing: usize,
    options: &EnumOptions,
) -> Result<EnumerationResult, BasketError> {
    if !(1..=2).contains(&rho0) {
        return Err(BasketError::BadRho0(rho0));
    }
    if num_sing == 0 {
        return Err(BasketError::NoPoints);
    }
    let mut generated: Vec<BasketCandidate> = Vec::new();
    let mut cap_touched = false;
    let min_load = crate::num::ratio(3, 2); // a node: dx2 = 0, |G| = 2
    for k2 in options.k2_min.max(1)..=options.k2_max.min(9) {
        let budget = (10 - k2) - rho0 as i64;
        if budget < num_sing as i64 || budget > 8 {
            continue;
        }
        let budget = budget as usize;
        let max_per_point = budget - (num_sing - 1);
        let load_bound = rat(3) * rat(2 + rho0 as i64)
            - rat(k2)
            - rat(num_sing as i64 - 1) * &min_load;
        let pool: Vec<CandidateType> = viable_pool(max_per_point, options.m_cap, &load_bound)?
            .into_iter()
            .filter(|t| t.bmy_load() <= load_bound)
            .collect();
        cap_touched = cap_touched || pool.iter().any(|t| type_touches_cap(t, options.m_cap));
        // multisets of `num_sing` pool entries with components summing to
        // the budget, by non-decreasing pool index
        let mut stack: Vec<usize> = Vec::new();
        compose(&pool, 0, num_sing, budget, &mut stack, &mut |chosen| {
            generated.push(BasketCandidate {
                k2,
                rho0,
                points: chosen.iter().map(|&i| pool[i].clone()).collect(),
            });
        });
    }
    for c in &mut generated {
        c.points.sort_by_key(CandidateType::sort_key);
    }
    generated.sort_by(|a, b| {
        let ka: Vec<_> = a.points.iter().map(CandidateType::sort_key).collect();
        let kb: Vec<_> = b.points.iter().map(CandidateType::sort_key).collect();
        (a.k2, ka).cmp(&(b.k2, kb))
    });

    let knockouts = &options.knockouts;
    let run = || -> Vec<FilterTrace> {
        generated
            .par_iter()
            .map(|c| run_filters(c, num_sing, knockouts))
            .collect()
    };
    let traces: Vec<FilterTrace> = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    };

    let mut survivors = Vec::new();
    let mut needs_external_data = Vec::new();
    for t in &traces {
        if t.survived {
            if t.candidate.contains_toi() {
                needs_external_data.push(t.candidate.clone());
            } else {
                survivors.push(t.candidate.clone());
            }
        }
    }
    let validated = match rho0 {
        1 => num_sing >= 4,
        _ => num_sing >= 5,
    };
    Ok(EnumerationResult {
        rho0,
        num_sing,
        survivors,
        needs_external_data,
        generated: traces.len(),
        traces,
        cap_touched,
        validated,
    })
}

fn type_touches_cap(t: &CandidateType, cap: u64) -> bool {
    match &t.tag {
        SingTag::Cyclic { string, .. } => string.contains(&cap),
        SingTag::Dihedral { b, string, .. } => *b == cap || string.contains(&cap),
        SingTag::Toi { b, branches, .. } => {
            *b == cap || branches.iter().any(|br| br.contains(&cap))
        }
        _ => false,
    }
}

fn compose(
    pool: &[CandidateType],
    from: usize,
    left: usize,
    budget: usize,
    stack: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if left == 0 {
        if budget == 0 {
            emit(stack);
        }
        return;
    }
    for i in from..pool.len() {
        let c = pool[i].components;
        // every remaining point needs at least one component
        if c > budget || budget - c < left - 1 {
            continue;
        }
        stack.push(i);
        compose(pool, i, left - 1, budget - c, stack, emit);
        stack.pop();
    }
}
