//! Classification of contracted curve configurations and their numerics:
//! discrepancies, D_x^2, Hirzebruch-Jung strings, local group orders, and the
//! orbifold Bogomolov-Miyaoka-Yau check.
//!
//! The linear discrepancy solver is the reference point here: every closed
//! form (chain and star formulas) is tested against it.

use num::{BigInt, One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::num::{rat, Rat};
use crate::surface::CurveRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SingError {
    #[error("dual graph must be connected")]
    Disconnected,
    #[error("dual graph must have a negative definite intersection matrix")]
    NotNegativeDefinite,
    #[error("Hirzebruch-Jung string entries must be >= 2 (got {0})")]
    StringEntryTooSmall(u64),
    #[error("Hirzebruch-Jung string must be nonempty")]
    EmptyString,
    #[error("invalid cyclic type ({q}, {q1}): need 1 <= q1 < q and gcd = 1")]
    InvalidCyclicType { q: String, q1: String },
    #[error("central curve weight must be >= 2 (got {0})")]
    CenterTooSmall(u64),
    #[error("no finite local fundamental group for this singularity type")]
    InfiniteLocalGroup,
    #[error("orbifold invariants require the minimal general type p_g = q = 0 context")]
    MissingContext,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Connected, negative-definite configuration of curves to be contracted.
#[derive(Debug, Clone)]
pub struct DualGraph {
    pub curves: Vec<CurveRecord>,
    pub gram: QMatrix,
}

impl DualGraph {
    pub fn new(curves: Vec<CurveRecord>, gram: QMatrix) -> Result<Self, SingError> {
        assert_eq!(gram.rows(), curves.len());
        let graph = DualGraph { curves, gram };
        if !graph.is_connected() {
            return Err(SingError::Disconnected);
        }
        if !graph.gram.is_negative_definite().map_err(|e| SingError::Internal(e.to_string()))? {
            return Err(SingError::NotNegativeDefinite);
        }
        Ok(graph)
    }

    fn is_connected(&self) -> bool {
        let n = self.curves.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && i != j && !self.gram.get(i, j).is_zero() {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.curves.len())
            .filter(|&j| j != i && !self.gram.get(i, j).is_zero())
            .collect()
    }
}

/// Discrepancy data over one singular point: `D_x = sum a_i E_i` with
/// `K . E_i = -D_x . E_i` for every exceptional curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancies {
    pub coefficients: Vec<Rat>,
    pub dx2: Rat,
}

pub fn discrepancies(graph: &DualGraph) -> Result<Discrepancies, SingError> {
    let rhs: Vec<Rat> = graph
        .curves
        .iter()
        .map(|c| -rat(2 * c.genus as i64 - 2 - c.self_intersection))
        .collect();
    let coefficients = graph
        .gram
        .solve(&rhs)
        .map_err(|e| SingError::Internal(format!("discrepancy system: {e}")))?;
    // D_x . D_x = a^T (G a) = a . rhs
    let dx2 = coefficients.iter().zip(&rhs).map(|(a, b)| a * b).sum();
    Ok(Discrepancies { coefficients, dx2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum LcClass {
    LogTerminal,
    LogCanonical,
    Worse,
}

impl LcClass {
    fn from_coefficients(coeffs: &[Rat]) -> LcClass {
        let one = Rat::one();
        if coeffs.iter().all(|a| *a < one) {
            LcClass::LogTerminal
        } else if coeffs.iter().all(|a| *a <= one) {
            LcClass::LogCanonical
        } else {
            LcClass::Worse
        }
    }
}

impl fmt::Display for LcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcClass::LogTerminal => write!(f, "log-terminal"),
            LcClass::LogCanonical => write!(f, "log-canonical"),
            LcClass::Worse => write!(f, "worse-than-log-canonical"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ToiKind {
    Tetrahedral,
    Octahedral,
    Icosahedral,
}

/// Shape of one contracted configuration. Cyclic types carry both chain
/// labels `(q, q1)` and `(q, q1')` obtained by reading the string from
/// either end; the two describe the same singularity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SingTag {
    Cyclic { q: BigInt, q1: BigInt, q1_reversed: BigInt, string: Vec<u64> },
    Dihedral { b: u64, string: Vec<u64>, q: BigInt, q1: BigInt },
    Toi { kind: ToiKind, b: u64, branches: [Vec<u64>; 3] },
    SimpleElliptic { self_intersection: i64 },
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularityType {
    pub tag: SingTag,
    pub lc_class: LcClass,
}

impl fmt::Display for SingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingTag::Cyclic { q, q1, string, .. } => {
                if *q1 == q - BigInt::one() {
                    write!(f, "A{}", q - BigInt::one())
                } else {
                    write!(f, "1/{q}(1,{q1})[{}]", join_string(string))
                }
            }
            SingTag::Dihedral { b, string, q, q1 } => {
                write!(f, "D(b={b};[{}])=D{{{q},{q1}}}", join_string(string))
            }
            SingTag::Toi { kind, b, branches } => {
                let k = match kind {
                    ToiKind::Tetrahedral => "T",
                    ToiKind::Octahedral => "O",
                    ToiKind::Icosahedral => "I",
                };
                write!(
                    f,
                    "{k}(b={b};[{}],[{}],[{}])",
                    join_string(&branches[0]),
                    join_string(&branches[1]),
                    join_string(&branches[2])
                )
            }
            SingTag::SimpleElliptic { self_intersection } => {
                write!(f, "Ell({self_intersection})")
            }
            SingTag::Other => write!(f, "Other"),
        }
    }
}

fn join_string(s: &[u64]) -> String {
    s.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Determinant recurrence for a Hirzebruch-Jung string: `d_k = m_k d_{k-1} -
/// d_{k-2}` with `d_0 = 1`. Returns `(q, q1)` where `q1` drops the first
/// entry; `1/q(1,q1)` is the cyclic singularity the chain resolves.
pub fn hj_det(string: &[u64]) -> Result<(BigInt, BigInt), SingError> {
    if string.is_empty() {
        return Err(SingError::EmptyString);
    }
    if let Some(&bad) = string.iter().find(|&&m| m < 2) {
        return Err(SingError::StringEntryTooSmall(bad));
    }
    Ok((chain_det(string), chain_det(&string[1..])))
}

fn chain_det(string: &[u64]) -> BigInt {
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    for &m in string {
        let next = BigInt::from(m) * &cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Ceiling-division continued fraction expansion, inverse to `hj_det`.
pub fn hj_expand(q: &BigInt, q1: &BigInt) -> Result<Vec<u64>, SingError> {
    use num::Integer;
    let bad = || SingError::InvalidCyclicType { q: q.to_string(), q1: q1.to_string() };
    if q1 < &BigInt::one() || q1 >= q || !q.gcd(q1).is_one() {
        return Err(bad());
    }
    let mut out = Vec::new();
    let (mut a, mut b) = (q.clone(), q1.clone());
    while !b.is_zero() {
        // m = ceil(a/b), next pair (b, m*b - a)
        let m = (&a + &b - BigInt::one()) / &b;
        let next = &m * &b - &a;
        let m_u64: u64 = (&m)
            .try_into()
            .map_err(|_| SingError::Internal(format!("string entry {m} exceeds u64")))?;
        out.push(m_u64);
        a = b;
        b = next;
    }
    Ok(out)
}

/// Closed form for `D_x^2` of a cyclic chain:
/// one curve gives `-(m-2)^2/m`; longer chains give
/// `2l - sum(m_i) + 2 - (q_1 + q_l + 2)/q`.
pub fn cyclic_dx2(string: &[u64]) -> Result<Rat, SingError> {
    let (q, q1) = hj_det(string)?;
    let l = string.len();
    if l == 1 {
        let m = rat(string[0] as i64);
        let t = &m - rat(2);
        return Ok(-(&t * &t) / m);
    }
    let ql = chain_det(&string[..l - 1]);
    let sum: i64 = string.iter().map(|&m| m as i64).sum();
    Ok(rat(2 * l as i64 - sum + 2)
        - Rat::new(q1 + ql + BigInt::from(2), q))
}

/// Builds the explicit dual graph of a chain of rational curves.
pub fn build_chain_graph(string: &[u64]) -> Result<DualGraph, SingError> {
    if string.is_empty() {
        return Err(SingError::EmptyString);
    }
    if let Some(&bad) = string.iter().find(|&&m| m < 2) {
        return Err(SingError::StringEntryTooSmall(bad));
    }
    let n = string.len();
    let mut gram = QMatrix::zero(n, n);
    let mut curves = Vec::with_capacity(n);
    for (i, &m) in string.iter().enumerate() {
        *gram.get_mut(i, i) = rat(-(m as i64));
        if i + 1 < n {
            *gram.get_mut(i, i + 1) = rat(1);
            *gram.get_mut(i + 1, i) = rat(1);
        }
        curves.push(CurveRecord {
            name: format!("E{}", i + 1),
            genus: 0,
            self_intersection: -(m as i64),
        });
    }
    DualGraph::new(curves, gram)
}

/// Builds a star: one central `-b` curve meeting the first curve of each
/// branch chain.
pub fn build_star_graph(b: u64, branches: &[&[u64]]) -> Result<DualGraph, SingError> {
    if b < 2 {
        return Err(SingError::CenterTooSmall(b));
    }
    for branch in branches {
        if branch.is_empty() {
            return Err(SingError::EmptyString);
        }
        if let Some(&bad) = branch.iter().find(|&&m| m < 2) {
            return Err(SingError::StringEntryTooSmall(bad));
        }
    }
    let n = 1 + branches.iter().map(|s| s.len()).sum::<usize>();
    let mut gram = QMatrix::zero(n, n);
    let mut curves = Vec::with_capacity(n);
    *gram.get_mut(0, 0) = rat(-(b as i64));
    curves.push(CurveRecord { name: "E0".into(), genus: 0, self_intersection: -(b as i64) });
    let mut at = 1;
    for branch in branches {
        for (k, &m) in branch.iter().enumerate() {
            let i = at + k;
            *gram.get_mut(i, i) = rat(-(m as i64));
            let prev = if k == 0 { 0 } else { i - 1 };
            *gram.get_mut(i, prev) = rat(1);
            *gram.get_mut(prev, i) = rat(1);
            curves.push(CurveRecord {
                name: format!("E{i}"),
                genus: 0,
                self_intersection: -(m as i64),
            });
        }
        at += branch.len();
    }
    DualGraph::new(curves, gram)
}

/// Closed forms for a dihedral star `<b; 2; 2; [m_1..m_l]>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DihedralData {
    pub det_rx: BigInt,
    /// Discrepancy coefficient at the far end of the long branch.
    pub a_end: Rat,
    pub dx2: Rat,
}

pub fn dihedral_data(b: u64, string: &[u64]) -> Result<DihedralData, SingError> {
    if b < 2 {
        return Err(SingError::CenterTooSmall(b));
    }
    let (q, q1) = hj_det(string)?;
    let l = string.len();
    let b_i = BigInt::from(b);
    if l == 1 {
        let m = BigInt::from(string[0]);
        // det = 4m(b - 1 - 1/m) = 4(m(b-1) - 1)
        let det_rx = BigInt::from(4) * (&m * (&b_i - 1) - 1);
        let denom = Rat::from_integer(&m * (&b_i - 1) - 1);
        let a0 = Rat::from_integer(&m * (&b_i - 1) - 2) / &denom;
        let a12 = &a0 / rat(2);
        let a3 = Rat::from_integer(&m * &b_i - &m - &b_i) / &denom;
        let m_r = Rat::from_integer(m);
        let b_r = rat(b as i64);
        let dx2 = -(&b_r * &a0 * &a0)
            - rat(2) * &a12 * &a12
            - rat(2) * &a12 * &a12
            - &m_r * &a3 * &a3
            + rat(2) * &a0 * (&a12 + &a12 + &a3);
        return Ok(DihedralData { det_rx, a_end: a3, dx2 });
    }
    let sign = if (l + 3) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let det_rx = sign * BigInt::from(4) * ((&b_i - 1) * &q - &q1);
    // q_l trims the last entry, q_{1,l} trims both ends.
    let ql = chain_det(&string[..l - 1]);
    let q1l = chain_det(&string[1..l - 1]);
    let a_end = Rat::one()
        - Rat::new((&b_i - 1) * &ql - &q1l, (&b_i - 1) * &q - &q1);
    let sum: i64 = string.iter().map(|&m| m as i64).sum();
    let dx2 = rat(2 * l as i64 - sum) + &a_end - rat(b as i64 - 2);
    Ok(DihedralData { det_rx, a_end, dx2 })
}

/// Order of the local fundamental group: exact for cyclic and dihedral
/// types, a sound lower bound for the tetrahedral/octahedral/icosahedral
/// families (24m, 48m, 120m with m >= 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupOrder {
    Exact(BigInt),
    AtLeast(BigInt),
}

impl GroupOrder {
    /// Smallest order compatible with the data.
    pub fn lower_bound(&self) -> &BigInt {
        match self {
            GroupOrder::Exact(n) | GroupOrder::AtLeast(n) => n,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, GroupOrder::Exact(_))
    }
}

pub fn group_order(tag: &SingTag) -> Result<GroupOrder, SingError> {
    match tag {
        SingTag::Cyclic { q, .. } => Ok(GroupOrder::Exact(q.clone())),
        SingTag::Dihedral { b, q, q1, .. } => {
            let b_i = BigInt::from(*b);
            Ok(GroupOrder::Exact(BigInt::from(4) * q * ((&b_i - 1) * q - q1)))
        }
        SingTag::Toi { kind, .. } => {
            let base = match kind {
                ToiKind::Tetrahedral => 24,
                ToiKind::Octahedral => 48,
                ToiKind::Icosahedral => 120,
            };
            Ok(GroupOrder::AtLeast(BigInt::from(base)))
        }
        SingTag::SimpleElliptic { .. } | SingTag::Other => Err(SingError::InfiniteLocalGroup),
    }
}

/// Recognizes the shape of a connected negative-definite configuration.
/// Chains of rational curves are cyclic quotients; three-branch stars are
/// dihedral or T/O/I according to branch determinants; one curve of genus 1
/// is simple elliptic; everything else is reported as `Other`.
pub fn classify(graph: &DualGraph) -> Result<SingularityType, SingError> {
    let d = discrepancies(graph)?;
    let lc_class = LcClass::from_coefficients(&d.coefficients);
    let tag = classify_tag(graph)?;
    Ok(SingularityType { tag, lc_class })
}

fn classify_tag(graph: &DualGraph) -> Result<SingTag, SingError> {
    let n = graph.curves.len();
    if n == 1 && graph.curves[0].genus == 1 {
        return Ok(SingTag::SimpleElliptic {
            self_intersection: graph.curves[0].self_intersection,
        });
    }
    if graph.curves.iter().any(|c| c.genus != 0) {
        return Ok(SingTag::Other);
    }
    // Quotient resolution graphs have all edges transversal single points.
    for i in 0..n {
        for j in i + 1..n {
            let e = graph.gram.get(i, j);
            if !e.is_zero() && *e != rat(1) {
                return Ok(SingTag::Other);
            }
        }
    }
    if graph.curves.iter().any(|c| c.self_intersection > -2) {
        return Ok(SingTag::Other);
    }
    let degrees: Vec<usize> = (0..n).map(|i| graph.neighbors(i).len()).collect();
    let edge_count: usize = degrees.iter().sum::<usize>() / 2;
    if edge_count != n - 1 {
        return Ok(SingTag::Other); // connected with a cycle
    }
    let centers: Vec<usize> = (0..n).filter(|&i| degrees[i] >= 3).collect();
    match centers.len() {
        0 => {
            let order = chain_order(graph);
            let string: Vec<u64> =
                order.iter().map(|&i| (-graph.curves[i].self_intersection) as u64).collect();
            let string = canonical_chain_string(string);
            let (q, q1) = hj_det(&string)?;
            let (_, q1_reversed) = {
                let mut rev = string.clone();
                rev.reverse();
                hj_det(&rev)?
            };
            Ok(SingTag::Cyclic { q, q1, q1_reversed, string })
        }
        1 if degrees[centers[0]] == 3 => {
            let c = centers[0];
            let b = (-graph.curves[c].self_intersection) as u64;
            let mut branches: Vec<Vec<u64>> = graph
                .neighbors(c)
                .into_iter()
                .map(|start| branch_string(graph, c, start))
                .collect();
            branches.sort_by_key(|s| (chain_det(s), s.clone()));
            let dets: Vec<BigInt> = branches.iter().map(|s| chain_det(s)).collect();
            let two = BigInt::from(2);
            let three = BigInt::from(3);
            if dets[0] == two && dets[1] == two {
                let string = branches[2].clone();
                let (q, q1) = hj_det(&string)?;
                return Ok(SingTag::Dihedral { b, string, q, q1 });
            }
            if dets[0] == two && dets[1] == three {
                let kind = if dets[2] == three {
                    Some(ToiKind::Tetrahedral)
                } else if dets[2] == BigInt::from(4) {
                    Some(ToiKind::Octahedral)
                } else if dets[2] == BigInt::from(5) {
                    Some(ToiKind::Icosahedral)
                } else {
                    None
                };
                if let Some(kind) = kind {
                    return Ok(SingTag::Toi {
                        kind,
                        b,
                        branches: [branches[0].clone(), branches[1].clone(), branches[2].clone()],
                    });
                }
            }
            Ok(SingTag::Other)
        }
        _ => Ok(SingTag::Other),
    }
}

/// Chains read the same singularity from either end; keep the
/// lexicographically smaller reading.
fn canonical_chain_string(string: Vec<u64>) -> Vec<u64> {
    let mut rev = string.clone();
    rev.reverse();
    if rev < string {
        rev
    } else {
        string
    }
}

fn chain_order(graph: &DualGraph) -> Vec<usize> {
    let n = graph.curves.len();
    if n == 1 {
        return vec![0];
    }
    let start = (0..n).find(|&i| graph.neighbors(i).len() == 1).expect("chain endpoint");
    let mut order = vec![start];
    let mut prev = None;
    let mut cur = start;
    while order.len() < n {
        let next = graph
            .neighbors(cur)
            .into_iter()
            .find(|&j| Some(j) != prev)
            .expect("chain continues");
        order.push(next);
        prev = Some(cur);
        cur = next;
    }
    order
}

fn branch_string(graph: &DualGraph, center: usize, start: usize) -> Vec<u64> {
    let mut out = vec![(-graph.curves[start].self_intersection) as u64];
    let mut prev = center;
    let mut cur = start;
    loop {
        let next: Vec<usize> =
            graph.neighbors(cur).into_iter().filter(|&j| j != prev).collect();
        match next.as_slice() {
            [] => break,
            [j] => {
                out.push((-graph.curves[*j].self_intersection) as u64);
                prev = cur;
                cur = *j;
            }
            _ => break, // nested branching; caller classifies as Other
        }
    }
    out
}

/// Minimal-general-type context marker (`p_g = q = 0`), carrying `K^2` of
/// the smooth surface. The Euler number bookkeeping `e(X_0) = 2 + rho0`
/// is only valid here, so the invariants below refuse to run without it.
#[derive(Debug, Clone, Copy)]
pub struct MinimalGeneralType {
    pub k2: i64,
}

/// One singular point of a basket: its type and its `D_x^2`.
#[derive(Debug, Clone)]
pub struct BasketPoint {
    pub tag: SingTag,
    pub dx2: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbifoldInvariants {
    pub e_orb: Rat,
    /// True when a T/O/I order bound makes `e_orb` an upper bound only.
    pub e_orb_is_upper_bound: bool,
    pub sum_dx2: Rat,
    pub k0_squared: Rat,
}

pub fn orbifold_invariants(
    ctx: MinimalGeneralType,
    rho0: u32,
    points: &[BasketPoint],
) -> Result<OrbifoldInvariants, SingError> {
    let e_x0 = rat(2 + rho0 as i64);
    let mut e_orb = e_x0;
    let mut bound = false;
    for p in points {
        let order = group_order(&p.tag)?;
        bound = bound || !order.is_exact();
        let g = Rat::from_integer(order.lower_bound().clone());
        e_orb -= Rat::one() - g.recip();
    }
    let sum_dx2: Rat = points.iter().map(|p| p.dx2.clone()).sum();
    let k0_squared = rat(ctx.k2) - &sum_dx2;
    Ok(OrbifoldInvariants { e_orb, e_orb_is_upper_bound: bound, sum_dx2, k0_squared })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmyOutcome {
    pub pass: bool,
    /// `3 e_orb - K_0^2`, negative exactly on failure.
    pub margin: Rat,
    /// Set when a T/O/I order bound was used; a fail is then still
    /// definitive, a pass is tentative.
    pub used_order_bound: bool,
}

/// Orbifold Bogomolov-Miyaoka-Yau test `K_0^2 <= 3 e_orb`, exact.
pub fn bmy_check(
    ctx: MinimalGeneralType,
    rho0: u32,
    points: &[BasketPoint],
) -> Result<BmyOutcome, SingError> {
    let inv = orbifold_invariants(ctx, rho0, points)?;
    let margin = rat(3) * &inv.e_orb - &inv.k0_squared;
    Ok(BmyOutcome {
        pass: !margin.is_negative(),
        margin,
        used_order_bound: inv.e_orb_is_upper_bound,
    })
}

/// Every Hirzebruch-Jung string with entry sum at most `cap`; test helper
/// shared by the closed-form sweeps here and in the quadratic-form module.
#[cfg(test)]
pub(crate) fn all_strings_with_sum_at_most(cap: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(cap: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let used: u64 = cur.iter().sum();
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        let mut m = 2;
        while used + m <= cap {
            cur.push(m);
            rec(cap, cur, out);
            cur.pop();
            m += 1;
        }
    }
    rec(cap, &mut cur, &mut out);
    out
}
