//! Surface configurations: named curves, their intersection matrix, and the
//! class-space arithmetic built on top of it (adjunction, canonical class,
//! embedding of curve classes into a basis of the span).

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

use crate::linalg::{QMatrix, Signature, SolveOutcome};
use crate::num::{fmt_rat, rat, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("unknown curve `{0}`")]
    UnknownCurve(String),
    #[error("coefficient count {got} does not match curve count {expected}")]
    CoefficientMismatch { expected: usize, got: usize },
    #[error("configuration failed validation: {0}")]
    Invalid(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

/// One curve of a configuration. `self_intersection` is read off the Gram
/// diagonal; `genus` is the arithmetic genus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub name: String,
    pub genus: u32,
    pub self_intersection: i64,
}

/// Raw on-disk form: self-intersections live on the Gram diagonal only.
#[derive(Debug, Serialize, Deserialize)]
struct RawConfig {
    name: String,
    k2: i64,
    pg: i64,
    q: i64,
    curves: Vec<RawCurve>,
    gram: Vec<Vec<i64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawCurve {
    name: String,
    genus: u32,
}

#[derive(Debug, Clone)]
pub struct SurfaceConfiguration {
    pub name: String,
    pub k2: i64,
    pub pg: i64,
    pub q: i64,
    pub curves: Vec<CurveRecord>,
    pub gram: QMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    GramNotSquare,
    GramSizeMismatch,
    Asymmetric { i: usize, j: usize },
    DiagonalMismatch { curve: String },
    DuplicateCurveName { curve: String },
    RankMismatch { expected: usize, actual: usize },
    SignatureMismatch { expected: (usize, usize), actual: Signature },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GramNotSquare => write!(f, "gram matrix is not square"),
            Violation::GramSizeMismatch => {
                write!(f, "gram matrix size does not match the number of curves")
            }
            Violation::Asymmetric { i, j } => {
                write!(f, "symmetry: gram[{i}][{j}] differs from gram[{j}][{i}]")
            }
            Violation::DiagonalMismatch { curve } => {
                write!(f, "diagonal: self-intersection of `{curve}` disagrees with gram")
            }
            Violation::DuplicateCurveName { curve } => {
                write!(f, "duplicate curve name `{curve}`")
            }
            Violation::RankMismatch { expected, actual } => {
                write!(f, "rank: expected 10 - k2 = {expected}, got {actual}")
            }
            Violation::SignatureMismatch { expected, actual } => write!(
                f,
                "signature: expected ({}, {}) on the span, got ({}, {}, {})",
                expected.0, expected.1, actual.plus, actual.minus, actual.zero
            ),
        }
    }
}

/// Outcome of `validate`; empty `violations` means the configuration is good.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub rank: usize,
    pub signature: Option<Signature>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A numerical class written in curve coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorClass {
    pub coefficients: Vec<Rat>,
}

impl DivisorClass {
    pub fn zero(config: &SurfaceConfiguration) -> Self {
        DivisorClass { coefficients: vec![Rat::zero(); config.curves.len()] }
    }

    pub fn from_pairs(
        config: &SurfaceConfiguration,
        pairs: &[(&str, Rat)],
    ) -> Result<Self, SurfaceError> {
        let mut class = DivisorClass::zero(config);
        for (name, c) in pairs {
            let i = config.curve_index(name)?;
            class.coefficients[i] = c.clone();
        }
        Ok(class)
    }

    pub fn as_named_map(&self, config: &SurfaceConfiguration) -> BTreeMap<String, String> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (config.curves[i].name.clone(), fmt_rat(c)))
            .collect()
    }
}

impl SurfaceConfiguration {
    pub fn from_json(text: &str) -> Result<Self, SurfaceError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| SurfaceError::Malformed(e.to_string()))?;
        if raw.gram.len() != raw.curves.len()
            || raw.gram.iter().any(|r| r.len() != raw.curves.len())
        {
            return Err(SurfaceError::Malformed(
                "gram matrix size does not match the number of curves".into(),
            ));
        }
        let gram = QMatrix::from_int_rows(&raw.gram);
        let curves = raw
            .curves
            .into_iter()
            .enumerate()
            .map(|(i, c)| CurveRecord {
                name: c.name,
                genus: c.genus,
                self_intersection: raw.gram[i][i],
            })
            .collect();
        Ok(SurfaceConfiguration { name: raw.name, k2: raw.k2, pg: raw.pg, q: raw.q, curves, gram })
    }

    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            name: self.name.clone(),
            k2: self.k2,
            pg: self.pg,
            q: self.q,
            curves: self
                .curves
                .iter()
                .map(|c| RawCurve { name: c.name.clone(), genus: c.genus })
                .collect(),
            gram: (0..self.gram.rows())
                .map(|i| {
                    self.gram
                        .row(i)
                        .iter()
                        .map(|v| {
                            debug_assert!(v.denom().is_one());
                            v.numer().try_into().expect("gram entry fits i64")
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn curve_index(&self, name: &str) -> Result<usize, SurfaceError> {
        self.curves
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| SurfaceError::UnknownCurve(name.to_string()))
    }

    /// True for the minimal-general-type `p_g = q = 0` context, where the
    /// Noether and Hodge checks on rank and signature apply.
    pub fn minimal_general_type_pg0(&self) -> bool {
        self.pg == 0 && self.q == 0
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.curves.len();
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.curves {
            if !seen.insert(c.name.as_str()) {
                violations.push(Violation::DuplicateCurveName { curve: c.name.clone() });
            }
        }
        if !self.gram.is_square() {
            violations.push(Violation::GramNotSquare);
            return ValidationReport { violations, rank: 0, signature: None };
        }
        if self.gram.rows() != n {
            violations.push(Violation::GramSizeMismatch);
            return ValidationReport { violations, rank: 0, signature: None };
        }
        if let Some((i, j)) = self.gram.symmetry_violation() {
            violations.push(Violation::Asymmetric { i, j });
            return ValidationReport { violations, rank: self.gram.rank(), signature: None };
        }
        for (i, c) in self.curves.iter().enumerate() {
            if *self.gram.get(i, i) != rat(c.self_intersection) {
                violations.push(Violation::DiagonalMismatch { curve: c.name.clone() });
            }
        }
        let rank = self.gram.rank();
        let signature = self.gram.signature().expect("symmetric by the check above");
        if self.minimal_general_type_pg0() {
            let expected = (10 - self.k2) as usize;
            if rank != expected {
                violations.push(Violation::RankMismatch { expected, actual: rank });
            }
            if rank >= 1 && (signature.plus != 1 || signature.minus != rank - 1) {
                violations.push(Violation::SignatureMismatch {
                    expected: (1, rank - 1),
                    actual: signature,
                });
            }
        }
        ValidationReport { violations, rank, signature: Some(signature) }
    }

    fn require_valid(&self) -> Result<(), SurfaceError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(SurfaceError::Invalid(
                report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    /// Bilinear extension of the Gram pairing to divisor classes.
    pub fn intersect(&self, d1: &DivisorClass, d2: &DivisorClass) -> Result<Rat, SurfaceError> {
        let n = self.curves.len();
        for d in [d1, d2] {
            if d.coefficients.len() != n {
                return Err(SurfaceError::CoefficientMismatch {
                    expected: n,
                    got: d.coefficients.len(),
                });
            }
        }
        let gv = self.gram.mul_vec(&d2.coefficients).expect("validated dims");
        Ok(d1.coefficients.iter().zip(&gv).map(|(a, b)| a * b).sum())
    }

    /// `K . C` for a named curve, by adjunction: `2g - 2 - C^2`.
    pub fn canonical_degree(&self, curve: &str) -> Result<Rat, SurfaceError> {
        let i = self.curve_index(curve)?;
        let c = &self.curves[i];
        Ok(rat(2 * c.genus as i64 - 2 - c.self_intersection))
    }

    /// Coordinates of every curve class in a basis of the span of the curves.
    pub fn class_space_embedding(&self) -> Result<ClassEmbedding, SurfaceError> {
        self.require_valid()?;
        let n = self.curves.len();
        // Greedy maximal independent subset, judged on full Gram rows: a row
        // is zero against the whole configuration iff the class is zero in
        // the span, since the pairing is nondegenerate there.
        let mut basis = Vec::new();
        let mut rref: Vec<Vec<Rat>> = Vec::new();
        for i in 0..n {
            let mut row = self.gram.row(i).to_vec();
            for r in &rref {
                let lead = r.iter().position(|v| !v.is_zero()).expect("nonzero rref row");
                if row[lead].is_zero() {
                    continue;
                }
                let f = &row[lead] / &r[lead];
                for (x, y) in row.iter_mut().zip(r) {
                    let sub = &f * y;
                    *x -= sub;
                }
            }
            if row.iter().any(|v| !v.is_zero()) {
                rref.push(row);
                basis.push(i);
            }
        }
        let pairing = self.gram.principal_submatrix(&basis);
        let mut coords = Vec::with_capacity(n);
        for i in 0..n {
            let rhs: Vec<Rat> = basis.iter().map(|&b| self.gram.get(b, i).clone()).collect();
            let x = pairing.solve(&rhs).expect("basis pairing is invertible");
            coords.push(x);
        }
        let emb = ClassEmbedding { basis, pairing, coords };
        debug_assert!(emb.reproduces_gram(self));
        Ok(emb)
    }

    /// Solves the adjunction system for the canonical class.
    pub fn canonical_class(&self) -> Result<CanonicalClassOutcome, SurfaceError> {
        self.require_valid()?;
        let degrees: Vec<Rat> = self
            .curves
            .iter()
            .map(|c| rat(2 * c.genus as i64 - 2 - c.self_intersection))
            .collect();
        let outcome = self.gram.solve_general(&degrees).expect("validated dims");
        let (coeffs, unique) = match outcome {
            SolveOutcome::Unique(x) => (x, true),
            // The class itself is unique: coefficient slack lies in the
            // radical of the Gram form, which pairs to zero with everything.
            SolveOutcome::Underdetermined(x) => (x, false),
            SolveOutcome::Inconsistent => {
                return Ok(CanonicalClassOutcome::Inconsistent(
                    "adjunction system has no solution in the span of the curves".into(),
                ))
            }
        };
        let class = DivisorClass { coefficients: coeffs };
        let k_squared = self.intersect(&class, &class)?;
        if k_squared != rat(self.k2) {
            return Ok(CanonicalClassOutcome::Inconsistent(format!(
                "adjunction gives K^2 = {}, configuration declares {}",
                fmt_rat(&k_squared),
                self.k2
            )));
        }
        Ok(CanonicalClassOutcome::Class { class, k_squared, coefficients_unique: unique })
    }

    /// No curve of negative self-intersection means nothing contracts.
    pub fn is_combinatorially_minimal(&self) -> Result<bool, SurfaceError> {
        self.require_valid()?;
        Ok(self.curves.iter().all(|c| c.self_intersection >= 0))
    }
}

#[derive(Debug, Clone)]
pub enum CanonicalClassOutcome {
    Class { class: DivisorClass, k_squared: Rat, coefficients_unique: bool },
    Inconsistent(String),
}

/// Curves expressed in a basis of the class space. `coords[i]` are the
/// coordinates of curve `i` with respect to the curves listed in `basis`,
/// and `pairing` is the Gram matrix of those basis curves.
#[derive(Debug, Clone)]
pub struct ClassEmbedding {
    pub basis: Vec<usize>,
    pub pairing: QMatrix,
    pub coords: Vec<Vec<Rat>>,
}

impl ClassEmbedding {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let gy = self.pairing.mul_vec(y).expect("dimension");
        x.iter().zip(&gy).map(|(a, b)| a * b).sum()
    }

    /// Coordinates of an arbitrary divisor class given by curve coefficients.
    pub fn coords_of_class(&self, class: &DivisorClass) -> Vec<Rat> {
        let mut acc = vec![Rat::zero(); self.dim()];
        for (c, coord) in class.coefficients.iter().zip(&self.coords) {
            for (a, x) in acc.iter_mut().zip(coord) {
                *a += c * x;
            }
        }
        acc
    }

    /// Curve-coefficient form of a coordinate vector (supported on the basis
    /// curves; other coefficients are zero).
    pub fn class_of_coords(&self, config: &SurfaceConfiguration, x: &[Rat]) -> DivisorClass {
        let mut class = DivisorClass::zero(config);
        for (b, v) in self.basis.iter().zip(x) {
            class.coefficients[*b] = v.clone();
        }
        class
    }

    fn reproduces_gram(&self, config: &SurfaceConfiguration) -> bool {
        let n = config.curves.len();
        for i in 0..n {
            for j in 0..n {
                if self.pair(&self.coords[i], &self.coords[j]) != *config.gram.get(i, j) {
                    return false;
                }
            }
        }
        true
    }
}
