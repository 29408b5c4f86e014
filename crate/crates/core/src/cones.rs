//! Rational polyhedral cones under a fixed nondegenerate pairing.
//!
//! Cones are built from generators; facet normals come from an incremental
//! double-description pass over exact rationals. Duality is taken with
//! respect to the intersection pairing itself, so "the dual of the effective
//! cone" is literally the nef cone in the same coordinates.

use num::{BigInt, Integer, One, Signed, Zero};
use thiserror::Error;

use crate::linalg::QMatrix;
use crate::num::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("zero vector cannot generate a ray")]
    ZeroGenerator,
    #[error("pairing matrix must be symmetric and nondegenerate")]
    DegeneratePairing,
    #[error("generator has length {got}, ambient dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cone is not full-dimensional")]
    NotFullDimensional,
    #[error("cone contains a line; extremal rays are not defined")]
    NotPointed,
    #[error("too many generators for the incidence bookkeeping (limit 128)")]
    TooManyGenerators,
}

/// Ray with primitive integer coordinates. Direction is preserved: the
/// scaling factor applied during normalization is always positive.
pub type Ray = Vec<BigInt>;

fn to_primitive(v: &[Rat]) -> Ray {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() || gcd.is_one() {
        ints
    } else {
        ints.iter().map(|x| x / &gcd).collect()
    }
}

fn ray_to_rat(r: &[BigInt]) -> Vec<Rat> {
    r.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

fn rat_rank(vectors: &[Vec<Rat>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    QMatrix::from_rat_rows(vectors.to_vec()).rank()
}

/// Extreme rays and lineality space of `{ x : row . x >= 0 for each row }`.
///
/// Incremental double description: the state is a lineality basis plus a set
/// of extremal rays, all exact. When a new halfspace cuts the lineality
/// space, one lineality vector is pivoted out into a ray; otherwise rays are
/// split by sign and adjacent (+,-) pairs are combined on the hyperplane.
pub fn extreme_rays(rows: &[Vec<Rat>], dim: usize) -> Result<(Vec<Ray>, Vec<Ray>), ConeError> {
    if rows.len() > 128 {
        return Err(ConeError::TooManyGenerators);
    }
    struct RayRec {
        v: Vec<Rat>,
        zero: u128, // incidence bits for processed rows
    }
    let mut lineality: Vec<Vec<Rat>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    let mut rays: Vec<RayRec> = Vec::new();
    let dot = |a: &[Rat], b: &[Rat]| -> Rat { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    for (t, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), dim, "inequality row length");
        let bit = 1u128 << t;
        if let Some(pi) = lineality.iter().position(|l| !dot(row, l).is_zero()) {
            // Pivot: project everything onto row^perp along the pivot vector,
            // which is orthogonal to all processed rows, so incidence bits
            // are unchanged.
            let mut pivot = lineality.swap_remove(pi);
            let pv = dot(row, &pivot);
            if pv.is_negative() {
                for x in pivot.iter_mut() {
                    *x = -x.clone();
                }
            }
            let pv = dot(row, &pivot);
            for l in lineality.iter_mut() {
                let f = dot(row, l) / &pv;
                for (x, p) in l.iter_mut().zip(&pivot) {
                    let sub = &f * p;
                    *x -= sub;
                }
            }
            for r in rays.iter_mut() {
                let f = dot(row, &r.v) / &pv;
                for (x, p) in r.v.iter_mut().zip(&pivot) {
                    let sub = &f * p;
                    *x -= sub;
                }
                r.v = ray_to_rat(&to_primitive(&r.v));
                r.zero |= bit;
            }
            // The pivot came out of the lineality space, so it is incident
            // to every constraint processed before this one.
            rays.push(RayRec { v: pivot, zero: bit - 1 });
            continue;
        }
        // Lineality is inside the hyperplane; split the rays by sign.
        let values: Vec<Rat> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (i, val) in values.iter().enumerate() {
            if val.is_zero() {
                rays[i].zero |= bit;
            } else if val.is_positive() {
                plus.push(i);
            } else {
                minus.push(i);
            }
        }
        let mut fresh: Vec<RayRec> = Vec::new();
        for &p in &plus {
            for &m in &minus {
                let common = rays[p].zero & rays[m].zero;
                // Combinatorial adjacency: no third ray's incidence set
                // contains the common set.
                let adjacent = rays.iter().enumerate().all(|(k, r)| {
                    k == p || k == m || (common & !r.zero) != 0
                });
                if !adjacent {
                    continue;
                }
                let (vp, vm) = (&values[p], &values[m]);
                let combo: Vec<Rat> = rays[p]
                    .v
                    .iter()
                    .zip(&rays[m].v)
                    .map(|(a, b)| vp * b - vm * a)
                    .collect();
                debug_assert!(dot(row, &combo).is_zero());
                fresh.push(RayRec { v: ray_to_rat(&to_primitive(&combo)), zero: common | bit });
            }
        }
        let mut kept: Vec<RayRec> = Vec::new();
        for (i, r) in rays.into_iter().enumerate() {
            if !values[i].is_negative() {
                kept.push(r);
            }
        }
        kept.extend(fresh);
        rays = kept;
    }
    let mut out: Vec<Ray> = rays.iter().map(|r| to_primitive(&r.v)).collect();
    out.sort();
    out.dedup();
    let lin: Vec<Ray> = lineality.iter().map(|l| to_primitive(l)).collect();
    Ok((out, lin))
}

/// Polyhedral cone in class-space coordinates with a stored pairing.
/// `facet_normals` are vectors `u` cutting out `{ x : <u, x> >= 0 }` through
/// the pairing; `dual_lineality` vectors pair to zero with the whole cone.
#[derive(Debug, Clone)]
pub struct Cone {
    pub ambient_dim: usize,
    pub pairing: QMatrix,
    pub generators: Vec<Ray>,
    pub facet_normals: Vec<Ray>,
    pub dual_lineality: Vec<Ray>,
}

impl Cone {
    pub fn from_generators(vectors: &[Vec<Rat>], pairing: &QMatrix) -> Result<Cone, ConeError> {
        let dim = pairing.rows();
        if !pairing.is_symmetric() || pairing.determinant().map_err(|_| ConeError::DegeneratePairing)?.is_zero()
        {
            return Err(ConeError::DegeneratePairing);
        }
        for v in vectors {
            if v.len() != dim {
                return Err(ConeError::DimensionMismatch { expected: dim, got: v.len() });
            }
            if v.iter().all(Zero::is_zero) {
                return Err(ConeError::ZeroGenerator);
            }
        }
        let mut gens: Vec<Ray> = vectors.iter().map(|v| to_primitive(v)).collect();
        gens.dedup_by(|a, b| a == b);
        // stable dedup over the whole list, keeping first occurrences
        let mut seen: Vec<Ray> = Vec::new();
        for g in gens {
            if !seen.contains(&g) {
                seen.push(g);
            }
        }
        let gens = seen;
        // Facet normals are the extreme rays of { u : <u, g> >= 0 for all g }.
        let rows: Vec<Vec<Rat>> = gens
            .iter()
            .map(|g| pairing.mul_vec(&ray_to_rat(g)).expect("dimension checked"))
            .collect();
        let (normals, dual_lin) = extreme_rays(&rows, dim)?;
        let mut cone = Cone {
            ambient_dim: dim,
            pairing: pairing.clone(),
            generators: gens,
            facet_normals: normals,
            dual_lineality: dual_lin,
        };
        cone.reduce_to_extremal_generators();
        cone.generators.sort();
        Ok(cone)
    }

    pub fn pair(&self, u: &[Rat], v: &[Rat]) -> Rat {
        let gv = self.pairing.mul_vec(v).expect("dimension");
        u.iter().zip(&gv).map(|(a, b)| a * b).sum()
    }

    fn pair_rays(&self, u: &[BigInt], v: &[BigInt]) -> Rat {
        self.pair(&ray_to_rat(u), &ray_to_rat(v))
    }

    pub fn is_full_dimensional(&self) -> bool {
        let rows: Vec<Vec<Rat>> = self.generators.iter().map(|g| ray_to_rat(g)).collect();
        rat_rank(&rows) == self.ambient_dim
    }

    pub fn is_pointed(&self) -> bool {
        // A cone is pointed iff its dual spans the ambient space.
        let rows: Vec<Vec<Rat>> = self.facet_normals.iter().map(|g| ray_to_rat(g)).collect();
        self.dual_lineality.is_empty() && rat_rank(&rows) == self.ambient_dim
            || self.ambient_dim == 0
    }

    fn reduce_to_extremal_generators(&mut self) {
        if !self.is_full_dimensional() || !self.is_pointed() {
            return;
        }
        let dim = self.ambient_dim;
        let mut extremal = Vec::new();
        for g in &self.generators {
            let incident: Vec<Vec<Rat>> = self
                .facet_normals
                .iter()
                .filter(|n| self.pair_rays(n, g).is_zero())
                .map(|n| ray_to_rat(n))
                .collect();
            if rat_rank(&incident) == dim - 1 {
                extremal.push(g.clone());
            }
        }
        self.generators = extremal;
    }

    /// The cone of vectors pairing nonnegatively with every generator.
    /// Requires a full-dimensional pointed input so that both descriptions
    /// of the dual are finite and extremal.
    pub fn dual(&self) -> Result<Cone, ConeError> {
        if !self.is_full_dimensional() {
            return Err(ConeError::NotFullDimensional);
        }
        if !self.is_pointed() {
            return Err(ConeError::NotPointed);
        }
        let mut generators = self.facet_normals.clone();
        generators.sort();
        let mut facet_normals = self.generators.clone();
        facet_normals.sort();
        Ok(Cone {
            ambient_dim: self.ambient_dim,
            pairing: self.pairing.clone(),
            generators,
            facet_normals,
            dual_lineality: Vec::new(),
        })
    }

    pub fn contains(&self, v: &[Rat]) -> Result<bool, ConeError> {
        if v.len() != self.ambient_dim {
            return Err(ConeError::DimensionMismatch { expected: self.ambient_dim, got: v.len() });
        }
        Ok(self
            .facet_normals
            .iter()
            .all(|n| !self.pair(&ray_to_rat(n), v).is_negative())
            && self
                .dual_lineality
                .iter()
                .all(|l| self.pair(&ray_to_rat(l), v).is_zero()))
    }

    /// Generator indices lying on the facet cut out by `facet_normals[f]`.
    pub fn facet_incidence(&self, f: usize) -> Vec<usize> {
        let n = ray_to_rat(&self.facet_normals[f]);
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| self.pair(&n, &ray_to_rat(g)).is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Pairs of facets whose common generators span a (dim-2)-dimensional
    /// face. Empty for ambient dimension below 2.
    pub fn adjacent_facet_pairs(&self) -> Vec<(usize, usize)> {
        if self.ambient_dim < 2 {
            return Vec::new();
        }
        let incidences: Vec<Vec<usize>> =
            (0..self.facet_normals.len()).map(|f| self.facet_incidence(f)).collect();
        let mut pairs = Vec::new();
        for i in 0..self.facet_normals.len() {
            for j in i + 1..self.facet_normals.len() {
                let common: Vec<Vec<Rat>> = incidences[i]
                    .iter()
                    .filter(|g| incidences[j].contains(g))
                    .map(|&g| ray_to_rat(&self.generators[g]))
                    .collect();
                if rat_rank(&common) == self.ambient_dim - 2 {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }
}

/// True when `a` and `b` are positive rational multiples of each other.
pub fn same_ray(a: &[BigInt], b: &[BigInt]) -> bool {
    to_primitive(&ray_to_rat(a)) == to_primitive(&ray_to_rat(b))
}

pub fn primitive_from_rat(v: &[Rat]) -> Ray {
    to_primitive(v)
}
