//! Fibrations and combinatorially minimal models of a surface configuration.
//!
//! The effective cone is spanned by the listed curves; its dual under the
//! intersection pairing is the nef cone. Fibrations are the extremal nef
//! rays of self-intersection zero. Models with Picard number one come from
//! facets of the effective cone whose orthogonal nef ray has positive
//! square; models with Picard number two come from adjacent facet pairs
//! whose rays both square to zero.

use itertools::Itertools;
use num::{BigInt, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cones::{primitive_from_rat, Cone, ConeError};
use crate::num::{fmt_rat, rat, Rat};
use crate::sing::{classify, discrepancies, DualGraph, SingError, SingularityType};
use crate::surface::{ClassEmbedding, DivisorClass, SurfaceConfiguration, SurfaceError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Singularity(#[from] SingError),
    #[error("subset of size {k} exceeds the {n} listed curves")]
    SubsetTooLarge { k: usize, n: usize },
    #[error(
        "curve set is not negative definite: leading principal minor {index} \
         of the subset Gram matrix has determinant {det}"
    )]
    NotContractible { index: usize, det: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// An extremal nef class of self-intersection zero, together with the
/// curves its fibration contracts. `class` is expressed in curve
/// coefficients supported on the embedding basis.
#[derive(Debug, Clone)]
pub struct FibrationClass {
    pub coords: Vec<BigInt>,
    pub class: DivisorClass,
    pub contracted_curves: Vec<String>,
}

/// One singular point of a contracted model.
#[derive(Debug, Clone)]
pub struct SingularPoint {
    pub curves: Vec<String>,
    pub kind: SingularityType,
    pub discrepancies: Vec<Rat>,
    pub dx2: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelWitnessKind {
    PositiveNefRay,
    FibrationPair,
}

#[derive(Debug, Clone)]
pub enum ModelWitness {
    /// Nef class with positive self-intersection orthogonal to the
    /// contracted curves.
    PositiveNefRay { class: DivisorClass, self_intersection: Rat },
    /// All pairs of square-zero nef classes cutting out this model.
    FibrationPairs { pairs: Vec<(DivisorClass, DivisorClass)> },
}

#[derive(Debug, Clone)]
pub struct MinimalModelReport {
    pub rho0: u32,
    pub contracted: Vec<String>,
    pub singular_points: Vec<SingularPoint>,
    pub k0_squared: Rat,
    pub witness: ModelWitness,
    /// Set when nothing is contracted: the configuration itself is already
    /// combinatorially minimal.
    pub already_minimal: bool,
}

#[derive(Debug, Clone)]
pub struct ContractionOutcome {
    pub rho0: u32,
    pub k0_squared: Rat,
    pub singular_points: Vec<SingularPoint>,
}

struct ConeSetup {
    emb: ClassEmbedding,
    eff: Cone,
}

fn cone_setup(config: &SurfaceConfiguration) -> Result<ConeSetup, ModelError> {
    let emb = config.class_space_embedding()?;
    let gens: Vec<Vec<Rat>> = emb.coords.clone();
    let eff = Cone::from_generators(&gens, &emb.pairing)?;
    if !eff.is_full_dimensional() {
        return Err(ModelError::Internal("effective cone does not span".into()));
    }
    if !eff.is_pointed() {
        return Err(ModelError::Internal("effective cone contains a line".into()));
    }
    Ok(ConeSetup { emb, eff })
}

fn ray_to_rat(ray: &[BigInt]) -> Vec<Rat> {
    ray.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// All fibrations of the configuration: extremal nef rays of square zero,
/// in canonical (lexicographic coordinate) order.
pub fn fibrations(config: &SurfaceConfiguration) -> Result<Vec<FibrationClass>, ModelError> {
    let setup = cone_setup(config)?;
    let nef = setup.eff.dual()?;
    let mut out = Vec::new();
    for ray in &nef.generators {
        let v = ray_to_rat(ray);
        if !setup.emb.pair(&v, &v).is_zero() {
            continue;
        }
        let contracted = curves_orthogonal_to(config, &setup.emb, &v);
        out.push(FibrationClass {
            coords: ray.clone(),
            class: setup.emb.class_of_coords(config, &v),
            contracted_curves: contracted,
        });
    }
    out.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(out)
}

fn curves_orthogonal_to(
    config: &SurfaceConfiguration,
    emb: &ClassEmbedding,
    v: &[Rat],
) -> Vec<String> {
    config
        .curves
        .iter()
        .zip(&emb.coords)
        .filter(|(_, c)| emb.pair(c, v).is_zero())
        .map(|(curve, _)| curve.name.clone())
        .collect()
}

/// All size-`k` subsets of curves whose Gram submatrix is negative
/// definite, each as a sorted list of names, in canonical order.
pub fn contractible_sets(
    config: &SurfaceConfiguration,
    k: usize,
) -> Result<Vec<Vec<String>>, ModelError> {
    let n = config.curves.len();
    if k > n {
        return Err(ModelError::SubsetTooLarge { k, n });
    }
    let mut out = Vec::new();
    for subset in (0..n).combinations(k) {
        let sub = config.gram.principal_submatrix(&subset);
        if sub.is_negative_definite().map_err(|e| ModelError::Internal(e.to_string()))? {
            out.push(subset.iter().map(|&i| config.curves[i].name.clone()).collect());
        }
    }
    Ok(out)
}

/// Splits a curve subset into connected components and classifies each.
fn classify_components(
    config: &SurfaceConfiguration,
    indices: &[usize],
) -> Result<Vec<SingularPoint>, ModelError> {
    let mut remaining: Vec<usize> = indices.to_vec();
    let mut points = Vec::new();
    while let Some(&start) = remaining.first() {
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &j in indices {
                if !comp.contains(&j) && !config.gram.get(i, j).is_zero() {
                    comp.push(j);
                    stack.push(j);
                }
            }
        }
        comp.sort();
        remaining.retain(|i| !comp.contains(i));
        let gram = config.gram.principal_submatrix(&comp);
        let curves = comp.iter().map(|&i| config.curves[i].clone()).collect();
        let graph = DualGraph::new(curves, gram)?;
        let d = discrepancies(&graph)?;
        let kind = classify(&graph)?;
        points.push(SingularPoint {
            curves: comp.iter().map(|&i| config.curves[i].name.clone()).collect(),
            kind,
            discrepancies: d.coefficients,
            dx2: d.dx2,
        });
    }
    points.sort_by(|a, b| a.curves.cmp(&b.curves));
    Ok(points)
}

/// Contracts a negative-definite set of curves, reporting the Picard number
/// of the result, its `K^2`, and the singular points created.
pub fn contract(
    config: &SurfaceConfiguration,
    curve_names: &[String],
) -> Result<ContractionOutcome, ModelError> {
    let report = config.validate();
    if !report.is_valid() {
        return Err(SurfaceError::Invalid(
            report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        )
        .into());
    }
    let mut indices = Vec::new();
    for name in curve_names {
        indices.push(config.curve_index(name)?);
    }
    indices.sort();
    indices.dedup();
    // Reject with the first leading principal minor of the subset Gram whose
    // sign breaks the alternating pattern.
    let sub = config.gram.principal_submatrix(&indices);
    if !sub.is_negative_definite().map_err(|e| ModelError::Internal(e.to_string()))? {
        for lead in 1..=indices.len() {
            let minor = sub.principal_submatrix(&(0..lead).collect::<Vec<_>>());
            let det = minor.determinant().map_err(|e| ModelError::Internal(e.to_string()))?;
            let expected_positive = lead % 2 == 0;
            if det.is_zero() || det.is_positive() != expected_positive {
                return Err(ModelError::NotContractible { index: lead, det: fmt_rat(&det) });
            }
        }
        return Err(ModelError::Internal("definiteness check disagreed with minors".into()));
    }
    let rank = report.rank;
    let rho0 = (rank - indices.len()) as u32;
    let singular_points = classify_components(config, &indices)?;
    let sum_dx2: Rat = singular_points.iter().map(|p| p.dx2.clone()).sum();
    Ok(ContractionOutcome { rho0, k0_squared: rat(config.k2) - sum_dx2, singular_points })
}

/// All combinatorially minimal models reachable from the configuration.
/// Reports are deduplicated by contracted curve set; for Picard number two
/// the witness keeps every fibration pair that produces the set.
pub fn minimal_models(
    config: &SurfaceConfiguration,
) -> Result<Vec<MinimalModelReport>, ModelError> {
    let setup = cone_setup(config)?;
    let emb = &setup.emb;
    let rank = emb.dim();
    let mut reports: Vec<MinimalModelReport> = Vec::new();

    // rho0 = 1: facets of Eff whose orthogonal nef ray has positive square.
    for normal in &setup.eff.facet_normals {
        let v = ray_to_rat(normal);
        let square = emb.pair(&v, &v);
        if !square.is_positive() {
            continue;
        }
        let contracted = curves_orthogonal_to(config, emb, &v);
        let expected = rank - 1;
        if contracted.is_empty() && rank == 1 {
            reports.push(MinimalModelReport {
                rho0: 1,
                contracted,
                singular_points: Vec::new(),
                k0_squared: rat(config.k2),
                witness: ModelWitness::PositiveNefRay {
                    class: emb.class_of_coords(config, &v),
                    self_intersection: square,
                },
                already_minimal: true,
            });
            continue;
        }
        if contracted.len() != expected {
            return Err(ModelError::Internal(format!(
                "facet with positive ray contracts {} curves, expected {expected}",
                contracted.len()
            )));
        }
        let outcome = contract(config, &contracted).map_err(|e| match e {
            // Hodge index: curves orthogonal to a positive class must be
            // negative definite; anything else is an internal inconsistency.
            ModelError::NotContractible { .. } => {
                ModelError::Internal("orthogonal complement of a positive nef ray is not negative definite".into())
            }
            other => other,
        })?;
        debug_assert_eq!(outcome.rho0, 1);
        let mut contracted_sorted = contracted;
        contracted_sorted.sort();
        reports.push(MinimalModelReport {
            rho0: 1,
            contracted: contracted_sorted,
            singular_points: outcome.singular_points,
            k0_squared: outcome.k0_squared,
            witness: ModelWitness::PositiveNefRay {
                class: emb.class_of_coords(config, &v),
                self_intersection: square,
            },
            already_minimal: false,
        });
    }

    // rho0 = 2: adjacent facet pairs with both orthogonal rays isotropic.
    let mut by_set: Vec<(Vec<String>, Vec<(DivisorClass, DivisorClass)>)> = Vec::new();
    for (i, j) in setup.eff.adjacent_facet_pairs() {
        let d1 = ray_to_rat(&setup.eff.facet_normals[i]);
        let d2 = ray_to_rat(&setup.eff.facet_normals[j]);
        if !emb.pair(&d1, &d1).is_zero() || !emb.pair(&d2, &d2).is_zero() {
            continue;
        }
        let cross = emb.pair(&d1, &d2);
        if !cross.is_positive() {
            return Err(ModelError::Internal(
                "adjacent isotropic nef rays must pair positively".into(),
            ));
        }
        let mut contracted: Vec<String> = curves_orthogonal_to(config, emb, &d1)
            .into_iter()
            .filter(|name| {
                let idx = config.curve_index(name).expect("name from config");
                emb.pair(&emb.coords[idx], &d2).is_zero()
            })
            .collect();
        contracted.sort();
        let pair = (emb.class_of_coords(config, &d1), emb.class_of_coords(config, &d2));
        match by_set.iter_mut().find(|(set, _)| *set == contracted) {
            Some((_, pairs)) => pairs.push(pair),
            None => by_set.push((contracted, vec![pair])),
        }
    }
    for (contracted, pairs) in by_set {
        if contracted.is_empty() {
            if rank != 2 {
                return Err(ModelError::Internal(
                    "empty codimension-two contraction outside Picard rank 2".into(),
                ));
            }
            reports.push(MinimalModelReport {
                rho0: 2,
                contracted,
                singular_points: Vec::new(),
                k0_squared: rat(config.k2),
                witness: ModelWitness::FibrationPairs { pairs },
                already_minimal: true,
            });
            continue;
        }
        let outcome = contract(config, &contracted)?;
        debug_assert_eq!(outcome.rho0, 2);
        reports.push(MinimalModelReport {
            rho0: 2,
            contracted,
            singular_points: outcome.singular_points,
            k0_squared: outcome.k0_squared,
            witness: ModelWitness::FibrationPairs { pairs },
            already_minimal: false,
        });
    }

    reports.sort_by(|a, b| (a.rho0, &a.contracted).cmp(&(b.rho0, &b.contracted)));
    Ok(reports)
}

/// Lexicographically primitive coordinates of a class, for comparisons
/// up to positive scaling.
pub fn primitive_coords(emb: &ClassEmbedding, class: &DivisorClass) -> Vec<BigInt> {
    primitive_from_rat(&emb.coords_of_class(class))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sing::{LcClass, SingTag};
    use crate::surface::SurfaceConfiguration;

    fn inoue() -> SurfaceConfiguration {
        SurfaceConfiguration::from_json(
            r#"{"name": "inoue_k7", "k2": 7, "pg": 0, "q": 0,
                "curves": [{"name": "D1", "genus": 1}, {"name": "D2", "genus": 1},
                           {"name": "D3", "genus": 2}],
                "gram": [[-1, 1, 1], [1, -1, 1], [1, 1, -1]]}"#,
        )
        .unwrap()
    }

    fn kulikov() -> SurfaceConfiguration {
        SurfaceConfiguration::from_json(
            r#"{"name": "kulikov_k6", "k2": 6, "pg": 0, "q": 0,
                "curves": [{"name": "E1", "genus": 1}, {"name": "E2", "genus": 1},
                           {"name": "E3", "genus": 1}, {"name": "L1", "genus": 1},
                           {"name": "L2", "genus": 1}, {"name": "L3", "genus": 1}],
                "gram": [[-1, 0, 0, 0, 1, 1], [0, -1, 0, 1, 0, 1], [0, 0, -1, 1, 1, 0],
                         [0, 1, 1, -1, 0, 0], [1, 0, 1, 0, -1, 0], [1, 1, 0, 0, 0, -1]]}"#,
        )
        .unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn inoue_fibrations() {
        let cfg = inoue();
        let fibs = fibrations(&cfg).unwrap();
        assert_eq!(fibs.len(), 3);
        let emb = cfg.class_space_embedding().unwrap();
        for pair in [("D1", "D2"), ("D2", "D3"), ("D1", "D3")] {
            let class =
                DivisorClass::from_pairs(&cfg, &[(pair.0, rat(1)), (pair.1, rat(1))]).unwrap();
            let target = primitive_coords(&emb, &class);
            assert!(
                fibs.iter().any(|f| f.coords == target),
                "missing fibration {pair:?}"
            );
        }
    }

    #[test]
    fn kulikov_fibrations_up_to_class_equality() {
        let cfg = kulikov();
        let fibs = fibrations(&cfg).unwrap();
        assert_eq!(fibs.len(), 3);
        let emb = cfg.class_space_embedding().unwrap();
        for pair in [("E1", "L2"), ("E2", "L3"), ("E3", "L1")] {
            let class =
                DivisorClass::from_pairs(&cfg, &[(pair.0, rat(1)), (pair.1, rat(1))]).unwrap();
            let target = primitive_coords(&emb, &class);
            assert!(fibs.iter().any(|f| f.coords == target), "missing {pair:?}");
        }
        // each fiber class is orthogonal to four of the six curves
        for f in &fibs {
            assert_eq!(f.contracted_curves.len(), 4);
        }
    }

    #[test]
    fn contractible_sets_of_inoue() {
        let cfg = inoue();
        assert!(contractible_sets(&cfg, 2).unwrap().is_empty());
        assert_eq!(contractible_sets(&cfg, 1).unwrap().len(), 3);
        assert!(contractible_sets(&cfg, 4).is_err());
    }

    #[test]
    fn inoue_minimal_models() {
        let cfg = inoue();
        let models = minimal_models(&cfg).unwrap();
        assert_eq!(models.len(), 3);
        for m in &models {
            assert_eq!(m.rho0, 2);
            assert_eq!(m.contracted.len(), 1);
            assert_eq!(m.singular_points.len(), 1);
            let p = &m.singular_points[0];
            if m.contracted == names(&["D3"]) {
                // genus-2 curve: discrepancy 3, so K drops by D_x^2 = -9
                assert_eq!(p.discrepancies, vec![rat(3)]);
                assert_eq!(m.k0_squared, rat(16));
                assert_eq!(p.kind.lc_class, LcClass::Worse);
            } else {
                assert!(matches!(p.kind.tag, SingTag::SimpleElliptic { self_intersection: -1 }));
                assert_eq!(p.kind.lc_class, LcClass::LogCanonical);
                assert_eq!(m.k0_squared, rat(8));
            }
            match &m.witness {
                ModelWitness::FibrationPairs { pairs } => assert_eq!(pairs.len(), 1),
                _ => panic!("expected fibration pair witness"),
            }
        }
        let sets: Vec<_> = models.iter().map(|m| m.contracted.clone()).collect();
        assert!(sets.contains(&names(&["D1"])));
        assert!(sets.contains(&names(&["D2"])));
        assert!(sets.contains(&names(&["D3"])));
    }

    #[test]
    fn kulikov_contractions() {
        let cfg = kulikov();
        let out = contract(&cfg, &names(&["E1", "E2", "E3"])).unwrap();
        assert_eq!(out.rho0, 1);
        assert_eq!(out.k0_squared, rat(9));
        assert_eq!(out.singular_points.len(), 3);
        for p in &out.singular_points {
            assert!(matches!(p.kind.tag, SingTag::SimpleElliptic { .. }));
        }
        let out = contract(&cfg, &names(&["L1", "L2", "L3"])).unwrap();
        assert_eq!((out.rho0, out.k0_squared), (1, rat(9)));

        // empty set: identity contraction
        let out = contract(&cfg, &[]).unwrap();
        assert_eq!(out.rho0, 4);
        assert_eq!(out.k0_squared, rat(6));
        assert!(out.singular_points.is_empty());

        // a non-negative-definite set is rejected with the offending minor
        let err = contract(&cfg, &names(&["E1", "L2"])).unwrap_err();
        match err {
            ModelError::NotContractible { index, det } => {
                assert_eq!(index, 2);
                assert_eq!(det, "0");
            }
            other => panic!("expected contractibility error, got {other}"),
        }
    }

    #[test]
    fn kulikov_minimal_models() {
        let models = minimal_models(&kulikov()).unwrap();
        let rho1: Vec<_> = models.iter().filter(|m| m.rho0 == 1).collect();
        let rho2: Vec<_> = models.iter().filter(|m| m.rho0 == 2).collect();
        assert_eq!(rho1.len(), 2);
        assert_eq!(rho2.len(), 3);
        let sets: Vec<_> = rho1.iter().map(|m| m.contracted.clone()).collect();
        assert!(sets.contains(&names(&["E1", "E2", "E3"])));
        assert!(sets.contains(&names(&["L1", "L2", "L3"])));
        let sets: Vec<_> = rho2.iter().map(|m| m.contracted.clone()).collect();
        assert!(sets.contains(&names(&["E1", "L1"])));
        assert!(sets.contains(&names(&["E2", "L2"])));
        assert!(sets.contains(&names(&["E3", "L3"])));
        for m in rho2 {
            assert_eq!(m.singular_points.len(), 2, "E_i and L_i are disjoint");
        }
    }

    #[test]
    fn pq_k4_contractible_five_sets() {
        let cfg = SurfaceConfiguration::from_json(
            r#"{"name": "pq_k4_z4z2", "k2": 4, "pg": 0, "q": 0,
                "curves": [{"name": "E1", "genus": 0}, {"name": "E2", "genus": 0},
                           {"name": "E3", "genus": 0}, {"name": "E4", "genus": 0},
                           {"name": "F1", "genus": 1}, {"name": "F2", "genus": 1},
                           {"name": "G1", "genus": 1}, {"name": "G2", "genus": 1}],
                "gram": [[-2, 0, 0, 0, 1, 0, 0, 1], [0, -2, 0, 0, 1, 0, 1, 0],
                         [0, 0, -2, 0, 0, 1, 1, 0], [0, 0, 0, -2, 0, 1, 0, 1],
                         [1, 1, 0, 0, -1, 0, 0, 0], [0, 0, 1, 1, 0, -1, 0, 0],
                         [0, 1, 1, 0, 0, 0, -1, 0], [1, 0, 0, 1, 0, 0, 0, -1]]}"#,
        )
        .unwrap();
        // no three-curve set contracts on the K^2 = 6 relative, and here the
        // five-curve sets come in two orbits of four under the dihedral
        // symmetry of the table; the published representatives are
        // {E1,E2,E4,F2,G1} and {E1,E2,F2,G1,G2}
        let sets = contractible_sets(&cfg, 5).unwrap();
        assert_eq!(sets.len(), 8);
        assert!(sets.contains(&names(&["E1", "E2", "E4", "F2", "G1"])));
        assert!(sets.contains(&names(&["E1", "E2", "F2", "G1", "G2"])));
        assert!(contractible_sets(&cfg, 6).unwrap().is_empty());
    }

    #[test]
    fn pq_k6_has_no_contractible_triple() {
        let cfg = SurfaceConfiguration::from_json(
            r#"{"name": "pq_k6_d4z2", "k2": 6, "pg": 0, "q": 0,
                "curves": [{"name": "E1", "genus": 0}, {"name": "E2", "genus": 0},
                           {"name": "F1", "genus": 1}, {"name": "G1", "genus": 2}],
                "gram": [[-2, 0, 1, 1], [0, -2, 1, 1], [1, 1, -1, 0], [1, 1, 0, -1]]}"#,
        )
        .unwrap();
        assert!(contractible_sets(&cfg, 3).unwrap().is_empty());
        assert_eq!(contractible_sets(&cfg, 2).unwrap().len(), 6);
    }

    #[test]
    fn rank_one_configuration_is_already_minimal() {
        let fpp = SurfaceConfiguration::from_json(
            r#"{"name": "fpp", "k2": 9, "pg": 0, "q": 0,
                "curves": [{"name": "H", "genus": 3}], "gram": [[1]]}"#,
        )
        .unwrap();
        let models = minimal_models(&fpp).unwrap();
        assert_eq!(models.len(), 1);
        assert!(models[0].already_minimal);
        assert_eq!(models[0].rho0, 1);
        assert!(fibrations(&fpp).unwrap().is_empty());
    }

    #[test]
    fn rank_two_with_one_negative_curve() {
        let cfg = SurfaceConfiguration::from_json(
            r#"{"name": "r2", "k2": 8, "pg": 0, "q": 0,
                "curves": [{"name": "C", "genus": 1}, {"name": "F", "genus": 2}],
                "gram": [[-1, 1], [1, 0]]}"#,
        )
        .unwrap();
        let models = minimal_models(&cfg).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].rho0, 1);
        assert_eq!(models[0].contracted, names(&["C"]));
        assert!(!models[0].already_minimal);
    }

    #[test]
    fn rank_two_with_two_fibrations_is_already_minimal() {
        let cfg = SurfaceConfiguration::from_json(
            r#"{"name": "quadric", "k2": 8, "pg": 0, "q": 0,
                "curves": [{"name": "A", "genus": 2}, {"name": "B", "genus": 2}],
                "gram": [[0, 2], [2, 0]]}"#,
        )
        .unwrap();
        let models = minimal_models(&cfg).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].rho0, 2);
        assert!(models[0].already_minimal);
        assert_eq!(fibrations(&cfg).unwrap().len(), 2);
    }
}
