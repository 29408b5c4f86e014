//! JSON-friendly report structures shared with the command-line front end.
//!
//! Every rational is rendered as a reduced `p` or `p/q` string; no value in
//! any report is ever a float.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::baskets::{BasketCandidate, EnumerationResult, FilterTrace};
use crate::linalg::Signature;
use crate::models::{
    ContractionOutcome, FibrationClass, MinimalModelReport, ModelWitness, SingularPoint,
};
use crate::num::{fmt_rat, parse_rat, Rat};
use crate::sing::{GroupOrder, LcClass, SingTag, ToiKind};
use crate::surface::{SurfaceConfiguration, ValidationReport};

/// Rational carried as a `p/q` string in JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q(pub Rat);

impl Serialize for Q {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).map(Q).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationOut {
    pub name: String,
    pub valid: bool,
    pub violations: Vec<String>,
    pub rank: usize,
    pub signature: Option<Signature>,
}

pub fn validation_report(config: &SurfaceConfiguration, report: &ValidationReport) -> ValidationOut {
    ValidationOut {
        name: config.name.clone(),
        valid: report.is_valid(),
        violations: report.violations.iter().map(ToString::to_string).collect(),
        rank: report.rank,
        signature: report.signature,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FibrationOut {
    /// Primitive coordinates in the embedding basis.
    pub coords: Vec<String>,
    /// The same class as curve coefficients (supported on the basis curves).
    pub class: BTreeMap<String, String>,
    pub contracted_curves: Vec<String>,
}

pub fn fibration_report(
    config: &SurfaceConfiguration,
    fibs: &[FibrationClass],
) -> Vec<FibrationOut> {
    fibs.iter()
        .map(|f| FibrationOut {
            coords: f.coords.iter().map(ToString::to_string).collect(),
            class: f.class.as_named_map(config),
            contracted_curves: f.contracted_curves.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularPointOut {
    pub curves: Vec<String>,
    pub kind: String,
    pub lc_class: String,
    pub group_order: Option<String>,
    pub discrepancies: Vec<Q>,
    pub dx2: Q,
}

fn singular_point_out(p: &SingularPoint) -> SingularPointOut {
    let group_order = crate::sing::group_order(&p.kind.tag).ok().map(|o| match o {
        GroupOrder::Exact(n) => n.to_string(),
        GroupOrder::AtLeast(n) => format!(">={n}"),
    });
    SingularPointOut {
        curves: p.curves.clone(),
        kind: p.kind.tag.to_string(),
        lc_class: p.kind.lc_class.to_string(),
        group_order,
        discrepancies: p.discrepancies.iter().cloned().map(Q).collect(),
        dx2: Q(p.dx2.clone()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelOut {
    pub rho0: u32,
    pub contracted: Vec<String>,
    pub k0_squared: Q,
    pub already_minimal: bool,
    pub witness: WitnessOut,
    pub singular_points: Vec<SingularPointOut>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum WitnessOut {
    #[serde(rename = "positive_nef_ray")]
    PositiveNefRay { class: BTreeMap<String, String>, self_intersection: Q },
    #[serde(rename = "fibration_pairs")]
    FibrationPairs { pairs: Vec<(BTreeMap<String, String>, BTreeMap<String, String>)> },
}

pub fn model_report(config: &SurfaceConfiguration, models: &[MinimalModelReport]) -> Vec<ModelOut> {
    models
        .iter()
        .map(|m| ModelOut {
            rho0: m.rho0,
            contracted: m.contracted.clone(),
            k0_squared: Q(m.k0_squared.clone()),
            already_minimal: m.already_minimal,
            witness: match &m.witness {
                ModelWitness::PositiveNefRay { class, self_intersection } => {
                    WitnessOut::PositiveNefRay {
                        class: class.as_named_map(config),
                        self_intersection: Q(self_intersection.clone()),
                    }
                }
                ModelWitness::FibrationPairs { pairs } => WitnessOut::FibrationPairs {
                    pairs: pairs
                        .iter()
                        .map(|(a, b)| (a.as_named_map(config), b.as_named_map(config)))
                        .collect(),
                },
            },
            singular_points: m.singular_points.iter().map(singular_point_out).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractionOut {
    pub rho0: u32,
    pub k0_squared: Q,
    pub singular_points: Vec<SingularPointOut>,
}

pub fn contraction_report(outcome: &ContractionOutcome) -> ContractionOut {
    ContractionOut {
        rho0: outcome.rho0,
        k0_squared: Q(outcome.k0_squared.clone()),
        singular_points: outcome.singular_points.iter().map(singular_point_out).collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasketOut {
    pub k2: i64,
    pub rho0: u32,
    pub points: Vec<String>,
    pub order_tuple: String,
    pub k0_squared: Q,
}

pub fn basket_out(c: &BasketCandidate) -> BasketOut {
    BasketOut {
        k2: c.k2,
        rho0: c.rho0,
        points: c.points.iter().map(ToString::to_string).collect(),
        order_tuple: c.order_tuple(),
        k0_squared: Q(c.k0_squared()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictOut {
    pub filter: String,
    pub pass: bool,
    pub witness: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceOut {
    pub candidate: BasketOut,
    pub survived: bool,
    pub verdicts: Vec<VerdictOut>,
}

pub fn trace_out(t: &FilterTrace) -> TraceOut {
    TraceOut {
        candidate: basket_out(&t.candidate),
        survived: t.survived,
        verdicts: t
            .verdicts
            .iter()
            .map(|v| VerdictOut {
                filter: v.filter.to_string(),
                pass: v.pass,
                witness: v.witness.clone(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationOut {
    pub rho0: u32,
    pub num_sing: usize,
    pub validated: bool,
    pub generated: usize,
    pub cap_touched: bool,
    pub survivors: Vec<BasketOut>,
    pub needs_external_data: Vec<BasketOut>,
    pub eliminations: Vec<TraceOut>,
}

pub fn enumeration_out(result: &EnumerationResult) -> EnumerationOut {
    EnumerationOut {
        rho0: result.rho0,
        num_sing: result.num_sing,
        validated: result.validated,
        generated: result.generated,
        cap_touched: result.cap_touched,
        survivors: result.survivors.iter().map(basket_out).collect(),
        needs_external_data: result.needs_external_data.iter().map(basket_out).collect(),
        eliminations: result.traces.iter().filter(|t| !t.survived).map(trace_out).collect(),
    }
}

/// Human-readable one-liner for a singularity tag, used by the CLI.
pub fn tag_human(tag: &SingTag) -> String {
    match tag {
        SingTag::Toi { kind, .. } => {
            let name = match kind {
                ToiKind::Tetrahedral => "tetrahedral",
                ToiKind::Octahedral => "octahedral",
                ToiKind::Icosahedral => "icosahedral",
            };
            format!("{tag} ({name}, order bound only)")
        }
        _ => tag.to_string(),
    }
}

pub fn lc_human(lc: LcClass) -> String {
    lc.to_string()
}
