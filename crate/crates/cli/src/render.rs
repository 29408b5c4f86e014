//! Output as human text or as a JSON envelope `{"command", "result"}`.

use minmod_core::qforms::{DiscClass, PlaceInvariants};
use minmod_core::report::{
    ContractionOut, EnumerationOut, FibrationOut, ModelOut, ValidationOut, WitnessOut,
};
use serde::Serialize;

pub fn emit<T: Serialize>(command: &str, json: bool, payload: &T, text: impl Fn(&mut String)) {
    if json {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            command: &'a str,
            result: &'a T,
        }
        let body = serde_json::to_string_pretty(&Envelope { command, result: payload })
            .expect("report serializes");
        println!("{body}");
    } else {
        let mut out = String::new();
        text(&mut out);
        print!("{out}");
    }
}

pub fn line(out: &mut String, text: String) {
    out.push_str(&text);
    out.push('\n');
}

pub fn join_u64(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Groups consecutive repeated point names: A1 + A1 + A3 becomes 2xA1 + A3.
fn grouped_points(points: &[String]) -> String {
    let mut groups: Vec<(&str, usize)> = Vec::new();
    for p in points {
        match groups.last_mut() {
            Some((name, n)) if *name == p.as_str() => *n += 1,
            _ => groups.push((p.as_str(), 1)),
        }
    }
    groups
        .into_iter()
        .map(|(name, n)| if n == 1 { name.to_string() } else { format!("{n}x{name}") })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn named_class(map: &std::collections::BTreeMap<String, String>) -> String {
    if map.is_empty() {
        return "0".to_string();
    }
    map.iter()
        .map(|(name, c)| if c == "1" { name.clone() } else { format!("{c}*{name}") })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn validation_text(out: &mut String, v: &ValidationOut) {
    if v.valid {
        line(out, format!("{}: valid", v.name));
    } else {
        line(out, format!("{}: INVALID", v.name));
        for violation in &v.violations {
            line(out, format!("  - {violation}"));
        }
    }
    line(out, format!("rank: {}", v.rank));
    if let Some(sig) = &v.signature {
        line(out, format!("signature: ({}, {}, {})", sig.plus, sig.minus, sig.zero));
    }
}

pub fn fibrations_text(out: &mut String, fibs: &[FibrationOut]) {
    line(out, format!("{} fibration(s)", fibs.len()));
    for (i, f) in fibs.iter().enumerate() {
        line(out, format!("fibration {}: {}", i + 1, named_class(&f.class)));
        line(out, format!("  contracts: {}", f.contracted_curves.join(", ")));
    }
}

pub fn models_text(out: &mut String, models: &[ModelOut]) {
    if models.is_empty() {
        line(out, "no models".to_string());
        return;
    }
    line(out, format!("{} combinatorially minimal model(s)", models.len()));
    for (i, m) in models.iter().enumerate() {
        let header = if m.already_minimal {
            format!("model {}: rho0 = {}, already minimal", i + 1, m.rho0)
        } else {
            format!(
                "model {}: rho0 = {}, contract {{{}}}",
                i + 1,
                m.rho0,
                m.contracted.join(", ")
            )
        };
        line(out, header);
        line(out, format!("  K0^2 = {}", serde_plain(&m.k0_squared)));
        match &m.witness {
            WitnessOut::PositiveNefRay { class, self_intersection } => {
                line(
                    out,
                    format!(
                        "  witness: nef ray {} with square {}",
                        named_class(class),
                        serde_plain(self_intersection)
                    ),
                );
            }
            WitnessOut::FibrationPairs { pairs } => {
                for (a, b) in pairs {
                    line(
                        out,
                        format!("  witness pair: {} | {}", named_class(a), named_class(b)),
                    );
                }
            }
        }
        for p in &m.singular_points {
            line(
                out,
                format!(
                    "  singular point {{{}}}: {} ({}), D_x^2 = {}",
                    p.curves.join(", "),
                    p.kind,
                    p.lc_class,
                    serde_plain(&p.dx2)
                ),
            );
        }
    }
}

pub fn contraction_text(out: &mut String, c: &ContractionOut) {
    line(out, format!("rho0 = {}", c.rho0));
    line(out, format!("K0^2 = {}", serde_plain(&c.k0_squared)));
    if c.singular_points.is_empty() {
        line(out, "no singular points".to_string());
    }
    for p in &c.singular_points {
        line(
            out,
            format!(
                "singular point {{{}}}: {} ({}), D_x^2 = {}, a = [{}]",
                p.curves.join(", "),
                p.kind,
                p.lc_class,
                serde_plain(&p.dx2),
                p.discrepancies
                    .iter()
                    .map(serde_plain)
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
    }
}

/// Renders a `Q` (or any transparently serialized scalar) to its string.
fn serde_plain<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value).expect("serializable") {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

#[derive(Serialize)]
pub struct HjEvalOut {
    pub string: Vec<u64>,
    pub q: String,
    pub q1: String,
    pub q1_reversed: String,
}

#[derive(Serialize)]
pub struct HjExpandOut {
    pub q: i64,
    pub q1: i64,
    pub string: Vec<u64>,
}

#[derive(Serialize)]
pub struct HjDx2Out {
    pub string: Vec<u64>,
    pub dx2: String,
    pub discrepancies: Vec<String>,
}

#[derive(Serialize)]
pub struct HjStarOut {
    pub b: u64,
    pub string: Vec<u64>,
    pub det_rx: String,
    pub a_end: String,
    pub dx2: String,
    pub group_order: String,
    pub discrepancies: Vec<String>,
}

pub fn star_text(out: &mut String, s: &HjStarOut) {
    line(out, format!("star <{}; 2; 2; [{}]>", s.b, join_u64(&s.string)));
    line(out, format!("det(R_x) = {}", s.det_rx));
    line(out, format!("a_end = {}", s.a_end));
    line(out, format!("D_x^2 = {}", s.dx2));
    line(out, format!("group order = {}", s.group_order));
    line(out, format!("discrepancies = [{}]", s.discrepancies.join(", ")));
}

#[derive(Serialize)]
pub struct LegendreOut {
    pub a: i64,
    pub p: u64,
    pub value: i8,
}

#[derive(Serialize)]
pub struct HilbertOut {
    pub a: String,
    pub b: String,
    pub place: String,
    pub value: i8,
}

#[derive(Serialize)]
pub struct InvariantsOut {
    pub place: String,
    pub rank: usize,
    pub disc: String,
    pub eps: i8,
    pub signature: Option<(usize, usize)>,
}

pub fn invariants_out(inv: &PlaceInvariants) -> InvariantsOut {
    let disc = match &inv.disc {
        DiscClass::Real { negative } => if *negative { "-1" } else { "1" }.to_string(),
        DiscClass::Odd { valuation_odd, unit_is_residue } => format!(
            "{}{}",
            if *valuation_odd { "p*" } else { "" },
            if *unit_is_residue { "square unit" } else { "non-residue unit" }
        ),
        DiscClass::Two { valuation_odd, unit_mod_8 } => format!(
            "{}unit {} mod 8",
            if *valuation_odd { "2*" } else { "" },
            unit_mod_8
        ),
    };
    InvariantsOut {
        place: inv.place.to_string(),
        rank: inv.rank,
        disc,
        eps: inv.eps,
        signature: inv.signature,
    }
}

pub fn invariants_text(out: &mut String, inv: &InvariantsOut) {
    line(out, format!("place: {}", inv.place));
    line(out, format!("rank: {}", inv.rank));
    line(out, format!("disc class: {}", inv.disc));
    line(out, format!("eps: {}", inv.eps));
    if let Some((p, m)) = inv.signature {
        line(out, format!("signature: ({p}, {m})"));
    }
}

#[derive(Serialize)]
pub struct EmbedOut {
    pub k2: i64,
    pub rho0: u32,
    pub rank: usize,
    pub pass: bool,
    pub reason: Option<String>,
}

pub fn embed_text(out: &mut String, e: &EmbedOut) {
    if e.pass {
        line(
            out,
            format!(
                "pass: rank-{} lattice is consistent with I(1,{}) at every checked place",
                e.rank,
                9 - e.k2
            ),
        );
    } else {
        line(out, format!("fail: {}", e.reason.as_deref().unwrap_or("obstruction")));
    }
}

pub fn enumeration_text(out: &mut String, e: &EnumerationOut) {
    line(
        out,
        format!(
            "rho0 = {}, {} singular point(s), {} candidate(s) generated{}",
            e.rho0,
            e.num_sing,
            e.generated,
            if e.validated { "" } else { " [unvalidated range]" }
        ),
    );
    if e.cap_touched {
        line(out, "note: some candidate touched the m-cap; a larger --m-cap may add more".into());
    }
    line(out, format!("survivors: {}", e.survivors.len()));
    for s in &e.survivors {
        line(
            out,
            format!(
                "  k2={} {} orders {} K0^2={}",
                s.k2,
                grouped_points(&s.points),
                s.order_tuple,
                serde_plain(&s.k0_squared)
            ),
        );
    }
    if !e.needs_external_data.is_empty() {
        line(out, format!("requires external data: {}", e.needs_external_data.len()));
        for s in &e.needs_external_data {
            line(out, format!("  k2={} {} orders {}", s.k2, grouped_points(&s.points), s.order_tuple));
        }
    }
    line(out, format!("eliminations: {}", e.eliminations.len()));
    for t in &e.eliminations {
        let failed: Vec<String> = t
            .verdicts
            .iter()
            .filter(|v| !v.pass)
            .map(|v| format!("{}: {}", v.filter, v.witness))
            .collect();
        line(
            out,
            format!("  k2={} {} -- {}", t.candidate.k2, grouped_points(&t.candidate.points), failed.join(" | ")),
        );
    }
}
