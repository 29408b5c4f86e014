//! Command implementations: parse inputs, call the core library, render.

use minmod_core::baskets::{enumerate_baskets, EnumOptions, KnockoutList};
use minmod_core::linalg::QMatrix;
use minmod_core::models::{contract, fibrations, minimal_models, ModelError};
use minmod_core::num::{fmt_rat, parse_rat};
use minmod_core::qforms::{
    embedding_obstruction_gram, hilbert, invariants, legendre, DiagonalForm, EmbeddingOutcome,
    Place,
};
use minmod_core::report;
use minmod_core::sing::{cyclic_dx2, dihedral_data, hj_det};
use minmod_core::surface::SurfaceConfiguration;
use num::BigInt;

use crate::render;

pub enum CliError {
    /// Bad input or failed validation; exit code 1.
    Input(String),
    /// Violated internal invariant; exit code 2.
    Internal(String),
}

type CliResult = Result<(), CliError>;

fn input_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn model_err(e: ModelError) -> CliError {
    match e {
        ModelError::Internal(msg) => CliError::Internal(msg),
        other => CliError::Input(other.to_string()),
    }
}

/// Loads and validates a configuration; validation failures name every
/// violated invariant.
pub fn parse_input(path: &str) -> Result<SurfaceConfiguration, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read `{path}`: {e}")))?;
    let config = SurfaceConfiguration::from_json(&text).map_err(input_err)?;
    let report = config.validate();
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(CliError::Input(format!(
            "configuration `{}` is invalid: {}",
            config.name,
            list.join("; ")
        )));
    }
    Ok(config)
}

pub fn surf_validate(path: &str, json: bool) -> CliResult {
    // validate reports violations rather than failing, so parse leniently
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read `{path}`: {e}")))?;
    let config = SurfaceConfiguration::from_json(&text).map_err(input_err)?;
    let validation = config.validate();
    let out = report::validation_report(&config, &validation);
    render::emit("surf.validate", json, &out, |w| render::validation_text(w, &out));
    if validation.is_valid() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "configuration `{}` is invalid: {}",
            config.name,
            out.violations.join("; ")
        )))
    }
}

pub fn surf_fibrations(path: &str, json: bool) -> CliResult {
    let config = parse_input(path)?;
    let fibs = fibrations(&config).map_err(model_err)?;
    let out = report::fibration_report(&config, &fibs);
    render::emit("surf.fibrations", json, &out, |w| render::fibrations_text(w, &out));
    Ok(())
}

pub fn surf_models(path: &str, json: bool) -> CliResult {
    let config = parse_input(path)?;
    let models = minimal_models(&config).map_err(model_err)?;
    let out = report::model_report(&config, &models);
    render::emit("surf.models", json, &out, |w| render::models_text(w, &out));
    Ok(())
}

pub fn surf_contract(path: &str, set: &[String], json: bool) -> CliResult {
    let config = parse_input(path)?;
    let outcome = contract(&config, set).map_err(model_err)?;
    let out = report::contraction_report(&outcome);
    render::emit("surf.contract", json, &out, |w| render::contraction_text(w, &out));
    Ok(())
}

fn parse_string_arg(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Input(format!("invalid string entry `{part}`")))
        })
        .collect()
}

pub fn hj_eval(string: &str, json: bool) -> CliResult {
    let string = parse_string_arg(string)?;
    let (q, q1) = hj_det(&string).map_err(input_err)?;
    let (_, q1_rev) = {
        let mut rev = string.clone();
        rev.reverse();
        hj_det(&rev).map_err(input_err)?
    };
    let out = render::HjEvalOut {
        string: string.clone(),
        q: q.to_string(),
        q1: q1.to_string(),
        q1_reversed: q1_rev.to_string(),
    };
    render::emit("hj.eval", json, &out, |w| {
        render::line(w, format!(
            "[{}] resolves 1/{}(1,{}) (reverse reading: 1/{}(1,{}))",
            render::join_u64(&string), q, q1, q, q1_rev
        ))
    });
    Ok(())
}

pub fn hj_expand(q: i64, q1: i64, json: bool) -> CliResult {
    let string = minmod_core::sing::hj_expand(&BigInt::from(q), &BigInt::from(q1))
        .map_err(input_err)?;
    let out = render::HjExpandOut { q, q1, string: string.clone() };
    render::emit("hj.expand", json, &out, |w| {
        render::line(w, format!("1/{q}(1,{q1}) = [{}]", render::join_u64(&string)))
    });
    Ok(())
}

pub fn hj_dx2(string: &str, json: bool) -> CliResult {
    let string = parse_string_arg(string)?;
    let value = cyclic_dx2(&string).map_err(input_err)?;
    let solver = {
        let graph = minmod_core::sing::build_chain_graph(&string).map_err(input_err)?;
        minmod_core::sing::discrepancies(&graph).map_err(|e| CliError::Internal(e.to_string()))?
    };
    if solver.dx2 != value {
        return Err(CliError::Internal(format!(
            "closed form {} disagrees with the discrepancy solver {}",
            fmt_rat(&value),
            fmt_rat(&solver.dx2)
        )));
    }
    let out = render::HjDx2Out {
        string: string.clone(),
        dx2: fmt_rat(&value),
        discrepancies: solver.coefficients.iter().map(fmt_rat).collect(),
    };
    render::emit("hj.dx2", json, &out, |w| {
        render::line(w, format!("D_x^2([{}]) = {}", render::join_u64(&string), fmt_rat(&value)))
    });
    Ok(())
}

pub fn hj_star(b: u64, string: &str, json: bool) -> CliResult {
    let string = parse_string_arg(string)?;
    let data = dihedral_data(b, &string).map_err(input_err)?;
    let graph = minmod_core::sing::build_star_graph(b, &[&[2], &[2], &string])
        .map_err(input_err)?;
    let solver = minmod_core::sing::discrepancies(&graph)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    if solver.dx2 != data.dx2 {
        return Err(CliError::Internal("closed form disagrees with the solver".into()));
    }
    let (q, q1) = hj_det(&string).map_err(input_err)?;
    let order: BigInt = BigInt::from(4) * &q * ((BigInt::from(b) - 1) * &q - &q1);
    let out = render::HjStarOut {
        b,
        string: string.clone(),
        det_rx: data.det_rx.to_string(),
        a_end: fmt_rat(&data.a_end),
        dx2: fmt_rat(&data.dx2),
        group_order: order.to_string(),
        discrepancies: solver.coefficients.iter().map(fmt_rat).collect(),
    };
    render::emit("hj.star", json, &out, |w| render::star_text(w, &out));
    Ok(())
}

pub fn qf_legendre(a: i64, p: u64, json: bool) -> CliResult {
    let value = legendre(&BigInt::from(a), p).map_err(input_err)?;
    let out = render::LegendreOut { a, p, value };
    render::emit("qf.legendre", json, &out, |w| {
        render::line(w, format!("({a}/{p}) = {value}"))
    });
    Ok(())
}

pub fn qf_hilbert(a: &str, b: &str, place: &str, json: bool) -> CliResult {
    let a = parse_rat(a).map_err(CliError::Input)?;
    let b = parse_rat(b).map_err(CliError::Input)?;
    let place = Place::parse(place).map_err(CliError::Input)?;
    let value = hilbert(&a, &b, place).map_err(input_err)?;
    let out = render::HilbertOut {
        a: fmt_rat(&a),
        b: fmt_rat(&b),
        place: place.to_string(),
        value,
    };
    render::emit("qf.hilbert", json, &out, |w| {
        render::line(w, format!("({}, {})_{} = {}", fmt_rat(&a), fmt_rat(&b), place, value))
    });
    Ok(())
}

pub fn qf_invariants(diag: &[String], place: &str, json: bool) -> CliResult {
    let place = Place::parse(place).map_err(CliError::Input)?;
    let entries = diag
        .iter()
        .map(|s| parse_rat(s.trim()).map_err(CliError::Input))
        .collect::<Result<Vec<_>, _>>()?;
    let form = DiagonalForm::new(entries).map_err(input_err)?;
    let inv = invariants(&form, place).map_err(input_err)?;
    let out = render::invariants_out(&inv);
    render::emit("qf.invariants", json, &out, |w| render::invariants_text(w, &out));
    Ok(())
}

pub fn qf_embed(path: &str, k2: i64, rho0: u32, json: bool) -> CliResult {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read `{path}`: {e}")))?;
    let gram = parse_gram_json(&text)?;
    let outcome = embedding_obstruction_gram(&gram, k2, rho0).map_err(input_err)?;
    let out = render::EmbedOut {
        k2,
        rho0,
        rank: gram.rows(),
        pass: outcome.passed(),
        reason: match &outcome {
            EmbeddingOutcome::Pass => None,
            EmbeddingOutcome::Fail(reason) => Some(reason.to_string()),
        },
    };
    render::emit("qf.embed", json, &out, |w| render::embed_text(w, &out));
    Ok(())
}

fn parse_gram_json(text: &str) -> Result<QMatrix, CliError> {
    #[derive(serde::Deserialize)]
    struct Wrapper {
        gram: Vec<Vec<i64>>,
    }
    let rows: Vec<Vec<i64>> = match serde_json::from_str::<Vec<Vec<i64>>>(text) {
        Ok(rows) => rows,
        Err(_) => {
            serde_json::from_str::<Wrapper>(text)
                .map_err(|e| CliError::Input(format!("invalid gram file: {e}")))?
                .gram
        }
    };
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(CliError::Input("gram matrix must be square and nonempty".into()));
    }
    Ok(QMatrix::from_int_rows(&rows))
}

#[allow(clippy::too_many_arguments)]
pub fn enum_baskets(
    rho0: u32,
    sing: usize,
    k2_min: i64,
    k2_max: i64,
    knockouts: Option<&str>,
    m_cap: u64,
    jobs: Option<usize>,
    json: bool,
) -> CliResult {
    let knockouts = match knockouts {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read `{path}`: {e}")))?;
            KnockoutList::from_json(&text).map_err(input_err)?
        }
        None => KnockoutList::default(),
    };
    let options = EnumOptions { k2_min, k2_max, m_cap, knockouts, jobs };
    let result = enumerate_baskets(rho0, sing, &options).map_err(input_err)?;
    let out = report::enumeration_out(&result);
    render::emit("enum.baskets", json, &out, |w| render::enumeration_text(w, &out));
    Ok(())
}
