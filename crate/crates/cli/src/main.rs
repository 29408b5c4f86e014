//! `minmod`: fibrations, combinatorially minimal models and singularity
//! baskets for surfaces given by their negative-curve intersection data.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 internal invariant
//! violation.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod render;

#[derive(Parser)]
#[command(name = "minmod", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Surface configuration analysis: validation, fibrations, minimal
    /// models, explicit contractions.
    Surf(SurfArgs),
    /// Hirzebruch-Jung string numerics.
    Hj(HjArgs),
    /// Quadratic form invariants and lattice embedding tests.
    Qf(QfArgs),
    /// Basket enumeration for combinatorially minimal models.
    Enum(EnumArgs),
}

#[derive(Args)]
struct SurfArgs {
    #[command(subcommand)]
    action: SurfAction,
}

#[derive(Subcommand)]
enum SurfAction {
    /// Check symmetry, diagonal, rank and signature invariants.
    Validate(SurfIo),
    /// List the fibrations (extremal nef classes of square zero).
    Fibrations(SurfIo),
    /// List every combinatorially minimal model reachable by contraction.
    Models(SurfIo),
    /// Contract a named set of curves.
    Contract(SurfContract),
}

#[derive(Args)]
struct SurfIo {
    /// Path to a surface configuration JSON file.
    #[arg(long)]
    input: String,
    /// Emit machine-readable JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SurfContract {
    #[arg(long)]
    input: String,
    /// Comma-separated curve names to contract; empty contracts nothing.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "")]
    set: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct HjArgs {
    #[command(subcommand)]
    action: HjAction,
}

#[derive(Subcommand)]
enum HjAction {
    /// Determinant pair (q, q1) of a string M1,M2,...
    Eval {
        string: String,
        #[arg(long)]
        json: bool,
    },
    /// Expand (q, q1) into its string.
    Expand {
        q: i64,
        q1: i64,
        #[arg(long)]
        json: bool,
    },
    /// Closed-form D_x^2 of a chain.
    Dx2 {
        string: String,
        #[arg(long)]
        json: bool,
    },
    /// Dihedral star data for center weight B and branch string M1,...
    Star {
        b: u64,
        string: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct QfArgs {
    #[command(subcommand)]
    action: QfAction,
}

#[derive(Subcommand)]
enum QfAction {
    /// Legendre symbol (A/P) for an odd prime P.
    Legendre {
        a: i64,
        p: u64,
        #[arg(long)]
        json: bool,
    },
    /// Hilbert symbol (A, B) at a place ("inf" or a prime). Negative
    /// arguments go after a `--` separator.
    Hilbert {
        a: String,
        b: String,
        place: String,
        #[arg(long)]
        json: bool,
    },
    /// Rank, discriminant class and eps invariant of a diagonal form.
    Invariants {
        /// Comma-separated diagonal entries, rationals as p/q.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        diag: Vec<String>,
        #[arg(long)]
        place: String,
        #[arg(long)]
        json: bool,
    },
    /// Lattice embedding obstruction against the odd unimodular lattice.
    Embed {
        /// JSON file holding the exceptional Gram matrix (either a bare
        /// 2D array or an object with a "gram" field).
        #[arg(long)]
        input: String,
        #[arg(long)]
        k2: i64,
        #[arg(long)]
        rho0: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct EnumArgs {
    #[command(subcommand)]
    action: EnumAction,
}

#[derive(Subcommand)]
enum EnumAction {
    /// Enumerate admissible singularity baskets.
    Baskets {
        #[arg(long)]
        rho0: u32,
        #[arg(long)]
        sing: usize,
        #[arg(long, default_value_t = 1)]
        k2_min: i64,
        #[arg(long, default_value_t = 9)]
        k2_max: i64,
        /// Knockout list JSON file.
        #[arg(long)]
        knockouts: Option<String>,
        #[arg(long, default_value_t = 12)]
        m_cap: u64,
        /// Worker threads for the filter pipeline (output order unaffected).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are successes; anything else is an
            // input error (exit code 1, not clap's default 2)
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Surf(args) => match args.action {
            SurfAction::Validate(io) => commands::surf_validate(&io.input, io.json),
            SurfAction::Fibrations(io) => commands::surf_fibrations(&io.input, io.json),
            SurfAction::Models(io) => commands::surf_models(&io.input, io.json),
            SurfAction::Contract(c) => {
                let set: Vec<String> =
                    c.set.into_iter().filter(|s| !s.trim().is_empty()).collect();
                commands::surf_contract(&c.input, &set, c.json)
            }
        },
        Command::Hj(args) => match args.action {
            HjAction::Eval { string, json } => commands::hj_eval(&string, json),
            HjAction::Expand { q, q1, json } => commands::hj_expand(q, q1, json),
            HjAction::Dx2 { string, json } => commands::hj_dx2(&string, json),
            HjAction::Star { b, string, json } => commands::hj_star(b, &string, json),
        },
        Command::Qf(args) => match args.action {
            QfAction::Legendre { a, p, json } => commands::qf_legendre(a, p, json),
            QfAction::Hilbert { a, b, place, json } => commands::qf_hilbert(&a, &b, &place, json),
            QfAction::Invariants { diag, place, json } => {
                commands::qf_invariants(&diag, &place, json)
            }
            QfAction::Embed { input, k2, rho0, json } => {
                commands::qf_embed(&input, k2, rho0, json)
            }
        },
        Command::Enum(args) => match args.action {
            EnumAction::Baskets {
                rho0,
                sing,
                k2_min,
                k2_max,
                knockouts,
                m_cap,
                jobs,
                json,
            } => commands::enum_baskets(
                rho0,
                sing,
                k2_min,
                k2_max,
                knockouts.as_deref(),
                m_cap,
                jobs,
                json,
            ),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
