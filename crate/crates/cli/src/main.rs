//! `current1d`: batch front-end for the current1d toolkit.
//!
//! Exit status is 0 when every check passes, 2 when a report was written
//! but some check failed, and 1 on bad input.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{CommandFactory, Parser, Subcommand};
use current1d::geometry::NormKind;
use current1d::suite::SuiteSizes;
use serde::Serialize;

use commands::{ApproxArgs, Ctx};
use config::{ExperimentConfig, Format};
use report::Done;

#[derive(Parser)]
#[command(name = "current1d", version, about = "Metric 1-currents: fillings, flat norms and decompositions")]
struct Cli {
    /// JSON file with default settings; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance used by the pass/fail checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arens–Eells norm of a molecule.
    AeNorm { space: PathBuf, molecule: PathBuf },
    /// Minimal filling of a molecule on a graph.
    Filling { space: PathBuf, molecule: PathBuf },
    /// Compare the filling mass of a chain with the AE norm of its boundary.
    IsoCheck {
        space: Option<PathBuf>,
        chain: Option<PathBuf>,
        /// Use a bundled instance instead of files (`v-detour`).
        #[arg(long, conflicts_with_all = ["space", "chain"])]
        fixture: Option<String>,
        /// Detour factor of the `v-detour` fixture.
        #[arg(long, default_value_t = 2.0)]
        detour: f64,
    },
    /// Flat norm of a lattice chain.
    Flatnorm {
        chain: PathBuf,
        /// Cells and cell size, `nx,ny,h`.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize, f64)>,
        /// Lower-left corner of the grid, `x,y`.
        #[arg(long, value_parser = parse_pair)]
        origin: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_norm, default_value = "l2")]
        norm: NormKind,
    },
    /// Straight-line homotopy between two polylines.
    Homotopy {
        chain0: PathBuf,
        chain1: PathBuf,
        #[arg(long)]
        panel_seed: Option<u64>,
        #[arg(long)]
        quad_tol: Option<f64>,
        #[arg(long, value_parser = parse_norm, default_value = "l2")]
        norm: NormKind,
    },
    /// Compress a curve measure into a geodesic chain.
    Approx {
        measure: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        mesh: Option<f64>,
        #[arg(long)]
        length_cap: Option<f64>,
        /// Also write the approximating chain as `chain.json`.
        #[arg(long, value_name = "PATH")]
        chain_out: Option<PathBuf>,
    },
    /// Close a chain on a line into a cycle.
    Normalize {
        chain: PathBuf,
        /// The line `a x + b y = c`, as `a,b,c`.
        #[arg(long, value_parser = parse_triple)]
        hyperplane: Option<[f64; 3]>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_parser = parse_norm, default_value = "l2")]
        norm: NormKind,
    },
    /// Paths and cycles of an edge flow.
    Decompose { space: PathBuf, flow: PathBuf },
    /// Fragments of the decomposed curves inside a closed set.
    Fragments {
        space: PathBuf,
        flow: PathBuf,
        closed_set: PathBuf,
        #[arg(long, value_parser = parse_norm, default_value = "l2")]
        norm: NormKind,
    },
    /// Lower bound on the two-column Rickman rug.
    Rickman {
        #[arg(long)]
        s_grid: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        rows: Option<usize>,
    },
    /// The full property battery.
    Suite,
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"))).collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_grid(s: &str) -> Result<(usize, usize, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected nx,ny,h".into());
    }
    let nx = parts[0].trim().parse().map_err(|e| format!("nx: {e}"))?;
    let ny = parts[1].trim().parse().map_err(|e| format!("ny: {e}"))?;
    let h = parts[2].trim().parse().map_err(|e| format!("h: {e}"))?;
    Ok((nx, ny, h))
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    numbers(s, 2).map(|v| [v[0], v[1]])
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    numbers(s, 3).map(|v| [v[0], v[1], v[2]])
}

fn parse_norm(s: &str) -> Result<NormKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown norm `{s}`; use l1, l2 or linf"))
}

#[derive(Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorReport {
    error: ErrorBody,
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    use current1d::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::InvalidInput(_)) => "invalid_input",
        Some(E::Unbalanced(_)) => "unbalanced",
        Some(E::OffSpace(_)) => "off_space",
        Some(E::Infeasible(_)) => "infeasible",
        Some(E::Unbounded) => "unbounded",
        Some(E::IterationLimit(_)) => "iteration_limit",
        Some(E::Disconnected) => "disconnected",
        Some(E::OffGrid(_)) => "off_grid",
        Some(E::UnsupportedMap(_)) => "unsupported_map",
        Some(E::NonConvexPrimitive(_)) => "non_convex_primitive",
        Some(E::MalformedPartition(_)) => "malformed_partition",
        Some(E::DimensionMismatch(_)) => "dimension_mismatch",
        Some(E::OutsideConvexSet) => "outside_convex_set",
        Some(E::NoAdmissibleShift(_)) => "no_admissible_shift",
        Some(E::IterationBudget(_)) => "iteration_budget",
        Some(E::NotInHyperplane) => "not_in_hyperplane",
        None => "io",
    }
}

fn init_logging() -> anyhow::Result<()> {
    let level = match std::env::var("CURRENT1D_LOG").as_deref() {
        Err(_) | Ok("off") | Ok("") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        Ok(other) => return Err(anyhow!("CURRENT1D_LOG must be off, info or debug, not `{other}`")),
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).target(env_logger::Target::Stderr).init();
    Ok(())
}

struct Settings {
    format: Format,
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> anyhow::Result<(Done, Settings)> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(cfg.seed);
    let ctx = Ctx {
        seed: seed.unwrap_or(0),
        tol: cli.tol.or(cfg.tol),
    };
    if let Some(t) = ctx.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(current1d::Error::InvalidInput("--tol must be a finite number ≥ 0".into()).into());
        }
    }
    let settings = Settings {
        format: cli.format.or(cfg.format).unwrap_or(Format::Json),
        out: cli.out.or(cfg.out.clone()),
    };
    log::info!("seed {}, format {:?}", ctx.seed, settings.format);
    let done = match cli.command {
        Command::AeNorm { space, molecule } => commands::ae_norm_cmd(&ctx, &space, &molecule)?,
        Command::Filling { space, molecule } => commands::filling_cmd(&ctx, &space, &molecule)?,
        Command::IsoCheck { space, chain, fixture, detour } => commands::iso_check_cmd(&ctx, space.as_deref(), chain.as_deref(), fixture.as_deref(), detour)?,
        Command::Flatnorm { chain, grid, origin, norm } => {
            let p = cfg.flatnorm.unwrap_or_default();
            let grid = grid.or(p.grid).ok_or_else(|| anyhow!(current1d::Error::InvalidInput("flatnorm needs --grid nx,ny,h".into())))?;
            commands::flatnorm_cmd(&ctx, &chain, grid, origin.or(p.origin).unwrap_or([0.0, 0.0]), norm)?
        }
        Command::Homotopy { chain0, chain1, panel_seed, quad_tol, norm } => {
            let p = cfg.homotopy.unwrap_or_default();
            commands::homotopy_cmd(&ctx, [&chain0, &chain1], panel_seed.or(p.panel_seed), quad_tol.or(p.quad_tol), norm)?
        }
        Command::Approx { measure, eps, mesh, length_cap, chain_out } => {
            let p = cfg.approx.unwrap_or_default();
            let args = ApproxArgs {
                measure: &measure,
                eps: eps.or(p.eps).unwrap_or(0.1),
                mesh: mesh.or(p.mesh).unwrap_or(0.125),
                length_cap: length_cap.or(p.length_cap),
                chain_out: chain_out.as_deref(),
            };
            commands::approx_cmd(&ctx, args)?
        }
        Command::Normalize { chain, hyperplane, eps, norm } => {
            let p = cfg.normalize.unwrap_or_default();
            commands::normalize_cmd(&ctx, &chain, hyperplane.or(p.hyperplane).unwrap_or([0.0, 1.0, 0.0]), eps.or(p.eps).unwrap_or(0.1), norm)?
        }
        Command::Decompose { space, flow } => commands::decompose_cmd(&ctx, &space, &flow)?,
        Command::Fragments { space, flow, closed_set, norm } => commands::fragments_cmd(&ctx, &space, &flow, &closed_set, norm)?,
        Command::Rickman { s_grid, alpha, rows } => {
            let p = cfg.rickman.unwrap_or_default();
            commands::rickman_cmd(&ctx, s_grid.or(p.s_grid).unwrap_or(32), alpha.or(p.alpha).unwrap_or(0.5), rows.or(p.rows).unwrap_or(4))?
        }
        Command::Suite => commands::suite_cmd(seed, cfg.suite.unwrap_or_else(SuiteSizes::default))?,
    };
    Ok((done, settings))
}

fn emit(done: &Done, settings: &Settings) -> anyhow::Result<()> {
    let text = match settings.format {
        Format::Json => done.json.clone(),
        Format::Csv => done
            .table
            .as_ref()
            .ok_or_else(|| anyhow!(current1d::Error::InvalidInput("this command has no CSV form; use --format json".into())))?
            .to_csv()?,
    };
    match &settings.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn fail(e: anyhow::Error) -> ExitCode {
    let report = ErrorReport {
        error: ErrorBody {
            kind: error_kind(&e),
            message: format!("{e:#}"),
        },
    };
    eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
    eprintln!("{}", Cli::command().render_usage());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_logging() {
        return fail(e);
    }
    let (done, settings) = match dispatch(cli) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    if let Err(e) = emit(&done, &settings) {
        return fail(e);
    }
    if done.passed {
        log::info!("all checks passed");
        ExitCode::SUCCESS
    } else {
        log::info!("some checks failed");
        ExitCode::from(2)
    }
}
