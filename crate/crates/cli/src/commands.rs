//! One function per subcommand. Each returns the finished report.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use current1d::approximation::{approximate, truncate, ApproxCertificate, CurveMeasure};
use current1d::currents::{ClosedSet, Molecule, TestForm};
use current1d::decomposition::{decompose_flow, fragment_representation, rickman_row, Decomposition, EdgeFlow, FragmentRepresentation, RickmanRow};
use current1d::flatnorm::{flat_norm, CubicalComplex, FlatResult};
use current1d::geometry::{Line, NormKind, Point};
use current1d::homotopy::{homotopy_fill_with, QUAD_TOL};
use current1d::io::{from_json, to_json, ChainFile, Space, SpaceFile};
use current1d::rng::SeedTree;
use current1d::spaces::{DistMatrix, MetricGraph};
use current1d::structure::NormalizeResult;
use current1d::suite::{SuiteReport, SuiteSizes};
use current1d::transport::{ae_norm, ae_norm_plane, check_ae_certificate, isomorphism_check, minimal_filling, AeResult, IsoReport};
use current1d::{fixtures, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::{Cell, Done, Flags, Table};

/// Settings shared by every command after merging flags and config.
pub struct Ctx {
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Ctx {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {what} file {}", path.display()))?;
    Ok(from_json(&text, &format!("{what} ({})", path.display()))?)
}

fn load_space(path: &Path) -> anyhow::Result<Space> {
    Ok(read::<SpaceFile>(path, "space")?.load()?)
}

fn load_graph(path: &Path) -> anyhow::Result<MetricGraph> {
    match load_space(path)? {
        Space::Graph(g) => Ok(g),
        _ => bail!(Error::InvalidInput(format!("{} must describe a graph", path.display()))),
    }
}

#[derive(Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
struct AeReport<P> {
    #[serde(flatten)]
    ae: AeResult<P>,
    /// Under the intrinsic metric, for graphs.
    #[serde(skip_serializing_if = "Option::is_none")]
    ae_intrinsic: Option<f64>,
}

pub fn ae_norm_cmd(ctx: &Ctx, space: &Path, molecule: &Path) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let mut flags = Flags::default();
    let check = |flags: &mut Flags, m: &Molecule<usize>, d: &DistMatrix| -> anyhow::Result<AeResult<usize>> {
        let r = ae_norm(m, d)?;
        flags.holds("Kantorovich certificate", check_ae_certificate(m, d, &r, tol));
        Ok(r)
    };
    match load_space(space)? {
        Space::Graph(g) => {
            let m: Molecule<usize> = read(molecule, "molecule")?;
            let ae = check(&mut flags, &m, &g.ambient_matrix())?;
            let intrinsic = ae_norm(&m, g.path_metric())?.value;
            flags.le("ae(d) ≤ ae(d_ℓ)", ae.value, intrinsic + tol);
            Done::new("ae-norm", ctx.seed, Some(tol), flags, AeReport { ae, ae_intrinsic: Some(intrinsic) }, None)
        }
        Space::Finite(x) => {
            let m: Molecule<usize> = read(molecule, "molecule")?;
            let ae = check(&mut flags, &m, x.dist())?;
            Done::new("ae-norm", ctx.seed, Some(tol), flags, AeReport { ae, ae_intrinsic: None }, None)
        }
        Space::Plane(norm) => {
            let m: Molecule<Point> = read(molecule, "molecule")?;
            let ae = ae_norm_plane(&m, norm)?;
            flags.close("coupling cost = value", ae.coupling_cost(|p, q| norm.dist(p, q)), ae.value, tol * (1.0 + ae.value));
            Done::new("ae-norm", ctx.seed, Some(tol), flags, AeReport { ae, ae_intrinsic: None }, None)
        }
    }
}

#[derive(Serialize)]
struct FillingReport {
    mass: f64,
    ae_intrinsic: f64,
    chain: ChainFile<usize>,
}

pub fn filling_cmd(ctx: &Ctx, space: &Path, molecule: &Path) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let g = load_graph(space)?;
    let m: Molecule<usize> = read(molecule, "molecule")?;
    let f = minimal_filling(&m, &g)?;
    let ae = ae_norm(&m, g.path_metric())?.value;
    let mut flags = Flags::default();
    flags.le("∂R = m atomwise", f.chain.boundary().max_atom_diff(&m), tol);
    flags.close("mass = ae(d_ℓ)", f.mass, ae, tol * (1.0 + ae));
    let report = FillingReport {
        mass: f.mass,
        ae_intrinsic: ae,
        chain: ChainFile::<usize>::from_chain(&f.chain),
    };
    Done::new("filling", ctx.seed, Some(tol), flags, report, None)
}

#[derive(Serialize)]
struct IsoOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    fixture: Option<String>,
    #[serde(flatten)]
    report: IsoReport,
}

pub fn iso_check_cmd(ctx: &Ctx, space: Option<&Path>, chain: Option<&Path>, fixture: Option<&str>, detour: f64) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let (g, t, name) = match (fixture, space, chain) {
        (Some("v-detour"), None, None) => {
            if !(detour >= 1.0 && detour.is_finite()) {
                bail!(Error::InvalidInput("detour factor must be at least 1".into()));
            }
            let (g, t) = fixtures::v_detour(detour)?;
            (g, t, Some(format!("v-detour({})", current1d::io::format_g17(detour))))
        }
        (Some(other), None, None) => bail!(Error::InvalidInput(format!("unknown fixture `{other}`; available: v-detour"))),
        (None, Some(s), Some(c)) => {
            let g = load_graph(s)?;
            let t = read::<ChainFile<usize>>(c, "chain")?.to_chain(&g)?;
            (g, t, None)
        }
        _ => bail!(Error::InvalidInput("pass SPACE and CHAIN, or --fixture alone".into())),
    };
    let r = isomorphism_check(&t, &g)?;
    let mut flags = Flags::default();
    flags.holds("qc⁻¹·ae(d) ≤ filling", r.lower_ok);
    flags.holds("filling ≤ qc·ae(d)", r.upper_ok);
    flags.holds("ae(d) ≤ filling", r.sharp_lower_ok);
    flags.holds("filling = ae(d_ℓ)", r.identity_ok);
    if let Some(ok) = r.geodesic_ok {
        flags.holds("filling = ae(d) on a geodesic graph", ok);
    }
    Done::new("iso-check", ctx.seed, Some(tol), flags, IsoOutput { fixture: name, report: r }, None)
}

#[derive(Serialize)]
struct FlatOutput {
    complex: CubicalComplex,
    mass: f64,
    residual: f64,
    #[serde(flatten)]
    flat: FlatResult,
}

pub fn flatnorm_cmd(ctx: &Ctx, chain: &Path, grid: (usize, usize, f64), origin: [f64; 2], norm: NormKind) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-8);
    let c = read::<ChainFile<Point>>(chain, "chain")?.to_chain(norm)?;
    let cx = CubicalComplex::new(Point::new(origin[0], origin[1]), grid.2, grid.0, grid.1)?;
    let t = cx.snap(&c)?;
    let flat = flat_norm(&t, &cx)?;
    let mass = cx.mass(&t);
    let residual = flat.decomposition_residual(&t, &cx);
    let mut flags = Flags::default();
    flags.le("t = r + ∂s", residual, tol);
    flags.le("flat ≤ mass", flat.value, mass + tol);
    Done::new("flatnorm", ctx.seed, Some(tol), flags, FlatOutput { complex: cx, mass, residual, flat }, None)
}

#[derive(Serialize)]
struct HomotopyOutput {
    norm: NormKind,
    panel_seed: u64,
    quad_tol: f64,
    len0: f64,
    len1: f64,
    d_inf: f64,
    cert_s: f64,
    cert_r: f64,
    measured_s: f64,
    measured_r: f64,
    boundary_residual: f64,
    r_chain: ChainFile<Point>,
}

pub fn homotopy_cmd(ctx: &Ctx, chains: [&Path; 2], panel_seed: Option<u64>, quad_tol: Option<f64>, norm: NormKind) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-6);
    let g0 = read::<ChainFile<Point>>(chains[0], "chain")?.to_polyline()?;
    let g1 = read::<ChainFile<Point>>(chains[1], "chain")?.to_polyline()?;
    let quad_tol = quad_tol.unwrap_or(QUAD_TOL);
    if !(quad_tol > 0.0) {
        bail!(Error::InvalidInput("--quad-tol must be positive".into()));
    }
    let fill = homotopy_fill_with(&g0, &g1, norm, quad_tol)?;
    let panel_seed = panel_seed.unwrap_or(ctx.seed);
    let (lo, hi) = g0
        .points
        .iter()
        .chain(&g1.points)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x.min(p.y)), hi.max(p.x.max(p.y))));
    let forms = TestForm::panel(&mut SeedTree::new(panel_seed).named("panel").rng(), 20, lo - 0.5, hi + 0.5);
    let boundary_residual = fill.max_scaled_residual(&forms);
    let mut flags = Flags::default();
    flags.le("boundary identity on the form panel", boundary_residual, tol);
    flags.le("M(S) ≤ (ℓ⁰ + ℓ¹)·d_∞", fill.measured_s, fill.cert_s + tol);
    flags.le("M(R) ≤ endpoint distances", fill.r_chain.mass(), fill.cert_r + 1e-9);
    let out = HomotopyOutput {
        norm,
        panel_seed,
        quad_tol,
        len0: fill.len0,
        len1: fill.len1,
        d_inf: fill.d_inf,
        cert_s: fill.cert_s,
        cert_r: fill.cert_r,
        measured_s: fill.measured_s,
        measured_r: fill.measured_r,
        boundary_residual,
        r_chain: ChainFile::<Point>::from_chain(&fill.r_chain),
    };
    Done::new("homotopy", ctx.seed, Some(tol), flags, out, None)
}

#[derive(Serialize)]
struct ApproxOutput {
    curves: usize,
    kept: usize,
    truncation_mass_error: f64,
    certificate: ApproxCertificate,
    chain: ChainFile<Point>,
}

pub struct ApproxArgs<'a> {
    pub measure: &'a Path,
    pub eps: f64,
    pub mesh: f64,
    pub length_cap: Option<f64>,
    pub chain_out: Option<&'a Path>,
}

pub fn approx_cmd(ctx: &Ctx, a: ApproxArgs) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let eta: CurveMeasure = read(a.measure, "curve measure")?;
    eta.validate()?;
    let (kept, mass_error) = match a.length_cap {
        Some(l) => {
            let t = truncate(&eta, l)?;
            (t.measure, t.mass_error)
        }
        None => (eta.clone(), 0.0),
    };
    let ap = approximate(&kept, a.eps, a.mesh)?;
    let chain = ChainFile::<Point>::from_chain(&ap.p);
    if let Some(path) = a.chain_out {
        std::fs::write(path, to_json(&chain)?).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mut flags = Flags::default();
    flags.le("M(P) ≤ M(N)", ap.cert.mass_p, ap.cert.mass_n + tol);
    flags.close("bound = clustering + interpolation", ap.cert.flat_bound, ap.cert.clustering_term + ap.cert.interpolation_term, tol);
    let out = ApproxOutput {
        curves: eta.len(),
        kept: kept.len(),
        truncation_mass_error: mass_error,
        certificate: ap.cert,
        chain,
    };
    Done::new("approx", ctx.seed, Some(tol), flags, out, None)
}

pub fn normalize_cmd(ctx: &Ctx, chain: &Path, hyperplane: [f64; 3], eps: f64, norm: NormKind) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let t = read::<ChainFile<Point>>(chain, "chain")?.to_chain(norm)?;
    let h = Line::new(hyperplane[0], hyperplane[1], hyperplane[2])?;
    let r: NormalizeResult = current1d::structure::normalize(&t, &h, eps, norm)?;
    let mut flags = Flags::default();
    flags.le("‖∂N‖_AE", r.boundary_residual, tol);
    flags.le("M(N) ≤ (2 + ε)·M(T)", r.n.mass(), (2.0 + eps) * r.mass_t + tol);
    flags.le("|M(N⌊B) − M(T)|", r.restrict_mass_diff, tol);
    flags.le("M(N⌊B − T)", r.restrict_residual, tol);
    Done::new("normalize", ctx.seed, Some(tol), flags, r, None)
}

fn decomposition_flags(g: &MetricGraph, f: &EdgeFlow, d: &Decomposition, tol: f64) -> Flags {
    let mut flags = Flags::default();
    let worst = d.reassemble(g).iter().zip(&f.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    flags.le("per-edge reassembly", worst, tol);
    flags.le("mass defect ≥ 0", -d.mass_defect, tol);
    flags
}

fn load_flow(space: &Path, flow: &Path) -> anyhow::Result<(MetricGraph, EdgeFlow, Decomposition)> {
    let g = load_graph(space)?;
    let weights: Vec<f64> = read(flow, "flow")?;
    let f = EdgeFlow::new(&g, weights)?;
    let d = decompose_flow(&g, &f)?;
    Ok((g, f, d))
}

pub fn decompose_cmd(ctx: &Ctx, space: &Path, flow: &Path) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let (g, f, d) = load_flow(space, flow)?;
    let flags = decomposition_flags(&g, &f, &d, tol);
    let mut table = Table::new(vec!["kind", "weight", "length", "vertices"]);
    for (kind, curves) in [("path", &d.paths), ("cycle", &d.cycles)] {
        for c in curves {
            table.rows.push(vec![Cell::Text(kind.into()), Cell::Float(c.weight), Cell::Float(c.length(&g)), Cell::Int(c.vertices.len() as u64)]);
        }
    }
    Done::new("decompose", ctx.seed, Some(tol), flags, d, Some(table))
}

#[derive(Serialize)]
struct FragmentsOutput {
    decomposition: Decomposition,
    fragments: FragmentRepresentation,
}

pub fn fragments_cmd(ctx: &Ctx, space: &Path, flow: &Path, set: &Path, norm: NormKind) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-9);
    let (g, f, d) = load_flow(space, flow)?;
    let set: ClosedSet = read(set, "closed set")?;
    let rep = fragment_representation(&d, &g, &f, &set, norm)?;
    let mut flags = decomposition_flags(&g, &f, &d, tol);
    flags.le("fragment mass identity", rep.mass_identity_residual, tol);
    let mut table = Table::new(vec!["weight", "length", "n_fragments", "fragment_mass"]);
    for r in &rep.rows {
        table.rows.push(vec![Cell::Float(r.weight), Cell::Float(r.length), Cell::Int(r.fragments as u64), Cell::Float(r.fragment_mass)]);
    }
    Done::new("fragments", ctx.seed, Some(tol), flags, FragmentsOutput { decomposition: d, fragments: rep }, Some(table))
}

#[derive(Serialize)]
struct RickmanOutput {
    alpha: f64,
    rows_per_column: usize,
    lower_bound: f64,
    rows: Vec<RickmanRow>,
}

pub fn rickman_cmd(ctx: &Ctx, s_grid: usize, alpha: f64, rows: usize) -> anyhow::Result<Done> {
    let tol = ctx.tol(1e-6);
    if s_grid == 0 {
        bail!(Error::InvalidInput("--s-grid must be positive".into()));
    }
    let cells: Vec<RickmanRow> = (1..=s_grid)
        .into_par_iter()
        .map(|j| rickman_row(alpha, j as f64 / s_grid as f64, rows))
        .collect::<current1d::Result<_>>()?;
    let mut flags = Flags::default();
    let worst = cells.iter().map(|r| (r.ae_intrinsic - 2.0).abs()).fold(0.0, f64::max);
    flags.le("|ae(d_ℓ) − 2| at every s", worst, tol);
    flags.holds("M(T_s) = 2 at every s", cells.iter().all(|r| r.mass == 2.0));
    let mut table = Table::new(vec!["s", "ae_intrinsic", "ae_ambient", "filling_mass", "mass"]);
    for r in &cells {
        table.rows.push([r.s, r.ae_intrinsic, r.ae_ambient, r.filling_mass, r.mass].into_iter().map(Cell::Float).collect());
    }
    let out = RickmanOutput {
        alpha,
        rows_per_column: rows,
        lower_bound: 2.0,
        rows: cells,
    };
    Done::new("rickman", ctx.seed, Some(tol), flags, out, Some(table))
}

#[derive(Serialize)]
struct SuiteOutput {
    sizes: SuiteSizes,
    #[serde(flatten)]
    report: SuiteReport,
}

pub fn suite_cmd(seed: Option<u64>, sizes: SuiteSizes) -> anyhow::Result<Done> {
    let seed = seed.ok_or_else(|| anyhow!(Error::InvalidInput("suite needs a seed: pass --seed or set it in --config".into())))?;
    let report = current1d::suite::run(seed, &sizes);
    let mut flags = Flags::default();
    for c in &report.checks {
        flags.holds(&c.name, c.passed());
    }
    let mut table = Table::new(vec!["check", "cases", "assertions", "failures", "worst_excess"]);
    for c in &report.checks {
        table.rows.push(vec![
            Cell::Text(c.name.clone()),
            Cell::Int(c.cases as u64),
            Cell::Int(c.assertions as u64),
            Cell::Int(c.failures as u64),
            Cell::Float(c.worst_excess),
        ]);
    }
    // the battery carries its own tolerances
    Done::new("suite", seed, None, flags, SuiteOutput { sizes, report }, Some(table))
}
