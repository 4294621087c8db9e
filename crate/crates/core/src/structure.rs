//! Fillings off a hyperplane and normalization of hyperplane-supported chains.
//!
//! `rescale_interior` and `translate_singular` move a polyhedral chain inside
//! a convex box and off a given atomic measure and line. The remainders they
//! leave behind are kept exactly as connector segments. `rectifiable_filling`
//! iterates these moves and `normalize` closes a chain on a line into a cycle.

use serde::{Deserialize, Serialize};

use crate::approximation::approximate_signed;
use crate::currents::{Molecule, PlaneChain, Polyline};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, Line, NormKind, Point, DIST_TOL};
use crate::spaces::{Ambient, Edge, MetricGraph};
use crate::transport::{ae_norm_plane, minimal_filling};

/// Largest rescaling used when a chain touches the boundary of its box.
pub const MAX_RESCALE: f64 = 0.5;
/// Round limit of the filling iteration.
pub const MAX_ROUNDS: usize = 40;
/// Grid points per refinement in the translation scan.
pub const SHIFT_GRID: usize = 64;
/// Refinements of the translation grid before giving up.
pub const SHIFT_REFINEMENTS: usize = 3;

/// An axis-aligned box `C`, the closed convex set of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexBox {
    pub center: Point,
    pub half: Point,
}

impl ConvexBox {
    pub fn new(center: Point, half: Point) -> Result<Self> {
        if !(half.x > 0.0 && half.y > 0.0 && center.is_finite() && half.is_finite()) {
            return Err(Error::invalid("box half-widths must be positive"));
        }
        Ok(ConvexBox { center, half })
    }

    /// The smallest box around `c` grown by `pad` on every side.
    pub fn around(c: &PlaneChain, pad: f64) -> Result<Self> {
        let (lo, hi) = c.bbox().unwrap_or((Point::ORIGIN, Point::ORIGIN));
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo) + Point::new(pad, pad))
    }

    /// Distance to the boundary, negative outside.
    pub fn margin(&self, p: Point) -> f64 {
        let d = p - self.center;
        (self.half.x - d.x.abs()).min(self.half.y - d.y.abs())
    }

    pub fn min_half(&self) -> f64 {
        self.half.x.min(self.half.y)
    }

    /// Smallest margin over all piece endpoints; segments are convex so this is exact.
    pub fn chain_margin(&self, c: &PlaneChain) -> f64 {
        c.pieces
            .iter()
            .flat_map(|p| [p.start, p.end])
            .map(|q| self.margin(q))
            .fold(f64::INFINITY, f64::min)
    }
}

/// The measure `μ = Σ w_i δ_{x_i}` that the filling has to avoid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AtomicMeasure {
    pub atoms: Vec<(Point, f64)>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<(Point, f64)>) -> Result<Self> {
        if atoms.iter().any(|(p, w)| !(p.is_finite() && *w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("atoms need finite points and weights ≥ 0"));
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Whether some atom lies on the closed segment `[a, b]`.
    pub fn hits_segment(&self, a: Point, b: Point) -> bool {
        self.atoms.iter().any(|&(x, _)| segment_dist(x, a, b) <= DIST_TOL)
    }
}

/// Euclidean distance from `x` to the segment `[a, b]`.
fn segment_dist(x: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    let t = if len2 > 0.0 { ((x - a).dot(d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (x - a.lerp(b, t)).euclid()
}

/// Whether the segment `[a, b]` lies inside the line `h` (positive length there).
fn inside_line(h: &Line, a: Point, b: Point) -> bool {
    a != b && h.contains(a, DIST_TOL) && h.contains(b, DIST_TOL)
}

/// Whether `c` avoids the atoms of `μ` and has no length on `h`.
pub fn is_admissible(c: &PlaneChain, mu: &AtomicMeasure, h: &Line) -> bool {
    c.pieces
        .iter()
        .filter(|p| p.weight != 0.0)
        .all(|p| !mu.hits_segment(p.start, p.end) && !inside_line(h, p.start, p.end))
}

/// `Σ m_x ⟦φ(x) → x⟧`: the remainder `T − φ_#T − ∂H(T)` of an affine homotopy.
fn connectors(boundary: &Molecule<Point>, phi: impl Fn(Point) -> Point, norm: NormKind) -> PlaneChain {
    let mut out = PlaneChain::zero();
    for &(x, m) in boundary.atoms() {
        let y = phi(x);
        if y != x {
            out.push(PlaneChain::segment(y, x, m, norm).pieces[0]);
        }
    }
    out
}

fn support_radius(c: &PlaneChain, center: Point, norm: NormKind) -> f64 {
    c.pieces
        .iter()
        .flat_map(|p| [p.start, p.end])
        .map(|q| norm.dist(q, center))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rescaled {
    pub chain: PlaneChain,
    pub eta: f64,
    /// `η·ρ·(2 M(P) + M(∂P))` with `ρ` the support radius about the center.
    pub flat_cert: f64,
    /// Exact `P − P′ − ∂H(P)`.
    pub remainder: PlaneChain,
}

/// Scales `P` towards the center of `C` by `1 − η` so that it sits in the interior.
pub fn rescale_interior(p: &PlaneChain, c: &ConvexBox, eps: f64, norm: NormKind) -> Result<Rescaled> {
    if !(eps > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    let margin = c.chain_margin(p);
    if margin < -DIST_TOL {
        return Err(Error::OutsideConvexSet);
    }
    if margin > 0.0 || p.is_empty() {
        return Ok(Rescaled {
            chain: p.clone(),
            eta: 0.0,
            flat_cert: 0.0,
            remainder: PlaneChain::zero(),
        });
    }
    let rho = support_radius(p, c.center, norm);
    let boundary = p.boundary();
    let weight = 2.0 * p.mass() + boundary.total_variation();
    let eta = if rho * weight > 0.0 { (eps / (rho * weight)).min(MAX_RESCALE) } else { MAX_RESCALE };
    let map = AffineMap {
        linear: [[1.0 - eta, 0.0], [0.0, 1.0 - eta]],
        offset: eta * c.center,
    };
    let chain = p.pushforward(&map, norm)?;
    let remainder = connectors(&boundary, |x| map.apply(x), norm);
    Ok(Rescaled {
        chain,
        eta,
        flat_cert: eta * rho * weight,
        remainder,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translated {
    pub chain: PlaneChain,
    pub t: f64,
    pub w: Point,
    /// `t‖w‖·(2 M(P) + M(∂P))`, the mass bound of `H(P)` plus `H(∂P)`.
    pub flat_cert: f64,
    /// Exact `P − τ_#P − ∂H(P)`, the connectors `⟦x + tw → x⟧`.
    pub remainder: PlaneChain,
    pub refinements: usize,
}

/// First direction of a fixed low-discrepancy sequence transverse to `h` and to every piece.
fn shift_direction(p: &PlaneChain, h: &Line, norm: NormKind) -> Point {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let dirs: Vec<Point> = p.pieces.iter().map(|q| q.end - q.start).collect();
    let hd = h.direction();
    for j in 1..1000 {
        let th = std::f64::consts::PI * (j as f64 * golden).fract();
        let w = Point::new(th.cos(), th.sin());
        let parallel = |d: Point| w.cross(d).abs() <= 1e-6 * d.euclid();
        if !parallel(hd) && !dirs.iter().any(|&d| parallel(d)) {
            return norm.unit(w);
        }
    }
    norm.unit(h.unit_normal())
}

/// Shifts `P` by `t w` with `t ∈ (0, t₁]` so that it avoids `μ` and has no length on `h`.
pub fn translate_singular(p: &PlaneChain, mu: &AtomicMeasure, h: &Line, t1: f64, norm: NormKind) -> Result<Translated> {
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(Error::invalid("translation budget must be positive"));
    }
    let w = shift_direction(p, h, norm);
    let boundary = p.boundary();
    let weight = 2.0 * p.mass() + boundary.total_variation();
    for r in 0..=SHIFT_REFINEMENTS {
        let n = SHIFT_GRID << r;
        for k in 1..=n {
            if r > 0 && k % 2 == 0 {
                continue;
            }
            let t = t1 * k as f64 / n as f64;
            let shift = t * w;
            let moved = p.translated(shift);
            if is_admissible(&moved, mu, h) {
                return Ok(Translated {
                    chain: moved,
                    t,
                    w,
                    flat_cert: t * norm.norm(w) * weight,
                    remainder: connectors(&boundary, |x| x + shift, norm),
                    refinements: r,
                });
            }
        }
    }
    Err(Error::NoAdmissibleShift(SHIFT_REFINEMENTS))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub n: usize,
    /// `ε_n = M(T) δ 2^{−n}`.
    pub eps: f64,
    pub input_mass: f64,
    pub mass_p: f64,
    pub remainder_mass: f64,
    /// Bound on `M(R_n) + M(S_n)` from tents, rescaling and translation.
    pub flat_cert: f64,
    pub tents: usize,
    pub rescale_eta: f64,
    pub shift: Option<(f64, Point)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillingReport {
    pub r: PlaneChain,
    pub delta: f64,
    pub rounds: Vec<Round>,
    /// Whether the final remainder was admissible and appended, closing `∂R = ∂T` exactly.
    pub closed: bool,
    /// `‖∂R − ∂T‖_AE`.
    pub boundary_residual: f64,
    /// Partial sums of `M(P_n)`.
    pub partial_masses: Vec<f64>,
    /// `C₀ M(T) + C₀ Σ ε_n`.
    pub mass_bound: f64,
}

/// Replaces every piece inside `h` by an isosceles tent of mass at most `(1+δ)` times its own.
fn lift_tents(c: &PlaneChain, h: &Line, mu: &AtomicMeasure, delta: f64, budget: f64, norm: NormKind) -> (PlaneChain, f64, usize) {
    let on_h: f64 = c.pieces.iter().filter(|p| inside_line(h, p.start, p.end)).map(|p| p.weight.abs() * p.length).sum();
    if on_h == 0.0 {
        return (c.clone(), 0.0, 0);
    }
    let area = norm.area_factor();
    let h_budget = budget / (area * on_h);
    let n = norm.unit(h.unit_normal());
    let mut out = PlaneChain::zero();
    let mut cert = 0.0;
    let mut count = 0;
    for p in &c.pieces {
        if !inside_line(h, p.start, p.end) {
            out.push(*p);
            continue;
        }
        let mid = p.start.lerp(p.end, 0.5);
        let half = mid - p.start;
        let tent_mass = |ht: f64| 2.0 * norm.norm(half + ht * n);
        // the admissible heights form an interval containing 0
        let (mut lo, mut hi) = (0.0, p.length);
        while tent_mass(hi) <= (1.0 + delta) * p.length {
            hi *= 2.0;
        }
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if tent_mass(m) <= (1.0 + delta) * p.length {
                lo = m;
            } else {
                hi = m;
            }
        }
        let mut ht = lo.min(h_budget * p.length);
        let mut apex = mid + ht * n;
        for _ in 0..16 {
            if !mu.hits_segment(p.start, apex) && !mu.hits_segment(apex, p.end) {
                break;
            }
            ht *= 0.5;
            apex = mid + ht * n;
        }
        out.push(PlaneChain::segment(p.start, apex, p.weight, norm).pieces[0]);
        out.push(PlaneChain::segment(apex, p.end, p.weight, norm).pieces[0]);
        // T − tent is the boundary of a triangle of Euclidean area L·h/2
        cert += p.weight.abs() * area * 0.5 * (p.end - p.start).euclid() * (ht * n).euclid();
        count += 1;
    }
    (out, cert, count)
}

/// Builds `R` with `∂R = ∂T`, `M(R) ≤ (1+ε) M(T)`, no length on `h` and no atom of `μ` on its support.
pub fn rectifiable_filling(t: &PlaneChain, eps: f64, mu: &AtomicMeasure, h: &Line, container: Option<&ConvexBox>, norm: NormKind) -> Result<FillingReport> {
    if !(eps > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    let t = t.canonical();
    let mass_t = t.mass();
    let boundary_t = t.boundary();
    if boundary_t.atoms().iter().any(|&(x, _)| mu.atoms.iter().any(|&(y, _)| (x - y).euclid() <= DIST_TOL)) {
        return Err(Error::invalid("μ charges a boundary atom of T"));
    }
    if let Some(c) = container {
        if c.chain_margin(&t) < -DIST_TOL {
            return Err(Error::OutsideConvexSet);
        }
    }
    let delta = (1.0 + eps).sqrt() - 1.0;
    let c0 = 1.0 + delta;
    let stop = 1e-9 * mass_t.min(1.0);
    let mut r = PlaneChain::zero();
    let mut rounds = Vec::new();
    let mut partial = Vec::new();
    let mut eps_sum = 0.0;
    let mut x = t.clone();
    let mut n = 0;
    while x.mass() > stop {
        if n == MAX_ROUNDS {
            return Err(Error::IterationBudget(MAX_ROUNDS));
        }
        let eps_n = mass_t * delta * 0.5f64.powi(n as i32);
        eps_sum += eps_n;
        let input_mass = x.mass();
        let entries: Vec<(f64, Polyline)> = x.pieces.iter().map(|p| (p.weight, Polyline::segment(p.start, p.end))).collect();
        let (approx, _, _) = approximate_signed(&entries, norm, f64::MIN_POSITIVE, 1.0)?;
        let (mut p, mut cert, tents) = lift_tents(&approx.canonical(), h, mu, delta, 0.5 * eps_n, norm);
        let mut remainder = PlaneChain::zero();
        let mut rescale_eta = 0.0;
        let mut shift = None;
        if !is_admissible(&p, mu, h) {
            let mut budget = 0.5 * eps_n;
            let mut room = f64::INFINITY;
            if let Some(c) = container {
                if c.chain_margin(&p) <= 0.0 {
                    let rs = rescale_interior(&p, c, 0.5 * budget, norm)?;
                    budget *= 0.5;
                    cert += rs.flat_cert;
                    rescale_eta = rs.eta;
                    remainder = remainder.plus(&rs.remainder);
                    p = rs.chain;
                }
                room = 0.5 * c.chain_margin(&p);
            }
            let weight = 2.0 * p.mass() + p.boundary().total_variation();
            let tr = translate_singular(&p, mu, h, (budget / weight).min(room), norm)?;
            cert += tr.flat_cert;
            shift = Some((tr.t, tr.w));
            remainder = remainder.plus(&tr.remainder);
            p = tr.chain;
        }
        let remainder = remainder.canonical();
        r = r.plus(&p);
        partial.push(partial.last().copied().unwrap_or(0.0) + p.mass());
        rounds.push(Round {
            n,
            eps: eps_n,
            input_mass,
            mass_p: p.mass(),
            remainder_mass: remainder.mass(),
            flat_cert: cert,
            tents,
            rescale_eta,
            shift,
        });
        x = remainder;
        n += 1;
        if is_admissible(&x, mu, h) && !x.is_empty() && x.mass() <= stop {
            break;
        }
    }
    let closed = x.is_empty() || is_admissible(&x, mu, h);
    if closed && !x.is_empty() {
        r = r.plus(&x);
        partial.push(partial.last().copied().unwrap_or(0.0) + x.mass());
    }
    let r = r.canonical();
    let boundary_residual = ae_norm_plane(&r.boundary().minus(&boundary_t), norm)?.value;
    Ok(FillingReport {
        r,
        delta,
        rounds,
        closed,
        boundary_residual,
        partial_masses: partial,
        mass_bound: c0 * mass_t + c0 * eps_sum,
    })
}

/// Minimal filling of a molecule whose atoms lie on `h`, computed on the path graph of the sorted atoms.
pub fn line_filling(m: &Molecule<Point>, h: &Line, norm: NormKind) -> Result<PlaneChain> {
    if m.is_zero() {
        return Ok(PlaneChain::zero());
    }
    let mut pts: Vec<(f64, Point)> = m.atoms().iter().map(|&(p, _)| (h.coordinate(p), p)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coords: Vec<Point> = pts.iter().map(|&(_, p)| p).collect();
    let edges = coords
        .windows(2)
        .enumerate()
        .map(|(i, w)| Edge {
            u: i,
            v: i + 1,
            length: norm.dist(w[0], w[1]),
        })
        .collect();
    let g = MetricGraph::new(coords.len(), Some(coords.clone()), edges, Ambient::Path)?;
    let index = |p: Point| coords.iter().position(|&q| q == p).expect("atom is a vertex");
    let mv = Molecule::new(m.atoms().iter().map(|&(p, w)| (index(p), w)))?;
    minimal_filling(&mv, &g)?.chain.embed(&g, norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizeResult {
    pub n: PlaneChain,
    pub r: PlaneChain,
    /// The closed set `B`, here the hyperplane itself.
    pub b: Line,
    pub mass_t: f64,
    pub mass_ratio: f64,
    /// `‖∂N‖_AE`.
    pub boundary_residual: f64,
    /// `|M(N⌊B) − M(T)|`.
    pub restrict_mass_diff: f64,
    /// Mass of `N⌊B − T` after merging pieces.
    pub restrict_residual: f64,
    pub filling: FillingReport,
}

/// Interior sample points of the pieces of `T`, kept away from `∂T`.
fn support_samples(t: &PlaneChain) -> AtomicMeasure {
    let boundary = t.boundary();
    let mut atoms = Vec::new();
    for p in &t.pieces {
        for s in [0.5, 0.25, 0.75] {
            let x = p.start.lerp(p.end, s);
            if !boundary.atoms().iter().any(|&(b, _)| (b - x).euclid() <= DIST_TOL) {
                atoms.push((x, p.weight.abs() * p.length / 3.0));
            }
        }
    }
    AtomicMeasure { atoms }
}

/// `N := T − R` with `∂N = 0`, `M(N) ≤ (2+ε) M(T)` and `N⌊h = T`.
pub fn normalize(t: &PlaneChain, h: &Line, eps: f64, norm: NormKind) -> Result<NormalizeResult> {
    if t.pieces.iter().any(|p| !(h.contains(p.start, DIST_TOL) && h.contains(p.end, DIST_TOL))) {
        return Err(Error::NotInHyperplane);
    }
    let t = t.canonical();
    let mass_t = t.mass();
    let mu = support_samples(&t);
    let lifted = line_filling(&t.boundary(), h, norm)?;
    let filling = rectifiable_filling(&lifted, eps, &mu, h, None, norm)?;
    let n = t.minus(&filling.r).canonical();
    let boundary_residual = ae_norm_plane(&n.boundary(), norm)?.value;
    let restricted = crate::currents::restrict_chain(&n, &crate::currents::ClosedSet::line(*h), norm)?;
    let restrict_mass_diff = (restricted.mass() - mass_t).abs();
    let restrict_residual = restricted.to_chain().minus(&t).canonical().mass();
    Ok(NormalizeResult {
        mass_ratio: if mass_t > 0.0 { n.mass() / mass_t } else { 0.0 },
        n,
        r: filling.r.clone(),
        b: *h,
        mass_t,
        boundary_residual,
        restrict_mass_diff,
        restrict_residual,
        filling,
    })
}
