//! Compression of a curve measure into a finite geodesic chain.
//!
//! Curves are clustered by a greedy `d_∞` net, each cluster is replaced by
//! its shortest member, and that member by chords over a uniform partition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::currents::{ParamPath, PlaneChain, Polyline};
use crate::error::{Error, Result};
use crate::geometry::NormKind;
use crate::homotopy::{interpolate_geodesic, uniform_partition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub w: f64,
    pub polyline: Polyline,
}

/// A finitely supported measure `η` on curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveMeasure {
    pub entries: Vec<CurveEntry>,
    #[serde(default)]
    pub norm: NormKind,
}

impl CurveMeasure {
    pub fn new(entries: Vec<CurveEntry>, norm: NormKind) -> Result<Self> {
        let m = CurveMeasure { entries, norm };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.norm.validate()?;
        for e in &self.entries {
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(Error::invalid(format!("curve weight {} must be positive", e.w)));
            }
            Polyline::new(e.polyline.points.clone())?;
        }
        Ok(())
    }

    /// Splits signed weights into two nonnegative measures `(η⁺, η⁻)`.
    pub fn split_signed(entries: &[(f64, Polyline)], norm: NormKind) -> Result<(Self, Self)> {
        let pick = |sign: f64| -> Vec<CurveEntry> {
            entries
                .iter()
                .filter(|(w, _)| w * sign > 0.0)
                .map(|(w, p)| CurveEntry { w: w.abs(), polyline: p.clone() })
                .collect()
        };
        Ok((CurveMeasure::new(pick(1.0), norm)?, CurveMeasure::new(pick(-1.0), norm)?))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.w).sum()
    }

    /// `Σ η_i ℓ(γ_i)`.
    pub fn induced_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.w * e.polyline.length(self.norm)).sum()
    }

    pub fn length_bound(&self) -> f64 {
        self.entries.iter().map(|e| e.polyline.length(self.norm)).fold(0.0, f64::max)
    }

    /// `N = Σ η_i ⟦γ_i⟧`.
    pub fn as_chain(&self) -> PlaneChain {
        let mut c = PlaneChain::zero();
        for e in &self.entries {
            c = c.plus(&PlaneChain::from_polyline(&e.polyline, e.w, self.norm));
        }
        c
    }

    fn param_paths(&self) -> Vec<ParamPath> {
        self.entries.par_iter().map(|e| e.polyline.param_path(self.norm)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub measure: CurveMeasure,
    pub mass_error: f64,
}

/// Keeps the curves of length at most `l`.
pub fn truncate(eta: &CurveMeasure, l: f64) -> Result<Truncation> {
    if !(l > 0.0) {
        return Err(Error::invalid("length cap must be positive"));
    }
    let mut kept = Vec::new();
    let mut mass_error = 0.0;
    for e in &eta.entries {
        let len = e.polyline.length(eta.norm);
        if len <= l {
            kept.push(e.clone());
        } else {
            mass_error += e.w * len;
        }
    }
    Ok(Truncation {
        measure: CurveMeasure {
            entries: kept,
            norm: eta.norm,
        },
        mass_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub representative: usize,
    /// Exact pairwise maximum of `d_∞` within the cluster.
    pub diameter: f64,
    /// `η(A)`.
    pub weight: f64,
}

fn cluster_paths(eta: &CurveMeasure, paths: &[ParamPath], eps: f64) -> Vec<Cluster> {
    let n = paths.len();
    let norm = eta.norm;
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for c in 0..n {
        if assigned[c] {
            continue;
        }
        let near: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|j| !assigned[j] && (j == c || paths[c].d_inf(&paths[j], norm) < eps))
            .collect();
        let members: Vec<usize> = (0..n).filter(|&j| near[j]).collect();
        for &j in &members {
            assigned[j] = true;
        }
        let diameter = members
            .par_iter()
            .enumerate()
            .map(|(a, &i)| {
                members[a + 1..]
                    .iter()
                    .map(|&j| paths[i].d_inf(&paths[j], norm))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let lengths: Vec<f64> = members.iter().map(|&i| paths[i].length(norm)).collect();
        let mut rep = 0;
        for k in 1..members.len() {
            if lengths[k] < lengths[rep] {
                rep = k;
            }
        }
        let weight = members.iter().map(|&i| eta.entries[i].w).sum();
        out.push(Cluster {
            representative: members[rep],
            members,
            diameter,
            weight,
        });
    }
    out
}

/// Greedy open-ball net of radius `eps` over the entries in input order.
pub fn cluster(eta: &CurveMeasure, eps: f64) -> Result<Vec<Cluster>> {
    if !(eps > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    Ok(cluster_paths(eta, &eta.param_paths(), eps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxCertificate {
    pub epsilon: f64,
    pub mesh: f64,
    pub length_bound: f64,
    pub clusters: Vec<Cluster>,
    /// `Σ 2(L+1) η(A) diam(A)`.
    pub clustering_term: f64,
    /// `Σ η(A)·(ℓ + ℓ' + 2)·d_∞` between each representative and its chords.
    pub interpolation_term: f64,
    pub flat_bound: f64,
    pub mass_p: f64,
    pub mass_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub p: PlaneChain,
    pub cert: ApproxCertificate,
}

/// Number of partition cells for a parameter mesh.
pub fn mesh_cells(mesh: f64) -> usize {
    (1.0 / mesh).ceil().max(1.0) as usize
}

/// Replaces `η` by `P = Σ_A η(A)·chords(γ_A)` with a flat-norm certificate.
pub fn approximate(eta: &CurveMeasure, eps: f64, mesh: f64) -> Result<Approximation> {
    if !(mesh > 0.0) {
        return Err(Error::invalid("interpolation mesh must be positive"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    eta.validate()?;
    let norm = eta.norm;
    let paths = eta.param_paths();
    let clusters = cluster_paths(eta, &paths, eps);
    let l = eta.length_bound();
    let partition = uniform_partition(mesh_cells(mesh));
    let mut p = PlaneChain::zero();
    let mut clustering_term = 0.0;
    let mut interpolation_term = 0.0;
    for c in &clusters {
        clustering_term += 2.0 * (l + 1.0) * c.weight * c.diameter;
        let rep = &eta.entries[c.representative].polyline;
        let interp = interpolate_geodesic(rep, &partition, norm)?;
        if interp.d_inf > 0.0 {
            let len = interp.chain.mass();
            interpolation_term += c.weight * (rep.length(norm) + len + 2.0) * interp.d_inf;
        }
        p = p.plus(&interp.chain.scaled(c.weight));
    }
    let cert = ApproxCertificate {
        epsilon: eps,
        mesh,
        length_bound: l,
        clustering_term,
        interpolation_term,
        flat_bound: clustering_term + interpolation_term,
        mass_p: p.mass(),
        mass_n: eta.induced_mass(),
        clusters,
    };
    Ok(Approximation { p, cert })
}

/// Signed version: approximates `η⁺` and `η⁻` separately and subtracts.
pub fn approximate_signed(entries: &[(f64, Polyline)], norm: NormKind, eps: f64, mesh: f64) -> Result<(PlaneChain, f64, f64)> {
    let (pos, neg) = CurveMeasure::split_signed(entries, norm)?;
    let a = approximate(&pos, eps, mesh)?;
    let b = approximate(&neg, eps, mesh)?;
    Ok((a.p.minus(&b.p), a.cert.flat_bound + b.cert.flat_bound, a.cert.mass_p + b.cert.mass_p))
}
