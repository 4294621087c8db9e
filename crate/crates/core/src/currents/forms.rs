//! Test forms `(f, π)` with closed-form values, gradients and Lipschitz bounds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{NormKind, Point};
use crate::quadrature;

/// Quadrature tolerance for line integrals along straight pieces.
pub const LINE_TOL: f64 = 1e-10;

/// A scalar function of the plane, given by a closed-form tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFn {
    Constant(f64),
    /// `g · x + c`
    Affine { g: Point, c: f64 },
    /// Euclidean distance to `p`.
    DistanceTo { p: Point },
    /// `inner` clamped to `[lo, hi]`; `inner` must be affine or a distance.
    Clipped { inner: Box<ScalarFn>, lo: f64, hi: f64 },
    /// `sin(ω (g · x) + φ)`
    Sine { g: Point, omega: f64, phase: f64 },
    /// `exp(−|x − c|² / (2σ²))`
    Bump { center: Point, sigma: f64 },
}

impl ScalarFn {
    pub fn affine(gx: f64, gy: f64, c: f64) -> Self {
        ScalarFn::Affine { g: Point::new(gx, gy), c }
    }

    pub fn value(&self, x: Point) -> f64 {
        match self {
            ScalarFn::Constant(c) => *c,
            ScalarFn::Affine { g, c } => g.dot(x) + c,
            ScalarFn::DistanceTo { p } => (x - *p).euclid(),
            ScalarFn::Clipped { inner, lo, hi } => inner.value(x).clamp(*lo, *hi),
            ScalarFn::Sine { g, omega, phase } => (omega * g.dot(x) + phase).sin(),
            ScalarFn::Bump { center, sigma } => {
                let r = x - *center;
                (-r.dot(r) / (2.0 * sigma * sigma)).exp()
            }
        }
    }

    /// Gradient where it exists; one-sided choice at kinks.
    pub fn grad(&self, x: Point) -> Point {
        match self {
            ScalarFn::Constant(_) => Point::ORIGIN,
            ScalarFn::Affine { g, .. } => *g,
            ScalarFn::DistanceTo { p } => {
                let r = x - *p;
                let n = r.euclid();
                if n == 0.0 {
                    Point::ORIGIN
                } else {
                    (1.0 / n) * r
                }
            }
            ScalarFn::Clipped { inner, lo, hi } => {
                let v = inner.value(x);
                if v <= *lo || v >= *hi {
                    Point::ORIGIN
                } else {
                    inner.grad(x)
                }
            }
            ScalarFn::Sine { g, omega, phase } => (omega * (omega * g.dot(x) + phase).cos()) * *g,
            ScalarFn::Bump { center, sigma } => {
                let r = x - *center;
                let e = (-r.dot(r) / (2.0 * sigma * sigma)).exp();
                (-e / (sigma * sigma)) * r
            }
        }
    }

    /// Lipschitz constant with respect to `norm`.
    pub fn lip(&self, norm: NormKind) -> f64 {
        match self {
            ScalarFn::Constant(_) => 0.0,
            ScalarFn::Affine { g, .. } => norm.dual(*g),
            ScalarFn::DistanceTo { .. } => norm.euclid_lip_factor(),
            ScalarFn::Clipped { inner, .. } => inner.lip(norm),
            ScalarFn::Sine { g, omega, .. } => omega.abs() * norm.dual(*g),
            ScalarFn::Bump { sigma, .. } => (-0.5f64).exp() / sigma * norm.euclid_lip_factor(),
        }
    }

    /// Upper bound for `|f|` on the segment `[a, b]`.
    pub fn sup_abs_on_segment(&self, a: Point, b: Point) -> f64 {
        match self {
            ScalarFn::Constant(c) => c.abs(),
            ScalarFn::Affine { .. } | ScalarFn::DistanceTo { .. } => self.value(a).abs().max(self.value(b).abs()),
            ScalarFn::Clipped { inner, lo, hi } => {
                let m = inner.sup_abs_on_segment(a, b);
                // clamp of [-m, m] to [lo, hi]
                (-m).clamp(*lo, *hi).abs().max(m.clamp(*lo, *hi).abs())
            }
            ScalarFn::Sine { .. } | ScalarFn::Bump { .. } => 1.0,
        }
    }

    pub fn is_affine(&self) -> Option<(Point, f64)> {
        match self {
            ScalarFn::Constant(c) => Some((Point::ORIGIN, *c)),
            ScalarFn::Affine { g, c } => Some((*g, *c)),
            _ => None,
        }
    }

    /// Parameters in `(0, 1)` where `t ↦ f(a + t(b − a))` fails to be smooth.
    pub fn kinks_on_segment(&self, a: Point, b: Point) -> Vec<f64> {
        let d = b - a;
        match self {
            ScalarFn::DistanceTo { p } => {
                let dd = d.dot(d);
                if dd == 0.0 {
                    return vec![];
                }
                let t = (*p - a).dot(d) / dd;
                if t > 0.0 && t < 1.0 && (a.lerp(b, t) - *p).euclid() <= 1e-12 * (1.0 + p.euclid()) {
                    vec![t]
                } else {
                    vec![]
                }
            }
            ScalarFn::Clipped { inner, lo, hi } => {
                let mut out = inner.kinks_on_segment(a, b);
                for level in [*lo, *hi] {
                    out.extend(level_crossings(inner, a, b, level));
                }
                out.retain(|t| *t > 0.0 && *t < 1.0);
                out.sort_by(f64::total_cmp);
                out
            }
            _ => vec![],
        }
    }
}

/// Parameters where `inner(a + t(b − a)) = level`, for affine or distance inners.
fn level_crossings(inner: &ScalarFn, a: Point, b: Point, level: f64) -> Vec<f64> {
    let d = b - a;
    match inner {
        ScalarFn::Constant(_) => vec![],
        ScalarFn::Affine { g, c } => {
            let slope = g.dot(d);
            if slope == 0.0 {
                vec![]
            } else {
                vec![(level - g.dot(a) - c) / slope]
            }
        }
        ScalarFn::DistanceTo { p } => {
            // |a − p + t d|² = level²
            let r = a - *p;
            let qa = d.dot(d);
            let qb = 2.0 * r.dot(d);
            let qc = r.dot(r) - level * level;
            let disc = qb * qb - 4.0 * qa * qc;
            if qa == 0.0 || disc < 0.0 || level < 0.0 {
                vec![]
            } else {
                let s = disc.sqrt();
                vec![(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)]
            }
        }
        _ => vec![],
    }
}

/// A pair `(f, π)` on which 1-currents are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestForm {
    pub f: ScalarFn,
    pub pi: ScalarFn,
}

impl TestForm {
    pub fn new(f: ScalarFn, pi: ScalarFn) -> Self {
        TestForm { f, pi }
    }

    /// `∫₀¹ f(γ_t) (π∘γ)'_t dt` along the straight segment `γ_t = a + t(b − a)`.
    pub fn integrate_segment(&self, a: Point, b: Point) -> f64 {
        let d = b - a;
        if d.x == 0.0 && d.y == 0.0 {
            return 0.0;
        }
        if let Some((g, _)) = self.pi.is_affine() {
            let slope = g.dot(d);
            if slope == 0.0 {
                return 0.0;
            }
            if self.f.is_affine().is_some() {
                return slope * self.f.value(a.lerp(b, 0.5));
            }
            let breaks = self.f.kinks_on_segment(a, b);
            return slope * quadrature::integrate_split(|t| self.f.value(a.lerp(b, t)), 0.0, 1.0, &breaks, LINE_TOL);
        }
        let mut breaks = self.f.kinks_on_segment(a, b);
        breaks.extend(self.pi.kinks_on_segment(a, b));
        breaks.retain(|t| *t > 0.0 && *t < 1.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut acc = 0.0;
        let mut lo = 0.0;
        for &hi in breaks.iter().chain(std::iter::once(&1.0)) {
            // The gradient jumps at a break; sample each side strictly inside.
            let delta = 1e-9 * (hi - lo);
            acc += quadrature::integrate(
                |t| {
                    let x = a.lerp(b, t.clamp(lo + delta, hi - delta));
                    self.f.value(x) * self.pi.grad(x).dot(d)
                },
                lo,
                hi,
                LINE_TOL,
            );
            lo = hi;
        }
        acc
    }

    /// Seeded panel of smooth forms whose features live near `[lo, hi]²`.
    ///
    /// Every form is smooth on the box (distance forms use far-away centers),
    /// so two-dimensional quadrature converges at the Simpson rate.
    pub fn panel<R: Rng>(rng: &mut R, count: usize, lo: f64, hi: f64) -> Vec<TestForm> {
        let span = (hi - lo).max(1e-9);
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let mut dir = || {
                let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                Point::new(th.cos(), th.sin())
            };
            let (g1, g2) = (dir(), dir());
            let mut scalar = |kind: usize| -> ScalarFn {
                match kind {
                    0 => ScalarFn::Constant(rng.random_range(-2.0..2.0)),
                    1 => ScalarFn::Affine {
                        g: rng.random_range(0.3..2.0) * g1,
                        c: rng.random_range(-1.0..1.0),
                    },
                    2 => ScalarFn::Sine {
                        g: g2,
                        omega: rng.random_range(0.5..4.0) / span,
                        phase: rng.random_range(0.0..std::f64::consts::TAU),
                    },
                    3 => ScalarFn::Bump {
                        center: Point::new(rng.random_range(lo..hi), rng.random_range(lo..hi)),
                        sigma: span * rng.random_range(0.3..1.0),
                    },
                    _ => {
                        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                        let c = Point::new(0.5 * (lo + hi), 0.5 * (lo + hi));
                        ScalarFn::DistanceTo {
                            p: c + (3.0 * span) * Point::new(th.cos(), th.sin()),
                        }
                    }
                }
            };
            let (fk, pk) = match k % 10 {
                0 => (0, 1),
                1 => (1, 1),
                2 => (2, 1),
                3 => (1, 2),
                4 => (2, 2),
                5 => (3, 2),
                6 => (0, 4),
                7 => (4, 3),
                8 => (3, 1),
                _ => (1, 4),
            };
            let f = scalar(fk);
            let pi = scalar(pk);
            out.push(TestForm { f, pi });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ftc_on_unit_segment() {
        let form = TestForm::new(ScalarFn::Constant(1.0), ScalarFn::affine(1.0, 0.0, 0.0));
        let v = form.integrate_segment(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(v, 1.0);
    }

    #[test]
    fn exact_differential_integrates_to_difference() {
        // f ≡ 1: ∫ dπ = π(b) − π(a) for any π
        let a = Point::new(0.1, -0.4);
        let b = Point::new(0.9, 0.7);
        let pis = [
            ScalarFn::DistanceTo { p: Point::new(0.5, 0.15) },
            ScalarFn::Sine { g: Point::new(0.6, 0.8), omega: 3.0, phase: 0.2 },
            ScalarFn::Clipped {
                inner: Box::new(ScalarFn::affine(1.0, 1.0, 0.0)),
                lo: 0.0,
                hi: 0.8,
            },
            ScalarFn::Bump { center: Point::new(0.3, 0.3), sigma: 0.4 },
        ];
        for pi in pis {
            let form = TestForm::new(ScalarFn::Constant(1.0), pi.clone());
            let v = form.integrate_segment(a, b);
            assert!((v - (pi.value(b) - pi.value(a))).abs() < 1e-9, "{pi:?}: {v}");
        }
    }

    #[test]
    fn declared_lipschitz_bounds_sampled_quotients() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let panel = TestForm::panel(&mut rng, 20, 0.0, 1.0);
        for norm in [NormKind::L2, NormKind::L1, NormKind::Linf] {
            for form in &panel {
                let lip = form.pi.lip(norm);
                for _ in 0..10_000 {
                    let x = Point::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
                    let y = Point::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
                    let q = (form.pi.value(x) - form.pi.value(y)).abs();
                    assert!(q <= lip * norm.dist(x, y) + 1e-12);
                }
            }
        }
    }
}
