use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Line, Point};

/// Tolerance for a segment lying on a line primitive.
pub const ON_LINE_TOL: f64 = 1e-12;

/// A closed convex piece of a [`ClosedSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    /// Axis-aligned closed box.
    Box { min: Point, max: Point },
    /// Closed Euclidean disc.
    Ball { center: Point, radius: f64 },
    /// `a x + b y ≤ c`
    HalfPlane { a: f64, b: f64, c: f64 },
    Line(Line),
    /// Closed convex polygon, vertices in order.
    Polygon { vertices: Vec<Point> },
}

impl Primitive {
    pub fn validate(&self) -> Result<()> {
        match self {
            Primitive::Box { min, max } => {
                if !(min.is_finite() && max.is_finite() && min.x <= max.x && min.y <= max.y) {
                    return Err(Error::invalid("box needs min ≤ max"));
                }
            }
            Primitive::Ball { center, radius } => {
                if !(center.is_finite() && radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::invalid("ball needs a finite radius ≥ 0"));
                }
            }
            Primitive::HalfPlane { a, b, c } => {
                Line::new(*a, *b, *c)?;
            }
            Primitive::Line(l) => {
                Line::new(l.a, l.b, l.c)?;
            }
            Primitive::Polygon { vertices } => {
                if vertices.len() < 3 || vertices.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("polygon needs at least three finite vertices"));
                }
                let n = vertices.len();
                let mut sign = 0.0f64;
                for i in 0..n {
                    let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
                    let cr = (b - a).cross(c - b);
                    if cr != 0.0 {
                        if sign != 0.0 && cr.signum() != sign {
                            return Err(Error::NonConvexPrimitive(format!("polygon turns both ways at vertex {}", (i + 1) % n)));
                        }
                        sign = cr.signum();
                    }
                }
                if sign == 0.0 {
                    return Err(Error::NonConvexPrimitive("degenerate polygon".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Primitive::Box { min, max } => p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y,
            Primitive::Ball { center, radius } => (p - *center).euclid() <= *radius,
            Primitive::HalfPlane { a, b, c } => a * p.x + b * p.y <= *c,
            Primitive::Line(l) => l.contains(p, ON_LINE_TOL),
            Primitive::Polygon { .. } => self.half_planes().iter().all(|(n, c)| n.dot(p) <= *c),
        }
    }

    /// Outward half-planes `n · x ≤ c` of a convex polygon.
    fn half_planes(&self) -> Vec<(Point, f64)> {
        let Primitive::Polygon { vertices } = self else {
            return vec![];
        };
        let n = vertices.len();
        let orient: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum::<f64>().signum();
        (0..n)
            .filter_map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let d = b - a;
                if d.x == 0.0 && d.y == 0.0 {
                    return None;
                }
                // counter-clockwise polygons have the interior on the left
                let normal = if orient >= 0.0 { Point::new(d.y, -d.x) } else { Point::new(-d.y, d.x) };
                Some((normal, normal.dot(a)))
            })
            .collect()
    }

    /// Parameters `[t0, t1] ⊂ [0, 1]` with `a + t(b − a)` in the primitive.
    pub fn segment_interval(&self, a: Point, b: Point) -> Option<(f64, f64)> {
        let d = b - a;
        match self {
            Primitive::Box { min, max } => {
                let mut lo = 0.0f64;
                let mut hi = 1.0f64;
                for (p0, dp, l, h) in [(a.x, d.x, min.x, max.x), (a.y, d.y, min.y, max.y)] {
                    if dp == 0.0 {
                        if p0 < l || p0 > h {
                            return None;
                        }
                    } else {
                        let (t0, t1) = ((l - p0) / dp, (h - p0) / dp);
                        lo = lo.max(t0.min(t1));
                        hi = hi.min(t0.max(t1));
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
            Primitive::Ball { center, radius } => {
                let r = a - *center;
                let qa = d.dot(d);
                if qa == 0.0 {
                    return (r.euclid() <= *radius).then_some((0.0, 1.0));
                }
                let qb = 2.0 * r.dot(d);
                let qc = r.dot(r) - radius * radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                let lo = ((-qb - s) / (2.0 * qa)).max(0.0);
                let hi = ((-qb + s) / (2.0 * qa)).min(1.0);
                (lo <= hi).then_some((lo, hi))
            }
            Primitive::HalfPlane { a: na, b: nb, c } => clip_half_plane(Point::new(*na, *nb), *c, a, d, 0.0, 1.0),
            Primitive::Line(l) => {
                let (sa, sb) = (l.signed_dist(a), l.signed_dist(b));
                if sa.abs() <= ON_LINE_TOL && sb.abs() <= ON_LINE_TOL {
                    Some((0.0, 1.0))
                } else if sa.abs() <= ON_LINE_TOL {
                    Some((0.0, 0.0))
                } else if sb.abs() <= ON_LINE_TOL {
                    Some((1.0, 1.0))
                } else if sa.signum() != sb.signum() {
                    let t = sa / (sa - sb);
                    Some((t, t))
                } else {
                    None
                }
            }
            Primitive::Polygon { .. } => {
                let mut lo = 0.0;
                let mut hi = 1.0;
                for (n, c) in self.half_planes() {
                    let (l, h) = clip_half_plane(n, c, a, d, lo, hi)?;
                    lo = l;
                    hi = h;
                }
                Some((lo, hi))
            }
        }
    }
}

fn clip_half_plane(n: Point, c: f64, a: Point, d: Point, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let s = n.dot(d);
    let v = c - n.dot(a);
    let (mut lo, mut hi) = (lo, hi);
    if s == 0.0 {
        if v < 0.0 {
            return None;
        }
    } else if s > 0.0 {
        hi = hi.min(v / s);
    } else {
        lo = lo.max(v / s);
    }
    (lo <= hi).then_some((lo, hi))
}

/// A finite union of closed convex primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClosedSetRepr")]
pub struct ClosedSet {
    pub primitives: Vec<Primitive>,
}

#[derive(Deserialize)]
struct ClosedSetRepr {
    primitives: Vec<Primitive>,
}

impl TryFrom<ClosedSetRepr> for ClosedSet {
    type Error = Error;
    fn try_from(r: ClosedSetRepr) -> Result<Self> {
        ClosedSet::new(r.primitives)
    }
}

impl ClosedSet {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        for p in &primitives {
            p.validate()?;
        }
        Ok(ClosedSet { primitives })
    }

    /// The whole plane.
    pub fn everything() -> Self {
        ClosedSet {
            primitives: vec![Primitive::HalfPlane { a: 0.0, b: 1.0, c: f64::INFINITY }],
        }
    }

    pub fn line(l: Line) -> Self {
        ClosedSet {
            primitives: vec![Primitive::Line(l)],
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.primitives.iter().any(|q| q.contains(p))
    }

    /// Closure of `{t : a + t(b − a) ∈ E}` as disjoint sorted closed intervals.
    pub fn segment_intervals(&self, a: Point, b: Point) -> Vec<(f64, f64)> {
        let parts: Vec<(f64, f64)> = self.primitives.iter().filter_map(|q| q.segment_interval(a, b)).collect();
        merge_intervals(parts)
    }
}

/// Sorts closed intervals and merges those that overlap or touch.
pub fn merge_intervals(mut parts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    parts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
    for (lo, hi) in parts {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn box_clips_segment() {
        let b = Primitive::Box { min: p(0.25, -1.0), max: p(0.5, 1.0) };
        assert_eq!(b.segment_interval(p(0.0, 0.0), p(1.0, 0.0)), Some((0.25, 0.5)));
        assert_eq!(b.segment_interval(p(0.0, 2.0), p(1.0, 2.0)), None);
    }

    #[test]
    fn ball_and_half_plane() {
        let d = Primitive::Ball { center: p(0.5, 0.0), radius: 0.25 };
        assert_eq!(d.segment_interval(p(0.0, 0.0), p(1.0, 0.0)), Some((0.25, 0.75)));
        let h = Primitive::HalfPlane { a: 1.0, b: 0.0, c: 0.3 };
        let (lo, hi) = h.segment_interval(p(0.0, 0.0), p(1.0, 0.0)).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.3).abs() < 1e-15);
    }

    #[test]
    fn line_meets_transverse_segment_in_a_point() {
        let l = Primitive::Line(Line::x_axis());
        assert_eq!(l.segment_interval(p(0.0, 0.0), p(0.5, 0.1)), Some((0.0, 0.0)));
        assert_eq!(l.segment_interval(p(0.0, -1.0), p(0.0, 1.0)), Some((0.5, 0.5)));
        assert_eq!(l.segment_interval(p(0.0, 0.0), p(1.0, 0.0)), Some((0.0, 1.0)));
    }

    #[test]
    fn polygon_convexity_is_enforced() {
        let tri = Primitive::Polygon { vertices: vec![p(0.0, -1.0), p(1.0, -1.0), p(0.5, 1.0)] };
        assert!(tri.validate().is_ok());
        let (lo, hi) = tri.segment_interval(p(-1.0, 0.0), p(2.0, 0.0)).unwrap();
        assert!((lo - 1.25 / 3.0).abs() < 1e-15);
        assert!((hi - 1.75 / 3.0).abs() < 1e-15);
        let dart = Primitive::Polygon {
            vertices: vec![p(0.0, 0.0), p(2.0, 0.0), p(1.0, 0.3), p(1.0, 2.0)],
        };
        assert!(matches!(dart.validate(), Err(Error::NonConvexPrimitive(_))));
    }

    #[test]
    fn union_merges_touching_intervals() {
        let e = ClosedSet::new(vec![
            Primitive::Box { min: p(0.0, -1.0), max: p(0.5, 1.0) },
            Primitive::Box { min: p(0.5, -1.0), max: p(0.75, 1.0) },
        ])
        .unwrap();
        assert_eq!(e.segment_intervals(p(0.0, 0.0), p(1.0, 0.0)), vec![(0.0, 0.75)]);
    }
}
