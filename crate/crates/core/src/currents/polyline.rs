use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NormKind, Point};

/// An ordered list of vertices, parametrized on `[0, 1]` at constant speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polyline {
    pub points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("polyline needs at least one vertex"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite polyline vertex"));
        }
        Ok(Polyline { points })
    }

    pub fn segment(a: Point, b: Point) -> Self {
        Polyline { points: vec![a, b] }
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().expect("non-empty")
    }

    /// ℓ(γ) = Σ segment norms.
    pub fn length(&self, norm: NormKind) -> f64 {
        self.points.windows(2).map(|w| norm.dist(w[0], w[1])).sum()
    }

    /// Constant-speed parametrization; knots are cumulative arclength fractions.
    pub fn param_path(&self, norm: NormKind) -> ParamPath {
        let total = self.length(norm);
        let n = self.points.len();
        let mut knots = Vec::with_capacity(n);
        if n == 1 {
            return ParamPath {
                knots: vec![0.0, 1.0],
                points: vec![self.points[0], self.points[0]],
            };
        }
        if total == 0.0 {
            knots.extend((0..n).map(|k| k as f64 / (n - 1) as f64));
        } else {
            let mut acc = 0.0;
            knots.push(0.0);
            for w in self.points.windows(2) {
                acc += norm.dist(w[0], w[1]);
                knots.push((acc / total).min(1.0));
            }
            *knots.last_mut().expect("n ≥ 2") = 1.0;
        }
        ParamPath {
            knots,
            points: self.points.clone(),
        }
    }

    pub fn translated(&self, w: Point) -> Polyline {
        Polyline {
            points: self.points.iter().map(|&p| p + w).collect(),
        }
    }

    pub fn reversed(&self) -> Polyline {
        let mut points = self.points.clone();
        points.reverse();
        Polyline { points }
    }
}

/// A piecewise-affine curve `[0, 1] → ℝ²` with explicit knot parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPath {
    pub knots: Vec<f64>,
    pub points: Vec<Point>,
}

impl ParamPath {
    pub fn new(knots: Vec<f64>, points: Vec<Point>) -> Result<Self> {
        if knots.len() != points.len() || knots.len() < 2 {
            return Err(Error::DimensionMismatch("knots vs points".into()));
        }
        if knots[0] != 0.0 || *knots.last().expect("len ≥ 2") != 1.0 || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::MalformedPartition("knots must rise from 0 to 1".into()));
        }
        Ok(ParamPath { knots, points })
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().expect("len ≥ 2")
    }

    /// Index `k` of the knot interval `[knots[k], knots[k+1]]` containing `t`.
    fn interval(&self, t: f64) -> usize {
        let last = self.knots.len() - 2;
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    pub fn eval(&self, t: f64) -> Point {
        let t = t.clamp(0.0, 1.0);
        let k = self.interval(t);
        let (a, b) = (self.knots[k], self.knots[k + 1]);
        if b <= a {
            return self.points[k + 1];
        }
        self.points[k].lerp(self.points[k + 1], (t - a) / (b - a))
    }

    /// Velocity on the knot interval containing `t` (right derivative).
    pub fn velocity(&self, t: f64) -> Point {
        let k = self.interval(t.clamp(0.0, 1.0));
        let dt = self.knots[k + 1] - self.knots[k];
        if dt <= 0.0 {
            Point::ORIGIN
        } else {
            (1.0 / dt) * (self.points[k + 1] - self.points[k])
        }
    }

    pub fn length(&self, norm: NormKind) -> f64 {
        self.points.windows(2).map(|w| norm.dist(w[0], w[1])).sum()
    }

    /// Straight pieces `(t0, t1, p0, p1)` with positive parameter length.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, Point, Point)> + '_ {
        (0..self.knots.len() - 1)
            .filter(|&k| self.knots[k + 1] > self.knots[k])
            .map(|k| (self.knots[k], self.knots[k + 1], self.points[k], self.points[k + 1]))
    }

    /// d_∞ against another path, exact: both are affine between the merged
    /// knots, so the convex pointwise distance peaks at a knot.
    pub fn d_inf(&self, other: &ParamPath, norm: NormKind) -> f64 {
        merged_knots(&self.knots, &other.knots)
            .into_iter()
            .map(|t| norm.dist(self.eval(t), other.eval(t)))
            .fold(0.0, f64::max)
    }
}

/// Sorted union of two knot vectors.
pub fn merged_knots(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}
