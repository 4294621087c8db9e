//! Planar vectors, norms and affine maps.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or vector) of the plane. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn euclid(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Bit pattern with `-0.0` folded into `0.0`; used to aggregate atoms.
    pub fn key(self) -> (u64, u64) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// The norm of a normed plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    #[default]
    L2,
    Linf,
    /// `max(wx |x|, wy |y|)` with positive weights.
    WeightedMax { wx: f64, wy: f64 },
}

impl NormKind {
    pub fn validate(self) -> Result<Self> {
        if let NormKind::WeightedMax { wx, wy } = self {
            if !(wx > 0.0 && wy > 0.0 && wx.is_finite() && wy.is_finite()) {
                return Err(Error::invalid("weighted max norm needs positive weights"));
            }
        }
        Ok(self)
    }

    pub fn norm(self, v: Point) -> f64 {
        match self {
            NormKind::L1 => v.x.abs() + v.y.abs(),
            NormKind::L2 => v.euclid(),
            NormKind::Linf => v.x.abs().max(v.y.abs()),
            NormKind::WeightedMax { wx, wy } => (wx * v.x.abs()).max(wy * v.y.abs()),
        }
    }

    pub fn dist(self, a: Point, b: Point) -> f64 {
        self.norm(a - b)
    }

    /// Dual norm of a linear functional `v ↦ g·v`, i.e. its Lipschitz constant.
    pub fn dual(self, g: Point) -> f64 {
        match self {
            NormKind::L1 => g.x.abs().max(g.y.abs()),
            NormKind::L2 => g.euclid(),
            NormKind::Linf => g.x.abs() + g.y.abs(),
            NormKind::WeightedMax { wx, wy } => g.x.abs() / wx + g.y.abs() / wy,
        }
    }

    /// Largest dual norm of a Euclidean unit covector. Converts Euclidean
    /// Lipschitz bounds into bounds for this norm.
    pub fn euclid_lip_factor(self) -> f64 {
        match self {
            NormKind::L1 | NormKind::L2 => 1.0,
            NormKind::Linf => std::f64::consts::SQRT_2,
            NormKind::WeightedMax { wx, wy } => (1.0 / (wx * wx) + 1.0 / (wy * wy)).sqrt(),
        }
    }

    /// Lebesgue area of the closed unit ball.
    pub fn ball_area(self) -> f64 {
        match self {
            NormKind::L1 => 2.0,
            NormKind::L2 => std::f64::consts::PI,
            NormKind::Linf => 4.0,
            NormKind::WeightedMax { wx, wy } => 4.0 / (wx * wy),
        }
    }

    /// Busemann area density relative to Lebesgue measure.
    pub fn area_factor(self) -> f64 {
        std::f64::consts::PI / self.ball_area()
    }

    /// Rescales `v` to unit norm. Zero stays zero.
    pub fn unit(self, v: Point) -> Point {
        let n = self.norm(v);
        if n > 0.0 {
            (1.0 / n) * v
        } else {
            v
        }
    }

    /// Operator norm of a linear map of the plane into itself.
    pub fn op_norm(self, m: [[f64; 2]; 2]) -> f64 {
        match self {
            NormKind::L1 => (m[0][0].abs() + m[1][0].abs()).max(m[0][1].abs() + m[1][1].abs()),
            NormKind::Linf => (m[0][0].abs() + m[0][1].abs()).max(m[1][0].abs() + m[1][1].abs()),
            NormKind::L2 => {
                // largest singular value from the eigenvalues of MᵀM
                let a = m[0][0] * m[0][0] + m[1][0] * m[1][0];
                let b = m[0][0] * m[0][1] + m[1][0] * m[1][1];
                let d = m[0][1] * m[0][1] + m[1][1] * m[1][1];
                let tr = a + d;
                let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
                (0.5 * (tr + disc)).max(0.0).sqrt()
            }
            NormKind::WeightedMax { wx, wy } => {
                // ‖D M D⁻¹‖_∞ with D = diag(wx, wy)
                let s = [[m[0][0], m[0][1] * wx / wy], [m[1][0] * wy / wx, m[1][1]]];
                NormKind::Linf.op_norm(s)
            }
        }
    }
}

/// An affine map `x ↦ A x + b` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// Row-major linear part.
    pub linear: [[f64; 2]; 2],
    pub offset: Point,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        linear: [[1.0, 0.0], [0.0, 1.0]],
        offset: Point::ORIGIN,
    };

    pub fn scaling(t: f64) -> Self {
        AffineMap {
            linear: [[t, 0.0], [0.0, t]],
            offset: Point::ORIGIN,
        }
    }

    pub fn translation(w: Point) -> Self {
        AffineMap {
            offset: w,
            ..Self::IDENTITY
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        self.apply_linear(p) + self.offset
    }

    pub fn apply_linear(&self, v: Point) -> Point {
        let a = &self.linear;
        Point::new(a[0][0] * v.x + a[0][1] * v.y, a[1][0] * v.x + a[1][1] * v.y)
    }

    /// Pulls a covector back through the linear part: `Aᵀ g`.
    pub fn pullback(&self, g: Point) -> Point {
        let a = &self.linear;
        Point::new(a[0][0] * g.x + a[1][0] * g.y, a[0][1] * g.x + a[1][1] * g.y)
    }

    pub fn op_norm(&self, norm: NormKind) -> f64 {
        norm.op_norm(self.linear)
    }

    pub fn is_finite(&self) -> bool {
        self.linear.iter().flatten().all(|v| v.is_finite()) && self.offset.is_finite()
    }
}

/// An affine line `a x + b y = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Line {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || (a == 0.0 && b == 0.0) {
            return Err(Error::invalid("line needs a non-zero finite normal"));
        }
        Ok(Line { a, b, c })
    }

    pub fn x_axis() -> Self {
        Line { a: 0.0, b: 1.0, c: 0.0 }
    }

    pub fn normal(&self) -> Point {
        Point::new(self.a, self.b)
    }

    /// Euclidean unit normal.
    pub fn unit_normal(&self) -> Point {
        let n = self.normal();
        (1.0 / n.euclid()) * n
    }

    /// Euclidean unit direction along the line.
    pub fn direction(&self) -> Point {
        let n = self.unit_normal();
        Point::new(-n.y, n.x)
    }

    /// Signed Euclidean offset of `p` from the line.
    pub fn signed_dist(&self, p: Point) -> f64 {
        (self.a * p.x + self.b * p.y - self.c) / self.normal().euclid()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.signed_dist(p).abs() <= tol
    }

    /// A point on the line, the foot of the origin.
    pub fn anchor(&self) -> Point {
        let n = self.normal();
        (self.c / n.dot(n)) * n
    }

    /// Coordinate of `p` along [`Line::direction`], measured from [`Line::anchor`].
    pub fn coordinate(&self, p: Point) -> f64 {
        (p - self.anchor()).dot(self.direction())
    }
}

/// Absolute tolerance used throughout for distances.
pub const DIST_TOL: f64 = 1e-9;
