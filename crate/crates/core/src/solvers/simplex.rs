//! Two-phase revised simplex with Bland's rule, a dense LU factorization of
//! the basis and product-form eta updates between refactorizations.

use log::{debug, trace};

use crate::error::{Error, Result};

/// Pivots between refactorizations of the basis.
pub const REFACTOR_EVERY: usize = 50;
/// Pivot limit across both phases.
pub const ITERATION_LIMIT: usize = 100_000;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;

/// `min cᵀx` subject to `A x = b`, `x ≥ 0`, with `A` stored by sparse columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// `columns[j]` lists `(row, coefficient)` pairs of column `j`.
    pub columns: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(rows: usize) -> Self {
        LinearProgram {
            objective: Vec::new(),
            columns: Vec::new(),
            rhs: vec![0.0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, column: Vec<(usize, f64)>) -> usize {
        self.objective.push(cost);
        self.columns.push(column);
        self.objective.len() - 1
    }

    /// Builds a program from dense rows.
    pub fn from_dense(objective: Vec<f64>, a: &[Vec<f64>], rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        if a.len() != rhs.len() || a.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("constraint matrix shape".into()));
        }
        let mut columns = vec![Vec::new(); n];
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    columns[j].push((i, v));
                }
            }
        }
        Ok(LinearProgram { objective, columns, rhs })
    }

    fn validate(&self) -> Result<()> {
        if self.columns.len() != self.objective.len() {
            return Err(Error::DimensionMismatch("objective vs columns".into()));
        }
        let m = self.rows();
        for col in &self.columns {
            for &(i, v) in col {
                if i >= m {
                    return Err(Error::DimensionMismatch(format!("row {i} out of range")));
                }
                if !v.is_finite() {
                    return Err(Error::invalid("non-finite constraint coefficient"));
                }
            }
        }
        if self.objective.iter().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite objective or right-hand side"));
        }
        Ok(())
    }

    /// `max |A x − b|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut r: Vec<f64> = self.rhs.iter().map(|b| -b).collect();
        for (col, &xj) in self.columns.iter().zip(x) {
            for &(i, v) in col {
                r[i] += v * xj;
            }
        }
        r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub optimum: f64,
    pub x: Vec<f64>,
    /// Row duals `y` with `Aᵀy ≤ c` and `bᵀy = cᵀx` at optimality.
    pub y: Vec<f64>,
    pub pivots: usize,
    /// Rows found to be linear combinations of the others.
    pub redundant_rows: Vec<usize>,
}

impl LpSolution {
    pub fn duality_gap(&self, lp: &LinearProgram) -> f64 {
        let by: f64 = lp.rhs.iter().zip(&self.y).map(|(b, y)| b * y).sum();
        (self.optimum - by).abs()
    }
}

/// Dense LU with partial pivoting, `P B = L U`, plus an eta file.
struct BasisFactor {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    etas: Vec<(usize, Vec<(usize, f64)>)>,
}

impl BasisFactor {
    fn factor(m: usize, dense: Vec<f64>) -> Result<Self> {
        let mut lu = dense;
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut p = k;
            let mut best = lu[k * m + k].abs();
            for i in k + 1..m {
                let v = lu[i * m + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-13 {
                return Err(Error::Infeasible("singular basis".into()));
            }
            if p != k {
                for j in 0..m {
                    lu.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * m + k];
            for i in k + 1..m {
                let f = lu[i * m + k] / piv;
                if f != 0.0 {
                    lu[i * m + k] = f;
                    for j in k + 1..m {
                        lu[i * m + j] -= f * lu[k * m + j];
                    }
                } else {
                    lu[i * m + k] = 0.0;
                }
            }
        }
        Ok(BasisFactor {
            m,
            lu,
            perm,
            etas: Vec::new(),
        })
    }

    /// Solves `B x = a`.
    fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| a[p]).collect();
        for i in 0..m {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * m + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..m).rev() {
            let mut s = x[i];
            for j in i + 1..m {
                s -= self.lu[i * m + j] * x[j];
            }
            x[i] = s / self.lu[i * m + i];
        }
        for (r, eta) in &self.etas {
            let xr = x[*r];
            if xr == 0.0 {
                continue;
            }
            for &(i, v) in eta {
                if i == *r {
                    x[i] = v * xr;
                } else {
                    x[i] += v * xr;
                }
            }
        }
        x
    }

    /// Solves `yᵀ B = cᵀ`.
    fn btran(&self, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut v = c.to_vec();
        for (r, eta) in self.etas.iter().rev() {
            v[*r] = eta.iter().map(|&(i, e)| v[i] * e).sum();
        }
        // Uᵀ z = v, then Lᵀ w = z, then y = Pᵀ w
        let mut z = v;
        for i in 0..m {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * m + i] * z[j];
            }
            z[i] = s / self.lu[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            for j in i + 1..m {
                s -= self.lu[j * m + i] * z[j];
            }
            z[i] = s;
        }
        let mut y = vec![0.0; m];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = z[k];
        }
        y
    }

    fn push_eta(&mut self, r: usize, d: &[f64]) {
        let dr = d[r];
        let mut eta = Vec::new();
        for (i, &di) in d.iter().enumerate() {
            if i == r {
                eta.push((i, 1.0 / dr));
            } else if di != 0.0 {
                eta.push((i, -di / dr));
            }
        }
        self.etas.push((r, eta));
    }
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    m: usize,
    /// Original columns followed by one artificial per row.
    n_orig: usize,
    sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    xb: Vec<f64>,
    factor: BasisFactor,
    pivots: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn column(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        if j < self.n_orig {
            for &(i, v) in &self.lp.columns[j] {
                a[i] += self.sign[i] * v;
            }
        } else {
            a[j - self.n_orig] = 1.0;
        }
        a
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n_orig {
            self.lp.columns[j].iter().map(|&(i, v)| self.sign[i] * v * y[i]).sum()
        } else {
            y[j - self.n_orig]
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut dense = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                dense[i * m + k] = v;
            }
        }
        self.factor = BasisFactor::factor(m, dense)?;
        let b: Vec<f64> = (0..m).map(|i| self.sign[i] * self.lp.rhs[i]).collect();
        self.xb = self.factor.ftran(&b);
        for v in &mut self.xb {
            if *v < 0.0 && *v > -FEAS_TOL {
                *v = 0.0;
            }
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, entering: usize, d: &[f64]) -> Result<()> {
        let theta = self.xb[r] / d[r];
        for i in 0..self.m {
            if i == r {
                self.xb[i] = theta;
            } else {
                self.xb[i] -= theta * d[i];
                if self.xb[i] < 0.0 && self.xb[i] > -FEAS_TOL {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[entering] = true;
        self.basis[r] = entering;
        self.factor.push_eta(r, d);
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Runs Bland's rule on `costs` over the columns allowed by `eligible`.
    fn optimize(&mut self, costs: &[f64], eligible: &dyn Fn(usize) -> bool) -> Result<()> {
        loop {
            if self.pivots >= ITERATION_LIMIT {
                return Err(Error::IterationLimit(self.pivots));
            }
            let cb: Vec<f64> = self.basis.iter().map(|&j| costs[j]).collect();
            let y = self.factor.btran(&cb);
            let entering = (0..costs.len())
                .find(|&j| !self.in_basis[j] && eligible(j) && costs[j] - self.col_dot(j, &y) < -COST_TOL);
            let Some(q) = entering else {
                return Ok(());
            };
            let d = self.factor.ftran(&self.column(q));
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if d[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / d[i];
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-14 || (ratio <= best + 1e-14 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, theta)) = leave else {
                return Err(Error::Unbounded);
            };
            trace!("pivot {}: in {q}, out {}, step {theta:.3e}", self.pivots, self.basis[r]);
            self.pivot(r, q, &d)?;
        }
    }
}

/// Solves `lp` to optimality.
pub fn simplex_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let m = lp.rows();
    let n = lp.vars();
    let sign: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let b: Vec<f64> = lp.rhs.iter().zip(&sign).map(|(b, s)| b * s).collect();

    // Crash basis: a positive unit column for each row where possible.
    let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
    let mut in_basis = vec![false; n + m];
    let mut taken = vec![false; m];
    for (j, col) in lp.columns.iter().enumerate() {
        if let [(i, v)] = col.as_slice() {
            if !taken[*i] && sign[*i] * v > 0.0 {
                basis[*i] = j;
                taken[*i] = true;
            }
        }
    }
    for &j in &basis {
        in_basis[j] = true;
    }
    let mut t = Tableau {
        lp,
        m,
        n_orig: n,
        sign,
        basis,
        in_basis,
        xb: b,
        factor: BasisFactor::factor(0, Vec::new())?,
        pivots: 0,
        since_refactor: 0,
    };
    t.refactor()?;

    // Phase one: drive the artificials to zero.
    let artificial = |j: usize| j >= n;
    if t.basis.iter().any(|&j| artificial(j)) {
        let costs: Vec<f64> = (0..n + m).map(|j| if artificial(j) { 1.0 } else { 0.0 }).collect();
        t.optimize(&costs, &|_| true)?;
        let infeas: f64 = t.basis.iter().zip(&t.xb).filter(|(j, _)| artificial(**j)).map(|(_, x)| *x).sum();
        if infeas > FEAS_TOL * (1.0 + t.xb.iter().fold(0.0, |a: f64, v| a.max(v.abs()))) {
            return Err(Error::Infeasible(format!("phase one ends at {infeas:.3e}")));
        }
    }
    // Pivot basic artificials out where a structural column allows it.
    let mut redundant = Vec::new();
    for r in 0..m {
        if !artificial(t.basis[r]) {
            continue;
        }
        let mut unit = vec![0.0; m];
        unit[r] = 1.0;
        let row = t.factor.btran(&unit);
        let q = (0..n).find(|&j| !t.in_basis[j] && t.col_dot(j, &row).abs() > 1e-7);
        match q {
            Some(q) => {
                let d = t.factor.ftran(&t.column(q));
                t.pivot(r, q, &d)?;
            }
            None => redundant.push(t.basis[r] - n),
        }
    }
    if !redundant.is_empty() {
        debug!("redundant rows: {redundant:?}");
    }

    // Phase two with artificials barred from entering.
    let costs: Vec<f64> = (0..n + m).map(|j| if j < n { lp.objective[j] } else { 0.0 }).collect();
    t.optimize(&costs, &|j| j < n)?;
    t.refactor()?;

    let mut x = vec![0.0; n];
    for (k, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.xb[k].max(0.0);
        }
    }
    let cb: Vec<f64> = t.basis.iter().map(|&j| costs[j]).collect();
    let ys = t.factor.btran(&cb);
    let y: Vec<f64> = ys.iter().zip(&t.sign).map(|(v, s)| v * s).collect();
    let optimum = x.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    debug!("simplex: {} pivots, optimum {optimum:.12e}", t.pivots);
    Ok(LpSolution {
        optimum,
        x,
        y,
        pivots: t.pivots,
        redundant_rows: redundant,
    })
}
