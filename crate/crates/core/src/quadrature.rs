//! Composite Simpson rules with Richardson doubling.

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Starting panel count for one-dimensional integrals.
pub const START_PANELS_1D: usize = 64;
const MAX_PANELS_1D: usize = 1 << 16;

/// Integrates a smooth function on `[a, b]`: 64 panels, doubled until two
/// successive Richardson-extrapolated values differ by less than `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut n = START_PANELS_1D;
    let mut coarse = simpson(&f, a, b, n);
    let mut prev_extrap = f64::NAN;
    loop {
        n *= 2;
        let fine = simpson(&f, a, b, n);
        let extrap = fine + (fine - coarse) / 15.0;
        if (extrap - prev_extrap).abs() < tol || (fine - coarse).abs() < tol * 1e-3 || n >= MAX_PANELS_1D {
            return extrap;
        }
        prev_extrap = extrap;
        coarse = fine;
    }
}

/// Integrates over `[a, b]` split at the given interior breakpoints.
pub fn integrate_split(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut acc = 0.0;
    let mut lo = a;
    for &t in pts.iter().chain(std::iter::once(&b)) {
        acc += integrate(&f, lo, t, tol);
        lo = t;
    }
    acc
}

/// Tensor Simpson rule with `n` panels in each direction.
pub fn simpson_2d(f: &impl Fn(f64, f64) -> f64, s: (f64, f64), t: (f64, f64), n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let hs = (s.1 - s.0) / n as f64;
    let ht = (t.1 - t.0) / n as f64;
    let w = |k: usize| {
        if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = 0.0;
    for i in 0..=n {
        let si = s.0 + i as f64 * hs;
        let wi = w(i);
        for j in 0..=n {
            acc += wi * w(j) * f(si, t.0 + j as f64 * ht);
        }
    }
    acc * hs * ht / 9.0
}

/// Adaptive tensor Simpson on a rectangle: 8×8 panels, doubled until the
/// Richardson-corrected values agree within `tol` or `max_panels` is reached.
pub fn integrate_2d(f: impl Fn(f64, f64) -> f64, s: (f64, f64), t: (f64, f64), tol: f64, max_panels: usize) -> f64 {
    if s.0 == s.1 || t.0 == t.1 {
        return 0.0;
    }
    let mut n = 8;
    let mut coarse = simpson_2d(&f, s, t, n);
    let mut prev = f64::NAN;
    loop {
        n *= 2;
        let fine = simpson_2d(&f, s, t, n);
        let extrap = fine + (fine - coarse) / 15.0;
        if (extrap - prev).abs() < tol || (fine - coarse).abs() < tol * 1e-3 || 2 * n * 2 * n > max_panels {
            return extrap;
        }
        prev = extrap;
        coarse = fine;
    }
}
