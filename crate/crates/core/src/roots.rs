//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootFindResult {
    pub root: f64,
    /// Function value at `root`.
    pub residual: f64,
    pub iterations: u32,
}

const MAX_ITER: u32 = 200;

/// Finds a zero of `f` in `[lo, hi]`, which must bracket a sign change.
///
/// Each step tries a secant (false-position) point and falls back to
/// bisection whenever the secant point would not shrink the bracket by at
/// least half. Stops when `|f| ≤ ftol` or the bracket is at machine width.
pub fn bracketed<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, ftol: f64) -> Result<RootFindResult> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::Domain("function is not finite at the bracket ends".into()));
    }
    if fa == 0.0 {
        return Ok(RootFindResult { root: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(RootFindResult { root: b, residual: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Infeasible(format!("[{lo}, {hi}] does not bracket a root")));
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut use_secant = true;
    for it in 1..=MAX_ITER {
        let width = b - a;
        let mut c = if use_secant { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc.abs() < best.1.abs() {
            best = (c, fc);
        }
        if fc == 0.0 || fc.abs() <= ftol && (b - a).abs() < 1e-6 * (1.0 + c.abs()) {
            return Ok(RootFindResult { root: c, residual: fc, iterations: it });
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
        } else {
            b = c;
            fb = fc;
        }
        // alternate to a bisection step when secant progress stalls
        use_secant = (b - a).abs() < 0.5 * width.abs();
        if (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    Ok(RootFindResult { root: best.0, residual: best.1, iterations: MAX_ITER })
}

/// Scans `[lo, hi]` on `n` equal cells and returns every cell whose end
/// values change sign.
pub fn scan_brackets<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + i as f64 * h };
        let f1 = f(x1);
        if f0 == 0.0 || (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 || f1 == 0.0 && i == n {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = bracketed(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-14);
        assert!(r.residual.abs() <= 1e-14);
        let r = bracketed(|x: f64| x.cos(), 1.0, 2.0, 1e-15).unwrap();
        assert!((r.root - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn handles_kinks_and_flat_tails() {
        let f = |x: f64| if x < 0.3 { -1.0 } else { (x - 0.3) * 1e-3 + 1e-9 };
        let r = bracketed(f, 0.0, 1.0, 1e-12).unwrap();
        assert!(r.root <= 0.3 + 1e-9 && r.root >= 0.3 - 1e-9);
        let g = |x: f64| (x - 0.7).powi(3);
        let r = bracketed(g, 0.0, 1.0, 1e-15).unwrap();
        assert!((r.root - 0.7).abs() < 1e-5);
    }

    #[test]
    fn rejects_missing_bracket() {
        assert!(bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn scan_finds_all_sign_changes() {
        let b = scan_brackets(|x: f64| x.sin(), 0.5, 10.0, 256);
        assert_eq!(b.len(), 3);
        for (lo, hi) in b {
            let r = bracketed(|x: f64| x.sin(), lo, hi, 1e-14).unwrap();
            assert!((r.root / std::f64::consts::PI).fract().abs() < 1e-12 || (r.root / std::f64::consts::PI).fract() > 1.0 - 1e-12);
        }
    }
}
