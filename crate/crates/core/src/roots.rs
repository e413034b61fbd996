//! Bracketed root finding: secant steps safeguarded by bisection.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    /// Width of the final bracket.
    pub width: f64,
    pub iterations: usize,
}

/// Errors from [`bracketed_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootError {
    /// `f(lo)` and `f(hi)` have the same sign.
    NotBracketed { f_lo: f64, f_hi: f64 },
    /// The function returned NaN inside the bracket.
    NotFinite { x: f64 },
}

/// Finds a sign change of `f` in `[lo, hi]`.
///
/// Stops once the bracket is narrower than `x_tol` (absolute) and the
/// best endpoint has `|f| <= f_tol`, or when the bracket cannot shrink any
/// further in floating point.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64) -> Result<Root, RootError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() {
        return Err(RootError::NotFinite { x: a });
    }
    if fb.is_nan() {
        return Err(RootError::NotFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, width: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, width: 0.0, iterations: 0 });
    }
    if (fa > 0.0) == (fb > 0.0) {
        return Err(RootError::NotBracketed { f_lo: fa, f_hi: fb });
    }

    let best = |a: f64, fa: f64, b: f64, fb: f64| {
        if libm::fabs(fa) <= libm::fabs(fb) {
            (a, fa)
        } else {
            (b, fb)
        }
    };

    for iter in 1..=400 {
        let width = b - a;
        let (x, fx) = best(a, fa, b, fb);
        if (width <= x_tol && libm::fabs(fx) <= f_tol) || fx == 0.0 {
            return Ok(Root { x, residual: fx, width, iterations: iter });
        }
        let mid = a + 0.5 * width;
        if mid <= a || mid >= b {
            return Ok(Root { x, residual: fx, width, iterations: iter });
        }

        // Secant candidate, accepted only strictly inside the bracket.
        let mut shrunk_enough = false;
        if fb.is_finite() && fa.is_finite() {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a && s < b {
                let fs = f(s);
                if fs.is_nan() {
                    return Err(RootError::NotFinite { x: s });
                }
                if fs == 0.0 {
                    return Ok(Root { x: s, residual: 0.0, width: 0.0, iterations: iter });
                }
                if (fs > 0.0) == (fa > 0.0) {
                    a = s;
                    fa = fs;
                } else {
                    b = s;
                    fb = fs;
                }
                shrunk_enough = b - a <= 0.5 * width;
            }
        }
        if !shrunk_enough {
            let m = a + 0.5 * (b - a);
            if m <= a || m >= b {
                continue;
            }
            let fm = f(m);
            if fm.is_nan() {
                return Err(RootError::NotFinite { x: m });
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
    }
    let (x, fx) = best(a, fa, b, fb);
    Ok(Root { x, residual: fx, width: b - a, iterations: 400 })
}
