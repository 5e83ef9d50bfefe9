//! Bracketed scalar root finding (Brent's method).

#[derive(Debug, Clone, Copy)]
pub struct BrentOptions {
    /// Stop once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than this.
    pub x_tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketedRoot {
    pub x: f64,
    pub fx: f64,
    /// Function evaluations made by the solver (end points excluded).
    pub iterations: usize,
    /// `|fx| <= f_tol` held on exit.
    pub converged: bool,
}

/// Brent's method on `[a, b]` given `fa = f(a)`, `fb = f(b)` of opposite sign (or one zero).
///
/// Inverse quadratic interpolation and secant steps with bisection fallback,
/// after Numerical Recipes `zbrent`. The closure is fallible so a failed
/// function evaluation aborts the search with its own error.
pub fn brent<E, F>(
    mut f: F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    opts: BrentOptions,
) -> Result<BracketedRoot, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    debug_assert!(fa * fb <= 0.0, "root not bracketed");
    let done = |x: f64, fx: f64, iterations: usize| BracketedRoot {
        x,
        fx,
        iterations,
        converged: fx.abs() <= opts.f_tol,
    };
    if fa.abs() <= opts.f_tol || fb.abs() <= opts.f_tol {
        return Ok(if fa.abs() <= fb.abs() {
            done(a, fa, 0)
        } else {
            done(b, fb, 0)
        });
    }

    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=opts.max_iter {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.x_tol;
        let xm = 0.5 * (c - b);
        if fb.abs() <= opts.f_tol || xm.abs() <= tol1 || fb == 0.0 {
            return Ok(done(b, fb, iter - 1));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Ok(done(b, fb, opts.max_iter))
}
