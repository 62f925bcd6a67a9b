//! Bracketed scalar root finding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Smallest root of `f` on `[lo, hi]`.
///
/// Scans `scan` equal subintervals for the first sign change, then refines
/// it by bisection interleaved with secant steps. The secant step is taken
/// only when it lands well inside the bracket; otherwise the bracket is
/// halved, so the width at least halves every two iterations.
pub(crate) fn first_root<F>(
    what: &'static str,
    f: F,
    lo: f64,
    hi: f64,
    scan: usize,
    tol: f64,
) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    let no_bracket = || Error::NoBracket { what, lo, hi };
    let mut a = lo;
    let mut fa = f(a);
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            iterations: 0,
        });
    }
    let mut bracket = None;
    for i in 1..=scan {
        let b = if i == scan {
            hi
        } else {
            lo + (hi - lo) * i as f64 / scan as f64
        };
        let fb = f(b);
        if fb == 0.0 {
            return Ok(Root {
                x: b,
                iterations: 0,
            });
        }
        if fa.signum() != fb.signum() {
            bracket = Some((b, fb));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut b, mut fb) = bracket.ok_or_else(no_bracket)?;
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(no_bracket());
    }

    let mut iterations = 0;
    let mut bisect_next = false;
    while b - a > tol && iterations < 400 {
        iterations += 1;
        let width = b - a;
        let mut x = 0.5 * (a + b);
        if !bisect_next {
            let s = b - fb * (b - a) / (fb - fa);
            if s > a + 0.01 * width && s < b - 0.01 * width {
                x = s;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(Root { x, iterations });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        bisect_next = !bisect_next && (b - a) > 0.5 * width;
    }
    let x = if fa.abs() < fb.abs() { a } else { b };
    Ok(Root { x, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_smallest_of_two_roots() {
        // Concave with roots at 0.3 and 0.7.
        let f = |x: f64| -(x - 0.3) * (x - 0.7);
        let root = first_root("f", f, 0.0, 1.0, 64, 1e-13).unwrap();
        assert!((root.x - 0.3).abs() < 1e-12);
    }

    #[test]
    fn reports_missing_bracket() {
        let err = first_root("g", |x| x * x + 1.0, 0.0, 1.0, 16, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoBracket { what: "g", .. }));
    }

    #[test]
    fn converges_on_flat_functions() {
        let f = |x: f64| (x - 0.4).powi(3);
        let root = first_root("cubic", f, 0.0, 1.0, 8, 1e-13).unwrap();
        assert!((root.x - 0.4).abs() < 1e-12);
        assert!(root.iterations < 400);
    }
}
