use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Bracket { lo, hi })
        } else {
            Err(Error::InvalidBracket { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Root of a function that is strictly monotone on `bracket`.
///
/// Illinois-modified false position, with a bisection step whenever three
/// consecutive steps fail to halve the bracket; the worst case is therefore
/// a constant factor of plain bisection. Stops when `|f(x)| <= tol` or the
/// bracket is narrower than `1e-14 * max(1, |x|)`, returning whichever
/// endpoint has the smaller residual. Fully deterministic.
pub fn find_root_monotone<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }

    // side that was retained on the previous step: -1 = a, +1 = b
    let mut retained = 0i8;
    let mut width_checkpoint = b - a;
    let mut steps_since_checkpoint = 0;
    let mut force_bisect = false;

    for _ in 0..400 {
        let best = if fa.abs() <= fb.abs() { a } else { b };
        if fa.abs().min(fb.abs()) <= tol || (b - a) <= 1e-14 * best.abs().max(1.0) {
            return Ok(best);
        }

        let mut x = if force_bisect {
            force_bisect = false;
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            // no representable interior point left
            return Ok(best);
        }

        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == (fa > 0.0) {
            a = x;
            fa = fx;
            if retained == 1 {
                fb *= 0.5;
            }
            retained = 1;
        } else {
            b = x;
            fb = fx;
            if retained == -1 {
                fa *= 0.5;
            }
            retained = -1;
        }

        steps_since_checkpoint += 1;
        if steps_since_checkpoint == 3 {
            if b - a > 0.5 * width_checkpoint {
                force_bisect = true;
            }
            width_checkpoint = b - a;
            steps_since_checkpoint = 0;
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

const QUADRATIC_EXIT: f64 = 1e-9;

/// Safeguarded Newton iteration for an increasing function.
///
/// `f` returns `(value, derivative)`. Starting from `x0`, Newton steps are
/// accepted while they stay inside the current sign bracket and, before both
/// bracket ends are known, move at most `max_step`; otherwise the iterate
/// walks `max_step` toward the root or bisects the known bracket. The search
/// never leaves `limits`. Stops when `|f(x)| <= tol`, when the bracket is
/// narrower than `1e-14 * max(1, |x|)`, or when a Newton step is below
/// `1e-9 * max(1, |x|)`; in the last case that step is taken and returned,
/// since for a smooth simple root the following correction is below
/// rounding. `f` must therefore be smooth near the root.
pub fn find_root_increasing<F>(f: F, x0: f64, limits: Bracket, max_step: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    find_root_increasing_with_exit(f, x0, limits, max_step, tol, QUADRATIC_EXIT)
}

/// [`find_root_increasing`] with a caller-chosen final-step threshold in
/// place of `1e-9`. Callers whose `f` returns a Halley-corrected slope
/// (cubic convergence) can exit on much larger final steps.
pub fn find_root_increasing_with_exit<F>(
    mut f: F,
    x0: f64,
    limits: Bracket,
    max_step: f64,
    tol: f64,
    exit_step: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (limits.lo, limits.hi);
    let (mut lo_known, mut hi_known) = (false, false);
    let mut x = x0.clamp(lo, hi);
    for _ in 0..300 {
        let (fx, dfx) = f(x);
        if fx.is_nan() {
            return Err(Error::NoSignChange { lo, hi });
        }
        if fx == 0.0 || fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            if x >= limits.hi {
                return Err(Error::NoSignChange { lo: limits.lo, hi: limits.hi });
            }
            lo = x;
            lo_known = true;
        } else {
            if x <= limits.lo {
                return Err(Error::NoSignChange { lo: limits.lo, hi: limits.hi });
            }
            hi = x;
            hi_known = true;
        }
        let scale = x.abs().max(1.0);
        let bracketed = lo_known && hi_known;
        if bracketed && hi - lo <= 1e-14 * scale {
            return Ok(x);
        }

        let newton = x - fx / dfx;
        if (newton - x).abs() <= 1e-15 * scale {
            return Ok(x);
        }
        // the step after this one is below rounding
        if (newton - x).abs() <= exit_step * scale && newton > lo && newton < hi {
            return Ok(newton);
        }
        let inside = newton > lo && newton < hi;
        let next = if inside && (bracketed || (newton - x).abs() <= max_step) {
            newton
        } else if bracketed {
            0.5 * (lo + hi)
        } else if fx < 0.0 {
            (x + max_step).min(hi)
        } else {
            (x - max_step).max(lo)
        };
        if (next - x).abs() <= 1e-15 * scale {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
