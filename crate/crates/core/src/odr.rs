//! Single-segment optimal displacement receiver with non-ideal devices.
//!
//! The segment state `|±alpha_i>` is displaced by a real local-oscillator
//! amplitude `beta` and sent to an on/off detector. "No click" decides H0.
//! With `a = xi * sqrt(tau) * alpha_i` and the mode-mismatch floor
//! `m = tau * alpha_i^2 * (1 - xi^2)`, the mean counts are
//!
//! ```text
//! mu0 = nu + eta * ((beta - a)^2 + m)     truth H0
//! mu1 = nu + eta * ((beta + a)^2 + m)     truth H1
//! ```
//!
//! which is the expanded form `nu + eta(tau alpha^2 + beta^2 -+ 2 xi sqrt(tau) alpha beta)`
//! rewritten without the cancellation near `beta = a`. The success
//! probability is `p0 e^{-mu0} + p1 (1 - e^{-mu1})`; its stationary points
//! satisfy `p0 (beta - a) / (p1 (beta + a)) = exp(-4 eta a beta)`.

use crate::error::{Error, Result};
use crate::model::{DeviceParams, Priors, StageKind};
use crate::numerics::{find_root_increasing_with_exit, Bracket};

/// Amplitudes at or below this are treated as carrying no signal.
pub const MIN_AMPLITUDE: f64 = 1e-12;

/// Lower limit of the log-offset search; `e^-740` is near the smallest
/// positive double.
const LOG_OFFSET_FLOOR: f64 = -740.0;
const LOG_OFFSET_CEIL: f64 = 700.0;
/// Final-step threshold for the Halley iteration: the error left after a
/// step of this relative size is far below rounding.
const HALLEY_EXIT: f64 = 1e-5;
/// Warm offsets below this go straight to the log-space solve.
const WARM_OFFSET_MIN: f64 = 1e-290;

/// Outcome of one optimized segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSolution {
    pub beta_star: f64,
    pub pe: f64,
    pub kind: StageKind,
}

/// Mean click counts `(mu0, mu1)` under H0 and H1 for displacement `beta`.
pub fn mean_counts(alpha_i: f64, beta: f64, params: &DeviceParams) -> (f64, f64) {
    let a = params.xi() * params.tau().sqrt() * alpha_i;
    let floor = params.tau() * alpha_i * alpha_i * (1.0 - params.xi() * params.xi());
    let eta = params.eta();
    let nu = params.nu();
    (
        nu + eta * ((beta - a).powi(2) + floor),
        nu + eta * ((beta + a).powi(2) + floor),
    )
}

/// Probability of a correct decision for displacement `beta`.
pub fn success_probability(priors: &Priors, alpha_i: f64, beta: f64, params: &DeviceParams) -> f64 {
    let (mu0, mu1) = mean_counts(alpha_i, beta, params);
    let p = priors.p0() * (-mu0).exp() - priors.p1() * (-mu1).exp_m1();
    p.clamp(0.0, 1.0)
}

/// `1 - success_probability`, evaluated in complementary form so small error
/// probabilities keep their relative precision.
pub fn error_probability(priors: &Priors, alpha_i: f64, beta: f64, params: &DeviceParams) -> f64 {
    let (mu0, mu1) = mean_counts(alpha_i, beta, params);
    let p = -priors.p0() * (-mu0).exp_m1() + priors.p1() * (-mu1).exp();
    p.clamp(0.0, 1.0)
}

/// Displacement maximizing the success probability.
///
/// The stationarity equation has exactly one root with `beta > a` and one
/// with `beta < -a`, and the success probability is increasing on
/// `[-a, a]`. Both tails tend to `p1`, so the root above `a` is the global
/// maximum and the root below `-a` is a minimum; only the former is solved
/// here ([`mirror_displacement`] returns the other one). The root is found in
/// `t = ln(beta - a)`, where the equation
/// `ln(p0/p1) - ln(1 + 2a/u) + 4 eta a (a + u) = 0`, `u = e^t`, is increasing
/// and keeps full relative precision even when `beta - a` is far below one
/// ulp of `a` (strong signals).
pub fn solve_optimal_displacement(priors: &Priors, alpha_i: f64, params: &DeviceParams) -> Result<f64> {
    let mut warm = f64::NAN;
    solve_warm(priors, alpha_i, params, &mut warm)
}

/// [`solve_optimal_displacement`] warm-started from `*warm`, the offset
/// `beta - a` of a nearby solve, when it is finite; the new offset is
/// written back.
fn solve_warm(priors: &Priors, alpha_i: f64, params: &DeviceParams, warm: &mut f64) -> Result<f64> {
    let (a, k, c) = stationarity_coefficients(priors, alpha_i, params)?;
    let u = match refine_offset(a, k, c, *warm) {
        Some(u) => u,
        None => solve_log_offset(a, k, c, warm.ln())?.exp(),
    };
    *warm = u;
    Ok(a + u)
}

/// Halley iteration on `u` itself from a warm start. In `u` the equation
/// is concave and increasing, and each step needs one logarithm and no
/// exponential. Gives up (`None`) on a poor or tiny start, leaving the
/// safeguarded log-space solve to the caller.
fn refine_offset(a: f64, k: f64, c: f64, mut u: f64) -> Option<f64> {
    let two_a = 2.0 * a;
    for _ in 0..6 {
        if !(u > WARM_OFFSET_MIN && u.is_finite()) {
            return None;
        }
        let w = u + two_a;
        let log_ratio = if u < two_a { (w / u).ln() } else { (two_a / u).ln_1p() };
        let value = c - log_ratio + k * (a + u);
        let slope = two_a / (u * w) + k;
        let curvature = -two_a * (u + w) / (u * u * w * w);
        let halley = slope - value * curvature / (2.0 * slope);
        let step = value / if halley > 0.5 * slope { halley } else { slope };
        let next = u - step;
        if step.abs() <= HALLEY_EXIT * u {
            return (next > 0.0).then_some(next);
        }
        u = next;
    }
    None
}

/// The stationary displacement below `-a`, a local minimum of the success
/// probability. Exposed for verification.
pub fn mirror_displacement(priors: &Priors, alpha_i: f64, params: &DeviceParams) -> Result<f64> {
    let (a, k, c) = stationarity_coefficients(priors, alpha_i, params)?;
    // beta = -a - v: c + ln(1 + 2a/v) - k (a + v) = 0, the positive-branch
    // equation with c -> -c after negation
    let t = solve_log_offset(a, k, -c, f64::NAN)?;
    Ok(-a - t.exp())
}

fn stationarity_coefficients(priors: &Priors, alpha_i: f64, params: &DeviceParams) -> Result<(f64, f64, f64)> {
    let (p0, p1) = (priors.p0(), priors.p1());
    if !(p0 > 0.0 && p1 > 0.0) {
        return Err(Error::DegeneratePriors(p0));
    }
    if !(alpha_i > MIN_AMPLITUDE) || !alpha_i.is_finite() {
        return Err(Error::DegenerateSignal(alpha_i));
    }
    let a = params.xi() * params.tau().sqrt() * alpha_i;
    Ok((a, 4.0 * params.eta() * a, (p0 / p1).ln()))
}

/// Root `t = ln u` of `c - ln(1 + 2a/u) + k (a + u) = 0`.
fn solve_log_offset(a: f64, k: f64, c: f64, warm: f64) -> Result<f64> {
    let g = |t: f64| {
        let u = t.exp();
        let w = u + 2.0 * a;
        // ln(1 + 2a/u) = ln(u + 2a) - t loses nothing while u < 2a, and
        // ln is markedly cheaper than ln_1p
        let log_ratio = if u < 2.0 * a { w.ln() - t } else { (2.0 * a / u).ln_1p() };
        let value = c - log_ratio + k * (a + u);
        let slope = 2.0 * a / w + k * u;
        // Halley: fold the curvature into the slope the Newton solver sees
        let curvature = k * u - 2.0 * a * u / (w * w);
        let halley = slope - value * curvature / (2.0 * slope);
        (value, if halley > 0.5 * slope { halley } else { slope })
    };
    // strong signal: u ~ 2a e^{-c - k a}; weak signal: u ~ sqrt(2a / k)
    let guess = if k * a >= 1.0 { 2.0 * a * (-c - k * a).exp() } else { (2.0 * a / k).sqrt() };
    let t0 = if warm.is_finite() { warm.clamp(LOG_OFFSET_FLOOR, LOG_OFFSET_CEIL) } else { guess.ln().clamp(LOG_OFFSET_FLOOR, 0.0) };
    let limits = Bracket::new(LOG_OFFSET_FLOOR, LOG_OFFSET_CEIL)?;
    match find_root_increasing_with_exit(g, t0, limits, 2.0, 0.0, HALLEY_EXIT) {
        Ok(t) => Ok(t),
        // root below the smallest representable offset
        Err(_) if g(LOG_OFFSET_FLOOR).0 >= 0.0 => Ok(LOG_OFFSET_FLOOR),
        Err(e) => Err(e),
    }
}

/// Optimized error probability of one segment.
///
/// Segments without signal (`alpha_i <= MIN_AMPLITUDE`) or with no doubt
/// left (`p1 = 0`) are no-ops: nothing is measured, the tentative decision
/// H0 stands and the error is `p1`. With `p0 = 0` the optimum is an
/// unbounded displacement whose certain click yields zero error.
pub fn stage_error(priors: &Priors, alpha_i: f64, params: &DeviceParams) -> Result<StageSolution> {
    let mut warm = f64::NAN;
    stage_error_warm(priors, alpha_i, params, &mut warm)
}

/// [`stage_error`] with a warm-start slot for the displacement solve, for
/// callers that evaluate many nearby configurations.
pub fn stage_error_warm(
    priors: &Priors,
    alpha_i: f64,
    params: &DeviceParams,
    warm: &mut f64,
) -> Result<StageSolution> {
    if priors.p1() == 0.0 || !(alpha_i > MIN_AMPLITUDE) {
        return Ok(StageSolution { beta_star: 0.0, pe: priors.p1(), kind: StageKind::NoOp });
    }
    if priors.p0() == 0.0 {
        return Ok(StageSolution { beta_star: f64::INFINITY, pe: 0.0, kind: StageKind::Certain });
    }
    let beta_star = solve_warm(priors, alpha_i, params, warm)?;
    let pe = error_probability(priors, alpha_i, beta_star, params);
    Ok(StageSolution { beta_star, pe, kind: StageKind::Measured })
}
