use crate::error::{Error, Result};
use crate::numerics::{ln_factorial, Rng};

const INVERSION_LIMIT: f64 = 10.0;

/// Poisson variate with mean `mu`.
///
/// `mu < 10` uses sequential CDF inversion from a single uniform. Larger
/// means use Hörmann's transformed rejection with squeeze (PTRS, 1993),
/// whose acceptance test needs `ln k!` from [`ln_factorial`].
pub fn poisson_sample(mu: f64, rng: &mut Rng) -> Result<u64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::NegativeMean(mu));
    }
    if mu == 0.0 {
        return Ok(0);
    }
    if mu < INVERSION_LIMIT {
        Ok(inversion(mu, rng))
    } else {
        Ok(ptrs(mu, rng))
    }
}

fn inversion(mu: f64, rng: &mut Rng) -> u64 {
    let u = rng.next_f64();
    let mut p = (-mu).exp();
    let mut cdf = p;
    let mut k = 0u64;
    // the tail beyond k = 200 has mass < 1e-150 for mu < 10
    while u >= cdf && k < 200 {
        k += 1;
        p *= mu / k as f64;
        cdf += p;
    }
    k
}

fn ptrs(mu: f64, rng: &mut Rng) -> u64 {
    let slam = mu.sqrt();
    let loglam = mu.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let invalpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.next_f64() - 0.5;
        let v = rng.next_f64();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + invalpha.ln() - (a / (us * us) + b).ln();
        if lhs <= -mu + k * loglam - ln_factorial(k as u64) {
            return k as u64;
        }
    }
}
