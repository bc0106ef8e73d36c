//! Benchmark curves for binary coherent-state discrimination.

use crate::error::{Error, Result};
use crate::model::Priors;
use crate::numerics::erfc;

/// Helstrom bound `(1 - sqrt(1 - 4 p0 p1 e^{-4 nbar})) / 2` for `|±alpha>`
/// with `nbar = |alpha|^2`; the overlap is `|<-alpha|alpha>|^2 = e^{-4 nbar}`.
pub fn helstrom_bound(nbar: f64, priors: &Priors) -> Result<f64> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::NegativeEnergy(nbar));
    }
    let d = 4.0 * priors.p0() * priors.p1() * (-4.0 * nbar).exp();
    // 1 - sqrt(1 - d) = d / (1 + sqrt(1 - d)), no cancellation for small d
    Ok(0.5 * d / (1.0 + (1.0 - d).max(0.0).sqrt()))
}

/// Homodyne (standard quantum) limit `erfc(sqrt(2 nbar)) / 2`, equal priors.
pub fn sql_limit(nbar: f64) -> Result<f64> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::NegativeEnergy(nbar));
    }
    Ok(0.5 * erfc((2.0 * nbar).sqrt()))
}

/// Gain over the SQL in decibels, `10 log10(p_sql / pe)`.
pub fn gain_db(pe: f64, p_sql: f64) -> Result<f64> {
    if !(pe > 0.0 && p_sql > 0.0) {
        return Err(Error::NonPositiveProbability { pe, p_sql });
    }
    Ok(10.0 * (p_sql / pe).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helstrom_examples() {
        let eq = Priors::equal();
        assert_eq!(helstrom_bound(0.0, &eq).unwrap(), 0.5);
        assert_eq!(helstrom_bound(2.0, &Priors::from_p0(1.0).unwrap()).unwrap(), 0.0);
        // 40-digit reference
        let v = helstrom_bound(1.0, &eq).unwrap();
        assert!(((v - 4.600_070_369_588_713e-3) / v).abs() < 1e-13, "{v}");
        assert_eq!(helstrom_bound(-1.0, &eq), Err(Error::NegativeEnergy(-1.0)));
    }

    #[test]
    fn sql_examples() {
        assert_eq!(sql_limit(0.0).unwrap(), 0.5);
        let v = sql_limit(1.0).unwrap();
        assert!(((v - 2.275_013_194_817_920_7e-2) / v).abs() < 1e-12, "{v}");
        assert!(sql_limit(2.0).unwrap() < sql_limit(1.0).unwrap());
        assert!(sql_limit(-0.5).is_err());
    }

    #[test]
    fn gain_examples() {
        let p = 0.013;
        assert_eq!(gain_db(p, p).unwrap(), 0.0);
        assert!((gain_db(p / 10.0, p).unwrap() - 10.0).abs() < 1e-12);
        assert!((gain_db(2.0 * p, p).unwrap() + 3.010_299_956_639_812).abs() < 1e-12);
        assert!(gain_db(0.0, p).is_err());
        assert!(gain_db(p, -1.0).is_err());
    }

    #[test]
    fn helstrom_below_sql_and_decreasing() {
        let eq = Priors::equal();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let nbar = 0.05 * (200f64).powf(i as f64 / 59.0);
            let h = helstrom_bound(nbar, &eq).unwrap();
            assert!(h <= sql_limit(nbar).unwrap());
            assert!(h < prev);
            prev = h;
        }
    }
}
