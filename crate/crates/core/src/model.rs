//! Domain types shared across the crate.
//!
//! All amplitudes are real and non-negative. Under constant-intensity local
//! oscillators a segment's share of the symbol energy equals its share of
//! the symbol time, so a partition is stored as fractions `f_i = t_i / T`
//! and segment `i` carries amplitude `alpha * sqrt(f_i)`.
//!
//! The dark-count mean `nu` is charged once per segment measurement and
//! does not scale with segment duration.

use crate::error::{Error, Result};

/// Segments with a fraction below this perform no measurement.
pub const DROP_FRACTION: f64 = 1e-9;

/// Non-ideal device parameters entering every segment measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    eta: f64,
    nu: f64,
    tau: f64,
    xi: f64,
}

impl DeviceParams {
    /// `eta`: detector quantum efficiency, `nu`: dark-count mean per segment,
    /// `tau`: beam-splitter transmittance, `xi`: mode-match factor.
    pub fn new(eta: f64, nu: f64, tau: f64, xi: f64) -> Result<Self> {
        let unit = |name, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidDevice { name, value: v })
            }
        };
        unit("eta", eta)?;
        unit("tau", tau)?;
        unit("xi", xi)?;
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidDevice { name: "nu", value: nu });
        }
        Ok(DeviceParams { eta, nu, tau, xi })
    }

    /// Perfect devices: `eta = 1, nu = 0, tau = 1, xi = 1`.
    pub fn ideal() -> Self {
        DeviceParams { eta: 1.0, nu: 0.0, tau: 1.0, xi: 1.0 }
    }

    /// The non-ideal reference set: `eta = 0.9, nu = 0.001, tau = 0.99, xi = 0.995`.
    pub fn nonideal() -> Self {
        DeviceParams { eta: 0.9, nu: 0.001, tau: 0.99, xi: 0.995 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Hypothesis probabilities. `p0` belongs to H0 (signal `-alpha`), `p1` to H1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    p0: f64,
    p1: f64,
}

impl Priors {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&p0) && (0.0..=1.0).contains(&p1) && (p0 + p1 - 1.0).abs() <= 1e-12;
        if ok {
            Ok(Priors { p0, p1 })
        } else {
            Err(Error::InvalidPriors { p0, p1 })
        }
    }

    /// Priors `(p0, 1 - p0)`.
    pub fn from_p0(p0: f64) -> Result<Self> {
        Priors::new(p0, 1.0 - p0)
    }

    /// Priors `(1 - p1, p1)`; used for the per-stage update where `p1` is the
    /// accumulated error probability.
    pub fn from_p1(p1: f64) -> Result<Self> {
        Priors::new(1.0 - p1, p1)
    }

    pub fn equal() -> Self {
        Priors { p0: 0.5, p1: 0.5 }
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }
}

/// Signal energy `nbar = |alpha|^2` and the real amplitude `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    nbar: f64,
    alpha: f64,
}

impl OperatingPoint {
    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn operating_point_from_nbar(nbar: f64) -> Result<OperatingPoint> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::NegativeEnergy(nbar));
    }
    Ok(OperatingPoint { nbar, alpha: nbar.sqrt() })
}

/// Ordered segment fractions summing to one. Order matters: the cascade is
/// not invariant under permutation of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    fractions: Vec<f64>,
}

impl Partition {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::InvalidPartition("no segments".into()));
        }
        if let Some(f) = fractions.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
            return Err(Error::InvalidPartition(format!("fraction {f} is not a finite non-negative number")));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidPartition(format!("fractions sum to {total}")));
        }
        Ok(Partition { fractions })
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// Fractions in reverse segment order.
    pub fn reversed(&self) -> Partition {
        Partition { fractions: self.fractions.iter().rev().copied().collect() }
    }
}

pub fn identical_partition(n: usize) -> Result<Partition> {
    if n < 1 {
        return Err(Error::InvalidN(n));
    }
    Ok(Partition { fractions: vec![1.0 / n as f64; n] })
}

/// How a stage was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    /// Displacement solved and a click measurement performed.
    Measured,
    /// Segment below the drop threshold (or no remaining doubt): nothing is
    /// measured and the priors pass through.
    NoOp,
    /// `p0 = 0` for the stage: the displacement diverges and the click is
    /// certain, which flips the tentative decision with no error.
    Certain,
}

/// One segment of a cascade evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord {
    /// 1-based stage number.
    pub index: usize,
    pub alpha_i: f64,
    pub p0_i: f64,
    pub p1_i: f64,
    /// Solved displacement; 0 for no-op stages, +inf for certain stages.
    pub beta_star: f64,
    pub pe_stage: f64,
    pub kind: StageKind,
}

/// Per-stage trace and final error probability of a cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    pub stages: Vec<StageRecord>,
    pub p_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_partitions() {
        assert_eq!(identical_partition(1).unwrap().fractions(), &[1.0]);
        assert_eq!(identical_partition(4).unwrap().fractions(), &[0.25; 4]);
        assert_eq!(identical_partition(0), Err(Error::InvalidN(0)));
    }

    #[test]
    fn operating_points() {
        let op = operating_point_from_nbar(0.0).unwrap();
        assert_eq!((op.nbar(), op.alpha()), (0.0, 0.0));
        let op = operating_point_from_nbar(1.0).unwrap();
        assert_eq!((op.nbar(), op.alpha()), (1.0, 1.0));
        let op = operating_point_from_nbar(4.0).unwrap();
        assert_eq!((op.nbar(), op.alpha()), (4.0, 2.0));
        assert_eq!(operating_point_from_nbar(-0.1), Err(Error::NegativeEnergy(-0.1)));
        let op = operating_point_from_nbar(0.37).unwrap();
        assert!((op.alpha() * op.alpha() - 0.37).abs() <= 1e-12);
    }

    #[test]
    fn device_validation() {
        assert!(DeviceParams::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(DeviceParams::new(1.1, 0.0, 1.0, 1.0).is_err());
        assert!(DeviceParams::new(1.0, -1e-3, 1.0, 1.0).is_err());
        assert!(DeviceParams::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(DeviceParams::new(1.0, 0.0, 1.0, 1.5).is_err());
        assert_eq!(DeviceParams::new(1.0, 0.0, 1.0, 1.0).unwrap(), DeviceParams::ideal());
        assert_eq!(DeviceParams::new(0.9, 0.001, 0.99, 0.995).unwrap(), DeviceParams::nonideal());
    }

    #[test]
    fn priors_validation() {
        assert!(Priors::new(0.6, 0.6).is_err());
        assert!(Priors::new(-0.1, 1.1).is_err());
        assert!(Priors::from_p0(0.3).is_ok());
        assert_eq!(Priors::from_p0(0.5).unwrap(), Priors::equal());
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![0.5, 0.6]).is_err());
        assert!(Partition::new(vec![-0.1, 1.1]).is_err());
        assert!(Partition::new(vec![0.0, 1.0]).is_ok());
        let p = Partition::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(p.reversed().fractions(), &[0.8, 0.2]);
    }
}
