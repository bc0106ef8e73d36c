//! The partitioned receiver and its partition strategies.
//!
//! Stage `i` measures segment `i` with priors `(p0_i, p1_i)`. Stage 1 uses
//! the hypothesis priors. Afterwards the hypotheses are relabeled as
//! "tentative decision right / wrong", so stage `i >= 2` runs with
//! `p1_i = P_e` of stage `i - 1` and `p0_i = 1 - p1_i`. The receiver error is
//! the error of the last stage.
//!
//! Segments whose fraction is below [`DROP_FRACTION`] measure nothing and
//! pass the previous error through. Because of that rule an `N`-segment
//! search space contains every `(N-1)`-segment receiver.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{
    identical_partition, CascadeResult, DeviceParams, OperatingPoint, Partition, Priors, StageKind,
    StageRecord, DROP_FRACTION,
};
use crate::numerics::{minimize_1d, minimize_simplex, Rng};
use crate::odr::{stage_error, stage_error_warm, StageSolution};

/// Random interior starts added by [`strategy_global`] on top of the three
/// structured ones.
pub const GLOBAL_RANDOM_STARTS: usize = 13;
/// Fraction given to the appended segment when a `(N-1)`-segment solution
/// seeds the `N`-segment search.
pub const PAD_FRACTION: f64 = 1e-10;

/// Partition strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    /// Optimize all fractions jointly.
    Global,
    /// Equal fractions.
    Identical,
    /// Grow one segment at a time: scale the previous solution by `s` and
    /// append `1 - s`, optimizing the single scalar `s`.
    Nested,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Global, Strategy::Identical, Strategy::Nested];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Global => "global",
            Strategy::Identical => "identical",
            Strategy::Nested => "nested",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "global" => Ok(Strategy::Global),
            "identical" => Ok(Strategy::Identical),
            "nested" => Ok(Strategy::Nested),
            other => Err(format!("unknown strategy '{other}' (expected identical, nested or global)")),
        }
    }
}

/// Stage loop shared by every evaluation path. `warm` holds one
/// displacement warm-start slot per stage; pass `None` for a cold solve.
fn run_stages<S>(
    fractions: &[f64],
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
    mut warm: Option<&mut Vec<f64>>,
    mut sink: S,
) -> Result<f64>
where
    S: FnMut(StageRecord),
{
    if let Some(w) = warm.as_deref_mut() {
        w.resize(fractions.len(), f64::NAN);
    }
    let mut stage_priors = *priors;
    let mut pe = priors.p1();
    for (i, &f) in fractions.iter().enumerate() {
        if i > 0 {
            stage_priors = Priors::from_p1(pe)?;
        }
        let alpha_i = op.alpha() * f.sqrt();
        let sol = if f < DROP_FRACTION {
            StageSolution { beta_star: 0.0, pe: stage_priors.p1(), kind: StageKind::NoOp }
        } else {
            match warm.as_deref_mut() {
                Some(w) => stage_error_warm(&stage_priors, alpha_i, params, &mut w[i])?,
                None => stage_error(&stage_priors, alpha_i, params)?,
            }
        };
        pe = sol.pe;
        sink(StageRecord {
            index: i + 1,
            alpha_i,
            p0_i: stage_priors.p0(),
            p1_i: stage_priors.p1(),
            beta_star: sol.beta_star,
            pe_stage: sol.pe,
            kind: sol.kind,
        });
    }
    Ok(pe)
}

/// Error probability of the receiver with the given partition, with the
/// full per-stage trace.
pub fn cascade_error(
    partition: &Partition,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
) -> Result<CascadeResult> {
    let mut stages = Vec::with_capacity(partition.len());
    let p_error = run_stages(partition.fractions(), op, priors, params, None, |r| stages.push(r))?;
    Ok(CascadeResult { stages, p_error })
}

/// Final error only, without building a trace. Same stage loop as
/// [`cascade_error`], so the two agree exactly.
pub fn cascade_p_error(
    fractions: &[f64],
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
) -> Result<f64> {
    run_stages(fractions, op, priors, params, None, |_| {})
}

pub fn strategy_identical(
    n: usize,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
) -> Result<(Partition, CascadeResult)> {
    let partition = identical_partition(n)?;
    let result = cascade_error(&partition, op, priors, params)?;
    Ok((partition, result))
}

/// Wraps a fallible objective for the infallible minimizers: failures score
/// `+inf` and the first one is kept for the caller.
struct Objective<'a> {
    op: &'a OperatingPoint,
    priors: &'a Priors,
    params: &'a DeviceParams,
    warm: Vec<f64>,
    failure: Option<Error>,
}

impl<'a> Objective<'a> {
    fn new(op: &'a OperatingPoint, priors: &'a Priors, params: &'a DeviceParams) -> Self {
        Objective { op, priors, params, warm: Vec::new(), failure: None }
    }

    fn eval(&mut self, fractions: &[f64]) -> f64 {
        match run_stages(fractions, self.op, self.priors, self.params, Some(&mut self.warm), |_| {}) {
            Ok(v) => v,
            Err(e) => {
                self.failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    }

    fn finish(self) -> Result<()> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn nested_extension(prev: &[f64], s: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(prev.iter().map(|f| s * f));
    out.push(1.0 - s);
}

/// Nested solutions for every `N` from 1 to `n`.
pub fn strategy_nested_chain(
    n: usize,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
) -> Result<Vec<(Partition, CascadeResult)>> {
    if n < 1 {
        return Err(Error::InvalidN(n));
    }
    let first = Partition::new(vec![1.0])?;
    let first_result = cascade_error(&first, op, priors, params)?;
    let mut chain = vec![(first, first_result)];
    let mut buf = Vec::with_capacity(n);
    for _ in 2..=n {
        let prev = chain.last().map(|(p, _)| p.fractions().to_vec()).unwrap_or_default();
        let mut objective = Objective::new(op, priors, params);
        let (s, _) = minimize_1d(
            |s| {
                nested_extension(&prev, s, &mut buf);
                objective.eval(&buf)
            },
            0.0,
            1.0,
        );
        objective.finish()?;
        nested_extension(&prev, s, &mut buf);
        let partition = Partition::new(buf.clone())?;
        let result = cascade_error(&partition, op, priors, params)?;
        chain.push((partition, result));
    }
    Ok(chain)
}

pub fn strategy_nested(
    n: usize,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
) -> Result<(Partition, CascadeResult)> {
    let mut chain = strategy_nested_chain(n, op, priors, params)?;
    Ok(chain.pop().expect("chain holds n >= 1 entries"))
}

/// Moves a partition strictly inside the simplex so it can seed the
/// simplex search.
fn interior(fractions: &[f64]) -> Vec<f64> {
    let lifted: Vec<f64> = fractions.iter().map(|f| f.max(PAD_FRACTION)).collect();
    let total: f64 = lifted.iter().sum();
    lifted.into_iter().map(|f| f / total).collect()
}

fn random_interior(dim: usize, rng: &mut Rng) -> Vec<f64> {
    // normalized exponentials: uniform on the simplex
    let e: Vec<f64> = (0..dim).map(|_| rng.next_exp().max(1e-300)).collect();
    interior(&e)
}

/// Globally optimized solutions for every `N` from 1 to `n`.
///
/// Level `k` runs a multistart simplex search seeded with the identical
/// partition, the nested solution, the level `k-1` solution padded with a
/// [`PAD_FRACTION`] segment, and [`GLOBAL_RANDOM_STARTS`] random interior
/// points. The exact identical, nested and zero-padded `k-1` partitions also
/// compete with the search result, so each level is never worse than any of
/// them.
pub fn strategy_global_chain(
    n: usize,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
    rng: &mut Rng,
) -> Result<Vec<(Partition, CascadeResult)>> {
    if n < 1 {
        return Err(Error::InvalidN(n));
    }
    let nested = strategy_nested_chain(n, op, priors, params)?;
    let mut chain = vec![nested[0].clone()];
    for k in 2..=n {
        let (prev, prev_result) = chain.last().cloned().expect("non-empty chain");
        let (identical, identical_result) = strategy_identical(k, op, priors, params)?;
        let (nested_k, nested_result) = nested[k - 1].clone();

        let mut padded_start: Vec<f64> = prev.fractions().iter().map(|f| f * (1.0 - PAD_FRACTION)).collect();
        padded_start.push(PAD_FRACTION);
        let mut starts = vec![
            identical.fractions().to_vec(),
            interior(nested_k.fractions()),
            interior(&padded_start),
        ];
        for _ in 0..GLOBAL_RANDOM_STARTS {
            starts.push(random_interior(k, rng));
        }

        let mut objective = Objective::new(op, priors, params);
        let (x, _) = minimize_simplex(|x| objective.eval(x), k, &starts, rng)?;
        objective.finish()?;
        let searched = Partition::new(x)?;
        let searched_result = cascade_error(&searched, op, priors, params)?;

        let mut padded = prev.fractions().to_vec();
        padded.push(0.0);
        let padded = Partition::new(padded)?;
        let padded_result = cascade_error(&padded, op, priors, params)?;
        debug_assert_eq!(padded_result.p_error, prev_result.p_error);

        let mut best = (searched, searched_result);
        for candidate in [
            (nested_k, nested_result),
            (identical, identical_result),
            (padded, padded_result),
        ] {
            if candidate.1.p_error < best.1.p_error {
                best = candidate;
            }
        }
        chain.push(best);
    }
    Ok(chain)
}

pub fn strategy_global(
    n: usize,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
    rng: &mut Rng,
) -> Result<(Partition, CascadeResult)> {
    let mut chain = strategy_global_chain(n, op, priors, params, rng)?;
    Ok(chain.pop().expect("chain holds n >= 1 entries"))
}

/// Runs `strategy` with `n` segments. `seed` only matters for
/// [`Strategy::Global`].
pub fn run_strategy(
    strategy: Strategy,
    n: usize,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
    seed: u64,
) -> Result<(Partition, CascadeResult)> {
    match strategy {
        Strategy::Identical => strategy_identical(n, op, priors, params),
        Strategy::Nested => strategy_nested(n, op, priors, params),
        Strategy::Global => strategy_global(n, op, priors, params, &mut Rng::new(seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::operating_point_from_nbar;
    use crate::odr;

    fn op(nbar: f64) -> OperatingPoint {
        operating_point_from_nbar(nbar).unwrap()
    }

    #[test]
    fn single_segment_is_the_odr() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        let r = cascade_error(&Partition::new(vec![1.0]).unwrap(), &op(1.0), &eq, &ideal).unwrap();
        let direct = odr::stage_error(&eq, 1.0, &ideal).unwrap();
        assert_eq!(r.p_error, direct.pe);
        assert_eq!(r.stages[0].beta_star, direct.beta_star);
    }

    #[test]
    fn no_signal_no_information() {
        let r = cascade_error(
            &Partition::new(vec![0.5, 0.5]).unwrap(),
            &op(0.0),
            &Priors::equal(),
            &DeviceParams::ideal(),
        )
        .unwrap();
        assert_eq!(r.p_error, 0.5);
        assert!(r.stages.iter().all(|s| s.kind == StageKind::NoOp));
    }

    #[test]
    fn last_stage_is_the_result() {
        let params = DeviceParams::nonideal();
        let p = Partition::new(vec![0.2, 0.5, 0.3]).unwrap();
        let r = cascade_error(&p, &op(1.3), &Priors::from_p0(0.4).unwrap(), &params).unwrap();
        assert_eq!(r.p_error, r.stages.last().unwrap().pe_stage);
        for w in r.stages.windows(2) {
            assert_eq!(w[1].p1_i, w[0].pe_stage);
            assert!((w[1].p0_i + w[1].p1_i - 1.0).abs() <= 1e-12);
            assert!(w[1].p1_i < 0.5);
        }
        let fast = cascade_p_error(p.fractions(), &op(1.3), &Priors::from_p0(0.4).unwrap(), &params).unwrap();
        assert_eq!(fast, r.p_error);
    }

    #[test]
    fn identical_two_composes_stage_errors() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        let (_, r) = strategy_identical(2, &op(0.5), &eq, &ideal).unwrap();
        let a = operating_point_from_nbar(0.5).unwrap().alpha() * 0.5f64.sqrt();
        let first = odr::stage_error(&eq, a, &ideal).unwrap();
        let second = odr::stage_error(&Priors::from_p1(first.pe).unwrap(), a, &ideal).unwrap();
        assert_eq!(r.p_error, second.pe);
    }

    #[test]
    fn many_identical_segments_beat_one() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        let (_, one) = strategy_identical(1, &op(1.0), &eq, &ideal).unwrap();
        let (_, fifteen) = strategy_identical(15, &op(1.0), &eq, &ideal).unwrap();
        assert!(fifteen.p_error < one.p_error);
    }

    #[test]
    fn nested_two_not_worse_than_one() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        let (p, r) = strategy_nested(1, &op(1.0), &eq, &ideal).unwrap();
        assert_eq!(p.fractions(), &[1.0]);
        let (_, r2) = strategy_nested(2, &op(1.0), &eq, &ideal).unwrap();
        assert!(r2.p_error <= r.p_error + 1e-12);
    }

    #[test]
    fn nested_two_matches_dense_grid() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        let o = op(0.5);
        let dense = (1..10_000)
            .map(|j| {
                let s = j as f64 / 10_000.0;
                cascade_p_error(&[s, 1.0 - s], &o, &eq, &ideal).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        let (_, r) = strategy_nested(2, &o, &eq, &ideal).unwrap();
        assert!((r.p_error - dense).abs() <= 1e-6);
        assert!(r.p_error <= dense + 1e-12);
    }

    #[test]
    fn global_one_is_the_odr() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        let (p, r) = strategy_global(1, &op(1.0), &eq, &ideal, &mut Rng::new(0)).unwrap();
        assert_eq!(p.fractions(), &[1.0]);
        assert_eq!(r.p_error, odr::stage_error(&eq, 1.0, &ideal).unwrap().pe);
    }

    #[test]
    fn invalid_segment_counts() {
        let eq = Priors::equal();
        let ideal = DeviceParams::ideal();
        assert_eq!(strategy_identical(0, &op(1.0), &eq, &ideal).unwrap_err(), Error::InvalidN(0));
        assert_eq!(strategy_nested(0, &op(1.0), &eq, &ideal).unwrap_err(), Error::InvalidN(0));
        assert_eq!(
            strategy_global(0, &op(1.0), &eq, &ideal, &mut Rng::new(0)).unwrap_err(),
            Error::InvalidN(0)
        );
    }

    #[test]
    fn order_matters_somewhere() {
        let eq = Priors::equal();
        let params = DeviceParams::nonideal();
        let p = Partition::new(vec![0.1, 0.9]).unwrap();
        let fwd = cascade_error(&p, &op(1.0), &eq, &params).unwrap().p_error;
        let rev = cascade_error(&p.reversed(), &op(1.0), &eq, &params).unwrap().p_error;
        assert!((fwd - rev).abs() > 1e-6, "{fwd} vs {rev}");
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("greedy".parse::<Strategy>().is_err());
    }
}
