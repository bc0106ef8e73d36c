//! Trial-level simulation of the partitioned receiver.
//!
//! Each trial draws the true hypothesis from the priors and walks the
//! segments. The tentative decision starts at H0; segment `i` displaces by
//! the analytic `beta_i*`, which nulls the tentative hypothesis, and draws a
//! Poisson click count whose mean is `mu0` if the truth equals the tentative
//! decision and `mu1` otherwise. Any click flips the tentative decision.
//! The analytic displacements are reused because the cascade priors depend
//! only on the stage index, so a single `beta` sequence is exact for every
//! trial path.
//!
//! Seeding: one base seed is drawn from the caller's generator; trials are
//! split into shards of [`SHARD_TRIALS`], and shard `j` uses
//! `Rng::for_stream(base, j)`. Shard counts are summed in index order, so
//! sequential and parallel runs give bit-identical results.

use crate::cascade::cascade_error;
use crate::error::{Error, Result};
use crate::model::{CascadeResult, DeviceParams, OperatingPoint, Partition, Priors, StageKind};
use crate::numerics::{poisson_sample, Rng};
use crate::odr::mean_counts;
use crate::par::{map_indexed, Execution};

pub const SHARD_TRIALS: u64 = 1 << 16;

/// Empirical error statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    pub std_err: f64,
}

impl McResult {
    fn from_counts(trials: u64, errors: u64) -> Self {
        let p_hat = errors as f64 / trials as f64;
        McResult { trials, errors, p_hat, std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt() }
    }
}

/// Click count of one segment and the tentative decision after it
/// (`false` = H0, `true` = H1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageOutcome {
    pub k_i: u64,
    pub decision_after: bool,
}

#[derive(Debug, Clone, Copy)]
struct StagePlan {
    kind: StageKind,
    mu_nulled: f64,
    mu_other: f64,
}

/// Per-stage click means taken from an analytic cascade trace.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    stages: Vec<StagePlan>,
    p1: f64,
}

/// One simulated trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialTrace {
    pub truth: bool,
    pub stages: Vec<StageOutcome>,
    pub decision: bool,
}

impl TrialPlan {
    pub fn new(trace: &CascadeResult, priors: &Priors, params: &DeviceParams) -> Self {
        let stages = trace
            .stages
            .iter()
            .map(|s| {
                let (mu_nulled, mu_other) = match s.kind {
                    StageKind::Measured => mean_counts(s.alpha_i, s.beta_star, params),
                    _ => (0.0, 0.0),
                };
                StagePlan { kind: s.kind, mu_nulled, mu_other }
            })
            .collect();
        TrialPlan { stages, p1: priors.p1() }
    }

    fn run<S: FnMut(StageOutcome)>(&self, rng: &mut Rng, mut on_stage: S) -> (bool, bool) {
        let truth = rng.next_f64() < self.p1;
        let mut tentative = false;
        for st in &self.stages {
            let k = match st.kind {
                StageKind::NoOp => 0,
                StageKind::Certain => 1,
                StageKind::Measured => {
                    let mu = if truth == tentative { st.mu_nulled } else { st.mu_other };
                    poisson_sample(mu, rng).expect("click means are non-negative")
                }
            };
            if k >= 1 {
                tentative = !tentative;
            }
            on_stage(StageOutcome { k_i: k, decision_after: tentative });
        }
        (truth, tentative)
    }

    /// Simulates one trial and records every stage.
    pub fn simulate_trial(&self, rng: &mut Rng) -> TrialTrace {
        let mut stages = Vec::with_capacity(self.stages.len());
        let (truth, decision) = self.run(rng, |o| stages.push(o));
        TrialTrace { truth, stages, decision }
    }

    fn count_errors(&self, trials: u64, rng: &mut Rng) -> u64 {
        (0..trials)
            .filter(|_| {
                let (truth, decision) = self.run(rng, |_| {});
                truth != decision
            })
            .count() as u64
    }
}

/// Empirical error rate of the receiver over `trials` simulated symbols.
pub fn simulate_cascade(
    partition: &Partition,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
    trials: u64,
    rng: &mut Rng,
) -> Result<McResult> {
    simulate_cascade_with(Execution::default(), partition, op, priors, params, trials, rng)
}

/// [`simulate_cascade`] with an explicit execution mode.
pub fn simulate_cascade_with(
    exec: Execution,
    partition: &Partition,
    op: &OperatingPoint,
    priors: &Priors,
    params: &DeviceParams,
    trials: u64,
    rng: &mut Rng,
) -> Result<McResult> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    let trace = cascade_error(partition, op, priors, params)?;
    let plan = TrialPlan::new(&trace, priors, params);
    let base = rng.next_u64();
    let shards = trials.div_ceil(SHARD_TRIALS);
    let counts = map_indexed(exec, shards as usize, |j| {
        let j = j as u64;
        let n = SHARD_TRIALS.min(trials - j * SHARD_TRIALS);
        plan.count_errors(n, &mut Rng::for_stream(base, j))
    });
    Ok(McResult::from_counts(trials, counts.iter().sum()))
}
