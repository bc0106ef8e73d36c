//! Partitioned-interval detection receiver for binary coherent states.
//!
//! The symbol interval is split into segments; each segment runs an optimal
//! displacement measurement whose click/no-click outcome updates the priors
//! handed to the next segment. Device imperfections (detector efficiency,
//! dark counts, beam-splitter transmittance, mode matching) enter every
//! segment's success probability.
//!
//! Modules:
//!
//! * [`numerics`]: special functions, root finding, 1-D and simplex
//!   minimizers, a seedable PRNG and Poisson sampling.
//! * [`model`]: device parameters, priors, partitions and result records.
//! * [`odr`]: the single-segment optimal displacement receiver.
//! * [`cascade`]: the segment cascade and the three partition strategies.
//! * [`bounds`]: Helstrom bound, standard quantum limit and gain over it.
//! * [`montecarlo`]: trial-level Poisson simulation of the cascade.
//! * [`cli`]: the `partrx` command-line front end and its CSV formats.

pub mod bounds;
pub mod cascade;
pub mod cli;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod odr;
pub mod par;

pub use cascade::{
    cascade_error, cascade_p_error, strategy_global, strategy_global_chain, strategy_identical,
    strategy_nested, strategy_nested_chain, Strategy,
};
pub use error::{Error, Result};
pub use model::{
    identical_partition, operating_point_from_nbar, CascadeResult, DeviceParams, OperatingPoint,
    Partition, Priors, StageKind, StageRecord,
};
pub use montecarlo::{simulate_cascade, McResult, StageOutcome};
pub use numerics::Rng;
