//! Self-contained numerical kernel.

mod minimize;
mod poisson;
mod rng;
mod roots;
mod special;

pub use minimize::{
    minimize_1d, minimize_simplex, simplex_from_unconstrained, unconstrained_from_simplex,
    GOLDEN_TOL, MIN_GRID_POINTS, NM_MAX_ITER, NM_VALUE_TOL,
};
pub use poisson::poisson_sample;
pub use rng::Rng;
pub use roots::{find_root_increasing, find_root_increasing_with_exit, find_root_monotone, Bracket};
pub use special::{erfc, ln_factorial};
