//! Loss probabilities of the finite-capacity M/G/1/N queue with exhaustive
//! service and multiple vacations.
//!
//! The crate computes the exact loss probability from the embedded chain at
//! departure epochs, the invariant measure of the infinite-buffer chain, and
//! the closed-form asymptotic rates of the loss probability as the capacity
//! grows, in each traffic regime. The standard M/G/1/N queue is the special
//! case of a zero vacation, and the GI/M/1/N queue is handled through its
//! M/G/1 dual. A discrete-event simulator gives an independent check.
//!
//! Everything here is `no_std` with `alloc`. File formats, the command-line
//! front end and parallel sweeps live in the `qla` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// Negated comparisons reject NaN; index loops follow the recurrences.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod chains;
pub mod distributions;
mod error;
pub mod kernel;
#[cfg(test)]
mod properties;
pub mod quadrature;
pub mod real;
pub mod roots;
pub mod simulator;
pub mod special;

pub use asymptotics::{AsymptoticEstimate, Regime};
pub use chains::{InvariantSolution, Normalization, QueueModel};
pub use distributions::{Distribution, Family, SingularityDescriptor};
pub use error::{Error, Result};
pub use kernel::CountKernel;
pub use real::{HighPrecision, Real, Wide};
pub use simulator::{LossEstimate, SimConfig};
