//! Generalized compounding with a tunable growth order.
//!
//! The growth law is `dc/dt = i * c^p`, where `i` is a continuous interest
//! rate and `p` the growth order. `p = 0` is simple (linear) interest,
//! `0 < p < 1` is monomial growth, `p = 1` the ordinary exponential law and
//! `p > 1` hyperbolic growth that diverges at a finite time.
//!
//! The crate is organized by task:
//!
//! * [`kinetics`]: closed-form evaluation, doubling times, rate inversion,
//!   effective principals and blow-up times.
//! * [`integrate`]: an adaptive Dormand–Prince 5(4) integrator used as an
//!   independent oracle for the closed forms, with blow-up detection.
//! * [`competition`]: constant-organization flow-reactor competition between
//!   replicators sharing one growth order.
//! * [`inequality`]: Lorenz curves and Gini indices of account populations
//!   evolved under the growth law.
//! * [`sweep`]: batch evaluation over parameter grids.
//! * [`exec`]: data-parallel batch execution (rayon behind the `parallel`
//!   feature, sequential otherwise).
//!
//! ```
//! use growth_order::kinetics::{GrowthSpec, principal_at};
//!
//! let spec = GrowthSpec::new(1.0, 0.05, 0.5).unwrap();
//! let value = principal_at(&spec, 100.0).finite().unwrap();
//! assert!((value - 12.25).abs() < 1e-12);
//! ```

// Guards are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod competition;
pub mod error;
pub mod exec;
pub mod inequality;
pub mod integrate;
pub mod kinetics;
pub mod sweep;

mod sum;

pub use error::{Error, Result};
pub use exec::Execution;
pub use kinetics::{GrowthSpec, GrowthValue, Regime, Unit};
