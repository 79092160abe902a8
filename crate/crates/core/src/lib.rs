//! Simulation toolkit for long-range percolation and contact processes
//! whose vertices carry random ranges.
//!
//! * [`distributions`]: laws of the range variable `N`.
//! * [`cpdr`]: exact event-driven contact process with dynamical range.
//! * [`aprr`]: oriented anisotropic percolation with random range.
//! * [`oned`]: the one-dimensional front recursion and its analytics.
//! * [`bounds`]: closed-form bound calculators.
//! * [`harness`]: seeds, parallel runs, configs and output files.

pub mod aprr;
pub mod bounds;
pub mod cpdr;
pub mod distributions;
pub mod harness;
pub mod oned;
pub mod rng;

pub use distributions::RangeDistribution;
pub use rng::Rng;
