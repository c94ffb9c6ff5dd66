//! Laboratory for contraction-type singularities of rotationally symmetric
//! Kähler-Ricci flow.
//!
//! Four layers, exercised end to end by the `krf` binary:
//!
//! * [`lattice`]: exact-rational surface intersection theory; nef
//!   thresholds, divisorial contractions, and full surgery schedules.
//! * [`geometry`] / [`constants`]: radial profiles `phi(rho)` on a cell
//!   grid, with the quadratures (volume, radial length, sphere diameter)
//!   pinned to one normalization.
//! * [`flow`]: the reduced parabolic equation for `phi`, an explicit
//!   midpoint integrator through the contraction time, and regularized
//!   continuation on the blown-down space.
//! * [`estimates`] / [`gh`]: monitor suites for the a-priori bounds along a
//!   run, and Gromov-Hausdorff distance certificates against the limit
//!   space.

pub mod constants;
pub mod estimates;
pub mod flow;
pub mod geometry;
pub mod gh;
pub mod io;
pub mod lattice;
pub mod pipeline;
pub mod scalar;

pub use scalar::Real;
