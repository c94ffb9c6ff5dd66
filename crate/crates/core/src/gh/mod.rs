//! Gromov-Hausdorff distance certificates against the limit space.
//!
//! Both spaces are sampled on one shared node set: a subgrid of radial
//! rings crossed with a fixed set of complex line directions, plus the
//! central point. Geodesic distances are approximated on the resulting
//! weighted graph (radial edges between consecutive rings, complete
//! angular edges inside each ring, central edges to the innermost ring),
//! and the identity correspondence turns the two distance matrices into
//! the distortion bound `2 d_GH <= sup |d_X - d_Y|`.

mod directions;
mod graph;
mod series;

pub use directions::{direction_set, DirectionSet};
pub use graph::{MetricGraph, RingChoice};
pub use series::{gh_certificate, gh_distortion, GhOptions, GhReport};
