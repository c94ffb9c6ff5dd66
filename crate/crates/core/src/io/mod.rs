//! On-disk formats: profile CSV files, run directories, JSON reports, and
//! the schema checks every emitted or accepted document goes through.
//!
//! Everything here is pinned to `f64`: the files are an interchange
//! format, not a computation.

mod mmp;
mod profile;
mod run;
mod schema;
mod verify;

pub use mmp::{read_mmp_input, write_schedule};
pub use profile::{read_profile_csv, read_sidecar, write_profile_csv, write_sidecar};
pub use run::{
    read_continuation, read_run, write_continuation, write_run, ContinuationFiles, RunFiles,
};
pub use schema::{validate, validate_against, SchemaName};
pub use verify::{gh_value, report_value};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("document fails {schema} schema at {path}: {detail}")]
    Schema {
        schema: &'static str,
        path: String,
        detail: String,
    },
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Flow(#[from] crate::flow::FlowError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}
