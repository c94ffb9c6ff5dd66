//! Run directories. A flow run lands as
//!
//! ```text
//! out/
//!   run.json
//!   snapshots/snap_0000.csv     one pair per retained snapshot
//!   snapshots/snap_0000.json
//! ```
//!
//! and a continuation as `continuation.json` plus a `merged/` snapshot set
//! holding the finest-ladder trajectory. Paths inside the JSON documents
//! are relative to the directory the document sits in, so a run directory
//! can be moved or archived whole.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::profile::{read_profile_csv, write_profile_csv, write_sidecar};
use super::schema::{validate_against, SchemaName};
use super::IoError;
use crate::estimates::volume_extinction_estimate;
use crate::flow::{
    Continuation, FlowParams, FlowState, Side, TerminalReason, Trajectory, CAUCHY_WINDOW_FRACTION,
    CONTINUATION_CAUCHY_TOL, LIMIT_WINDOW_RHO_MIN,
};

pub struct RunFiles {
    pub run_json: PathBuf,
    pub snapshot_count: usize,
}

pub struct ContinuationFiles {
    pub continuation_json: PathBuf,
    pub snapshot_count: usize,
    pub t_y_extrapolated: Option<f64>,
}

fn params_value(params: &FlowParams<f64>) -> Value {
    json!({
        "n": params.n,
        "a0": params.a0,
        "b0": params.b0,
        "n_cells": params.n_cells,
        "dt_safety": params.dt_safety,
        "eps_stop": params.eps_stop,
        "snapshot_dt": params.snapshot_dt,
        "continuation_eps": params.continuation_eps,
    })
}

fn params_from_value(doc: &Value) -> FlowParams<f64> {
    FlowParams {
        n: doc["n"].as_u64().expect("validated") as u32,
        a0: doc["a0"].as_f64().expect("validated"),
        b0: doc["b0"].as_f64().expect("validated"),
        n_cells: doc["n_cells"].as_u64().expect("validated") as usize,
        dt_safety: doc["dt_safety"].as_f64().expect("validated"),
        eps_stop: doc["eps_stop"].as_f64().expect("validated"),
        snapshot_dt: doc["snapshot_dt"].as_f64().expect("validated"),
        continuation_eps: doc["continuation_eps"]
            .as_array()
            .expect("validated")
            .iter()
            .map(|v| v.as_f64().expect("validated"))
            .collect(),
    }
}

fn write_snapshot_set(
    dir: &Path,
    subdir: &str,
    n: u32,
    snapshots: &[FlowState<f64>],
) -> Result<Vec<Value>, IoError> {
    let snap_dir = dir.join(subdir);
    fs::create_dir_all(&snap_dir)?;
    let mut entries = Vec::with_capacity(snapshots.len());
    for (i, state) in snapshots.iter().enumerate() {
        let stem = format!("snap_{i:04}");
        let csv_rel = format!("{subdir}/{stem}.csv");
        let json_rel = format!("{subdir}/{stem}.json");
        write_profile_csv(&dir.join(&csv_rel), &state.profile)?;
        write_sidecar(&dir.join(&json_rel), state.t, n, &state.profile)?;
        entries.push(json!({"t": state.t, "csv": csv_rel, "json": json_rel}));
    }
    Ok(entries)
}

fn read_snapshot_set(dir: &Path, entries: &[Value], side: Side) -> Result<Vec<FlowState<f64>>, IoError> {
    let mut snapshots = Vec::with_capacity(entries.len());
    for entry in entries {
        let csv = dir.join(entry["csv"].as_str().expect("validated"));
        let sidecar = dir.join(entry["json"].as_str().expect("validated"));
        let (t, _, profile) = read_profile_csv(&csv, &sidecar)?;
        let listed = entry["t"].as_f64().expect("validated");
        if t != listed {
            return Err(IoError::BadInput(format!(
                "snapshot {} carries t = {t}, index lists {listed}",
                csv.display()
            )));
        }
        snapshots.push(FlowState { t, side, profile });
    }
    Ok(snapshots)
}

/// Writes a trajectory under `dir`, replacing any run already there.
pub fn write_run(
    dir: &Path,
    params: &FlowParams<f64>,
    traj: &Trajectory<f64>,
) -> Result<RunFiles, IoError> {
    fs::create_dir_all(dir)?;
    let side = traj
        .snapshots
        .first()
        .map_or(Side::BeforeT, |s| s.side);
    let entries = write_snapshot_set(dir, "snapshots", params.n, &traj.snapshots)?;
    let doc = json!({
        "params": params_value(params),
        "side": side.as_str(),
        "snapshots": entries,
        "singular_time_estimate": traj.singular_time_estimate,
        "min_phi_extrapolation": traj.min_phi_extrapolation,
        "terminal_reason": traj.terminal_reason.as_str(),
    });
    validate_against(&doc, SchemaName::Run)?;
    let run_json = dir.join("run.json");
    fs::write(&run_json, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(RunFiles {
        run_json,
        snapshot_count: traj.snapshots.len(),
    })
}

/// Loads a run directory back into memory.
pub fn read_run(dir: &Path) -> Result<(FlowParams<f64>, Trajectory<f64>), IoError> {
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.join("run.json"))?)?;
    validate_against(&doc, SchemaName::Run)?;
    let params = params_from_value(&doc["params"]);
    let side = Side::parse(doc["side"].as_str().expect("validated")).expect("validated");
    let snapshots = read_snapshot_set(dir, doc["snapshots"].as_array().expect("validated"), side)?;
    let reason = TerminalReason::parse(doc["terminal_reason"].as_str().expect("validated"))
        .expect("validated");
    Ok((
        params,
        Trajectory {
            snapshots,
            singular_time_estimate: doc["singular_time_estimate"].as_f64(),
            min_phi_extrapolation: doc["min_phi_extrapolation"].as_f64(),
            terminal_reason: reason,
        },
    ))
}

/// Writes a continuation under `dir`: the Cauchy ladder summary, the
/// connection sups against the incoming limit, the merged trajectory, and
/// the extinction time the merged volume extrapolates to.
pub fn write_continuation(
    dir: &Path,
    params: &FlowParams<f64>,
    cont: &Continuation<f64>,
) -> Result<ContinuationFiles, IoError> {
    fs::create_dir_all(dir)?;
    let entries = write_snapshot_set(dir, "merged", params.n, &cont.merged.snapshots)?;
    let pairs: Vec<Value> = cont
        .cauchy
        .iter()
        .map(|p| json!({"eps_coarse": p.eps_coarse, "eps_fine": p.eps_fine, "sup": p.sup}))
        .collect();
    let pass = cont
        .cauchy
        .iter()
        .all(|p| p.sup <= CONTINUATION_CAUCHY_TOL);
    let t_start = params.t_singular();
    let window_start = t_start + (cont.t_prime - t_start) * CAUCHY_WINDOW_FRACTION;
    let t_y = volume_extinction_estimate(params.n, &cont.merged);
    let doc = json!({
        "eps_list": params.continuation_eps,
        "cauchy": {
            "pairs": pairs,
            "pass": pass,
            "tolerance": CONTINUATION_CAUCHY_TOL,
            "window": {"t_min": window_start, "rho_min": LIMIT_WINDOW_RHO_MIN},
        },
        "connection": cont.connection.iter().map(|&(d, s)| json!([d, s])).collect::<Vec<_>>(),
        "merged": {
            "snapshots": entries,
            "terminal_reason": cont.merged.terminal_reason.as_str(),
        },
        "t_prime": cont.t_prime,
        "t_y_extrapolated": t_y,
    });
    validate_against(&doc, SchemaName::Continuation)?;
    let continuation_json = dir.join("continuation.json");
    fs::write(
        &continuation_json,
        serde_json::to_string_pretty(&doc)? + "\n",
    )?;
    Ok(ContinuationFiles {
        continuation_json,
        snapshot_count: cont.merged.snapshots.len(),
        t_y_extrapolated: t_y,
    })
}

/// Loads the merged trajectory of a written continuation. The ladder runs
/// are not stored; only the accepted result ships.
pub fn read_continuation(dir: &Path) -> Result<(Trajectory<f64>, f64, Option<f64>), IoError> {
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(dir.join("continuation.json"))?)?;
    validate_against(&doc, SchemaName::Continuation)?;
    let snapshots = read_snapshot_set(
        dir,
        doc["merged"]["snapshots"].as_array().expect("validated"),
        Side::AfterT,
    )?;
    let reason =
        TerminalReason::parse(doc["merged"]["terminal_reason"].as_str().expect("validated"))
            .expect("validated");
    let merged = Trajectory {
        snapshots,
        singular_time_estimate: None,
        min_phi_extrapolation: None,
        terminal_reason: reason,
    };
    Ok((
        merged,
        doc["t_prime"].as_f64().expect("validated"),
        doc["t_y_extrapolated"].as_f64(),
    ))
}
