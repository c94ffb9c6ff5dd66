//! JSON views of the monitor report and the convergence certificate.
//! Pure value builders; the callers decide where the documents land.

use serde_json::{json, Value};

use crate::estimates::Report;
use crate::gh::GhReport;
use crate::scalar::Real;

use super::schema::{validate_against, SchemaName};
use super::IoError;

fn pairs<F: Real>(values: &[(F, F)]) -> Vec<Value> {
    values
        .iter()
        .map(|&(x, y)| json!([x.to_f64c(), y.to_f64c()]))
        .collect()
}

/// Renders a monitor report; the returned document already passed the
/// shipped schema.
pub fn report_value<F: Real>(report: &Report<F>) -> Result<Value, IoError> {
    let monitors: Vec<Value> = report
        .monitors
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "statement": m.statement,
                "side": m.side.as_str(),
                "values": pairs(&m.values),
                "run_min": m.run_min.to_f64c(),
                "run_max": m.run_max.to_f64c(),
                "run_median": m.run_median.to_f64c(),
                "verdict": m.verdict.as_str(),
                "skip_reason": m.skip_reason,
            })
        })
        .collect();
    let class_fits: Vec<Value> = report
        .class_fits
        .iter()
        .map(|f| {
            json!({
                "name": f.name,
                "slope": f.slope,
                "intercept": f.intercept,
                "expected_slope": f.expected_slope,
                "window": [f.window.0, f.window.1],
                "samples": f.samples,
            })
        })
        .collect();
    let diameter_fit = report.diameter_fit.as_ref().map(|f| {
        json!({
            "exponent": f.exponent,
            "cube_root_constant": f.cube_root_constant,
            "window": [f.window.0, f.window.1],
            "samples": f.samples,
            "verdict": f.verdict.as_str(),
        })
    });
    let delta_sweep: Vec<Value> = report
        .delta_sweep
        .iter()
        .map(|e| {
            json!({
                "delta": e.delta,
                "run_max": e.run_max,
                "run_median": e.run_median,
                "pass": e.pass,
            })
        })
        .collect();
    let absorbed: Vec<Value> = report
        .absorbed
        .iter()
        .map(|a| json!({"name": a.name, "value": a.value, "context": a.context}))
        .collect();
    let doc = json!({
        "ratio_threshold": report.ratio_threshold,
        "delta": report.delta,
        "alpha": report.alpha,
        "monitors": monitors,
        "class_fits": class_fits,
        "diameter_fit": diameter_fit,
        "delta_sweep": delta_sweep,
        "smallest_passing_delta": report.smallest_passing_delta(),
        "absorbed": absorbed,
        "all_pass": report.all_pass(),
    });
    validate_against(&doc, SchemaName::Report)?;
    Ok(doc)
}

/// Renders a convergence certificate; the returned document already passed
/// the shipped schema.
pub fn gh_value<F: Real>(report: &GhReport<F>) -> Result<Value, IoError> {
    let doc = json!({
        "directions": report.directions,
        "rings": report.rings,
        "seed": report.seed,
        "rho_nodes": report.rho_nodes.iter().map(|r| r.to_f64c()).collect::<Vec<_>>(),
        "diam_limit": report.diam_limit.to_f64c(),
        "mesh": report.mesh.to_f64c(),
        "before": pairs(&report.before),
        "after": pairs(&report.after),
        "monotone_before": report.monotone_before,
        "monotone_after": report.monotone_after,
        "jitter_tolerance": report.jitter_tolerance,
        "final_before": report.final_before.to_f64c(),
        "final_after": report.final_after.to_f64c(),
        "threshold": report.threshold.to_f64c(),
        "verdict": report.verdict.as_str(),
    });
    validate_against(&doc, SchemaName::Gh)?;
    Ok(doc)
}
