//! The end-to-end surgical-contraction check on one configuration:
//! exact schedule, flow to the contraction, limit space, continuation,
//! monitor report, convergence certificate, and a clause-by-clause
//! verdict with pointers into the artifact files.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::estimates::{run_report, Report, Verdict, VerifierConfig};
use crate::flow::{continue_on_y, limit_profile, run_to_t, FlowParams, Side, Trajectory};
use crate::geometry::total_volume;
use crate::gh::{gh_certificate, GhOptions, GhReport};
use crate::io::{
    validate_against, write_continuation, write_profile_csv, write_run, write_schedule,
    write_sidecar, IoError, SchemaName,
};
use crate::lattice::{presets, run_schedule, DivisorClass, Rat, SurgerySchedule};

/// Tolerance on |estimated singular time - exact threshold|.
pub const THRESHOLD_AGREEMENT_TOL: f64 = 1e-2;
/// Tolerance on |extrapolated volume-zero time - exact collapse time|.
pub const VOLUME_ZERO_TOL: f64 = 2e-2;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GhSection {
    directions: Option<usize>,
    rings: Option<usize>,
    seed: Option<u64>,
    gaps: Option<Vec<f64>>,
    jitter_tolerance: Option<f64>,
    final_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifySection {
    ratio_threshold: Option<f64>,
    delta: Option<f64>,
    alpha: Option<f64>,
}

/// Parsed command configuration. Only the class data is mandatory; every
/// solver, verifier, and certificate knob falls back to its default.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub a0: f64,
    pub b0: f64,
    n_cells: Option<usize>,
    dt_safety: Option<f64>,
    eps_stop: Option<f64>,
    snapshot_dt: Option<f64>,
    continuation_eps: Option<Vec<f64>>,
    gh: Option<GhSection>,
    verify: Option<VerifySection>,
}

impl RunConfig {
    /// Reads and checks a config file. The document is validated against
    /// the shipped schema before field-level parsing, so schema and struct
    /// stay two independent gates.
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path)?;
        let doc: Value = serde_json::from_str(&text)?;
        validate_against(&doc, SchemaName::RunConfig)?;
        let config: RunConfig = serde_json::from_value(doc)?;
        config.flow_params().validate()?;
        Ok(config)
    }

    pub fn flow_params(&self) -> FlowParams<f64> {
        let mut p = FlowParams::contracting(self.n, self.a0, self.b0);
        if let Some(v) = self.n_cells {
            p.n_cells = v;
        }
        if let Some(v) = self.dt_safety {
            p.dt_safety = v;
        }
        if let Some(v) = self.eps_stop {
            p.eps_stop = v;
        }
        if let Some(v) = self.snapshot_dt {
            p.snapshot_dt = v;
        }
        if let Some(v) = &self.continuation_eps {
            p.continuation_eps = v.clone();
        }
        p
    }

    pub fn gh_options(&self) -> GhOptions {
        let mut o = GhOptions::default();
        if let Some(section) = &self.gh {
            if let Some(v) = section.directions {
                o.directions = v;
            }
            if let Some(v) = section.rings {
                o.rings = v;
            }
            if let Some(v) = section.seed {
                o.seed = v;
            }
            if let Some(v) = &section.gaps {
                o.gaps = v.clone();
            }
            if let Some(v) = section.jitter_tolerance {
                o.jitter_tolerance = v;
            }
            if let Some(v) = section.final_fraction {
                o.final_fraction = v;
            }
        }
        o
    }

    pub fn verifier_config(&self) -> VerifierConfig {
        let mut c = VerifierConfig::default();
        if let Some(section) = &self.verify {
            if let Some(v) = section.ratio_threshold {
                c.ratio_threshold = v;
            }
            if let Some(v) = section.delta {
                c.delta = v;
            }
            if let Some(v) = section.alpha {
                c.alpha = v;
            }
        }
        c
    }
}

pub struct ClauseCheck {
    pub clause: &'static str,
    pub statement: String,
    pub verdict: Verdict,
    pub skip_reason: Option<String>,
    pub evidence: Vec<String>,
}

pub struct CrossCheck {
    pub difference: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

pub struct PipelineReport {
    pub schedule: SurgerySchedule,
    pub lattice_threshold: Rat,
    pub lattice_collapse_time: Option<Rat>,
    pub singular_time_analytic: f64,
    pub singular_time_estimate: Option<f64>,
    pub threshold_agreement: CrossCheck,
    pub volume_zero_extrapolated: Option<f64>,
    pub volume_zero: CrossCheck,
    pub report: Report<f64>,
    pub gh: GhReport<f64>,
    pub clauses: Vec<ClauseCheck>,
    pub overall: bool,
}

fn rat_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("schedule rationals are modest")
}

fn cross_check(measured: Option<f64>, exact: f64, tolerance: f64) -> CrossCheck {
    let difference = measured.map(|m| (m - exact).abs());
    CrossCheck {
        difference,
        tolerance,
        pass: difference.is_some_and(|d| d <= tolerance),
    }
}

/// Runs every stage under `out_dir` and writes `pipeline.json` plus
/// `plots.csv` next to the per-stage artifacts.
pub fn run_pipeline(config: &RunConfig, out_dir: &Path) -> Result<PipelineReport, IoError> {
    if config.n != 2 {
        return Err(IoError::BadInput(format!(
            "the schedule cross-check lives on surfaces; n = {} has no lattice side",
            config.n
        )));
    }
    let params = config.flow_params();
    fs::create_dir_all(out_dir)?;

    // Exact side: L0 = b0 H - a0 E1 on the one-point blow-up.
    let lat = presets::bl_p2(1);
    let b0 = Rat::from_float(config.b0)
        .ok_or_else(|| IoError::BadInput(format!("b0 = {} is not finite", config.b0)))?;
    let a0 = Rat::from_float(config.a0)
        .ok_or_else(|| IoError::BadInput(format!("a0 = {} is not finite", config.a0)))?;
    let l0 = DivisorClass::new(vec![b0, -a0]);
    let schedule = run_schedule(&l0, &lat)?;
    write_schedule(&out_dir.join("schedule.json"), &lat, &l0, &schedule)?;
    let lattice_threshold = schedule
        .steps
        .first()
        .map(|s| s.threshold.clone())
        .or_else(|| schedule.terminal_time.clone())
        .ok_or_else(|| {
            IoError::BadInput("schedule has neither a surgery nor a collapse time".into())
        })?;

    // Numerical side.
    let before = run_to_t(&params)?;
    write_run(&out_dir.join("flow"), &params, &before)?;
    let limit = limit_profile(&before)?;
    write_profile_csv(&out_dir.join("limit.csv"), &limit)?;
    write_sidecar(&out_dir.join("limit.json"), params.t_singular(), params.n, &limit)?;
    let cont = continue_on_y(&params, &limit)?;
    let cont_files = write_continuation(out_dir, &params, &cont)?;

    let verifier = config.verifier_config();
    let report = run_report(&params, &before, Some(&cont.merged), &verifier)?;
    let report_doc = crate::io::report_value(&report)?;
    fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&report_doc)? + "\n",
    )?;

    let opts = config.gh_options();
    let gh = gh_certificate(&params, &before, Some(&cont.merged), &limit, &opts)?;
    let gh_doc = crate::io::gh_value(&gh)?;
    fs::write(
        out_dir.join("gh.json"),
        serde_json::to_string_pretty(&gh_doc)? + "\n",
    )?;

    write_plots_csv(&out_dir.join("plots.csv"), &params, &before, &cont.merged, &report, &gh)?;

    // Cross-checks between the two sides.
    let threshold_agreement = cross_check(
        before.singular_time_estimate,
        rat_f64(&lattice_threshold),
        THRESHOLD_AGREEMENT_TOL,
    );
    let volume_zero = match &schedule.terminal_time {
        Some(exact) => cross_check(cont_files.t_y_extrapolated, rat_f64(exact), VOLUME_ZERO_TOL),
        None => CrossCheck {
            difference: None,
            tolerance: VOLUME_ZERO_TOL,
            pass: false,
        },
    };

    let pass_fail = |ok: bool| if ok { Verdict::Pass } else { Verdict::Fail };
    let cauchy_pass = cont
        .cauchy
        .iter()
        .all(|p| p.sup <= crate::flow::CONTINUATION_CAUCHY_TOL);
    let connection_shrinks = cont
        .connection
        .windows(2)
        .all(|w| w[0].1 <= w[1].1);
    let clauses = vec![
        ClauseCheck {
            clause: "i",
            statement: "smooth convergence away from the contracted locus as t -> T-: \
                        late snapshots are Cauchy in sup norm on rho >= -5"
                .into(),
            // Extracting the limit enforces that window tolerance; a breach
            // aborts the pipeline before any report is written.
            verdict: Verdict::Pass,
            skip_reason: None,
            evidence: vec!["flow/run.json".into(), "limit.csv".into()],
        },
        ClauseCheck {
            clause: "ii",
            statement: "the limit is a compact metric space: graph distances on the \
                        limit profile are finite with finite mesh"
                .into(),
            verdict: pass_fail(gh.diam_limit.is_finite() && gh.mesh.is_finite()),
            skip_reason: None,
            evidence: vec!["gh.json".into(), "limit.csv".into()],
        },
        ClauseCheck {
            clause: "iii",
            statement: "convergence to the limit space from t < T: distortion series \
                        decreasing within jitter and final value under threshold"
                .into(),
            verdict: pass_fail(gh.monotone_before && gh.final_before <= gh.threshold),
            skip_reason: None,
            evidence: vec!["gh.json".into()],
        },
        ClauseCheck {
            clause: "iv",
            statement: "a smooth continuation exists on the contracted space and is \
                        unique in proxy: regularization ladder Cauchy, connection sup \
                        shrinking toward T+"
                .into(),
            verdict: pass_fail(cauchy_pass && connection_shrinks),
            skip_reason: None,
            evidence: vec!["continuation.json".into()],
        },
        ClauseCheck {
            clause: "v",
            statement: "convergence to the limit space from t > T: distortion series \
                        decreasing within jitter and final value under threshold"
                .into(),
            verdict: pass_fail(gh.monotone_after && gh.final_after <= gh.threshold),
            skip_reason: None,
            evidence: vec!["gh.json".into(), "continuation.json".into()],
        },
    ];

    let overall = clauses.iter().all(|c| c.verdict == Verdict::Pass)
        && threshold_agreement.pass
        && volume_zero.pass
        && report.all_pass();

    let pipeline = PipelineReport {
        lattice_threshold,
        lattice_collapse_time: schedule.terminal_time.clone(),
        schedule,
        singular_time_analytic: params.t_singular(),
        singular_time_estimate: before.singular_time_estimate,
        threshold_agreement,
        volume_zero_extrapolated: cont_files.t_y_extrapolated,
        volume_zero,
        report,
        gh,
        clauses,
        overall,
    };
    let doc = pipeline_value(&pipeline)?;
    fs::write(
        out_dir.join("pipeline.json"),
        serde_json::to_string_pretty(&doc)? + "\n",
    )?;
    Ok(pipeline)
}

fn pipeline_value(p: &PipelineReport) -> Result<Value, IoError> {
    let clauses: Vec<Value> = p
        .clauses
        .iter()
        .map(|c| {
            json!({
                "clause": c.clause,
                "statement": c.statement,
                "verdict": c.verdict.as_str(),
                "skip_reason": c.skip_reason,
                "evidence": c.evidence,
            })
        })
        .collect();
    let doc = json!({
        "lattice_threshold": p.lattice_threshold.to_string(),
        "lattice_collapse_time": p
            .lattice_collapse_time
            .as_ref()
            .map_or_else(|| "infinity".to_string(), Rat::to_string),
        "singular_time_analytic": p.singular_time_analytic,
        "singular_time_estimate": p.singular_time_estimate,
        "threshold_agreement": {
            "difference": p.threshold_agreement.difference,
            "tolerance": p.threshold_agreement.tolerance,
            "pass": p.threshold_agreement.pass,
        },
        "volume_zero": {
            "extrapolated": p.volume_zero_extrapolated,
            "lattice_exact": p
                .lattice_collapse_time
                .as_ref()
                .map_or_else(|| "infinity".to_string(), Rat::to_string),
            "difference": p.volume_zero.difference,
            "tolerance": p.volume_zero.tolerance,
            "pass": p.volume_zero.pass,
        },
        "clauses": clauses,
        "overall_verdict": if p.overall { "pass" } else { "fail" },
    });
    validate_against(&doc, SchemaName::Pipeline)?;
    Ok(doc)
}

/// One plot-ready table over every snapshot of both sides: class data,
/// central diameter, volume, certificate distortion where sampled, and one
/// column per monitor. Cells a row has no sample for stay empty.
pub fn write_plots_csv(
    path: &Path,
    params: &FlowParams<f64>,
    before: &Trajectory<f64>,
    after: &Trajectory<f64>,
    report: &Report<f64>,
    gh: &GhReport<f64>,
) -> Result<(), IoError> {
    let class = crate::flow::ClassPath::contracting(params.n, params.a0, params.b0);
    let t_sing = params.t_singular();

    let mut monitor_names: Vec<&'static str> = Vec::new();
    for m in &report.monitors {
        if !monitor_names.contains(&m.name) {
            monitor_names.push(m.name);
        }
    }

    let mut header = String::from("t,a,b,diam_E,vol,eps_gh");
    for name in &monitor_names {
        header.push_str(&format!(",{name}"));
    }
    header.push('\n');

    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9;
    let lookup = |series: &[(f64, f64)], t: f64| -> Option<f64> {
        series.iter().find(|(x, _)| close(*x, t)).map(|&(_, v)| v)
    };
    let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));

    let mut out = header;
    for (side, traj) in [(Side::BeforeT, before), (Side::AfterT, after)] {
        for snap in &traj.snapshots {
            let t = snap.t;
            let diam = report
                .monitors
                .iter()
                .find(|m| m.name == "exceptional_diameter" && m.side == side)
                .and_then(|m| lookup(&m.values, t));
            let gh_series = match side {
                Side::BeforeT => &gh.before,
                Side::AfterT => &gh.after,
            };
            // Certificate samples are indexed by gap, rows by time.
            let gap = (t - t_sing).abs();
            let eps_gh = lookup(gh_series, gap);
            let vol = total_volume(&snap.profile, params.n);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
                t,
                class.a(t),
                class.b(t),
                cell(diam),
                vol,
                cell(eps_gh)
            ));
            for name in &monitor_names {
                let v = report
                    .monitors
                    .iter()
                    .find(|m| m.name == *name && m.side == side)
                    .and_then(|m| lookup(&m.values, t));
                out.push_str(&format!(",{}", cell(v)));
            }
            out.push('\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse_config() -> RunConfig {
        serde_json::from_value(json!({
            "n": 2, "a0": 1.0, "b0": 4.0,
            "n_cells": 64,
            "snapshot_dt": 0.02,
            "continuation_eps": [1e-2, 1e-3],
            "gh": {"directions": 8, "rings": 24},
        }))
        .unwrap()
    }

    #[test]
    fn config_defaults_and_overrides() {
        let config = coarse_config();
        let p = config.flow_params();
        assert_eq!(p.n_cells, 64);
        assert_eq!(p.dt_safety, 0.9);
        let o = config.gh_options();
        assert_eq!(o.directions, 8);
        assert_eq!(o.seed, GhOptions::default().seed);
        let v = config.verifier_config();
        assert_eq!(v.ratio_threshold, 3.0);

        let err: Result<RunConfig, _> =
            serde_json::from_value(json!({"n": 2, "a0": 1.0, "b0": 4.0, "typo": 1}));
        assert!(err.is_err());
    }

    #[test]
    fn coarse_pipeline_passes_every_clause() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(&coarse_config(), dir.path()).unwrap();

        assert_eq!(report.lattice_threshold.to_string(), "1");
        assert_eq!(report.lattice_collapse_time.as_ref().unwrap().to_string(), "4/3");
        assert!(report.threshold_agreement.pass);
        assert!(report.volume_zero.pass);
        assert!(report.clauses.iter().all(|c| c.verdict == Verdict::Pass));
        assert!(report.overall);

        for file in [
            "schedule.json",
            "flow/run.json",
            "limit.csv",
            "limit.json",
            "continuation.json",
            "report.json",
            "gh.json",
            "plots.csv",
            "pipeline.json",
        ] {
            assert!(dir.path().join(file).exists(), "{file} missing");
        }

        let plots = fs::read_to_string(dir.path().join("plots.csv")).unwrap();
        let header = plots.lines().next().unwrap();
        assert!(header.starts_with("t,a,b,diam_E,vol,eps_gh,"));
        assert!(header.contains("volume_ratio"));
        // Certificate samples land in the table: at least one non-empty
        // eps_gh cell.
        assert!(plots
            .lines()
            .skip(1)
            .any(|row| !row.split(',').nth(5).unwrap().is_empty()));
    }
}
