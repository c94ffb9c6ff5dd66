use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use krf_lab::estimates::{run_report, Verdict, VerifierConfig};
use krf_lab::flow::{continue_on_y, limit_profile, run_to_t, TerminalReason, Trajectory};
use krf_lab::gh::{gh_certificate, GhOptions};
use krf_lab::io;
use krf_lab::lattice::run_schedule;
use krf_lab::pipeline::{run_pipeline, RunConfig};

/// Collapsing-fiber flow lab: exact surgery schedules, the reduced flow
/// across its first contraction, and the reports that certify the run.
#[derive(Parser)]
#[command(name = "krf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an exact surgery schedule from a lattice description.
    Mmp {
        /// Input JSON: {surface, initial_class}.
        #[arg(long)]
        input: PathBuf,
        /// Schedule JSON to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Run the contracting flow up to the singular time.
    Flow {
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Directory for run.json, snapshots, and the limit profile.
        #[arg(long)]
        out: PathBuf,
    },
    /// Continue a finished run past the contraction on the base.
    Continue {
        /// Run configuration JSON (same file the run was made with).
        #[arg(long)]
        config: PathBuf,
        /// Limit profile CSV (sidecar JSON expected next to it).
        #[arg(long)]
        limit: PathBuf,
        /// Directory for continuation.json and the merged snapshots.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the monitor suite over a run.
    Verify {
        /// Run directory written by `flow`.
        #[arg(long)]
        run: PathBuf,
        /// Continuation directory written by `continue`.
        #[arg(long)]
        continuation: Option<PathBuf>,
        /// Report JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the convergence certificate against the limit space.
    Gh {
        /// Run directory written by `flow`.
        #[arg(long)]
        run: PathBuf,
        /// Continuation directory written by `continue`.
        #[arg(long)]
        continuation: Option<PathBuf>,
        /// Limit profile CSV (sidecar JSON expected next to it).
        #[arg(long)]
        limit: PathBuf,
        /// Sampled directions per ring.
        #[arg(long)]
        dirs: Option<usize>,
        /// Radial rings in the graph.
        #[arg(long)]
        rings: Option<usize>,
        /// Direction-sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Certificate JSON to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage end to end and cross-check them.
    Pipeline {
        /// Run configuration JSON.
        #[arg(long)]
        config: PathBuf,
        /// Directory for all artifacts.
        #[arg(long)]
        out: PathBuf,
    },
}

fn sidecar_of(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn load_continuation(dir: Option<&PathBuf>) -> anyhow::Result<Option<(Trajectory<f64>, f64)>> {
    match dir {
        None => Ok(None),
        Some(dir) => {
            let (merged, t_prime, _) = io::read_continuation(dir)
                .with_context(|| format!("reading continuation {}", dir.display()))?;
            Ok(Some((merged, t_prime)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Mmp { input, output } => {
            let (lat, l0) =
                io::read_mmp_input(&input).with_context(|| format!("reading {}", input.display()))?;
            let schedule = run_schedule(&l0, &lat)?;
            io::write_schedule(&output, &lat, &l0, &schedule)?;
            println!(
                "start: {} on rank-{} lattice",
                l0.display(&lat.basis_labels),
                lat.rank()
            );
            let mut basis = &lat.basis_labels;
            for (i, step) in schedule.steps.iter().enumerate() {
                let labels: Vec<&str> =
                    step.contracted.iter().map(|c| c.label.as_str()).collect();
                println!(
                    "step {}: t = {}, contract {} via {}",
                    i + 1,
                    step.threshold,
                    labels.join(", "),
                    step.big_class.display(basis)
                );
                basis = &step.next_lattice.basis_labels;
            }
            let time = schedule
                .terminal_time
                .as_ref()
                .map_or_else(|| "infinity".to_string(), ToString::to_string);
            println!(
                "terminal: {} at t = {}, final class {}",
                schedule.terminal.as_str(),
                time,
                schedule.final_class.display(basis)
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Flow { config, out } => {
            let config = RunConfig::load(&config)?;
            let params = config.flow_params();
            let traj = run_to_t(&params)?;
            let files = io::write_run(&out, &params, &traj)?;
            println!(
                "ran to t = {:.6} in {} snapshots ({})",
                traj.last().t,
                files.snapshot_count,
                traj.terminal_reason.as_str()
            );
            if let Some(est) = traj.singular_time_estimate {
                println!(
                    "singular time estimate {:.6} (analytic {:.6})",
                    est,
                    params.t_singular()
                );
            }
            if traj.terminal_reason == TerminalReason::ReachedSingularTime {
                let limit = limit_profile(&traj)?;
                io::write_profile_csv(&out.join("limit.csv"), &limit)?;
                io::write_sidecar(
                    &out.join("limit.json"),
                    params.t_singular(),
                    params.n,
                    &limit,
                )?;
                println!("limit profile written (b = {:.6})", limit.b);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Continue { config, limit, out } => {
            let config = RunConfig::load(&config)?;
            let params = config.flow_params();
            let (_, _, phi_t) = io::read_profile_csv(&limit, &sidecar_of(&limit))
                .with_context(|| format!("reading limit profile {}", limit.display()))?;
            let cont = continue_on_y(&params, &phi_t)?;
            let files = io::write_continuation(&out, &params, &cont)?;
            for pair in &cont.cauchy {
                println!(
                    "cauchy eps {:.0e} vs {:.0e}: sup {:.3e}",
                    pair.eps_coarse, pair.eps_fine, pair.sup
                );
            }
            println!(
                "continued to t_prime = {:.6} in {} snapshots",
                cont.t_prime, files.snapshot_count
            );
            if let Some(t_y) = files.t_y_extrapolated {
                println!("volume extrapolates to zero at t = {t_y:.6}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            run,
            continuation,
            out,
        } => {
            let (params, before) =
                io::read_run(&run).with_context(|| format!("reading run {}", run.display()))?;
            let after = load_continuation(continuation.as_ref())?;
            let report = run_report(
                &params,
                &before,
                after.as_ref().map(|(merged, _)| merged),
                &VerifierConfig::default(),
            )?;
            let doc = io::report_value(&report)?;
            std::fs::write(&out, serde_json::to_string_pretty(&doc)? + "\n")?;
            for m in &report.monitors {
                println!("{} [{}]: {}", m.name, m.side.as_str(), m.verdict.as_str());
            }
            for f in &report.class_fits {
                println!(
                    "{}: slope {:.4} (expected {:.1})",
                    f.name, f.slope, f.expected_slope
                );
            }
            if let Some(fit) = &report.diameter_fit {
                println!(
                    "exceptional_diameter fit: exponent {:.3}, verdict {}",
                    fit.exponent,
                    fit.verdict.as_str()
                );
            }
            let ok = report.all_pass();
            println!("report: {}", if ok { "pass" } else { "fail" });
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Gh {
            run,
            continuation,
            limit,
            dirs,
            rings,
            seed,
            out,
        } => {
            let (params, before) =
                io::read_run(&run).with_context(|| format!("reading run {}", run.display()))?;
            let after = load_continuation(continuation.as_ref())?;
            let (_, _, phi_t) = io::read_profile_csv(&limit, &sidecar_of(&limit))
                .with_context(|| format!("reading limit profile {}", limit.display()))?;
            let mut opts = GhOptions::default();
            if let Some(v) = dirs {
                opts.directions = v;
            }
            if let Some(v) = rings {
                opts.rings = v;
            }
            if let Some(v) = seed {
                opts.seed = v;
            }
            let report = gh_certificate(
                &params,
                &before,
                after.as_ref().map(|(merged, _)| merged),
                &phi_t,
                &opts,
            )?;
            let doc = io::gh_value(&report)?;
            std::fs::write(&out, serde_json::to_string_pretty(&doc)? + "\n")?;
            for (gap, eps) in report.before.iter().chain(&report.after) {
                println!("gap {gap:.4}: eps {eps:.5}");
            }
            println!(
                "diam_limit {:.5}, threshold {:.5}, verdict {}",
                report.diam_limit,
                report.threshold,
                report.verdict.as_str()
            );
            Ok(if report.verdict == Verdict::Pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Pipeline { config, out } => {
            let config = RunConfig::load(&config)?;
            let report = run_pipeline(&config, &out)?;
            println!(
                "lattice threshold {} vs flow estimate {:?}: {}",
                report.lattice_threshold,
                report.singular_time_estimate,
                if report.threshold_agreement.pass {
                    "agree"
                } else {
                    "disagree"
                }
            );
            println!(
                "volume zero extrapolation {:?} vs exact {}: {}",
                report.volume_zero_extrapolated,
                report
                    .lattice_collapse_time
                    .as_ref()
                    .map_or_else(|| "infinity".to_string(), ToString::to_string),
                if report.volume_zero.pass { "agree" } else { "disagree" }
            );
            for c in &report.clauses {
                println!("clause ({}): {}", c.clause, c.verdict.as_str());
            }
            let ok = report.overall;
            println!("overall: {}", if ok { "pass" } else { "fail" });
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
