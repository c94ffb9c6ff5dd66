//! Distortion series against the limit space.

use super::directions::{direction_set, DirectionSet};
use super::graph::{MetricGraph, RingChoice};
use crate::constants::SPHERE_DIAMETER_FACTOR;
use crate::estimates::Verdict;
use crate::flow::{FlowError, FlowParams, Trajectory};
use crate::geometry::Profile;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct GhOptions {
    /// Directions per ring (even).
    pub directions: usize,
    /// Radial rings sampled out of the grid.
    pub rings: usize,
    pub seed: u64,
    /// `|t - T|` values the series is sampled at, descending; the nearest
    /// snapshot is used and its actual gap recorded.
    pub gaps: Vec<f64>,
    /// Allowed relative upward wiggle between consecutive series entries.
    pub jitter_tolerance: f64,
    /// The final entries must come under this fraction of the limit
    /// diameter.
    pub final_fraction: f64,
}

impl Default for GhOptions {
    fn default() -> Self {
        GhOptions {
            directions: 24,
            rings: 60,
            seed: 7,
            gaps: vec![0.32, 0.16, 0.08, 0.04, 0.02, 0.01],
            jitter_tolerance: 0.10,
            final_fraction: 0.05,
        }
    }
}

pub struct GhReport<F> {
    pub directions: usize,
    pub rings: usize,
    pub seed: u64,
    pub rho_nodes: Vec<F>,
    /// Diameter of the sampled limit space.
    pub diam_limit: F,
    /// Coarsest sampling cell of the limit space: the larger of the
    /// longest radial edge and the widest angular nearest-neighbor gap.
    pub mesh: F,
    /// `(|T - t|, eps)` per sampled snapshot before the surgery, gap
    /// descending.
    pub before: Vec<(F, F)>,
    /// Same past the surgery.
    pub after: Vec<(F, F)>,
    pub monotone_before: bool,
    pub monotone_after: bool,
    pub jitter_tolerance: f64,
    pub final_before: F,
    pub final_after: F,
    /// `final_fraction * diam_limit`.
    pub threshold: F,
    pub verdict: Verdict,
}

/// Distortion bound from the identity correspondence on the shared node
/// set: `eps = (1/2) sup |d_X - d_Y|`, so `d_GH(X, Y) <= eps`.
pub fn gh_distortion<F: Real>(dx: &[Vec<F>], dy: &[Vec<F>]) -> F {
    let n = dx.len();
    let mut sup = F::zero();
    for u in 0..n {
        for v in (u + 1)..n {
            let d = (dx[u][v] - dy[u][v]).abs();
            if d > sup {
                sup = d;
            }
        }
    }
    sup / F::of(2.0)
}

fn nearest_snapshot<'a, F: Real>(
    traj: &'a Trajectory<F>,
    target: F,
) -> (&'a crate::flow::FlowState<F>, F) {
    let mut best = &traj.snapshots[0];
    let mut gap = (best.t - target).abs();
    for s in &traj.snapshots {
        let g = (s.t - target).abs();
        if g < gap {
            gap = g;
            best = s;
        }
    }
    (best, gap)
}

fn monotone_within<F: Real>(series: &[(F, F)], jitter: f64) -> bool {
    series.windows(2).all(|w| {
        let (_, prev) = w[0];
        let (_, next) = w[1];
        next <= prev * F::of(1.0 + jitter)
    })
}

/// Distortion series of a run (and its continuation) against the limit
/// space at the surgery, on one shared node set.
pub fn gh_certificate<F: Real>(
    params: &FlowParams<F>,
    before: &Trajectory<F>,
    after: Option<&Trajectory<F>>,
    limit: &Profile<F>,
    opts: &GhOptions,
) -> Result<GhReport<F>, FlowError> {
    params.validate()?;
    if before.snapshots.is_empty() {
        return Err(FlowError::TooFewSnapshots { got: 0, want: 1 });
    }
    let dirs: DirectionSet<F> = direction_set(params.n, opts.directions, opts.seed);
    let pairwise = dirs.pairwise();
    let rings = RingChoice::uniform(limit, opts.rings)?;

    let limit_graph = MetricGraph::build(limit, &rings, &dirs, &pairwise)?;
    let d_limit = limit_graph.distances();
    let mut diam = F::zero();
    for row in &d_limit {
        for &d in row {
            if d > diam {
                diam = d;
            }
        }
    }

    let mut mesh = F::zero();
    for w in rings.rho.windows(2) {
        let r = crate::geometry::radial_length(limit, crate::geometry::RadialCoord::At(w[0]), w[1])?;
        if r > mesh {
            mesh = r;
        }
    }
    let c1 = F::of(SPHERE_DIAMETER_FACTOR);
    let gap = dirs.packing_gap();
    for &rho in &rings.rho {
        let angular = c1 * limit.value_at(rho).max(F::zero()).sqrt() * gap;
        if angular > mesh {
            mesh = angular;
        }
    }

    let t_sing = params.t_singular();
    let eval_side = |traj: &Trajectory<F>, sign: F| -> Result<Vec<(F, F)>, FlowError> {
        let mut series = Vec::new();
        let mut seen: Option<F> = None;
        for &g in &opts.gaps {
            let target = t_sing + sign * F::of(g);
            let (snap, _) = nearest_snapshot(traj, target);
            let actual = (snap.t - t_sing).abs();
            if seen.map_or(false, |s| (s - actual).abs() < F::of(1e-12)) {
                continue;
            }
            seen = Some(actual);
            let graph = MetricGraph::build(&snap.profile, &rings, &dirs, &pairwise)?;
            let eps = gh_distortion(&graph.distances(), &d_limit);
            series.push((actual, eps));
        }
        Ok(series)
    };

    let before_series = eval_side(before, -F::one())?;
    let after_series = match after {
        Some(traj) => eval_side(traj, F::one())?,
        None => Vec::new(),
    };

    let monotone_before = monotone_within(&before_series, opts.jitter_tolerance);
    let monotone_after = after_series.is_empty() || monotone_within(&after_series, opts.jitter_tolerance);
    let final_before = before_series.last().map_or(F::infinity(), |&(_, e)| e);
    let final_after = after_series.last().map_or(final_before, |&(_, e)| e);
    let threshold = F::of(opts.final_fraction) * diam;
    let ok = monotone_before
        && monotone_after
        && final_before <= threshold
        && final_after <= threshold;

    Ok(GhReport {
        directions: opts.directions,
        rings: opts.rings,
        seed: opts.seed,
        rho_nodes: rings.rho.clone(),
        diam_limit: diam,
        mesh,
        before: before_series,
        after: after_series,
        monotone_before,
        monotone_after,
        jitter_tolerance: opts.jitter_tolerance,
        final_before,
        final_after,
        threshold,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{continue_on_y, limit_profile, run_to_t};
    use crate::geometry::RadialGrid;

    #[test]
    fn distortion_of_identical_matrices_is_zero() {
        let d: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(gh_distortion(&d, &d), 0.0);
        let e: Vec<Vec<f64>> = vec![vec![0.0, 1.6], vec![1.6, 0.0]];
        assert!((gh_distortion(&d, &e) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn scaled_cones_have_scaled_distortion() {
        // Comparing the unit cone with its (1+u)^2-scaled copy: every
        // distance scales by 1+u, so the distortion is u/2 times the
        // diameter-realizing distance.
        let g = RadialGrid::new(64).unwrap();
        let mk = |b: f64| {
            let phi: Vec<f64> = g.s.iter().map(|&s| b * s).collect();
            Profile::new(g.clone(), phi, 0.0, b).unwrap()
        };
        let x = mk(1.0);
        let y = mk(1.21);
        let dirs: DirectionSet<f64> = direction_set(2, 8, 3);
        let pw = dirs.pairwise();
        let rings = RingChoice::uniform(&x, 10).unwrap();
        let dx = MetricGraph::build(&x, &rings, &dirs, &pw)
            .unwrap()
            .distances();
        let dy = MetricGraph::build(&y, &rings, &dirs, &pw)
            .unwrap()
            .distances();
        let mut diam_x: f64 = 0.0;
        for row in &dx {
            for &d in row {
                diam_x = diam_x.max(d);
            }
        }
        let eps = gh_distortion(&dx, &dy);
        assert!((eps - 0.05 * diam_x).abs() < 1e-12, "eps {eps}");
    }

    #[test]
    fn certificate_on_a_coarse_run() {
        let mut params = FlowParams::contracting(2, 1.0, 4.0);
        params.n_cells = 64;
        params.snapshot_dt = 0.02;
        params.continuation_eps = vec![1e-2, 1e-3];
        let traj = run_to_t(&params).unwrap();
        let phi_t = limit_profile(&traj).unwrap();
        let cont = continue_on_y(&params, &phi_t).unwrap();
        let opts = GhOptions {
            directions: 8,
            rings: 24,
            gaps: vec![0.32, 0.16, 0.08, 0.04, 0.02, 0.01],
            ..GhOptions::default()
        };
        let report = gh_certificate(&params, &traj, Some(&cont.merged), &phi_t, &opts).unwrap();

        assert!(report.diam_limit > 1.0 && report.diam_limit < 4.0);
        assert!(report.mesh > 0.0 && report.mesh < report.diam_limit);
        assert_eq!(report.before.len(), 6);
        assert!(!report.after.is_empty());
        for w in report.before.windows(2) {
            assert!(w[0].0 > w[1].0, "gaps must descend");
        }
        assert!(
            report.monotone_before,
            "before series: {:?}",
            report.before
        );
        assert!(report.monotone_after, "after series: {:?}", report.after);
        assert!(
            report.final_before <= report.threshold,
            "final {} vs threshold {}",
            report.final_before,
            report.threshold
        );
        assert!(report.final_after <= report.threshold);
        assert_eq!(report.verdict, Verdict::Pass);
    }
}
