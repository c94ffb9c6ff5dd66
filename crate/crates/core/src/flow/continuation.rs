//! Continuation through the contraction on the blown-down space.
//!
//! The limit profile at `T` is degenerate at the contracted end, so the
//! continuation is defined by regularization: thicken the limit by
//! `eps * s(1-s)` (which leaves the far face untouched and dies at both
//! ends), flow each thickening to `T'`, and accept the family only when
//! consecutive levels agree uniformly away from the contracted end. The
//! smallest level is the merged continuation. By the maximum principle the
//! expected agreement is `(eps_coarse - eps_fine)/4`, so the tolerance
//! below is slack for any ladder below `1e-2`.

use super::run::{run_collapsing, LIMIT_WINDOW_RHO_MIN};
use super::{FlowError, FlowParams, Trajectory};
use crate::geometry::Profile;
use crate::scalar::Real;
use rayon::prelude::*;

/// Uniqueness proxy: consecutive regularization levels must agree to this
/// sup tolerance on the Cauchy window.
pub const CONTINUATION_CAUCHY_TOL: f64 = 5e-3;

/// Head fraction of the continuation span excluded from the Cauchy window
/// (the regularizations legitimately differ in the initial layer).
pub const CAUCHY_WINDOW_FRACTION: f64 = 0.3;

/// Offsets after the surgery at which the connection back to the limit
/// profile is measured (those below `T' - T` are used).
const CONNECTION_DELTAS: [f64; 4] = [0.01, 0.025, 0.05, 0.1];

/// Sup disagreement between two consecutive regularization levels.
#[derive(Clone, Copy, Debug)]
pub struct CauchyPair<F> {
    pub eps_coarse: F,
    pub eps_fine: F,
    pub sup: F,
}

pub struct Continuation<F: Real> {
    /// One completed run per regularization level, in ladder order.
    pub eps_runs: Vec<(F, Trajectory<F>)>,
    pub cauchy: Vec<CauchyPair<F>>,
    /// `(delta, sup_{rho >= 0} |phi(T + delta) - phi_T|)`, delta ascending.
    pub connection: Vec<(F, F)>,
    /// The finest-level trajectory: the continuation itself.
    pub merged: Trajectory<F>,
    pub t_prime: F,
}

/// Thicken a collapsed-face profile by `eps * s(1-s)`.
pub fn regularize_initial<F: Real>(p: &Profile<F>, eps: F) -> Result<Profile<F>, FlowError> {
    if p.a != F::zero() {
        return Err(FlowError::NotAtSurgery { a: p.a.to_f64c() });
    }
    if !(eps > F::zero()) {
        return Err(FlowError::InvalidParams {
            reason: "regularization eps must be positive".into(),
        });
    }
    let phi: Vec<F> = p
        .grid
        .s
        .iter()
        .zip(&p.phi)
        .map(|(&s, &v)| v + eps * s * (F::one() - s))
        .collect();
    // A thickening that breaks monotonicity or overshoots the far face is
    // simply too large for this profile; both shapes of failure say so.
    Profile::new(p.grid.clone(), phi, F::zero(), p.b).map_err(|e| match e {
        crate::geometry::GeometryError::NotMonotone { .. }
        | crate::geometry::GeometryError::OutOfRange { .. } => {
            FlowError::RegularizationTooLarge { eps: eps.to_f64c() }
        }
        other => other.into(),
    })
}

/// Shared snapshot times of all continuation runs: uniform cadence plus
/// the pinned connection offsets and the endpoint `T'`.
fn continuation_times<F: Real>(params: &FlowParams<F>, t_start: F, t_end: F) -> Vec<F> {
    let mut ts = Vec::new();
    let mut k = 0u64;
    loop {
        let t = t_start + F::of(k as f64) * params.snapshot_dt;
        if !(t < t_end) {
            break;
        }
        ts.push(t);
        k += 1;
    }
    for d in CONNECTION_DELTAS {
        let t = t_start + F::of(d);
        if t < t_end {
            ts.push(t);
        }
    }
    ts.push(t_end);
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = t_end.max(F::one()) * F::of(1e-9);
    let mut out: Vec<F> = Vec::with_capacity(ts.len());
    for t in ts {
        if out.last().map_or(true, |&last| t - last > tol) {
            out.push(t);
        }
    }
    out
}

/// Flow the limit profile through the surgery: one run per regularization
/// level, Cauchy-checked pairwise, merged at the finest level.
pub fn continue_on_y<F: Real>(
    params: &FlowParams<F>,
    phi_t: &Profile<F>,
) -> Result<Continuation<F>, FlowError> {
    params.validate()?;
    if phi_t.a != F::zero() {
        return Err(FlowError::NotAtSurgery {
            a: phi_t.a.to_f64c(),
        });
    }
    let t_start = params.t_singular();
    let t_prime = params.t_prime();
    let times = continuation_times(params, t_start, t_prime);
    let eps_runs: Vec<(F, Trajectory<F>)> = params
        .continuation_eps
        .par_iter()
        .map(|&eps| -> Result<(F, Trajectory<F>), FlowError> {
            let p0 = regularize_initial(phi_t, eps)?;
            let traj = run_collapsing(params.n, &p0, t_start, &times, params.dt_safety)?;
            Ok((eps, traj))
        })
        .collect::<Result<_, _>>()?;
    for (_, traj) in &eps_runs {
        if traj.snapshots.len() != times.len() {
            let t = traj.last().t.to_f64c();
            return Err(FlowError::Diverged { t, attempts: 20 });
        }
    }

    let window_start = t_start + (t_prime - t_start) * F::of(CAUCHY_WINDOW_FRACTION);
    let rho_min = F::of(LIMIT_WINDOW_RHO_MIN);
    let mut cauchy = Vec::new();
    for pair in eps_runs.windows(2) {
        let (ec, tc) = (&pair[0].0, &pair[0].1);
        let (ef, tf) = (&pair[1].0, &pair[1].1);
        let mut sup = F::zero();
        for (sc, sf) in tc.snapshots.iter().zip(&tf.snapshots) {
            if sc.t < window_start - F::of(1e-12) {
                continue;
            }
            for j in 0..sc.profile.len() {
                if sc.profile.grid.rho[j] < rho_min {
                    continue;
                }
                let d = (sc.profile.phi[j] - sf.profile.phi[j]).abs();
                if d > sup {
                    sup = d;
                }
            }
        }
        cauchy.push(CauchyPair {
            eps_coarse: *ec,
            eps_fine: *ef,
            sup,
        });
    }
    if cauchy
        .iter()
        .any(|p| p.sup.to_f64c() > CONTINUATION_CAUCHY_TOL)
    {
        return Err(FlowError::CauchyFailure {
            sups: cauchy.iter().map(|p| p.sup.to_f64c()).collect(),
            tol: CONTINUATION_CAUCHY_TOL,
        });
    }

    let merged = eps_runs.last().unwrap().1.clone();
    let mut connection = Vec::new();
    for d in CONNECTION_DELTAS {
        let target = t_start + F::of(d);
        let hit = merged
            .snapshots
            .iter()
            .find(|s| (s.t - target).abs() < F::of(1e-9));
        if let Some(snap) = hit {
            let mut sup = F::zero();
            for j in 0..snap.profile.len() {
                if snap.profile.grid.rho[j] < F::zero() {
                    continue;
                }
                let diff = (snap.profile.phi[j] - phi_t.phi[j]).abs();
                if diff > sup {
                    sup = diff;
                }
            }
            connection.push((F::of(d), sup));
        }
    }

    Ok(Continuation {
        eps_runs,
        cauchy,
        connection,
        merged,
        t_prime,
    })
}
