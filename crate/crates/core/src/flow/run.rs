//! Explicit time stepping and the snapshot ladder.
//!
//! The integrator is the midpoint method with the faces sampled at `t`,
//! `t + dt/2`, `t + dt`; on cone profiles `phi = b(t) s` both stage
//! velocities are exact, so the scheme tracks the self-similar solutions to
//! roundoff. Scheduled times are landed on exactly (assigned, never
//! accumulated), which keeps snapshot timestamps shared across runs.

use super::stencil::{LeftFace, Stencil};
use super::{ClassPath, FlowError, FlowParams, FlowState, Side, TerminalReason, Trajectory};
use crate::geometry::{total_volume, Profile, RadialGrid};
use crate::scalar::Real;

/// Snapshot spacing ratio of the geometric tail `T - t = 0.1 T r^k`:
/// `0.8` gives a little over ten snapshots per decade of `T - t`, enough
/// for the decay-rate fits.
const GEOMETRIC_SNAPSHOT_RATIO: f64 = 0.8;

/// Inner window (in rho) on which limits and uniqueness proxies are
/// measured; the contracted end itself is excluded.
pub const LIMIT_WINDOW_RHO_MIN: f64 = -5.0;

/// The last snapshots before the stop time must agree to this tolerance on
/// the inner window for the run to count as settled into a limit.
pub const LIMIT_CAUCHY_TOL: f64 = 1e-3;

const MAX_HALVINGS: u32 = 20;

pub(crate) struct RawState<F: Real> {
    pub t: F,
    pub phi: Vec<F>,
}

pub(crate) struct Engine<F: Real> {
    pub grid: RadialGrid<F>,
    stencil: Stencil<F>,
    n: u32,
    class: ClassPath<F>,
    dt_safety: F,
    k1: Vec<F>,
    k2: Vec<F>,
    mid: Vec<F>,
    next: Vec<F>,
}

impl<F: Real> Engine<F> {
    pub fn new(grid: RadialGrid<F>, n: u32, class: ClassPath<F>, dt_safety: F) -> Self {
        let m = grid.n_cells;
        Engine {
            stencil: Stencil::new(&grid),
            grid,
            n,
            class,
            dt_safety,
            k1: vec![F::zero(); m],
            k2: vec![F::zero(); m],
            mid: vec![F::zero(); m],
            next: vec![F::zero(); m],
        }
    }

    fn left_face(&self, t: F) -> LeftFace<F> {
        match self.class.side(t) {
            Side::BeforeT => LeftFace::Anchored(self.class.a(t)),
            Side::AfterT => LeftFace::OneSided,
        }
    }

    /// Admissibility of a stepped profile against the faces at time `t`:
    /// finite, strictly increasing, inside `(floor, b(t))`.
    fn acceptable(&self, phi: &[F], t: F) -> bool {
        let mut prev = match self.class.side(t) {
            Side::BeforeT => self.class.a(t),
            Side::AfterT => F::zero(),
        };
        for &v in phi {
            if !v.is_finite() || !(v > prev) {
                return false;
            }
            prev = v;
        }
        prev < self.class.b(t)
    }

    /// One adaptive midpoint step; never overshoots `target` and lands on
    /// it exactly when the stability cap allows.
    pub fn step_toward(&mut self, state: &mut RawState<F>, target: F) -> Result<(), FlowError> {
        let t = state.t;
        let (min_dphi, node) =
            self.stencil
                .rhs(&state.phi, self.left_face(t), self.class.b(t), self.n, &mut self.k1);
        if !(min_dphi > F::zero()) {
            return Err(FlowError::DegenerateSlope {
                j: node,
                dphi: min_dphi.to_f64c(),
            });
        }
        // Explicit stability: dt <= safety * (min drho)^2 * min phi' / 2,
        // recomputed every step.
        let cap = self.dt_safety * self.stencil.drho_min * self.stencil.drho_min * min_dphi
            / F::of(2.0);
        let remaining = target - t;
        let mut land_exactly = remaining <= cap;
        let mut dt = if land_exactly { remaining } else { cap };
        let half = F::of(0.5);
        for _attempt in 0..=MAX_HALVINGS {
            let tm = t + dt * half;
            for j in 0..self.mid.len() {
                self.mid[j] = state.phi[j] + dt * half * self.k1[j];
            }
            let (min_mid, _) = self.stencil.rhs(
                &self.mid,
                self.left_face(tm),
                self.class.b(tm),
                self.n,
                &mut self.k2,
            );
            if min_mid > F::zero() {
                let tn = if land_exactly { target } else { t + dt };
                for j in 0..self.next.len() {
                    self.next[j] = state.phi[j] + dt * self.k2[j];
                }
                if self.acceptable(&self.next, tn) {
                    std::mem::swap(&mut state.phi, &mut self.next);
                    state.t = tn;
                    return Ok(());
                }
            }
            dt = dt * half;
            land_exactly = false;
        }
        Err(FlowError::Diverged {
            t: t.to_f64c(),
            attempts: MAX_HALVINGS,
        })
    }

    fn snapshot(&self, state: &RawState<F>) -> Result<FlowState<F>, FlowError> {
        let t = state.t;
        let side = self.class.side(t);
        let a_face = match side {
            Side::BeforeT => self.class.a(t),
            Side::AfterT => F::zero(),
        };
        Ok(FlowState {
            t,
            side,
            profile: Profile::new(self.grid.clone(), state.phi.clone(), a_face, self.class.b(t))?,
        })
    }
}

/// Drive a state through an increasing list of snapshot times. Divergence
/// is not an error here: the snapshots up to and including the last good
/// state are returned with the reason.
pub(crate) fn integrate<F: Real>(
    engine: &mut Engine<F>,
    state: &mut RawState<F>,
    times: &[F],
    reason_at_end: TerminalReason,
) -> Result<(Vec<FlowState<F>>, TerminalReason), FlowError> {
    let mut snapshots = Vec::with_capacity(times.len());
    for &target in times {
        while state.t < target {
            match engine.step_toward(state, target) {
                Ok(()) => {}
                Err(FlowError::Diverged { .. }) => {
                    snapshots.push(engine.snapshot(state)?);
                    return Ok((snapshots, TerminalReason::Diverged));
                }
                Err(e) => return Err(e),
            }
        }
        snapshots.push(engine.snapshot(state)?);
    }
    Ok((snapshots, reason_at_end))
}

/// The scheduled measurement times of a contraction run: uniform cadence
/// away from `T`, a geometric ladder `T - t = 0.1 T r^k` through the last
/// decade, and pinned times near the stop for the limit extraction.
pub fn snapshot_times<F: Real>(params: &FlowParams<F>) -> Vec<F> {
    let t_sing = params.t_singular();
    let stop = params.t_stop();
    let mut ts: Vec<F> = Vec::new();
    let uniform_end = t_sing * F::of(0.9);
    let mut k = 0u64;
    loop {
        let t = F::of(k as f64) * params.snapshot_dt;
        if !(t < uniform_end.min(stop)) {
            break;
        }
        ts.push(t);
        k += 1;
    }
    let mut gap = t_sing * F::of(0.1);
    let ratio = F::of(GEOMETRIC_SNAPSHOT_RATIO);
    loop {
        let t = t_sing - gap;
        if !(t < stop) {
            break;
        }
        if t >= F::zero() {
            ts.push(t);
        }
        gap = gap * ratio;
        if gap < F::of(1e-12) {
            break;
        }
    }
    for forced in [
        t_sing - F::of(0.01),
        stop - F::of(2e-4),
        stop - F::of(1e-4),
        stop,
    ] {
        if forced >= F::zero() && forced <= stop {
            ts.push(forced);
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = t_sing.max(F::one()) * F::of(1e-9);
    let mut out: Vec<F> = Vec::with_capacity(ts.len());
    for t in ts {
        if out.last().map_or(true, |&last| t - last > tol) {
            out.push(t);
        }
    }
    out
}

/// Least-squares line through the points; root of the fitted line if it
/// decreases.
fn fit_root<F: Real>(xs: &[F], ys: &[F]) -> Option<F> {
    if xs.len() < 2 {
        return None;
    }
    let m = F::of(xs.len() as f64);
    let sx: F = xs.iter().copied().sum();
    let sy: F = ys.iter().copied().sum();
    let sxx: F = xs.iter().map(|&x| x * x).sum();
    let sxy: F = xs.iter().zip(ys).map(|(&x, &y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    if denom == F::zero() {
        return None;
    }
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    if !(slope < F::zero()) {
        return None;
    }
    Some(-intercept / slope)
}

/// Measured singular-time estimators from the decaying snapshots.
///
/// The primary estimator converts measured volume into an effective
/// central area scale, `a_eff = (b(t)^n - n vol / c_n)^{1/n}`, and fits its
/// linear decay; its root is where the measured volume meets the collapsed
/// class volume. The fit window stays at moderate face scales: once the
/// face is within a few cells of collapse, the kink of `phi^n` across the
/// central layer shows up in the quadrature and bends `a_eff` away from
/// its line (the deviation is amplified by `1 / a^{n-1}`, so for n >= 3 the
/// last percent of the decay is unusable). The central-minimum fit does
/// the same with `min phi`; the boundary layer of the limit profile biases
/// it upward, so it is kept as a diagnostic only.
fn singular_estimates<F: Real>(
    snapshots: &[FlowState<F>],
    params: &FlowParams<F>,
) -> (Option<F>, Option<F>) {
    let n = params.n;
    let cn = F::of(crate::constants::volume_factor(n));
    let nf = F::of(n as f64);
    let lo = params.a0 * F::of(0.0499);
    let hi = params.a0 * F::of(0.501);
    let mut ts = Vec::new();
    let mut a_eff = Vec::new();
    let mut phi_min = Vec::new();
    for snap in snapshots {
        let vol = total_volume(&snap.profile, n);
        let b = snap.profile.b;
        let mut bn = F::one();
        for _ in 0..n {
            bn = bn * b;
        }
        let inner = bn - nf * vol / cn;
        if !(inner > F::zero()) {
            continue;
        }
        let y = inner.powf(F::one() / nf);
        if y >= lo && y <= hi {
            ts.push(snap.t);
            a_eff.push(y);
            phi_min.push(snap.profile.phi[0]);
        }
    }
    (fit_root(&ts, &a_eff), fit_root(&ts, &phi_min))
}

/// Integrate the contraction run from the affine initial profile to the
/// stop time just short of `T`.
pub fn run_to_t<F: Real>(params: &FlowParams<F>) -> Result<Trajectory<F>, FlowError> {
    params.validate()?;
    if !(params.a0 > F::zero()) {
        return Err(FlowError::InvalidParams {
            reason: "contraction runs need a positive central sphere; a0 > 0".into(),
        });
    }
    let grid = RadialGrid::new(params.n_cells)?;
    let class = ClassPath::contracting(params.n, params.a0, params.b0);
    let phi0: Vec<F> = grid
        .s
        .iter()
        .map(|&s| params.a0 + (params.b0 - params.a0) * s)
        .collect();
    let mut engine = Engine::new(grid, params.n, class, params.dt_safety);
    let mut state = RawState {
        t: F::zero(),
        phi: phi0,
    };
    let times = snapshot_times(params);
    let (snapshots, reason) = integrate(
        &mut engine,
        &mut state,
        &times,
        TerminalReason::ReachedSingularTime,
    )?;
    let (vol_root, min_root) = singular_estimates(&snapshots, params);
    Ok(Trajectory {
        snapshots,
        singular_time_estimate: vol_root,
        min_phi_extrapolation: min_root,
        terminal_reason: reason,
    })
}

/// Flow a collapsed-face profile (`a = 0`) on the blown-down side from
/// `t0` through the given times; the far face follows the class rate from
/// the profile's own `b`.
pub fn run_collapsing<F: Real>(
    n: u32,
    p0: &Profile<F>,
    t0: F,
    times: &[F],
    dt_safety: F,
) -> Result<Trajectory<F>, FlowError> {
    if p0.a != F::zero() {
        return Err(FlowError::NotAtSurgery {
            a: p0.a.to_f64c(),
        });
    }
    let class = ClassPath::after_only(n, p0.b, t0);
    let mut engine = Engine::new(p0.grid.clone(), n, class, dt_safety);
    let mut state = RawState {
        t: t0,
        phi: p0.phi.clone(),
    };
    let (snapshots, reason) = integrate(
        &mut engine,
        &mut state,
        times,
        TerminalReason::ReachedContinuationEnd,
    )?;
    Ok(Trajectory {
        snapshots,
        singular_time_estimate: None,
        min_phi_extrapolation: None,
        terminal_reason: reason,
    })
}

/// Extract the limit profile at the stop time, requiring the tail of the
/// run to be settled: the last three snapshots must agree to
/// [`LIMIT_CAUCHY_TOL`] on `rho >= `[`LIMIT_WINDOW_RHO_MIN`]. The
/// contracted face is recorded as exactly zero.
pub fn limit_profile<F: Real>(traj: &Trajectory<F>) -> Result<Profile<F>, FlowError> {
    if traj.snapshots.len() < 3 {
        return Err(FlowError::TooFewSnapshots {
            got: traj.snapshots.len(),
            want: 3,
        });
    }
    let tail = &traj.snapshots[traj.snapshots.len() - 3..];
    let rho_min = F::of(LIMIT_WINDOW_RHO_MIN);
    let mut sup = F::zero();
    for pair in tail.windows(2) {
        let (pa, pb) = (&pair[0].profile, &pair[1].profile);
        for j in 0..pa.len() {
            if pa.grid.rho[j] < rho_min {
                continue;
            }
            let d = (pa.phi[j] - pb.phi[j]).abs();
            if d > sup {
                sup = d;
            }
        }
    }
    if sup.to_f64c() > LIMIT_CAUCHY_TOL {
        return Err(FlowError::NotSettled {
            sup: sup.to_f64c(),
            tol: LIMIT_CAUCHY_TOL,
        });
    }
    let last = &tail[2].profile;
    Ok(Profile::new(
        last.grid.clone(),
        last.phi.clone(),
        F::zero(),
        last.b,
    )?)
}
