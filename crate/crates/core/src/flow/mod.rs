//! Reduced parabolic flow for the radial profile.
//!
//! In the rho-coordinate the metric evolves by
//!
//!   d phi / dt = phi''/phi' + (n-1) phi'/phi - n,
//!
//! primes denoting rho-derivatives. The cohomology class moves affinely:
//! before the contraction the faces obey `a(t) = a0 - (n-1) t` and
//! `b(t) = b0 - (n+1) t`, and the central sphere vanishes at
//! `T = a0/(n-1)`; afterwards the flow lives on the blown-down space with
//! `a = 0` and `b(t) = kappa - (n+1)(t - T)` until it collapses at `T_Y`.
//! The solver imposes exactly those face values and integrates the interior
//! explicitly.

mod continuation;
pub mod oracle;
mod run;
mod stencil;

pub use continuation::{
    continue_on_y, regularize_initial, CauchyPair, Continuation, CAUCHY_WINDOW_FRACTION,
    CONTINUATION_CAUCHY_TOL,
};
pub use run::{
    limit_profile, run_collapsing, run_to_t, snapshot_times, LIMIT_CAUCHY_TOL,
    LIMIT_WINDOW_RHO_MIN,
};
pub use stencil::{reduced_rhs, LeftFace, Stencil};

use crate::geometry::{GeometryError, Profile};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid flow parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("degenerate slope phi' = {dphi} at node {j}")]
    DegenerateSlope { j: usize, dphi: f64 },
    #[error("integration diverged at t = {t} (dt halved {attempts} times)")]
    Diverged { t: f64, attempts: u32 },
    #[error("profile is not settling into a limit: sup |delta phi| = {sup} over the last snapshots exceeds {tol}")]
    NotSettled { sup: f64, tol: f64 },
    #[error("regularization eps = {eps} destroys monotonicity; reduce eps")]
    RegularizationTooLarge { eps: f64 },
    #[error("continuation input must have a contracted face (a = 0), got a = {a}")]
    NotAtSurgery { a: f64 },
    #[error("continuation runs fail the uniqueness proxy: sup differences {sups:?} exceed {tol}")]
    CauchyFailure { sups: Vec<f64>, tol: f64 },
    #[error("need at least {want} snapshots, trajectory has {got}")]
    TooFewSnapshots { got: usize, want: usize },
}

/// Which regime the state is in; the left stencil differs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    BeforeT,
    AfterT,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::BeforeT => "before",
            Side::AfterT => "after",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "before" => Some(Side::BeforeT),
            "after" => Some(Side::AfterT),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalReason {
    ReachedSingularTime,
    ReachedContinuationEnd,
    Diverged,
}

impl TerminalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalReason::ReachedSingularTime => "reached_singular_time",
            TerminalReason::ReachedContinuationEnd => "reached_continuation_end",
            TerminalReason::Diverged => "diverged",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "reached_singular_time" => Some(TerminalReason::ReachedSingularTime),
            "reached_continuation_end" => Some(TerminalReason::ReachedContinuationEnd),
            "diverged" => Some(TerminalReason::Diverged),
            _ => None,
        }
    }
}

/// Solver configuration; times and faces in class units.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowParams<F: Real> {
    pub n: u32,
    pub a0: F,
    pub b0: F,
    /// Cell count of the radial grid.
    pub n_cells: usize,
    /// Fraction of the explicit stability cap actually used per step.
    pub dt_safety: F,
    /// The run stops when the central sphere area scale reaches this value.
    pub eps_stop: F,
    /// Uniform snapshot cadence away from the singular time.
    pub snapshot_dt: F,
    /// Regularization ladder for the continuation, strictly decreasing.
    pub continuation_eps: Vec<F>,
}

impl<F: Real> FlowParams<F> {
    /// Contraction-type run with the default solver knobs.
    pub fn contracting(n: u32, a0: F, b0: F) -> Self {
        FlowParams {
            n,
            a0,
            b0,
            n_cells: 400,
            dt_safety: F::of(0.9),
            eps_stop: F::of(0.01) * a0,
            snapshot_dt: F::of(0.0025),
            continuation_eps: vec![F::of(1e-2), F::of(1e-3), F::of(1e-4)],
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let fail = |reason: &str| {
            Err(FlowError::InvalidParams {
                reason: reason.to_string(),
            })
        };
        if self.n < 2 {
            return fail("complex dimension must be at least 2");
        }
        if !(self.a0 >= F::zero() && self.b0 > self.a0) {
            return fail("need 0 <= a0 < b0");
        }
        if self.a0 > F::zero() {
            let lhs = self.a0 * F::of((self.n + 1) as f64);
            let rhs = self.b0 * F::of((self.n - 1) as f64);
            if !(lhs < rhs) {
                return fail("class must reach the contraction first: a0 (n+1) < b0 (n-1)");
            }
        }
        if self.n_cells < 8 {
            return fail("grid needs at least 8 cells");
        }
        if !(self.dt_safety > F::zero() && self.dt_safety <= F::one()) {
            return fail("dt_safety must lie in (0, 1]");
        }
        if !(self.eps_stop > F::zero()) || (self.a0 > F::zero() && self.eps_stop >= self.a0) {
            return fail("eps_stop must lie in (0, a0)");
        }
        if !(self.snapshot_dt > F::zero()) {
            return fail("snapshot_dt must be positive");
        }
        if self.continuation_eps.is_empty() {
            return fail("continuation needs at least one regularization eps");
        }
        let mut prev = F::infinity();
        for &e in &self.continuation_eps {
            if !(e > F::zero() && e < prev) {
                return fail("continuation eps ladder must be positive and strictly decreasing");
            }
            prev = e;
        }
        Ok(())
    }

    pub fn t_singular(&self) -> F {
        self.a0 / F::of((self.n - 1) as f64)
    }

    /// Area scale of the far sphere at the contraction time.
    pub fn kappa(&self) -> F {
        self.b0 - self.a0 * F::of((self.n + 1) as f64) / F::of((self.n - 1) as f64)
    }

    /// Collapse time of the blown-down space.
    pub fn t_y(&self) -> F {
        self.t_singular() + self.kappa() / F::of((self.n + 1) as f64)
    }

    /// Midpoint of the continuation window, `T + kappa / (2(n+1))`.
    pub fn t_prime(&self) -> F {
        self.t_singular() + self.kappa() / F::of((2 * (self.n + 1)) as f64)
    }

    pub fn t_stop(&self) -> F {
        (self.a0 - self.eps_stop) / F::of((self.n - 1) as f64)
    }
}

/// Exact face values along the flow.
#[derive(Clone, Copy, Debug)]
pub struct ClassPath<F: Real> {
    pub n: u32,
    pub a0: F,
    pub b0: F,
    /// Contraction time; `Some(0)` runs purely on the blown-down side.
    pub t_surgery: Option<F>,
}

impl<F: Real> ClassPath<F> {
    pub fn contracting(n: u32, a0: F, b0: F) -> Self {
        let t = a0 / F::of((n - 1) as f64);
        ClassPath {
            n,
            a0,
            b0,
            t_surgery: Some(t),
        }
    }

    /// Path that starts on the blown-down space at time `t0` with far face
    /// `b0` (used for continuations and pure shrinking-sphere runs).
    pub fn after_only(n: u32, b0: F, t0: F) -> Self {
        ClassPath {
            n,
            a0: F::zero(),
            b0: b0 + F::of((n + 1) as f64) * t0,
            t_surgery: Some(t0),
        }
    }

    pub fn a(&self, t: F) -> F {
        match self.t_surgery {
            Some(ts) if t >= ts => F::zero(),
            _ => self.a0 - F::of((self.n - 1) as f64) * t,
        }
    }

    pub fn b(&self, t: F) -> F {
        self.b0 - F::of((self.n + 1) as f64) * t
    }

    pub fn side(&self, t: F) -> Side {
        match self.t_surgery {
            Some(ts) if t >= ts => Side::AfterT,
            _ => Side::BeforeT,
        }
    }
}

/// One snapshot of the flow.
#[derive(Clone, Debug)]
pub struct FlowState<F: Real> {
    pub t: F,
    pub side: Side,
    pub profile: Profile<F>,
}

/// A completed integration with its snapshot ladder and the measured
/// singular-time estimates.
#[derive(Clone, Debug)]
pub struct Trajectory<F: Real> {
    pub snapshots: Vec<FlowState<F>>,
    /// Root of the volume-deficit fit (primary estimator).
    pub singular_time_estimate: Option<F>,
    /// Root of the central-minimum fit (diagnostic; biased by the boundary
    /// layer of the limit profile).
    pub min_phi_extrapolation: Option<F>,
    pub terminal_reason: TerminalReason,
}

impl<F: Real> Trajectory<F> {
    pub fn last(&self) -> &FlowState<F> {
        self.snapshots.last().expect("trajectory has snapshots")
    }
}
