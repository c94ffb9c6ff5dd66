//! Radial profiles and their Riemannian measurements.
//!
//! A rotationally symmetric metric on the punctured chart is recorded by
//! `phi(rho) = u'(rho)`, `rho = log |z|^2`, increasing from `a` (area scale
//! of the central sphere) to `b` (area scale at the far end). Everything
//! here is parametrized by the compactified coordinate `s = e^rho / (1 +
//! e^rho)`, sampled at cell midpoints `s_j = (j + 1/2)/N` so both ends stay
//! off the grid; `rho`-derivatives come from `d/drho = s(1-s) d/ds`.
//!
//! Boundary-aware first derivatives anchor the one-sided stencils at the
//! face values `a` (at `s = 0`) and `b` (at `s = 1`); like the interior
//! centered stencils they are exact for quadratics in `s`.

use crate::constants::{RADIAL_LENGTH_FACTOR, SPHERE_DIAMETER_FACTOR};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("grid needs at least 8 cells, got {got}")]
    GridTooSmall { got: usize },
    #[error("profile has {got} values on a grid of {want} cells")]
    LengthMismatch { got: usize, want: usize },
    #[error("face values need 0 <= a < b, got a = {a}, b = {b}")]
    BadFaces { a: f64, b: f64 },
    #[error("profile not strictly increasing at node {j}")]
    NotMonotone { j: usize },
    #[error("profile leaves the face range [a, b] at node {j}")]
    OutOfRange { j: usize },
    #[error("degenerate metric at node {j}: phi = {phi}, phi' = {dphi}")]
    DegenerateMetric { j: usize, phi: f64, dphi: f64 },
    #[error("profiles live on different grids ({left} vs {right} cells)")]
    GridMismatch { left: usize, right: usize },
    #[error("radial range is empty: rho1 = {rho1} >= rho2 = {rho2}")]
    EmptyRange { rho1: f64, rho2: f64 },
    #[error("reference profiles need 0 < a0 < b0, kappa > 0, eps0 > 0")]
    BadReferenceData,
}

/// Cell-midpoint grid in `s`, with the matching `rho` values.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid<F: Real> {
    pub n_cells: usize,
    pub h: F,
    pub s: Vec<F>,
    pub rho: Vec<F>,
}

impl<F: Real> RadialGrid<F> {
    pub fn new(n_cells: usize) -> Result<Self, GeometryError> {
        if n_cells < 8 {
            return Err(GeometryError::GridTooSmall { got: n_cells });
        }
        let nf = F::of(n_cells as f64);
        let h = F::one() / nf;
        let half = F::of(0.5);
        let s: Vec<F> = (0..n_cells)
            .map(|j| (F::of(j as f64) + half) / nf)
            .collect();
        let rho: Vec<F> = s.iter().map(|&sj| (sj / (F::one() - sj)).ln()).collect();
        Ok(RadialGrid {
            n_cells,
            h,
            s,
            rho,
        })
    }

    /// Chain-rule factor `ds/drho = s (1 - s)`.
    pub fn ds_drho(&self, j: usize) -> F {
        self.s[j] * (F::one() - self.s[j])
    }

    /// Smallest `rho` spacing between consecutive nodes (attained at the
    /// center of the grid, about `4h`).
    pub fn min_drho(&self) -> F {
        let mut m = F::infinity();
        for j in 1..self.n_cells {
            let d = self.rho[j] - self.rho[j - 1];
            if d < m {
                m = d;
            }
        }
        m
    }

    pub fn s_of_rho(rho: F) -> F {
        F::one() / (F::one() + (-rho).exp())
    }
}

/// Point on the radial axis; the contracted end sits at `rho = -infinity`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialCoord<F> {
    Apex,
    At(F),
}

/// Monotone metric profile with its face values.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile<F: Real> {
    pub grid: RadialGrid<F>,
    pub phi: Vec<F>,
    /// Value at the `s = 0` face; zero exactly when the central sphere is
    /// contracted.
    pub a: F,
    /// Value at the `s = 1` face.
    pub b: F,
}

impl<F: Real> Profile<F> {
    pub fn new(grid: RadialGrid<F>, phi: Vec<F>, a: F, b: F) -> Result<Self, GeometryError> {
        if phi.len() != grid.n_cells {
            return Err(GeometryError::LengthMismatch {
                got: phi.len(),
                want: grid.n_cells,
            });
        }
        if !(a >= F::zero() && a < b) || !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::BadFaces {
                a: a.to_f64c(),
                b: b.to_f64c(),
            });
        }
        // Faces count as data: the profile must increase through them.
        // Roundoff slack on the range check only, never on monotonicity.
        let slack = (b - a) * F::epsilon() * F::of(64.0);
        for j in 0..phi.len() {
            let prev = if j == 0 { a } else { phi[j - 1] };
            if !(phi[j] > prev) && !(j == 0 && phi[j] == a && a == F::zero()) {
                return Err(GeometryError::NotMonotone { j });
            }
            if phi[j] < a - slack || phi[j] > b + slack {
                return Err(GeometryError::OutOfRange { j });
            }
        }
        if *phi.last().unwrap() >= b {
            return Err(GeometryError::NotMonotone { j: grid.n_cells });
        }
        Ok(Profile { grid, phi, a, b })
    }

    pub fn len(&self) -> usize {
        self.grid.n_cells
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `d phi / d rho` at every node, faces anchored.
    pub fn dphi(&self) -> Vec<F> {
        let n = self.len();
        let h = self.grid.h;
        let three = F::of(3.0);
        let four = F::of(4.0);
        let mut out = vec![F::zero(); n];
        out[0] = self.grid.ds_drho(0) * (self.phi[1] + three * self.phi[0] - four * self.a)
            / (three * h);
        for j in 1..n - 1 {
            out[j] = self.grid.ds_drho(j) * (self.phi[j + 1] - self.phi[j - 1])
                / (F::of(2.0) * h);
        }
        out[n - 1] = self.grid.ds_drho(n - 1)
            * (four * self.b - three * self.phi[n - 1] - self.phi[n - 2])
            / (three * h);
        out
    }

    /// Metric eigenvalues `(fiber, radial)` at node `j`: the fiber value
    /// carries multiplicity `n - 1`.
    pub fn eigenvalues(&self, j: usize) -> Result<(F, F), GeometryError> {
        let e = (F::one() - self.grid.s[j]) / self.grid.s[j]; // e^{-rho_j}
        let d = self.dphi()[j];
        if !(self.phi[j] > F::zero()) || !(d > F::zero()) {
            return Err(GeometryError::DegenerateMetric {
                j,
                phi: self.phi[j].to_f64c(),
                dphi: d.to_f64c(),
            });
        }
        Ok((self.phi[j] * e, d * e))
    }

    /// Trace of this metric against a reference, `(n-1) phi/phi_ref +
    /// phi'/phi_ref'`, at every node.
    pub fn trace_against(
        &self,
        reference: &Profile<F>,
        n: u32,
    ) -> Result<Vec<F>, GeometryError> {
        if self.len() != reference.len() {
            return Err(GeometryError::GridMismatch {
                left: self.len(),
                right: reference.len(),
            });
        }
        let dp = self.dphi();
        let dr = reference.dphi();
        let nm1 = F::of((n - 1) as f64);
        let mut out = vec![F::zero(); self.len()];
        for j in 0..self.len() {
            if !(reference.phi[j] > F::zero()) || !(dr[j] > F::zero()) {
                return Err(GeometryError::DegenerateMetric {
                    j,
                    phi: reference.phi[j].to_f64c(),
                    dphi: dr[j].to_f64c(),
                });
            }
            out[j] = nm1 * self.phi[j] / reference.phi[j] + dp[j] / dr[j];
        }
        Ok(out)
    }

    /// Piecewise-linear value in `s`, clamped to the faces beyond the grid.
    pub fn value_at(&self, rho: F) -> F {
        let s = RadialGrid::s_of_rho(rho);
        let n = self.len();
        let grid = &self.grid;
        if s <= grid.s[0] {
            return self.a + (self.phi[0] - self.a) * s / grid.s[0];
        }
        if s >= grid.s[n - 1] {
            let w = (s - grid.s[n - 1]) / (F::one() - grid.s[n - 1]);
            return self.phi[n - 1] + (self.b - self.phi[n - 1]) * w;
        }
        let x = (s / grid.h - F::of(0.5)).to_f64c();
        let j = (x.floor() as usize).min(n - 2);
        let w = (s - grid.s[j]) / grid.h;
        self.phi[j] + (self.phi[j + 1] - self.phi[j]) * w
    }

    /// Squared length of the generator of the radial circle action,
    /// `|V|^2 = phi'(rho)`, interpolated between nodes.
    pub fn radial_vector_norm_sq(&self, rho: F) -> F {
        let dp = self.dphi();
        let s = RadialGrid::s_of_rho(rho);
        let n = self.len();
        let grid = &self.grid;
        if s <= grid.s[0] {
            // phi' decays like e^rho toward the contracted end.
            return dp[0] * (s * (F::one() - grid.s[0])) / (grid.s[0] * (F::one() - s));
        }
        if s >= grid.s[n - 1] {
            return dp[n - 1];
        }
        let x = (s / grid.h - F::of(0.5)).to_f64c();
        let j = (x.floor() as usize).min(n - 2);
        let w = (s - grid.s[j]) / grid.h;
        dp[j] + (dp[j + 1] - dp[j]) * w
    }
}

/// Interpolation weight `w(rho) = min(e^rho, 1)` used by the weighted
/// estimates.
pub fn weight<F: Real>(rho: F) -> F {
    if rho >= F::zero() {
        F::one()
    } else {
        rho.exp()
    }
}

/// Fourth-order first derivative in `s` of node values (used by the volume
/// quadrature's integrand).
fn dds_order4<F: Real>(v: &[F], h: F) -> Vec<F> {
    let n = v.len();
    assert!(n >= 5);
    let c12 = F::of(12.0) * h;
    let mut out = vec![F::zero(); n];
    out[0] = (F::of(-25.0) * v[0] + F::of(48.0) * v[1] - F::of(36.0) * v[2]
        + F::of(16.0) * v[3]
        - F::of(3.0) * v[4])
        / c12;
    out[1] = (F::of(-3.0) * v[0] - F::of(10.0) * v[1] + F::of(18.0) * v[2] - F::of(6.0) * v[3]
        + v[4])
        / c12;
    for j in 2..n - 2 {
        out[j] = (v[j - 2] - F::of(8.0) * v[j - 1] + F::of(8.0) * v[j + 1] - v[j + 2]) / c12;
    }
    out[n - 2] = (F::of(3.0) * v[n - 1] + F::of(10.0) * v[n - 2] - F::of(18.0) * v[n - 3]
        + F::of(6.0) * v[n - 4]
        - v[n - 5])
        / c12;
    out[n - 1] = (F::of(25.0) * v[n - 1] - F::of(48.0) * v[n - 2] + F::of(36.0) * v[n - 3]
        - F::of(16.0) * v[n - 4]
        + F::of(3.0) * v[n - 5])
        / c12;
    out
}

/// Endpoint derivative of midpoint data, one-sided 4-point stencils; feeds
/// the Euler-Maclaurin correction below.
fn endpoint_derivatives<F: Real>(f: &[F], h: F) -> (F, F) {
    let n = f.len();
    assert!(n >= 4);
    let c24 = F::of(24.0) * h;
    let left = (F::of(-71.0) * f[0] + F::of(141.0) * f[1] - F::of(93.0) * f[2]
        + F::of(23.0) * f[3])
        / c24;
    let right = (F::of(71.0) * f[n - 1] - F::of(141.0) * f[n - 2] + F::of(93.0) * f[n - 3]
        - F::of(23.0) * f[n - 4])
        / c24;
    (left, right)
}

/// Total metric volume of the profile region,
/// `volume_factor(n) * integral phi^{n-1} phi' drho`.
///
/// The rho-integral equals `integral_0^1 phi^{n-1} (dphi/ds) ds`; that is
/// evaluated by the midpoint rule with the `h^2/24` Euler-Maclaurin
/// endpoint correction, fourth order overall.
pub fn total_volume<F: Real>(p: &Profile<F>, n: u32) -> F {
    // The integrand equals (phi^n)'/n; differencing phi^n instead of phi
    // keeps the stencils on a function that stays smooth through the
    // root-type layer a profile develops at a collapsing central face
    // (phi^2 is linear through it), where phi itself is unresolvable.
    let powed: Vec<F> = p
        .phi
        .iter()
        .map(|&phi| {
            let mut pw = phi;
            for _ in 1..n {
                pw = pw * phi;
            }
            pw
        })
        .collect();
    let nf = F::of(n as f64);
    let f: Vec<F> = dds_order4(&powed, p.grid.h)
        .iter()
        .map(|&d| d / nf)
        .collect();
    let sum: F = f.iter().copied().sum();
    let (dl, dr) = endpoint_derivatives(&f, p.grid.h);
    let h = p.grid.h;
    let integral = h * sum + h * h / F::of(24.0) * (dr - dl);
    F::of(crate::constants::volume_factor(n)) * integral
}

/// Closed-form volume of the annulus between face values, what
/// [`total_volume`] measures when the profile is exact.
pub fn class_volume<F: Real>(n: u32, a: F, b: F) -> F {
    let mut pa = F::one();
    let mut pb = F::one();
    for _ in 0..n {
        pa = pa * a;
        pb = pb * b;
    }
    F::of(crate::constants::volume_factor(n)) * (pb - pa) / F::of(n as f64)
}

/// Length of the radial geodesic segment between `lo` and `rho2`:
/// trapezoid rule on `(1/2) sqrt(phi')` over grid nodes, linear
/// interpolation into partial cells, and below the first node the
/// closed-form tail of the `phi' ~ C e^rho` model (exact for any profile
/// smooth across the contracted end).
pub fn radial_length<F: Real>(
    p: &Profile<F>,
    lo: RadialCoord<F>,
    rho2: F,
) -> Result<F, GeometryError> {
    let dp = p.dphi();
    let rho = &p.grid.rho;
    let n = p.len();
    let half = F::of(0.5);
    let psi: Vec<F> = dp.iter().map(|&d| half * d.max(F::zero()).sqrt()).collect();
    let psi_at = |r: F| -> F {
        if r <= rho[0] {
            // sqrt(phi') ~ e^{rho/2} model below the first node.
            return psi[0] * ((r - rho[0]) * half).exp();
        }
        if r >= rho[n - 1] {
            return psi[n - 1];
        }
        let mut j = match rho.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        j = j.min(n - 2);
        let w = (r - rho[j]) / (rho[j + 1] - rho[j]);
        psi[j] + (psi[j + 1] - psi[j]) * w
    };
    let rho1 = match lo {
        RadialCoord::Apex => {
            // Tail integral of psi[0] e^{(rho - rho_0)/2} over
            // (-inf, rho_0] is 2 psi[0] = sqrt(phi'(rho_0)).
            if rho2 <= rho[0] {
                return Ok(F::of(2.0) * psi_at(rho2));
            }
            let tail = F::of(2.0) * psi[0];
            return Ok(tail + radial_length(p, RadialCoord::At(rho[0]), rho2)?);
        }
        RadialCoord::At(r) => r,
    };
    if !(rho1 < rho2) {
        return Err(GeometryError::EmptyRange {
            rho1: rho1.to_f64c(),
            rho2: rho2.to_f64c(),
        });
    }
    // Trapezoid over the interior nodes plus partial cells at both ends.
    let first = rho.partition_point(|&x| x < rho1);
    let last = rho.partition_point(|&x| x <= rho2);
    if first >= last {
        // Both endpoints inside one cell.
        return Ok((psi_at(rho1) + psi_at(rho2)) * half * (rho2 - rho1));
    }
    let mut acc = F::zero();
    for j in first..last.saturating_sub(1) {
        acc = acc + (psi[j] + psi[j + 1]) * half * (rho[j + 1] - rho[j]);
    }
    acc = acc + (psi_at(rho1) + psi[first]) * half * (rho[first] - rho1);
    acc = acc + (psi[last - 1] + psi_at(rho2)) * half * (rho2 - rho[last - 1]);
    debug_assert!(F::of(RADIAL_LENGTH_FACTOR) == half);
    Ok(acc)
}

/// Diameter of the projectivized cross section at `at`:
/// `c1 * pi * sqrt(phi)`.
pub fn sphere_diameter<F: Real>(p: &Profile<F>, at: RadialCoord<F>) -> F {
    let phi = match at {
        RadialCoord::Apex => p.a,
        RadialCoord::At(rho) => p.value_at(rho),
    };
    F::of(SPHERE_DIAMETER_FACTOR) * F::of(std::f64::consts::PI) * phi.max(F::zero()).sqrt()
}

/// The three comparison profiles for a run with class data
/// `(n, a0, b0, kappa)`: the affine initial profile, the pullback of the
/// collapsed-end model (`a = 0`, `b = kappa`), and its uniform thickening
/// by `eps0`.
pub fn reference_profiles<F: Real>(
    n: u32,
    a0: F,
    b0: F,
    kappa: F,
    eps0: F,
    grid: &RadialGrid<F>,
) -> Result<(Profile<F>, Profile<F>, Profile<F>), GeometryError> {
    if !(a0 > F::zero() && b0 > a0 && kappa > F::zero() && eps0 > F::zero()) || n < 2 {
        return Err(GeometryError::BadReferenceData);
    }
    let affine = |a: F, b: F| -> Result<Profile<F>, GeometryError> {
        let phi: Vec<F> = grid.s.iter().map(|&s| a + (b - a) * s).collect();
        Profile::new(grid.clone(), phi, a, b)
    };
    let initial = affine(a0, b0)?;
    let pullback = affine(F::zero(), kappa)?;
    let omega_x = affine(eps0, eps0 + kappa)?;
    Ok((initial, pullback, omega_x))
}
