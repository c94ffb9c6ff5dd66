//! Finite-difference evaluation of the reduced flow velocity.
//!
//! Derivatives are taken in `s` and converted through
//! `d/drho = c(s) d/ds`, `c = s(1-s)`:
//!
//!   phi'  = c phi_s
//!   phi'' = c^2 phi_ss + c (1 - 2s) phi_s
//!
//! Interior nodes use centered stencils. At the outer end the first cell is
//! anchored to the face value `b` half a cell away; before the contraction
//! the inner end is anchored to `a` the same way, afterwards there is no
//! boundary condition there and the stencil is one-sided. All of these are
//! exact for quadratics in `s`.

use super::FlowError;
use crate::geometry::Profile;
use crate::scalar::Real;

/// Inner-end treatment for the velocity evaluation.
#[derive(Clone, Copy, Debug)]
pub enum LeftFace<F> {
    /// Dirichlet value at `s = 0`, half a cell from the first node.
    Anchored(F),
    /// No boundary condition; one-sided differences into the interior.
    OneSided,
}

/// Precomputed chain-rule factors for one grid.
#[derive(Clone, Debug)]
pub struct Stencil<F: Real> {
    pub n_cells: usize,
    inv_3h: F,
    inv_2h: F,
    inv_h2: F,
    inv_3h2: F,
    /// `c = s(1-s)` per node.
    c: Vec<F>,
    /// `c^2` per node.
    c2: Vec<F>,
    /// `c (1-2s)` per node.
    d: Vec<F>,
    pub drho_min: F,
}

impl<F: Real> Stencil<F> {
    pub fn new(grid: &crate::geometry::RadialGrid<F>) -> Self {
        let h = grid.h;
        let c: Vec<F> = grid.s.iter().map(|&s| s * (F::one() - s)).collect();
        let c2: Vec<F> = c.iter().map(|&x| x * x).collect();
        let d: Vec<F> = grid
            .s
            .iter()
            .zip(&c)
            .map(|(&s, &cj)| cj * (F::one() - F::of(2.0) * s))
            .collect();
        Stencil {
            n_cells: grid.n_cells,
            inv_3h: F::one() / (F::of(3.0) * h),
            inv_2h: F::one() / (F::of(2.0) * h),
            inv_h2: F::one() / (h * h),
            inv_3h2: F::one() / (F::of(3.0) * h * h),
            c,
            c2,
            d,
            drho_min: grid.min_drho(),
        }
    }

    /// Writes the flow velocity into `out` and returns the smallest
    /// `phi'(rho)` encountered with its node; a nonpositive minimum means
    /// the evaluation hit a degenerate slope and `out` is garbage.
    pub fn rhs(&self, phi: &[F], left: LeftFace<F>, b: F, n: u32, out: &mut [F]) -> (F, usize) {
        debug_assert_eq!(phi.len(), self.n_cells);
        debug_assert_eq!(out.len(), self.n_cells);
        let m = self.n_cells;
        let nf = F::of(n as f64);
        let nm1 = nf - F::one();
        let three = F::of(3.0);
        let four = F::of(4.0);
        let eight = F::of(8.0);
        let twelve = F::of(12.0);
        let mut min_dphi = F::infinity();
        let mut min_node = 0usize;

        let mut emit = |j: usize, ds: F, dss: F, min_dphi: &mut F, min_node: &mut usize| {
            let dphi = self.c[j] * ds;
            let ddphi = self.c2[j] * dss + self.d[j] * ds;
            if !(dphi >= *min_dphi) {
                *min_dphi = dphi;
                *min_node = j;
            }
            out[j] = (ddphi * phi[j] + nm1 * dphi * dphi) / (dphi * phi[j]) - nf;
        };

        match left {
            LeftFace::Anchored(a) => {
                let ds = (phi[1] + three * phi[0] - four * a) * self.inv_3h;
                let dss = (eight * a + four * phi[1] - twelve * phi[0]) * self.inv_3h2;
                emit(0, ds, dss, &mut min_dphi, &mut min_node);
            }
            LeftFace::OneSided => {
                let ds = (four * phi[1] - three * phi[0] - phi[2]) * self.inv_2h;
                let dss = (phi[0] - F::of(2.0) * phi[1] + phi[2]) * self.inv_h2;
                emit(0, ds, dss, &mut min_dphi, &mut min_node);
            }
        }
        for j in 1..m - 1 {
            let ds = (phi[j + 1] - phi[j - 1]) * self.inv_2h;
            let dss = (phi[j + 1] - F::of(2.0) * phi[j] + phi[j - 1]) * self.inv_h2;
            emit(j, ds, dss, &mut min_dphi, &mut min_node);
        }
        let ds = (four * b - three * phi[m - 1] - phi[m - 2]) * self.inv_3h;
        let dss = (eight * b + four * phi[m - 2] - twelve * phi[m - 1]) * self.inv_3h2;
        emit(m - 1, ds, dss, &mut min_dphi, &mut min_node);
        (min_dphi, min_node)
    }
}

/// Flow velocity of a profile, faces anchored to its recorded values.
pub fn reduced_rhs<F: Real>(p: &Profile<F>, n: u32) -> Result<Vec<F>, FlowError> {
    let stencil = Stencil::new(&p.grid);
    let mut out = vec![F::zero(); p.len()];
    let (min_dphi, j) = stencil.rhs(&p.phi, LeftFace::Anchored(p.a), p.b, n, &mut out);
    if !(min_dphi > F::zero()) {
        return Err(FlowError::DegenerateSlope {
            j,
            dphi: min_dphi.to_f64c(),
        });
    }
    Ok(out)
}
