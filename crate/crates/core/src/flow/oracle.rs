//! Independent cross-check of the reduced velocity.
//!
//! The reduced equation rests on the identity
//!
//!   log det g = log(phi' phi^{n-1}) - n rho
//!
//! for the metric of the potential `U(z) = u(log |z|^2)`. This module
//! evaluates the left side with no reductions at all: it builds the full
//! `n x n` complex Hessian `dd U / dz_i dzbar_j` by central finite
//! differences in the `2n` real chart coordinates and takes the log
//! determinant. Differentiating the result in `rho` recovers the flow
//! velocity, which the stencil evaluation must match.

/// `log det` of the complex Hessian of `u(log |z|^2)` at the slice point
/// `z = (e^{rho/2}, 0, ..., 0)`.
pub fn oracle_logdet(u: &dyn Fn(f64) -> f64, n: u32, rho: f64) -> f64 {
    let n = n as usize;
    assert!(n >= 1);
    let x = (0.5 * rho).exp();
    let eval = |pt: &[f64]| -> f64 {
        let r2: f64 = pt.iter().map(|&c| c * c).sum();
        u(r2.ln())
    };
    // Real coordinates: index i in [0, n) is Re z_i, n + i is Im z_i.
    let dim = 2 * n;
    let mut base = vec![0.0; dim];
    base[0] = x;
    let h = 1e-3 * (1.0 + x);
    let u0 = eval(&base);
    let second = |p: usize, q: usize| -> f64 {
        let mut pt = base.clone();
        if p == q {
            pt[p] = base[p] + h;
            let up = eval(&pt);
            pt[p] = base[p] - h;
            let um = eval(&pt);
            (up - 2.0 * u0 + um) / (h * h)
        } else {
            let mut corner = |sp: f64, sq: f64| -> f64 {
                pt[p] = base[p] + sp * h;
                pt[q] = base[q] + sq * h;
                let v = eval(&pt);
                pt[p] = base[p];
                pt[q] = base[q];
                v
            };
            (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h * h)
        }
    };
    // H_ij = (1/4) [ (U_{ai aj} + U_{bi bj}) + i (U_{ai bj} - U_{bi aj}) ].
    let mut hess = vec![vec![(0.0f64, 0.0f64); n]; n];
    for i in 0..n {
        for j in 0..n {
            let re = 0.25 * (second(i, j) + second(n + i, n + j));
            let im = 0.25 * (second(i, n + j) - second(n + i, j));
            hess[i][j] = (re, im);
        }
    }
    complex_log_abs_det(hess)
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

/// `log |det|` by LU with partial pivoting; the Hessians fed in are
/// Hermitian positive definite, so this is the honest `log det`.
fn complex_log_abs_det(mut m: Vec<Vec<(f64, f64)>>) -> f64 {
    let n = m.len();
    let mut acc = 0.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                let mi = m[i][k].0.hypot(m[i][k].1);
                let mj = m[j][k].0.hypot(m[j][k].1);
                mi.partial_cmp(&mj).unwrap()
            })
            .unwrap();
        m.swap(k, pivot);
        let d = m[k][k];
        acc += d.0.hypot(d.1).ln();
        for i in k + 1..n {
            let f = cdiv(m[i][k], d);
            for j in k + 1..n {
                let s = cmul(f, m[k][j]);
                m[i][j].0 -= s.0;
                m[i][j].1 -= s.1;
            }
        }
    }
    acc
}

/// Reduced form of the same quantity from closed-form `phi` and `phi'`.
pub fn reduced_logdet(phi: f64, dphi: f64, n: u32, rho: f64) -> f64 {
    (dphi * phi.powi(n as i32 - 1)).ln() - n as f64 * rho
}

/// Potential `u(rho)` with `u' = alpha + beta s + gamma s^2`,
/// `s = e^rho/(1+e^rho)`; the polynomial test family for the stencils.
pub fn quadratic_potential(alpha: f64, beta: f64, gamma: f64) -> impl Fn(f64) -> f64 {
    move |rho: f64| {
        let s = 1.0 / (1.0 + (-rho).exp());
        alpha * rho - (beta + gamma) * (1.0 - s).ln() - gamma * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_hessian_is_identity() {
        // u = e^rho gives U = |z|^2 with unit Hessian: log det 0.
        let u = |rho: f64| rho.exp();
        for n in [1u32, 2, 3] {
            for rho in [-1.0, 0.0, 0.7] {
                let ld = oracle_logdet(&u, n, rho);
                assert!(ld.abs() < 2e-7, "n={n} rho={rho}: {ld}");
            }
        }
    }

    #[test]
    fn cone_potential_matches_reduced_form() {
        // u = b log(1 + e^rho) has phi = b s.
        let b = 4.0;
        let u = move |rho: f64| b * (1.0 + rho.exp()).ln();
        for n in [2u32, 3] {
            for rho in [-2.0f64, -0.3, 0.0, 1.5] {
                let s = 1.0 / (1.0 + (-rho).exp());
                let want = reduced_logdet(b * s, b * s * (1.0 - s), n, rho);
                let got = oracle_logdet(&u, n, rho);
                // Truncation of the second differences grows with the step
                // h = 1e-3 (1 + |z|); 5e-5 holds out to rho = 2.
                assert_relative_eq!(got, want, epsilon = 5e-5, max_relative = 5e-5);
            }
        }
    }

    #[test]
    fn quadratic_family_matches_reduced_form() {
        let (alpha, beta, gamma) = (0.8, 2.0, 0.6);
        let u = quadratic_potential(alpha, beta, gamma);
        for n in [2u32, 3] {
            for rho in [-2.5f64, -1.0, 0.0, 0.8, 2.0] {
                let s = 1.0 / (1.0 + (-rho).exp());
                let phi = alpha + beta * s + gamma * s * s;
                let dphi = s * (1.0 - s) * (beta + 2.0 * gamma * s);
                let want = reduced_logdet(phi, dphi, n, rho);
                let got = oracle_logdet(&u, n, rho);
                assert_relative_eq!(got, want, epsilon = 5e-5, max_relative = 5e-5);
            }
        }
    }

    #[test]
    fn rho_derivative_of_logdet_is_the_velocity() {
        // Five-point derivative of the oracle in rho against the closed
        // form of the reduced velocity, quadratic family, n = 2.
        let (alpha, beta, gamma) = (0.5, 1.5, 0.4);
        let u = quadratic_potential(alpha, beta, gamma);
        let n = 2u32;
        let d = 0.05;
        for rho in [-1.0, 0.0, 0.9] {
            let ld = |r: f64| oracle_logdet(&u, n, r);
            let deriv = (-ld(rho + 2.0 * d) + 8.0 * ld(rho + d) - 8.0 * ld(rho - d)
                + ld(rho - 2.0 * d))
                / (12.0 * d);
            let s = 1.0 / (1.0 + (-rho).exp());
            let c = s * (1.0 - s);
            let phi = alpha + beta * s + gamma * s * s;
            let dphi = c * (beta + 2.0 * gamma * s);
            let ddphi = c * c * 2.0 * gamma + c * (1.0 - 2.0 * s) * (beta + 2.0 * gamma * s);
            let want = ddphi / dphi + (n - 1) as f64 * dphi / phi - n as f64;
            assert_relative_eq!(deriv, want, epsilon = 5e-5, max_relative = 5e-5);
        }
    }
}
