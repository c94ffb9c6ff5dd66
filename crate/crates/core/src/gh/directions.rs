//! Direction samples on the space of complex lines.
//!
//! Projective distance between unit vectors is `2 arccos |<v, w>|`, so two
//! directions are at the full diameter `pi` exactly when the lines are
//! orthogonal. The set is built in pairs (each sample ships with an
//! orthogonal partner) so every ring of the metric graph realizes its true
//! diameter; without that the sampled sphere diameters would all be biased
//! low by the covering gap.

use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit vectors in `C^n`, coordinates stored as `(re, im)`.
pub struct DirectionSet<F> {
    pub vectors: Vec<Vec<(F, F)>>,
}

fn inner<F: Real>(v: &[(F, F)], w: &[(F, F)]) -> (F, F) {
    // conj(v) . w
    let mut re = F::zero();
    let mut im = F::zero();
    for ((a, b), (c, d)) in v.iter().zip(w) {
        re = re + *a * *c + *b * *d;
        im = im + *a * *d - *b * *c;
    }
    (re, im)
}

fn scale<F: Real>(v: &mut [(F, F)], k: F) {
    for (a, b) in v.iter_mut() {
        *a = *a * k;
        *b = *b * k;
    }
}

fn norm<F: Real>(v: &[(F, F)]) -> F {
    let (re, _) = inner(v, v);
    re.sqrt()
}

impl<F: Real> DirectionSet<F> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `2 arccos |<v_i, v_j>|`, the projective distance with diameter pi.
    pub fn distance(&self, i: usize, j: usize) -> F {
        let (re, im) = inner(&self.vectors[i], &self.vectors[j]);
        let m = (re * re + im * im).sqrt().min(F::one());
        F::of(2.0) * m.acos()
    }

    pub fn pairwise(&self) -> Vec<Vec<F>> {
        let m = self.len();
        let mut out = vec![vec![F::zero(); m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = self.distance(i, j);
                out[i][j] = d;
                out[j][i] = d;
            }
        }
        out
    }

    /// Largest nearest-neighbor gap; the angular resolution of the set.
    pub fn packing_gap(&self) -> F {
        let d = self.pairwise();
        let m = self.len();
        let mut worst = F::zero();
        for i in 0..m {
            let mut nearest = F::infinity();
            for j in 0..m {
                if j != i && d[i][j] < nearest {
                    nearest = d[i][j];
                }
            }
            if nearest > worst {
                worst = nearest;
            }
        }
        worst
    }
}

/// `m` directions in `C^n` (`m` even): `m/2` well-spread samples, each
/// followed by an orthogonal partner. For `n = 2` the samples follow the
/// golden-angle spiral on the sphere of lines; higher `n` draws seeded
/// complex Gaussians.
pub fn direction_set<F: Real>(n: u32, m: usize, seed: u64) -> DirectionSet<F> {
    assert!(n >= 2, "directions live in C^n with n >= 2");
    assert!(m >= 2 && m % 2 == 0, "direction count must be even");
    let half = m / 2;
    let mut vectors: Vec<Vec<(F, F)>> = Vec::with_capacity(m);
    if n == 2 {
        // Lines in C^2 form a round sphere; spread points along the
        // golden-angle spiral and lift each through the circle fibration:
        // (theta, az) -> (cos(theta/2), sin(theta/2) e^{i az}). The
        // orthogonal partner is (-conj(z2), conj(z1)), the antipode.
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        for i in 0..half {
            let cos_theta = 1.0 - (2.0 * i as f64 + 1.0) / half as f64;
            let theta = cos_theta.clamp(-1.0, 1.0).acos();
            let az = golden * i as f64;
            let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let z1 = (F::of(ct), F::zero());
            let z2 = (F::of(st * az.cos()), F::of(st * az.sin()));
            vectors.push(vec![z1, z2]);
            vectors.push(vec![(-z2.0, z2.1), (z1.0, -z1.1)]);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaussian_vector = |rng: &mut ChaCha8Rng| -> Vec<(F, F)> {
            let mut v: Vec<(F, F)> = (0..n)
                .map(|_| {
                    let (u1, u2): (f64, f64) = (rng.gen::<f64>(), rng.gen::<f64>());
                    let r = (-2.0 * u1.max(1e-300).ln()).sqrt();
                    let ang = 2.0 * std::f64::consts::PI * u2;
                    (F::of(r * ang.cos()), F::of(r * ang.sin()))
                })
                .collect();
            let k = norm(&v);
            scale(&mut v, F::one() / k);
            v
        };
        for _ in 0..half {
            let v = gaussian_vector(&mut rng);
            // Partner: a fresh draw projected off v, renormalized.
            let mut w;
            loop {
                w = gaussian_vector(&mut rng);
                let (re, im) = inner(&v, &w);
                for i in 0..n as usize {
                    let (a, b) = v[i];
                    // w -= <v, w> v  (complex multiply (re + i im)(a + i b))
                    w[i].0 = w[i].0 - (re * a - im * b);
                    w[i].1 = w[i].1 - (re * b + im * a);
                }
                let k = norm(&w);
                if k > F::of(1e-6) {
                    scale(&mut w, F::one() / k);
                    break;
                }
            }
            vectors.push(v);
            vectors.push(w);
        }
    }
    DirectionSet { vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn check_set(dirs: &DirectionSet<f64>, m: usize) {
        assert_eq!(dirs.len(), m);
        for v in &dirs.vectors {
            assert_relative_eq!(norm(v), 1.0, epsilon = 1e-12);
        }
        // Every consecutive pair is orthogonal: distance exactly pi.
        for i in (0..m).step_by(2) {
            assert_relative_eq!(
                dirs.distance(i, i + 1),
                std::f64::consts::PI,
                epsilon = 1e-7
            );
        }
        let d = dirs.pairwise();
        let mut max = 0.0f64;
        for i in 0..m {
            assert_eq!(d[i][i], 0.0);
            for j in 0..m {
                assert_eq!(d[i][j], d[j][i]);
                max = max.max(d[i][j]);
            }
        }
        assert_relative_eq!(max, std::f64::consts::PI, epsilon = 1e-7);
        assert!(dirs.packing_gap() > 0.0 && dirs.packing_gap() < std::f64::consts::PI);
    }

    #[test]
    fn surface_directions_are_complete_and_spread() {
        let dirs: DirectionSet<f64> = direction_set(2, 24, 7);
        check_set(&dirs, 24);
        // Golden-angle spread: nearest-neighbor gaps stay moderate.
        assert!(dirs.packing_gap() < 1.5, "gap {}", dirs.packing_gap());
    }

    #[test]
    fn higher_dimensional_directions_are_complete() {
        let dirs: DirectionSet<f64> = direction_set(3, 16, 7);
        check_set(&dirs, 16);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a: DirectionSet<f64> = direction_set(3, 8, 42);
        let b: DirectionSet<f64> = direction_set(3, 8, 42);
        for (v, w) in a.vectors.iter().zip(&b.vectors) {
            assert_eq!(v, w);
        }
        let c: DirectionSet<f64> = direction_set(3, 8, 43);
        assert!(a.vectors != c.vectors);
    }
}
