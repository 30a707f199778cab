//! Seeded smooth perturbations of the `ω` data.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::ScalarField;
use crate::mesh::build_structured_mesh;
use crate::quadrature::{integrate_triangle, TriangleRule};

/// Modes per direction of the cosine series.
pub const NOISE_MODES: usize = 8;

/// Mesh on which `‖q_δ‖_{L²(ω)}` is normalized; a multiple of 20 so that the
/// flagged region is exactly `ω`.
pub const NOISE_REFERENCE_MESH: usize = 80;

/// `q_δ(x, y) = s Σ_{k,l < 8} c_kl cos(kπx) cos(lπy)` with `c_kl ~ U(−1, 1)`
/// drawn from a ChaCha8 stream, scaled so that its L²(ω) norm is `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseField {
    coefficients: Vec<f64>,
    scale: f64,
}

impl NoiseField {
    pub fn new(delta: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients: Vec<f64> = (0..NOISE_MODES * NOISE_MODES)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut field = Self {
            coefficients,
            scale: 1.0,
        };
        if delta == 0.0 {
            field.scale = 0.0;
        } else {
            let norm = omega_l2_norm(&field);
            field.scale = delta / norm;
        }
        field
    }

    fn raw(&self, x: f64, y: f64) -> f64 {
        let cx: Vec<f64> = (0..NOISE_MODES).map(|k| (k as f64 * PI * x).cos()).collect();
        let cy: Vec<f64> = (0..NOISE_MODES).map(|l| (l as f64 * PI * y).cos()).collect();
        let mut acc = 0.0;
        for (row, ck) in self.coefficients.chunks_exact(NOISE_MODES).zip(&cx) {
            for (c, cl) in row.iter().zip(&cy) {
                acc += c * ck * cl;
            }
        }
        acc
    }
}

impl ScalarField for NoiseField {
    fn value(&self, x: f64, y: f64) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.scale * self.raw(x, y)
        }
    }
}

/// `‖g‖_{L²(ω)}` on the reference mesh.
pub fn omega_l2_norm(g: &dyn ScalarField) -> f64 {
    let mesh = build_structured_mesh(NOISE_REFERENCE_MESH).expect("reference mesh size is valid");
    let rule = TriangleRule::degree4();
    (0..mesh.triangles.len())
        .filter(|&t| mesh.omega_flags[t])
        .map(|t| integrate_triangle(|p| g.value(p[0], p[1]).powi(2), &mesh.triangle_points(t), &rule))
        .sum::<f64>()
        .sqrt()
}

/// Data `q + q_δ`.
pub struct NoisyData<'a> {
    pub base: &'a dyn ScalarField,
    pub noise: NoiseField,
}

impl ScalarField for NoisyData<'_> {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.base.value(x, y) + self.noise.value(x, y)
    }
}

pub fn add_noise(q: &dyn ScalarField, delta: f64, seed: u64) -> NoisyData<'_> {
    NoisyData {
        base: q,
        noise: NoiseField::new(delta, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_leaves_data_unchanged() {
        let q = |x: f64, y: f64| x + 2.0 * y;
        let noisy = add_noise(&q, 0.0, 7);
        for &(x, y) in &[(0.1, 0.2), (0.9, 0.95)] {
            assert_eq!(noisy.value(x, y), q(x, y));
        }
    }

    #[test]
    fn norm_is_rescaled_to_delta() {
        for delta in [1e-3, 0.5] {
            let noise = NoiseField::new(delta, 42);
            assert!((omega_l2_norm(&noise) - delta).abs() < 1e-10 * delta.max(1.0));
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let a = NoiseField::new(0.1, 3);
        let b = NoiseField::new(0.1, 3);
        assert_eq!(a, b);
        assert_eq!(a.value(0.3, 0.4).to_bits(), b.value(0.3, 0.4).to_bits());
        assert_ne!(a, NoiseField::new(0.1, 4));
    }
}
