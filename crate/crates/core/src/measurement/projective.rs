//! Orthogonal projective measurements on the four-dimensional support subspace.

use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{OutcomeKind, ProbabilityModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::StateModel4;

/// Standard normals consumed per 4x4 Haar sample (row-major fill).
pub const NORMALS_PER_SAMPLE: usize = 16;

/// Rows are the measurement vectors in the e₁..e₄ basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement4<T: Real> {
    pub matrix: Matrix4<T>,
    /// Provenance tag: the RNG stream that produced the matrix.
    pub seed: u64,
}

impl<T: Real> ProjectiveMeasurement4<T> {
    /// Measurement in the e₁..e₄ basis itself.
    pub fn identity() -> Self {
        Self {
            matrix: Matrix4::identity(),
            seed: 0,
        }
    }

    /// Wraps a matrix after checking OᵀO = I.
    pub fn from_matrix(matrix: Matrix4<T>, seed: u64) -> Result<Self> {
        let defect = (matrix.transpose() * matrix - Matrix4::identity())
            .abs()
            .max();
        if defect > crate::scalar::scaled_tolerance(1e-12, T::one()) {
            return Err(Error::InvalidInput(format!(
                "measurement matrix is not orthogonal (max |OᵀO - I| = {defect})"
            )));
        }
        Ok(Self { matrix, seed })
    }

    /// Haar-random measurement drawn from `rng`.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R, seed: u64) -> Self {
        let o = haar_random_orthogonal::<T, R>(rng, 4);
        Self {
            matrix: Matrix4::from_fn(|i, j| o[(i, j)]),
            seed,
        }
    }
}

/// RNG for sample `index` of a run seeded with `master_seed`.
///
/// Each sample owns a ChaCha20 stream, so results do not depend on how samples are
/// spread across workers.
pub fn sample_stream(master_seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the columns of Q
/// rescaled by the signs of diag(R).
pub fn haar_random_orthogonal<T: Real, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<T> {
    assert!(dim >= 2, "Haar sampling needs dim >= 2");
    let mut g = DMatrix::<T>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            g[(i, j)] = T::lit(z);
        }
    }
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// p(k) = (OρOᵀ)ₖₖ and ∂p(k)/∂θⱼ = (O ∂ⱼρ Oᵀ)ₖₖ.
pub fn projective_model<T: Real>(
    state: &StateModel4<T>,
    meas: &ProjectiveMeasurement4<T>,
) -> ProbabilityModel<T> {
    let o = &meas.matrix;
    let [d1, d2] = state.rho_derivatives();
    let diag = |m: &Matrix4<T>| -> Vec<T> {
        let t = o * m * o.transpose();
        (0..4).map(|k| t[(k, k)]).collect()
    };
    ProbabilityModel {
        outcome_kind: OutcomeKind::SubspaceProjectors,
        probabilities: diag(&state.rho)
            .into_iter()
            .map(|p| p.max(T::zero()))
            .collect(),
        weights: None,
        dp_dtheta1: diag(&d1),
        dp_dtheta2: diag(&d2),
        truncated_mass: T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{fim, regret_report};
    use crate::overlaps::gaussian_overlap_integrals;
    use crate::state::{build_state_model, qfim};
    use approx::assert_relative_eq;

    #[test]
    fn haar_samples_are_orthogonal() {
        let mut rng = sample_stream(7, 0);
        for _ in 0..200 {
            let o = haar_random_orthogonal::<f64, _>(&mut rng, 4);
            let defect = (o.transpose() * &o - DMatrix::identity(4, 4)).abs().max();
            assert!(defect < 1e-12);
            assert!((o.determinant().abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_first_entry_is_uniform_on_sphere() {
        // |O₁₁|² ~ Beta(1/2, 3/2): mean 1/4, variance 3/80
        let n = 10_000;
        let mut rng = sample_stream(2024, 3);
        let mean: f64 = (0..n)
            .map(|_| haar_random_orthogonal::<f64, _>(&mut rng, 4)[(0, 0)].powi(2))
            .sum::<f64>()
            / n as f64;
        let se = (3.0f64 / 80.0 / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = haar_random_orthogonal::<f64, _>(&mut sample_stream(1, 5), 4);
        let b = haar_random_orthogonal::<f64, _>(&mut sample_stream(1, 5), 4);
        let c = haar_random_orthogonal::<f64, _>(&mut sample_stream(1, 6), 4);
        let d = haar_random_orthogonal::<f64, _>(&mut sample_stream(2, 5), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn identity_measurement_reads_rho_diagonal() {
        let o = gaussian_overlap_integrals(1.0_f64, 1.0).unwrap();
        let s = build_state_model(&o).unwrap();
        let m = projective_model(&s, &ProjectiveMeasurement4::identity());
        assert_relative_eq!(m.probabilities[0], (1.0 - o.delta) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(m.probabilities[1], (1.0 + o.delta) / 2.0, epsilon = 1e-15);
        assert_eq!(&m.probabilities[2..], &[0.0, 0.0]);
        m.validate().unwrap();
        fim(&m).unwrap();
    }

    #[test]
    fn permutation_permutes_probabilities() {
        let o = gaussian_overlap_integrals(1.0_f64, 0.7).unwrap();
        let s = build_state_model(&o).unwrap();
        let base = projective_model(&s, &ProjectiveMeasurement4::identity());
        let perm = [2usize, 0, 3, 1];
        let p = Matrix4::from_fn(|i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let meas = ProjectiveMeasurement4::from_matrix(p, 0).unwrap();
        let m = projective_model(&s, &meas);
        for (k, &src) in perm.iter().enumerate() {
            assert_eq!(m.probabilities[k], base.probabilities[src]);
            assert_eq!(m.dp_dtheta2[k], base.dp_dtheta2[src]);
        }
    }

    #[test]
    fn non_orthogonal_matrix_is_rejected() {
        let m = Matrix4::from_diagonal_element(1.1);
        assert!(ProjectiveMeasurement4::from_matrix(m, 0).is_err());
    }

    #[test]
    fn random_measurements_respect_quantum_bound() {
        let o = gaussian_overlap_integrals(1.0_f64, 0.5).unwrap();
        let s = build_state_model(&o).unwrap();
        let q = qfim(&o);
        for i in 0..500 {
            let meas = ProjectiveMeasurement4::haar(&mut sample_stream(11, i), i);
            let m = projective_model(&s, &meas);
            let total: f64 = m.probabilities.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
            let [t1, t2] = m.derivative_totals();
            assert!(t1.abs() < 1e-12 && t2.abs() < 1e-12);
            let f = fim(&m).unwrap();
            let r = regret_report(&f, &q).unwrap();
            assert!(r.min_regret_eigenvalue >= -1e-9);
        }
    }
}
