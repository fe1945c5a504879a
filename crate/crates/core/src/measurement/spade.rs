//! Spatial-mode demultiplexing in the Hermite-Gaussian basis of a Gaussian PSF.

use super::{OutcomeKind, ProbabilityModel};
use crate::error::{Error, Result};
use crate::psf::SourceGeometry;
use crate::scalar::Real;

/// Truncated probability mass the mode cutoff must stay below.
pub const SPADE_MASS_TARGET: f64 = 1e-14;
/// Largest number of modes the adaptive cutoff may use.
pub const SPADE_MAX_MODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeCutoff {
    /// Modes q = 0..=Q.
    Fixed(usize),
    /// Grow Q until the truncated mass drops below [`SPADE_MASS_TARGET`].
    Adaptive,
}

/// φ_q(x) = (2πσ²)^(-1/4) (2^q q!)^(-1/2) H_q(x/√2σ) exp(-x²/4σ²).
///
/// Uses the normalized recurrence h_{q+1} = √(2/(q+1)) u h_q - √(q/(q+1)) h_{q-1},
/// which never forms H_q or q! explicitly.
pub fn hermite_gaussian_wavefunction<T: Real>(q: usize, sigma: T, x: T) -> T {
    let u = x / (T::lit(2.0).sqrt() * sigma);
    let envelope = (T::two_pi() * sigma * sigma).powf(T::lit(-0.25))
        * (-(x * x) / (T::lit(4.0) * sigma * sigma)).exp();
    let mut prev = T::zero();
    let mut cur = envelope;
    for k in 0..q {
        let kf = T::from_usize_lossy(k);
        let next =
            (T::lit(2.0) / (kf + T::one())).sqrt() * u * cur - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Poisson-like weights t_q(α) = α^(2q) e^(-α²) / q! for q = 0..=last, built in log space.
fn mode_weights<T: Real>(alpha: T, last: usize) -> Vec<T> {
    let a2 = alpha * alpha;
    let mut out = Vec::with_capacity(last + 1);
    if a2 == T::zero() {
        out.push(T::one());
        out.resize(last + 1, T::zero());
        return out;
    }
    let log_a2 = a2.ln();
    let mut log_t = -a2;
    out.push(log_t.exp());
    for q in 1..=last {
        log_t += log_a2 - T::from_usize_lossy(q).ln();
        out.push(log_t.exp());
    }
    out
}

/// Upper bound on Σ_{q > last} t_q(α), or `None` when the ratio bound does not apply yet.
fn tail_bound<T: Real>(alpha: T, weights: &[T]) -> Option<T> {
    let last = weights.len() - 1;
    let a2 = alpha * alpha;
    let next_index = T::from_usize_lossy(last + 1);
    // t_{q+1}/t_q = α²/(q+1) ≤ α²/(last+2) for q > last
    let ratio = a2 / (next_index + T::one());
    if ratio >= T::one() {
        return None;
    }
    let next = weights[last] * a2 / next_index;
    Some(next / (T::one() - ratio))
}

/// SPADE outcome distribution p(q) = [t_q(α₁) + t_q(α₂)]/2, α = X/2σ.
pub fn spade_model<T: Real>(
    sigma: T,
    geometry: &SourceGeometry<T>,
    cutoff: ModeCutoff,
) -> Result<ProbabilityModel<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let two_sigma = T::lit(2.0) * sigma;
    let a1 = geometry.x1() / two_sigma;
    let a2 = geometry.x2() / two_sigma;
    let target = T::lit(SPADE_MASS_TARGET);
    let half = T::lit(0.5);

    let truncated = |last: usize| -> (Vec<T>, Vec<T>, Option<T>) {
        let w1 = mode_weights(a1, last);
        let w2 = mode_weights(a2, last);
        let mass = match (tail_bound(a1, &w1), tail_bound(a2, &w2)) {
            (Some(m1), Some(m2)) => Some(half * (m1 + m2)),
            _ => None,
        };
        (w1, w2, mass)
    };

    let (last, (w1, w2, mass)) = match cutoff {
        ModeCutoff::Fixed(last) => {
            if last + 1 > SPADE_MAX_MODES {
                return Err(Error::InvalidInput(format!(
                    "mode cutoff {last} exceeds the cap of {SPADE_MAX_MODES} modes"
                )));
            }
            (last, truncated(last))
        }
        ModeCutoff::Adaptive => {
            // start near the Poisson mean and grow geometrically
            let mean = a1.abs().max(a2.abs());
            let mut last = ((mean * mean).as_f64().ceil() as usize).clamp(1, SPADE_MAX_MODES - 1);
            loop {
                let t = truncated(last);
                if t.2.is_some_and(|m| m < target) || last + 1 >= SPADE_MAX_MODES {
                    break (last, t);
                }
                last = (last + last / 4 + 4).min(SPADE_MAX_MODES - 1);
            }
        }
    };
    let mass = match mass {
        Some(m) if m < target => m,
        other => {
            return Err(Error::Cutoff {
                cutoff: last,
                mass: other.map_or(f64::INFINITY, |m| m.as_f64()),
                target: SPADE_MASS_TARGET,
            })
        }
    };

    // dt_q/dα = 2α(t_{q-1} - t_q), with t_{-1} = 0
    let dweights = |alpha: T, w: &[T]| -> Vec<T> {
        let two_a = T::lit(2.0) * alpha;
        (0..w.len())
            .map(|q| two_a * (if q > 0 { w[q - 1] } else { T::zero() } - w[q]))
            .collect()
    };
    let dw1 = dweights(a1, &w1);
    let dw2 = dweights(a2, &w2);
    // ∂α₁/∂θ₁ = ∂α₂/∂θ₁ = 1/2σ, ∂α₁/∂θ₂ = -1/4σ, ∂α₂/∂θ₂ = 1/4σ
    let c1 = T::one() / two_sigma;
    let c2 = T::one() / (T::lit(2.0) * two_sigma);

    let n = last + 1;
    let mut probabilities = Vec::with_capacity(n);
    let mut dp_dtheta1 = Vec::with_capacity(n);
    let mut dp_dtheta2 = Vec::with_capacity(n);
    for q in 0..n {
        probabilities.push(half * (w1[q] + w2[q]));
        dp_dtheta1.push(half * c1 * (dw1[q] + dw2[q]));
        dp_dtheta2.push(half * c2 * (dw2[q] - dw1[q]));
    }
    Ok(ProbabilityModel {
        outcome_kind: OutcomeKind::DiscreteModes,
        probabilities,
        weights: None,
        dp_dtheta1,
        dp_dtheta2,
        truncated_mass: mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::fim;
    use crate::psf::PointSpreadFunction;
    use crate::quadrature::{integrate, QuadratureSpec};
    use approx::assert_relative_eq;

    #[test]
    fn ground_mode_is_the_psf() {
        let psf = PointSpreadFunction::gaussian(1.7_f64).unwrap();
        for x in [-3.0, 0.0, 0.4, 5.0] {
            assert_relative_eq!(
                hermite_gaussian_wavefunction(0, 1.7, x),
                psf.eval(x),
                epsilon = 1e-16
            );
        }
    }

    #[test]
    fn modes_are_orthonormal() {
        let spec = QuadratureSpec::default();
        for q in 0..=10 {
            for r in q..=10 {
                let [v] = integrate(
                    |x: f64| {
                        [hermite_gaussian_wavefunction(q, 1.0, x)
                            * hermite_gaussian_wavefunction(r, 1.0, x)]
                    },
                    -20.0,
                    20.0,
                    1.0,
                    &[],
                    &spec,
                )
                .unwrap();
                let expected = if q == r { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-8, "q = {q}, r = {r}: {v}");
            }
        }
    }

    #[test]
    fn mode_overlap_matches_poisson_weight() {
        let spec = QuadratureSpec::default();
        let psf = PointSpreadFunction::gaussian(1.0_f64).unwrap();
        let shift = 1.0;
        let mut factorial = 1.0;
        for q in 0..=5 {
            if q > 0 {
                factorial *= q as f64;
            }
            let [amp] = integrate(
                |x: f64| [hermite_gaussian_wavefunction(q, 1.0, x) * psf.eval(x - shift)],
                -20.0,
                20.0,
                1.0,
                &[],
                &spec,
            )
            .unwrap();
            let expected =
                (shift / 2.0f64).powi(2 * q as i32) * (-shift * shift / 4.0).exp() / factorial;
            assert_relative_eq!(amp * amp, expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn aligned_distribution_is_poisson() {
        let g = SourceGeometry::new(0.0, 0.1).unwrap();
        let m = spade_model(1.0_f64, &g, ModeCutoff::Adaptive).unwrap();
        let mean: f64 = (0.1_f64 / 4.0).powi(2);
        assert_relative_eq!(m.probabilities[0], (-mean).exp(), epsilon = 1e-16);
        assert_relative_eq!(
            m.probabilities[2],
            mean * mean / 2.0 * (-mean).exp(),
            max_relative = 1e-12
        );
        assert!(m.dp_dtheta1.iter().all(|d| d.abs() < 1e-18));
        m.validate().unwrap();
        assert!(m.centroid_information_vanishes(1e-15));
    }

    #[test]
    fn aligned_spade_is_separation_optimal() {
        for sigma in [0.5_f64, 1.0, 2.0] {
            let g = SourceGeometry::new(0.0, 0.1 * sigma).unwrap();
            let f = fim(&spade_model(sigma, &g, ModeCutoff::Adaptive).unwrap()).unwrap();
            let kappa = 1.0 / (4.0 * sigma * sigma);
            assert!((f[(1, 1)] - kappa).abs() < 1e-8 * kappa / 0.25);
            assert!(f[(0, 0)].abs() < 1e-20);
        }
    }

    #[test]
    fn far_field_limit() {
        let g = SourceGeometry::new(10.0, 1e-3).unwrap();
        let m = spade_model(1.0_f64, &g, ModeCutoff::Adaptive).unwrap();
        let w = mode_weights(5.0, m.len() - 1);
        let dev = m
            .probabilities
            .iter()
            .zip(&w)
            .fold(0.0f64, |acc, (p, t)| acc.max((p - t).abs()));
        assert!(dev < 1e-6, "{dev}");
        let g = SourceGeometry::new(5.0, 0.01).unwrap();
        let f = fim(&spade_model(1.0_f64, &g, ModeCutoff::Adaptive).unwrap()).unwrap();
        assert!((f[(0, 0)] - 1.0).abs() < 0.01);
    }

    #[test]
    fn cutoff_errors() {
        let g = SourceGeometry::new(3.0, 0.1).unwrap();
        assert!(matches!(
            spade_model(1.0_f64, &g, ModeCutoff::Fixed(3)),
            Err(Error::Cutoff { .. })
        ));
        assert!(spade_model(1.0_f64, &g, ModeCutoff::Fixed(60)).is_ok());
        let g = SourceGeometry::new(60.0, 0.1).unwrap();
        assert!(matches!(
            spade_model(1.0_f64, &g, ModeCutoff::Adaptive),
            Err(Error::Cutoff { .. })
        ));
    }

    #[test]
    fn large_misalignment_stays_finite() {
        let g = SourceGeometry::new(30.0, 0.1).unwrap();
        let m = spade_model(1.0_f64, &g, ModeCutoff::Adaptive).unwrap();
        m.validate().unwrap();
        let f = fim(&m).unwrap();
        assert!(f.iter().all(|v| v.is_finite()));
    }
}
