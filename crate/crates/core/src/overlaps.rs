//! The four overlap integrals κ, γ, β, δ that fix the whole estimation problem.

use crate::error::{Error, Result};
use crate::psf::{PointSpreadFunction, SourceGeometry};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::scalar::Real;

/// κ = ∫ψ'², γ = ∫ψ'(x)ψ(x-θ₂), β = ∫ψ'(x)ψ'(x-θ₂), δ = ∫ψ(x)ψ(x-θ₂).
///
/// κ, γ, β carry units of length⁻²; δ is dimensionless. `delta_complement` holds 1 - δ
/// computed without cancellation, which the state model needs at small separations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapIntegrals<T> {
    pub kappa: T,
    pub gamma: T,
    pub beta: T,
    pub delta: T,
    pub delta_complement: T,
}

impl<T: Real> OverlapIntegrals<T> {
    /// Overlaps with 1 - δ formed by plain subtraction.
    pub fn new(kappa: T, gamma: T, beta: T, delta: T) -> Self {
        Self {
            kappa,
            gamma,
            beta,
            delta,
            delta_complement: T::one() - delta,
        }
    }

    /// Checks κ > 0, |δ| ≤ 1, κ ≥ γ² and β² ≤ κ(κ-γ²), up to roundoff.
    pub fn validate(&self) -> Result<()> {
        let Self {
            kappa,
            gamma,
            beta,
            delta,
            delta_complement,
        } = *self;
        let finite = [kappa, gamma, beta, delta].iter().all(|v| v.is_finite());
        if !finite || !(kappa > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "overlaps must be finite with kappa > 0, got {self:?}"
            )));
        }
        let slack = crate::scalar::scaled_tolerance(1e-12, T::one());
        if delta.abs() > T::one() + slack {
            return Err(Error::InvalidInput(format!(
                "|delta| = {} exceeds 1",
                delta.abs()
            )));
        }
        if (delta_complement - (T::one() - delta)).abs() > T::lit(4.0) * slack {
            return Err(Error::InvalidInput(format!(
                "delta_complement = {delta_complement} disagrees with 1 - delta = {}",
                T::one() - delta
            )));
        }
        let k2 = kappa * kappa;
        let gap = kappa - gamma * gamma;
        if gap < -crate::scalar::scaled_tolerance(1e-12, kappa) {
            return Err(Error::InvalidInput(format!(
                "kappa - gamma^2 = {gap} is negative"
            )));
        }
        if beta * beta - kappa * gap > crate::scalar::scaled_tolerance(1e-10, k2) {
            return Err(Error::InvalidInput(format!(
                "beta^2 = {} exceeds kappa(kappa - gamma^2) = {}",
                beta * beta,
                kappa * gap
            )));
        }
        Ok(())
    }
}

/// Integration window for a PSF centred at the origin: at least ±Rσ, widened to cover
/// the sampled range of a user-defined profile.
fn psf_window<T: Real>(psf: &PointSpreadFunction<T>, quad: &QuadratureSpec) -> (T, T) {
    let r = T::lit(quad.truncation_radius) * psf.sigma();
    let knots = psf.knots();
    match (knots.first(), knots.last()) {
        (Some(&a), Some(&b)) => (a.min(-r), b.max(r)),
        _ => (-r, r),
    }
}

/// |∫ψ² - 1|.
pub fn check_normalization<T: Real>(
    psf: &PointSpreadFunction<T>,
    quad: &QuadratureSpec,
) -> Result<T> {
    let (lo, hi) = psf_window(psf, quad);
    let [norm] = integrate(
        |x| {
            let v = psf.eval(x);
            [v * v]
        },
        lo,
        hi,
        psf.sigma(),
        &psf.knots(),
        quad,
    )?;
    Ok((norm - T::one()).abs())
}

/// Overlap integrals by composite quadrature over [X₁ - Rσ, X₂ + Rσ].
pub fn overlap_integrals<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    quad: &QuadratureSpec,
) -> Result<OverlapIntegrals<T>> {
    let (x1, x2) = (geometry.x1(), geometry.x2());
    let (lo, hi) = psf_window(psf, quad);
    let knots = psf.knots();
    let breaks: Vec<T> = knots
        .iter()
        .map(|&k| k + x1)
        .chain(knots.iter().map(|&k| k + x2))
        .collect();
    let half = T::lit(0.5);
    let [norm, kappa, gamma, beta, delta, delta_complement] = integrate(
        |x| {
            let (v1, d1) = psf.eval_with_derivative(x - x1);
            let (v2, d2) = psf.eval_with_derivative(x - x2);
            let diff = v1 - v2;
            [
                v1 * v1,
                d1 * d1,
                d1 * v2,
                d1 * d2,
                v1 * v2,
                half * diff * diff,
            ]
        },
        x1 + lo,
        x2 + hi,
        psf.sigma(),
        &breaks,
        quad,
    )?;
    let residual = (norm - T::one()).abs().as_f64();
    let tolerance = 10.0 * quad.abs_tolerance;
    if residual > tolerance {
        return Err(Error::Normalization {
            residual,
            tolerance,
        });
    }
    // ½∫(ψ₁-ψ₂)² = ∫ψ² - δ; shifting by the normalization residual gives 1 - δ
    Ok(OverlapIntegrals {
        kappa,
        gamma,
        beta,
        delta,
        delta_complement: delta_complement + (T::one() - norm),
    })
}

/// Closed forms for the Gaussian PSF.
pub fn gaussian_overlap_integrals<T: Real>(sigma: T, theta2: T) -> Result<OverlapIntegrals<T>> {
    if !(sigma > T::zero()) || !(theta2 > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "sigma and theta2 must be positive, got sigma = {sigma}, theta2 = {theta2}"
        )));
    }
    let s2 = sigma * sigma;
    let exponent = -(theta2 * theta2) / (T::lit(8.0) * s2);
    let decay = exponent.exp();
    Ok(OverlapIntegrals {
        kappa: T::one() / (T::lit(4.0) * s2),
        gamma: -theta2 / (T::lit(4.0) * s2) * decay,
        beta: -(theta2 * theta2 - T::lit(4.0) * s2) / (T::lit(16.0) * s2 * s2) * decay,
        delta: decay,
        delta_complement: -exponent.exp_m1(),
    })
}

/// S(d) = ∫ψ(u)ψ(u-d) and G(d) = ∫ψ'(u)ψ(u-d) at an arbitrary displacement `d`.
pub(crate) fn displaced_overlaps<T: Real>(
    psf: &PointSpreadFunction<T>,
    d: T,
    quad: &QuadratureSpec,
) -> Result<(T, T)> {
    let (lo, hi) = psf_window(psf, quad);
    let knots = psf.knots();
    let breaks: Vec<T> = knots
        .iter()
        .copied()
        .chain(knots.iter().map(|&k| k + d))
        .collect();
    let [s, g] = integrate(
        |u| {
            let (v, dv) = psf.eval_with_derivative(u);
            let w = psf.eval(u - d);
            [v * w, dv * w]
        },
        lo + d.min(T::zero()),
        hi + d.max(T::zero()),
        psf.sigma(),
        &breaks,
        quad,
    )?;
    Ok((s, g))
}
