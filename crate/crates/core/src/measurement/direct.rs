//! Direct imaging: photon position density p(ω) = ½[ψ(ω-X₁)² + ψ(ω-X₂)²].

use nalgebra::Matrix2;

use super::{fim, OutcomeKind, ProbabilityModel};
use crate::error::{Error, Result};
use crate::psf::{PointSpreadFunction, SourceGeometry};
use crate::quadrature::{refine, GaussLegendre, QuadratureGrid, QuadratureSpec};
use crate::scalar::Real;

fn window<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    quad: &QuadratureSpec,
) -> (T, T, Vec<T>) {
    let (x1, x2) = (geometry.x1(), geometry.x2());
    let r = T::lit(quad.truncation_radius) * psf.sigma();
    let knots = psf.knots();
    let lo = knots.first().map_or(-r, |&k| k.min(-r));
    let hi = knots.last().map_or(r, |&k| k.max(r));
    let breaks = knots
        .iter()
        .map(|&k| k + x1)
        .chain(knots.iter().map(|&k| k + x2))
        .collect();
    (x1 + lo, x2 + hi, breaks)
}

/// Density and its (θ₁, θ₂) derivatives at image position `w`.
fn density<T: Real>(psf: &PointSpreadFunction<T>, x1: T, x2: T, w: T) -> [T; 3] {
    let half = T::lit(0.5);
    let (v1, d1) = psf.eval_with_derivative(w - x1);
    let (v2, d2) = psf.eval_with_derivative(w - x2);
    let p = half * (v1 * v1 + v2 * v2);
    // ∂p/∂Xⱼ = -ψ(ω-Xⱼ)ψ'(ω-Xⱼ); X₁ = θ₁ - θ₂/2, X₂ = θ₁ + θ₂/2
    let dx1 = -v1 * d1;
    let dx2 = -v2 * d2;
    [p, dx1 + dx2, half * (dx2 - dx1)]
}

fn model_on_grid<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    grid: QuadratureGrid<T>,
) -> ProbabilityModel<T> {
    let (x1, x2) = (geometry.x1(), geometry.x2());
    let n = grid.len();
    let mut probabilities = Vec::with_capacity(n);
    let mut dp_dtheta1 = Vec::with_capacity(n);
    let mut dp_dtheta2 = Vec::with_capacity(n);
    for &w in &grid.nodes {
        let [p, d1, d2] = density(psf, x1, x2, w);
        probabilities.push(p);
        dp_dtheta1.push(d1);
        dp_dtheta2.push(d2);
    }
    let mut model = ProbabilityModel {
        outcome_kind: OutcomeKind::ContinuumGrid,
        probabilities,
        weights: Some(grid.weights),
        dp_dtheta1,
        dp_dtheta2,
        truncated_mass: T::zero(),
    };
    model.truncated_mass = (T::one() - model.total_probability()).max(T::zero());
    model
}

/// Continuum direct-imaging model on the base quadrature grid of `quad`.
pub fn direct_imaging_model<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    quad: &QuadratureSpec,
) -> Result<ProbabilityModel<T>> {
    quad.validate()?;
    let (lo, hi, breaks) = window(psf, geometry, quad);
    let rule = GaussLegendre::new(quad.nodes_per_panel);
    let grid = QuadratureGrid::composite(&rule, lo, hi, psf.sigma(), &breaks, quad, 0);
    Ok(model_on_grid(psf, geometry, grid))
}

/// Direct-imaging FIM with panel doubling until every entry converges.
pub fn direct_imaging_fim<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    quad: &QuadratureSpec,
) -> Result<Matrix2<T>> {
    let (lo, hi, breaks) = window(psf, geometry, quad);
    let mut failure = None;
    let [f11, f12, f22] = refine(quad, |level, rule| {
        let grid = QuadratureGrid::composite(rule, lo, hi, psf.sigma(), &breaks, quad, level);
        match fim(&model_on_grid(psf, geometry, grid)) {
            Ok(f) => [f[(0, 0)], f[(0, 1)], f[(1, 1)]],
            Err(e) => {
                failure.get_or_insert(e);
                [T::zero(); 3]
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Matrix2::new(f11, f12, f12, f22))
}

/// Binned detector: pixel k collects ∫ p over [k·w, (k+1)·w).
pub fn direct_imaging_pixelated<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    bin_width: T,
    quad: &QuadratureSpec,
) -> Result<ProbabilityModel<T>> {
    quad.validate()?;
    if !(bin_width > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let (lo, hi, breaks) = window(psf, geometry, quad);
    let (x1, x2) = (geometry.x1(), geometry.x2());
    let first = (lo / bin_width).floor();
    let last = (hi / bin_width).ceil();
    let bins = (last - first).as_f64() as usize;
    let rule = GaussLegendre::new(quad.nodes_per_panel);

    let mut probabilities = Vec::with_capacity(bins);
    let mut dp_dtheta1 = Vec::with_capacity(bins);
    let mut dp_dtheta2 = Vec::with_capacity(bins);
    for k in 0..bins {
        let a = (first + T::from_usize_lossy(k)) * bin_width;
        let b = a + bin_width;
        let grid = QuadratureGrid::composite(&rule, a, b, psf.sigma(), &breaks, quad, 0);
        let [p, d1, d2] = grid.integrate(|w| density(psf, x1, x2, w));
        probabilities.push(p.max(T::zero()));
        dp_dtheta1.push(d1);
        dp_dtheta2.push(d2);
    }
    let mut model = ProbabilityModel {
        outcome_kind: OutcomeKind::PixelBins,
        probabilities,
        weights: None,
        dp_dtheta1,
        dp_dtheta2,
        truncated_mass: T::zero(),
    };
    model.truncated_mass = (T::one() - model.total_probability()).max(T::zero());
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlaps::gaussian_overlap_integrals;
    use crate::state::qfim;

    fn setup(
        theta2: f64,
    ) -> (
        PointSpreadFunction<f64>,
        SourceGeometry<f64>,
        QuadratureSpec,
    ) {
        (
            PointSpreadFunction::gaussian(1.0).unwrap(),
            SourceGeometry::new(0.0, theta2).unwrap(),
            QuadratureSpec::default(),
        )
    }

    #[test]
    fn continuum_model_is_normalized() {
        let (psf, g, q) = setup(1.0);
        let m = direct_imaging_model(&psf, &g, &q).unwrap();
        assert!((m.total_probability() - 1.0).abs() < 1e-10);
        m.validate().unwrap();
    }

    #[test]
    fn well_separated_sources_reach_quantum_limit() {
        let (psf, g, q) = setup(8.0);
        let f = direct_imaging_fim(&psf, &g, &q).unwrap();
        let qf = qfim(&gaussian_overlap_integrals(1.0_f64, 8.0).unwrap());
        for j in 0..2 {
            assert!((f[(j, j)] - qf.matrix[(j, j)]).abs() < 0.05 * qf.matrix[(j, j)]);
        }
    }

    #[test]
    fn fine_pixels_approach_continuum() {
        let (psf, g, q) = setup(1.5);
        let pix = direct_imaging_pixelated(&psf, &g, 0.01, &q).unwrap();
        pix.validate().unwrap();
        let fp = fim(&pix).unwrap();
        let fc = direct_imaging_fim(&psf, &g, &q).unwrap();
        assert!((fp - fc).abs().max() < 1e-4);
        // coarse pixels lose information
        let coarse = fim(&direct_imaging_pixelated(&psf, &g, 1.0, &q).unwrap()).unwrap();
        assert!(coarse[(1, 1)] < fc[(1, 1)]);
    }
}
