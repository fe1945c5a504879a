//! Measurement models, their Fisher information and information regrets.

mod direct;
mod projective;
mod spade;

pub use direct::{direct_imaging_fim, direct_imaging_model, direct_imaging_pixelated};
pub use projective::{
    haar_random_orthogonal, projective_model, sample_stream, ProjectiveMeasurement4,
    NORMALS_PER_SAMPLE,
};
pub use spade::{
    hermite_gaussian_wavefunction, spade_model, ModeCutoff, SPADE_MASS_TARGET, SPADE_MAX_MODES,
};

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::Qfim;

/// Outcomes with p below this fraction of the largest probability are excluded from the FIM.
pub const PROBABILITY_FLOOR: f64 = 1e-15;
/// Excluded outcomes must have |∂p| below this fraction of the largest |∂p|.
pub const DERIVATIVE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    /// Photon position density sampled on quadrature nodes.
    ContinuumGrid,
    /// Hermite-Gaussian mode counts.
    DiscreteModes,
    /// Pixel counts of a binned detector.
    PixelBins,
    /// Orthogonal projectors on the four-dimensional support subspace.
    SubspaceProjectors,
}

/// Outcome probabilities p(ω; θ) and their derivatives at the fiducial point.
#[derive(Debug, Clone)]
pub struct ProbabilityModel<T> {
    pub outcome_kind: OutcomeKind,
    /// Probabilities, or density samples when `weights` is present.
    pub probabilities: Vec<T>,
    /// Quadrature weights for continuum models.
    pub weights: Option<Vec<T>>,
    pub dp_dtheta1: Vec<T>,
    pub dp_dtheta2: Vec<T>,
    /// Probability mass outside the represented outcomes (tails, truncated modes).
    pub truncated_mass: T,
}

impl<T: Real> ProbabilityModel<T> {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    fn weight(&self, i: usize) -> T {
        self.weights.as_ref().map_or(T::one(), |w| w[i])
    }

    /// Σ p (weighted for continuum models).
    pub fn total_probability(&self) -> T {
        (0..self.len()).fold(T::zero(), |acc, i| {
            acc + self.weight(i) * self.probabilities[i]
        })
    }

    /// (Σ ∂p/∂θ₁, Σ ∂p/∂θ₂).
    pub fn derivative_totals(&self) -> [T; 2] {
        let mut acc = [T::zero(); 2];
        for i in 0..self.len() {
            let w = self.weight(i);
            acc[0] += w * self.dp_dtheta1[i];
            acc[1] += w * self.dp_dtheta2[i];
        }
        acc
    }

    /// Checks nonnegativity, total probability and vanishing derivative totals.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.dp_dtheta1.len() != n
            || self.dp_dtheta2.len() != n
            || self.weights.as_ref().is_some_and(|w| w.len() != n)
        {
            return Err(Error::InvalidInput(
                "probability model columns differ in length".into(),
            ));
        }
        if let Some(i) = self.probabilities.iter().position(|p| !(*p >= T::zero())) {
            return Err(Error::InvalidInput(format!(
                "outcome {i} has negative probability {}",
                self.probabilities[i]
            )));
        }
        let total = self.total_probability() + self.truncated_mass;
        if (total - T::one()).abs() > crate::scalar::scaled_tolerance(1e-10, T::one()) {
            return Err(Error::InvalidInput(format!(
                "total probability {total} differs from 1"
            )));
        }
        let scale = (0..n).fold(T::zero(), |acc, i| {
            acc + self.weight(i) * (self.dp_dtheta1[i].abs() + self.dp_dtheta2[i].abs())
        });
        let tol = crate::scalar::scaled_tolerance(1e-8, scale.max(T::one()));
        for (j, s) in self.derivative_totals().iter().enumerate() {
            if s.abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "derivative of total probability w.r.t. theta{} is {s}",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// True when ∂p/∂θ₁ vanishes on every outcome with nonzero probability, the
    /// necessary condition for a separation-optimal measurement at vanishing separation.
    pub fn centroid_information_vanishes(&self, tol: T) -> bool {
        let pmax = self.probabilities.iter().fold(T::zero(), |m, &p| m.max(p));
        let floor = pmax * T::lit(PROBABILITY_FLOOR);
        self.probabilities
            .iter()
            .zip(&self.dp_dtheta1)
            .all(|(&p, &d)| p <= floor || d.abs() <= tol)
    }
}

/// Classical Fisher information F_jk = Σ (∂ⱼp)(∂ₖp)/p.
pub fn fim<T: Real>(model: &ProbabilityModel<T>) -> Result<Matrix2<T>> {
    let pmax = model.probabilities.iter().fold(T::zero(), |m, &p| m.max(p));
    let dmax = model
        .dp_dtheta1
        .iter()
        .chain(&model.dp_dtheta2)
        .fold(T::zero(), |m, &d| m.max(d.abs()));
    let p_floor = pmax * T::lit(PROBABILITY_FLOOR);
    let d_floor = dmax * T::lit(DERIVATIVE_FLOOR);

    let mut f = Matrix2::zeros();
    for (i, &p) in model.probabilities.iter().enumerate() {
        let d1 = model.dp_dtheta1[i];
        let d2 = model.dp_dtheta2[i];
        if p < p_floor || p <= T::zero() {
            let d = d1.abs().max(d2.abs());
            if d > d_floor {
                return Err(Error::DegenerateOutcome {
                    index: i,
                    probability: p.as_f64(),
                    derivative: d.as_f64(),
                });
            }
            continue;
        }
        let w = model.weight(i) / p;
        f[(0, 0)] += w * d1 * d1;
        f[(0, 1)] += w * d1 * d2;
        f[(1, 1)] += w * d2 * d2;
    }
    f[(1, 0)] = f[(0, 1)];
    Ok(f)
}

/// FIM, QFIM, regret matrix 𝓕 - F and the normalized square-root regrets Δⱼ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport<T: Real> {
    pub fim: Matrix2<T>,
    pub qfim: Matrix2<T>,
    pub regret: Matrix2<T>,
    pub delta1: T,
    pub delta2: T,
    /// Smallest eigenvalue of the regret matrix before clamping.
    pub min_regret_eigenvalue: T,
}

/// Regret diagonals down to this fraction of 𝓕ⱼⱼ below zero are treated as roundoff.
pub const REGRET_CLAMP: f64 = 1e-9;
/// Regret eigenvalues below this fraction of max 𝓕ⱼⱼ signal a broken quantum bound.
pub const REGRET_EIGEN_FLOOR: f64 = 1e-6;

pub fn regret_report<T: Real>(fim: &Matrix2<T>, qfim: &Qfim<T>) -> Result<RegretReport<T>> {
    let q = qfim.matrix;
    if !(q[(0, 0)] > T::zero() && q[(1, 1)] > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "QFIM diagonal must be positive, got {} and {}",
            q[(0, 0)],
            q[(1, 1)]
        )));
    }
    let mut regret = q - fim;
    let scale = q[(0, 0)].max(q[(1, 1)]);
    let min_eig = regret.symmetric_eigenvalues().min();
    if min_eig < -crate::scalar::scaled_tolerance(REGRET_EIGEN_FLOOR, scale) {
        return Err(Error::BoundViolation {
            what: "minimum eigenvalue",
            value: min_eig.as_f64(),
        });
    }
    let mut deltas = [T::zero(); 2];
    for j in 0..2 {
        let r = regret[(j, j)];
        if r < -crate::scalar::scaled_tolerance(REGRET_CLAMP, q[(j, j)]) {
            return Err(Error::BoundViolation {
                what: if j == 0 { "R11" } else { "R22" },
                value: r.as_f64(),
            });
        }
        let r = r.max(T::zero());
        regret[(j, j)] = r;
        deltas[j] = (r / q[(j, j)]).sqrt().min(T::one());
    }
    Ok(RegretReport {
        fim: *fim,
        qfim: q,
        regret,
        delta1: deltas[0],
        delta2: deltas[1],
        min_regret_eigenvalue: min_eig,
    })
}
