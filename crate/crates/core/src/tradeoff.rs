//! Information-regret tradeoff relation (IRTR) and the error tradeoffs it implies.
//!
//! Every residual here follows one sign convention: nonnegative means feasible.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A pair of normalized square-root regrets (Δ₁, Δ₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint<T> {
    pub delta1: T,
    pub delta2: T,
}

impl<T: Real> TradeoffPoint<T> {
    pub fn new(delta1: T, delta2: T) -> Result<Self> {
        let unit = |v: T| v >= T::zero() && v <= T::one();
        if !unit(delta1) || !unit(delta2) {
            return Err(Error::InvalidInput(format!(
                "regrets must lie in [0, 1], got ({delta1}, {delta2})"
            )));
        }
        Ok(Self { delta1, delta2 })
    }
}

fn check_coefficient<T: Real>(c: T) -> Result<()> {
    if c >= T::zero() && c <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "incompatibility coefficient {c} outside [0, 1]"
        )))
    }
}

/// Δ₁² + Δ₂² + 2√(1-c̃²)Δ₁Δ₂ - c̃².
pub fn irtr_residual<T: Real>(p: &TradeoffPoint<T>, c_tilde: T) -> T {
    let s = (T::one() - c_tilde * c_tilde).max(T::zero()).sqrt();
    let (d1, d2) = (p.delta1, p.delta2);
    d1 * d1 + d2 * d2 + T::lit(2.0) * s * d1 * d2 - c_tilde * c_tilde
}

/// `n` boundary points with Δ₁ uniform on [0, c̃] and Δ₂ = c̃√(1-Δ₁²) - Δ₁√(1-c̃²).
pub fn irtr_frontier<T: Real>(c_tilde: T, n: usize) -> Result<Vec<TradeoffPoint<T>>> {
    check_coefficient(c_tilde)?;
    if c_tilde == T::zero() {
        return Err(Error::InvalidInput(
            "c_tilde = 0 imposes no constraint; there is no frontier".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 frontier points, got {n}"
        )));
    }
    let s = (T::one() - c_tilde * c_tilde).sqrt();
    let last = T::from_usize_lossy(n - 1);
    Ok((0..n)
        .map(|i| {
            let d1 = c_tilde * T::from_usize_lossy(i) / last;
            let d2 = c_tilde * (T::one() - d1 * d1).sqrt() - d1 * s;
            TradeoffPoint {
                delta1: d1,
                delta2: d2.max(T::zero()),
            }
        })
        .collect())
}

/// Repetitions, error-covariance diagonals and QFIM diagonals of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget<T> {
    pub nu: u64,
    pub e11: T,
    pub e22: T,
    pub qf11: T,
    pub qf22: T,
}

impl<T: Real> ErrorBudget<T> {
    /// γⱼ = 1/(ν 𝓔ⱼⱼ 𝓕ⱼⱼ).
    pub fn gammas(&self) -> Result<[T; 2]> {
        let positive = [self.e11, self.e22, self.qf11, self.qf22]
            .iter()
            .all(|v| *v > T::zero());
        if self.nu == 0 || !positive {
            return Err(Error::InvalidInput(format!(
                "error budget must be positive: {self:?}"
            )));
        }
        let nu = T::lit(self.nu as f64);
        Ok([
            T::one() / (nu * self.e11 * self.qf11),
            T::one() / (nu * self.e22 * self.qf22),
        ])
    }
}

/// (2 - c̃²) - [γ₁ + γ₂ - 2√(1-c̃²)√((1-γ₁)(1-γ₂))].
pub fn error_tradeoff_residual<T: Real>(budget: &ErrorBudget<T>, c_tilde: T) -> Result<T> {
    check_coefficient(c_tilde)?;
    let g = budget.gammas()?;
    let limit = T::one() + T::lit(1e-12);
    for (i, &gamma) in g.iter().enumerate() {
        if gamma > limit {
            return Err(Error::InfeasibleBudget {
                index: i + 1,
                gamma: gamma.as_f64(),
            });
        }
    }
    let one = T::one();
    let s = (one - c_tilde * c_tilde).sqrt();
    let cross = ((one - g[0]).max(T::zero()) * (one - g[1]).max(T::zero())).sqrt();
    Ok((T::lit(2.0) - c_tilde * c_tilde) - (g[0] + g[1] - T::lit(2.0) * s * cross))
}

/// 1 - 1/(4νκ𝓔₁₁) - 1/(νκ𝓔₂₂), the θ₂ → 0 limit of the error tradeoff.
pub fn small_separation_error_bound<T: Real>(nu: u64, e11: T, e22: T, kappa: T) -> T {
    let nk = T::lit(nu as f64) * kappa;
    T::one() - T::one() / (T::lit(4.0) * nk * e11) - T::one() / (nk * e22)
}
