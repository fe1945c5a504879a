//! Four-dimensional representation of the one-photon state and its SLD operators.
//!
//! The support of ρ and of its first derivatives is spanned by ψ₁, ψ₂ and their
//! position derivatives. In the orthonormal basis e₁..e₄ built from those four vectors
//! every matrix below depends only on the overlaps (κ, γ, β, δ).

use nalgebra::{Complex, Matrix2, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::overlaps::{displaced_overlaps, overlap_integrals, OverlapIntegrals};
use crate::psf::{PointSpreadFunction, SourceGeometry};
use crate::quadrature::{GaussLegendre, QuadratureGrid, QuadratureSpec};
use crate::scalar::{scaled_tolerance, Real};

/// Smallest admissible 1 - δ (and 1 + δ).
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateModel4<T: Real> {
    pub rho: Matrix4<T>,
    /// SLD for the centroid θ₁.
    pub l1: Matrix4<T>,
    /// SLD for the separation θ₂.
    pub l2: Matrix4<T>,
    pub eta3: T,
    pub eta4: T,
    pub overlaps: OverlapIntegrals<T>,
}

/// Quantum Fisher information matrix for (θ₁, θ₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qfim<T: Real> {
    pub matrix: Matrix2<T>,
}

impl<T: Real> Qfim<T> {
    pub fn f11(&self) -> T {
        self.matrix[(0, 0)]
    }

    pub fn f22(&self) -> T {
        self.matrix[(1, 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncompatibilityCoefficients<T> {
    /// Single-copy coefficient c̃.
    pub c_tilde: T,
    /// Collective-measurement coefficient c, from |tr([L₁, L₂]ρ)|.
    pub c: T,
    /// √(det 2𝒰 / det 𝓕) with 𝒰ⱼₖ = -(i/4) tr(ρ[Lⱼ, Lₖ]).
    pub gamma_measure: T,
}

/// Builds ρ, L₁, L₂ in the e₁..e₄ basis.
pub fn build_state_model<T: Real>(overlaps: &OverlapIntegrals<T>) -> Result<StateModel4<T>> {
    overlaps.validate()?;
    let OverlapIntegrals {
        kappa,
        gamma,
        beta,
        delta,
        delta_complement: om,
    } = *overlaps;
    let one = T::one();
    let two = T::lit(2.0);
    let op = one + delta;
    let threshold = T::lit(DEGENERACY_THRESHOLD);
    if om <= threshold || op <= threshold {
        return Err(Error::DegenerateState(format!(
            "delta = {delta} leaves 1 - delta = {om}, 1 + delta = {op}"
        )));
    }
    let eta3 = clamped_sqrt(kappa + beta - gamma * gamma / om, kappa, "eta3")?;
    let eta4 = clamped_sqrt(kappa - beta - gamma * gamma / op, kappa, "eta4")?;
    let (som, sop) = (om.sqrt(), op.sqrt());
    let zero = T::zero();

    let rho = Matrix4::from_diagonal(&Vector4::new(om / two, op / two, zero, zero));

    let a = two * gamma * delta / (om * op).sqrt();
    let b = two * eta4 / som;
    let c = two * eta3 / sop;
    #[rustfmt::skip]
    let l1 = Matrix4::new(
        zero, a,    zero, b,
        a,    zero, c,    zero,
        zero, c,    zero, zero,
        b,    zero, zero, zero,
    );

    let p = -eta3 / som;
    let q = -eta4 / sop;
    #[rustfmt::skip]
    let l2 = Matrix4::new(
        -gamma / om, zero,       p,    zero,
        zero,        gamma / op, zero, q,
        p,           zero,       zero, zero,
        zero,        q,          zero, zero,
    );

    Ok(StateModel4 {
        rho,
        l1,
        l2,
        eta3,
        eta4,
        overlaps: *overlaps,
    })
}

fn clamped_sqrt<T: Real>(square: T, scale: T, name: &str) -> Result<T> {
    if square >= T::zero() {
        Ok(square.sqrt())
    } else if square >= -scaled_tolerance(1e-12, scale) {
        Ok(T::zero())
    } else {
        Err(Error::DegenerateState(format!(
            "{name}^2 = {square} is negative"
        )))
    }
}

impl<T: Real> StateModel4<T> {
    /// ∂ρ/∂θⱼ = (Lⱼρ + ρLⱼ)/2 for j = 1, 2.
    pub fn rho_derivatives(&self) -> [Matrix4<T>; 2] {
        let half = T::lit(0.5);
        [
            (self.l1 * self.rho + self.rho * self.l1) * half,
            (self.l2 * self.rho + self.rho * self.l2) * half,
        ]
    }

    /// 𝓕ⱼₖ = Re tr(LⱼLₖρ), evaluated from the matrices.
    pub fn qfim_from_matrices(&self) -> Matrix2<T> {
        let ls = [&self.l1, &self.l2];
        Matrix2::from_fn(|j, k| (ls[j] * ls[k] * self.rho).trace())
    }
}

/// 𝓕 = diag(4κ - 4γ², κ).
pub fn qfim<T: Real>(overlaps: &OverlapIntegrals<T>) -> Qfim<T> {
    let four = T::lit(4.0);
    let OverlapIntegrals { kappa, gamma, .. } = *overlaps;
    Qfim {
        matrix: Matrix2::new(
            four * kappa - four * gamma * gamma,
            T::zero(),
            T::zero(),
            kappa,
        ),
    }
}

/// c̃ = |β| / √(κ(κ-γ²)), plus the collective coefficient c and the γ-measure.
pub fn incompatibility<T: Real>(
    overlaps: &OverlapIntegrals<T>,
) -> Result<IncompatibilityCoefficients<T>> {
    let OverlapIntegrals {
        kappa, gamma, beta, ..
    } = *overlaps;
    let gap = kappa * (kappa - gamma * gamma);
    if !(gap > T::zero()) {
        return Err(Error::DegenerateState(format!(
            "kappa(kappa - gamma^2) = {gap} is not positive"
        )));
    }
    let c_tilde = (beta.abs() / gap.sqrt()).min(T::one());

    let model = build_state_model(overlaps)?;
    let f = qfim(overlaps);
    let denom = T::lit(2.0) * (f.f11() * f.f22()).sqrt();
    let commutator = model.l1 * model.l2 - model.l2 * model.l1;
    let c = (commutator * model.rho).trace().abs() / denom;
    let gamma_measure = gamma_measure(&model, &f);

    Ok(IncompatibilityCoefficients {
        c_tilde,
        c,
        gamma_measure,
    })
}

/// √(det 2𝒰 / det 𝓕), computed over the complex numbers.
fn gamma_measure<T: Real>(model: &StateModel4<T>, f: &Qfim<T>) -> T {
    let to_c = |m: &Matrix4<T>| m.map(|v| Complex::new(v, T::zero()));
    let (rho, l1, l2) = (to_c(&model.rho), to_c(&model.l1), to_c(&model.l2));
    let ls = [&l1, &l2];
    let minus_i_quarter = Complex::new(T::zero(), T::lit(-0.25));
    let two = Complex::new(T::lit(2.0), T::zero());
    let u = Matrix2::from_fn(|j, k| {
        let comm = ls[j] * ls[k] - ls[k] * ls[j];
        minus_i_quarter * (rho * comm).trace() * two
    });
    let det_u = u.determinant();
    let det_f = f.matrix.determinant();
    (det_u.re.abs() / det_f).sqrt()
}

/// Closed form for the Gaussian PSF: c̃² = (1 - s)² / (eˢ - s), s = θ₂²/4σ².
pub fn gaussian_incompatibility<T: Real>(sigma: T, theta2: T) -> Result<T> {
    if !(sigma > T::zero()) || !(theta2 > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "sigma and theta2 must be positive, got sigma = {sigma}, theta2 = {theta2}"
        )));
    }
    let s = theta2 * theta2 / (T::lit(4.0) * sigma * sigma);
    let denom = T::one() + (s.exp_m1() - s);
    Ok((T::one() - s).abs() / denom.sqrt())
}

/// tr|√ρ[L₁, L₂]√ρ|, as the sum of singular values.
pub fn commutator_quantity<T: Real>(model: &StateModel4<T>) -> T {
    let sqrt_rho = Matrix4::from_diagonal(&model.rho.diagonal().map(|v| v.max(T::zero()).sqrt()));
    let comm = model.l1 * model.l2 - model.l2 * model.l1;
    let m = sqrt_rho * comm * sqrt_rho;
    m.svd(false, false).singular_values.sum()
}

/// Coefficients of e₁..e₄ (rows) over the vectors ψ₁, ψ₂, ∂ψ₁/∂X₁, ∂ψ₂/∂X₂ (columns).
pub fn basis_coefficients<T: Real>(model: &StateModel4<T>) -> Result<Matrix4<T>> {
    let OverlapIntegrals {
        gamma,
        delta,
        delta_complement: om,
        ..
    } = model.overlaps;
    let tiny = scaled_tolerance(1e-12, model.overlaps.kappa.sqrt());
    if model.eta3 <= tiny || model.eta4 <= tiny {
        return Err(Error::DegenerateState(format!(
            "derivative directions are degenerate (eta3 = {}, eta4 = {})",
            model.eta3, model.eta4
        )));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let op = one + delta;
    let n1 = one / (two * om).sqrt();
    let n2 = one / (two * op).sqrt();
    let r2 = one / two.sqrt();
    let g3 = gamma / om.sqrt() * n1 / model.eta3;
    let g4 = gamma / op.sqrt() * n2 / model.eta4;
    let (i3, i4) = (r2 / model.eta3, r2 / model.eta4);
    let zero = T::zero();
    #[rustfmt::skip]
    let c = Matrix4::new(
        n1,  -n1, zero, zero,
        n2,   n2, zero, zero,
        -g3,  g3, i3,   i3,
        g4,   g4, i4,  -i4,
    );
    Ok(c)
}

/// Max over j of ‖(ρ(θ+h êⱼ) - ρ(θ-h êⱼ))/2h - (Lⱼρ+ρLⱼ)/2‖_F.
///
/// The displaced states are projected on the fiducial basis e₁..e₄ through overlaps
/// recomputed by quadrature, so this checks the SLD matrices independently of the
/// algebra that produced them.
pub fn verify_sld<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    quad: &QuadratureSpec,
    h: T,
) -> Result<T> {
    let sigma = psf.sigma();
    if h < T::lit(1e-7) * sigma || h > T::lit(1e-3) * sigma {
        return Err(Error::InvalidInput(format!(
            "step {h} outside [1e-7 sigma, 1e-3 sigma]"
        )));
    }
    let overlaps = overlap_integrals(psf, geometry, quad)?;
    let model = build_state_model(&overlaps)?;
    let coeffs = basis_coefficients(&model)?;
    let centres = [geometry.x1(), geometry.x2()];

    let projected_rho = |g: SourceGeometry<T>| -> Result<Matrix4<T>> {
        let mut rho = Matrix4::zeros();
        for y in [g.x1(), g.x2()] {
            // ⟨ψ(·-Xᵢ)|ψ(·-Y)⟩ = S(Y-Xᵢ), ⟨∂ψ(·-Xᵢ)/∂Xᵢ|ψ(·-Y)⟩ = -G(Y-Xᵢ)
            let (s1, g1) = displaced_overlaps(psf, y - centres[0], quad)?;
            let (s2, g2) = displaced_overlaps(psf, y - centres[1], quad)?;
            let atoms = Vector4::new(s1, s2, -g1, -g2);
            let v = coeffs * atoms;
            rho += v * v.transpose();
        }
        Ok(rho * T::lit(0.5))
    };

    let derivs = model.rho_derivatives();
    let mut worst = T::zero();
    for (j, expected) in derivs.iter().enumerate() {
        let shift = |sign: T| {
            let mut g = *geometry;
            if j == 0 {
                g.theta1 += sign * h;
            } else {
                g.theta2 += sign * h;
            }
            g
        };
        let plus = projected_rho(shift(T::one()))?;
        let minus = projected_rho(shift(-T::one()))?;
        let fd = (plus - minus) / (T::lit(2.0) * h);
        let r = (fd - expected).norm();
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// The basis e₁..e₄ sampled on a quadrature grid.
#[derive(Debug, Clone)]
pub struct SubspaceBasis<T> {
    pub grid: QuadratureGrid<T>,
    /// `functions[a][i]` is eₐ at `grid.nodes[i]`.
    pub functions: [Vec<T>; 4],
}

impl<T: Real> SubspaceBasis<T> {
    /// Gram matrix ⟨eₐ|e_b⟩ by quadrature.
    pub fn gram(&self) -> Matrix4<T> {
        Matrix4::from_fn(|a, b| {
            self.grid
                .weights
                .iter()
                .zip(self.functions[a].iter().zip(&self.functions[b]))
                .fold(T::zero(), |acc, (&w, (&fa, &fb))| acc + w * fa * fb)
        })
    }
}

/// Samples e₁..e₄ on the quadrature grid covering [X₁ - Rσ, X₂ + Rσ].
pub fn subspace_basis_wavefunctions<T: Real>(
    psf: &PointSpreadFunction<T>,
    geometry: &SourceGeometry<T>,
    quad: &QuadratureSpec,
) -> Result<SubspaceBasis<T>> {
    quad.validate()?;
    let overlaps = overlap_integrals(psf, geometry, quad)?;
    let model = build_state_model(&overlaps)?;
    let coeffs = basis_coefficients(&model)?;
    let (x1, x2) = (geometry.x1(), geometry.x2());
    let r = T::lit(quad.truncation_radius) * psf.sigma();
    let knots = psf.knots();
    let breaks: Vec<T> = knots
        .iter()
        .map(|&k| k + x1)
        .chain(knots.iter().map(|&k| k + x2))
        .collect();
    let rule = GaussLegendre::new(quad.nodes_per_panel);
    let grid = QuadratureGrid::composite(&rule, x1 - r, x2 + r, psf.sigma(), &breaks, quad, 0);

    let mut functions: [Vec<T>; 4] = Default::default();
    for f in functions.iter_mut() {
        f.reserve(grid.len());
    }
    for &x in &grid.nodes {
        let (v1, d1) = psf.eval_with_derivative(x - x1);
        let (v2, d2) = psf.eval_with_derivative(x - x2);
        let atoms = Vector4::new(v1, v2, -d1, -d2);
        let e = coeffs * atoms;
        for a in 0..4 {
            functions[a].push(e[a]);
        }
    }
    Ok(SubspaceBasis { grid, functions })
}
