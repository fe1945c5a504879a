//! Quantum and classical Fisher information, information regrets and the
//! information-regret tradeoff relation for locating two incoherent point sources.
//!
//! All numerics are generic over [`Real`]; the `*64` / `*32` aliases below pin the
//! scalar type for callers that do not care.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod measurement;
pub mod overlaps;
pub mod psf;
pub mod quadrature;
pub mod scalar;
pub mod state;
pub mod tradeoff;

pub use error::{Error, Result};
pub use measurement::{
    direct_imaging_fim, direct_imaging_model, fim, haar_random_orthogonal, projective_model,
    regret_report, spade_model, ModeCutoff, ProbabilityModel, ProjectiveMeasurement4, RegretReport,
};
pub use overlaps::{
    check_normalization, gaussian_overlap_integrals, overlap_integrals, OverlapIntegrals,
};
pub use psf::{PointSpreadFunction, PsfKind, SourceGeometry};
pub use quadrature::QuadratureSpec;
pub use scalar::Real;
pub use state::{
    build_state_model, commutator_quantity, gaussian_incompatibility, incompatibility, qfim,
    subspace_basis_wavefunctions, verify_sld, IncompatibilityCoefficients, Qfim, StateModel4,
};
pub use tradeoff::{
    error_tradeoff_residual, irtr_frontier, irtr_residual, small_separation_error_bound,
    ErrorBudget, TradeoffPoint,
};

pub type PointSpreadFunction64 = PointSpreadFunction<f64>;
pub type PointSpreadFunction32 = PointSpreadFunction<f32>;
pub type SourceGeometry64 = SourceGeometry<f64>;
pub type SourceGeometry32 = SourceGeometry<f32>;
pub type OverlapIntegrals64 = OverlapIntegrals<f64>;
pub type OverlapIntegrals32 = OverlapIntegrals<f32>;
pub type StateModel64 = StateModel4<f64>;
pub type StateModel32 = StateModel4<f32>;
pub type Qfim64 = Qfim<f64>;
pub type Qfim32 = Qfim<f32>;
pub type ProbabilityModel64 = ProbabilityModel<f64>;
pub type ProbabilityModel32 = ProbabilityModel<f32>;
pub type RegretReport64 = RegretReport<f64>;
pub type RegretReport32 = RegretReport<f32>;
pub type ProjectiveMeasurement64 = ProjectiveMeasurement4<f64>;
pub type ProjectiveMeasurement32 = ProjectiveMeasurement4<f32>;
pub type TradeoffPoint64 = TradeoffPoint<f64>;
pub type TradeoffPoint32 = TradeoffPoint<f32>;
pub type ErrorBudget64 = ErrorBudget<f64>;
pub type ErrorBudget32 = ErrorBudget<f32>;
