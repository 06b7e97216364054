//! Genus-zero Gromov-Witten invariants of CP² and the boundary singularity of
//! Kontsevich's solution of the WDVV equations.
//!
//! * [`invariants`]: exact coefficients `A_k` and counts `N_k`.
//! * [`series`]: high-precision evaluation of `Phi(X) = sum A_k e^{kX}` and
//!   of the associativity residual.
//! * [`fit`]: least-squares growth constants `a`, `b` and `X0 = ln(1/a)`.
//! * [`frobenius`]: intersection form, canonical coordinates and the
//!   Jacobian of the coordinate change near `X0`.

pub mod cubic;
pub mod error;
pub mod fit;
pub mod frobenius;
pub mod invariants;
pub mod precision;
pub mod series;

/// Re-exported so callers name the same `Float` and `Rational` types.
pub use rug;

pub use error::{Error, Result};
pub use fit::{derive_x0, fit_growth, ratio_diagnostics, FitResult, FitWindow};
pub use frobenius::{
    canonical_coordinates, characteristic_cubic, coordinate_jacobian_row, intersection_form,
    singularity_scan, CanonicalCoords, CharacteristicCubic, FlatPoint, IntersectionForm,
};
pub use invariants::{
    compute_coefficients, gw_invariant, verify_ode_coefficients, CoefficientTable, GwInvariant,
    OdeResidualReport,
};
pub use precision::PrecisionContext;
pub use series::{
    constraint_residual, estimate_singular_exponent, eval_f, eval_phi, pde_residual, refined_phi2,
    PhiValues, SeriesEvaluator,
};
