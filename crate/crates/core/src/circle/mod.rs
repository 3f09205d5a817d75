//! Analytic side of the circle method: smoothed exponential sums, exact
//! grid quadrature, the interval identity and its decomposition, and the
//! lemma integrals.

mod grid;
mod identity;
mod lemmas;
mod sums;

pub use grid::{fourier_coefficient, QuadratureGrid, Spectrum};
pub use identity::{
    decompose_integral, recover_representation_counts, verify_basic_identity,
    verify_basic_identity_on, DecompositionReport, IdentityReport, SplitMode, TripleSetup,
};
pub use lemmas::{
    l2_profile, laplace_residual, parseval_check, L2Profile, L2Region, L2Weight, LaplaceResidual,
    ParsevalCheck,
};
pub use sums::{
    error_term, stilde, u_sum, z_of, z_power, SmoothedSumSpec, DEFAULT_EPS_TRUNC, TAIL_PROBE,
};
