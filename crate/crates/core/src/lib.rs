//! # wassercop
//!
//! Wasserstein distances between laws on ℝ and ℝ^d computed from quantile
//! functions and copulas, and an exact discrete transport solver that serves
//! as ground truth for them.
//!
//! | Operation | What it computes |
//! |-----------|------------------|
//! | [`w1_cdf`] | `∫ |F − G| dx` |
//! | [`wp_quantile`] | `∫₀¹ |F⁻¹(u) − G⁻¹(u)|^p du` |
//! | [`wp_via_m`] | expectation of `|x − y|^p` under the comonotone coupling |
//! | [`wp_shared_nd`] | `Σ_i W_p(F_i, G_i)^p` for laws sharing a copula |
//! | [`wpq_bounds`] | bracket on `W_{p,q}^p` from norm equivalence |
//! | [`solve_ot`] | exact optimum over all couplings of two discrete measures |
//!
//! ```
//! use wassercop::{empirical_from_samples, wp_quantile, GridSpec};
//!
//! let f = empirical_from_samples(&[0.0, 1.0], None).unwrap();
//! let g = empirical_from_samples(&[0.0, 2.0], Some(&[0.25, 0.75])).unwrap();
//! let r = wp_quantile(&f, &g, 2.0, GridSpec::ExactBreakpoints).unwrap();
//! assert_eq!(r.power_value, 1.5);
//! ```

pub mod copulas;
pub mod distributions;
mod error;
pub mod io;
pub mod numeric;
pub mod oracle;
pub mod quadrature;
pub mod suite;
pub mod wasserstein;

pub use copulas::{
    comonotone_coupling, eval_m, eval_w, expect_comonotone, frechet_hoeffding_check, shared_copula_build,
    sklar_joint_cdf, ComonotonePair, CopulaSpec, EmpiricalCopula, FhCheck, JointSpec,
};
pub use distributions::{empirical_from_samples, Distribution1D, Empirical, MomentCertificate};
pub use error::{Error, Result};
pub use numeric::Rational;
pub use oracle::verify::{
    verify_comonotone_optimal, verify_shared_copula_decomposition, verify_wpq_sandwich, Verifier,
};
pub use oracle::{
    solve_assignment, solve_ot, solve_ot_with, CostMatrix, DiscreteCoupling, DiscreteMeasureND, OtConfig, OtSolution,
};
pub use quadrature::Estimate;
pub use wasserstein::{
    w1_cdf, wp_lower_bound_nd, wp_quantile, wp_shared_nd, wp_via_m, wpq_bounds, DistanceReport, GridSpec, Method,
};
