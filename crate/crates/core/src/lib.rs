//! Numerical verification of the orthospectrum volume identity for
//! hyperbolic manifolds with cusped totally geodesic boundary.
//!
//! The identity reads
//!
//! ```text
//! Vol(M) = Σ_ℓ F_n(ℓ) + c_n Σ_𝔠 Vol(B_𝔠) / d_𝔠^{n-1},
//! c_n = H(n-2) Γ((n-2)/2) / (√π Γ((n-1)/2)),
//! ```
//!
//! summed over the orthospectrum and the boundary cusps. The crate provides
//! the special functions, the hyperbolic geometry and Liouville measure used
//! to derive it, Monte-Carlo and quadrature evaluators for every term, and
//! the Apollonian example of the cut Whitehead link complement.

pub mod apollonian;
pub mod bk;
pub mod cusp;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod quadrature;
pub mod selftest;
pub mod special;

/// Seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Version tag carried by every JSON document this crate produces.
pub const SCHEMA: &str = "orthospec/1";

pub use apollonian::{
    generate_strip_packing, identity_residual, partial_orthospectrum, whitehead_cusp_data, ApollonianCircle,
    CircleRef, DedupStrategy, ExactRational, IdentityReport, OrthospectrumEntry, Packing, PackingConfig,
};
pub use bk::{f3_closed, f3_inverse, fn_evaluate, fn_numeric, large_length_constant, small_length_constant};
pub use cusp::{
    cusp_integral_closed, cusp_integral_quadrature, cusp_term, identity_total, vol_vc_closed, vol_vc_montecarlo,
    vol_vc_quadrature, CrossSection, CuspIntegralKind, McOptions,
};
pub use error::{Error, Result};
pub use geometry::{
    inversive_distance, ortholength, BoundaryPoint, CuspData, GeneralizedSphere, Geodesic, HPoint, Isometry,
};
pub use measure::{mc_measure, sphere_volume, MeasureEstimate, UnitTangentVector};
pub use special::{cusp_coefficient, digamma, gamma_fn, harmonic, Dimension, CATALAN, EULER_GAMMA};
pub use selftest::{Check, Suite};
