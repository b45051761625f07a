//! Core numerics for positive radial solutions of coupled semilinear
//! Schrodinger systems: shooting integration with event detection, scalar
//! ground states, regime classification, explicit solution families, an
//! initial-condition census, and integral identity checks.

pub mod census;
pub mod error;
pub mod families;
pub mod ground;
pub mod identities;
pub mod integrator;
pub mod model;
pub mod profile;
pub mod quad;
pub mod regimes;
pub mod scalar;

pub use census::{census, symmetric_slice, CensusHit, CensusResult, SearchBox, CLUSTER_RADIUS};
pub use error::{Error, Result};
pub use families::{
    make_symmetric, make_theta_family, make_triple, mazhao_beta, mazhao_ratio, mazhao_scale,
    mazhao_system, MaZhaoParams, Triple,
};
pub use ground::{ground_on_diagonal, soliton_1d, soliton_height, solve_scalar, GroundState};
pub use identities::{
    analyze, check_c1_c2_bound, check_energy_identity, ratio_trend, verify_decay,
    wronskian_integral, IdentityReport, RatioTrend,
};
pub use integrator::{
    integrate, taylor_start, wronskian_consistency, OutcomeKind, ShootingConfig,
    TrajectoryOutcome,
};
pub use model::{
    residual, residual_pair, DecayCertificate, Family, GrowthBound, Nonlinearity, Parameters,
    Split,
};
pub use profile::RadialProfile;
pub use regimes::{
    analyze_psi, check_a1, check_a2, check_a4, check_qs, check_sign_conditions, classify, psi,
    Assumptions, PsiAnalysis, PsiSign, Regime, RegimeReport, SignCondition,
};
pub use scalar::Scalar;

/// Concrete f64 aliases; the default working precision of the toolkit.
pub type Params = Parameters<f64>;
pub type Coupling = Nonlinearity<f64>;
pub type Profile = RadialProfile<f64>;
