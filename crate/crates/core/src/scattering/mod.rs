//! Direct scattering for step-like data.

mod data;
mod jost;
mod profile;
mod spectrum;

pub use data::{
    case_epsilon, classify_case, compute_k1, compute_k1_detailed, reflection_coeffs, scattering_data, trace_eval,
    CaseTag, K1Estimate, KGridSpec, SpectralData, SpectralScalars, TraceTarget, ValidationCheck, K1_TOL,
    REFLECTION_ZERO_TOL,
};
pub(crate) use data::SpectralMap;
pub use jost::{a1_direct, background, jost_column, jost_solve, scattering_matrix, small_k_limit, Side, SmallKVectors};
pub use profile::InitialProfile;
pub use spectrum::{
    gamma1_norming, JostSpectrum, PureStepSpectrum, ReflectionlessSpectrum, SpectralPoint, Spectrum,
    TabulatedSpectrum, NORMING_TOL,
};
