//! Inverse scattering toolkit for the nonlocal focusing NLS equation
//! `i q_t + q_xx + 2 q^2 conj(q(-x,t)) = 0` with step-like initial data.

pub mod error;
pub mod asymptotics;
pub mod exact;
pub mod io;
pub mod kernels;
pub mod mat2;
pub mod pde;
pub mod scattering;

pub use error::{Error, Result};
