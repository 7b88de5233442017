//! Special functions and singular quadratures.

mod dilog;
mod gamma;
mod quadrature;
mod unwrap;

pub use dilog::dilog;
pub use gamma::complex_gamma;
pub(crate) use quadrature::{apply_all, graded_panels, Functional};
pub use quadrature::{
    cauchy_halfline, cauchy_line, gauss_legendre, pv_cauchy, stieltjes_log_integral, GaussLegendre,
    Integral, LogOf, QuadratureSpec, Samplable,
};
pub use unwrap::{continuous_log, unwrap_arg};
