//! Long-time asymptotics of the step-like Cauchy problem.
//!
//! Rays are labelled by `xi = x/(4t)`. Phase quantities (`nu`, `delta`,
//! `chi`) are computed for `xi > 0` from `ln(1 + r1 r2)` on `(-inf, -xi]` and
//! cached per spectral-data fingerprint.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    apply_all, cauchy_halfline, complex_gamma, gauss_legendre, graded_panels, stieltjes_log_integral, Functional,
    LogOf, QuadratureSpec, Samplable,
};
use crate::scattering::{reflection_coeffs, CaseTag, SpectralData, SpectralMap, SpectralPoint};

/// Reflection coefficients below this modulus are treated as zero in the coefficient tables.
pub const R_ZERO_TOL: f64 = 1e-13;
/// Rays with `|xi| < TRANSITION_FRACTION * A` are flagged as outside the supported region.
pub const TRANSITION_FRACTION: f64 = 0.05;
/// `|Im nu|` below this is rounding noise when choosing the remainder order.
/// Regime thresholds compare the computed value exactly.
pub const IM_NU_NOISE: f64 = 1e-12;
/// Relative guard on the soliton-region denominator.
pub const SOLITON_DENOM_TOL: f64 = 1e-12;
/// `|b(0)|` above this is not treated as `b(0) = 0`.
pub const B0_ZERO_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseData {
    pub xi: f64,
    /// `nu(-xi)`.
    pub nu: Complex64,
    /// Winding of `arg(1 + r1 r2)` over `(-inf, -xi]`.
    pub delta_winding: f64,
    /// `chi(xi, -xi)`.
    pub chi_at_minus_xi: Complex64,
    pub delta0: Complex64,
    pub delta_ik1: Complex64,
    pub c0: Complex64,
    pub assumption_b_ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    LeftDecay,
    RightA,
    RightB,
    RightC,
    SolitonRegion,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LeftDecay => "LeftDecay",
            Regime::RightA => "RightA",
            Regime::RightB => "RightB",
            Regime::RightC => "RightC",
            Regime::SolitonRegion => "SolitonRegion",
        })
    }
}

/// Order of the remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ErrorOrder {
    InvT,
    InvTLogT,
    /// `t^(-1 + 2|Im nu|)`, exponent stored.
    Power(f64),
}

impl fmt::Display for ErrorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorOrder::InvT => f.write_str("t^-1"),
            ErrorOrder::InvTLogT => f.write_str("t^-1*ln(t)"),
            ErrorOrder::Power(p) => write!(f, "t^{p:.6}"),
        }
    }
}

/// One term `amplitude * t^power * exp(i (phase_rate t + log_phase_coef ln t))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub amplitude: Complex64,
    pub power: f64,
    pub phase_rate: f64,
    pub log_phase_coef: f64,
}

impl PowerTerm {
    pub fn eval(&self, t: f64) -> Complex64 {
        let lt = t.ln();
        self.amplitude
            * (self.power * lt).exp()
            * Complex64::from_polar(1.0, self.phase_rate * t + self.log_phase_coef * lt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResult {
    pub value: Complex64,
    pub regime: Regime,
    pub error_order: ErrorOrder,
    pub terms: Vec<PowerTerm>,
    pub xi: f64,
    pub nu: Complex64,
    pub delta0: Complex64,
    /// Ray lies close to `x = 0` where no formula is established.
    pub transition_zone: bool,
}

fn r1_order(im_nu: f64) -> ErrorOrder {
    if im_nu > 0.0 {
        ErrorOrder::InvT
    } else if im_nu == 0.0 {
        ErrorOrder::InvTLogT
    } else {
        ErrorOrder::Power(-1.0 + 2.0 * im_nu.abs())
    }
}

fn r2_order(im_nu: f64) -> ErrorOrder {
    if im_nu > 0.0 {
        ErrorOrder::Power(-1.0 + 2.0 * im_nu.abs())
    } else if im_nu == 0.0 {
        ErrorOrder::InvTLogT
    } else {
        ErrorOrder::InvT
    }
}

fn r3_order(im_nu: f64) -> ErrorOrder {
    if im_nu == 0.0 {
        ErrorOrder::InvTLogT
    } else {
        ErrorOrder::Power(-1.0 + 2.0 * im_nu.abs())
    }
}

/// Replaces a request at `k = 0` by cubic extrapolation from the left.
/// Only used where the integrand is known to be regular at 0.
struct RegularAtZero<S>(S);

const ZERO_STEP: f64 = 1e-3;

impl<S: Samplable> Samplable for RegularAtZero<S> {
    fn sample(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let Some(pos) = xs.iter().position(|&x| x == 0.0) else {
            return self.0.sample(xs);
        };
        let mut rest: Vec<f64> = xs.to_vec();
        rest.remove(pos);
        let mut vals = if rest.is_empty() { Vec::new() } else { self.0.sample(&rest)? };
        let stencil = [-4.0, -3.0, -2.0, -1.0].map(|m| m * ZERO_STEP);
        let sv = self.0.sample(&stencil)?;
        // Lagrange weights at 0 for nodes -4h..-h: (-1, 4, -6, 4)
        let v0 = -sv[0] + 4.0 * sv[1] - 6.0 * sv[2] + 4.0 * sv[3];
        vals.insert(pos, v0);
        Ok(vals)
    }
}

fn one_plus_r1r2(_: f64, p: &SpectralPoint) -> Complex64 {
    p.one_plus_r1r2()
}

fn log_jump(sd: &SpectralData) -> LogOf<RegularAtZero<SpectralMap<'_, fn(f64, &SpectralPoint) -> Complex64>>> {
    LogOf(RegularAtZero(SpectralMap { spectrum: sd.spectrum(), f: one_plus_r1r2 as fn(f64, &SpectralPoint) -> Complex64 }))
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InvalidArgument(format!("phase quantities need xi > 0, got {xi}")));
    }
    Ok(())
}

/// `(nu(-xi), Delta(-xi))`.
pub fn nu_of_xi(sd: &SpectralData, xi: f64, spec: &QuadratureSpec) -> Result<(Complex64, f64)> {
    check_xi(xi)?;
    spec.validate()?;
    let p = sd.spectrum().sample(&[-xi])?[0];
    if (p.a1 * p.a2).norm() < 1e-300 || p.one_plus_r1r2().norm() == 0.0 || !p.one_plus_r1r2().norm().is_finite() {
        return Err(Error::NearZero(format!("1 + r1 r2 degenerates at k = {}", -xi)));
    }
    // follow the argument along the quadrature nodes from -R to -xi
    let r = spec.truncation_radius;
    let gl = gauss_legendre(spec.nodes_per_panel);
    let mut f = Functional::default();
    for (a, b) in graded_panels(-r, -xi, spec) {
        for t in &gl.nodes {
            f.push(0.5 * (a + b) + 0.5 * (b - a) * t, Complex64::new(0.0, 0.0));
        }
    }
    let (_, xs, vals) = apply_all(&log_jump(sd), &[&f], &[-r, -xi])?;
    debug_assert_eq!(*xs.last().unwrap(), -xi);
    let winding = vals.last().unwrap().im;
    let modulus = p.one_plus_r1r2().norm();
    let nu = Complex64::new(-modulus.ln() / (2.0 * PI), -winding / (2.0 * PI));
    Ok((nu, winding))
}

/// `delta(xi, k) = exp((1/2 pi i) int_{-inf}^{-xi} ln(1 + r1 r2)/(z - k) dz)`.
pub fn delta_at(sd: &SpectralData, xi: f64, k: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
    delta_at_endpoint(sd, -xi, k, spec)
}

fn delta_at_endpoint(sd: &SpectralData, endpoint: f64, k: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
    Ok(cauchy_halfline(&log_jump(sd), endpoint, k, spec)?.value.exp())
}

/// `chi(xi, k) = -(1/2 pi i) int_{-inf}^{-xi} ln(k - z) d ln(1 + r1 r2)`.
pub fn chi(sd: &SpectralData, xi: f64, k: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
    check_xi(xi)?;
    Ok(stieltjes_log_integral(&log_jump(sd), -xi, k, spec)?.value)
}

type CacheKey = (u64, u64, [u64; 5]);

fn cache() -> &'static Mutex<HashMap<CacheKey, PhaseData>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, PhaseData>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All phase quantities on the ray `xi > 0`; memoised.
pub fn phase_data(sd: &SpectralData, xi: f64) -> Result<PhaseData> {
    check_xi(xi)?;
    let spec = &sd.quadrature;
    let key = (xi.to_bits(), sd.fingerprint(), spec.cache_key());
    if let Some(p) = cache().lock().unwrap().get(&key) {
        return Ok(*p);
    }
    let (nu, winding) = nu_of_xi(sd, xi, spec)?;
    let chi_m = chi(sd, xi, Complex64::new(-xi, 0.0), spec)?;
    let delta0 = delta_at(sd, xi, Complex64::new(0.0, 0.0), spec)?;
    let delta_ik1 = delta_at(sd, xi, Complex64::new(0.0, sd.k1), spec)?;
    let pd = PhaseData {
        xi,
        nu,
        delta_winding: winding,
        chi_at_minus_xi: chi_m,
        delta0,
        delta_ik1,
        c0: sd.amplitude * delta0 * delta0 / Complex64::new(0.0, 2.0),
        assumption_b_ok: nu.im.abs() < 0.5,
    };
    cache().lock().unwrap().insert(key, pd);
    Ok(pd)
}

fn vanishes(r: Complex64) -> bool {
    r.norm() < R_ZERO_TOL
}

fn gamma_nonzero_nu(z: Complex64, nu: Complex64) -> Result<Complex64> {
    if nu == Complex64::new(0.0, 0.0) {
        return Err(Error::GammaPole(z));
    }
    complex_gamma(z)
}

/// Coefficients on the ray `xi > 0`.
///
/// `alpha2`, `alpha3` belong to `xi`; `alpha1` is the coefficient of the
/// mirrored ray `-xi` (where `x < 0`), so its case conditions test
/// `r_j(xi)` and its formulas use conjugated quantities at `-xi`.
pub fn alpha_coeffs(sd: &SpectralData, xi: f64, phase: &PhaseData) -> Result<(Complex64, Complex64, Complex64)> {
    check_xi(xi)?;
    let sqrt_pi = PI.sqrt();
    let i = Complex64::i();
    let (r1m, r2m) = reflection_coeffs(sd, -xi)?;
    let (r1p, r2p) = reflection_coeffs(sd, xi)?;
    let nu = phase.nu;
    let chi = phase.chi_at_minus_xi;
    let c0 = phase.c0;

    let alpha1 = match (vanishes(r1p), vanishes(r2p)) {
        (false, false) => {
            let nub = nu.conj();
            let num = sqrt_pi
                * (-PI / 2.0 * nub + i * PI / 4.0 - 2.0 * chi.conj() - 3.0 * i * nub * LN_2).exp();
            num / (r2m.conj() * gamma_nonzero_nu(-i * nub, nub)?)
        }
        (true, false) => r1m.conj() * Complex64::from_polar(1.0, 3.0 * PI / 4.0) / (2.0 * sqrt_pi),
        _ => Complex64::new(0.0, 0.0),
    };
    let (alpha2, alpha3) = match (vanishes(r1m), vanishes(r2m)) {
        (false, false) => {
            let a2 = c0 * c0 * sqrt_pi
                * (-PI / 2.0 * nu + 3.0 * i * PI / 4.0 - 2.0 * chi + 3.0 * i * nu * LN_2).exp()
                / (xi * xi * r2m * gamma_nonzero_nu(i * nu, nu)?);
            let a3 = sqrt_pi * (-PI / 2.0 * nu + i * PI / 4.0 + 2.0 * chi - 3.0 * i * nu * LN_2).exp()
                / (r1m * gamma_nonzero_nu(-i * nu, nu)?);
            (a2, a3)
        }
        (true, false) => (Complex64::new(0.0, 0.0), r2m * Complex64::from_polar(1.0, 3.0 * PI / 4.0) / (2.0 * sqrt_pi)),
        (false, true) => (
            c0 * c0 * r1m * Complex64::from_polar(1.0, PI / 4.0) / (2.0 * sqrt_pi * xi * xi),
            Complex64::new(0.0, 0.0),
        ),
        (true, true) => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    Ok((alpha1, alpha2, alpha3))
}

/// `A delta(xi, 0)^2`, the background the solution tends to on `x > 0` rays.
pub fn modulated_constant(sd: &SpectralData, xi: f64) -> Result<Complex64> {
    let p = phase_data(sd, xi)?;
    Ok(sd.amplitude * p.delta0 * p.delta0)
}

/// Regime on `x > 0` from `Im nu(-xi)`: `(-1/2, -1/6]`, `(-1/6, 1/6)`, `[1/6, 1/2)`.
pub fn right_regime(im_nu: f64) -> Regime {
    if im_nu <= -1.0 / 6.0 {
        Regime::RightA
    } else if im_nu < 1.0 / 6.0 {
        Regime::RightB
    } else {
        Regime::RightC
    }
}

/// Leading term of `q(x, t)` along the ray through `(x, t)`.
pub fn q_asymptotic(sd: &SpectralData, x: f64, t: f64) -> Result<AsymptoticResult> {
    if !(t > 0.0 && t.is_finite() && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("need t > 0 and finite x, got x = {x}, t = {t}")));
    }
    let xi = x / (4.0 * t);
    if xi == 0.0 {
        return Err(Error::ZeroRay);
    }
    let eta = xi.abs();
    let phase = phase_data(sd, eta)?;
    let im = phase.nu.im;
    if !phase.assumption_b_ok {
        return Err(Error::AssumptionB(im));
    }
    let re = phase.nu.re;
    let im_tag = if im.abs() < IM_NU_NOISE { 0.0 } else { im };
    let (a1, a2, a3) = alpha_coeffs(sd, eta, &phase)?;
    let rate = 4.0 * xi * xi;
    let forward = |amp| PowerTerm { amplitude: amp, power: -0.5 + im, phase_rate: rate, log_phase_coef: -re };
    let backward = |amp| PowerTerm { amplitude: amp, power: -0.5 - im, phase_rate: -rate, log_phase_coef: re };
    let (regime, error_order, terms) = if xi < 0.0 {
        let t1 = PowerTerm { amplitude: a1, power: -0.5 - im, phase_rate: rate, log_phase_coef: -re };
        (Regime::LeftDecay, r1_order(im_tag), vec![t1])
    } else {
        let constant = PowerTerm {
            amplitude: sd.amplitude * phase.delta0 * phase.delta0,
            power: 0.0,
            phase_rate: 0.0,
            log_phase_coef: 0.0,
        };
        match right_regime(im) {
            Regime::RightA => (Regime::RightA, r1_order(im_tag), vec![constant, backward(a2)]),
            Regime::RightB => (Regime::RightB, r3_order(im_tag), vec![constant, forward(a3), backward(a2)]),
            _ => (Regime::RightC, r2_order(im_tag), vec![constant, forward(a3)]),
        }
    };
    let value = terms.iter().map(|term| term.eval(t)).sum();
    Ok(AsymptoticResult {
        value,
        regime,
        error_order,
        terms,
        xi,
        nu: phase.nu,
        delta0: phase.delta0,
        transition_zone: eta < TRANSITION_FRACTION * sd.amplitude,
    })
}

/// Leading term at fixed `x0` as `t -> inf` for Case II data with `b(0) = 0`.
pub fn q_soliton_region(sd: &SpectralData, x0: f64, t: f64) -> Result<Complex64> {
    if sd.case_tag != CaseTag::CaseII || sd.b_at_0.norm() > B0_ZERO_TOL {
        return Err(Error::InvalidArgument(format!(
            "soliton-region formula needs Case II data with b(0) = 0 (case {}, |b(0)| = {:.3e})",
            sd.case_tag,
            sd.b_at_0.norm()
        )));
    }
    let spec = &sd.quadrature;
    let i = Complex64::i();
    let a = sd.amplitude;
    let k1 = sd.k1;
    let chi1 = stieltjes_log_integral(&log_jump(sd), 0.0, Complex64::new(0.0, 0.0), spec)?.value;
    let d = delta_at_endpoint(sd, 0.0, i * k1, spec)?;
    let lead = 2.0 * i * k1 * k1 * sd.da1_at_ik1 * d * d;
    let tail = a * sd.gamma1 * (Complex64::new(-2.0 * k1 * x0, -4.0 * k1 * k1 * t) + 2.0 * chi1).exp();
    let den = lead - tail;
    if den.norm() <= SOLITON_DENOM_TOL * lead.norm().max(tail.norm()) {
        return Err(Error::Singularity(format!("soliton-region denominator vanishes at x0 = {x0}, t = {t}")));
    }
    Ok(a * lead * (2.0 * chi1).exp() / den)
}

/// `(c0(xi), c1(x, t))`.
pub fn c_constants(sd: &SpectralData, phase: &PhaseData, x: f64, t: f64) -> (Complex64, Complex64) {
    let k1 = sd.k1;
    let c1 = sd.gamma1 / (sd.da1_at_ik1 * phase.delta_ik1 * phase.delta_ik1)
        * Complex64::new(-2.0 * k1 * x, -4.0 * k1 * k1 * t).exp();
    (phase.c0, c1)
}
