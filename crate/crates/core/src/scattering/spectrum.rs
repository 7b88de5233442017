use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::jost::{a1_direct, jost_column, scattering_matrix, Side};
use super::profile::InitialProfile;
use crate::error::{Error, Result};

/// Scattering data at one real `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub a1: Complex64,
    pub a2: Complex64,
    pub b: Complex64,
    /// `conj(b(-k))`, the negated (1,2) entry of `S(k)`.
    pub b_reflected: Complex64,
}

impl SpectralPoint {
    pub fn r1(&self) -> Complex64 {
        self.b / self.a1
    }

    pub fn r2(&self) -> Complex64 {
        self.b_reflected / self.a2
    }

    /// `1 + r1 r2`.
    pub fn one_plus_r1r2(&self) -> Complex64 {
        1.0 + self.b * self.b_reflected / (self.a1 * self.a2)
    }

    /// `1 - b(k) conj(b(-k))`, equal to `a1 a2` by the determinant relation.
    pub fn one_minus_bb(&self) -> Complex64 {
        1.0 - self.b * self.b_reflected
    }

    pub fn det(&self) -> Complex64 {
        self.a1 * self.a2 + self.b * self.b_reflected
    }
}

/// Source of spectral functions on the real line and, when available,
/// of `a1` and the norming constant in the upper half-plane.
pub trait Spectrum: Send + Sync + fmt::Debug {
    fn amplitude(&self) -> f64;

    /// Values at real, nonzero `ks`, in input order.
    fn sample(&self, ks: &[f64]) -> Result<Vec<SpectralPoint>>;

    /// `a1(k)` for `Im k > 0` computed independently of any trace formula.
    fn a1_upper(&self, _k: Complex64) -> Option<Result<Complex64>> {
        None
    }

    /// Norming constant `gamma1` at the zero `i k1` of `a1`.
    fn norming_constant(&self, _k1: f64) -> Option<Result<Complex64>> {
        None
    }
}

fn nonzero(ks: &[f64]) -> Result<()> {
    match ks.iter().find(|k| **k == 0.0 || !k.is_finite()) {
        Some(k) => Err(Error::SingularK(format!("spectral sample requested at k = {k}"))),
        None => Ok(()),
    }
}

/// Spectral data by direct integration of the Lax pair.
#[derive(Debug, Clone)]
pub struct JostSpectrum {
    profile: Arc<InitialProfile>,
}

impl JostSpectrum {
    pub fn new(profile: Arc<InitialProfile>) -> Self {
        Self { profile }
    }

    pub fn profile(&self) -> &InitialProfile {
        &self.profile
    }
}

impl Spectrum for JostSpectrum {
    fn amplitude(&self) -> f64 {
        self.profile.amplitude()
    }

    fn sample(&self, ks: &[f64]) -> Result<Vec<SpectralPoint>> {
        nonzero(ks)?;
        ks.par_iter()
            .map(|&k| {
                let s = scattering_matrix(&self.profile, k)?;
                Ok(SpectralPoint { a1: s.0[0][0], a2: s.0[1][1], b: s.0[1][0], b_reflected: -s.0[0][1] })
            })
            .collect()
    }

    fn a1_upper(&self, k: Complex64) -> Option<Result<Complex64>> {
        Some(a1_direct(&self.profile, k))
    }

    fn norming_constant(&self, k1: f64) -> Option<Result<Complex64>> {
        Some(gamma1_norming(&self.profile, k1))
    }
}

/// Tolerance on `| |gamma1| - 1 |` and on the column mismatch.
pub const NORMING_TOL: f64 = 1e-6;

fn ratio_of_columns(c1: [Complex64; 2], c2: [Complex64; 2]) -> Result<Complex64> {
    let den = c2[0].norm_sqr() + c2[1].norm_sqr();
    if den == 0.0 {
        return Err(Error::Norming("right column vanishes".into()));
    }
    let g = (c2[0].conj() * c1[0] + c2[1].conj() * c1[1]) / den;
    let resid = ((c1[0] - g * c2[0]).norm_sqr() + (c1[1] - g * c2[1]).norm_sqr()).sqrt();
    let scale = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
    if resid > NORMING_TOL * scale {
        return Err(Error::Norming(format!(
            "componentwise ratios disagree (residual {:.3e}); k1 is likely inaccurate",
            resid / scale
        )));
    }
    if (g.norm() - 1.0).abs() > NORMING_TOL {
        return Err(Error::Norming(format!("|gamma1| = {} differs from 1", g.norm())));
    }
    Ok(g)
}

/// `gamma1` from `Psi_1^(1)(0, i k1) = gamma1 Psi_2^(2)(0, i k1)`, least squares over both components.
pub fn gamma1_norming(profile: &InitialProfile, k1: f64) -> Result<Complex64> {
    if !(k1 > 0.0) {
        return Err(Error::Norming(format!("k1 = {k1} must be positive")));
    }
    let k = Complex64::new(0.0, k1);
    ratio_of_columns(jost_column(profile, k, Side::Left)?, jost_column(profile, k, Side::Right)?)
}

/// Closed-form spectrum of the sharp step.
#[derive(Debug, Clone, Copy)]
pub struct PureStepSpectrum {
    pub amplitude: f64,
}

impl Spectrum for PureStepSpectrum {
    fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn sample(&self, ks: &[f64]) -> Result<Vec<SpectralPoint>> {
        nonzero(ks)?;
        Ok(ks
            .iter()
            .map(|&k| {
                let s = crate::exact::pure_step_s(self.amplitude, Complex64::new(k, 0.0)).unwrap();
                SpectralPoint { a1: s.0[0][0], a2: s.0[1][1], b: s.0[1][0], b_reflected: -s.0[0][1] }
            })
            .collect())
    }

    fn a1_upper(&self, k: Complex64) -> Option<Result<Complex64>> {
        Some(crate::exact::pure_step_s(self.amplitude, k).map(|s| s.0[0][0]))
    }

    fn norming_constant(&self, k1: f64) -> Option<Result<Complex64>> {
        let k = Complex64::new(0.0, k1);
        let c = self.amplitude / (Complex64::new(0.0, 2.0) * k);
        let one = Complex64::new(1.0, 0.0);
        Some(ratio_of_columns([one, c], [c, one]))
    }
}

/// Reflectionless one-soliton data: `b = 0`, `a1 = (k - iA/2)/k`, `a2 = k/(k - iA/2)`.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionlessSpectrum {
    pub amplitude: f64,
    pub phi1: f64,
}

impl Spectrum for ReflectionlessSpectrum {
    fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn sample(&self, ks: &[f64]) -> Result<Vec<SpectralPoint>> {
        nonzero(ks)?;
        let z = Complex64::new(0.0, 0.5 * self.amplitude);
        Ok(ks
            .iter()
            .map(|&k| {
                let k = Complex64::new(k, 0.0);
                SpectralPoint {
                    a1: (k - z) / k,
                    a2: k / (k - z),
                    b: Complex64::new(0.0, 0.0),
                    b_reflected: Complex64::new(0.0, 0.0),
                }
            })
            .collect())
    }

    fn a1_upper(&self, k: Complex64) -> Option<Result<Complex64>> {
        Some(Ok((k - Complex64::new(0.0, 0.5 * self.amplitude)) / k))
    }

    fn norming_constant(&self, _k1: f64) -> Option<Result<Complex64>> {
        Some(Ok(Complex64::from_polar(1.0, self.phi1)))
    }
}

/// Spectral functions interpolated from a stored grid.
///
/// Four-point Lagrange interpolation of the smooth combinations `k^2 a1`,
/// `a2`, `k b` inside the grid; `1/k` decay beyond its largest node.
#[derive(Debug, Clone)]
pub struct TabulatedSpectrum {
    amplitude: f64,
    k: Vec<f64>,
    a1: Vec<Complex64>,
    a2: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl TabulatedSpectrum {
    pub fn new(amplitude: f64, k: Vec<f64>, a1: Vec<Complex64>, a2: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if k.len() < 8 || a1.len() != k.len() || a2.len() != k.len() || b.len() != k.len() {
            return Err(Error::Grid("tabulated spectrum needs at least 8 nodes and equal column lengths".into()));
        }
        if k.windows(2).any(|w| !(w[0] < w[1])) || k.contains(&0.0) {
            return Err(Error::Grid("k grid must be strictly increasing and exclude 0".into()));
        }
        if k[0] >= 0.0 || *k.last().unwrap() <= 0.0 {
            return Err(Error::Grid("k grid must contain both signs".into()));
        }
        Ok(Self { amplitude, k, a1, a2, b })
    }

    fn interp(&self, k: f64) -> (Complex64, Complex64, Complex64) {
        let neg = self.k.partition_point(|&v| v < 0.0);
        let (lo, hi) = if k < 0.0 { (0, neg) } else { (neg, self.k.len()) };
        let nodes = &self.k[lo..hi];
        let kmax = if k < 0.0 { nodes[0] } else { nodes[nodes.len() - 1] };
        if k.abs() > kmax.abs() {
            let j = if k < 0.0 { lo } else { hi - 1 };
            let s = kmax / k;
            let one = Complex64::new(1.0, 0.0);
            return (one + (self.a1[j] - one) * s, one + (self.a2[j] - one) * s, self.b[j] * s);
        }
        let pos = nodes.partition_point(|&v| v < k);
        let start = pos.saturating_sub(2).min(nodes.len() - 4);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for i in 0..4 {
            let xi = nodes[start + i];
            let mut w = 1.0;
            for j in 0..4 {
                if i != j {
                    let xj = nodes[start + j];
                    w *= (k - xj) / (xi - xj);
                }
            }
            let g = lo + start + i;
            out[0] += w * self.a1[g] * xi * xi;
            out[1] += w * self.a2[g];
            out[2] += w * self.b[g] * xi;
        }
        (out[0] / (k * k), out[1], out[2] / k)
    }
}

impl Spectrum for TabulatedSpectrum {
    fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn sample(&self, ks: &[f64]) -> Result<Vec<SpectralPoint>> {
        nonzero(ks)?;
        Ok(ks
            .iter()
            .map(|&k| {
                let (a1, a2, b) = self.interp(k);
                let (_, _, bm) = self.interp(-k);
                SpectralPoint { a1, a2, b, b_reflected: bm.conj() }
            })
            .collect())
    }
}
