use std::f64::consts::PI;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jost::small_k_limit;
use super::profile::InitialProfile;
use super::spectrum::{JostSpectrum, SpectralPoint, Spectrum};
use crate::error::{Error, Result};
use crate::kernels::{cauchy_line, pv_cauchy, LogOf, QuadratureSpec, Samplable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    CaseI,
    CaseII,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::CaseI => "CaseI",
            CaseTag::CaseII => "CaseII",
        })
    }
}

/// Symmetric log-spaced real grid `+-[k_min, k_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KGridSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub nodes_per_sign: usize,
}

impl Default for KGridSpec {
    fn default() -> Self {
        Self { k_min: 1e-3, k_max: 50.0, nodes_per_sign: 2000 }
    }
}

impl KGridSpec {
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.k_min > 0.0 && self.k_max > self.k_min && self.k_max.is_finite()) {
            return Err(Error::Grid(format!("need 0 < k_min < k_max, got {} and {}", self.k_min, self.k_max)));
        }
        if self.nodes_per_sign < 4 {
            return Err(Error::Grid("nodes_per_sign must be at least 4".into()));
        }
        let n = self.nodes_per_sign;
        let ratio = self.k_max / self.k_min;
        let pos: Vec<f64> = (0..n).map(|j| self.k_min * ratio.powf(j as f64 / (n - 1) as f64)).collect();
        let mut all: Vec<f64> = pos.iter().rev().map(|k| -k).collect();
        all.extend(pos);
        Ok(all)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ValidationCheck {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.to_string(), value, threshold, pass: value.is_finite() && value < threshold }
    }
}

/// Scattering data of one profile.
#[derive(Clone)]
pub struct SpectralData {
    pub amplitude: f64,
    pub k_grid: Vec<f64>,
    pub a1: Vec<Complex64>,
    pub a2: Vec<Complex64>,
    pub b: Vec<Complex64>,
    /// `conj(b(-k))` at each node.
    pub b_reflected: Vec<Complex64>,
    pub k1: f64,
    pub gamma1: Complex64,
    pub case_tag: CaseTag,
    pub a11: Option<Complex64>,
    pub a2_at_0: Option<Complex64>,
    pub da2_at_0: Option<Complex64>,
    pub da1_at_ik1: Complex64,
    pub b_at_0: Complex64,
    pub k1_root: Option<f64>,
    pub conserved_at_origin: Option<f64>,
    pub quadrature: QuadratureSpec,
    pub validation: Vec<ValidationCheck>,
    spectrum: Arc<dyn Spectrum>,
    fingerprint: u64,
}

impl fmt::Debug for SpectralData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralData")
            .field("amplitude", &self.amplitude)
            .field("nodes", &self.k_grid.len())
            .field("k1", &self.k1)
            .field("gamma1", &self.gamma1)
            .field("case_tag", &self.case_tag)
            .finish_non_exhaustive()
    }
}

/// Threshold for declaring `a2(0)` (and the conserved combination) zero.
pub fn case_epsilon(amplitude: f64) -> f64 {
    1e-6 * amplitude.max(1.0)
}

/// Tolerance between the `k1` formula and the direct root.
pub const K1_TOL: f64 = 1e-6;

/// Small-`k` limits extrapolated from the four grid nodes nearest zero.
#[derive(Clone, Copy, Debug)]
struct SmallK {
    a2: Complex64,
    k_a1: Complex64,
    k2_a1: Complex64,
    b: Complex64,
    a2_over_k: Complex64,
}

fn lagrange_at_zero(xs: [f64; 4], ys: [Complex64; 4]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= xs[j] / (xs[j] - xs[i]);
            }
        }
        acc += ys[i] * w;
    }
    acc
}

fn small_k(k: &[f64], pts: &[SpectralPoint]) -> Result<SmallK> {
    let neg = k.partition_point(|&v| v < 0.0);
    if neg < 2 || k.len() - neg < 2 {
        return Err(Error::Grid("grid needs two nodes of each sign".into()));
    }
    let idx = [neg - 2, neg - 1, neg, neg + 1];
    let xs = idx.map(|i| k[i]);
    let f = |g: &dyn Fn(f64, &SpectralPoint) -> Complex64| lagrange_at_zero(xs, idx.map(|i| g(k[i], &pts[i])));
    Ok(SmallK {
        a2: f(&|_, p| p.a2),
        k_a1: f(&|k, p| k * p.a1),
        k2_a1: f(&|k, p| k * k * p.a1),
        b: f(&|_, p| p.b),
        a2_over_k: f(&|k, p| p.a2 / k),
    })
}

/// Maps spectral samples through a pointwise function.
pub(crate) struct SpectralMap<'a, F> {
    pub spectrum: &'a dyn Spectrum,
    pub f: F,
}

impl<F: Fn(f64, &SpectralPoint) -> Complex64> Samplable for SpectralMap<'_, F> {
    fn sample(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        let pts = self.spectrum.sample(xs)?;
        Ok(xs.iter().zip(&pts).map(|(x, p)| (self.f)(*x, p)).collect())
    }
}

/// Argument of the logarithm in the trace formula: `z^2/(z^2+1) (1 - b conj b(-z))`
/// in Case I, `1 - b conj b(-z)` in Case II.
fn trace_argument(case: CaseTag) -> impl Fn(f64, &SpectralPoint) -> Complex64 {
    move |z, p| match case {
        CaseTag::CaseI => z * z / (z * z + 1.0) * p.one_minus_bb(),
        CaseTag::CaseII => p.one_minus_bb(),
    }
}

/// Builds spectral data for a profile by direct Jost integration.
pub fn scattering_data(profile: Arc<InitialProfile>, grid: &KGridSpec, quad: &QuadratureSpec) -> Result<SpectralData> {
    let conserved = small_k_limit(&profile).at_origin();
    let spectrum = Arc::new(JostSpectrum::new(profile));
    SpectralData::from_spectrum(spectrum, grid.nodes()?, Some(conserved), quad)
}

/// Case from the extrapolated `a2(0)`, cross-checked against `4c/A^2` when available.
pub fn classify_case(amplitude: f64, a2_at_0: Complex64, conserved: Option<f64>) -> Result<CaseTag> {
    let eps = case_epsilon(amplitude);
    let by_a2 = a2_at_0.norm() < eps;
    if let Some(c) = conserved {
        let by_v = (4.0 * c / (amplitude * amplitude)).abs() < eps;
        if by_v != by_a2 {
            return Err(Error::CaseMismatch(format!(
                "|a2(0)| = {:.3e} but 4c/A^2 = {:.3e} (threshold {eps:.1e})",
                a2_at_0.norm(),
                4.0 * c / (amplitude * amplitude)
            )));
        }
    }
    Ok(if by_a2 { CaseTag::CaseII } else { CaseTag::CaseI })
}

impl SpectralData {
    /// Runs the full pipeline on any spectrum: grid sampling, case
    /// classification, `k1`, `gamma1`, the trace-formula derivative and the
    /// validation suite.
    pub fn from_spectrum(
        spectrum: Arc<dyn Spectrum>,
        k_grid: Vec<f64>,
        conserved: Option<f64>,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        if k_grid.windows(2).any(|w| !(w[0] < w[1])) || k_grid.contains(&0.0) {
            return Err(Error::Grid("k grid must be strictly increasing and exclude 0".into()));
        }
        let amplitude = spectrum.amplitude();
        let pts = spectrum.sample(&k_grid)?;
        let sk = small_k(&k_grid, &pts)?;
        let case_tag = classify_case(amplitude, sk.a2, conserved)?;
        let mut sd = SpectralData {
            amplitude,
            a1: pts.iter().map(|p| p.a1).collect(),
            a2: pts.iter().map(|p| p.a2).collect(),
            b: pts.iter().map(|p| p.b).collect(),
            b_reflected: pts.iter().map(|p| p.b_reflected).collect(),
            k_grid,
            k1: f64::NAN,
            gamma1: Complex64::new(f64::NAN, f64::NAN),
            case_tag,
            a11: (case_tag == CaseTag::CaseII).then_some(sk.k_a1),
            a2_at_0: (case_tag == CaseTag::CaseI).then_some(sk.a2),
            da2_at_0: (case_tag == CaseTag::CaseII).then_some(sk.a2_over_k),
            da1_at_ik1: Complex64::new(f64::NAN, f64::NAN),
            b_at_0: sk.b,
            k1_root: None,
            conserved_at_origin: conserved,
            quadrature: *quad,
            validation: Vec::new(),
            spectrum,
            fingerprint: 0,
        };
        let est = compute_k1_detailed(&sd)?;
        sd.k1 = est.formula;
        sd.k1_root = est.root;
        sd.da1_at_ik1 = da1_at_ik1(&sd)?;
        sd.gamma1 = match sd.spectrum.norming_constant(sd.k1) {
            Some(g) => g?,
            None => return Err(Error::Norming("spectrum source cannot provide gamma1".into())),
        };
        sd.validation = validation_suite(&sd, &sk);
        sd.fingerprint = sd.compute_fingerprint();
        Ok(sd)
    }

    /// Reassembles stored data; scalars are taken as given.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        spectrum: Arc<dyn Spectrum>,
        k_grid: Vec<f64>,
        a1: Vec<Complex64>,
        a2: Vec<Complex64>,
        b: Vec<Complex64>,
        scalars: SpectralScalars,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        let n = k_grid.len();
        if a1.len() != n || a2.len() != n || b.len() != n {
            return Err(Error::Grid("spectral columns differ in length".into()));
        }
        let b_reflected = spectrum.sample(&k_grid)?.iter().map(|p| p.b_reflected).collect();
        let mut sd = SpectralData {
            amplitude: spectrum.amplitude(),
            k_grid,
            a1,
            a2,
            b,
            b_reflected,
            k1: scalars.k1,
            gamma1: scalars.gamma1,
            case_tag: scalars.case_tag,
            a11: scalars.a11,
            a2_at_0: scalars.a2_at_0,
            da2_at_0: scalars.da2_at_0,
            da1_at_ik1: scalars.da1_at_ik1,
            b_at_0: scalars.b_at_0,
            k1_root: None,
            conserved_at_origin: None,
            quadrature: *quad,
            validation: Vec::new(),
            spectrum,
            fingerprint: 0,
        };
        sd.fingerprint = sd.compute_fingerprint();
        Ok(sd)
    }

    pub fn scalars(&self) -> SpectralScalars {
        SpectralScalars {
            amplitude: self.amplitude,
            k1: self.k1,
            gamma1: self.gamma1,
            case_tag: self.case_tag,
            a11: self.a11,
            a2_at_0: self.a2_at_0,
            da2_at_0: self.da2_at_0,
            da1_at_ik1: self.da1_at_ik1,
            b_at_0: self.b_at_0,
        }
    }

    pub fn spectrum(&self) -> &dyn Spectrum {
        self.spectrum.as_ref()
    }

    /// Stable hash of the grid and the derived scalars; keys the phase cache.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn validation_passed(&self) -> bool {
        self.validation.iter().all(|c| c.pass)
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.amplitude.to_bits().hash(&mut h);
        for (k, ((a1, a2), b)) in self.k_grid.iter().zip(self.a1.iter().zip(&self.a2).zip(&self.b)) {
            for v in [*k, a1.re, a1.im, a2.re, a2.im, b.re, b.im] {
                v.to_bits().hash(&mut h);
            }
        }
        for v in [self.k1, self.gamma1.re, self.gamma1.im, self.da1_at_ik1.re, self.da1_at_ik1.im] {
            v.to_bits().hash(&mut h);
        }
        self.case_tag.hash(&mut h);
        self.quadrature.cache_key().hash(&mut h);
        h.finish()
    }
}

/// Scalars stored next to the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralScalars {
    pub amplitude: f64,
    pub k1: f64,
    pub gamma1: Complex64,
    pub case_tag: CaseTag,
    pub a11: Option<Complex64>,
    pub a2_at_0: Option<Complex64>,
    pub da2_at_0: Option<Complex64>,
    pub da1_at_ik1: Complex64,
    pub b_at_0: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct K1Estimate {
    pub formula: f64,
    /// Zero of the independently computed `a1(i kappa)`, when the source supports it.
    pub root: Option<f64>,
}

/// `k1` from the closed-form integral for the current case.
pub fn compute_k1(sd: &SpectralData) -> Result<f64> {
    compute_k1_detailed(sd).map(|e| e.formula)
}

pub fn compute_k1_detailed(sd: &SpectralData) -> Result<K1Estimate> {
    let a = sd.amplitude;
    let spec = &sd.quadrature;
    let k1c = match sd.case_tag {
        CaseTag::CaseI => {
            let f = LogOf(SpectralMap { spectrum: sd.spectrum(), f: trace_argument(CaseTag::CaseI) });
            let i = pv_cauchy(&f, 0.0, spec)?.value;
            a / 2.0 * (-i / Complex64::new(0.0, 2.0 * PI)).exp()
        }
        CaseTag::CaseII => {
            let f = LogOf(SpectralMap { spectrum: sd.spectrum(), f: trace_argument(CaseTag::CaseII) });
            let i = pv_cauchy(&f, 0.0, spec)?.value;
            let e1 = (i / Complex64::new(0.0, 2.0 * PI)).exp();
            let b0 = sd.b_at_0;
            let e2 = Complex64::new(1.0 - b0.norm_sqr(), 0.0).sqrt();
            if e2.norm() < 1e-12 {
                return Err(Error::K1("1 - |b(0)|^2 vanishes".into()));
            }
            let rb = b0.re;
            a * ((rb * rb + e2 * e2).sqrt() - rb) / (2.0 * e1 * e2)
        }
    };
    if !(k1c.re > 0.0) || k1c.im.abs() > 1e-8 * k1c.norm() {
        return Err(Error::K1(format!("formula gives k1 = {k1c}, expected a positive real value")));
    }
    let formula = k1c.re;
    let root = match root_search(sd.spectrum(), a)? {
        Some(r) => {
            if (r - formula).abs() > K1_TOL {
                return Err(Error::K1(format!("formula k1 = {formula} but a1(i kappa) vanishes at {r}")));
            }
            Some(r)
        }
        None => None,
    };
    Ok(K1Estimate { formula, root })
}

/// Scans `a1(i kappa)` for `kappa` in `[0.01 A, 10 A]`; exactly one sign change is required.
fn root_search(spectrum: &dyn Spectrum, amplitude: f64) -> Result<Option<f64>> {
    let eval = |kappa: f64| -> Option<Result<f64>> {
        spectrum.a1_upper(Complex64::new(0.0, kappa)).map(|r| r.map(|v| v.re))
    };
    if eval(amplitude).is_none() {
        return Ok(None);
    }
    let n = 80;
    let lo = 0.01 * amplitude;
    let kap: Vec<f64> = (0..n).map(|j| lo * 1000f64.powf(j as f64 / (n - 1) as f64)).collect();
    let vals = kap.iter().map(|&k| eval(k).unwrap()).collect::<Result<Vec<f64>>>()?;
    let brackets: Vec<usize> = (0..n - 1).filter(|&j| vals[j] == 0.0 || vals[j].signum() != vals[j + 1].signum()).collect();
    if brackets.len() != 1 {
        return Err(Error::K1(format!(
            "a1 on the imaginary axis has {} sign changes in [{lo}, {}], expected exactly one",
            brackets.len(),
            kap[n - 1]
        )));
    }
    let j = brackets[0];
    let f = |k: f64| eval(k).unwrap();
    brent(f, kap[j], kap[j + 1], vals[j], vals[j + 1], 1e-14).map(Some)
}

fn brent(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::K1("root refinement did not converge".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceTarget {
    A1,
    A2,
}

/// `chi(k) = (1/2 pi i) int ln F(z)/(z - k) dz` over the real line; on the
/// axis the boundary value from above (`upper`) or below.
fn trace_chi(sd: &SpectralData, k: Complex64, upper: bool) -> Result<Complex64> {
    let f = LogOf(SpectralMap { spectrum: sd.spectrum(), f: trace_argument(sd.case_tag) });
    if k.im != 0.0 {
        return Ok(cauchy_line(&f, k, &sd.quadrature)?.value);
    }
    let pv = pv_cauchy(&f, k.re, &sd.quadrature)?.value;
    let fk = f.sample(&[k.re])?[0];
    let half = if upper { 0.5 } else { -0.5 };
    Ok(half * fk + pv / Complex64::new(0.0, 2.0 * PI))
}

/// Analytic continuation of `a1` (closed upper half-plane) or `a2` (closed
/// lower half-plane) from `b` alone.
pub fn trace_eval(sd: &SpectralData, k: Complex64, which: TraceTarget) -> Result<Complex64> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularK("trace formula at k = 0".into()));
    }
    let i = Complex64::i();
    let ik1 = i * sd.k1;
    match which {
        TraceTarget::A1 => {
            if k.im < 0.0 {
                return Err(Error::HalfPlane(format!("a1 is analytic in the upper half-plane, got k = {k}")));
            }
            let chi = trace_chi(sd, k, true)?;
            Ok(match sd.case_tag {
                CaseTag::CaseI => (k - ik1) * (k + i) / (k * k) * chi.exp(),
                CaseTag::CaseII => (k - ik1) / k * chi.exp(),
            })
        }
        TraceTarget::A2 => {
            if k.im > 0.0 {
                return Err(Error::HalfPlane(format!("a2 is analytic in the lower half-plane, got k = {k}")));
            }
            let chi = trace_chi(sd, k, false)?;
            Ok(match sd.case_tag {
                CaseTag::CaseI => (k - i) / (k - ik1) * (-chi).exp(),
                CaseTag::CaseII => k / (k - ik1) * (-chi).exp(),
            })
        }
    }
}

/// `d a1/dk` at `i k1`: the cofactor of the explicit `(k - i k1)` factor.
fn da1_at_ik1(sd: &SpectralData) -> Result<Complex64> {
    let i = Complex64::i();
    let ik1 = i * sd.k1;
    let chi = trace_chi(sd, ik1, true)?;
    Ok(match sd.case_tag {
        CaseTag::CaseI => (ik1 + i) / (ik1 * ik1) * chi.exp(),
        CaseTag::CaseII => chi.exp() / ik1,
    })
}

/// Threshold below which `a1` or `a2` counts as vanishing in `r1`, `r2`.
pub const REFLECTION_ZERO_TOL: f64 = 1e-12;

/// `(r1, r2) = (b/a1, conj(b(-k))/a2)` at a real `k`.
pub fn reflection_coeffs(sd: &SpectralData, k: f64) -> Result<(Complex64, Complex64)> {
    let p = sd.spectrum().sample(&[k])?[0];
    if p.a1.norm() < REFLECTION_ZERO_TOL || p.a2.norm() < REFLECTION_ZERO_TOL {
        return Err(Error::NearZero(format!("a1 or a2 vanishes at k = {k}")));
    }
    Ok((p.r1(), p.r2()))
}

fn validation_suite(sd: &SpectralData, sk: &SmallK) -> Vec<ValidationCheck> {
    let mut out = Vec::new();
    let n = sd.k_grid.len();
    let det = (0..n)
        .map(|j| (sd.a1[j] * sd.a2[j] + sd.b[j] * sd.b_reflected[j] - 1.0).norm() / (sd.a1[j] * sd.a2[j]).norm().max(1.0))
        .fold(0.0, f64::max);
    out.push(ValidationCheck::below("determinant", det, 1e-8));
    let mut sym: f64 = 0.0;
    for j in 0..n {
        if let Ok(m) = sd.k_grid.binary_search_by(|v| v.total_cmp(&-sd.k_grid[j])) {
            for (x, y) in [(sd.a1[m], sd.a1[j]), (sd.a2[m], sd.a2[j])] {
                sym = sym.max((x.conj() - y).norm() / y.norm().max(1.0));
            }
        }
    }
    out.push(ValidationCheck::below("symmetry", sym, 1e-8));
    match sd.case_tag {
        CaseTag::CaseI => {
            let target = sd.amplitude * sd.amplitude * sk.a2 / 4.0;
            out.push(ValidationCheck::below("small_k_law", (sk.k2_a1 - target).norm() / target.norm(), 1e-3));
        }
        CaseTag::CaseII => {
            let a11 = sk.k_a1;
            out.push(ValidationCheck::below("a11_real_part", a11.re.abs() / a11.norm().max(1.0), 1e-6));
            out.push(ValidationCheck {
                name: "a11_negative_imaginary".into(),
                value: a11.im,
                threshold: 0.0,
                pass: a11.im < 0.0,
            });
            let rel = (a11 * sk.a2_over_k - (1.0 - sk.b.norm_sqr())).norm();
            out.push(ValidationCheck::below("a11_da2_relation", rel, 1e-6));
        }
    }
    out.push(ValidationCheck::below("gamma1_modulus", (sd.gamma1.norm() - 1.0).abs(), 1e-6));
    if let Some(r) = sd.k1_root {
        out.push(ValidationCheck::below("k1_root_agreement", (r - sd.k1).abs(), K1_TOL));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{PureStepSpectrum, ReflectionlessSpectrum};

    fn small_grid() -> Vec<f64> {
        KGridSpec { k_min: 1e-3, k_max: 50.0, nodes_per_sign: 200 }.nodes().unwrap()
    }

    #[test]
    fn grid_is_symmetric_and_sorted() {
        let g = KGridSpec::default().nodes().unwrap();
        assert_eq!(g.len(), 4000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g[0], -g[3999]);
        assert!((g[2000] - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn lagrange_zero_is_exact_for_cubics() {
        let xs = [-0.3, -0.1, 0.2, 0.5];
        let ys = xs.map(|x| Complex64::new(2.0 - x + 3.0 * x * x * x, x));
        assert!((lagrange_at_zero(xs, ys) - 2.0).norm() < 1e-14);
    }

    #[test]
    fn pure_step_pipeline() {
        let sd = SpectralData::from_spectrum(
            Arc::new(PureStepSpectrum { amplitude: 1.0 }),
            small_grid(),
            Some(0.25),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(sd.case_tag, CaseTag::CaseI);
        assert!((sd.k1 - 0.5).abs() < 1e-10, "{}", sd.k1);
        assert!((sd.k1_root.unwrap() - 0.5).abs() < 1e-12);
        assert!((sd.gamma1 + 1.0).norm() < 1e-12);
        assert!(sd.validation_passed(), "{:?}", sd.validation);
        // a1(k) = (k^2 + A^2/4)/k^2 so a1'(i/2) = 2 i k1 / (i k1)^2 = -2i / k1 ... check directly
        let expect = 2.0 * Complex64::new(0.0, 0.5) / (Complex64::new(0.0, 0.5) * Complex64::new(0.0, 0.5));
        assert!((sd.da1_at_ik1 - expect).norm() < 1e-9);
    }

    #[test]
    fn pure_step_scales_with_amplitude() {
        let sd = SpectralData::from_spectrum(
            Arc::new(PureStepSpectrum { amplitude: 2.0 }),
            small_grid(),
            Some(1.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((sd.k1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_formula_off_axis() {
        let sd = SpectralData::from_spectrum(
            Arc::new(PureStepSpectrum { amplitude: 1.0 }),
            small_grid(),
            Some(0.25),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let v = trace_eval(&sd, Complex64::new(0.0, 2.0), TraceTarget::A1).unwrap();
        assert!((v - 0.9375).norm() < 1e-9, "{v}");
        let z = trace_eval(&sd, Complex64::new(0.0, sd.k1), TraceTarget::A1).unwrap();
        assert!(z.norm() < 1e-12);
        let far = trace_eval(&sd, Complex64::new(0.0, 80.0), TraceTarget::A1).unwrap();
        assert!((far - 1.0).norm() < 1e-3);
        let a2 = trace_eval(&sd, Complex64::new(0.7, -0.4), TraceTarget::A2).unwrap();
        assert!((a2 - 1.0).norm() < 1e-9);
        let real = trace_eval(&sd, Complex64::new(1.0, 0.0), TraceTarget::A1).unwrap();
        assert!((real - 1.25).norm() < 1e-8, "{real}");
        assert!(matches!(trace_eval(&sd, Complex64::new(0.0, -1.0), TraceTarget::A1), Err(Error::HalfPlane(_))));
        assert!(matches!(trace_eval(&sd, Complex64::new(0.0, 1.0), TraceTarget::A2), Err(Error::HalfPlane(_))));
    }

    #[test]
    fn reflectionless_pipeline() {
        let sd = SpectralData::from_spectrum(
            Arc::new(ReflectionlessSpectrum { amplitude: 1.0, phi1: 1.0 }),
            small_grid(),
            Some(0.0),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(sd.case_tag, CaseTag::CaseII);
        assert!((sd.k1 - 0.5).abs() < 1e-12);
        assert!((sd.gamma1 - Complex64::from_polar(1.0, 1.0)).norm() < 1e-15);
        assert!((sd.a11.unwrap() - Complex64::new(0.0, -0.5)).norm() < 1e-12);
        assert!(sd.validation_passed(), "{:?}", sd.validation);
        let (r1, r2) = reflection_coeffs(&sd, 0.3).unwrap();
        assert_eq!((r1, r2), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn case_mismatch_is_an_error() {
        let r = classify_case(1.0, Complex64::new(1.0, 0.0), Some(0.0));
        assert!(matches!(r, Err(Error::CaseMismatch(_))));
        assert_eq!(classify_case(1.0, Complex64::new(1e-9, 0.0), Some(1e-12)).unwrap(), CaseTag::CaseII);
        assert_eq!(classify_case(1.0, Complex64::new(1.0, 0.0), None).unwrap(), CaseTag::CaseI);
    }
}
