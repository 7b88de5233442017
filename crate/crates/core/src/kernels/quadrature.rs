use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::unwrap::{continuous_log, unwrap_arg};
use crate::error::{Error, Result};

/// Panelled Gauss-Legendre layout for the singular integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub truncation_radius: f64,
    /// Geometrically graded panels per half segment.
    pub panel_count: usize,
    pub grading_ratio: f64,
    pub nodes_per_panel: usize,
    pub tail_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            truncation_radius: 200.0,
            panel_count: 12,
            grading_ratio: 0.5,
            nodes_per_panel: 16,
            tail_tolerance: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidQuadrature(m.to_string()));
        if !(self.truncation_radius.is_finite() && self.truncation_radius >= 10.0) {
            return bad("truncation_radius must be finite and >= 10");
        }
        if self.panel_count == 0 || self.panel_count > 64 {
            return bad("panel_count must lie in 1..=64");
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return bad("grading_ratio must lie in (0, 1)");
        }
        if self.nodes_per_panel < 2 || self.nodes_per_panel > 128 {
            return bad("nodes_per_panel must lie in 2..=128");
        }
        if !(self.tail_tolerance > 0.0) {
            return bad("tail_tolerance must be positive");
        }
        Ok(())
    }

    pub(crate) fn cache_key(&self) -> [u64; 5] {
        [
            self.truncation_radius.to_bits(),
            self.panel_count as u64,
            self.grading_ratio.to_bits(),
            self.nodes_per_panel as u64,
            self.tail_tolerance.to_bits(),
        ]
    }
}

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(n).or_insert_with(|| Arc::new(compute_gauss_legendre(n))).clone()
}

fn compute_gauss_legendre(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Something that can be sampled on an ascending list of real points.
pub trait Samplable {
    fn sample(&self, xs: &[f64]) -> Result<Vec<Complex64>>;
}

impl<F> Samplable for F
where
    F: Fn(f64) -> Complex64,
{
    fn sample(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        Ok(xs.iter().map(|&x| self(x)).collect())
    }
}

/// Logarithm of the wrapped function, continued along the ascending sample
/// points starting from the principal branch at the leftmost point.
pub struct LogOf<S>(pub S);

impl<S: Samplable> Samplable for LogOf<S> {
    fn sample(&self, xs: &[f64]) -> Result<Vec<Complex64>> {
        continuous_log(&self.0.sample(xs)?)
    }
}

/// Value of a quadrature together with the estimated tail error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// Linear functional `sum w_i g(x_i)`.
#[derive(Clone, Debug, Default)]
pub(crate) struct Functional {
    terms: Vec<(f64, Complex64)>,
}

impl Functional {
    pub(crate) fn push(&mut self, x: f64, w: Complex64) {
        self.terms.push((x, w));
    }

    fn extend_scaled(&mut self, other: &Functional, s: Complex64) {
        self.terms.extend(other.terms.iter().map(|&(x, w)| (x, w * s)));
    }

    fn total_weight(&self) -> Complex64 {
        self.terms.iter().map(|t| t.1).sum()
    }

    fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.0)
    }
}

/// Samples `g` once on the sorted union of all points and applies each functional.
pub(crate) fn apply_all<S: Samplable + ?Sized>(
    g: &S,
    functionals: &[&Functional],
    extra_points: &[f64],
) -> Result<(Vec<Complex64>, Vec<f64>, Vec<Complex64>)> {
    let mut xs: Vec<f64> = functionals.iter().flat_map(|f| f.points()).collect();
    xs.extend_from_slice(extra_points);
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite quadrature node".into()));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let vals = g.sample(&xs)?;
    if vals.len() != xs.len() {
        return Err(Error::InvalidArgument("sampler returned wrong length".into()));
    }
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidArgument("sampled function is not finite on the path".into()));
    }
    let lookup = |x: f64| vals[xs.binary_search_by(|p| p.total_cmp(&x)).unwrap()];
    let results = functionals
        .iter()
        .map(|f| f.terms.iter().map(|&(x, w)| w * lookup(x)).sum())
        .collect();
    Ok((results, xs, vals))
}

fn gl_panel(f: &mut Functional, a: f64, b: f64, n: usize, weight: impl Fn(f64) -> Complex64) {
    let gl = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for (t, w) in gl.nodes.iter().zip(&gl.weights) {
        let x = mid + half * t;
        f.push(x, half * w * weight(x));
    }
}

/// Panels on `[a, b]` graded geometrically toward both ends.
pub(crate) fn graded_panels(a: f64, b: f64, spec: &QuadratureSpec) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = mid - a;
    let n = spec.panel_count;
    let rho = spec.grading_ratio;
    let mut edges = Vec::with_capacity(2 * n + 1);
    edges.push(a);
    for j in (0..n - 1).rev() {
        edges.push(a + half * rho.powi(j as i32 + 1));
    }
    edges.push(mid);
    for j in 0..n - 1 {
        edges.push(b - half * rho.powi(j as i32 + 1));
    }
    edges.push(b);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

fn panels_with_breaks(a: f64, b: f64, breaks: &[f64], spec: &QuadratureSpec) -> Vec<(f64, f64)> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    pts.windows(2).flat_map(|w| graded_panels(w[0], w[1], spec)).collect()
}

/// `h -> int_a^b h(z)/(z-k) dz` on a finite interval.
///
/// When `Re k` is strictly inside and `k` is off the axis, the value
/// `h(Re k)` is subtracted and its integral added back in closed form.
/// Breakpoints are skipped: panels already grade toward them and `h` may
/// not be defined there.
fn finite_cauchy(a: f64, b: f64, k: Complex64, breaks: &[f64], spec: &QuadratureSpec) -> Result<Functional> {
    let inside = k.re > a && k.re < b && !breaks.contains(&k.re);
    if k.im == 0.0 && k.re >= a && k.re <= b {
        return Err(Error::OnCut(k));
    }
    let mut bp: Vec<f64> = breaks.to_vec();
    if inside {
        bp.push(k.re);
    }
    let mut f = Functional::default();
    for (pa, pb) in panels_with_breaks(a, b, &bp, spec) {
        gl_panel(&mut f, pa, pb, spec.nodes_per_panel, |x| 1.0 / (x - k));
    }
    if inside {
        let log_term = (b - k).ln() - (a - k).ln();
        let corr = log_term - f.total_weight();
        f.push(k.re, corr);
    }
    Ok(f)
}

const TAIL_POWERS: [i32; 3] = [2, 3, 4];

/// Fit `g(sigma s) ~ sum_m c_m / s^m` (m = 2, 3, 4) through samples at `s`;
/// returns the weights of each sample in each coefficient `c_m`.
fn tail_fit(r: f64, s: [f64; 3]) -> [[f64; 3]; 3] {
    // scaled unknowns d_m = c_m / R^m against u_j = R / s_j
    let u: Vec<f64> = s.iter().map(|sj| r / sj).collect();
    let mut v = [[0.0; 3]; 3];
    for j in 0..3 {
        for (m, &p) in TAIL_POWERS.iter().enumerate() {
            v[j][m] = u[j].powi(p);
        }
    }
    let inv = invert3(v);
    let mut w = [[0.0; 3]; 3];
    for (m, &p) in TAIL_POWERS.iter().enumerate() {
        for j in 0..3 {
            w[m][j] = inv[m][j] * r.powi(p);
        }
    }
    w
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    inv
}

fn tail_model_functional(sigma: f64, r: f64, s: [f64; 3], coef: [Complex64; 3]) -> Functional {
    let w = tail_fit(r, s);
    let mut f = Functional::default();
    for j in 0..3 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..3 {
            acc += coef[m] * w[m][j];
        }
        f.push(sigma * s[j], acc);
    }
    f
}

const FIT_PRIMARY: [f64; 3] = [1.0, FRAC_1_SQRT_2, 0.5];
const FIT_SHIFTED: [f64; 3] = [FRAC_1_SQRT_2, 0.5, 0.5 * FRAC_1_SQRT_2];

fn fit_points(r: f64, rel: [f64; 3]) -> [f64; 3] {
    [r * rel[0], r * rel[1], r * rel[2]]
}

/// Tail `int_{|z|>R, sign z = sigma} g(z)/(z-k) dz` under the power model.
fn tail_cauchy(sigma: f64, k: Complex64, r: f64, rel: [f64; 3]) -> Functional {
    let sk = sigma * k;
    let mut coef = [Complex64::new(0.0, 0.0); 3];
    for (m, &p) in TAIL_POWERS.iter().enumerate() {
        let mut pow = Complex64::new(1.0, 0.0);
        for n in 0..200 {
            let e = p + n;
            let t = pow * r.powi(-e) / e as f64;
            coef[m] += t;
            if t.norm() < 1e-22 * coef[m].norm() {
                break;
            }
            pow *= sk;
        }
        coef[m] *= sigma;
    }
    tail_model_functional(sigma, r, fit_points(r, rel), coef)
}

/// Left tail of `int ln(k - z) g'(z) dz` over `(-inf, -R]`.
fn tail_stieltjes_left(k: Complex64, r: f64, rel: [f64; 3]) -> Functional {
    let ml = |m: f64| r.powf(1.0 - m) * (r.ln() / (m - 1.0) + 1.0 / ((m - 1.0) * (m - 1.0)));
    let mm = |m: f64| r.powf(1.0 - m) / (m - 1.0);
    let series = |m0: f64| {
        let mut acc = Complex64::from(ml(m0));
        let mut pow = k;
        for n in 1..200 {
            let nf = n as f64;
            let c = if n % 2 == 1 { 1.0 / nf } else { -1.0 / nf };
            let t = pow * c * mm(m0 + nf);
            acc += t;
            if t.norm() < 1e-22 * acc.norm() {
                break;
            }
            pow *= k;
        }
        acc
    };
    let mut coef = [Complex64::new(0.0, 0.0); 3];
    for (m, &p) in TAIL_POWERS.iter().enumerate() {
        coef[m] = p as f64 * series(p as f64 + 1.0);
    }
    tail_model_functional(-1.0, r, fit_points(r, rel), coef)
}

/// Tail functional and its change when the fit points move inward.
fn tails(build: impl Fn([f64; 3]) -> Functional) -> (Functional, Functional) {
    let a = build(FIT_PRIMARY);
    let mut diff = build(FIT_SHIFTED);
    diff.extend_scaled(&a, Complex64::new(-1.0, 0.0));
    (a, diff)
}

fn both_tails(k: Complex64, r: f64, rel: [f64; 3]) -> Functional {
    let mut t = tail_cauchy(1.0, k, r, rel);
    t.extend_scaled(&tail_cauchy(-1.0, k, r, rel), Complex64::new(1.0, 0.0));
    t
}

fn check_tail(bound: f64, spec: &QuadratureSpec) -> Result<()> {
    if bound.is_finite() && bound <= spec.tail_tolerance {
        Ok(())
    } else {
        Err(Error::TailNotConverged { bound, tolerance: spec.tail_tolerance })
    }
}

fn check_inside(x: f64, spec: &QuadratureSpec, what: &str) -> Result<()> {
    if x.abs() < 0.5 * spec.truncation_radius {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} = {x} must lie within half the truncation radius"
        )))
    }
}

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// Principal value `PV int_R f(z)/(z - pole) dz`.
pub fn pv_cauchy<S: Samplable + ?Sized>(f: &S, pole: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    check_inside(pole, spec, "pole")?;
    let r = spec.truncation_radius;
    let w = 0.5 * (r - pole.abs()) * spec.grading_ratio.powi(spec.panel_count as i32 - 1) * 0.5;
    let mut main = Functional::default();
    let breaks = [0.0];
    for (a, b) in panels_with_breaks(-r, pole - w, &breaks, spec)
        .into_iter()
        .chain(panels_with_breaks(pole + w, r, &breaks, spec))
    {
        gl_panel(&mut main, a, b, spec.nodes_per_panel, |x| Complex64::from(1.0 / (x - pole)));
    }
    // excised core: int_0^w (f(p+s) - f(p-s))/s ds
    let gl = gauss_legendre(spec.nodes_per_panel);
    for (t, wt) in gl.nodes.iter().zip(&gl.weights) {
        let s = 0.5 * w * (1.0 + t);
        let c = 0.5 * w * wt / s;
        main.push(pole + s, Complex64::from(c));
        main.push(pole - s, Complex64::from(-c));
    }
    let k = Complex64::from(pole);
    let (t_a, diff) = tails(|rel| both_tails(k, r, rel));
    main.extend_scaled(&t_a, Complex64::new(1.0, 0.0));
    let (res, _, _) = apply_all(f, &[&main, &diff], &[])?;
    let bound = res[1].norm();
    check_tail(bound, spec)?;
    Ok(Integral { value: res[0], tail_bound: bound })
}

/// `(1/2 pi i) int_{-inf}^{endpoint} g(z)/(z - k) dz` for `k` off `(-inf, endpoint]`.
pub fn cauchy_halfline<S: Samplable + ?Sized>(
    g: &S,
    endpoint: f64,
    k: Complex64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    check_inside(endpoint, spec, "endpoint")?;
    check_inside(k.norm(), spec, "|k|")?;
    if k.im == 0.0 && k.re <= endpoint {
        return Err(Error::OnCut(k));
    }
    let r = spec.truncation_radius;
    let mut main = finite_cauchy(-r, endpoint, k, &[0.0], spec)?;
    let (t_a, diff) = tails(|rel| tail_cauchy(-1.0, k, r, rel));
    main.extend_scaled(&t_a, Complex64::new(1.0, 0.0));
    let (res, _, _) = apply_all(g, &[&main, &diff], &[endpoint])?;
    let bound = res[1].norm() / (2.0 * PI);
    check_tail(bound, spec)?;
    Ok(Integral { value: res[0] / TWO_PI_I, tail_bound: bound })
}

/// `(1/2 pi i) int_R g(z)/(z - k) dz` for `Im k != 0`.
pub fn cauchy_line<S: Samplable + ?Sized>(g: &S, k: Complex64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    check_inside(k.norm(), spec, "|k|")?;
    if k.im == 0.0 {
        return Err(Error::OnCut(k));
    }
    let r = spec.truncation_radius;
    let mut main = finite_cauchy(-r, r, k, &[0.0], spec)?;
    let (t_a, diff) = tails(|rel| both_tails(k, r, rel));
    main.extend_scaled(&t_a, Complex64::new(1.0, 0.0));
    let (res, _, _) = apply_all(g, &[&main, &diff], &[])?;
    let bound = res[1].norm() / (2.0 * PI);
    check_tail(bound, spec)?;
    Ok(Integral { value: res[0] / TWO_PI_I, tail_bound: bound })
}

/// `-(1/2 pi i) int_{-inf}^{endpoint} ln(k - z) dg(z)`, principal logarithm.
///
/// Computed after integrating by parts against `g - g(endpoint)`, which
/// keeps the integrand bounded when `k` equals the endpoint.
pub fn stieltjes_log_integral<S: Samplable + ?Sized>(
    g: &S,
    endpoint: f64,
    k: Complex64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    check_inside(endpoint, spec, "endpoint")?;
    check_inside(k.norm(), spec, "|k|")?;
    if k.im == 0.0 && k.re < endpoint {
        return Err(Error::Branch(format!("ln(k - z) changes sheet on the path for k = {k}")));
    }
    let r = spec.truncation_radius;
    // int_{-R}^{e} G/(k - z) dz with G = g - g(e)
    let inner = if k.im == 0.0 {
        let mut f = Functional::default();
        for (a, b) in panels_with_breaks(-r, endpoint, &[0.0], spec) {
            gl_panel(&mut f, a, b, spec.nodes_per_panel, |x| Complex64::from(1.0 / (k.re - x)));
        }
        f
    } else {
        let mut f = Functional::default();
        f.extend_scaled(&finite_cauchy(-r, endpoint, k, &[0.0], spec)?, Complex64::new(-1.0, 0.0));
        f
    };
    let mut main = Functional::default();
    main.extend_scaled(&inner, Complex64::new(1.0, 0.0));
    main.push(endpoint, -inner.total_weight());
    // boundary term -ln(k + R) (g(-R) - g(e))
    let lb = (k + r).ln();
    main.push(-r, -lb);
    main.push(endpoint, lb);
    let (t_a, diff) = tails(|rel| tail_stieltjes_left(k, r, rel));
    main.extend_scaled(&t_a, Complex64::new(1.0, 0.0));

    // branch tracking of ln(k - z) along the nodes
    let mut nodes: Vec<f64> = main.points().collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let path: Vec<Complex64> = nodes.iter().map(|&z| k - z).filter(|v| v.norm() > 0.0).collect();
    unwrap_arg(&path)?;

    let (res, _, _) = apply_all(g, &[&main, &diff], &[])?;
    let bound = res[1].norm() / (2.0 * PI);
    check_tail(bound, spec)?;
    Ok(Integral { value: -res[0] / TWO_PI_I, tail_bound: bound })
}
