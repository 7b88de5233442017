use num_complex::Complex64;

use super::profile::InitialProfile;
use crate::error::{Error, Result};
use crate::mat2::Mat2;

const SQRT3_12: f64 = 0.144_337_567_297_406_43; // sqrt(3)/12
const GROWTH_LIMIT: f64 = 600.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn lax_matrix(k: Complex64, q: Complex64, q_mirror: Complex64) -> Mat2 {
    let mik = Complex64::new(0.0, -1.0) * k;
    Mat2::new(mik, q, -q_mirror.conj(), -mik)
}

/// Fourth-order Magnus step over a signed increment `dx`, with the Lax matrix
/// sampled at the two Gauss points in the direction of travel.
fn magnus_step(k: Complex64, g: [(Complex64, Complex64); 2], dx: f64) -> Mat2 {
    let a1 = lax_matrix(k, g[0].0, g[0].1);
    let a2 = lax_matrix(k, g[1].0, g[1].1);
    let comm = a2 * a1 - a1 * a2;
    ((a1 + a2).scale(Complex64::from(0.5 * dx)) + comm.scale(Complex64::from(SQRT3_12 * dx * dx))).exp_traceless()
}

/// Gauss-point data `(q(g), q(-g))` for interval `i`, ordered along the direction of travel.
fn interval_data(gauss: &[[Complex64; 2]], i: usize, forward: bool) -> [(Complex64, Complex64); 2] {
    let n = gauss.len();
    let mirror = n - 1 - i;
    let lo = (gauss[i][0], gauss[mirror][1]);
    let hi = (gauss[i][1], gauss[mirror][0]);
    if forward {
        [lo, hi]
    } else {
        [hi, lo]
    }
}

fn check_k(k: Complex64) -> Result<()> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularK("k = 0: the background matrices blow up".into()));
    }
    if !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::SingularK(format!("non-finite k = {k}")));
    }
    Ok(())
}

/// Background eigenvector matrices `N_-(k)` (left) and `N_+(k)` (right).
pub fn background(amplitude: f64, k: Complex64, side: Side) -> Mat2 {
    let c = amplitude / (Complex64::new(0.0, 2.0) * k);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match side {
        Side::Left => Mat2::new(one, zero, c, one),
        Side::Right => Mat2::new(one, c, zero, one),
    }
}

/// Jost matrix at `x = 0`: `Psi_1` integrated from `-N` (left) or `Psi_2` from `+N` (right).
///
/// Off the real axis only the column that decays in the direction of
/// integration is accurate (column 1 on the left, column 2 on the right).
pub fn jost_solve(profile: &InitialProfile, k: Complex64, side: Side) -> Result<Mat2> {
    check_k(k)?;
    if 2.0 * k.im.abs() * profile.support_radius() > GROWTH_LIMIT {
        return Err(Error::Overflow(format!(
            "|Im k| = {} over a support of {} would overflow the subdominant column",
            k.im.abs(),
            profile.support_radius()
        )));
    }
    let gauss = profile.gauss_values();
    let m = profile.half_intervals();
    let h = profile.grid_step();
    let e = (Complex64::i() * k * h).exp();
    let einv = 1.0 / e;
    let mut psi = background(profile.amplitude(), k, side);
    let (range, dx, f1, f2): (Box<dyn Iterator<Item = usize>>, f64, Complex64, Complex64) = match side {
        Side::Left => (Box::new(0..m), h, e, einv),
        Side::Right => (Box::new((m..2 * m).rev()), -h, einv, e),
    };
    for i in range {
        let step = magnus_step(k, interval_data(gauss, i, side == Side::Left), dx);
        psi = step * psi;
        for r in 0..2 {
            psi.0[r][0] *= f1;
            psi.0[r][1] *= f2;
        }
    }
    Ok(psi)
}

/// The trusted Jost column at `x = 0` for `Im k >= 0`: column 1 of `Psi_1`
/// (left) or column 2 of `Psi_2` (right).
pub fn jost_column(profile: &InitialProfile, k: Complex64, side: Side) -> Result<[Complex64; 2]> {
    check_k(k)?;
    if k.im < 0.0 {
        return Err(Error::HalfPlane(format!("trusted columns need Im k >= 0, got {k}")));
    }
    let gauss = profile.gauss_values();
    let m = profile.half_intervals();
    let h = profile.grid_step();
    let bg = background(profile.amplitude(), k, side);
    let (mut v, factor, dx) = match side {
        Side::Left => (bg.column(0), (Complex64::i() * k * h).exp(), h),
        Side::Right => (bg.column(1), (Complex64::i() * k * h).exp(), -h),
    };
    let forward = side == Side::Left;
    let idx: Vec<usize> = if forward { (0..m).collect() } else { (m..2 * m).rev().collect() };
    for i in idx {
        v = magnus_step(k, interval_data(gauss, i, forward), dx).apply(v);
        v = [v[0] * factor, v[1] * factor];
    }
    Ok(v)
}

/// `a_1(k) = det(Psi_1^(1), Psi_2^(2))` at `x = 0` for `Im k >= 0`.
pub fn a1_direct(profile: &InitialProfile, k: Complex64) -> Result<Complex64> {
    let c1 = jost_column(profile, k, Side::Left)?;
    let c2 = jost_column(profile, k, Side::Right)?;
    Ok(c1[0] * c2[1] - c1[1] * c2[0])
}

/// Scattering matrix `S(k) = Psi_2(0)^{-1} Psi_1(0)` for real `k != 0`.
pub fn scattering_matrix(profile: &InitialProfile, k: f64) -> Result<Mat2> {
    let kc = Complex64::new(k, 0.0);
    let p1 = jost_solve(profile, kc, Side::Left)?;
    let p2 = jost_solve(profile, kc, Side::Right)?;
    let inv = p2
        .inverse()
        .ok_or_else(|| Error::NearZero(format!("Psi_2 singular at k = {k}")))?;
    Ok(inv * p1)
}

/// Solution of the zero-`k` system `v' = U v`, `v(-N) = (0, -iA/2)`, on the sample grid.
#[derive(Clone, Debug)]
pub struct SmallKVectors {
    pub x_grid: Vec<f64>,
    pub v1: Vec<Complex64>,
    pub v2: Vec<Complex64>,
}

impl SmallKVectors {
    /// `v2(x) conj(v2(-x)) - v1(x) conj(v1(-x))` at every node.
    pub fn conserved(&self) -> Vec<Complex64> {
        let n = self.x_grid.len();
        (0..n)
            .map(|j| {
                let r = n - 1 - j;
                self.v2[j] * self.v2[r].conj() - self.v1[j] * self.v1[r].conj()
            })
            .collect()
    }

    /// The conserved combination at the origin, `|v2(0)|^2 - |v1(0)|^2`.
    pub fn at_origin(&self) -> f64 {
        let m = (self.x_grid.len() - 1) / 2;
        self.v2[m].norm_sqr() - self.v1[m].norm_sqr()
    }
}

pub fn small_k_limit(profile: &InitialProfile) -> SmallKVectors {
    let gauss = profile.gauss_values();
    let m = profile.half_intervals();
    let h = profile.grid_step();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = [zero, Complex64::new(0.0, -0.5 * profile.amplitude())];
    let mut x_grid = Vec::with_capacity(2 * m + 1);
    let mut v1 = Vec::with_capacity(2 * m + 1);
    let mut v2 = Vec::with_capacity(2 * m + 1);
    x_grid.push(profile.x(0));
    v1.push(v[0]);
    v2.push(v[1]);
    for i in 0..2 * m {
        v = magnus_step(zero, interval_data(gauss, i, true), h).apply(v);
        x_grid.push(profile.x(i + 1));
        v1.push(v[0]);
        v2.push(v[1]);
    }
    SmallKVectors { x_grid, v1, v2 }
}
