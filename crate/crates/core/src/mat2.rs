//! Minimal 2x2 complex matrix used by the Lax-pair integrator.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() < 1e-300 {
            return None;
        }
        Some(self.adjugate().scale(1.0 / d))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn column(&self, j: usize) -> [Complex64; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Exponential of a traceless matrix: `cosh(l) I + sinh(l)/l M`, `l^2 = -det M`.
    pub fn exp_traceless(&self) -> Self {
        let m = &self.0;
        let l2 = m[0][0] * m[0][0] + m[0][1] * m[1][0];
        let (ch, sh) = if l2.norm() < 1e-6 {
            (
                ONE + l2 / 2.0 + l2 * l2 / 24.0 + l2 * l2 * l2 / 720.0,
                ONE + l2 / 6.0 + l2 * l2 / 120.0 + l2 * l2 * l2 / 5040.0,
            )
        } else {
            let l = l2.sqrt();
            (l.cosh(), l.sinh() / l)
        };
        Mat2::new(ch + sh * m[0][0], sh * m[0][1], sh * m[1][0], ch + sh * m[1][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}
