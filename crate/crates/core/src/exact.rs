//! Closed-form reference objects.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::pde::FieldState;

/// Threshold on the soliton denominator modulus.
pub const SINGULARITY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub amplitude: f64,
    pub phi1: f64,
}

impl SolitonParams {
    pub fn new(amplitude: f64, phi1: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidArgument(format!("soliton amplitude must be positive, got {amplitude}")));
        }
        if !phi1.is_finite() {
            return Err(Error::InvalidArgument("soliton phase must be finite".into()));
        }
        Ok(Self { amplitude, phi1 })
    }
}

/// `A / (1 - exp(-A x - i A^2 t + i phi1))`.
pub fn one_soliton(p: &SolitonParams, x: f64, t: f64) -> Result<Complex64> {
    let a = p.amplitude;
    let e = Complex64::new(-a * x, -a * a * t + p.phi1).exp();
    let den = 1.0 - e;
    if den.norm() < SINGULARITY_EPS {
        return Err(Error::Singularity(format!("soliton denominator vanishes at x = {x}, t = {t}")));
    }
    Ok(a / den)
}

/// `t_n = phi1/A^2 + 2 pi n / A^2` for `n` in the range.
pub fn singularity_times(p: &SolitonParams, n_range: std::ops::RangeInclusive<i64>) -> Vec<f64> {
    let a2 = p.amplitude * p.amplitude;
    n_range.map(|n| p.phi1 / a2 + 2.0 * PI * n as f64 / a2).collect()
}

/// Scattering matrix of the sharp step, `[[1 + A^2/4k^2, -A/2ik], [A/2ik, 1]]`.
pub fn pure_step_s(amplitude: f64, k: Complex64) -> Result<Mat2> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularK("pure-step scattering matrix is singular at k = 0".into()));
    }
    let c = amplitude / (Complex64::new(0.0, 2.0) * k);
    let one = Complex64::new(1.0, 0.0);
    Ok(Mat2::new(one + amplitude * amplitude / (4.0 * k * k), -c, c, one))
}

/// Max-norm residual of the equation on interior nodes, from three states
/// spaced by `dt`, using centered differences and the exact mirror node.
pub fn pde_residual(states: [&FieldState; 3], dt: f64) -> Result<f64> {
    let [prev, cur, next] = states;
    let n = cur.q.len();
    if prev.q.len() != n || next.q.len() != n || prev.half_width != cur.half_width || next.half_width != cur.half_width {
        return Err(Error::Grid("residual needs three states on the same grid".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let h = cur.h();
    let i = Complex64::i();
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        let qt = (next.q[j] - prev.q[j]) / (2.0 * dt);
        let qxx = (cur.q[j + 1] - 2.0 * cur.q[j] + cur.q[j - 1]) / (h * h);
        let nl = 2.0 * cur.q[j] * cur.q[j] * cur.q[n - 1 - j].conj();
        worst = worst.max((i * qt + qxx + nl).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_values() {
        let p = SolitonParams::new(1.0, PI).unwrap();
        assert!((one_soliton(&p, 0.0, 0.0).unwrap() - 0.5).norm() < 1e-15);
        assert!((one_soliton(&p, 40.0, 0.3).unwrap() - 1.0).norm() < 1e-15);
        assert!(one_soliton(&p, -40.0, 0.3).unwrap().norm() < 1e-15);
        let q0 = SolitonParams::new(1.0, 0.0).unwrap();
        assert!(matches!(one_soliton(&q0, 0.0, 0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn singularity_times_examples() {
        let p = SolitonParams::new(1.0, PI).unwrap();
        assert_eq!(singularity_times(&p, 0..=0), vec![PI]);
        let p2 = SolitonParams::new(2.0, 0.0).unwrap();
        assert!((singularity_times(&p2, 1..=1)[0] - PI / 2.0).abs() < 1e-15);
        let ts = singularity_times(&p, -2..=3);
        for w in ts.windows(2) {
            assert!((w[1] - w[0] - 2.0 * PI).abs() < 1e-12);
        }
        for t in ts {
            let d = 1.0 - Complex64::new(0.0, -t + PI).exp();
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn pure_step_matrix() {
        let s = pure_step_s(1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((s.0[0][0] - 1.25).norm() < 1e-15);
        assert!((s.0[0][1] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((s.0[1][0] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!(s.0[0][0].re.is_finite());
        let z = pure_step_s(1.0, Complex64::new(0.0, 0.5)).unwrap();
        assert!(z.0[0][0].norm() < 1e-15);
        assert!(pure_step_s(1.0, Complex64::new(0.0, 0.0)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn pure_step_properties(re in -20.0f64..20.0, im in -20.0f64..20.0, a in 0.1f64..5.0) {
            let k = Complex64::new(re, im);
            proptest::prop_assume!(k.norm() > 1e-2);
            let s = pure_step_s(a, k).unwrap();
            proptest::prop_assert!((s.det() - 1.0).norm() < 1e-9);
            // conj(a1(-conj k)) = a1(k)
            let m = pure_step_s(a, -k.conj()).unwrap();
            proptest::prop_assert!((m.0[0][0].conj() - s.0[0][0]).norm() < 1e-9 * s.0[0][0].norm());
            // k^2 a1 -> A^2 a2(0) / 4 with a2 = 1
            proptest::prop_assert!(((k * k * s.0[0][0]) - (k * k + a * a / 4.0)).norm() < 1e-9 * (k * k).norm().max(1.0));
        }
    }
}
