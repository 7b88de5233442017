use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler Gamma function on the complex plane.
///
/// Lanczos approximation (g = 7, nine terms) for `Re z >= 0.5`, reflection
/// formula otherwise. Non-positive integers are rejected as poles.
pub fn complex_gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::GammaPole(z));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite Gamma argument {z}")));
    }
    if z.re < 0.5 {
        let s = (Complex64::from(PI) * z).sin();
        let g = lanczos(Complex64::new(1.0, 0.0) - z);
        return Ok(Complex64::from(PI) / (s * g));
    }
    Ok(lanczos(z))
}

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::from(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^(z+1/2) e^{-t} through the logarithm keeps |z| ~ 20 in range
    let log_pow = (z + 0.5) * t.ln() - t;
    (2.0 * PI).sqrt() * log_pow.exp() * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stirling series with upward shift, independent of the Lanczos path.
    fn stirling_gamma(z: Complex64) -> Complex64 {
        if z.re < 0.5 {
            let s = (Complex64::from(PI) * z).sin();
            return Complex64::from(PI) / (s * stirling_gamma(Complex64::new(1.0, 0.0) - z));
        }
        let mut shift = Complex64::new(1.0, 0.0);
        let mut w = z;
        while w.re < 20.0 {
            shift *= w;
            w += 1.0;
        }
        // B_{2k} / (2k (2k-1))
        let coeffs = [
            1.0 / 12.0,
            -1.0 / 360.0,
            1.0 / 1260.0,
            -1.0 / 1680.0,
            1.0 / 1188.0,
            -691.0 / 360360.0,
            1.0 / 156.0,
            -3617.0 / 122400.0,
        ];
        let mut series = Complex64::new(0.0, 0.0);
        let inv = 1.0 / w;
        let inv2 = inv * inv;
        let mut p = inv;
        for c in coeffs {
            series += c * p;
            p *= inv2;
        }
        let ln_g = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
        ln_g.exp() / shift
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn classical_values() {
        let one = complex_gamma(Complex64::new(1.0, 0.0)).unwrap();
        assert!((one - 1.0).norm() < 1e-14);
        let half = complex_gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt()).abs() < 1e-14);
        assert!(half.im.abs() < 1e-15);
    }

    #[test]
    fn modulus_on_imaginary_axis() {
        // |Gamma(iy)|^2 = pi / (y sinh(pi y))
        for &y in &[0.05, 0.3, 1.0, 2.5, 7.0] {
            let g = complex_gamma(Complex64::new(0.0, y)).unwrap();
            let exact = (PI / (y * (PI * y).sinh())).sqrt();
            assert!((g.norm() - exact).abs() / exact < 1e-13, "y = {y}");
        }
    }

    #[test]
    fn agrees_with_stirling_oracle_on_disk() {
        let mut worst: f64 = 0.0;
        for i in 0..40 {
            for j in 0..40 {
                let z = Complex64::new(-19.5 + i as f64, -19.7 + j as f64);
                if z.norm() > 20.0 {
                    continue;
                }
                worst = worst.max(rel(complex_gamma(z).unwrap(), stirling_gamma(z)));
            }
        }
        assert!(worst < 1e-12, "worst relative error {worst:e}");
    }

    #[test]
    fn poles_rejected() {
        for n in 0..5 {
            let z = Complex64::new(-(n as f64), 0.0);
            assert!(matches!(complex_gamma(z), Err(Error::GammaPole(_))));
        }
        assert!(complex_gamma(Complex64::new(-2.0, 1e-9)).is_ok());
    }

    proptest::proptest! {
        #[test]
        fn recurrence(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            let z = Complex64::new(re, im);
            proptest::prop_assume!(z.norm() <= 10.0 && (z.im.abs() > 1e-3 || (z.re - z.re.round()).abs() > 1e-3));
            let lhs = complex_gamma(z + 1.0).unwrap();
            let rhs = z * complex_gamma(z).unwrap();
            proptest::prop_assert!(rel(lhs, rhs) < 1e-10);
        }
    }
}
