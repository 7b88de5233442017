use std::f64::consts::PI;

use crate::error::{Error, Result};

const PI2_6: f64 = PI * PI / 6.0;

/// Real dilogarithm `Li2(x)` for `x <= 1`.
///
/// The argument is mapped into `[0, 1/2]` by the inversion, Landen and
/// reflection identities, where the power series converges geometrically.
pub fn dilog(x: f64) -> Result<f64> {
    if x.is_nan() || x > 1.0 {
        return Err(Error::DilogDomain(x));
    }
    Ok(dilog_unchecked(x))
}

fn dilog_unchecked(x: f64) -> f64 {
    if x == 1.0 {
        return PI2_6;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x < -1.0 {
        // Li2(x) + Li2(1/x) = -pi^2/6 - ln^2(-x)/2
        let l = (-x).ln();
        return -PI2_6 - 0.5 * l * l - dilog_unchecked(1.0 / x);
    }
    if x < 0.0 {
        // Landen: Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2, maps [-1,0) into (0,1/2]
        let l = (1.0 - x).ln();
        return -dilog_unchecked(x / (x - 1.0)) - 0.5 * l * l;
    }
    if x > 0.5 {
        return PI2_6 - x.ln() * (1.0 - x).ln() - dilog_unchecked(1.0 - x);
    }
    let mut sum = 0.0;
    let mut p = x;
    let mut n = 1.0;
    while p > 1e-18 * n * n {
        sum += p / (n * n);
        p *= x;
        n += 1.0;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bernoulli-number series in u = -ln(1-x), valid for |u| < 2 pi.
    fn bernoulli_oracle(x: f64) -> f64 {
        let u = -(1.0 - x).ln();
        // B_0..B_20 (odd ones beyond B_1 vanish)
        let b = [
            1.0,
            -0.5,
            1.0 / 6.0,
            0.0,
            -1.0 / 30.0,
            0.0,
            1.0 / 42.0,
            0.0,
            -1.0 / 30.0,
            0.0,
            5.0 / 66.0,
            0.0,
            -691.0 / 2730.0,
            0.0,
            7.0 / 6.0,
            0.0,
            -3617.0 / 510.0,
            0.0,
            43867.0 / 798.0,
            0.0,
            -174611.0 / 330.0,
        ];
        let mut sum = 0.0;
        let mut fact = 1.0; // (n+1)!
        let mut pow = u; // u^{n+1}
        for (n, bn) in b.iter().enumerate() {
            fact *= (n + 1) as f64;
            sum += bn * pow / fact;
            pow *= u;
        }
        sum
    }

    #[test]
    fn classical_values() {
        assert_eq!(dilog(0.0).unwrap(), 0.0);
        assert!((dilog(1.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((dilog(-1.0).unwrap() + PI * PI / 12.0).abs() < 1e-14);
        let half = PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2);
        assert!((dilog(0.5).unwrap() - half).abs() < 1e-15);
    }

    #[test]
    fn matches_bernoulli_series() {
        for &x in &[-1.0, -0.8, -0.3, 0.1, 0.45, 0.7] {
            let d = dilog(x).unwrap();
            assert!((d - bernoulli_oracle(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn inversion_branch() {
        // Li2(-4) via the inversion identity against Li2(-1/4) from the series
        let l = 4f64.ln();
        let expect = -PI * PI / 6.0 - 0.5 * l * l - bernoulli_oracle(-0.25);
        assert!((dilog(-4.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn domain() {
        assert!(matches!(dilog(1.0 + 1e-12), Err(Error::DilogDomain(_))));
        assert!(dilog(f64::NAN).is_err());
    }
}
