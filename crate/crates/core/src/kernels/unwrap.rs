use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Continuous argument along an ordered sequence of nonzero complex values.
///
/// The first sample takes its principal value in `(-pi, pi]`; every later
/// sample adds the principal difference to its predecessor. A principal
/// jump of `pi/2` or more is treated as ambiguous (grid too coarse) and rejected.
const MAX_JUMP: f64 = 0.5 * PI;

pub fn unwrap_arg(values: &[Complex64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    let mut prev_arg = 0.0;
    for (j, v) in values.iter().enumerate() {
        if *v == Complex64::new(0.0, 0.0) || !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Branch(format!("sample {j} is zero or non-finite")));
        }
        let a = v.arg();
        if j == 0 {
            out.push(a);
        } else {
            let d = wrap(a - prev_arg);
            if d.abs() >= MAX_JUMP {
                return Err(Error::Branch(format!(
                    "argument jump {d:.3} between samples {} and {j}",
                    j - 1
                )));
            }
            let last = *out.last().unwrap();
            out.push(last + d);
        }
        prev_arg = a;
    }
    Ok(out)
}

/// Logarithm whose imaginary part follows [`unwrap_arg`].
pub fn continuous_log(values: &[Complex64]) -> Result<Vec<Complex64>> {
    let args = unwrap_arg(values)?;
    Ok(values
        .iter()
        .zip(args)
        .map(|(v, a)| Complex64::new(v.norm().ln(), a))
        .collect())
}

fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}
