use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Initial datum on `[-N, N]`, identically 0 to the left and `A` to the right.
///
/// Samples live on `x_j = -N + j h`, `j = 0..=2m`. The origin carries
/// separate one-sided limits so that a jump at `x = 0` is representable.
#[derive(Debug)]
pub struct InitialProfile {
    amplitude: f64,
    support_radius: f64,
    grid_step: f64,
    samples: Vec<Complex64>,
    origin_left: Complex64,
    origin_right: Complex64,
    gauss: OnceLock<Vec<[Complex64; 2]>>,
}

impl Clone for InitialProfile {
    fn clone(&self) -> Self {
        Self {
            amplitude: self.amplitude,
            support_radius: self.support_radius,
            grid_step: self.grid_step,
            samples: self.samples.clone(),
            origin_left: self.origin_left,
            origin_right: self.origin_right,
            gauss: OnceLock::new(),
        }
    }
}

const END_TOL: f64 = 1e-10;
pub(crate) const GAUSS_OFFSETS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

impl InitialProfile {
    /// Builds a profile from uniform samples. `origin` optionally overrides the
    /// left and right limits at `x = 0`; by default both equal the sample there.
    pub fn from_samples(
        amplitude: f64,
        support_radius: f64,
        grid_step: f64,
        mut samples: Vec<Complex64>,
        origin: Option<(Complex64, Complex64)>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Profile(m));
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return bad(format!("amplitude must be positive, got {amplitude}"));
        }
        if !(support_radius.is_finite() && support_radius > 0.0) {
            return bad(format!("support_radius must be positive, got {support_radius}"));
        }
        if !(grid_step.is_finite() && grid_step > 0.0) {
            return bad(format!("grid_step must be positive, got {grid_step}"));
        }
        let m_f = support_radius / grid_step;
        let m = m_f.round() as usize;
        if (m_f - m as f64).abs() > 1e-6 * m_f.max(1.0) || m < 3 {
            return bad(format!(
                "support_radius/grid_step = {m_f} must be an integer of at least 3"
            ));
        }
        if samples.len() != 2 * m + 1 {
            return bad(format!("samples: expected {} values on [-N, N], got {}", 2 * m + 1, samples.len()));
        }
        if let Some(j) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return bad(format!("samples: value {j} is not finite"));
        }
        let scale = amplitude.max(1.0);
        if samples[0].norm() > END_TOL * scale {
            return bad(format!("samples: q(-N) = {} must be 0", samples[0]));
        }
        if (samples[2 * m] - amplitude).norm() > END_TOL * scale {
            return bad(format!("samples: q(N) = {} must equal the amplitude {amplitude}", samples[2 * m]));
        }
        samples[0] = Complex64::new(0.0, 0.0);
        samples[2 * m] = Complex64::new(amplitude, 0.0);
        let (origin_left, origin_right) = origin.unwrap_or((samples[m], samples[m]));
        Ok(Self {
            amplitude,
            support_radius: m as f64 * grid_step,
            grid_step,
            samples,
            origin_left,
            origin_right,
            gauss: OnceLock::new(),
        })
    }

    /// Sharp step: `0` for `x < 0`, `A` for `x > 0`.
    pub fn pure_step(amplitude: f64) -> Result<Self> {
        Self::pure_step_on_grid(amplitude, 1.0, 0.01)
    }

    pub fn pure_step_on_grid(amplitude: f64, support_radius: f64, grid_step: f64) -> Result<Self> {
        let m = (support_radius / grid_step).round() as usize;
        let a = Complex64::new(amplitude, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let samples = (0..=2 * m).map(|j| if j > m { a } else { z }).collect();
        Self::from_samples(amplitude, support_radius, grid_step, samples, Some((z, a)))
    }

    /// Exact one-soliton at `t = 0`: `A / (1 - exp(-A x + i phi1))`.
    pub fn soliton(amplitude: f64, phi1: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Profile(format!("amplitude must be positive, got {amplitude}")));
        }
        Self::soliton_on_grid(amplitude, phi1, 40.0 / amplitude, 0.01 / amplitude)
    }

    pub fn soliton_on_grid(amplitude: f64, phi1: f64, support_radius: f64, grid_step: f64) -> Result<Self> {
        let m = (support_radius / grid_step).round() as usize;
        let h = support_radius / m as f64;
        let phase = Complex64::new(0.0, phi1).exp();
        let mut samples = Vec::with_capacity(2 * m + 1);
        for j in 0..=2 * m {
            let x = -support_radius + j as f64 * h;
            let den = 1.0 - (-amplitude * x).exp() * phase;
            if den.norm() < 1e-12 {
                return Err(Error::Singularity(format!("soliton initial data singular at x = {x}")));
            }
            samples.push(amplitude / den);
        }
        samples[0] = Complex64::new(0.0, 0.0);
        samples[2 * m] = Complex64::new(amplitude, 0.0);
        Self::from_samples(amplitude, m as f64 * h, h, samples, None)
    }

    /// Smoothed step `(A/2)(1 + tanh(x/w))`.
    pub fn smoothed_step(amplitude: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Profile(format!("smoothing width must be positive, got {width}")));
        }
        Self::smoothed_step_on_grid(amplitude, width, 20.0 * width, width / 50.0)
    }

    pub fn smoothed_step_on_grid(amplitude: f64, width: f64, support_radius: f64, grid_step: f64) -> Result<Self> {
        let m = (support_radius / grid_step).round() as usize;
        let h = support_radius / m as f64;
        let samples = (0..=2 * m)
            .map(|j| {
                let x = -support_radius + j as f64 * h;
                Complex64::new(0.5 * amplitude * (1.0 + (x / width).tanh()), 0.0)
            })
            .collect::<Vec<_>>();
        let mut samples = samples;
        samples[0] = Complex64::new(0.0, 0.0);
        samples[2 * m] = Complex64::new(amplitude, 0.0);
        Self::from_samples(amplitude, m as f64 * h, h, samples, None)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn origin_limits(&self) -> (Complex64, Complex64) {
        (self.origin_left, self.origin_right)
    }

    /// Number of grid intervals on each half-line.
    pub fn half_intervals(&self) -> usize {
        (self.samples.len() - 1) / 2
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.support_radius + j as f64 * self.grid_step
    }

    /// Profile values at the two Gauss points of each of the `2m` intervals,
    /// interpolated within each half-line.
    pub(crate) fn gauss_values(&self) -> &[[Complex64; 2]] {
        self.gauss.get_or_init(|| {
            let m = self.half_intervals();
            let mut left: Vec<Complex64> = self.samples[..m].to_vec();
            left.push(self.origin_left);
            let mut right = vec![self.origin_right];
            right.extend_from_slice(&self.samples[m + 1..]);
            let mut out = Vec::with_capacity(2 * m);
            for half in [&left, &right] {
                for l in 0..m {
                    let mut pair = [Complex64::new(0.0, 0.0); 2];
                    for (slot, off) in GAUSS_OFFSETS.iter().enumerate() {
                        pair[slot] = lagrange4(half, l, *off);
                    }
                    out.push(pair);
                }
            }
            out
        })
    }
}

/// Four-point Lagrange interpolation at local position `l + off` on a
/// uniform node list, with the stencil clamped to stay inside.
fn lagrange4(vals: &[Complex64], l: usize, off: f64) -> Complex64 {
    let last = vals.len() - 1;
    let start = l.saturating_sub(1).min(last - 3);
    let s = (l - start) as f64 + off;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (s - j as f64) / (i as f64 - j as f64);
            }
        }
        acc += vals[start + i] * w;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_step_layout() {
        let p = InitialProfile::pure_step(2.0).unwrap();
        let m = p.half_intervals();
        assert_eq!(p.samples().len(), 2 * m + 1);
        assert_eq!(p.samples()[0], Complex64::new(0.0, 0.0));
        assert_eq!(p.samples()[2 * m], Complex64::new(2.0, 0.0));
        let g = p.gauss_values();
        assert!(g[..m].iter().flatten().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(g[m..].iter().flatten().all(|z| (*z - 2.0).norm() < 1e-15));
    }

    #[test]
    fn soliton_at_pi_is_a_tanh_step() {
        let p = InitialProfile::soliton(1.0, std::f64::consts::PI).unwrap();
        for j in (0..p.samples().len()).step_by(97) {
            let x = p.x(j);
            let expect = 0.5 * (1.0 + (0.5 * x).tanh());
            assert!((p.samples()[j] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_soliton_rejected() {
        assert!(matches!(InitialProfile::soliton(1.0, 0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn validation_names_the_field() {
        let bad = InitialProfile::from_samples(1.0, 1.0, 0.1, vec![Complex64::new(0.0, 0.0); 5], None);
        assert!(matches!(bad, Err(Error::Profile(m)) if m.contains("samples")));
        let bad = InitialProfile::from_samples(-1.0, 1.0, 0.1, vec![], None);
        assert!(matches!(bad, Err(Error::Profile(m)) if m.contains("amplitude")));
        let mut s = vec![Complex64::new(0.0, 0.0); 21];
        s[20] = Complex64::new(0.5, 0.0);
        let bad = InitialProfile::from_samples(1.0, 1.0, 0.1, s, None);
        assert!(matches!(bad, Err(Error::Profile(m)) if m.contains("q(N)")));
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let vals: Vec<Complex64> = (0..8).map(|j| Complex64::new((j as f64).powi(3) - 2.0 * j as f64, 1.0)).collect();
        for l in 0..7 {
            let s = l as f64 + 0.3;
            let got = lagrange4(&vals, l, 0.3);
            assert!((got.re - (s.powi(3) - 2.0 * s)).abs() < 1e-11);
        }
    }
}
