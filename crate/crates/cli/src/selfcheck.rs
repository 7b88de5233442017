//! Invariant suite over the builtin profiles.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nnls_core::asymptotics::{delta_at, q_asymptotic, q_soliton_region, Regime};
use nnls_core::exact::{one_soliton, pde_residual, pure_step_s, SolitonParams};
use nnls_core::kernels::{complex_gamma, dilog, pv_cauchy, QuadratureSpec};
use nnls_core::pde::{evolve, mirror, EvolveConfig, FieldState};
use nnls_core::scattering::{
    scattering_data, small_k_limit, InitialProfile, JostSpectrum, KGridSpec, PureStepSpectrum,
    ReflectionlessSpectrum, SpectralData, Spectrum,
};
use nnls_core::Result;
use num_complex::Complex64;

use crate::config::RunConfig;
use crate::{ensure_dir, f, CsvOut, Failure, EXIT_OK, EXIT_VALIDATION};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

struct Suite {
    rows: Vec<CheckRow>,
}

impl Suite {
    /// Passes when the computed value is below `threshold`.
    fn below(&mut self, name: &str, threshold: f64, value: Result<f64>) {
        let row = match value {
            Ok(v) => CheckRow { name: name.into(), value: v, threshold, pass: v.is_finite() && v < threshold, detail: String::new() },
            Err(e) => CheckRow { name: name.into(), value: f64::NAN, threshold, pass: false, detail: e.to_string() },
        };
        self.rows.push(row);
    }
}

/// Grid used by the suite; coarser than the default to keep it fast.
pub fn selfcheck_grid() -> KGridSpec {
    KGridSpec { k_min: 1e-3, k_max: 50.0, nodes_per_sign: 400 }
}

/// Max relative deviation of Jost-computed `a1, a2, b` from the closed form on `|k| in [0.05, 10]`.
pub fn pure_step_oracle_error(amplitude: f64, per_sign: usize) -> Result<f64> {
    let jost = JostSpectrum::new(Arc::new(InitialProfile::pure_step(amplitude)?));
    let pos: Vec<f64> = (0..per_sign).map(|j| 0.05 * 200f64.powf(j as f64 / (per_sign - 1) as f64)).collect();
    let ks: Vec<f64> = pos.iter().rev().map(|k| -k).chain(pos.iter().copied()).collect();
    let pts = jost.sample(&ks)?;
    let mut worst: f64 = 0.0;
    for (k, p) in ks.iter().zip(&pts) {
        let s = pure_step_s(amplitude, Complex64::new(*k, 0.0))?;
        for (got, want) in [(p.a1, s.0[0][0]), (p.a2, s.0[1][1]), (p.b, s.0[1][0])] {
            worst = worst.max((got - want).norm() / want.norm());
        }
    }
    Ok(worst)
}

/// `(max residual at (h, dt), at (h/2, dt/2), log2 ratio)` for the exact soliton.
pub fn residual_order(amplitude: f64, phi1: f64, t: f64) -> Result<(f64, f64, f64)> {
    let p = SolitonParams::new(amplitude, phi1)?;
    let res = |n: usize, dt: f64| -> Result<f64> {
        let st = |tt: f64| FieldState::from_fn(30.0, n, amplitude, tt, |x| one_soliton(&p, x, tt));
        pde_residual([&st(t - dt)?, &st(t)?, &st(t + dt)?], dt)
    };
    let coarse = res(3001, 2e-2)?;
    let fine = res(6001, 1e-2)?;
    Ok((coarse, fine, (coarse / fine).log2()))
}

fn spread(values: &[Complex64]) -> f64 {
    let c = values[(values.len() - 1) / 2];
    values.iter().map(|v| (v - c).norm()).fold(0.0, f64::max)
}

pub fn run_checks(quad: &QuadratureSpec) -> Vec<CheckRow> {
    let mut s = Suite { rows: Vec::new() };
    let grid = selfcheck_grid();

    s.below("gamma_reflection", 1e-12, (|| {
        let z = Complex64::new(0.3, 0.7);
        let lhs = complex_gamma(z)? * complex_gamma(1.0 - z)?;
        let rhs = PI / (PI * z).sin();
        Ok((lhs - rhs).norm() / rhs.norm())
    })());
    s.below("dilog_special_values", 1e-14, (|| {
        Ok((dilog(-1.0)? + PI * PI / 12.0).abs().max((dilog(0.5)? - (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2))).abs()))
    })());
    s.below("pv_lorentzian", 1e-10, (|| {
        let p = 0.7;
        let v = pv_cauchy(&|z: f64| Complex64::new(1.0 / (1.0 + z * z), 0.0), p, quad)?.value;
        Ok((v + PI * p / (1.0 + p * p)).norm())
    })());
    s.below("pure_step_scattering_oracle", 1e-6, pure_step_oracle_error(1.0, 60));

    let profiles: [(&str, Result<InitialProfile>); 3] = [
        ("pure_step", InitialProfile::pure_step(1.0)),
        ("soliton", InitialProfile::soliton(1.0, PI)),
        ("smoothed_step", InitialProfile::smoothed_step(1.0, 0.5)),
    ];
    for (name, prof) in profiles {
        let sd = prof.and_then(|p| {
            let p = Arc::new(p);
            let c = spread(&small_k_limit(&p).conserved());
            scattering_data(p, &grid, quad).map(|sd| (sd, c))
        });
        match sd {
            Ok((sd, conserved)) => {
                for check in &sd.validation {
                    s.rows.push(CheckRow {
                        name: format!("{name}_{}", check.name),
                        value: check.value,
                        threshold: check.threshold,
                        pass: check.pass,
                        detail: String::new(),
                    });
                }
                s.below(&format!("{name}_k1"), 1e-6, Ok((sd.k1 - 0.5).abs()));
                s.below(&format!("{name}_conserved_combination"), 1e-8, Ok(conserved));
                if name == "soliton" {
                    s.below("soliton_gamma1", 1e-6, Ok((sd.gamma1 - Complex64::from_polar(1.0, PI)).norm()));
                }
            }
            Err(e) => s.below(&format!("{name}_scattering"), 0.0, Err(e)),
        }
    }

    let closed = |spec: Arc<dyn Spectrum>, c: f64| SpectralData::from_spectrum(spec, grid.nodes()?, Some(c), quad);
    s.below("k1_pure_step_closed_form", 1e-6, closed(Arc::new(PureStepSpectrum { amplitude: 1.0 }), 0.25).map(|sd| (sd.k1 - 0.5).abs()));
    s.below("k1_reflectionless", 1e-6, closed(Arc::new(ReflectionlessSpectrum { amplitude: 1.0, phi1: PI }), 0.0).map(|sd| (sd.k1 - 0.5).abs()));
    s.below("delta_closed_form", 1e-8, (|| {
        let sd = closed(Arc::new(PureStepSpectrum { amplitude: 1.0 }), 0.25)?;
        let d = delta_at(&sd, 0.5, Complex64::new(0.0, 0.0), quad)?;
        Ok((d - Complex64::new(0.0, dilog(-1.0)? / (4.0 * PI)).exp()).norm())
    })());
    s.below("pure_step_regimes", 0.5, (|| {
        let sd = closed(Arc::new(PureStepSpectrum { amplitude: 1.0 }), 0.25)?;
        let ok = q_asymptotic(&sd, 20.0, 10.0)?.regime == Regime::RightB
            && q_asymptotic(&sd, -20.0, 10.0)?.regime == Regime::LeftDecay;
        Ok(if ok { 0.0 } else { 1.0 })
    })());
    s.below("soliton_region_reflectionless", 1e-10, (|| {
        let sd = closed(Arc::new(ReflectionlessSpectrum { amplitude: 1.0, phi1: PI }), 0.0)?;
        let p = SolitonParams::new(1.0, PI)?;
        let mut worst: f64 = 0.0;
        for (x0, t) in [(0.0, PI / 2.0), (-2.0, 1.0), (1.5, 7.0)] {
            worst = worst.max((q_soliton_region(&sd, x0, t)? - one_soliton(&p, x0, t)?).norm());
        }
        Ok(worst)
    })());

    s.below("residual_second_order", 0.1, residual_order(1.0, PI, 0.5).map(|r| (r.2 - 2.0).abs()));
    s.below("constant_field_residual", 1e-12, (|| {
        let a = 2.0;
        let st = FieldState { half_width: 5.0, amplitude: a, q: vec![Complex64::new(a, 0.0); 101], t: 0.0 };
        Ok((pde_residual([&st, &st, &st], 1e-3)? - 2.0 * a * a * a).abs())
    })());
    s.below("mirror_involution", 1e-300, (|| {
        let st = FieldState::from_fn(3.0, 61, 1.0, 0.0, |x| Ok(Complex64::new(x.sin(), x * x)))?;
        let once = FieldState::new(3.0, 1.0, mirror(&st), 0.0)?;
        let twice = mirror(&once);
        Ok(twice[1..60].iter().zip(&st.q[1..60]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    })());
    s.below("zero_fixed_point", 1e-300, (|| {
        let st = FieldState::from_fn(5.0, 101, 0.0, 0.0, |_| Ok(Complex64::new(0.0, 0.0)))?;
        let out = evolve(st, &EvolveConfig::new(1e-3, 50))?;
        Ok(out.final_state.sup_norm())
    })());
    s.rows
}

pub fn cmd_selfcheck(cfg: &RunConfig, out: &Path) -> std::result::Result<i32, Failure> {
    ensure_dir(out)?;
    // the quadrature spec is passed through unvalidated so a bad spec shows up as named failures
    let rows = run_checks(&cfg.quadrature);
    let fp = cfg.fingerprint("selfcheck");
    let mut csv = CsvOut::create(&out.join("selfcheck.csv"), &fp, &["check", "value", "threshold", "status", "detail"])?;
    for r in &rows {
        csv.row([r.name.clone(), f(r.value), f(r.threshold), if r.pass { "pass" } else { "FAIL" }.into(), r.detail.clone()])?;
        println!("{:<40} {:>12.3e} {:>10.1e}  {}{}", r.name, r.value, r.threshold, if r.pass { "pass" } else { "FAIL" },
            if r.detail.is_empty() { String::new() } else { format!("  ({})", r.detail) });
    }
    csv.finish()?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("selfcheck: {} passed, {} failed", rows.len() - failed, failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VALIDATION })
}

