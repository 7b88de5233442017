use std::path::Path;
use std::sync::Arc;

use nnls_core::asymptotics::{modulated_constant, q_asymptotic, q_soliton_region};
use nnls_core::exact::{one_soliton, singularity_times, SolitonParams};
use nnls_core::io::{read_spectral, write_snapshots, write_spectral, BuiltinProfile, ProfileSpec};
use nnls_core::pde::{evolve, ray_sample, EvolveConfig, EvolveOutcome};
use nnls_core::scattering::{scattering_data, ReflectionlessSpectrum, SpectralData};
use nnls_core::Error;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{ensure_dir, f, fingerprint_header, io_failure, CsvOut, Failure, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};

/// Spectral data from `spectral_input` if set, otherwise by direct scattering of the profile.
pub fn spectral_data(cfg: &RunConfig) -> Result<SpectralData, Failure> {
    if let Some(p) = &cfg.spectral_input {
        return Ok(read_spectral(p)?);
    }
    let profile = Arc::new(cfg.profile()?.scattering_profile()?);
    Ok(scattering_data(profile, &cfg.k_grid, &cfg.quadrature)?)
}

pub fn cmd_scatter(cfg: &RunConfig, out: &Path) -> Result<i32, Failure> {
    cfg.validate()?;
    cfg.profile()?;
    ensure_dir(out)?;
    let sd = spectral_data(cfg)?;
    let fp = cfg.fingerprint("scatter");
    write_spectral(&out.join("spectral.csv"), &sd, &fingerprint_header(&fp))?;
    println!("case {}  k1 = {:.12}  gamma1 = {:.12}", sd.case_tag, sd.k1, sd.gamma1);
    let failed = sd.validation.iter().filter(|c| !c.pass).count();
    for c in &sd.validation {
        println!("  {:<24} {:>12.3e}  < {:<8.1e} {}", c.name, c.value, c.threshold, if c.pass { "pass" } else { "FAIL" });
    }
    println!("validation: {} passed, {} failed", sd.validation.len() - failed, failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VALIDATION })
}

pub fn cmd_asym(cfg: &RunConfig, out: &Path) -> Result<i32, Failure> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sd = spectral_data(cfg)?;
    let fp = cfg.fingerprint("asym");
    let mut csv = CsvOut::create(
        &out.join("asymptotics.csv"),
        &fp,
        &[
            "x", "t", "xi", "regime", "Re q", "Im q", "abs q", "error_order", "Im_nu", "Re_nu", "Re delta0",
            "Im delta0", "note",
        ],
    )?;
    let nan = f(f64::NAN);
    let mut flagged = 0;
    for &xi in &cfg.rays {
        for &t in &cfg.times {
            let x = 4.0 * xi * t;
            if xi == 0.0 {
                flagged += 1;
                csv.row([f(x), f(t), f(xi), "Transition".into(), nan.clone(), nan.clone(), nan.clone(), String::new(),
                    nan.clone(), nan.clone(), nan.clone(), nan.clone(), "transition-zone, unsupported".into()])?;
                continue;
            }
            match q_asymptotic(&sd, x, t) {
                Ok(r) => {
                    let note = if r.transition_zone { "transition-zone, unsupported" } else { "" };
                    csv.row([
                        f(x), f(t), f(xi), r.regime.to_string(), f(r.value.re), f(r.value.im), f(r.value.norm()),
                        r.error_order.to_string(), f(r.nu.im), f(r.nu.re), f(r.delta0.re), f(r.delta0.im), note.into(),
                    ])?;
                }
                Err(e @ (Error::AssumptionB(_) | Error::GammaPole(_) | Error::NearZero(_))) => {
                    flagged += 1;
                    csv.row([f(x), f(t), f(xi), "Error".into(), nan.clone(), nan.clone(), nan.clone(), String::new(),
                        nan.clone(), nan.clone(), nan.clone(), nan.clone(), e.to_string()])?;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    csv.finish()?;
    println!("asymptotics: {} rows, {} flagged", cfg.rays.len() * cfg.times.len(), flagged);
    Ok(EXIT_OK)
}

fn snapshot_config(cfg: &RunConfig) -> EvolveConfig {
    let mut ev = cfg.pde.evolve.clone();
    if ev.snapshot_times.is_empty() {
        ev.snapshot_times = vec![0.0, ev.steps as f64 * ev.dt];
    }
    ev
}

fn run_pde(profile: &ProfileSpec, cfg: &RunConfig, ev: &EvolveConfig) -> Result<EvolveOutcome, Failure> {
    let state = profile.field(cfg.pde.half_width, cfg.pde.n_points)?;
    ev.validate(state.h())?;
    Ok(evolve(state, ev)?)
}

pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<i32, Failure> {
    cfg.validate()?;
    ensure_dir(out)?;
    let ev = snapshot_config(cfg);
    let outcome = run_pde(cfg.profile()?, cfg, &ev)?;
    let fp = cfg.fingerprint("evolve");
    let m = write_snapshots(out, &outcome, ev.dt, &fingerprint_header(&fp))?;
    println!("evolve: {} snapshots to t = {}", m.snapshots.len(), m.final_t);
    if let Some(b) = outcome.blowup {
        println!("blow-up at t = {} (sup-norm {:e})", b.t, b.sup_norm);
        return Ok(EXIT_RUNTIME);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct RaySummary {
    pub xi: f64,
    /// Least-squares slope of `ln|q|` against `ln t` (rays with `xi < 0`).
    pub decay_exponent: Option<f64>,
    pub fit_points: usize,
    pub last_trusted_t: Option<f64>,
    pub abs_q_pde_last: Option<f64>,
    /// `|A delta(xi, 0)^2|` (rays with `xi > 0`).
    pub abs_modulated_constant: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub fingerprint: String,
    pub blowup_t: Option<f64>,
    pub rays: Vec<RaySummary>,
}

/// Least-squares slope of `ln y` against `ln t`.
pub fn fit_power(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<(i32, CompareSummary), Failure> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sd = spectral_data(cfg)?;
    let mut ev = cfg.pde.evolve.clone();
    let t_end = ev.steps as f64 * ev.dt;
    if ev.snapshot_times.is_empty() {
        ev.snapshot_times = (1..=(t_end.floor() as usize)).map(|j| j as f64).collect();
    }
    let outcome = run_pde(cfg.profile()?, cfg, &ev)?;
    let fp = cfg.fingerprint("compare");
    let mut csv = CsvOut::create(
        &out.join("compare.csv"),
        &fp,
        &["t", "x", "xi", "Re q_pde", "Im q_pde", "Re q_asym", "Im q_asym", "abs_err", "rel_err", "regime", "trusted"],
    )?;
    let nan = f(f64::NAN);
    let mut rays = Vec::new();
    for &xi in &cfg.rays {
        let mut fit = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for &t in &ev.snapshot_times {
            if t <= 0.0 {
                continue;
            }
            let x = 4.0 * xi * t;
            let (regime, qa) = match q_asymptotic(&sd, x, t) {
                Ok(r) => (r.regime.to_string(), r.value),
                Err(_) if xi == 0.0 => ("Transition".to_string(), Complex64::new(f64::NAN, f64::NAN)),
                Err(e) => (format!("Error: {e}"), Complex64::new(f64::NAN, f64::NAN)),
            };
            let sample = match ray_sample(&outcome.snapshots, xi, &[t]) {
                Ok(s) => s,
                Err(_) => continue, // no snapshot: evolution stopped earlier
            };
            match sample.samples.first() {
                Some(&(ts, qp)) if !sample.truncated => {
                    let err = (qp - qa).norm();
                    csv.row([f(ts), f(x), f(xi), f(qp.re), f(qp.im), f(qa.re), f(qa.im), f(err), f(err / qp.norm()),
                        regime, "true".into()])?;
                    if ts >= cfg.fit_window[0] && ts <= cfg.fit_window[1] {
                        fit.push((ts, qp.norm()));
                    }
                    last = Some((ts, qp.norm()));
                }
                _ => {
                    csv.row([f(t), f(x), f(xi), nan.clone(), nan.clone(), f(qa.re), f(qa.im), nan.clone(), nan.clone(),
                        regime, "false".into()])?;
                }
            }
        }
        let abs_c = if xi > 0.0 { modulated_constant(&sd, xi).ok().map(|c| c.norm()) } else { None };
        rays.push(RaySummary {
            xi,
            decay_exponent: if xi < 0.0 { fit_power(&fit) } else { None },
            fit_points: fit.len(),
            last_trusted_t: last.map(|l| l.0),
            abs_q_pde_last: last.map(|l| l.1),
            abs_modulated_constant: abs_c,
        });
    }
    csv.finish()?;
    let summary = CompareSummary { fingerprint: fp, blowup_t: outcome.blowup.map(|b| b.t), rays };
    let path = out.join("compare_summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n")
        .map_err(|e| io_failure(&path, e))?;
    for r in &summary.rays {
        println!(
            "xi = {:+.3}: exponent {:?} ({} pts), |q_pde| at t = {:?}: {:?}, |A delta^2| = {:?}",
            r.xi, r.decay_exponent, r.fit_points, r.last_trusted_t, r.abs_q_pde_last, r.abs_modulated_constant
        );
    }
    if let Some(t) = summary.blowup_t {
        println!("evolution stopped by blow-up at t = {t}");
        return Ok((EXIT_RUNTIME, summary));
    }
    Ok((EXIT_OK, summary))
}

/// Exact one-soliton values against the fixed-`x` long-time formula fed with reflectionless data.
pub fn cmd_soliton(cfg: &RunConfig, out: &Path) -> Result<i32, Failure> {
    cfg.validate()?;
    let (a, phi) = match cfg.profile()? {
        ProfileSpec::Builtin(BuiltinProfile::Soliton { amplitude, phi1 }) => (*amplitude, *phi1),
        _ => return Err(Failure::input("soliton command needs the builtin soliton profile".into())),
    };
    ensure_dir(out)?;
    let params = SolitonParams::new(a, phi)?;
    let sd = SpectralData::from_spectrum(
        Arc::new(ReflectionlessSpectrum { amplitude: a, phi1: phi }),
        cfg.k_grid.nodes()?,
        Some(0.0),
        &cfg.quadrature,
    )?;
    let fp = cfg.fingerprint("soliton");
    let mut csv = CsvOut::create(
        &out.join("soliton.csv"),
        &fp,
        &["x0", "t", "Re q_exact", "Im q_exact", "Re q_region", "Im q_region", "abs_diff", "note"],
    )?;
    let nan = f(f64::NAN);
    let mut worst: f64 = 0.0;
    for &x0 in &cfg.soliton.x0 {
        for &t in &cfg.soliton.times {
            match (one_soliton(&params, x0, t), q_soliton_region(&sd, x0, t)) {
                (Ok(e), Ok(r)) => {
                    let d = (e - r).norm();
                    worst = worst.max(d);
                    csv.row([f(x0), f(t), f(e.re), f(e.im), f(r.re), f(r.im), f(d), String::new()])?;
                }
                (Err(e), _) | (_, Err(e)) => {
                    csv.row([f(x0), f(t), nan.clone(), nan.clone(), nan.clone(), nan.clone(), nan.clone(), e.to_string()])?;
                }
            }
        }
    }
    csv.finish()?;
    let tn = singularity_times(&params, 0..=3);
    println!("singularity times at x = 0: {tn:?}");
    println!("max |exact - region formula| = {worst:e}");
    Ok(EXIT_OK)
}
