//! File formats: profile JSON, spectral CSV + sidecar, snapshot CSV + manifest.
//!
//! Writers take a `header` that is emitted verbatim as `# ` comment lines
//! before the CSV body; readers skip those lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{one_soliton, SolitonParams};
use crate::kernels::QuadratureSpec;
use crate::pde::{BlowUp, EvolveOutcome, FieldState, Snapshot};
use crate::scattering::{
    InitialProfile, SpectralData, SpectralScalars, TabulatedSpectrum, ValidationCheck,
};

/// Named profile with closed-form initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
pub enum BuiltinProfile {
    PureStep {
        amplitude: f64,
        /// Ramp width used only for time evolution; defaults to `0.5/A`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ramp_width: Option<f64>,
    },
    Soliton {
        amplitude: f64,
        phi1: f64,
    },
    SmoothedStep {
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
}

fn default_width() -> f64 {
    0.5
}

/// Uniformly sampled profile on `[-N, N]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledProfile {
    pub amplitude: f64,
    pub support_radius: f64,
    pub grid_step: f64,
    /// `[re, im]` pairs.
    pub samples: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Builtin(BuiltinProfile),
    Sampled(SampledProfile),
}

impl<'de> Deserialize<'de> for ProfileSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        ProfileSpec::from_value(v).map_err(serde::de::Error::custom)
    }
}

impl ProfileSpec {
    fn from_value(v: serde_json::Value) -> Result<Self> {
        if v.get("builtin").is_some() {
            Ok(ProfileSpec::Builtin(serde_json::from_value(v).map_err(|e| Error::Profile(e.to_string()))?))
        } else {
            Ok(ProfileSpec::Sampled(serde_json::from_value(v).map_err(|e| Error::Profile(e.to_string()))?))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
        Self::from_value(v)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Profile(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            ProfileSpec::Builtin(BuiltinProfile::PureStep { amplitude, .. })
            | ProfileSpec::Builtin(BuiltinProfile::Soliton { amplitude, .. })
            | ProfileSpec::Builtin(BuiltinProfile::SmoothedStep { amplitude, .. }) => *amplitude,
            ProfileSpec::Sampled(s) => s.amplitude,
        }
    }

    /// Profile handed to the direct scattering solver.
    pub fn scattering_profile(&self) -> Result<InitialProfile> {
        match self {
            ProfileSpec::Builtin(BuiltinProfile::PureStep { amplitude, .. }) => InitialProfile::pure_step(*amplitude),
            ProfileSpec::Builtin(BuiltinProfile::Soliton { amplitude, phi1 }) => {
                InitialProfile::soliton(*amplitude, *phi1)
            }
            ProfileSpec::Builtin(BuiltinProfile::SmoothedStep { amplitude, width }) => {
                InitialProfile::smoothed_step(*amplitude, *width)
            }
            ProfileSpec::Sampled(s) => {
                let samples = s.samples.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                InitialProfile::from_samples(s.amplitude, s.support_radius, s.grid_step, samples, None)
            }
        }
    }

    /// Initial value on the whole line, for time evolution. The sharp step
    /// is replaced by a tanh ramp.
    pub fn initial_value(&self) -> Result<Box<dyn Fn(f64) -> Result<Complex64>>> {
        Ok(match self.clone() {
            ProfileSpec::Builtin(BuiltinProfile::PureStep { amplitude, ramp_width }) => {
                let w = ramp_width.unwrap_or(0.5 / amplitude);
                if !(w > 0.0) {
                    return Err(Error::Profile(format!("ramp_width must be positive, got {w}")));
                }
                Box::new(move |x: f64| Ok(Complex64::new(0.5 * amplitude * (1.0 + (x / w).tanh()), 0.0)))
            }
            ProfileSpec::Builtin(BuiltinProfile::Soliton { amplitude, phi1 }) => {
                let p = SolitonParams::new(amplitude, phi1)?;
                Box::new(move |x: f64| one_soliton(&p, x, 0.0))
            }
            ProfileSpec::Builtin(BuiltinProfile::SmoothedStep { amplitude, width }) => {
                if !(width > 0.0) {
                    return Err(Error::Profile(format!("width must be positive, got {width}")));
                }
                Box::new(move |x: f64| Ok(Complex64::new(0.5 * amplitude * (1.0 + (x / width).tanh()), 0.0)))
            }
            ProfileSpec::Sampled(_) => {
                let p = self.scattering_profile()?;
                Box::new(move |x: f64| Ok(linear_sample(&p, x)))
            }
        })
    }

    /// Initial field on the PDE grid.
    pub fn field(&self, half_width: f64, n_points: usize) -> Result<FieldState> {
        let f = self.initial_value()?;
        FieldState::from_fn(half_width, n_points, self.amplitude(), 0.0, f)
    }
}

fn linear_sample(p: &InitialProfile, x: f64) -> Complex64 {
    let n = p.support_radius();
    if x <= -n {
        return Complex64::new(0.0, 0.0);
    }
    if x >= n {
        return Complex64::new(p.amplitude(), 0.0);
    }
    let h = p.grid_step();
    let s = (x + n) / h;
    let j = (s.floor() as usize).min(p.samples().len() - 2);
    let f = s - j as f64;
    p.samples()[j] * (1.0 - f) + p.samples()[j + 1] * f
}

fn write_header(w: &mut impl Write, header: &str) -> Result<()> {
    for line in header.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?)
}

fn parse_f64(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<f64> {
    rec.get(i)
        .ok_or_else(|| Error::Parse(format!("{}: missing column {i}", path.display())))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{}: column {i}: {e}", path.display())))
}

/// Sidecar stored next to the spectral CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSidecar {
    #[serde(flatten)]
    pub scalars: SpectralScalars,
    pub k1_root: Option<f64>,
    pub quadrature: QuadratureSpec,
    pub validation: Vec<ValidationCheck>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `k, Re a1, Im a1, Re a2, Im a2, Re b, Im b` and the JSON sidecar.
pub fn write_spectral(path: &Path, sd: &SpectralData, header: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    write_header(&mut file, header)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["k", "Re a1", "Im a1", "Re a2", "Im a2", "Re b", "Im b"])?;
    for j in 0..sd.k_grid.len() {
        w.write_record([
            fmt(sd.k_grid[j]),
            fmt(sd.a1[j].re),
            fmt(sd.a1[j].im),
            fmt(sd.a2[j].re),
            fmt(sd.a2[j].im),
            fmt(sd.b[j].re),
            fmt(sd.b[j].im),
        ])?;
    }
    w.flush()?;
    let side = SpectralSidecar {
        scalars: sd.scalars(),
        k1_root: sd.k1_root,
        quadrature: sd.quadrature,
        validation: sd.validation.clone(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

/// Reads a spectral CSV and its sidecar; the grid is interpolated for
/// quadrature sampling.
pub fn read_spectral(path: &Path) -> Result<SpectralData> {
    let side: SpectralSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)
        .map_err(|e| Error::Parse(format!("{}: {e}", sidecar_path(path).display())))?;
    let mut rd = reader(path)?;
    let (mut k, mut a1, mut a2, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let v = (0..7).map(|i| parse_f64(&rec, i, path)).collect::<Result<Vec<f64>>>()?;
        k.push(v[0]);
        a1.push(Complex64::new(v[1], v[2]));
        a2.push(Complex64::new(v[3], v[4]));
        b.push(Complex64::new(v[5], v[6]));
    }
    let spectrum = Arc::new(TabulatedSpectrum::new(side.scalars.amplitude, k.clone(), a1.clone(), a2.clone(), b.clone())?);
    let mut sd = SpectralData::from_parts(spectrum, k, a1, a2, b, side.scalars, &side.quadrature)?;
    sd.k1_root = side.k1_root;
    sd.validation = side.validation;
    Ok(sd)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub file: String,
    pub trusted_half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub half_width: f64,
    pub n_points: usize,
    pub h: f64,
    pub dt: f64,
    pub amplitude: f64,
    pub snapshots: Vec<SnapshotEntry>,
    pub blowup: Option<BlowUp>,
    pub final_t: f64,
}

/// Writes `x, Re q, Im q, abs q`.
pub fn write_snapshot(path: &Path, snap: &Snapshot, header: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    write_header(&mut file, header)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["x", "Re q", "Im q", "abs q"])?;
    let st = &snap.state;
    for (j, q) in st.q.iter().enumerate() {
        w.write_record([fmt(st.x(j)), fmt(q.re), fmt(q.im), fmt(q.norm())])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes each snapshot as `snapshot_<i>.csv` plus `manifest.json` into `dir`.
pub fn write_snapshots(dir: &Path, outcome: &EvolveOutcome, dt: f64, header: &str) -> Result<SnapshotManifest> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (i, s) in outcome.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:04}.csv");
        write_snapshot(&dir.join(&name), s, header)?;
        entries.push(SnapshotEntry { t: s.state.t, file: name, trusted_half_width: s.trusted_half_width });
    }
    let st = &outcome.final_state;
    let m = SnapshotManifest {
        half_width: st.half_width,
        n_points: st.n_points(),
        h: st.h(),
        dt,
        amplitude: st.amplitude,
        snapshots: entries,
        blowup: outcome.blowup,
        final_t: st.t,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(m)
}

/// Reads a snapshot CSV back into a field.
pub fn read_snapshot(path: &Path, amplitude: f64, t: f64) -> Result<FieldState> {
    let mut rd = reader(path)?;
    let mut xs = Vec::new();
    let mut q = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        xs.push(parse_f64(&rec, 0, path)?);
        q.push(Complex64::new(parse_f64(&rec, 1, path)?, parse_f64(&rec, 2, path)?));
    }
    let l = *xs.last().ok_or_else(|| Error::Parse(format!("{}: empty snapshot", path.display())))?;
    FieldState::new(l, amplitude, q, t)
}
