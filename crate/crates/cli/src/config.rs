use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nnls_core::io::{BuiltinProfile, ProfileSpec};
use nnls_core::kernels::QuadratureSpec;
use nnls_core::pde::EvolveConfig;
use nnls_core::scattering::KGridSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub half_width: f64,
    pub n_points: usize,
    pub evolve: EvolveConfig,
}

impl Default for PdeSection {
    fn default() -> Self {
        Self { half_width: 40.0, n_points: 4001, evolve: EvolveConfig::new(5e-5, 20000) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolitonSection {
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
}

impl Default for SolitonSection {
    fn default() -> Self {
        Self { x0: vec![-2.0, 0.0, 2.0], times: vec![0.5, 1.0, 2.0, 5.0] }
    }
}

/// One JSON document drives every subcommand; each reads the sections it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub profile: Option<ProfileSpec>,
    pub k_grid: KGridSpec,
    pub quadrature: QuadratureSpec,
    /// Spectral CSV written by `scatter`, used by `asym` instead of recomputing.
    pub spectral_input: Option<PathBuf>,
    pub rays: Vec<f64>,
    pub times: Vec<f64>,
    pub pde: PdeSection,
    pub fit_window: [f64; 2],
    pub soliton: SolitonSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profile: None,
            k_grid: KGridSpec::default(),
            quadrature: QuadratureSpec::default(),
            spectral_input: None,
            rays: vec![-1.0, -0.5, -0.25, 0.25, 0.5, 1.0],
            times: vec![25.0, 50.0, 100.0],
            pde: PdeSection::default(),
            fit_window: [10.0, 40.0],
            soliton: SolitonSection::default(),
        }
    }
}

pub fn builtin_by_name(name: &str) -> Option<ProfileSpec> {
    let b = match name {
        "pure_step" => BuiltinProfile::PureStep { amplitude: 1.0, ramp_width: None },
        "soliton" => BuiltinProfile::Soliton { amplitude: 1.0, phi1: PI },
        "smoothed_step" => BuiltinProfile::SmoothedStep { amplitude: 1.0, width: 0.5 },
        _ => return None,
    };
    Some(ProfileSpec::Builtin(b))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("config {}: {e}", path.display())))
    }

    /// Applies `--profile`, which is a builtin name or a JSON file.
    pub fn with_profile_arg(mut self, arg: Option<&str>) -> Result<Self, Failure> {
        if let Some(a) = arg {
            self.profile = Some(match builtin_by_name(a) {
                Some(p) => p,
                None => ProfileSpec::load(Path::new(a)).map_err(|e| Failure::input(format!("profile {a}: {e}")))?,
            });
        }
        Ok(self)
    }

    pub fn profile(&self) -> Result<&ProfileSpec, Failure> {
        self.profile.as_ref().ok_or_else(|| Failure::input("no profile given (use --profile or the config)".into()))
    }

    /// Range checks that do not need any computation.
    pub fn validate(&self) -> Result<(), Failure> {
        self.quadrature.validate().map_err(|e| Failure::input(e.to_string()))?;
        self.k_grid.nodes().map_err(|e| Failure::input(e.to_string()))?;
        if let Some(p) = &self.profile {
            if !(p.amplitude() > 0.0 && p.amplitude().is_finite()) {
                return Err(Failure::input(format!("profile amplitude must be positive, got {}", p.amplitude())));
            }
        }
        if let Some(t) = self.times.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Failure::input(format!("times must be positive, got {t}")));
        }
        if self.rays.iter().any(|r| !r.is_finite()) {
            return Err(Failure::input("rays must be finite".into()));
        }
        if !(self.fit_window[0] > 0.0 && self.fit_window[1] > self.fit_window[0]) {
            return Err(Failure::input(format!("fit_window must satisfy 0 < t0 < t1, got {:?}", self.fit_window)));
        }
        if let Some(p) = &self.spectral_input {
            if !p.exists() {
                return Err(Failure::input(format!("spectral_input {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the command name and the resolved configuration.
    pub fn fingerprint(&self, command: &str) -> String {
        let doc = serde_json::json!({ "command": command, "config": self });
        let digest = Sha256::digest(serde_json::to_vec(&doc).expect("config serialises"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
