//! JSON run configuration: schema, defaults, and conversion into the
//! domain types.
//!
//! Frequencies in the file are plain GHz so configs stay human-editable;
//! conversion to angular rad/ps happens here, once, at load. A config
//! resolves into a [`LoadedConfig`] carrying both the domain objects and
//! a fully expanded copy of the file (`resolved`) in which presets and
//! defaults have been materialized; manifests embed that copy so a run
//! can be reproduced without access to the original file or binary
//! defaults.

use crate::error::{Error, Result};
use crate::model::{
    DipoleChannel, DriveConfig, EmitterModel, PhononBathConfig, PhononChannel, Polarization,
    RabiAmplitudes,
};
use crate::spectrum;
use crate::sweep::SweepSpec;
use crate::units::{ghz_to_rad_per_ps, rad_per_ps_to_ghz};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub emitter: EmitterSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    pub phonon_bath: BathSection,
    #[serde(default)]
    pub solver: SolverSection,
}

/// Either a preset name or a full explicit level structure; mixing the
/// two is rejected so a resolved config has a single source of truth.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_energies_ghz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excited_levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zpl_center_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_channels: Option<Vec<DipoleChannelEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phonon_channels: Option<Vec<PhononChannelEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiative_rate_per_ps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleChannelEntry {
    pub ground: usize,
    pub excited: usize,
    pub polarization: Polarization,
    #[serde(default = "one")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononChannelEntry {
    pub a: usize,
    pub b: usize,
    #[serde(default = "one")]
    pub coupling: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub detuning_ghz: f64,
    pub rabi_rad_per_ps: RabiEntry,
}

/// A bare number drives all polarizations equally; an {x, y, z} object
/// sets them independently.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RabiEntry {
    Uniform(f64),
    PerAxis { x: f64, y: f64, z: f64 },
}

impl RabiEntry {
    fn to_amplitudes(&self) -> RabiAmplitudes {
        match *self {
            RabiEntry::Uniform(v) => RabiAmplitudes::uniform(v),
            RabiEntry::PerAxis { x, y, z } => RabiAmplitudes { x, y, z },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub temperature_k: f64,
    #[serde(default = "default_bath_coupling")]
    pub coupling_per_ps: f64,
    #[serde(default = "default_spectral_exponent")]
    pub spectral_exponent: f64,
    #[serde(default = "one")]
    pub reference_freq_rad_per_ps: f64,
}

fn default_bath_coupling() -> f64 {
    1e-2
}

fn default_spectral_exponent() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_spectrum_window")]
    pub window_ghz: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            grid_points: default_grid_points(),
            window_ghz: default_spectrum_window(),
            sweep: None,
        }
    }
}

fn default_grid_points() -> usize {
    spectrum::DEFAULT_GRID_POINTS
}

fn default_spectrum_window() -> (f64, f64) {
    spectrum::DEFAULT_WINDOW_GHZ
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub temperatures_k: Vec<f64>,
    pub rabi_rad_per_ps: Vec<f64>,
    #[serde(default = "default_sweep_window")]
    pub window_ghz: (f64, f64),
    #[serde(default = "default_coarse_points")]
    pub coarse_points: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_sweep_window() -> (f64, f64) {
    crate::sweep::DEFAULT_WINDOW_GHZ
}

fn default_coarse_points() -> usize {
    crate::sweep::DEFAULT_COARSE_POINTS
}

fn default_rel_tol() -> f64 {
    crate::sweep::DEFAULT_REL_TOL
}

/// A validated run configuration: domain objects ready to hand to the
/// solvers, plus the expanded file image for the manifest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub model: EmitterModel,
    pub drive: Option<DriveConfig>,
    pub bath: PhononBathConfig,
    pub grid_points: usize,
    pub window_ghz: (f64, f64),
    pub sweep: SweepSpec,
    pub resolved: ConfigFile,
}

impl LoadedConfig {
    /// The drive section, which spectrum and power runs cannot do without.
    pub fn require_drive(&self) -> Result<&DriveConfig> {
        self.drive.as_ref().ok_or(Error::MissingSection("drive"))
    }
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

fn build_model(section: &EmitterSection) -> Result<EmitterModel> {
    if let Some(name) = &section.preset {
        let explicit = section.level_energies_ghz.is_some()
            || section.ground_levels.is_some()
            || section.excited_levels.is_some()
            || section.zpl_center_ghz.is_some()
            || section.dipole_channels.is_some()
            || section.phonon_channels.is_some()
            || section.radiative_rate_per_ps.is_some();
        if explicit {
            return Err(config_err(
                "emitter.preset",
                "a preset cannot be combined with explicit emitter fields",
            ));
        }
        return match name.as_str() {
            "siv_default" => Ok(EmitterModel::siv_default()),
            "siv_three_level" => Ok(EmitterModel::siv_three_level()),
            other => Err(config_err(
                "emitter.preset",
                format!("unknown preset `{other}` (expected siv_default or siv_three_level)"),
            )),
        };
    }

    let energies = section
        .level_energies_ghz
        .as_ref()
        .ok_or_else(|| config_err("emitter.level_energies_ghz", "required without a preset"))?;
    let ground = section
        .ground_levels
        .as_ref()
        .ok_or_else(|| config_err("emitter.ground_levels", "required without a preset"))?;
    let excited = section
        .excited_levels
        .as_ref()
        .ok_or_else(|| config_err("emitter.excited_levels", "required without a preset"))?;
    let zpl = section
        .zpl_center_ghz
        .ok_or_else(|| config_err("emitter.zpl_center_ghz", "required without a preset"))?;
    let dipoles = section
        .dipole_channels
        .as_ref()
        .ok_or_else(|| config_err("emitter.dipole_channels", "required without a preset"))?;

    let model = EmitterModel {
        level_energies: energies.iter().map(|&f| ghz_to_rad_per_ps(f)).collect(),
        ground_levels: ground.clone(),
        excited_levels: excited.clone(),
        zpl_center: ghz_to_rad_per_ps(zpl),
        dipole_channels: dipoles
            .iter()
            .map(|d| DipoleChannel {
                ground: d.ground,
                excited: d.excited,
                polarization: d.polarization,
                amplitude: d.amplitude,
            })
            .collect(),
        phonon_channels: section
            .phonon_channels
            .as_ref()
            .map(|chs| {
                chs.iter()
                    .map(|p| PhononChannel { a: p.a, b: p.b, coupling: p.coupling })
                    .collect()
            })
            .unwrap_or_default(),
        radiative_rate: section.radiative_rate_per_ps.unwrap_or(1e-3),
    };
    model.validate()?;
    Ok(model)
}

/// The inverse of [`build_model`]: an explicit emitter section in GHz,
/// used when expanding presets into the resolved config.
fn emitter_section_of(model: &EmitterModel) -> EmitterSection {
    EmitterSection {
        preset: None,
        level_energies_ghz: Some(
            model.level_energies.iter().map(|&w| rad_per_ps_to_ghz(w)).collect(),
        ),
        ground_levels: Some(model.ground_levels.clone()),
        excited_levels: Some(model.excited_levels.clone()),
        zpl_center_ghz: Some(rad_per_ps_to_ghz(model.zpl_center)),
        dipole_channels: Some(
            model
                .dipole_channels
                .iter()
                .map(|d| DipoleChannelEntry {
                    ground: d.ground,
                    excited: d.excited,
                    polarization: d.polarization,
                    amplitude: d.amplitude,
                })
                .collect(),
        ),
        phonon_channels: Some(
            model
                .phonon_channels
                .iter()
                .map(|p| PhononChannelEntry { a: p.a, b: p.b, coupling: p.coupling })
                .collect(),
        ),
        radiative_rate_per_ps: Some(model.radiative_rate),
    }
}

/// Parses and validates a JSON config. Schema violations carry the JSON
/// path of the offending field.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: ConfigFile = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| config_err(&e.path().to_string(), e.inner().to_string()))?;

    let model = build_model(&raw.emitter)?;

    let drive = match &raw.drive {
        Some(d) => {
            let drive = DriveConfig {
                detuning: ghz_to_rad_per_ps(d.detuning_ghz),
                rabi: d.rabi_rad_per_ps.to_amplitudes(),
            };
            drive.validate()?;
            Some(drive)
        }
        None => None,
    };

    let bath = PhononBathConfig {
        temperature_k: raw.phonon_bath.temperature_k,
        coupling: raw.phonon_bath.coupling_per_ps,
        spectral_exponent: raw.phonon_bath.spectral_exponent,
        reference_freq: raw.phonon_bath.reference_freq_rad_per_ps,
    };
    bath.validate()?;

    let solver = &raw.solver;
    if solver.grid_points < 2 {
        return Err(config_err("solver.grid_points", "need at least 2 grid points"));
    }
    let (lo, hi) = solver.window_ghz;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(config_err("solver.window_ghz", "window bounds must be finite with lo < hi"));
    }

    let sweep = match &solver.sweep {
        Some(s) => SweepSpec {
            temperatures_k: s.temperatures_k.clone(),
            rabi_rad_per_ps: s.rabi_rad_per_ps.clone(),
            window_ghz: s.window_ghz,
            coarse_points: s.coarse_points,
            rel_tol: s.rel_tol,
        },
        None => SweepSpec::default(),
    };
    sweep.validate()?;

    let resolved = ConfigFile {
        emitter: emitter_section_of(&model),
        drive: raw.drive.clone(),
        phonon_bath: BathSection {
            temperature_k: bath.temperature_k,
            coupling_per_ps: bath.coupling,
            spectral_exponent: bath.spectral_exponent,
            reference_freq_rad_per_ps: bath.reference_freq,
        },
        solver: SolverSection {
            grid_points: solver.grid_points,
            window_ghz: solver.window_ghz,
            sweep: Some(SweepSection {
                temperatures_k: sweep.temperatures_k.clone(),
                rabi_rad_per_ps: sweep.rabi_rad_per_ps.clone(),
                window_ghz: sweep.window_ghz,
                coarse_points: sweep.coarse_points,
                rel_tol: sweep.rel_tol,
            }),
        },
    };

    Ok(LoadedConfig {
        model,
        drive,
        bath,
        grid_points: solver.grid_points,
        window_ghz: solver.window_ghz,
        sweep,
        resolved,
    })
}

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    parse_config(&text)
}
