//! Closed-form cooling bounds and laboratory break-even estimates.
//!
//! These are scalar conversions between the per-emitter steady-state
//! results and the questions an experiment would ask: how much cooling
//! is thermodynamically available per cycle, how good the quantum
//! efficiency has to be before non-radiative decay overwhelms the
//! extracted heat, what drive intensity a given Rabi amplitude implies,
//! how dense the emitters must be to beat background absorption, and
//! how pure the zero-phonon emission must stay.
//!
//! Every input parameter carries a `paper_default` flag in serialized
//! reports: true when the value is one of the anchored defaults the
//! break-even analysis is calibrated around, false for user overrides
//! and for the representative stand-ins (dipole moment, refractive
//! index, sideband energy) that are merely plausible host values.

use crate::error::{Error, Result};
use crate::units;
use serde::{Deserialize, Serialize};

pub const DEFAULT_T_KELVIN: f64 = 10.0;
pub const DEFAULT_E_OPT_EV: f64 = 1.0;
pub const DEFAULT_CYCLE_RATE_PER_PS: f64 = 1e-3;
pub const DEFAULT_N_LEVELS: usize = 2;
pub const DEFAULT_ALPHA_B_PER_CM: f64 = 0.1;
pub const DEFAULT_RABI_RAD_PER_PS: f64 = 0.2;
pub const DEFAULT_DENSITY_PER_M3: f64 = 1e24;
pub const DEFAULT_DIPOLE_DEBYE: f64 = 10.0;
pub const DEFAULT_N_REFRACTIVE: f64 = 2.4;
pub const DEFAULT_SIDEBAND_ENERGY_MEV: f64 = 40.0;
pub const DEFAULT_ZPL_FRACTION: f64 = 1.0;

/// Upper bound on steady cooling power: k T gamma ln N, in watts. An
/// emitter cycling at `gamma` can dump at most the entropy of its
/// maximally mixed state per cycle, worth kT ln N of heat.
pub fn thermodynamic_bound_w(t_kelvin: f64, gamma_per_ps: f64, n_levels: usize) -> Result<f64> {
    if !(t_kelvin.is_finite() && t_kelvin >= 0.0) {
        return Err(Error::invalid("temperature", "must be finite and >= 0 K"));
    }
    if !(gamma_per_ps.is_finite() && gamma_per_ps > 0.0) {
        return Err(Error::invalid("cycle rate", "must be finite and > 0"));
    }
    if n_levels < 1 {
        return Err(Error::invalid("level count", "must be >= 1"));
    }
    let gamma_per_s = gamma_per_ps * 1e12;
    Ok(units::KB_J_PER_K * t_kelvin * gamma_per_s * (n_levels as f64).ln())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QeThreshold {
    /// Cooling cycles available per tolerable non-radiative decay:
    /// E_opt / kT, since one lost photon re-deposits E_opt of heat while
    /// each cycle extracts about kT.
    pub cycles_per_nr_decay: f64,
    /// 1 - kT/E_opt: the quantum efficiency at which losses break even.
    pub min_qe: f64,
}

pub fn qe_threshold(t_kelvin: f64, e_opt_ev: f64) -> Result<QeThreshold> {
    if !(t_kelvin.is_finite() && t_kelvin > 0.0) {
        return Err(Error::invalid("temperature", "must be finite and > 0 K"));
    }
    if !(e_opt_ev.is_finite() && e_opt_ev > 0.0) {
        return Err(Error::invalid("photon energy", "must be finite and > 0 eV"));
    }
    let kt_ev = units::KB_J_PER_K * t_kelvin / units::EV_J;
    Ok(QeThreshold {
        cycles_per_nr_decay: e_opt_ev / kt_ev,
        min_qe: 1.0 - kt_ev / e_opt_ev,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriveIntensity {
    pub field_v_per_m: f64,
    pub intensity_w_per_m2: f64,
}

/// Electric field and intensity that produce a given Rabi amplitude on
/// a dipole of `dipole_debye`, inside a host of the given index:
/// E = hbar Omega / d and I = (1/2) c epsilon0 n E^2.
pub fn intensity_from_rabi(
    omega_rad_per_ps: f64,
    dipole_debye: f64,
    n_refractive: f64,
) -> Result<DriveIntensity> {
    if !(omega_rad_per_ps.is_finite() && omega_rad_per_ps >= 0.0) {
        return Err(Error::invalid("Rabi amplitude", "must be finite and >= 0"));
    }
    if !(dipole_debye.is_finite() && dipole_debye > 0.0) {
        return Err(Error::invalid("dipole moment", "must be finite and > 0 Debye"));
    }
    if !(n_refractive.is_finite() && n_refractive > 0.0) {
        return Err(Error::invalid("refractive index", "must be finite and > 0"));
    }
    let omega_rad_per_s = omega_rad_per_ps * 1e12;
    let dipole_c_m = dipole_debye * units::DEBYE_C_M;
    let field = units::HBAR_J_S * omega_rad_per_s / dipole_c_m;
    let intensity =
        0.5 * units::C_M_PER_S * units::EPSILON0_F_PER_M * n_refractive * field * field;
    Ok(DriveIntensity { field_v_per_m: field, intensity_w_per_m2: intensity })
}

/// Emitter density at which per-emitter cooling balances background
/// absorption heating alpha_b * I, in 1/m^3.
pub fn min_density_per_m3(
    alpha_b_per_cm: f64,
    intensity_w_per_m2: f64,
    p_cool_w: f64,
) -> Result<f64> {
    if !(alpha_b_per_cm.is_finite() && alpha_b_per_cm >= 0.0) {
        return Err(Error::invalid("background absorption", "must be finite and >= 0"));
    }
    if !(intensity_w_per_m2.is_finite() && intensity_w_per_m2 >= 0.0) {
        return Err(Error::invalid("intensity", "must be finite and >= 0"));
    }
    if !(p_cool_w.is_finite() && p_cool_w > 0.0) {
        return Err(Error::invalid(
            "cooling power",
            "no net cooling possible: per-emitter cooling power must be > 0",
        ));
    }
    let alpha_b_per_m = alpha_b_per_cm * 100.0;
    Ok(alpha_b_per_m * intensity_w_per_m2 / p_cool_w)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZplThreshold {
    /// Smallest zero-phonon emission fraction compatible with net
    /// cooling, in [0, 1].
    pub beta_min: f64,
    /// True when cooling beats even fully sideband-shifted emission, so
    /// no fraction requirement exists.
    pub sideband_never_limits: bool,
}

/// Each photon emitted outside the zero-phonon line leaves an average
/// of `sideband_energy_mev` behind as heat; this solves for the
/// branching fraction where that heating cancels the cooling.
pub fn zpl_threshold(
    p_cool_w: f64,
    emission_rate_per_ps: f64,
    sideband_energy_mev: f64,
) -> Result<ZplThreshold> {
    if !(p_cool_w.is_finite() && p_cool_w > 0.0) {
        return Err(Error::invalid("cooling power", "must be finite and > 0"));
    }
    if !(emission_rate_per_ps.is_finite() && emission_rate_per_ps > 0.0) {
        return Err(Error::invalid("emission rate", "must be finite and > 0"));
    }
    if !(sideband_energy_mev.is_finite() && sideband_energy_mev > 0.0) {
        return Err(Error::invalid("sideband energy", "must be finite and > 0"));
    }
    let sideband_j = sideband_energy_mev * 1e-3 * units::EV_J;
    let full_sideband_heating_w = emission_rate_per_ps * 1e12 * sideband_j;
    let beta_min = 1.0 - p_cool_w / full_sideband_heating_w;
    if beta_min <= 0.0 {
        Ok(ZplThreshold { beta_min: 0.0, sideband_never_limits: true })
    } else {
        Ok(ZplThreshold { beta_min, sideband_never_limits: false })
    }
}

/// One scalar budget parameter with its provenance flag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlaggedValue {
    pub value: f64,
    pub paper_default: bool,
}

fn anchored(value: f64, default: f64) -> FlaggedValue {
    FlaggedValue { value, paper_default: value == default }
}

fn stand_in(value: f64) -> FlaggedValue {
    FlaggedValue { value, paper_default: false }
}

/// Inputs to the break-even report. Optional fields fall back to
/// derived values: intensity from the Rabi amplitude, cooling power
/// from the idealized per-cycle proxy kT * cycle_rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetInputs {
    pub t_kelvin: f64,
    pub e_opt_ev: f64,
    pub cycle_rate_per_ps: f64,
    pub n_levels: usize,
    pub alpha_b_per_cm: f64,
    pub rabi_rad_per_ps: f64,
    pub dipole_debye: f64,
    pub n_refractive: f64,
    pub sideband_energy_mev: f64,
    pub zpl_fraction: f64,
    pub density_per_m3: f64,
    pub intensity_w_per_m2: Option<f64>,
    pub cooling_power_w: Option<f64>,
}

impl Default for BudgetInputs {
    fn default() -> Self {
        BudgetInputs {
            t_kelvin: DEFAULT_T_KELVIN,
            e_opt_ev: DEFAULT_E_OPT_EV,
            cycle_rate_per_ps: DEFAULT_CYCLE_RATE_PER_PS,
            n_levels: DEFAULT_N_LEVELS,
            alpha_b_per_cm: DEFAULT_ALPHA_B_PER_CM,
            rabi_rad_per_ps: DEFAULT_RABI_RAD_PER_PS,
            dipole_debye: DEFAULT_DIPOLE_DEBYE,
            n_refractive: DEFAULT_N_REFRACTIVE,
            sideband_energy_mev: DEFAULT_SIDEBAND_ENERGY_MEV,
            zpl_fraction: DEFAULT_ZPL_FRACTION,
            density_per_m3: DEFAULT_DENSITY_PER_M3,
            intensity_w_per_m2: None,
            cooling_power_w: None,
        }
    }
}

/// Inputs as they enter the formulas, each with its provenance flag.
#[derive(Debug, Clone, Serialize)]
pub struct FlaggedInputs {
    pub t_kelvin: FlaggedValue,
    pub e_opt_ev: FlaggedValue,
    pub cycle_rate_per_ps: FlaggedValue,
    pub n_levels: FlaggedValue,
    pub alpha_b_per_cm: FlaggedValue,
    pub rabi_rad_per_ps: FlaggedValue,
    pub dipole_debye: FlaggedValue,
    pub n_refractive: FlaggedValue,
    pub sideband_energy_mev: FlaggedValue,
    pub zpl_fraction: FlaggedValue,
    pub density_per_m3: FlaggedValue,
    pub intensity_w_per_m2: FlaggedValue,
    pub cooling_power_w: FlaggedValue,
}

impl BudgetInputs {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, f64); 8] = [
            ("t_kelvin", self.t_kelvin),
            ("e_opt_ev", self.e_opt_ev),
            ("cycle_rate_per_ps", self.cycle_rate_per_ps),
            ("rabi_rad_per_ps", self.rabi_rad_per_ps),
            ("dipole_debye", self.dipole_debye),
            ("n_refractive", self.n_refractive),
            ("sideband_energy_mev", self.sideband_energy_mev),
            ("density_per_m3", self.density_per_m3),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("budget inputs", format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.alpha_b_per_cm.is_finite() && self.alpha_b_per_cm >= 0.0) {
            return Err(Error::invalid("budget inputs", "alpha_b_per_cm must be >= 0"));
        }
        if self.n_levels < 1 {
            return Err(Error::invalid("budget inputs", "n_levels must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.zpl_fraction) {
            return Err(Error::invalid("budget inputs", "zpl_fraction must lie in [0, 1]"));
        }
        for (name, v) in [
            ("intensity_w_per_m2", self.intensity_w_per_m2),
            ("cooling_power_w", self.cooling_power_w),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid(
                        "budget inputs",
                        format!("{name} override must be > 0, got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Drive intensity: the override if given, else derived from the
    /// Rabi amplitude through the stand-in dipole and host index.
    pub fn intensity(&self) -> Result<f64> {
        match self.intensity_w_per_m2 {
            Some(i) => Ok(i),
            None => Ok(intensity_from_rabi(
                self.rabi_rad_per_ps,
                self.dipole_debye,
                self.n_refractive,
            )?
            .intensity_w_per_m2),
        }
    }

    /// Per-emitter cooling power: the override if given, else the
    /// idealized proxy of kT extracted once per cycle.
    pub fn cooling_power(&self) -> f64 {
        self.cooling_power_w
            .unwrap_or(units::KB_J_PER_K * self.t_kelvin * self.cycle_rate_per_ps * 1e12)
    }

    pub fn flagged(&self) -> Result<FlaggedInputs> {
        self.validate()?;
        Ok(FlaggedInputs {
            t_kelvin: anchored(self.t_kelvin, DEFAULT_T_KELVIN),
            e_opt_ev: anchored(self.e_opt_ev, DEFAULT_E_OPT_EV),
            cycle_rate_per_ps: anchored(self.cycle_rate_per_ps, DEFAULT_CYCLE_RATE_PER_PS),
            n_levels: anchored(self.n_levels as f64, DEFAULT_N_LEVELS as f64),
            alpha_b_per_cm: anchored(self.alpha_b_per_cm, DEFAULT_ALPHA_B_PER_CM),
            rabi_rad_per_ps: anchored(self.rabi_rad_per_ps, DEFAULT_RABI_RAD_PER_PS),
            dipole_debye: stand_in(self.dipole_debye),
            n_refractive: stand_in(self.n_refractive),
            sideband_energy_mev: stand_in(self.sideband_energy_mev),
            zpl_fraction: stand_in(self.zpl_fraction),
            density_per_m3: anchored(self.density_per_m3, DEFAULT_DENSITY_PER_M3),
            intensity_w_per_m2: stand_in(self.intensity()?),
            cooling_power_w: FlaggedValue {
                value: self.cooling_power(),
                paper_default: self.cooling_power_w.is_none(),
            },
        })
    }
}

/// Itemized net cooling balance, per emitter and per unit volume.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NetCoolingReport {
    pub gross_cooling_w: f64,
    /// (1 - qe) * cycle_rate * E_opt: heat from non-radiative decays.
    pub nonradiative_heating_w: f64,
    /// cycle_rate * (1 - beta) * E_sb: heat left by sideband emission.
    pub sideband_heating_w: f64,
    pub net_per_emitter_w: f64,
    /// alpha_b * I, W/m^3.
    pub background_heating_w_per_m3: f64,
    pub net_w_per_m3: f64,
}

pub fn net_cooling_report(inputs: &BudgetInputs, qe: f64) -> Result<NetCoolingReport> {
    inputs.validate()?;
    if !(0.0..=1.0).contains(&qe) {
        return Err(Error::invalid("quantum efficiency", "must lie in [0, 1]"));
    }
    let rate_per_s = inputs.cycle_rate_per_ps * 1e12;
    let gross = inputs.cooling_power();
    let nonradiative = (1.0 - qe) * rate_per_s * inputs.e_opt_ev * units::EV_J;
    let sideband =
        rate_per_s * (1.0 - inputs.zpl_fraction) * inputs.sideband_energy_mev * 1e-3 * units::EV_J;
    let net = gross - nonradiative - sideband;
    let background = inputs.alpha_b_per_cm * 100.0 * inputs.intensity()?;
    Ok(NetCoolingReport {
        gross_cooling_w: gross,
        nonradiative_heating_w: nonradiative,
        sideband_heating_w: sideband,
        net_per_emitter_w: net,
        background_heating_w_per_m3: background,
        net_w_per_m3: inputs.density_per_m3 * net - background,
    })
}
