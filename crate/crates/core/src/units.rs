//! Unit conventions shared by every module in this crate.
//!
//! Internally all energies and angular frequencies are in rad/ps with
//! hbar = 1, all times in ps, all rates in 1/ps. Temperatures stay in
//! kelvin and enter only through `k_B T / hbar`. Powers reported to the
//! outside world are in watts.

/// Planck constant over 2*pi, J*s (CODATA 2018).
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
pub const KB_J_PER_K: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s (exact).
pub const C_M_PER_S: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m.
pub const EPSILON0_F_PER_M: f64 = 8.854_187_812_8e-12;

/// Elementary charge, C (exact).
pub const E_CHARGE_C: f64 = 1.602_176_634e-19;

/// One electronvolt, J.
pub const EV_J: f64 = E_CHARGE_C;

/// One debye, C*m. Defined as 1e-21/c in SI.
pub const DEBYE_C_M: f64 = 1e-21 / C_M_PER_S;

/// k_B / hbar expressed in rad ps^-1 K^-1. Converts kelvin to an angular
/// frequency: omega_thermal = KB_OVER_HBAR * T.
pub const KB_OVER_HBAR: f64 = KB_J_PER_K / HBAR_J_S * 1e-12;

/// Converts an internal heat current Tr{H D[rho]} (rad/ps * 1/ps) to watts.
pub const RAD_PS2_TO_W: f64 = HBAR_J_S * 1e24;

/// Linear frequency in GHz to angular frequency in rad/ps.
pub fn ghz_to_rad_per_ps(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz * 1e-3
}

/// Angular frequency in rad/ps to linear frequency in GHz.
pub fn rad_per_ps_to_ghz(omega: f64) -> f64 {
    omega * 1e3 / (2.0 * std::f64::consts::PI)
}

/// Thermal angular frequency k_B T / hbar for a temperature in kelvin.
pub fn kelvin_to_rad_per_ps(t_k: f64) -> f64 {
    KB_OVER_HBAR * t_k
}

/// Photon energy in eV for an angular frequency in rad/ps.
pub fn rad_per_ps_to_ev(omega: f64) -> f64 {
    omega * 1e12 * HBAR_J_S / EV_J
}
