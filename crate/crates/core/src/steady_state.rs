//! Steady-state solution of the Lindblad generator and the heat
//! currents it carries.
//!
//! The steady state is found directly: one row of the vectorized
//! generator is replaced by the trace condition and the system is
//! LU-solved with a single iterative-refinement step. A singular-value
//! check rejects generators whose kernel is more than one-dimensional,
//! since then "the" steady state is an arbitrary mixture. Propagation
//! with the matrix exponential is kept as an independent cross-check.

use crate::error::{Error, Result};
use crate::linalg::{self, cr, unvectorize, vectorize, CMat, CVec};
use crate::liouvillian::{photon_emission_rate, GeneratorParts};
use crate::model::DensityMatrix;
use crate::units;

/// Acceptable |L rho| / |L|_F after the solve.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Singular values below this times the largest one count as kernel.
pub const KERNEL_TOL_REL: f64 = 1e-12;
/// Relative tolerance on the steady-state energy balance between baths.
pub const BALANCE_TOL_REL: f64 = 1e-8;
/// Absolute floor for the balance check, watts; covers undriven states
/// where both currents vanish.
pub const BALANCE_FLOOR_W: f64 = 1e-25;
/// Propagation time is this many inverse slowest relaxation rates.
pub const HORIZON_FACTOR: f64 = 20.0;
/// Longest propagation horizon attempted, ps.
pub const HORIZON_CAP_PS: f64 = 1e7;
/// Trace drift allowed across one propagation.
pub const PROP_TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// |L rho| / |L|_F of the returned state.
    pub residual: f64,
    /// Dimension of the numerical kernel of the generator, always 1 for
    /// a successfully returned state.
    pub kernel_dim: usize,
}

fn kernel_dimension(l: &CMat) -> usize {
    let svd = l.clone().svd(false, false);
    let max_sv = svd.singular_values.max();
    if max_sv == 0.0 {
        return l.nrows();
    }
    svd.singular_values.iter().filter(|&&s| s < KERNEL_TOL_REL * max_sv).count()
}

fn residual_of(l: &CMat, rho_vec: &CVec) -> f64 {
    (l * rho_vec).norm() / l.norm()
}

pub fn solve_steady_state(parts: &GeneratorParts) -> Result<SteadyState> {
    let n = parts.dim;
    let nn = n * n;
    let l = &parts.total;

    let kernel_dim = kernel_dimension(l);
    if kernel_dim != 1 {
        return Err(Error::DegenerateSteadyState { kernel_dim });
    }

    // The trace condition can replace any row; the first choice works
    // unless that row is essential to the rank, in which case the
    // residual stays large and the next candidate is tried.
    let mut best: Option<(CVec, f64)> = None;
    for &row in &[0usize, nn - 1, n + 1] {
        let mut a = l.clone();
        let mut b = CVec::zeros(nn);
        for col in 0..nn {
            a[(row, col)] = if col % (n + 1) == 0 { cr(1.0) } else { cr(0.0) };
        }
        b[row] = cr(1.0);

        let lu = a.clone().lu();
        let Some(mut x) = lu.solve(&b) else { continue };
        // One refinement step squeezes the residual toward roundoff.
        let r = &b - &a * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        let res = residual_of(l, &x);
        if best.as_ref().is_none_or(|(_, prev)| res < *prev) {
            best = Some((x, res));
        }
        if res < RESIDUAL_TOL {
            break;
        }
    }

    let Some((x, res)) = best else {
        return Err(Error::LinearSolve("steady-state system is singular".into()));
    };
    if res > RESIDUAL_TOL {
        return Err(Error::NotSteadyState { residual: res });
    }

    let raw = unvectorize(&x, n);
    let tr = linalg::trace(&raw);
    if tr.norm() < 0.5 {
        return Err(Error::LinearSolve(format!("steady-state trace collapsed to {}", tr)));
    }
    let rho = linalg::hermitize(&raw.map(|v| v / tr));
    let rho = DensityMatrix::new(rho)?;
    Ok(SteadyState { rho, residual: res, kernel_dim })
}

/// Slowest relaxation rate of the generator: the smallest |Re lambda|
/// over eigenvalues with strictly negative real part.
pub fn slowest_rate(parts: &GeneratorParts) -> f64 {
    let eigs = linalg::complex_eigenvalues_via_embedding(&parts.total);
    eigs.iter()
        .map(|e| -e.re)
        .filter(|&r| r > 1e-14)
        .fold(f64::INFINITY, f64::min)
}

/// Evolves a state for `t_ps` under the full generator.
pub fn propagate(parts: &GeneratorParts, rho0: &DensityMatrix, t_ps: f64) -> Result<DensityMatrix> {
    if !(t_ps.is_finite() && t_ps >= 0.0) {
        return Err(Error::invalid("propagation time", "must be finite and >= 0"));
    }
    let propagator = linalg::expm(&parts.total.map(|v| v * t_ps));
    let out = unvectorize(&(propagator * vectorize(rho0.matrix())), parts.dim);
    let tr = linalg::trace(&out);
    if (tr.re - 1.0).abs() > PROP_TRACE_TOL || tr.im.abs() > PROP_TRACE_TOL {
        return Err(Error::NonPhysicalState {
            reason: format!("propagation drifted trace to {} + {}i", tr.re, tr.im),
        });
    }
    let anti = (&out - out.adjoint()).norm() / 2.0;
    if anti > 1e-8 {
        return Err(Error::NonPhysicalState {
            reason: format!("propagation broke Hermiticity by {anti:.3e}"),
        });
    }
    DensityMatrix::new(linalg::hermitize(&out.map(|v| v / tr.re)))
}

/// Steady state by brute-force propagation from `rho0`, as an
/// independent check on the direct solver. Fails with a timeout error
/// when the needed horizon exceeds [`HORIZON_CAP_PS`].
pub fn steady_state_by_propagation(
    parts: &GeneratorParts,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    let rate = slowest_rate(parts);
    let horizon = HORIZON_FACTOR / rate;
    if !horizon.is_finite() || horizon > HORIZON_CAP_PS {
        return Err(Error::PropagationTimeout { horizon, cap: HORIZON_CAP_PS });
    }
    propagate(parts, rho0, horizon)
}

/// Steady-state heat currents and emission, referenced to the rotating
/// frame. `q_phonon_w` is positive when the emitter absorbs energy from
/// the lattice, i.e. when the lattice is being cooled.
#[derive(Debug, Clone, Copy)]
pub struct CoolingResult {
    /// Energy flow from the phonon bath into the emitter, W.
    pub q_phonon_w: f64,
    /// Energy flow from the rotating-frame radiation bath into the
    /// emitter, W; equal and opposite to `q_phonon_w` at steady state.
    pub q_radiative_rf_w: f64,
    /// Total photon scattering rate, 1/ps.
    pub photon_emission_rate_per_ps: f64,
    /// Optical power leaving the emitter in the lab frame, W: the laser
    /// photon flux plus the energy extracted from the lattice.
    pub lab_emitted_power_w: f64,
    pub residual: f64,
}

/// Heat current into the emitter from one dissipator, rad/ps^2.
fn bath_current(h_rf: &CMat, dissipator: &CMat, rho: &CMat, n: usize) -> f64 {
    let flow = unvectorize(&(dissipator * vectorize(rho)), n);
    linalg::expectation(h_rf, &flow).re
}

pub fn heat_currents(parts: &GeneratorParts, ss: &SteadyState) -> Result<CoolingResult> {
    let n = parts.dim;
    let rho = ss.rho.matrix();
    let q_ph = bath_current(&parts.h_rf.matrix, &parts.d_phonon, rho, n);
    let q_rad = bath_current(&parts.h_rf.matrix, &parts.d_radiative, rho, n);

    let imbalance = (q_ph + q_rad).abs() * units::RAD_PS2_TO_W;
    let scale = q_ph.abs().max(q_rad.abs()) * units::RAD_PS2_TO_W;
    if imbalance > BALANCE_TOL_REL * scale + BALANCE_FLOOR_W {
        return Err(Error::NotSteadyState { residual: ss.residual.max(imbalance) });
    }

    let rate = photon_emission_rate(&parts.radiative_jumps, rho);
    Ok(CoolingResult {
        q_phonon_w: q_ph * units::RAD_PS2_TO_W,
        q_radiative_rf_w: q_rad * units::RAD_PS2_TO_W,
        photon_emission_rate_per_ps: rate,
        lab_emitted_power_w: (parts.h_rf.laser_freq * rate + q_ph) * units::RAD_PS2_TO_W,
        residual: ss.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::assemble;
    use crate::model::{
        DipoleChannel, DriveConfig, EmitterModel, PhononBathConfig, Polarization, RabiAmplitudes,
    };
    use crate::units::ghz_to_rad_per_ps;

    fn two_level() -> EmitterModel {
        EmitterModel {
            level_energies: vec![0.0, 100.0],
            ground_levels: vec![0],
            excited_levels: vec![1],
            zpl_center: 100.0,
            dipole_channels: vec![DipoleChannel {
                ground: 0,
                excited: 1,
                polarization: Polarization::X,
                amplitude: 1.0,
            }],
            phonon_channels: vec![],
            radiative_rate: 1e-3,
        }
    }

    #[test]
    fn resonant_two_level_saturation() {
        let model = two_level();
        let drive = DriveConfig {
            detuning: 0.0,
            rabi: RabiAmplitudes { x: 0.2, y: 0.0, z: 0.0 },
        };
        let parts = assemble(&model, &drive, &PhononBathConfig::new(0.0)).unwrap();
        let ss = solve_steady_state(&parts).unwrap();
        // Optical Bloch result (Omega^2/4) / (Omega^2/2 + gamma^2/4).
        let expected = 0.01 / (0.02 + 2.5e-7);
        let got = ss.rho.population(1);
        assert!(
            (got - expected).abs() < 1e-6 * expected,
            "excited population {got} vs {expected}"
        );
        assert!(ss.residual < RESIDUAL_TOL);
    }

    #[test]
    fn undriven_ground_doublet_thermalizes() {
        let model = EmitterModel::siv_default();
        let bath = PhononBathConfig::new(4.0);
        let parts = assemble(&model, &DriveConfig::off(), &bath).unwrap();
        let ss = solve_steady_state(&parts).unwrap();
        let dg = ghz_to_rad_per_ps(48.0);
        let boltzmann = (-dg / units::kelvin_to_rad_per_ps(4.0)).exp();
        let ratio = ss.rho.population(1) / ss.rho.population(0);
        assert!((ratio - boltzmann).abs() < 1e-10, "ratio {ratio} vs {boltzmann}");
        assert!(ss.rho.population(2) < 1e-14);
        assert!(ss.rho.population(3) < 1e-14);
    }

    #[test]
    fn degenerate_kernel_is_rejected() {
        // No drive and no ground-manifold relaxation leaves every mixture
        // of the two ground states stationary.
        let mut model = EmitterModel::siv_default();
        model.phonon_channels.clear();
        let parts = assemble(&model, &DriveConfig::off(), &PhononBathConfig::new(4.0)).unwrap();
        match solve_steady_state(&parts) {
            Err(Error::DegenerateSteadyState { kernel_dim }) => assert!(kernel_dim >= 2),
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn propagation_agrees_with_direct_solve() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(ghz_to_rad_per_ps(-400.0), 0.2);
        let bath = PhononBathConfig::new(20.0);
        let parts = assemble(&model, &drive, &bath).unwrap();
        let ss = solve_steady_state(&parts).unwrap();
        let start = DensityMatrix::maximally_mixed(4);
        let propagated = steady_state_by_propagation(&parts, &start).unwrap();
        let dist = linalg::trace_distance(propagated.matrix(), ss.rho.matrix());
        assert!(dist < 1e-8, "trace distance {dist}");
    }

    #[test]
    fn heat_currents_balance_and_cool_when_red_detuned() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(ghz_to_rad_per_ps(-400.0), 0.2);
        let bath = PhononBathConfig::new(20.0);
        let parts = assemble(&model, &drive, &bath).unwrap();
        let ss = solve_steady_state(&parts).unwrap();
        let heat = heat_currents(&parts, &ss).unwrap();
        assert!(heat.q_phonon_w > 0.0, "expected lattice cooling, got {}", heat.q_phonon_w);
        let rel = (heat.q_phonon_w + heat.q_radiative_rf_w).abs() / heat.q_phonon_w.abs();
        assert!(rel < BALANCE_TOL_REL, "imbalance {rel}");
        assert!(heat.photon_emission_rate_per_ps > 0.0);
        assert!(heat.lab_emitted_power_w > 0.0);
    }

    #[test]
    fn undriven_state_carries_no_heat() {
        let model = EmitterModel::siv_default();
        let parts = assemble(&model, &DriveConfig::off(), &PhononBathConfig::new(10.0)).unwrap();
        let ss = solve_steady_state(&parts).unwrap();
        let heat = heat_currents(&parts, &ss).unwrap();
        assert!(heat.q_phonon_w.abs() < 1e-20);
        assert!(heat.photon_emission_rate_per_ps.abs() < 1e-16);
    }

    #[test]
    fn blue_detuned_strong_drive_heats() {
        // Stokes-side drive pumps energy into the lattice instead.
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(ghz_to_rad_per_ps(100.0), 0.2);
        let bath = PhononBathConfig::new(20.0);
        let parts = assemble(&model, &drive, &bath).unwrap();
        let ss = solve_steady_state(&parts).unwrap();
        let heat = heat_currents(&parts, &ss).unwrap();
        assert!(heat.q_phonon_w < 0.0, "expected heating, got {}", heat.q_phonon_w);
    }
}
