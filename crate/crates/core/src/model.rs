//! Emitter level structure, drive and bath parameters, and density
//! matrices.
//!
//! The emitter is a 2-4 level system split into a ground and an excited
//! manifold. Optical dipole channels connect the manifolds; phonon
//! channels act inside a manifold. Energies are angular frequencies in
//! rad/ps relative to a common reference, with the zero-phonon-line
//! center recorded separately so spectra can be reported relative to it.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::units;
use serde::{Deserialize, Serialize};

/// Temperatures below this are treated as exactly zero kelvin, which
/// keeps thermal occupations free of spurious exp overflow.
pub const TEMPERATURE_CLAMP_K: f64 = 1e-3;

/// Bose-Einstein occupation n(omega, T) = 1 / (exp(hbar omega / kT) - 1).
///
/// `omega` is in rad/ps, `t_k` in kelvin. Temperatures below
/// [`TEMPERATURE_CLAMP_K`] give exactly 0.
///
/// Panics if `omega <= 0` or `t_k < 0`.
pub fn bose_occupation(omega: f64, t_k: f64) -> f64 {
    assert!(omega > 0.0, "bose_occupation needs omega > 0, got {omega}");
    assert!(t_k >= 0.0, "bose_occupation needs T >= 0, got {t_k}");
    if t_k < TEMPERATURE_CLAMP_K {
        return 0.0;
    }
    let x = omega / units::kelvin_to_rad_per_ps(t_k);
    1.0 / x.exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    X,
    Y,
    Z,
}

impl Polarization {
    pub const ALL: [Polarization; 3] = [Polarization::X, Polarization::Y, Polarization::Z];

    pub fn label(self) -> &'static str {
        match self {
            Polarization::X => "x",
            Polarization::Y => "y",
            Polarization::Z => "z",
        }
    }
}

/// Optical transition between one ground and one excited level.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleChannel {
    pub ground: usize,
    pub excited: usize,
    pub polarization: Polarization,
    /// Dimensionless amplitude relative to the radiative rate; the channel
    /// decays at `radiative_rate * amplitude^2`.
    pub amplitude: f64,
}

/// Phonon-coupled pair of levels inside one manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononChannel {
    pub a: usize,
    pub b: usize,
    /// Dimensionless coupling entering the bath rates quadratically.
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmitterModel {
    /// Level energies in rad/ps; excited levels sit near `zpl_center`.
    pub level_energies: Vec<f64>,
    pub ground_levels: Vec<usize>,
    pub excited_levels: Vec<usize>,
    /// Center of the zero-phonon line, rad/ps, on the same energy axis.
    pub zpl_center: f64,
    pub dipole_channels: Vec<DipoleChannel>,
    pub phonon_channels: Vec<PhononChannel>,
    /// Radiative decay rate per unit dipole amplitude squared, 1/ps.
    pub radiative_rate: f64,
}

impl EmitterModel {
    pub fn n_levels(&self) -> usize {
        self.level_energies.len()
    }

    /// Default four-level emitter: 48 GHz ground splitting, 259 GHz
    /// excited splitting, 1/ns radiative rate, four unit-amplitude dipole
    /// channels polarized x, y, z, x in order of transition energy, and
    /// one phonon channel per manifold.
    pub fn siv_default() -> EmitterModel {
        let dg = units::ghz_to_rad_per_ps(48.0);
        let de = units::ghz_to_rad_per_ps(259.0);
        let zpl = units::ghz_to_rad_per_ps(406_700.0);
        EmitterModel {
            level_energies: vec![-dg / 2.0, dg / 2.0, zpl - de / 2.0, zpl + de / 2.0],
            ground_levels: vec![0, 1],
            excited_levels: vec![2, 3],
            zpl_center: zpl,
            dipole_channels: vec![
                DipoleChannel { ground: 1, excited: 2, polarization: Polarization::X, amplitude: 1.0 },
                DipoleChannel { ground: 0, excited: 2, polarization: Polarization::Y, amplitude: 1.0 },
                DipoleChannel { ground: 1, excited: 3, polarization: Polarization::Z, amplitude: 1.0 },
                DipoleChannel { ground: 0, excited: 3, polarization: Polarization::X, amplitude: 1.0 },
            ],
            phonon_channels: vec![
                PhononChannel { a: 0, b: 1, coupling: 1.0 },
                PhononChannel { a: 2, b: 3, coupling: 1.0 },
            ],
            radiative_rate: 1e-3,
        }
    }

    /// Three-level variant of [`siv_default`](Self::siv_default) with the
    /// ground doublet merged into a single state.
    pub fn siv_three_level() -> EmitterModel {
        Self::siv_default()
            .merge_ground_states()
            .expect("default model merges cleanly")
    }

    pub fn is_ground(&self, level: usize) -> bool {
        self.ground_levels.contains(&level)
    }

    /// Bare transition frequency of a dipole channel, rad/ps.
    pub fn transition_frequency(&self, ch: &DipoleChannel) -> f64 {
        self.level_energies[ch.excited] - self.level_energies[ch.ground]
    }

    /// Optical line positions relative to the zero-phonon-line center, GHz.
    pub fn pl_lines_ghz_rel_zpl(&self) -> Vec<f64> {
        self.dipole_channels
            .iter()
            .map(|ch| units::rad_per_ps_to_ghz(self.transition_frequency(ch) - self.zpl_center))
            .collect()
    }

    /// Checks every structural invariant and reports all violations at
    /// once rather than stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_levels();
        let mut bad = Vec::new();

        if !(2..=4).contains(&n) {
            bad.push(format!("level count must be 2..=4, got {n}"));
        }
        for (i, e) in self.level_energies.iter().enumerate() {
            if !e.is_finite() {
                bad.push(format!("energy of level {i} is not finite"));
            }
        }
        if !self.zpl_center.is_finite() {
            bad.push("zpl_center is not finite".to_string());
        }
        if !(self.radiative_rate.is_finite() && self.radiative_rate >= 0.0) {
            bad.push(format!(
                "radiative_rate must be finite and >= 0, got {}",
                self.radiative_rate
            ));
        }

        let mut seen = vec![0usize; n];
        for &g in &self.ground_levels {
            if g >= n {
                bad.push(format!("ground level index {g} out of range"));
            } else {
                seen[g] += 1;
            }
        }
        for &e in &self.excited_levels {
            if e >= n {
                bad.push(format!("excited level index {e} out of range"));
            } else {
                seen[e] += 1;
            }
        }
        for (i, &count) in seen.iter().enumerate() {
            if count != 1 {
                bad.push(format!(
                    "level {i} must belong to exactly one manifold, found it {count} times"
                ));
            }
        }
        if self.ground_levels.is_empty() {
            bad.push("ground manifold is empty".to_string());
        }
        if self.excited_levels.is_empty() {
            bad.push("excited manifold is empty".to_string());
        }

        for (k, ch) in self.dipole_channels.iter().enumerate() {
            if ch.ground >= n || ch.excited >= n {
                bad.push(format!("dipole channel {k} references a missing level"));
                continue;
            }
            if !self.is_ground(ch.ground) {
                bad.push(format!(
                    "dipole channel {k} ({} -> {}): lower index {} is not a ground level",
                    ch.ground, ch.excited, ch.ground
                ));
            }
            if self.is_ground(ch.excited) {
                bad.push(format!(
                    "dipole channel {k} ({} -> {}): upper index {} is not an excited level",
                    ch.ground, ch.excited, ch.excited
                ));
            }
            if !(ch.amplitude.is_finite() && ch.amplitude >= 0.0) {
                bad.push(format!(
                    "dipole channel {k}: amplitude must be finite and >= 0, got {}",
                    ch.amplitude
                ));
            }
        }

        for (k, ch) in self.phonon_channels.iter().enumerate() {
            if ch.a >= n || ch.b >= n {
                bad.push(format!("phonon channel {k} references a missing level"));
                continue;
            }
            if ch.a == ch.b {
                bad.push(format!("phonon channel {k} couples level {} to itself", ch.a));
            }
            if self.is_ground(ch.a) != self.is_ground(ch.b) {
                bad.push(format!(
                    "phonon channel {k} ({} <-> {}) crosses manifolds; phonon channels are intra-manifold",
                    ch.a, ch.b
                ));
            }
            if !(ch.coupling.is_finite() && ch.coupling >= 0.0) {
                bad.push(format!(
                    "phonon channel {k}: coupling must be finite and >= 0, got {}",
                    ch.coupling
                ));
            }
        }

        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel { violations: bad })
        }
    }

    /// Collapses a two-level ground manifold into a single state at the
    /// doublet's mean energy. The excited splitting is untouched. Each
    /// excited level keeps exactly one dipole channel to the merged
    /// ground state, inheriting the amplitude and polarization of its
    /// largest-amplitude former channel (first wins on ties). Ground
    /// phonon channels disappear; excited ones are preserved.
    pub fn merge_ground_states(&self) -> Result<EmitterModel> {
        self.validate()?;
        if self.ground_levels.len() != 2 || self.excited_levels.len() != 2 {
            return Err(Error::invalid(
                "model structure",
                format!(
                    "merge_ground_states needs 2 ground and 2 excited levels, got {} and {}",
                    self.ground_levels.len(),
                    self.excited_levels.len()
                ),
            ));
        }

        let ground_mean = self.ground_levels.iter().map(|&g| self.level_energies[g]).sum::<f64>() / 2.0;
        let mut excited_sorted = self.excited_levels.clone();
        excited_sorted.sort_by(|&a, &b| {
            self.level_energies[a].partial_cmp(&self.level_energies[b]).unwrap()
        });

        let mut energies = vec![ground_mean];
        let mut dipoles = Vec::new();
        let mut phonons = Vec::new();
        for (new_idx, &e_old) in excited_sorted.iter().enumerate() {
            energies.push(self.level_energies[e_old]);
            let strongest = self
                .dipole_channels
                .iter()
                .filter(|ch| ch.excited == e_old)
                .fold(None::<&DipoleChannel>, |best, ch| match best {
                    Some(b) if b.amplitude >= ch.amplitude => Some(b),
                    _ => Some(ch),
                })
                .cloned();
            if let Some(ch) = strongest {
                dipoles.push(DipoleChannel {
                    ground: 0,
                    excited: new_idx + 1,
                    polarization: ch.polarization,
                    amplitude: ch.amplitude,
                });
            }
        }
        for ch in &self.phonon_channels {
            if !self.is_ground(ch.a) && !self.is_ground(ch.b) {
                let map = |old: usize| excited_sorted.iter().position(|&e| e == old).unwrap() + 1;
                phonons.push(PhononChannel { a: map(ch.a), b: map(ch.b), coupling: ch.coupling });
            }
        }

        let merged = EmitterModel {
            level_energies: energies,
            ground_levels: vec![0],
            excited_levels: vec![1, 2],
            zpl_center: self.zpl_center,
            dipole_channels: dipoles,
            phonon_channels: phonons,
            radiative_rate: self.radiative_rate,
        };
        merged.validate()?;
        Ok(merged)
    }
}

/// Rabi amplitude (full splitting at resonance, rad/ps) per drive
/// polarization. The Hamiltonian off-diagonal element is half of this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiAmplitudes {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl RabiAmplitudes {
    pub fn uniform(omega: f64) -> Self {
        RabiAmplitudes { x: omega, y: omega, z: omega }
    }

    pub fn get(&self, p: Polarization) -> f64 {
        match p {
            Polarization::X => self.x,
            Polarization::Y => self.y,
            Polarization::Z => self.z,
        }
    }
}

/// Single-frequency coherent drive in the rotating-wave approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Laser detuning from the zero-phonon-line center, rad/ps.
    pub detuning: f64,
    pub rabi: RabiAmplitudes,
}

impl DriveConfig {
    pub fn off() -> Self {
        DriveConfig { detuning: 0.0, rabi: RabiAmplitudes::uniform(0.0) }
    }

    pub fn uniform(detuning: f64, omega: f64) -> Self {
        DriveConfig { detuning, rabi: RabiAmplitudes::uniform(omega) }
    }

    /// Absolute laser frequency on the model's energy axis, rad/ps.
    pub fn laser_freq(&self, model: &EmitterModel) -> f64 {
        model.zpl_center + self.detuning
    }

    pub fn is_driven(&self) -> bool {
        self.rabi.x > 0.0 || self.rabi.y > 0.0 || self.rabi.z > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.detuning.is_finite() {
            return Err(Error::invalid("drive", "detuning must be finite"));
        }
        for p in Polarization::ALL {
            let v = self.rabi.get(p);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    "drive",
                    format!("Rabi amplitude for {} must be finite and >= 0, got {v}", p.label()),
                ));
            }
        }
        Ok(())
    }
}

/// Ohmic-like phonon bath: rates scale as
/// `coupling * (omega / reference_freq)^spectral_exponent` times the
/// thermal occupation factor of the gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononBathConfig {
    pub temperature_k: f64,
    /// Overall coupling rate gamma_ph at omega = reference_freq, 1/ps.
    pub coupling: f64,
    pub spectral_exponent: f64,
    /// Reference angular frequency omega_ref, rad/ps.
    pub reference_freq: f64,
}

impl PhononBathConfig {
    /// Default bath at the given temperature: gamma_ph = 1e-2 /ps, cubic
    /// spectral density, 1 rad/ps reference frequency.
    pub fn new(temperature_k: f64) -> Self {
        PhononBathConfig {
            temperature_k,
            coupling: 1e-2,
            spectral_exponent: 3.0,
            reference_freq: 1.0,
        }
    }

    pub fn with_temperature(&self, t_k: f64) -> Self {
        PhononBathConfig { temperature_k: t_k, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature_k.is_finite() && self.temperature_k >= 0.0) {
            return Err(Error::invalid("phonon bath", "temperature must be finite and >= 0 K"));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::invalid("phonon bath", "coupling must be finite and >= 0"));
        }
        if !self.spectral_exponent.is_finite() {
            return Err(Error::invalid("phonon bath", "spectral exponent must be finite"));
        }
        if !(self.reference_freq.is_finite() && self.reference_freq > 0.0) {
            return Err(Error::invalid("phonon bath", "reference frequency must be > 0"));
        }
        Ok(())
    }
}

/// Physical density matrix: Hermitian, unit trace, eigenvalues bounded
/// below by the numerical floor. Violations are rejected at construction
/// rather than silently projected away.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

/// Hermiticity tolerance for density matrices (absolute, on the norm of
/// the anti-Hermitian part relative to the matrix norm).
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor: eigenvalues may be negative only down to this.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NonPhysicalState { reason: "matrix is not square".into() });
        }
        let scale = mat.norm().max(1.0);
        let anti = (&mat - mat.adjoint()).norm() / 2.0;
        if anti > HERMITICITY_TOL * scale {
            return Err(Error::NonPhysicalState {
                reason: format!("not Hermitian: anti-Hermitian part {anti:.3e}"),
            });
        }
        let tr = linalg::trace(&mat);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NonPhysicalState {
                reason: format!("trace is {} + {}i, expected 1", tr.re, tr.im),
            });
        }
        let eig = linalg::hermitize(&mat).symmetric_eigen();
        if let Some(lam) = eig.eigenvalues.iter().find(|&&x| x < EIGENVALUE_FLOOR) {
            return Err(Error::NonPhysicalState {
                reason: format!("eigenvalue {lam:.3e} below the {EIGENVALUE_FLOOR:.0e} floor"),
            });
        }
        Ok(DensityMatrix { mat })
    }

    /// Pure state |level><level|.
    pub fn pure(level: usize, n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        m[(level, level)] = linalg::cr(1.0);
        DensityMatrix { mat: m }
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { mat: CMat::identity(n, n).map(|x| x / linalg::cr(n as f64)) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn population(&self, level: usize) -> f64 {
        self.mat[(level, level)].re
    }

    pub fn expectation(&self, op: &CMat) -> num_complex::Complex64 {
        linalg::expectation(op, &self.mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units;

    #[test]
    fn bose_zero_temperature_is_zero() {
        assert_eq!(bose_occupation(1.0, 0.0), 0.0);
        // The sub-millikelvin clamp.
        assert_eq!(bose_occupation(1e-6, 0.9e-3), 0.0);
    }

    #[test]
    fn bose_at_thermal_frequency() {
        // hbar omega = k T  =>  n = 1/(e - 1).
        let omega = units::kelvin_to_rad_per_ps(1.0);
        let n = bose_occupation(omega, 1.0);
        let expected = 1.0 / (std::f64::consts::E - 1.0);
        assert!((n - expected).abs() < 1e-14);
        assert!((n - 0.581_977).abs() < 1e-5);
    }

    #[test]
    fn bose_400_ghz_at_20_k() {
        let n = bose_occupation(units::ghz_to_rad_per_ps(400.0), 20.0);
        // Independent evaluation of the same closed form.
        let x = 2.0 * std::f64::consts::PI * 400.0e9 * units::HBAR_J_S
            / (units::KB_J_PER_K * 20.0);
        let expected = 1.0 / (x.exp() - 1.0);
        assert!((n - expected).abs() / expected < 1e-10);
        assert!((n - 0.6206).abs() < 2e-4);
    }

    #[test]
    fn bose_monotonicity() {
        // Decreasing in omega at fixed T, increasing in T at fixed omega.
        let mut prev = f64::INFINITY;
        for k in 1..=60 {
            let n = bose_occupation(0.05 * k as f64, 10.0);
            assert!(n < prev);
            prev = n;
        }
        let mut prev = 0.0;
        for k in 1..=60 {
            let n = bose_occupation(1.0, 2.0 * k as f64);
            assert!(n > prev);
            prev = n;
        }
    }

    #[test]
    fn bose_detailed_balance_identity() {
        for (omega, t) in [(0.1, 4.0), (1.627, 20.0), (3.3, 77.0), (0.01, 1.0)] {
            let n = bose_occupation(omega, t);
            let lhs = n / (n + 1.0);
            let rhs = (-omega / units::kelvin_to_rad_per_ps(t)).exp();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }

    #[test]
    #[should_panic(expected = "omega > 0")]
    fn bose_rejects_nonpositive_frequency() {
        bose_occupation(0.0, 10.0);
    }

    #[test]
    fn default_model_validates_with_four_channels() {
        let m = EmitterModel::siv_default();
        m.validate().unwrap();
        assert_eq!(m.n_levels(), 4);
        assert_eq!(m.dipole_channels.len(), 4);
        // Line positions straddle the zero-phonon line symmetrically.
        let mut lines = m.pl_lines_ghz_rel_zpl();
        lines.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-153.5, -105.5, 105.5, 153.5];
        for (got, want) in lines.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "line {got} vs {want}");
        }
    }

    #[test]
    fn validation_reports_every_violation() {
        let mut m = EmitterModel::siv_default();
        m.dipole_channels[0] = DipoleChannel {
            ground: 0,
            excited: 1, // ground level used as the upper state
            polarization: Polarization::X,
            amplitude: 1.0,
        };
        m.radiative_rate = -1.0;
        m.phonon_channels.push(PhononChannel { a: 0, b: 2, coupling: 1.0 });
        let err = m.validate().unwrap_err();
        let text = err.to_string();
        assert!(text.contains("not an excited level"), "{text}");
        assert!(text.contains("radiative_rate"), "{text}");
        assert!(text.contains("crosses manifolds"), "{text}");
    }

    #[test]
    fn merge_preserves_excited_splitting_and_amplitudes() {
        let four = EmitterModel::siv_default();
        let three = four.merge_ground_states().unwrap();
        three.validate().unwrap();
        assert_eq!(three.n_levels(), 3);
        assert_eq!(three.ground_levels, vec![0]);
        let de_four = four.level_energies[3] - four.level_energies[2];
        let de_three = three.level_energies[2] - three.level_energies[1];
        assert!((de_four - de_three).abs() < 1e-15);
        assert_eq!(three.dipole_channels.len(), 2);
        for ch in &three.dipole_channels {
            assert_eq!(ch.ground, 0);
            assert!((ch.amplitude - 1.0).abs() < 1e-15);
        }
        // All four default amplitudes tie, so each excited level keeps
        // its first listed channel: (1,2,X) and (1,3,Z).
        assert_eq!(three.dipole_channels[0].polarization, Polarization::X);
        assert_eq!(three.dipole_channels[1].polarization, Polarization::Z);
        // A strictly stronger later channel must win over an earlier one.
        let mut boosted = four.clone();
        boosted.dipole_channels[1].amplitude = 1.5;
        let merged = boosted.merge_ground_states().unwrap();
        assert_eq!(merged.dipole_channels[0].polarization, Polarization::Y);
        assert!((merged.dipole_channels[0].amplitude - 1.5).abs() < 1e-15);
        // Only the excited-manifold phonon channel survives.
        assert_eq!(three.phonon_channels.len(), 1);
        assert_eq!((three.phonon_channels[0].a, three.phonon_channels[0].b), (1, 2));
        assert_eq!(three.zpl_center, four.zpl_center);
    }

    #[test]
    fn merge_twice_is_a_structure_error() {
        let three = EmitterModel::siv_three_level();
        assert!(three.merge_ground_states().is_err());
    }

    #[test]
    fn density_matrix_checks() {
        let n = 3;
        DensityMatrix::pure(0, n);
        let ok = DensityMatrix::new(CMat::identity(n, n).map(|x| x / linalg::cr(n as f64)));
        assert!(ok.is_ok());

        let mut bad_trace = CMat::zeros(n, n);
        bad_trace[(0, 0)] = linalg::cr(0.5);
        assert!(DensityMatrix::new(bad_trace).is_err());

        let mut negative = CMat::zeros(n, n);
        negative[(0, 0)] = linalg::cr(1.5);
        negative[(1, 1)] = linalg::cr(-0.5);
        assert!(DensityMatrix::new(negative).is_err());

        let mut non_hermitian = CMat::zeros(n, n);
        non_hermitian[(0, 0)] = linalg::cr(1.0);
        non_hermitian[(0, 1)] = linalg::c(0.1, 0.0);
        assert!(DensityMatrix::new(non_hermitian).is_err());
    }
}
