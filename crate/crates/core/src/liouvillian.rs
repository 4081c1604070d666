//! Rotating-frame Hamiltonian, dressed basis, and Lindblad generator.
//!
//! The generator has three parts: the coherent commutator, radiative
//! decay into the zero-temperature optical field, and phonon exchange
//! with a thermal bath. Radiative decay keeps one jump operator per
//! dipole channel. Phonon channels are decomposed in the dressed basis
//! of the rotating-frame Hamiltonian: each distinct dressed gap gets a
//! lowering operator with a downward rate proportional to n(omega) + 1
//! and an upward rate proportional to n(omega), which makes the phonon
//! part thermalize toward the dressed-state Gibbs ensemble.

use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat};
use crate::model::{
    bose_occupation, DriveConfig, EmitterModel, PhononBathConfig, Polarization,
};

/// Dressed gaps closer than this (rad/ps) share one jump operator.
pub const GAP_DEGENERACY_TOL: f64 = 1e-6;
/// Gaps at or below this (rad/ps) carry no phonon jump; the spectral
/// density vanishes there anyway for positive spectral exponents.
pub const MIN_PHONON_GAP: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RotatingFrameHamiltonian {
    pub matrix: CMat,
    /// Absolute laser frequency used for the frame, rad/ps.
    pub laser_freq: f64,
    pub detuning: f64,
}

/// Rotating-frame Hamiltonian: ground energies unchanged, excited
/// energies shifted down by the laser frequency, and half the Rabi
/// amplitude on each driven dipole channel.
pub fn build_h_rf(model: &EmitterModel, drive: &DriveConfig) -> RotatingFrameHamiltonian {
    let n = model.n_levels();
    let omega_l = drive.laser_freq(model);
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        let e = model.level_energies[i];
        h[(i, i)] = cr(if model.is_ground(i) { e } else { e - omega_l });
    }
    for ch in &model.dipole_channels {
        let half = drive.rabi.get(ch.polarization) * ch.amplitude / 2.0;
        h[(ch.ground, ch.excited)] += cr(half);
        h[(ch.excited, ch.ground)] += cr(half);
    }
    RotatingFrameHamiltonian { matrix: h, laser_freq: omega_l, detuning: drive.detuning }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedGap {
    pub lower: usize,
    pub upper: usize,
    /// energies[upper] - energies[lower], always >= 0.
    pub omega: f64,
}

/// Eigenbasis of the rotating-frame Hamiltonian, energies ascending.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    pub energies: Vec<f64>,
    /// Columns are dressed states expressed in the bare basis.
    pub vectors: CMat,
}

impl DressedBasis {
    pub fn new(h_rf: &RotatingFrameHamiltonian) -> Self {
        let (energies, vectors) = linalg::hermitian_eigen_ascending(&h_rf.matrix);
        DressedBasis { energies, vectors }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// All pairwise gaps, lower index first.
    pub fn gaps(&self) -> Vec<DressedGap> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in (a + 1)..n {
                out.push(DressedGap { lower: a, upper: b, omega: self.energies[b] - self.energies[a] });
            }
        }
        out
    }

    /// V^dag op V: bare-basis operator in the dressed basis.
    pub fn to_dressed(&self, op: &CMat) -> CMat {
        self.vectors.adjoint() * op * &self.vectors
    }

    /// V op V^dag: dressed-basis operator back in the bare basis.
    pub fn to_bare(&self, op: &CMat) -> CMat {
        &self.vectors * op * self.vectors.adjoint()
    }
}

/// One thermal jump pair acting at a single dressed gap.
#[derive(Debug, Clone)]
pub struct PhononJump {
    /// Index into the model's phonon channel list.
    pub channel: usize,
    /// Gap frequency the pair exchanges with the bath, rad/ps.
    pub omega: f64,
    pub rate_down: f64,
    pub rate_up: f64,
    /// Lowering operator in the bare basis; raising is its adjoint.
    pub down_op: CMat,
}

/// One radiative decay channel with its dressed-basis emission lines.
#[derive(Debug, Clone)]
pub struct RadiativeJump {
    /// Index into the model's dipole channel list.
    pub channel: usize,
    /// Total decay rate of the channel, 1/ps.
    pub rate: f64,
    pub polarization: Polarization,
    /// |g><e| in the bare basis (amplitude folded into `rate`).
    pub op: CMat,
    /// Emission lines (frequency relative to laser in rad/ps, rate
    /// weight in 1/ps) from the dressed decomposition of `op`. Weights
    /// sum to `rate`.
    pub components: Vec<(f64, f64)>,
}

/// Radiative part: one Lindblad dissipator per dipole channel, rate
/// `radiative_rate * amplitude^2`. Exact for a flat zero-temperature
/// optical bath, so no secular decomposition is applied; the dressed
/// decomposition is still recorded per channel to predict line positions.
pub fn radiative_dissipator(
    model: &EmitterModel,
    basis: &DressedBasis,
) -> (CMat, Vec<RadiativeJump>) {
    let n = model.n_levels();
    let mut d = CMat::zeros(n * n, n * n);
    let mut jumps = Vec::with_capacity(model.dipole_channels.len());
    for (k, ch) in model.dipole_channels.iter().enumerate() {
        let rate = model.radiative_rate * ch.amplitude * ch.amplitude;
        if rate == 0.0 {
            continue;
        }
        let mut op = CMat::zeros(n, n);
        op[(ch.ground, ch.excited)] = cr(1.0);
        d += linalg::dissipator_superop(&op).map(|x| x * rate);

        let dressed = basis.to_dressed(&op);
        let mut components = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let w = dressed[(a, b)].norm_sqr() * rate;
                if w > 1e-30 {
                    components.push((basis.energies[b] - basis.energies[a], w));
                }
            }
        }
        jumps.push(RadiativeJump { channel: k, rate, polarization: ch.polarization, op, components });
    }
    (d, jumps)
}

/// Phonon part: each channel operator is expanded over dressed gaps,
/// gaps within [`GAP_DEGENERACY_TOL`] are merged into one jump, and each
/// jump gets downward rate `coupling_rate * (omega/omega_ref)^s * (n+1)`
/// and upward rate with `n` instead of `n+1`.
pub fn phonon_dissipator(
    model: &EmitterModel,
    bath: &PhononBathConfig,
    basis: &DressedBasis,
) -> (CMat, Vec<PhononJump>) {
    let n = model.n_levels();
    let mut d = CMat::zeros(n * n, n * n);
    let mut jumps = Vec::new();
    if bath.coupling == 0.0 {
        return (d, jumps);
    }
    for (k, ch) in model.phonon_channels.iter().enumerate() {
        let mut a_op = CMat::zeros(n, n);
        a_op[(ch.a, ch.b)] = cr(ch.coupling);
        a_op[(ch.b, ch.a)] = cr(ch.coupling);
        let dressed = basis.to_dressed(&a_op);

        // Pairs (lower, upper) sorted by gap, then greedily clustered.
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let omega = basis.energies[b] - basis.energies[a];
                if omega > MIN_PHONON_GAP && dressed[(a, b)].norm() > 0.0 {
                    pairs.push((a, b, omega));
                }
            }
        }
        pairs.sort_by(|x, y| x.2.partial_cmp(&y.2).unwrap());

        let mut i = 0;
        while i < pairs.len() {
            let mut j = i + 1;
            while j < pairs.len() && pairs[j].2 - pairs[i].2 <= GAP_DEGENERACY_TOL {
                j += 1;
            }
            let cluster = &pairs[i..j];
            let omega = cluster.iter().map(|p| p.2).sum::<f64>() / cluster.len() as f64;
            let mut down_dressed = CMat::zeros(n, n);
            for &(a, b, _) in cluster {
                down_dressed[(a, b)] = dressed[(a, b)];
            }
            let down = basis.to_bare(&down_dressed);
            let spectral = bath.coupling * (omega / bath.reference_freq).powf(bath.spectral_exponent);
            let n_th = bose_occupation(omega, bath.temperature_k);
            let rate_down = spectral * (n_th + 1.0);
            let rate_up = spectral * n_th;
            d += linalg::dissipator_superop(&down).map(|x| x * rate_down);
            if rate_up > 0.0 {
                d += linalg::dissipator_superop(&down.adjoint()).map(|x| x * rate_up);
            }
            jumps.push(PhononJump { channel: k, omega, rate_down, rate_up, down_op: down });
            i = j;
        }
    }
    (d, jumps)
}

/// Assembled Lindblad generator with its pieces kept separately so heat
/// currents can be attributed to individual baths.
#[derive(Debug, Clone)]
pub struct GeneratorParts {
    pub dim: usize,
    pub h_rf: RotatingFrameHamiltonian,
    pub basis: DressedBasis,
    pub l_hamiltonian: CMat,
    pub d_radiative: CMat,
    pub d_phonon: CMat,
    /// Always `(l_hamiltonian + d_radiative) + d_phonon`, in that order,
    /// so rebuilding from the parts reproduces it bit for bit.
    pub total: CMat,
    pub radiative_jumps: Vec<RadiativeJump>,
    pub phonon_jumps: Vec<PhononJump>,
}

pub fn assemble(
    model: &EmitterModel,
    drive: &DriveConfig,
    bath: &PhononBathConfig,
) -> Result<GeneratorParts> {
    model.validate()?;
    drive.validate()?;
    bath.validate()?;
    if model.n_levels() > 4 {
        return Err(Error::invalid("model", "more than 4 levels is unsupported"));
    }

    let h_rf = build_h_rf(model, drive);
    let basis = DressedBasis::new(&h_rf);
    let l_hamiltonian = linalg::commutator_superop(&h_rf.matrix);
    let (d_radiative, radiative_jumps) = radiative_dissipator(model, &basis);
    let (d_phonon, phonon_jumps) = phonon_dissipator(model, bath, &basis);
    let total = (&l_hamiltonian + &d_radiative) + &d_phonon;
    Ok(GeneratorParts {
        dim: model.n_levels(),
        h_rf,
        basis,
        l_hamiltonian,
        d_radiative,
        d_phonon,
        total,
        radiative_jumps,
        phonon_jumps,
    })
}

/// Total photon emission rate out of a state, summed over channels, 1/ps.
pub fn photon_emission_rate(jumps: &[RadiativeJump], rho: &CMat) -> f64 {
    jumps
        .iter()
        .map(|j| {
            let number_op = j.op.adjoint() * &j.op;
            j.rate * linalg::expectation(&number_op, rho).re
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, vectorize, CVec};
    use crate::model::RabiAmplitudes;
    use crate::units;

    fn two_level(zpl: f64) -> EmitterModel {
        let m = EmitterModel {
            level_energies: vec![0.0, zpl],
            ground_levels: vec![0],
            excited_levels: vec![1],
            zpl_center: zpl,
            dipole_channels: vec![crate::model::DipoleChannel {
                ground: 0,
                excited: 1,
                polarization: Polarization::X,
                amplitude: 1.0,
            }],
            phonon_channels: vec![],
            radiative_rate: 1e-3,
        };
        m.validate().unwrap();
        m
    }

    #[test]
    fn rotating_frame_diagonal_for_red_detuned_drive() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(-400.0), 0.2);
        let h = build_h_rf(&model, &drive);
        let expected = [-0.150_796, 0.150_796, 1.699_601, 3.326_947];
        for (i, want) in expected.iter().enumerate() {
            assert!(
                (h.matrix[(i, i)].re - want).abs() < 1e-5,
                "diag {i}: {} vs {want}",
                h.matrix[(i, i)].re
            );
        }
        // Every channel is driven with the same amplitude, so each dipole
        // pair carries half the Rabi amplitude.
        for ch in &model.dipole_channels {
            assert!((h.matrix[(ch.ground, ch.excited)].re - 0.1).abs() < 1e-15);
        }
        assert!((h.laser_freq - (model.zpl_center + drive.detuning)).abs() < 1e-12);
    }

    #[test]
    fn resonant_two_level_dresses_at_full_rabi() {
        let model = two_level(100.0);
        let drive = DriveConfig {
            detuning: 0.0,
            rabi: RabiAmplitudes { x: 0.2, y: 0.0, z: 0.0 },
        };
        let basis = DressedBasis::new(&build_h_rf(&model, &drive));
        assert!((basis.energies[0] + 0.1).abs() < 1e-14);
        assert!((basis.energies[1] - 0.1).abs() < 1e-14);
        let gaps = basis.gaps();
        assert_eq!(gaps.len(), 1);
        assert!((gaps[0].omega - 0.2).abs() < 1e-14);
    }

    #[test]
    fn detuned_two_level_gap_is_generalized_rabi() {
        let model = two_level(100.0);
        let delta = -0.45;
        let omega = 0.3;
        let drive = DriveConfig {
            detuning: delta,
            rabi: RabiAmplitudes { x: omega, y: 0.0, z: 0.0 },
        };
        let basis = DressedBasis::new(&build_h_rf(&model, &drive));
        let gap = basis.energies[1] - basis.energies[0];
        assert!((gap - (delta * delta + omega * omega).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn undriven_phonon_jumps_are_bare_ladder_operators() {
        let model = EmitterModel::siv_default();
        let bath = PhononBathConfig::new(4.0);
        let parts = assemble(&model, &DriveConfig::off(), &bath).unwrap();
        assert_eq!(parts.phonon_jumps.len(), 2);

        let dg = units::ghz_to_rad_per_ps(48.0);
        let de = units::ghz_to_rad_per_ps(259.0);
        let ground = &parts.phonon_jumps[0];
        assert!((ground.omega - dg).abs() < 1e-9);
        // Off-diagonal |0><1| up to the eigenvector phase convention.
        assert!((ground.down_op[(0, 1)].norm() - 1.0).abs() < 1e-10);
        assert!(ground.down_op.norm() < 1.0 + 1e-10);
        let spectral = bath.coupling * dg.powi(3);
        let n_th = bose_occupation(dg, 4.0);
        assert!((ground.rate_down - spectral * (n_th + 1.0)).abs() < 1e-12);
        assert!((ground.rate_up - spectral * n_th).abs() < 1e-12);

        let excited = &parts.phonon_jumps[1];
        assert!((excited.omega - de).abs() < 1e-9);
        assert!((excited.down_op[(2, 3)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phonon_rates_obey_detailed_balance() {
        let model = EmitterModel::siv_default();
        let bath = PhononBathConfig::new(20.0);
        let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(-400.0), 0.2);
        let parts = assemble(&model, &drive, &bath).unwrap();
        assert!(!parts.phonon_jumps.is_empty());
        for j in &parts.phonon_jumps {
            let boltzmann = (-j.omega / units::kelvin_to_rad_per_ps(20.0)).exp();
            assert!(
                (j.rate_up / j.rate_down - boltzmann).abs() < 1e-12,
                "gap {}: ratio {} vs {}",
                j.omega,
                j.rate_up / j.rate_down,
                boltzmann
            );
        }
    }

    #[test]
    fn zero_temperature_bath_has_no_upward_jumps() {
        let model = EmitterModel::siv_default();
        let parts = assemble(
            &model,
            &DriveConfig::uniform(units::ghz_to_rad_per_ps(-400.0), 0.2),
            &PhononBathConfig::new(0.0),
        )
        .unwrap();
        for j in &parts.phonon_jumps {
            assert_eq!(j.rate_up, 0.0);
        }
    }

    #[test]
    fn generator_preserves_trace() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(-400.0), 0.2);
        let parts = assemble(&model, &drive, &PhononBathConfig::new(20.0)).unwrap();
        let n = parts.dim;
        let id_vec = vectorize(&CMat::identity(n, n));
        let row: CVec = parts.total.adjoint() * id_vec;
        assert!(row.norm() < 1e-12 * parts.total.norm().max(1.0), "trace leak {}", row.norm());
    }

    #[test]
    fn total_is_exact_sum_of_parts() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(-400.0), 0.2);
        let parts = assemble(&model, &drive, &PhononBathConfig::new(20.0)).unwrap();
        let rebuilt = (&parts.l_hamiltonian + &parts.d_radiative) + &parts.d_phonon;
        assert_eq!(parts.total, rebuilt);
    }

    #[test]
    fn undriven_emission_components_sit_on_bare_lines() {
        let model = EmitterModel::siv_default();
        let parts = assemble(&model, &DriveConfig::off(), &PhononBathConfig::new(4.0)).unwrap();
        assert_eq!(parts.radiative_jumps.len(), 4);
        for (k, jump) in parts.radiative_jumps.iter().enumerate() {
            assert_eq!(jump.components.len(), 1, "channel {k} should be a single line");
            let ch = &model.dipole_channels[jump.channel];
            // Laser frequency equals the line center when the drive is off,
            // so the component offset is the bare transition minus it.
            let bare = model.transition_frequency(ch) - model.zpl_center;
            assert!((jump.components[0].0 - bare).abs() < 1e-9);
            assert!((jump.components[0].1 - jump.rate).abs() < 1e-15);
        }
    }

    #[test]
    fn component_weights_sum_to_channel_rate() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(-400.0), 0.35);
        let parts = assemble(&model, &drive, &PhononBathConfig::new(20.0)).unwrap();
        for jump in &parts.radiative_jumps {
            let total: f64 = jump.components.iter().map(|(_, w)| w).sum();
            assert!((total - jump.rate).abs() < 1e-12 * jump.rate);
        }
    }

    #[test]
    fn dissipators_map_hermitian_to_hermitian() {
        let model = EmitterModel::siv_default();
        let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(-250.0), 0.4);
        let parts = assemble(&model, &drive, &PhononBathConfig::new(15.0)).unwrap();
        let n = parts.dim;
        // A made-up Hermitian test matrix with no special structure.
        let mut x = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                x[(i, j)] = c(0.1 + (i * n + j) as f64, (i as f64) - (j as f64));
            }
        }
        let x = linalg::hermitize(&x);
        for part in [&parts.total, &parts.d_radiative, &parts.d_phonon] {
            let y = linalg::unvectorize(&(part * vectorize(&x)), n);
            assert!((&y - y.adjoint()).norm() < 1e-10 * y.norm().max(1.0));
        }
    }
}
