//! Detuning optimization and temperature sweeps of the cooling power.
//!
//! For each temperature and drive strength the laser detuning is scanned
//! on a coarse grid across the search window, then the best basin is
//! refined by golden-section search. The refined optimum never falls
//! below the best raw grid sample, and every evaluated sample is kept
//! for audit. Sweep rows carry the per-point thermodynamic bound so
//! downstream fits can report powers as a fraction of it.

use crate::budget::thermodynamic_bound_w;
use crate::error::{Error, Result};
use crate::liouvillian::assemble;
use crate::model::{DriveConfig, EmitterModel, PhononBathConfig};
use crate::steady_state::{heat_currents, solve_steady_state};
use crate::units;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Detuning search window relative to the line center, GHz. Cooling
/// needs net red detuning; the small positive margin catches edge cases.
pub const DEFAULT_WINDOW_GHZ: (f64, f64) = (-800.0, 100.0);
/// Coarse scan points across the window.
pub const DEFAULT_COARSE_POINTS: usize = 64;
/// Refinement stops when the bracketed power changes by less than this.
pub const DEFAULT_REL_TOL: f64 = 1e-4;
const MAX_REFINE_ITERS: usize = 120;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub temperatures_k: Vec<f64>,
    pub rabi_rad_per_ps: Vec<f64>,
    pub window_ghz: (f64, f64),
    pub coarse_points: usize,
    pub rel_tol: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            temperatures_k: log_spaced(1.0, 100.0, 7),
            rabi_rad_per_ps: vec![0.632455532, 0.2, 0.0632455532],
            window_ghz: DEFAULT_WINDOW_GHZ,
            coarse_points: DEFAULT_COARSE_POINTS,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.temperatures_k.is_empty() {
            return Err(Error::invalid("sweep", "temperature list is empty"));
        }
        if self.rabi_rad_per_ps.is_empty() {
            return Err(Error::invalid("sweep", "Rabi list is empty"));
        }
        for &t in &self.temperatures_k {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid("sweep", format!("temperature {t} must be > 0 K")));
            }
        }
        for &r in &self.rabi_rad_per_ps {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::invalid("sweep", format!("Rabi amplitude {r} must be >= 0")));
            }
        }
        let (lo, hi) = self.window_ghz;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid("sweep", "window bounds must be finite with lo < hi"));
        }
        if self.coarse_points < 8 {
            return Err(Error::invalid("sweep", "coarse grid needs at least 8 points"));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0 && self.rel_tol < 0.5) {
            return Err(Error::invalid("sweep", "refinement tolerance must lie in (0, 0.5)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DetuningSample {
    pub detuning_ghz: f64,
    pub power_w: f64,
}

#[derive(Debug, Clone)]
pub struct DetuningOptimum {
    pub detuning_ghz: f64,
    pub power_w: f64,
    /// True when no detuning in the window produced positive cooling;
    /// the returned point is then the least harmful one.
    pub no_cooling: bool,
    /// Every (detuning, power) pair evaluated, coarse scan first.
    pub samples: Vec<DetuningSample>,
    pub evaluations: usize,
}

/// Cooling power at one detuning, W.
fn power_at(
    model: &EmitterModel,
    bath: &PhononBathConfig,
    rabi: f64,
    detuning_ghz: f64,
) -> Result<f64> {
    let drive = DriveConfig::uniform(units::ghz_to_rad_per_ps(detuning_ghz), rabi);
    let parts = assemble(model, &drive, bath)?;
    let ss = solve_steady_state(&parts)?;
    Ok(heat_currents(&parts, &ss)?.q_phonon_w)
}

/// Among samples within `rel_tol` of the best power, the smallest |δ|
/// wins; this makes plateaus resolve deterministically.
fn pick_best(samples: &[DetuningSample], rel_tol: f64) -> usize {
    let best = samples
        .iter()
        .map(|s| s.power_w)
        .fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].power_w >= best - rel_tol * best.abs())
        .collect();
    *near
        .iter()
        .min_by(|&&a, &&b| {
            samples[a]
                .detuning_ghz
                .abs()
                .partial_cmp(&samples[b].detuning_ghz.abs())
                .unwrap()
        })
        .unwrap()
}

pub fn optimize_detuning(
    model: &EmitterModel,
    rabi: f64,
    bath: &PhononBathConfig,
    window_ghz: (f64, f64),
    coarse_points: usize,
    rel_tol: f64,
) -> Result<DetuningOptimum> {
    let spec = SweepSpec {
        temperatures_k: vec![bath.temperature_k.max(f64::MIN_POSITIVE)],
        rabi_rad_per_ps: vec![rabi],
        window_ghz,
        coarse_points,
        rel_tol,
    };
    spec.validate()?;
    model.validate()?;
    bath.validate()?;

    let (lo, hi) = window_ghz;
    let step = (hi - lo) / (coarse_points - 1) as f64;
    let grid: Vec<f64> = (0..coarse_points).map(|i| lo + step * i as f64).collect();
    let mut samples: Vec<DetuningSample> = grid
        .par_iter()
        .map(|&d| Ok(DetuningSample { detuning_ghz: d, power_w: power_at(model, bath, rabi, d)? }))
        .collect::<Result<_>>()?;
    let mut evaluations = samples.len();

    let best_idx = pick_best(&samples, rel_tol);
    let coarse_best = samples[best_idx];

    if coarse_best.power_w <= 0.0 {
        return Ok(DetuningOptimum {
            detuning_ghz: coarse_best.detuning_ghz,
            power_w: coarse_best.power_w,
            no_cooling: true,
            samples,
            evaluations,
        });
    }

    // Golden-section refinement inside the bracket formed by the grid
    // neighbors of the winning sample.
    let mut a = if best_idx == 0 { lo } else { grid[best_idx - 1] };
    let mut b = if best_idx + 1 == grid.len() { hi } else { grid[best_idx + 1] };
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let eval = |x: f64, samples: &mut Vec<DetuningSample>, evals: &mut usize| -> Result<f64> {
        let p = power_at(model, bath, rabi, x)?;
        samples.push(DetuningSample { detuning_ghz: x, power_w: p });
        *evals += 1;
        Ok(p)
    };
    let mut fc = eval(c, &mut samples, &mut evaluations)?;
    let mut fd = eval(d, &mut samples, &mut evaluations)?;
    for _ in 0..MAX_REFINE_ITERS {
        if (fc - fd).abs() <= rel_tol * fc.abs().max(fd.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c, &mut samples, &mut evaluations)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d, &mut samples, &mut evaluations)?;
        }
    }
    let refined = if fc >= fd {
        DetuningSample { detuning_ghz: c, power_w: fc }
    } else {
        DetuningSample { detuning_ghz: d, power_w: fd }
    };

    // The refined value can only improve on the grid; keep whichever won.
    let winner = if refined.power_w >= coarse_best.power_w { refined } else { coarse_best };
    Ok(DetuningOptimum {
        detuning_ghz: winner.detuning_ghz,
        power_w: winner.power_w,
        no_cooling: false,
        samples,
        evaluations,
    })
}

/// One optimized sweep row. `flag` is "ok", "no_cooling", or
/// "failed: <reason>"; failed rows carry NaN power and ratio.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub temperature_k: f64,
    pub rabi_rad_per_ps: f64,
    pub optimal_detuning_ghz: f64,
    pub cooling_power_w: f64,
    pub bound_w: f64,
    pub ratio: f64,
    pub flag: String,
    pub samples: Vec<DetuningSample>,
}

/// Optimizes every (temperature, Rabi) combination. Lists are sorted
/// internally, so reordering the input changes nothing. Per-point
/// failures are recorded in the row flag instead of aborting the sweep.
pub fn temperature_sweep(
    model: &EmitterModel,
    bath_template: &PhononBathConfig,
    spec: &SweepSpec,
) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    model.validate()?;
    bath_template.validate()?;
    if model.radiative_rate <= 0.0 {
        return Err(Error::invalid("sweep", "radiative rate must be > 0 to compare to the bound"));
    }

    let mut temps = spec.temperatures_k.clone();
    temps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rabis = spec.rabi_rad_per_ps.clone();
    rabis.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let points: Vec<(f64, f64)> = temps
        .iter()
        .flat_map(|&t| rabis.iter().map(move |&r| (t, r)))
        .collect();

    let rows: Vec<SweepPoint> = points
        .par_iter()
        .map(|&(t, rabi)| {
            let bath = bath_template.with_temperature(t);
            let bound = thermodynamic_bound_w(t, model.radiative_rate, model.n_levels())
                .expect("validated above");
            match optimize_detuning(
                model,
                rabi,
                &bath,
                spec.window_ghz,
                spec.coarse_points,
                spec.rel_tol,
            ) {
                Ok(opt) => SweepPoint {
                    temperature_k: t,
                    rabi_rad_per_ps: rabi,
                    optimal_detuning_ghz: opt.detuning_ghz,
                    cooling_power_w: opt.power_w,
                    bound_w: bound,
                    ratio: opt.power_w / bound,
                    flag: if opt.no_cooling { "no_cooling".into() } else { "ok".into() },
                    samples: opt.samples,
                },
                Err(e) => SweepPoint {
                    temperature_k: t,
                    rabi_rad_per_ps: rabi,
                    optimal_detuning_ghz: f64::NAN,
                    cooling_power_w: f64::NAN,
                    bound_w: bound,
                    ratio: f64::NAN,
                    flag: format!("failed: {e}"),
                    samples: Vec::new(),
                },
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Debug, Clone, Copy)]
pub struct LinearityFit {
    /// Fitted exponent of power versus temperature.
    pub exponent: f64,
    /// Fitted power at 1 K, W.
    pub prefactor_w: f64,
    /// Fitted 1 K power over the 1 K thermodynamic bound.
    pub prefactor_over_bound: f64,
    pub points_used: usize,
}

/// Log-log least squares of optimized power against temperature.
/// Requires at least five distinct temperatures spanning a decade;
/// non-positive and failed points are excluded, and at least three
/// points must survive.
pub fn linearity_fit(points: &[SweepPoint]) -> Result<LinearityFit> {
    let mut temps: Vec<f64> = points.iter().map(|p| p.temperature_k).collect();
    temps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    temps.dedup();
    if temps.len() < 5 {
        return Err(Error::Fit(format!(
            "need at least 5 distinct temperatures, got {}",
            temps.len()
        )));
    }
    let span = temps.last().unwrap() / temps.first().unwrap();
    if span < 10.0 {
        return Err(Error::Fit(format!(
            "temperatures must span at least a decade, got a factor of {span:.3}"
        )));
    }

    let usable: Vec<&SweepPoint> = points
        .iter()
        .filter(|p| p.cooling_power_w.is_finite() && p.cooling_power_w > 0.0 && p.bound_w > 0.0)
        .collect();
    if usable.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} points with positive power remain, need at least 3",
            usable.len()
        )));
    }

    let n = usable.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for p in &usable {
        let x = p.temperature_k.ln();
        let y = p.cooling_power_w.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Fit("temperatures are too clustered to fit".into()));
    }
    let exponent = (n * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / n;
    let prefactor_w = intercept.exp();

    // bound_w / T is kT gamma ln N at 1 K, identical across rows.
    let bound_at_1k =
        usable.iter().map(|p| p.bound_w / p.temperature_k).sum::<f64>() / usable.len() as f64;
    Ok(LinearityFit {
        exponent,
        prefactor_w,
        prefactor_over_bound: prefactor_w / bound_at_1k,
        points_used: usable.len(),
    })
}
