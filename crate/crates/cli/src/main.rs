//! Command-line front end: loads JSON configs, dispatches to the solver
//! library, writes CSV/JSON artifacts plus a manifest per run.
//!
//! Exit codes are a stable contract: 0 success, 1 physics or config
//! error, 2 I/O error, 3 numerical failure. Every floating-point value
//! in CSV output is printed with 9 significant digits, and every number
//! in JSON output is rounded to 9 significant digits before
//! serialization, so reruns are byte-identical.

use clap::{Args, Parser, Subcommand};
use dasc_core::budget::{
    self, intensity_from_rabi, min_density_per_m3, net_cooling_report, qe_threshold,
    thermodynamic_bound_w, BudgetInputs,
};
use dasc_core::config::{load_config, ConfigFile, LoadedConfig};
use dasc_core::error::Error;
use dasc_core::liouvillian::assemble;
use dasc_core::model::DriveConfig;
use dasc_core::spectrum::{emission_spectrum, FrequencyGrid, SpectrumResult};
use dasc_core::steady_state::{heat_currents, solve_steady_state, CoolingResult};
use dasc_core::sweep::{linearity_fit, temperature_sweep, SweepPoint};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "dasc", version, about = "Few-level emitter laser-cooling simulator")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emission spectrum of the driven steady state.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Steady-state heat currents at a single working point.
    Power {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detuning-optimized cooling power across temperatures and drives.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Laboratory break-even report from closed-form estimates.
    Budget(BudgetArgs),
    /// Thermodynamic cooling bound kT gamma ln N.
    Bound {
        #[arg(long, default_value_t = budget::DEFAULT_T_KELVIN)]
        t_kelvin: f64,
        #[arg(long, default_value_t = budget::DEFAULT_CYCLE_RATE_PER_PS)]
        gamma_per_ps: f64,
        #[arg(long, default_value_t = budget::DEFAULT_N_LEVELS)]
        n_levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config, reporting the first problem found.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    t_kelvin: Option<f64>,
    #[arg(long)]
    e_opt_ev: Option<f64>,
    #[arg(long)]
    cycle_rate_per_ps: Option<f64>,
    #[arg(long)]
    n_levels: Option<usize>,
    #[arg(long)]
    alpha_b_per_cm: Option<f64>,
    #[arg(long)]
    rabi_rad_per_ps: Option<f64>,
    #[arg(long)]
    dipole_debye: Option<f64>,
    #[arg(long)]
    n_refractive: Option<f64>,
    #[arg(long)]
    sideband_energy_mev: Option<f64>,
    #[arg(long)]
    zpl_fraction: Option<f64>,
    #[arg(long)]
    density_per_m3: Option<f64>,
    /// Overrides the intensity derived from the Rabi amplitude.
    #[arg(long)]
    intensity_w_per_m2: Option<f64>,
    /// Overrides the kT-per-cycle cooling power proxy.
    #[arg(long)]
    cooling_power_w: Option<f64>,
    /// Assumed quantum efficiency for the net-cooling section.
    #[arg(long, default_value_t = 1.0)]
    qe: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // A failure here means a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidModel { .. }
        | Error::InvalidParameter { .. }
        | Error::Config { .. }
        | Error::MissingSection(_) => 1,
        Error::Io { .. } => 2,
        Error::DegenerateSteadyState { .. }
        | Error::NonPhysicalState { .. }
        | Error::NotSteadyState { .. }
        | Error::PropagationTimeout { .. }
        | Error::LinearSolve(_)
        | Error::Fit(_) => 3,
    }
}

fn run(command: Command) -> dasc_core::Result<()> {
    match command {
        Command::Spectrum { config, out } => cmd_spectrum(&config, &out),
        Command::Power { config, out } => cmd_power(&config, &out),
        Command::Sweep { config, out } => cmd_sweep(&config, &out),
        Command::Budget(args) => cmd_budget(&args),
        Command::Bound { t_kelvin, gamma_per_ps, n_levels, out } => {
            cmd_bound(t_kelvin, gamma_per_ps, n_levels, out.as_deref())
        }
        Command::Validate { config } => cmd_validate(&config),
    }
}

/// Config lookup: literal path, then `$DASC_SEED_DIR`, then the
/// `configs/` directory two levels above the binary (the repository
/// checkout when running from `target/<profile>/`). Each candidate is
/// tried verbatim and with `.json` appended.
fn resolve_config(name: &Path) -> dasc_core::Result<PathBuf> {
    let mut candidates: Vec<PathBuf> = vec![name.to_path_buf()];
    if let Ok(seed) = std::env::var("DASC_SEED_DIR") {
        candidates.push(Path::new(&seed).join(name));
    }
    if let Ok(exe) = std::env::current_exe() {
        if let Some(dir) = exe.parent() {
            candidates.push(dir.join("../../configs").join(name));
        }
    }
    for cand in &candidates {
        if cand.is_file() {
            return Ok(cand.clone());
        }
        let with_ext = cand.with_extension("json");
        if with_ext.is_file() {
            return Ok(with_ext);
        }
    }
    Err(Error::Io {
        path: name.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "config not found"),
    })
}

fn load(config: &Path) -> dasc_core::Result<LoadedConfig> {
    load_config(&resolve_config(config)?)
}

// ---------------------------------------------------------------------
// Output helpers

/// 9 significant digits, scientific: the only float format in CSV files.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rounds to 9 significant digits so JSON numbers match the CSV policy.
fn round9(x: f64) -> f64 {
    if x.is_finite() {
        fmt9(x).parse().unwrap()
    } else {
        x
    }
}

fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                let x = round9(n.as_f64().unwrap());
                if let Some(r) = serde_json::Number::from_f64(x) {
                    *value = Value::Number(r);
                } else {
                    // NaN or infinity cannot be a JSON number.
                    *value = Value::Null;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn write_json<T: Serialize>(path: &Path, payload: &T) -> dasc_core::Result<()> {
    let mut value = serde_json::to_value(payload)
        .map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })?;
    round_json(&mut value);
    let text = serde_json::to_string_pretty(&value).expect("rounded value serializes") + "\n";
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> dasc_core::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

#[derive(Serialize)]
struct RunManifest {
    schema: &'static str,
    subcommand: &'static str,
    resolved_config: Value,
    outputs: Vec<String>,
    wall_ms: u64,
    stats: Value,
}

struct Run {
    out_dir: PathBuf,
    started: Instant,
    outputs: Vec<String>,
}

impl Run {
    fn new(out_dir: &Path) -> dasc_core::Result<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
        Ok(Run { out_dir: out_dir.to_path_buf(), started: Instant::now(), outputs: Vec::new() })
    }

    fn path(&mut self, file: &str) -> PathBuf {
        self.outputs.push(file.to_string());
        self.out_dir.join(file)
    }

    fn finish(
        mut self,
        subcommand: &'static str,
        resolved: &ConfigFile,
        stats: Value,
    ) -> dasc_core::Result<()> {
        let manifest_path = self.path("manifest.json");
        let manifest = RunManifest {
            schema: "dasc.run-manifest/1",
            subcommand,
            resolved_config: serde_json::to_value(resolved).expect("config serializes"),
            outputs: self.outputs.clone(),
            wall_ms: self.started.elapsed().as_millis() as u64,
            stats,
        };
        write_json(&manifest_path, &manifest)
    }
}

// ---------------------------------------------------------------------
// Subcommands

fn spectrum_sidecar(spec: &SpectrumResult, cooling: &CoolingResult) -> Value {
    let split = spec.blue_red_split();
    let balance = dasc_core::spectrum::spectral_energy_balance(spec, cooling.q_phonon_w);
    json!({
        "laser_ghz_rel_zpl": spec.laser_ghz_rel_zpl,
        "elastic_per_ps": {
            "x": spec.elastic_per_ps[0],
            "y": spec.elastic_per_ps[1],
            "z": spec.elastic_per_ps[2],
            "total": spec.total_elastic_rate_per_ps(),
        },
        "inelastic_per_ps": spec.total_inelastic_rate_per_ps(),
        "photon_rate_per_ps": cooling.photon_emission_rate_per_ps,
        "blue_red": {
            "blue_per_ps": split.blue_per_ps,
            "red_per_ps": split.red_per_ps,
            "ratio": split.ratio,
        },
        "energy_balance": {
            "spectral_power_w": balance.spectral_power_w,
            "q_phonon_w": balance.q_phonon_w,
            "relative_deviation": balance.relative_deviation,
            "quadrature_error_w": balance.quadrature_error_w,
        },
        "lab_emitted_power_w": cooling.lab_emitted_power_w,
    })
}

fn cmd_spectrum(config: &Path, out: &Path) -> dasc_core::Result<()> {
    let cfg = load(config)?;
    let drive = cfg.drive.unwrap_or_else(DriveConfig::off);
    let parts = assemble(&cfg.model, &drive, &cfg.bath)?;
    let ss = solve_steady_state(&parts)?;
    let cooling = heat_currents(&parts, &ss)?;
    let grid = FrequencyGrid::with_peak_refinement(
        cfg.window_ghz.0,
        cfg.window_ghz.1,
        cfg.grid_points,
        &parts,
    )?;
    let spec = emission_spectrum(&parts, &ss, &grid)?;

    let mut run = Run::new(out)?;
    let rows: Vec<Vec<String>> = (0..spec.freq_ghz_rel_zpl.len())
        .map(|i| {
            vec![
                fmt9(spec.freq_ghz_rel_zpl[i]),
                fmt9(spec.s_x[i]),
                fmt9(spec.s_y[i]),
                fmt9(spec.s_z[i]),
                fmt9(spec.s_total[i]),
            ]
        })
        .collect();
    write_csv(
        &run.path("spectrum.csv"),
        &["freq_ghz_rel_zpl", "S_x", "S_y", "S_z", "S_total"],
        &rows,
    )?;
    write_json(&run.path("spectrum.json"), &spectrum_sidecar(&spec, &cooling))?;

    let stats = json!({
        "steady_state_residual": ss.residual,
        "grid_points": spec.freq_ghz_rel_zpl.len(),
        "q_phonon_w": cooling.q_phonon_w,
    });
    run.finish("spectrum", &cfg.resolved, stats)
}

fn cmd_power(config: &Path, out: &Path) -> dasc_core::Result<()> {
    let cfg = load(config)?;
    let drive = cfg.drive.unwrap_or_else(DriveConfig::off);
    let parts = assemble(&cfg.model, &drive, &cfg.bath)?;
    let ss = solve_steady_state(&parts)?;
    let cooling = heat_currents(&parts, &ss)?;

    let mut run = Run::new(out)?;
    let report = json!({
        "q_phonon_w": cooling.q_phonon_w,
        "q_radiative_rf_w": cooling.q_radiative_rf_w,
        "photon_emission_rate_per_ps": cooling.photon_emission_rate_per_ps,
        "lab_emitted_power_w": cooling.lab_emitted_power_w,
        "cooling": cooling.q_phonon_w > 0.0,
    });
    write_json(&run.path("power.json"), &report)?;
    let stats = json!({ "steady_state_residual": ss.residual });
    run.finish("power", &cfg.resolved, stats)
}

fn sweep_rows_csv(points: &[SweepPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                fmt9(p.temperature_k),
                fmt9(p.rabi_rad_per_ps),
                fmt9(p.optimal_detuning_ghz),
                fmt9(p.cooling_power_w),
                fmt9(p.bound_w),
                fmt9(p.ratio),
                p.flag.clone(),
            ]
        })
        .collect()
}

fn cmd_sweep(config: &Path, out: &Path) -> dasc_core::Result<()> {
    let cfg = load(config)?;
    let points = temperature_sweep(&cfg.model, &cfg.bath, &cfg.sweep)?;

    let mut run = Run::new(out)?;
    write_csv(
        &run.path("sweep.csv"),
        &[
            "temperature_k",
            "rabi_rad_per_ps",
            "optimal_detuning_ghz",
            "cooling_power_w",
            "bound_w",
            "ratio",
            "flag",
        ],
        &sweep_rows_csv(&points),
    )?;

    // Full evaluation log for auditing the optimizer.
    let sample_rows: Vec<Vec<String>> = points
        .iter()
        .flat_map(|p| {
            p.samples.iter().map(|s| {
                vec![
                    fmt9(p.temperature_k),
                    fmt9(p.rabi_rad_per_ps),
                    fmt9(s.detuning_ghz),
                    fmt9(s.power_w),
                ]
            })
        })
        .collect();
    write_csv(
        &run.path("sweep_samples.csv"),
        &["temperature_k", "rabi_rad_per_ps", "detuning_ghz", "power_w"],
        &sample_rows,
    )?;

    // One linearity fit per drive strength; pooling different Rabi
    // amplitudes would blur the temperature exponent.
    let mut rabis: Vec<f64> = points.iter().map(|p| p.rabi_rad_per_ps).collect();
    rabis.sort_by(f64::total_cmp);
    rabis.dedup();
    let fits: Vec<Value> = rabis
        .iter()
        .map(|&rabi| {
            let subset: Vec<SweepPoint> = points
                .iter()
                .filter(|p| p.rabi_rad_per_ps == rabi)
                .cloned()
                .collect();
            let fit = match linearity_fit(&subset) {
                Ok(f) => json!({
                    "exponent": f.exponent,
                    "prefactor_w": f.prefactor_w,
                    "prefactor_over_bound": f.prefactor_over_bound,
                    "points_used": f.points_used,
                }),
                Err(e) => json!({ "skipped": e.to_string() }),
            };
            json!({ "rabi_rad_per_ps": rabi, "fit": fit })
        })
        .collect();
    write_json(&run.path("sweep.json"), &json!({ "fits": fits }))?;

    let evaluations: usize = points.iter().map(|p| p.samples.len()).sum();
    let stats = json!({ "points": points.len(), "evaluations": evaluations });
    run.finish("sweep", &cfg.resolved, stats)
}

fn budget_report(args: &BudgetArgs) -> dasc_core::Result<Value> {
    let d = BudgetInputs::default();
    let inputs = BudgetInputs {
        t_kelvin: args.t_kelvin.unwrap_or(d.t_kelvin),
        e_opt_ev: args.e_opt_ev.unwrap_or(d.e_opt_ev),
        cycle_rate_per_ps: args.cycle_rate_per_ps.unwrap_or(d.cycle_rate_per_ps),
        n_levels: args.n_levels.unwrap_or(d.n_levels),
        alpha_b_per_cm: args.alpha_b_per_cm.unwrap_or(d.alpha_b_per_cm),
        rabi_rad_per_ps: args.rabi_rad_per_ps.unwrap_or(d.rabi_rad_per_ps),
        dipole_debye: args.dipole_debye.unwrap_or(d.dipole_debye),
        n_refractive: args.n_refractive.unwrap_or(d.n_refractive),
        sideband_energy_mev: args.sideband_energy_mev.unwrap_or(d.sideband_energy_mev),
        zpl_fraction: args.zpl_fraction.unwrap_or(d.zpl_fraction),
        density_per_m3: args.density_per_m3.unwrap_or(d.density_per_m3),
        intensity_w_per_m2: args.intensity_w_per_m2,
        cooling_power_w: args.cooling_power_w,
    };
    inputs.validate()?;
    if !(args.qe.is_finite() && (0.0..=1.0).contains(&args.qe)) {
        return Err(Error::invalid("quantum efficiency", "must lie in [0, 1]"));
    }

    let bound = thermodynamic_bound_w(inputs.t_kelvin, inputs.cycle_rate_per_ps, inputs.n_levels)?;
    let qe = qe_threshold(inputs.t_kelvin, inputs.e_opt_ev)?;
    let drive = intensity_from_rabi(inputs.rabi_rad_per_ps, inputs.dipole_debye, inputs.n_refractive)?;
    let p_cool = inputs.cooling_power();
    let intensity = inputs.intensity()?;
    let min_density = min_density_per_m3(inputs.alpha_b_per_cm, intensity, p_cool);
    let zpl = budget::zpl_threshold(p_cool, inputs.cycle_rate_per_ps, inputs.sideband_energy_mev)?;
    let net = net_cooling_report(&inputs, args.qe)?;

    let min_density = match min_density {
        Ok(v) => json!(v),
        Err(e) => json!({ "undefined": e.to_string() }),
    };
    Ok(json!({
        "inputs": inputs.flagged()?,
        "assumed_qe": { "value": args.qe, "paper_default": args.qe == 1.0 },
        "bound_w": bound,
        "qe_threshold": { "cycles_per_nr_decay": qe.cycles_per_nr_decay, "min_qe": qe.min_qe },
        "drive": {
            "field_v_per_m": drive.field_v_per_m,
            "intensity_w_per_m2": drive.intensity_w_per_m2,
        },
        "cooling_power_w": p_cool,
        "min_density_per_m3": min_density,
        "zpl_threshold": { "beta_min": zpl.beta_min, "sideband_never_limits": zpl.sideband_never_limits },
        "net": net,
    }))
}

fn print_json(value: &Value) {
    let mut rounded = value.clone();
    round_json(&mut rounded);
    println!("{}", serde_json::to_string_pretty(&rounded).expect("serializes"));
}

fn cmd_budget(args: &BudgetArgs) -> dasc_core::Result<()> {
    let report = budget_report(args)?;
    print_json(&report);
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        write_json(&out.join("budget.json"), &report)?;
        let manifest = RunManifest {
            schema: "dasc.run-manifest/1",
            subcommand: "budget",
            resolved_config: report["inputs"].clone(),
            outputs: vec!["budget.json".into()],
            wall_ms: 0,
            stats: Value::Null,
        };
        write_json(&out.join("manifest.json"), &manifest)?;
    }
    Ok(())
}

fn cmd_bound(
    t_kelvin: f64,
    gamma_per_ps: f64,
    n_levels: usize,
    out: Option<&Path>,
) -> dasc_core::Result<()> {
    let bound = thermodynamic_bound_w(t_kelvin, gamma_per_ps, n_levels)?;
    let report = json!({
        "t_kelvin": t_kelvin,
        "gamma_per_ps": gamma_per_ps,
        "n_levels": n_levels,
        "bound_w": bound,
    });
    print_json(&report);
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
        write_json(&out.join("bound.json"), &report)?;
    }
    Ok(())
}

fn cmd_validate(config: &Path) -> dasc_core::Result<()> {
    let path = resolve_config(config)?;
    let cfg = load_config(&path)?;
    println!(
        "ok: {} ({} levels, drive {})",
        path.display(),
        cfg.model.n_levels(),
        if cfg.drive.is_some() { "present" } else { "absent" }
    );
    Ok(())
}
