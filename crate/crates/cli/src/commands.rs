//! Subcommand implementations: resolve flags over config file over
//! defaults, run the core routines, and populate the run directory.
//!
//! Every command echoes the fully resolved inputs to `config.json` before
//! doing any work, so a run directory is self-describing. Numerical
//! failures mid-run still leave a `report.json` with `status: "error"`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use scaledrive_core::experiments::{
    fidelity_sweep, figure1_curves, piston_demo, write_piston_protocol_csv, write_sweep_csv,
    PistonSettings, RunDir, SweepRow, SweepSettings, FIGURE1_DEFAULT_TF, SWEEP_DEFAULT_TF,
};
use scaledrive_core::propagator::{run_cd_expansion, ExpansionRun, RunSettings};
use scaledrive_core::protocol::{synthesize, FrequencyRamp, PowerLawExponent};
use scaledrive_core::qstate::{snapshot_meta, write_snapshot_csv, Grid1D, WaveFunction};
use scaledrive_core::{validate, Drive, Error, Regime, Result};

use crate::config::{resolve, resolve_ramp, FileConfig, ResolvedRamp};
use crate::{
    DesignArgs, Figure1Args, GridArgs, PistonArgs, SimulateArgs, SweepArgs, ValidateArgs,
};

const DEFAULT_DIM: u32 = 1;
const DEFAULT_ALPHA: f64 = 2.0;
const DEFAULT_G0: f64 = 0.0;
const DEFAULT_DESIGN_SAMPLES: usize = 1001;
const DEFAULT_RUN_SAMPLES: usize = 4001;
const DEFAULT_GRID_POINTS: usize = 2048;
const DEFAULT_BOX_LENGTH: f64 = 40.0;
const DEFAULT_DT: f64 = 1e-3;
const DEFAULT_STRIDE: usize = 0;
const DEFAULT_JOBS: usize = 1;
const DEFAULT_PISTON_EXPANSION: f64 = 2.0;
const DEFAULT_PISTON_TF: f64 = 10.0;
const DEFAULT_PISTON_XI0: f64 = 1.0;
const DEFAULT_PISTON_AMPLITUDE: f64 = 0.5;
const DEFAULT_PISTON_GRID_POINTS: usize = 512;
const DEFAULT_PISTON_BOX_LENGTH: f64 = 20.0;
const DEFAULT_PISTON_DT: f64 = 5e-4;

fn output_dir(seed_dir: &Option<PathBuf>, command: &str) -> PathBuf {
    seed_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(command))
}

/// Spatial/temporal discretization after flag/file/default resolution.
#[derive(Serialize, Clone, Copy)]
struct ResolvedGrid {
    grid_points: usize,
    box_length: f64,
    dt: f64,
    output_stride: usize,
}

impl ResolvedGrid {
    fn new(args: &GridArgs, file: &FileConfig, points: usize, length: f64, dt: f64) -> Self {
        ResolvedGrid {
            grid_points: resolve(args.grid_points, file.grid_points, points),
            box_length: resolve(args.box_length, file.box_length, length),
            dt: resolve(args.dt, file.dt, dt),
            output_stride: resolve(args.output_stride, file.output_stride, DEFAULT_STRIDE),
        }
    }

    fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid_points, self.box_length)
    }

    fn run_settings(&self) -> RunSettings {
        RunSettings {
            dt: self.dt,
            output_stride: self.output_stride,
        }
    }
}

/// `{"status": "ok", ...body}` envelope for success reports.
#[derive(Serialize)]
struct OkReport<'a, T: Serialize> {
    status: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

impl<'a, T: Serialize> OkReport<'a, T> {
    fn new(body: &'a T) -> Self {
        OkReport {
            status: "ok",
            body,
        }
    }
}

/// Record a numerical failure in `report.json`, then hand the error back so
/// the process still exits with the matching code.
fn record_failure(dir: &RunDir, error: Error) -> Error {
    let report = serde_json::json!({
        "status": "error",
        "error": error.to_string(),
        "exit_code": crate::exit_code_for(&error),
    });
    if let Err(write_error) = dir.write_json("report.json", &report) {
        return write_error;
    }
    error
}

fn write_snapshot(dir: &Path, name: &str, psi: &WaveFunction) -> Result<()> {
    let mut csv = BufWriter::new(File::create(dir.join(format!("{name}.csv")))?);
    write_snapshot_csv(psi, &mut csv)?;
    csv.flush()?;
    let mut meta = BufWriter::new(File::create(dir.join(format!("{name}.json")))?);
    serde_json::to_writer_pretty(&mut meta, &snapshot_meta(psi)).map_err(io::Error::from)?;
    writeln!(meta)?;
    meta.flush()?;
    Ok(())
}

fn resolve_regime(flag: &Option<String>, file: &FileConfig) -> Result<Regime> {
    match flag.as_deref().or(file.regime.as_deref()) {
        Some(text) => text.parse(),
        None => Ok(Regime::Linear),
    }
}

fn resolve_drive(flag: &Option<String>, file: &FileConfig) -> Result<Drive> {
    match flag.as_deref().or(file.drive.as_deref()) {
        Some(text) => text.parse(),
        None => Ok(Drive::Cd),
    }
}

/// Duration list for `figure1`/`sweep`: repeated flags win, then the file's
/// `tF_list`, then a single file `tF`, then the built-in default.
fn resolve_tf_list(flags: &[f64], file: &FileConfig, default: &[f64]) -> Vec<f64> {
    if !flags.is_empty() {
        flags.to_vec()
    } else if let Some(list) = &file.t_final_list {
        list.clone()
    } else if let Some(t_final) = file.t_final {
        vec![t_final]
    } else {
        default.to_vec()
    }
}

#[derive(Serialize)]
struct DesignConfig {
    command: &'static str,
    #[serde(flatten)]
    ramp: ResolvedRamp,
    samples: usize,
    dim: u32,
    alpha: f64,
}

#[derive(Serialize)]
struct DesignReport {
    status: &'static str,
    #[serde(rename = "gammaF")]
    gamma_f: f64,
    tau_final: f64,
    epsilon_final: f64,
    g_ratio_final: f64,
    max_cd_gap: f64,
    min_omega2_cd: f64,
    inverts_trap: bool,
}

pub fn design(args: &DesignArgs) -> Result<i32> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let ramp = resolve_ramp(
        args.ramp.omega0,
        args.ramp.omega_f,
        args.ramp.gamma_f,
        args.ramp.t_final,
        &file,
    )?;
    let samples = resolve(args.ramp.samples, file.samples, DEFAULT_DESIGN_SAMPLES);
    let dim = resolve(args.ramp.dim, file.dim, DEFAULT_DIM);
    let alpha = resolve(args.ramp.alpha, file.alpha, DEFAULT_ALPHA);

    let freq = FrequencyRamp::new(ramp.omega0, ramp.omega_f, ramp.t_final)?;
    let protocol = synthesize(&freq, dim, alpha, samples)?;

    let dir = RunDir::create(output_dir(&args.output.seed_dir, "design"), args.output.force)?;
    dir.write_json(
        "config.json",
        &DesignConfig {
            command: "design",
            ramp,
            samples,
            dim,
            alpha,
        },
    )?;
    dir.write_json("protocol.json", &protocol.envelope())?;
    dir.write_text("protocol.csv", |w| {
        protocol.write_csv(w).map_err(Error::from)
    })?;

    let omega0_sq = ramp.omega0 * ramp.omega0;
    let omega2_cd = protocol.omega2_cd();
    let mut max_gap = 0.0f64;
    let mut min_omega2 = f64::INFINITY;
    for (i, &t) in protocol.times().iter().enumerate() {
        let bare = freq.value(t)?.powi(2);
        max_gap = max_gap.max((omega2_cd[i] - bare).abs() / omega0_sq);
        min_omega2 = min_omega2.min(omega2_cd[i]);
    }
    let report = DesignReport {
        status: "ok",
        gamma_f: *protocol.gamma().last().expect("nonempty protocol"),
        tau_final: *protocol.tau().last().expect("nonempty protocol"),
        epsilon_final: *protocol.epsilon().last().expect("nonempty protocol"),
        g_ratio_final: *protocol.g_ratio().last().expect("nonempty protocol"),
        max_cd_gap: max_gap,
        min_omega2_cd: min_omega2,
        inverts_trap: min_omega2 < 0.0,
    };
    dir.write_json("report.json", &report)?;

    println!(
        "designed ramp omega: {} -> {} over tF = {} ({} samples, D = {}, alpha = {})",
        ramp.omega0, ramp.omega_f, ramp.t_final, samples, dim, alpha
    );
    println!(
        "gammaF = {:.6}, max CD gap = {:.4} omega0^2, min Omega^2 = {:.4} omega0^2{}",
        report.gamma_f,
        report.max_cd_gap,
        report.min_omega2_cd / omega0_sq,
        if report.inverts_trap {
            " (trap inverted)"
        } else {
            ""
        }
    );
    println!("wrote {}", dir.path().display());
    Ok(0)
}

#[derive(Serialize)]
struct SimulateConfig {
    command: &'static str,
    #[serde(flatten)]
    ramp: ResolvedRamp,
    samples: usize,
    dim: u32,
    alpha: f64,
    regime: Regime,
    drive: Drive,
    g0: f64,
    #[serde(flatten)]
    grid: ResolvedGrid,
    snapshots: bool,
}

pub fn simulate(args: &SimulateArgs) -> Result<i32> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let ramp = resolve_ramp(
        args.ramp.omega0,
        args.ramp.omega_f,
        args.ramp.gamma_f,
        args.ramp.t_final,
        &file,
    )?;
    let samples = resolve(args.ramp.samples, file.samples, DEFAULT_RUN_SAMPLES);
    let dim = resolve(args.ramp.dim, file.dim, DEFAULT_DIM);
    let alpha = resolve(args.ramp.alpha, file.alpha, DEFAULT_ALPHA);
    let regime = resolve_regime(&args.regime, &file)?;
    let drive = resolve_drive(&args.drive, &file)?;
    let g0 = resolve(args.g0, file.g0, DEFAULT_G0);
    let grid_cfg = ResolvedGrid::new(
        &args.grid,
        &file,
        DEFAULT_GRID_POINTS,
        DEFAULT_BOX_LENGTH,
        DEFAULT_DT,
    );

    let freq = FrequencyRamp::new(ramp.omega0, ramp.omega_f, ramp.t_final)?;
    let protocol = synthesize(&freq, dim, alpha, samples)?;
    let grid = grid_cfg.grid()?;

    let dir = RunDir::create(
        output_dir(&args.output.seed_dir, "simulate"),
        args.output.force,
    )?;
    dir.write_json(
        "config.json",
        &SimulateConfig {
            command: "simulate",
            ramp,
            samples,
            dim,
            alpha,
            regime,
            drive,
            g0,
            grid: grid_cfg,
            snapshots: args.snapshots,
        },
    )?;
    dir.write_text("protocol.csv", |w| {
        protocol.write_csv(w).map_err(Error::from)
    })?;

    let run: ExpansionRun =
        match run_cd_expansion(&protocol, regime, drive, g0, &grid, &grid_cfg.run_settings()) {
            Ok(run) => run,
            Err(error) => return Err(record_failure(&dir, error)),
        };

    dir.write_text("observables.csv", |w| {
        run.series.write_csv(w).map_err(Error::from)
    })?;
    dir.write_json("report.json", &OkReport::new(&run.report))?;
    if args.snapshots {
        let snap = dir.subdir("snapshots")?;
        write_snapshot(&snap, "initial", &run.initial.state)?;
        write_snapshot(&snap, "final", &run.final_state)?;
        write_snapshot(&snap, "target", &run.target)?;
    }

    println!(
        "{} {} expansion: gammaF = {:.6} (measured {:.6}), tF = {}",
        run.report.regime, run.report.drive, run.report.gamma_f,
        run.report.gamma_measured_final, run.report.t_final
    );
    println!(
        "fid_target = {:.6}, fid_oracle = {:.6}, max oracle L2 = {:.3e}, norm drift = {:.2e}",
        run.report.fid_target_final,
        run.report.fid_oracle_final,
        run.report.max_oracle_l2,
        run.report.max_norm_drift
    );
    println!("wrote {}", dir.path().display());
    Ok(0)
}

#[derive(Serialize)]
struct Figure1Config {
    command: &'static str,
    omega0: f64,
    #[serde(rename = "omegaF")]
    omega_f: f64,
    #[serde(rename = "gammaF")]
    gamma_f: f64,
    #[serde(rename = "tF_list")]
    tf_list: Vec<f64>,
    samples: usize,
}

pub fn figure1(args: &Figure1Args) -> Result<i32> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let ramp = resolve_ramp(args.omega0, args.omega_f, args.gamma_f, None, &file)?;
    let samples = resolve(args.samples, file.samples, DEFAULT_DESIGN_SAMPLES);
    let tf_list = resolve_tf_list(&args.t_final, &file, &FIGURE1_DEFAULT_TF);

    let curves = figure1_curves(ramp.omega0, ramp.gamma_f, &tf_list, samples)?;

    let dir = RunDir::create(
        output_dir(&args.output.seed_dir, "figure1"),
        args.output.force,
    )?;
    dir.write_json(
        "config.json",
        &Figure1Config {
            command: "figure1",
            omega0: ramp.omega0,
            omega_f: ramp.omega_f,
            gamma_f: ramp.gamma_f,
            tf_list: tf_list.clone(),
            samples,
        },
    )?;
    let mut summaries = Vec::with_capacity(curves.len());
    for curve in &curves {
        let name = format!("figure1_tF{}.csv", curve.t_final);
        dir.write_text(&name, |w| curve.write_csv(w).map_err(Error::from))?;
        summaries.push(curve.summary());
    }
    let report = serde_json::json!({ "status": "ok", "curves": summaries });
    dir.write_json("report.json", &report)?;

    for summary in &summaries {
        println!(
            "tF = {}: max CD gap = {:.4} omega0^2, min Omega^2 = {:.4} omega0^2{}",
            summary.t_final,
            summary.max_cd_gap,
            summary.min_omega2,
            if summary.inverts_trap {
                " (trap inverted)"
            } else {
                ""
            }
        );
    }
    println!("wrote {}", dir.path().display());
    Ok(0)
}

#[derive(Serialize)]
struct SweepConfig {
    command: &'static str,
    #[serde(rename = "gammaF")]
    gamma_f: f64,
    #[serde(rename = "tF_list")]
    tf_list: Vec<f64>,
    regime: Regime,
    g0: f64,
    samples: usize,
    dim: u32,
    alpha: f64,
    #[serde(flatten)]
    grid: ResolvedGrid,
    jobs: usize,
}

pub fn sweep(args: &SweepArgs) -> Result<i32> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    if let Some(omega0) = file.omega0 {
        if omega0 != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sweep fixes omega0 = 1; drop the omega0 key or set it to 1, got {omega0}"
            )));
        }
    }
    let ramp = resolve_ramp(None, args.omega_f, args.gamma_f, None, &file)?;
    let tf_list = resolve_tf_list(&args.t_final, &file, &SWEEP_DEFAULT_TF);
    let regime = resolve_regime(&args.regime, &file)?;
    let g0 = resolve(args.g0, file.g0, DEFAULT_G0);
    let samples = resolve(args.samples, file.samples, DEFAULT_RUN_SAMPLES);
    let dim = resolve(args.dim, file.dim, DEFAULT_DIM);
    let alpha = resolve(args.alpha, file.alpha, DEFAULT_ALPHA);
    let jobs = resolve(args.jobs, file.jobs, DEFAULT_JOBS);
    let grid_cfg = ResolvedGrid::new(
        &args.grid,
        &file,
        DEFAULT_GRID_POINTS,
        DEFAULT_BOX_LENGTH,
        DEFAULT_DT,
    );

    let settings = SweepSettings {
        dim,
        alpha,
        n_samples: samples,
        grid: grid_cfg.grid()?,
        run: grid_cfg.run_settings(),
        jobs,
    };

    let dir = RunDir::create(
        output_dir(&args.output.seed_dir, "sweep"),
        args.output.force,
    )?;
    dir.write_json(
        "config.json",
        &SweepConfig {
            command: "sweep",
            gamma_f: ramp.gamma_f,
            tf_list: tf_list.clone(),
            regime,
            g0,
            samples,
            dim,
            alpha,
            grid: grid_cfg,
            jobs,
        },
    )?;

    let rows: Vec<SweepRow> = match fidelity_sweep(regime, ramp.gamma_f, &tf_list, g0, &settings) {
        Ok(rows) => rows,
        Err(error) => return Err(record_failure(&dir, error)),
    };

    dir.write_text("sweep.csv", |w| write_sweep_csv(&rows, w).map_err(Error::from))?;
    let report = serde_json::json!({ "status": "ok", "rows": rows });
    dir.write_json("report.json", &report)?;

    for row in &rows {
        println!(
            "tF = {}: fid_cd = {:.6}, fid_bare = {:.6}, max oracle L2 = {:.3e}",
            row.t_final, row.fidelity_cd, row.fidelity_bare, row.max_oracle_dev
        );
    }
    println!("wrote {}", dir.path().display());
    Ok(0)
}

#[derive(Serialize)]
struct PistonConfig {
    command: &'static str,
    b: String,
    expansion: f64,
    #[serde(rename = "tF")]
    t_final: f64,
    xi0: f64,
    amplitude: f64,
    #[serde(flatten)]
    grid: ResolvedGrid,
    samples: usize,
}

fn parse_exponent(text: &str) -> Result<PowerLawExponent> {
    if text.eq_ignore_ascii_case("piston") {
        return Ok(PowerLawExponent::Piston);
    }
    text.parse::<f64>()
        .map(PowerLawExponent::Finite)
        .map_err(|_| {
            Error::InvalidParameter(format!(
                "trap exponent must be a number or \"piston\", got '{text}'"
            ))
        })
}

pub fn piston(args: &PistonArgs) -> Result<i32> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let exponent = match &args.b {
        Some(text) => parse_exponent(text)?,
        None => PowerLawExponent::Finite(4.0),
    };
    let expansion = args.expansion.unwrap_or(DEFAULT_PISTON_EXPANSION);
    let t_final = resolve(args.t_final, file.t_final, DEFAULT_PISTON_TF);
    let samples = resolve(args.samples, file.samples, DEFAULT_RUN_SAMPLES);
    let grid_cfg = ResolvedGrid::new(
        &args.grid,
        &file,
        DEFAULT_PISTON_GRID_POINTS,
        DEFAULT_PISTON_BOX_LENGTH,
        DEFAULT_PISTON_DT,
    );
    let settings = PistonSettings {
        xi0: args.xi0.unwrap_or(DEFAULT_PISTON_XI0),
        amplitude: args.amplitude.unwrap_or(DEFAULT_PISTON_AMPLITUDE),
        grid: grid_cfg.grid()?,
        dt: grid_cfg.dt,
        output_stride: grid_cfg.output_stride,
        n_samples: samples,
    };

    let dir = RunDir::create(
        output_dir(&args.output.seed_dir, "piston"),
        args.output.force,
    )?;
    dir.write_json(
        "config.json",
        &PistonConfig {
            command: "piston",
            b: exponent.to_string(),
            expansion,
            t_final,
            xi0: settings.xi0,
            amplitude: settings.amplitude,
            grid: grid_cfg,
            samples,
        },
    )?;

    let run = match piston_demo(exponent, expansion, t_final, &settings) {
        Ok(run) => run,
        Err(error) => return Err(record_failure(&dir, error)),
    };

    dir.write_text("protocol.csv", |w| {
        write_piston_protocol_csv(&run.trap, samples, w)
    })?;
    dir.write_text("observables.csv", |w| {
        run.series.write_csv(w).map_err(Error::from)
    })?;
    dir.write_json("report.json", &OkReport::new(&run.report))?;

    println!(
        "b = {}, expansion = {}: gammaF = {:.6}, fid_target = {:.6}, fid_oracle = {:.6}",
        run.report.exponent,
        run.report.expansion,
        run.report.gamma_f,
        run.report.fid_target_final,
        run.report.fid_oracle_final
    );
    println!("wrote {}", dir.path().display());
    Ok(0)
}

#[derive(Serialize)]
struct ValidateConfig {
    command: &'static str,
    quick: bool,
}

pub fn validate(args: &ValidateArgs) -> Result<i32> {
    let dir = RunDir::create(output_dir(&args.seed_dir, "validate"), args.force)?;
    dir.write_json(
        "config.json",
        &ValidateConfig {
            command: "validate",
            quick: args.quick,
        },
    )?;

    let report = validate::run_validation(args.quick);
    for check in &report.checks {
        println!("{}", check.line());
    }
    println!(
        "validation {} ({} checks, {:.1}s)",
        if report.all_passed { "PASSED" } else { "FAILED" },
        report.checks.len(),
        report.total_seconds
    );
    dir.write_json("report.json", &report)?;
    Ok(if report.all_passed { 0 } else { 3 })
}
