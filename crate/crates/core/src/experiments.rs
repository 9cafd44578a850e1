//! Canned scenario runners binding protocol synthesis to propagation:
//! drive-curve tables, CD-vs-bare fidelity sweeps, the power-law/piston
//! expansion demo, and the run-directory writer they all share.
//!
//! Everything here is deterministic: identical inputs produce bit-identical
//! CSV and JSON artifacts on a fixed platform, including sweeps dispatched
//! across multiple workers (each job's arithmetic is sequential and rows are
//! assembled in input order).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Waveform;
use crate::propagator::{
    propagate, run_cd_expansion, Drive, ObservableSeries, PowerLawOracle, Probes,
    PropagationConfig, Regime, RunSettings, Scheme, TrapSpec, DEFAULT_GROUND_TOL, DEFAULT_IMAG_DT,
};
use crate::protocol::{
    cd_frequency, powerlaw_auxiliary_coefficient, powerlaw_scaling_factor, synthesize,
    FrequencyRamp, PowerLawExponent, PowerLawTrap, WidthRamp,
};
use crate::qstate::{imaginary_time_ground_state, Grid1D, GroundStateResult, WaveFunction};

/// Default expansion durations (1/omega0): onset of the adiabatic limit,
/// moderate speed-up, ultrafast expansion. Reconstructed from the qualitative
/// regimes the curves are meant to show, not prescribed values.
pub const FIGURE1_DEFAULT_TF: [f64; 3] = [25.0, 5.0, 1.0];

/// Default sweep durations (1/omega0), spanning sudden to adiabatic.
pub const SWEEP_DEFAULT_TF: [f64; 4] = [1.0, 5.0, 25.0, 100.0];

/// Header of the per-duration drive-curve CSV export.
pub const FIGURE1_CSV_HEADER: &str = "t,omega_over_omega0,Omega2_over_omega0_sq";

/// Header of the fidelity-sweep CSV export.
pub const SWEEP_CSV_HEADER: &str = "tF,fidelity_cd,fidelity_bare,max_oracle_dev";

/// Header of the piston protocol CSV export.
pub const PISTON_PROTOCOL_CSV_HEADER: &str = "t,xi,xi_dot,xi_ddot,gamma,aux_k";

/// One sampled drive curve: the bare ramp and the CD frequency it requires,
/// both in units of omega0.
#[derive(Debug, Clone)]
pub struct Figure1Curve {
    /// Expansion duration (1/omega0).
    pub t_final: f64,
    pub times: Vec<f64>,
    /// omega(t) / omega0.
    pub omega_over_omega0: Vec<f64>,
    /// Omega^2(t) / omega0^2.
    pub omega2_over_omega0_sq: Vec<f64>,
    /// max |Omega^2 - omega^2| / omega0^2 over the samples.
    pub max_cd_gap: f64,
    /// min Omega^2 / omega0^2 over the samples.
    pub min_omega2: f64,
    /// True when the CD drive transiently inverts the trap (Omega^2 < 0).
    pub inverts_trap: bool,
}

/// Serializable per-curve summary for report files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Figure1Summary {
    #[serde(rename = "tF")]
    pub t_final: f64,
    pub max_cd_gap: f64,
    pub min_omega2: f64,
    pub inverts_trap: bool,
}

impl Figure1Curve {
    /// Report-ready summary of the curve.
    pub fn summary(&self) -> Figure1Summary {
        Figure1Summary {
            t_final: self.t_final,
            max_cd_gap: self.max_cd_gap,
            min_omega2: self.min_omega2,
            inverts_trap: self.inverts_trap,
        }
    }

    /// Write the curve as CSV with 16 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{FIGURE1_CSV_HEADER}")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e}",
                self.times[i], self.omega_over_omega0[i], self.omega2_over_omega0_sq[i],
            )?;
        }
        Ok(())
    }
}

/// Sample omega(t)/omega0 and Omega^2(t)/omega0^2 for each duration in
/// `tf_list`, for an expansion from omega0 to omega0/gamma_f^2.
pub fn figure1_curves(
    omega0: f64,
    gamma_f: f64,
    tf_list: &[f64],
    n_samples: usize,
) -> Result<Vec<Figure1Curve>> {
    if !(gamma_f > 0.0) || !gamma_f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gammaF must be positive and finite, got {gamma_f}"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "curve sampling needs at least 2 points, got {n_samples}"
        )));
    }
    if tf_list.is_empty() {
        return Err(Error::InvalidParameter("tF list is empty".into()));
    }
    let omega_f = omega0 / (gamma_f * gamma_f);
    let omega0_sq = omega0 * omega0;
    tf_list
        .iter()
        .map(|&t_final| {
            let ramp = FrequencyRamp::new(omega0, omega_f, t_final)?;
            let mut curve = Figure1Curve {
                t_final,
                times: Vec::with_capacity(n_samples),
                omega_over_omega0: Vec::with_capacity(n_samples),
                omega2_over_omega0_sq: Vec::with_capacity(n_samples),
                max_cd_gap: 0.0,
                min_omega2: f64::INFINITY,
                inverts_trap: false,
            };
            for i in 0..n_samples {
                let t = t_final * i as f64 / (n_samples - 1) as f64;
                let omega = ramp.value(t)?;
                let omega2_cd = cd_frequency(&ramp, t)?;
                curve.times.push(t);
                curve.omega_over_omega0.push(omega / omega0);
                curve.omega2_over_omega0_sq.push(omega2_cd / omega0_sq);
                curve.max_cd_gap = curve
                    .max_cd_gap
                    .max((omega2_cd - omega * omega).abs() / omega0_sq);
                curve.min_omega2 = curve.min_omega2.min(omega2_cd / omega0_sq);
            }
            curve.inverts_trap = curve.min_omega2 < 0.0;
            Ok(curve)
        })
        .collect()
}

/// Sweep configuration beyond the per-run protocol parameters.
#[derive(Debug, Clone, Copy)]
pub struct SweepSettings {
    /// Spatial dimension entering the protocol tables.
    pub dim: u32,
    /// Interaction homogeneity exponent.
    pub alpha: f64,
    /// Protocol samples per run.
    pub n_samples: usize,
    /// Simulation grid shared by all runs.
    pub grid: Grid1D,
    /// Time step and probe stride shared by all runs.
    pub run: RunSettings,
    /// Worker count; 1 keeps the sweep on the calling thread.
    pub jobs: usize,
}

/// One sweep row: CD and bare final fidelities for a duration, plus the
/// largest oracle deviation seen along the CD run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "tF")]
    pub t_final: f64,
    pub fidelity_cd: f64,
    pub fidelity_bare: f64,
    pub max_oracle_dev: f64,
}

/// Run CD and bare expansions for every duration in `tf_list` and tabulate
/// final fidelities. Rows come back in input order regardless of `jobs`.
pub fn fidelity_sweep(
    regime: Regime,
    gamma_f: f64,
    tf_list: &[f64],
    g0: f64,
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    if !(gamma_f > 0.0) || !gamma_f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gammaF must be positive and finite, got {gamma_f}"
        )));
    }
    if tf_list.is_empty() {
        return Err(Error::InvalidParameter("tF list is empty".into()));
    }
    let one_row = |&t_final: &f64| -> Result<SweepRow> {
        let omega_f = 1.0 / (gamma_f * gamma_f);
        let ramp = FrequencyRamp::new(1.0, omega_f, t_final)?;
        let protocol = synthesize(&ramp, settings.dim, settings.alpha, settings.n_samples)?;
        let cd = run_cd_expansion(&protocol, regime, Drive::Cd, g0, &settings.grid, &settings.run)?;
        let bare =
            run_cd_expansion(&protocol, regime, Drive::Bare, g0, &settings.grid, &settings.run)?;
        Ok(SweepRow {
            t_final,
            fidelity_cd: cd.report.fid_target_final,
            fidelity_bare: bare.report.fid_target_final,
            max_oracle_dev: cd.report.max_oracle_l2,
        })
    };
    if settings.jobs <= 1 {
        tf_list.iter().map(one_row).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        pool.install(|| tf_list.par_iter().map(one_row).collect())
    }
}

/// Write sweep rows as CSV with 16 significant digits per value.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{:.15e},{:.15e},{:.15e},{:.15e}",
            row.t_final, row.fidelity_cd, row.fidelity_bare, row.max_oracle_dev,
        )?;
    }
    Ok(())
}

/// Numerical knobs of the piston/power-law demo.
#[derive(Debug, Clone, Copy)]
pub struct PistonSettings {
    /// Initial trap width (oscillator lengths).
    pub xi0: f64,
    /// Trap amplitude A in U = A |q/xi|^b; 1/2 makes b = 2 the unit trap.
    pub amplitude: f64,
    pub grid: Grid1D,
    /// Time step (1/omega0).
    pub dt: f64,
    /// Probe stride; 0 selects about 200 probes.
    pub output_stride: usize,
    /// Samples of the auxiliary-coefficient waveform.
    pub n_samples: usize,
}

impl Default for PistonSettings {
    fn default() -> Self {
        PistonSettings {
            xi0: 1.0,
            amplitude: 0.5,
            grid: Grid1D::new(512, 20.0).expect("valid default grid"),
            dt: 5e-4,
            output_stride: 0,
            n_samples: 4001,
        }
    }
}

/// Summary of one piston/power-law expansion, JSON-exportable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PistonReport {
    /// Trap exponent b, or "piston" for the hard-wall limit.
    pub exponent: String,
    /// Width ratio xi(tF)/xi(0).
    pub expansion: f64,
    #[serde(rename = "tF")]
    pub t_final: f64,
    pub xi0: f64,
    pub amplitude: f64,
    pub grid_points: usize,
    pub box_length: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub output_stride: usize,
    pub n_probes: usize,
    /// Analytic scaling factor [xi(tF)/xi(0)]^(b/(b+2)).
    #[serde(rename = "gammaF")]
    pub gamma_f: f64,
    /// Auxiliary coefficient at t = 0 (0 by construction).
    pub aux_k0: f64,
    /// Auxiliary coefficient at t = tF (0 by construction).
    pub aux_kf: f64,
    pub mu0: f64,
    pub energy0: f64,
    pub mu_target: f64,
    pub fid_target_final: f64,
    pub fid_oracle_final: f64,
    pub max_oracle_l2: f64,
    pub max_norm_drift: f64,
    pub runtime_seconds: f64,
}

/// Everything produced by one piston/power-law demo run.
pub struct PistonRun {
    pub report: PistonReport,
    pub series: ObservableSeries,
    pub final_state: WaveFunction,
    pub initial: GroundStateResult,
    pub target: WaveFunction,
    pub trap: PowerLawTrap,
}

/// Expand a power-law trap U = A |q/xi(t)|^b by `expansion` over `t_final`
/// with the CD auxiliary q^2 potential, and report fidelity against the
/// numerically relaxed target ground state.
pub fn piston_demo(
    exponent: PowerLawExponent,
    expansion: f64,
    t_final: f64,
    settings: &PistonSettings,
) -> Result<PistonRun> {
    let start = Instant::now();
    match exponent {
        PowerLawExponent::Finite(b) => {
            if !(b >= 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "power-law exponent must satisfy b >= 2, got {b}"
                )));
            }
        }
        // A discontinuous wall has no spectrally convergent ground state,
        // so relaxation can never meet its residual tolerance; the limit
        // enters analytically (auxiliary coefficient gap 2/(b+2)).
        PowerLawExponent::Piston => {
            return Err(Error::Domain(
                "the hard-wall piston is the b -> infinity limit and enters analytically; \
                 the propagated demo needs a finite b (the auxiliary coefficient approaches \
                 the piston value like 2/(b+2))"
                    .into(),
            ));
        }
    }
    if !(expansion > 0.0) || !expansion.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "expansion ratio must be positive and finite, got {expansion}"
        )));
    }
    if settings.n_samples < 4 {
        return Err(Error::InvalidParameter(format!(
            "auxiliary waveform needs at least 4 samples, got {}",
            settings.n_samples
        )));
    }
    let width = WidthRamp::new(settings.xi0, settings.xi0 * expansion, t_final)?;
    let trap = PowerLawTrap::new(exponent, settings.amplitude, width)?;
    let aux_samples: Vec<f64> = (0..settings.n_samples)
        .map(|i| {
            let t = t_final * i as f64 / (settings.n_samples - 1) as f64;
            powerlaw_auxiliary_coefficient(&trap, t)
        })
        .collect::<Result<_>>()?;
    let aux = Waveform::from_samples(aux_samples, t_final)?;

    // Frozen-width copies of the trap for the endpoint ground states.
    let static_trap = |xi: f64| -> Result<TrapSpec> {
        let frozen = WidthRamp::new(xi, xi, t_final)?;
        Ok(TrapSpec::PowerLaw {
            trap: PowerLawTrap::new(exponent, settings.amplitude, frozen)?,
            aux: Waveform::constant(0.0),
        })
    };
    let initial = imaginary_time_ground_state(
        &settings.grid,
        &static_trap(settings.xi0)?,
        0.0,
        DEFAULT_IMAG_DT,
        DEFAULT_GROUND_TOL,
    )?;
    let target = imaginary_time_ground_state(
        &settings.grid,
        &static_trap(settings.xi0 * expansion)?,
        0.0,
        DEFAULT_IMAG_DT,
        DEFAULT_GROUND_TOL,
    )?;

    let n_steps = ((t_final / settings.dt).round() as usize).max(1);
    let run = RunSettings {
        dt: settings.dt,
        output_stride: settings.output_stride,
    };
    let output_stride = run.resolve_stride(n_steps);
    let config = PropagationConfig {
        dt: settings.dt,
        n_steps,
        output_stride,
        coupling: Waveform::constant(0.0),
        scheme: Scheme::StrangSplitStep,
    };
    let drive = TrapSpec::PowerLaw { trap, aux };
    let oracle = PowerLawOracle::new(&initial.state, &trap, initial.mu);
    let probes = Probes {
        target: Some(&target.state),
        oracle: Some(&oracle),
    };
    let (final_state, series) = propagate(&initial.state, &drive, &config, &probes)?;

    let report = PistonReport {
        exponent: exponent.to_string(),
        expansion,
        t_final,
        xi0: settings.xi0,
        amplitude: settings.amplitude,
        grid_points: settings.grid.n_points(),
        box_length: settings.grid.length(),
        dt: settings.dt,
        n_steps,
        output_stride,
        n_probes: series.len(),
        gamma_f: powerlaw_scaling_factor(&trap, t_final)?,
        aux_k0: powerlaw_auxiliary_coefficient(&trap, 0.0)?,
        aux_kf: powerlaw_auxiliary_coefficient(&trap, t_final)?,
        mu0: initial.mu,
        energy0: initial.energy,
        mu_target: target.mu,
        fid_target_final: *series.fid_target.last().unwrap_or(&f64::NAN),
        fid_oracle_final: *series.fid_oracle.last().unwrap_or(&f64::NAN),
        max_oracle_l2: series.max_oracle_l2,
        max_norm_drift: series.max_norm_drift,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(PistonRun {
        report,
        series,
        final_state,
        initial,
        target: target.state,
        trap,
    })
}

/// Write the piston width trajectory and derived quantities as CSV.
pub fn write_piston_protocol_csv<W: Write>(
    trap: &PowerLawTrap,
    n_samples: usize,
    mut out: W,
) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "protocol export needs at least 2 samples, got {n_samples}"
        )));
    }
    let t_final = trap.width().t_final();
    writeln!(out, "{PISTON_PROTOCOL_CSV_HEADER}")?;
    for i in 0..n_samples {
        let t = t_final * i as f64 / (n_samples - 1) as f64;
        let (xi, xi_dot, xi_ddot) = trap.width().derivatives(t)?;
        writeln!(
            out,
            "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            t,
            xi,
            xi_dot,
            xi_ddot,
            powerlaw_scaling_factor(trap, t)?,
            powerlaw_auxiliary_coefficient(trap, t)?,
        )?;
    }
    Ok(())
}

/// A scenario output directory: `config.json`, `protocol.csv`,
/// `observables.csv`, `report.json`, optional `snapshots/`.
///
/// Creation refuses to reuse a non-empty directory unless forced, so stale
/// artifacts can never masquerade as fresh results.
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    /// Create (or reuse, when `force` or empty) the directory at `path`.
    pub fn create(path: impl AsRef<Path>, force: bool) -> Result<Self> {
        let root = path.as_ref().to_path_buf();
        if root.exists() {
            if fs::read_dir(&root)?.next().is_some() && !force {
                return Err(Error::Overwrite(root.display().to_string()));
            }
        } else {
            fs::create_dir_all(&root)?;
        }
        Ok(RunDir { root })
    }

    /// Directory path.
    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Serialize `value` as pretty JSON into `name`.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let file = fs::File::create(self.root.join(name))?;
        let mut writer = io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, value).map_err(io::Error::from)?;
        writeln!(writer)?;
        writer.flush()?;
        Ok(())
    }

    /// Stream a text artifact into `name` through `fill`.
    pub fn write_text<F>(&self, name: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let file = fs::File::create(self.root.join(name))?;
        let mut writer = io::BufWriter::new(file);
        fill(&mut writer)?;
        writer.flush()?;
        Ok(())
    }

    /// Create (if needed) and return the subdirectory `name`.
    pub fn subdir(&self, name: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::create_dir_all(&path)?;
        Ok(path)
    }
}
