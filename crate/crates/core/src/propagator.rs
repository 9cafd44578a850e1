//! Split-step spectral propagation of the 1D time-dependent Schroedinger
//! and Gross-Pitaevskii equations, plus the analytic scaling oracles and the
//! canned CD-expansion runner.
//!
//! The stepper is Strang splitting: half potential, full kinetic, half
//! potential, with each potential half evaluated at its own substep midpoint
//! (t + dt/4 and t + 3dt/4), which keeps second order for time-dependent
//! drives. The nonlinear term freezes |psi|^2 within each half step; that
//! flow is exact for the norm-preserving real-time phase factor.
//! Instability is detected, not silently corrected: norm drift or edge
//! density beyond thresholds aborts with diagnostics, since negative-Omega^2
//! phases legitimately stretch the state and clamping would mask
//! configuration errors.

use std::io::{self, Write};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Waveform;
use crate::protocol::{rescaled_time, scaling_factor, DrivingProtocol, PowerLawTrap};
use crate::qstate::{
    fidelity, harmonic_eigenstate, imaginary_time_ground_state, observables_core, scale_state,
    thomas_fermi_mu, apply_quadratic_phase, GroundStateResult, Grid1D, WaveFunction,
};
pub use crate::qstate::TrapSpec;
use crate::spectral::Spectral;

/// Stability guard: dt times the largest trap frequency must stay below
/// this bound.
const STABILITY_DT_OMEGA: f64 = 0.1;
/// Tolerated deviation of a probed norm from 1 before aborting.
const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Default imaginary-time step for ground-state preparation.
pub const DEFAULT_IMAG_DT: f64 = 2e-2;
/// Default residual tolerance for ground-state preparation.
pub const DEFAULT_GROUND_TOL: f64 = 1e-8;

/// Interaction regime of an expansion run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Single-particle Schroedinger dynamics, g = 0.
    Linear,
    /// Gross-Pitaevskii dynamics with the coupling tuned as g0 gamma^(D-2).
    Gpe,
    /// Thomas-Fermi regime driven by Omega_TF^2 at constant coupling.
    GpeTf,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Regime::Linear),
            "gpe" => Ok(Regime::Gpe),
            "gpe_tf" => Ok(Regime::GpeTf),
            other => Err(Error::InvalidParameter(format!(
                "regime must be linear, gpe, or gpe_tf, got '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Linear => "linear",
            Regime::Gpe => "gpe",
            Regime::GpeTf => "gpe_tf",
        })
    }
}

/// Trap drive selection of an expansion run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Counter-diabatic squared frequency (the TF variant in the TF regime).
    Cd,
    /// The bare ramp omega^2(t), for contrast.
    Bare,
}

impl std::str::FromStr for Drive {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cd" => Ok(Drive::Cd),
            "bare" => Ok(Drive::Bare),
            other => Err(Error::InvalidParameter(format!(
                "drive must be cd or bare, got '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Drive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Drive::Cd => "cd",
            Drive::Bare => "bare",
        })
    }
}

/// Numerical scheme of the propagator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    StrangSplitStep,
}

/// Time-stepping configuration for one propagation run.
#[derive(Debug, Clone)]
pub struct PropagationConfig {
    /// Time step (1/omega0).
    pub dt: f64,
    /// Number of steps; the run covers [0, n_steps * dt].
    pub n_steps: usize,
    /// Steps between observable probes.
    pub output_stride: usize,
    /// Coupling g(t).
    pub coupling: Waveform,
    /// Splitting scheme.
    pub scheme: Scheme,
}

impl PropagationConfig {
    /// Validate the configuration against the trap it will drive.
    pub fn validate(&self, trap: &TrapSpec) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidParameter(
                "output_stride must be at least 1".into(),
            ));
        }
        let omega_scale = match trap {
            TrapSpec::Harmonic { omega_sq } => omega_sq.max_abs().sqrt(),
            TrapSpec::PowerLaw { aux, .. } => (2.0 * aux.max_abs()).sqrt(),
            TrapSpec::Free => 0.0,
        };
        if self.dt * omega_scale > STABILITY_DT_OMEGA * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "stability guard violated: dt * max|Omega| = {:.3e} exceeds {STABILITY_DT_OMEGA}",
                self.dt * omega_scale
            )));
        }
        let horizon = self.n_steps as f64 * self.dt;
        let drive_end = match trap {
            TrapSpec::Harmonic { omega_sq } => omega_sq.t_end(),
            TrapSpec::PowerLaw { trap, .. } => Some(trap.width().t_final()),
            TrapSpec::Free => None,
        };
        if let Some(t_end) = drive_end {
            if (horizon - t_end).abs() > self.dt * (1.0 + 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "n_steps * dt = {horizon} must match the drive duration {t_end} within one dt"
                )));
            }
        }
        Ok(())
    }
}

/// Anything that can produce the analytic reference state at a probe time.
pub trait OracleStates {
    fn state_at(&self, t: f64) -> Result<WaveFunction>;
}

/// Reference states to compare against at each probe.
#[derive(Default)]
pub struct Probes<'a> {
    /// Ground state of the final trap; fidelity recorded as `fid_target`.
    pub target: Option<&'a WaveFunction>,
    /// Analytic scaling oracle; fidelity and L2 distance recorded.
    pub oracle: Option<&'a dyn OracleStates>,
}

impl<'a> Probes<'a> {
    /// No reference states.
    pub fn none() -> Self {
        Probes::default()
    }
}

/// Header of the observable-series CSV export.
pub const OBSERVABLES_CSV_HEADER: &str = "t,norm,x2,energy,fid_target,fid_oracle,gamma_measured";

/// Time series of probed observables. Columns without a configured
/// reference hold NaN.
#[derive(Debug, Clone, Default)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub x2: Vec<f64>,
    pub energy: Vec<f64>,
    pub fid_target: Vec<f64>,
    pub fid_oracle: Vec<f64>,
    pub gamma_measured: Vec<f64>,
    /// L2 distance to the oracle per probe (NaN without an oracle).
    pub oracle_l2: Vec<f64>,
    /// Largest |norm - 1| seen at any probe.
    pub max_norm_drift: f64,
    /// Largest oracle L2 distance seen (NaN without an oracle).
    pub max_oracle_l2: f64,
}

impl ObservableSeries {
    /// Number of probes recorded.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// True when no probe has been recorded.
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Write the series as CSV with 16 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{OBSERVABLES_CSV_HEADER}")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                self.times[i],
                self.norm[i],
                self.x2[i],
                self.energy[i],
                self.fid_target[i],
                self.fid_oracle[i],
                self.gamma_measured[i],
            )?;
        }
        Ok(())
    }
}

/// Strang-split propagation of `psi0` under `trap` with coupling
/// `config.coupling`; returns the final state and the probed series.
///
/// Probes run at t = 0, every `output_stride` steps, and at the final step.
pub fn propagate(
    psi0: &WaveFunction,
    trap: &TrapSpec,
    config: &PropagationConfig,
    probes: &Probes,
) -> Result<(WaveFunction, ObservableSeries)> {
    config.validate(trap)?;
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized, norm = {norm0}"
        )));
    }
    let grid = psi0.grid;
    let n = grid.n_points();
    let dt = config.dt;
    let mut spectral = Spectral::new(n, grid.dx());
    let kinetic_full: Vec<Complex64> = spectral
        .kinetic_factors()
        .iter()
        .map(|k2| Complex64::from_polar(1.0, -dt * k2))
        .collect();
    let mut psi = psi0.clone();
    psi.time_stamp = 0.0;
    let mut vbuf = vec![0.0; n];
    let mut probe_vbuf = vec![0.0; n];
    let mut series = ObservableSeries {
        max_oracle_l2: if probes.oracle.is_some() {
            0.0
        } else {
            f64::NAN
        },
        ..ObservableSeries::default()
    };
    let mut x2_origin = None;

    record_probe(
        &mut series,
        &mut x2_origin,
        &psi,
        trap,
        config,
        probes,
        &mut spectral,
        &mut probe_vbuf,
    )?;

    for step in 0..config.n_steps {
        let t = step as f64 * dt;
        half_potential_step(&mut psi, trap, config, t + 0.25 * dt, &mut vbuf);
        spectral.forward(&mut psi.amplitudes);
        for (a, k) in psi.amplitudes.iter_mut().zip(kinetic_full.iter()) {
            *a *= k;
        }
        spectral.inverse(&mut psi.amplitudes);
        half_potential_step(&mut psi, trap, config, t + 0.75 * dt, &mut vbuf);

        let done = step + 1 == config.n_steps;
        psi.time_stamp = if done {
            config.n_steps as f64 * dt
        } else {
            (step + 1) as f64 * dt
        };
        if (step + 1) % config.output_stride == 0 || done {
            record_probe(
                &mut series,
                &mut x2_origin,
                &psi,
                trap,
                config,
                probes,
                &mut spectral,
                &mut probe_vbuf,
            )?;
        }
    }
    Ok((psi, series))
}

/// Apply exp(-i (dt/2) (V(q, t_sub) + g(t_sub) |psi|^2)) pointwise.
fn half_potential_step(
    psi: &mut WaveFunction,
    trap: &TrapSpec,
    config: &PropagationConfig,
    t_sub: f64,
    vbuf: &mut [f64],
) {
    trap.potential_into(&psi.grid, t_sub, vbuf);
    let g = config.coupling.eval(t_sub);
    let half_dt = 0.5 * config.dt;
    if g == 0.0 {
        for (a, v) in psi.amplitudes.iter_mut().zip(vbuf.iter()) {
            *a *= Complex64::from_polar(1.0, -half_dt * v);
        }
    } else {
        for (a, v) in psi.amplitudes.iter_mut().zip(vbuf.iter()) {
            let density = a.norm_sqr();
            *a *= Complex64::from_polar(1.0, -half_dt * (v + g * density));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn record_probe(
    series: &mut ObservableSeries,
    x2_origin: &mut Option<f64>,
    psi: &WaveFunction,
    trap: &TrapSpec,
    config: &PropagationConfig,
    probes: &Probes,
    spectral: &mut Spectral,
    vbuf: &mut [f64],
) -> Result<()> {
    let t = psi.time_stamp;
    psi.check_support()?;
    trap.potential_into(&psi.grid, t, vbuf);
    let obs = observables_core(psi, vbuf, config.coupling.eval(t), spectral);
    let drift = (obs.norm - 1.0).abs();
    if drift > NORM_DRIFT_LIMIT {
        return Err(Error::Instability(format!(
            "norm drifted to {} at t = {t}",
            obs.norm
        )));
    }
    series.max_norm_drift = series.max_norm_drift.max(drift);
    let x2_0 = *x2_origin.get_or_insert(obs.x2);
    let fid_target = match probes.target {
        Some(target) => fidelity(psi, target)?,
        None => f64::NAN,
    };
    let (fid_oracle, oracle_l2) = match probes.oracle {
        Some(oracle) => {
            let reference = oracle.state_at(t)?;
            let fid = fidelity(psi, &reference)?;
            let l2 = l2_distance(psi, &reference)?;
            series.max_oracle_l2 = series.max_oracle_l2.max(l2);
            (fid, l2)
        }
        None => (f64::NAN, f64::NAN),
    };
    series.times.push(t);
    series.norm.push(obs.norm);
    series.x2.push(obs.x2);
    series.energy.push(obs.energy);
    series.fid_target.push(fid_target);
    series.fid_oracle.push(fid_oracle);
    series.gamma_measured.push((obs.x2 / x2_0).sqrt());
    series.oracle_l2.push(oracle_l2);
    Ok(())
}

/// L2 distance sqrt(sum |a_j - b_j|^2 dx) between same-grid states.
pub fn l2_distance(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(
            "L2 distance between different grids".into(),
        ));
    }
    let sum: f64 = a
        .amplitudes
        .iter()
        .zip(b.amplitudes.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((sum * a.grid.dx()).sqrt())
}

/// Analytic scaling-law oracle for harmonic protocols:
/// Psi(q, t) = gamma^(-1/2) exp(-i mu tau(t)) exp(-i (omega_dot/(4 omega)) q^2)
///             psi0(q / gamma).
pub struct ScalingOracle<'a> {
    psi0: &'a WaveFunction,
    protocol: &'a DrivingProtocol,
    mu: f64,
    tau_exponent: f64,
}

impl<'a> ScalingOracle<'a> {
    /// Oracle anchored at the t = 0 state `psi0` with chemical potential
    /// `mu`; `tau_exponent` is 2 for standard dynamics and D for the TF
    /// regime.
    pub fn new(
        psi0: &'a WaveFunction,
        protocol: &'a DrivingProtocol,
        mu: f64,
        tau_exponent: f64,
    ) -> Self {
        ScalingOracle {
            psi0,
            protocol,
            mu,
            tau_exponent,
        }
    }
}

impl OracleStates for ScalingOracle<'_> {
    fn state_at(&self, t: f64) -> Result<WaveFunction> {
        let ramp = self.protocol.ramp();
        let (omega, omega_dot, _) = ramp.derivatives(t)?;
        let gamma = scaling_factor(ramp, t)?;
        let tau = rescaled_time(ramp, t, self.tau_exponent)?;
        let scaled = scale_state(self.psi0, gamma, self.mu, tau)?;
        // Berry phase written through gamma: gamma_dot/(2 gamma) =
        // -omega_dot/(4 omega).
        let mut out = apply_quadratic_phase(&scaled, -0.25 * omega_dot / omega);
        out.time_stamp = t;
        Ok(out)
    }
}

/// Scaling oracle for power-law traps: the same ansatz with
/// gamma(t) = [xi/xi0]^(b/(b+2)) and phase coefficient gamma_dot/(2 gamma).
pub struct PowerLawOracle<'a> {
    psi0: &'a WaveFunction,
    trap: &'a PowerLawTrap,
    mu: f64,
}

impl<'a> PowerLawOracle<'a> {
    /// Oracle anchored at the t = 0 state `psi0` with chemical potential `mu`.
    pub fn new(psi0: &'a WaveFunction, trap: &'a PowerLawTrap, mu: f64) -> Self {
        PowerLawOracle { psi0, trap, mu }
    }
}

impl OracleStates for PowerLawOracle<'_> {
    fn state_at(&self, t: f64) -> Result<WaveFunction> {
        let gamma = crate::protocol::powerlaw_scaling_factor(self.trap, t)?;
        let tau = crate::protocol::powerlaw_rescaled_time(self.trap, t)?;
        let (xi, xi_dot, _) = self.trap.width().derivatives(t)?;
        let ratio = self.trap.exponent().exponent_ratio();
        let scaled = scale_state(self.psi0, gamma, self.mu, tau)?;
        let mut out = apply_quadratic_phase(&scaled, 0.5 * ratio * xi_dot / xi);
        out.time_stamp = t;
        Ok(out)
    }
}

/// Deviation between an evolved state and the analytic oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDeviation {
    pub l2_distance: f64,
    pub fidelity: f64,
}

/// Compare `psi_t` against the scaling+Berry-phase oracle built from `psi0`
/// at time `t` (standard rescaled time, exponent 2).
pub fn oracle_compare(
    psi_t: &WaveFunction,
    psi0: &WaveFunction,
    protocol: &DrivingProtocol,
    t: f64,
    mu: f64,
) -> Result<OracleDeviation> {
    let oracle = ScalingOracle::new(psi0, protocol, mu, 2.0);
    let reference = oracle.state_at(t)?;
    Ok(OracleDeviation {
        l2_distance: l2_distance(psi_t, &reference)?,
        fidelity: fidelity(psi_t, &reference)?,
    })
}

/// Knobs of [`run_cd_expansion`] beyond the protocol itself.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    /// Time step (1/omega0).
    pub dt: f64,
    /// Probe stride; 0 selects about 200 probes across the run.
    pub output_stride: usize,
}

impl RunSettings {
    /// Default stride: about 200 probes per run, at least one per step.
    pub fn resolve_stride(&self, n_steps: usize) -> usize {
        if self.output_stride > 0 {
            self.output_stride
        } else {
            (n_steps / 200).max(1)
        }
    }
}

/// Summary of one expansion run, JSON-exportable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub regime: Regime,
    pub drive: Drive,
    pub omega0: f64,
    #[serde(rename = "omegaF")]
    pub omega_f: f64,
    #[serde(rename = "gammaF")]
    pub gamma_f: f64,
    #[serde(rename = "tF")]
    pub t_final: f64,
    pub dim: u32,
    pub alpha: f64,
    pub g0: f64,
    pub n_samples: usize,
    pub grid_points: usize,
    pub box_length: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub output_stride: usize,
    pub n_probes: usize,
    pub mu0: f64,
    pub energy0: f64,
    pub mu_target: f64,
    pub fid_target_final: f64,
    pub fid_oracle_final: f64,
    pub max_oracle_l2: f64,
    pub max_norm_drift: f64,
    pub gamma_measured_final: f64,
    pub gamma_expected_final: f64,
    pub max_gamma_rel_error: f64,
    /// Relative L2 error of the final density against the gamma-scaled TF
    /// profile; only set in the TF regime.
    pub tf_density_l2_error: Option<f64>,
    pub runtime_seconds: f64,
}

/// Everything produced by one expansion run.
pub struct ExpansionRun {
    pub report: ExpansionReport,
    pub series: ObservableSeries,
    pub final_state: WaveFunction,
    pub initial: GroundStateResult,
    pub target: WaveFunction,
}

/// Prepare the ground state, select the drive for `regime`/`drive`,
/// propagate over the protocol window, and report fidelities against the
/// final-trap target and the analytic scaling oracle.
pub fn run_cd_expansion(
    protocol: &DrivingProtocol,
    regime: Regime,
    drive: Drive,
    g0: f64,
    grid: &Grid1D,
    settings: &RunSettings,
) -> Result<ExpansionRun> {
    let start = Instant::now();
    match regime {
        Regime::Linear => {
            if g0 != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "linear regime requires g0 = 0, got {g0}"
                )));
            }
        }
        Regime::Gpe => {
            if g0 < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "gpe regime requires g0 >= 0, got {g0}"
                )));
            }
        }
        Regime::GpeTf => {
            if !(g0 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gpe_tf regime requires repulsive g0 > 0, got {g0}"
                )));
            }
        }
    }
    let ramp = protocol.ramp();
    let t_final = protocol.t_final();
    let n_steps = ((t_final / settings.dt).round() as usize).max(1);
    let output_stride = settings.resolve_stride(n_steps);

    // Initial interacting ground state in the static trap omega0^2.
    let initial = imaginary_time_ground_state(
        grid,
        &TrapSpec::static_harmonic(ramp.omega0() * ramp.omega0()),
        g0,
        DEFAULT_IMAG_DT,
        DEFAULT_GROUND_TOL,
    )?;

    let drive_waveform = match (drive, regime) {
        (Drive::Bare, _) => protocol.omega_squared_waveform(),
        (Drive::Cd, Regime::Linear | Regime::Gpe) => protocol.cd_waveform(),
        (Drive::Cd, Regime::GpeTf) => protocol.tf_waveform(),
    };
    let coupling = match regime {
        Regime::Linear => Waveform::constant(0.0),
        // "Without tuning the interaction strength": constant g in the TF
        // regime; the consistency condition g0 gamma^(D-2) otherwise.
        Regime::GpeTf => Waveform::constant(g0),
        Regime::Gpe => Waveform::from_samples(
            protocol.g_ratio().iter().map(|r| g0 * r).collect(),
            t_final,
        )?,
    };

    // Target: ground state of the trap value actually applied at tF.
    let trap_final = drive_waveform.eval(t_final);
    let g_final = coupling.eval(t_final);
    let (target, mu_target) = if g_final == 0.0 {
        if !(trap_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final trap curvature {trap_final} is not confining"
            )));
        }
        let omega = trap_final.sqrt();
        (harmonic_eigenstate(grid, 0, omega)?, 0.5 * omega)
    } else {
        let ground = imaginary_time_ground_state(
            grid,
            &TrapSpec::static_harmonic(trap_final),
            g_final,
            DEFAULT_IMAG_DT,
            DEFAULT_GROUND_TOL,
        )?;
        (ground.state, ground.mu)
    };

    let tau_exponent = match regime {
        Regime::GpeTf => protocol.dim() as f64,
        _ => 2.0,
    };
    let oracle = ScalingOracle::new(&initial.state, protocol, initial.mu, tau_exponent);
    let trap = TrapSpec::Harmonic {
        omega_sq: drive_waveform,
    };
    let config = PropagationConfig {
        dt: settings.dt,
        n_steps,
        output_stride,
        coupling,
        scheme: Scheme::StrangSplitStep,
    };
    let probes = Probes {
        target: Some(&target),
        oracle: Some(&oracle),
    };
    let (final_state, series) = propagate(&initial.state, &trap, &config, &probes)?;

    // Measured vs analytic scaling factor across the probes.
    let mut max_gamma_rel_error = 0.0_f64;
    for (i, &t) in series.times.iter().enumerate() {
        let expected = scaling_factor(ramp, t.min(t_final))?;
        max_gamma_rel_error =
            max_gamma_rel_error.max((series.gamma_measured[i] - expected).abs() / expected);
    }
    let gamma_expected_final = scaling_factor(ramp, t_final)?;

    let tf_density_l2_error = if regime == Regime::GpeTf {
        Some(tf_scaled_density_error(
            &final_state,
            ramp.omega0(),
            g0,
            gamma_expected_final,
        ))
    } else {
        None
    };

    let report = ExpansionReport {
        regime,
        drive,
        omega0: ramp.omega0(),
        omega_f: ramp.omega_f(),
        gamma_f: gamma_expected_final,
        t_final,
        dim: protocol.dim(),
        alpha: protocol.alpha(),
        g0,
        n_samples: protocol.n_samples(),
        grid_points: grid.n_points(),
        box_length: grid.length(),
        dt: settings.dt,
        n_steps,
        output_stride,
        n_probes: series.len(),
        mu0: initial.mu,
        energy0: initial.energy,
        mu_target,
        fid_target_final: *series.fid_target.last().unwrap_or(&f64::NAN),
        fid_oracle_final: *series.fid_oracle.last().unwrap_or(&f64::NAN),
        max_oracle_l2: series.max_oracle_l2,
        max_norm_drift: series.max_norm_drift,
        gamma_measured_final: *series.gamma_measured.last().unwrap_or(&f64::NAN),
        gamma_expected_final,
        max_gamma_rel_error,
        tf_density_l2_error,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(ExpansionRun {
        report,
        series,
        final_state,
        initial,
        target,
    })
}

/// Relative L2 error of |psi|^2 against the gamma-scaled TF density
/// n(q) = max(mu0/gamma - (1/2)(omega0^2/gamma^3) q^2, 0) / g0, which is the
/// initial TF profile transported by the scaling dynamics.
fn tf_scaled_density_error(psi: &WaveFunction, omega0: f64, g0: f64, gamma: f64) -> f64 {
    let mu0 = thomas_fermi_mu(omega0, g0, 1.0);
    let curvature = 0.5 * omega0 * omega0 / (gamma * gamma * gamma);
    let mut diff2 = 0.0;
    let mut ref2 = 0.0;
    for (j, a) in psi.amplitudes.iter().enumerate() {
        let q = psi.grid.position(j);
        let reference = ((mu0 / gamma - curvature * q * q) / g0).max(0.0);
        let measured = a.norm_sqr();
        diff2 += (measured - reference) * (measured - reference);
        ref2 += reference * reference;
    }
    (diff2 / ref2).sqrt()
}
