//! Closed-form synthesis of driving protocols: frequency ramps, scaling
//! factors, counter-diabatic frequencies, interaction schedules, and
//! power-law auxiliary potentials.
//!
//! Everything here is a pure function of immutable inputs. Natural units
//! hbar = m = 1 throughout; frequencies in units of omega0, times in
//! 1/omega0. A negative squared CD frequency (transient trap inversion) is
//! a legal output, never clamped.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Waveform;

/// Quintic blend rising 0 -> 1 on s in [0, 1] with vanishing first and
/// second derivatives at both ends.
fn blend(s: f64) -> f64 {
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// First derivative of [`blend`] with respect to s.
fn blend_d1(s: f64) -> f64 {
    let e = 1.0 - s;
    30.0 * s * s * e * e
}

/// Second derivative of [`blend`] with respect to s.
fn blend_d2(s: f64) -> f64 {
    60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
}

/// Smooth trap-frequency ramp omega(t) on `[0, t_final]`.
///
/// The ramp is the quintic interpolant between `omega0` and `omega_f`; its
/// first and second derivatives vanish at both ends, which forces the CD
/// frequency to match the bare trap exactly at the endpoints. The quintic
/// blend is monotone, so omega stays between its endpoint values and in
/// particular strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyRamp {
    omega0: f64,
    omega_f: f64,
    t_final: f64,
}

impl FrequencyRamp {
    /// Build a ramp; all three parameters must be positive.
    pub fn new(omega0: f64, omega_f: f64, t_final: f64) -> Result<Self> {
        if !(omega0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        if !(omega_f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omegaF must be positive, got {omega_f}"
            )));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tF must be positive, got {t_final}"
            )));
        }
        Ok(FrequencyRamp {
            omega0,
            omega_f,
            t_final,
        })
    }

    /// Initial frequency omega0.
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Final frequency omegaF.
    pub fn omega_f(&self) -> f64 {
        self.omega_f
    }

    /// Ramp duration tF.
    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Total frequency change omegaF - omega0.
    pub fn delta(&self) -> f64 {
        self.omega_f - self.omega0
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.t_final).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} outside ramp window [0, {}]",
                self.t_final
            )))
        }
    }

    /// omega(t).
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.omega0 + self.delta() * blend(t / self.t_final))
    }

    /// (omega, d(omega)/dt, d2(omega)/dt2) at `t`, from the differentiated
    /// quintic coefficients rather than finite differences.
    pub fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check_time(t)?;
        let s = t / self.t_final;
        let d = self.delta();
        Ok((
            self.omega0 + d * blend(s),
            d * blend_d1(s) / self.t_final,
            d * blend_d2(s) / (self.t_final * self.t_final),
        ))
    }
}

/// Quintic ramp constructor; see [`FrequencyRamp`].
pub fn polynomial_ramp(omega0: f64, omega_f: f64, t_final: f64) -> Result<FrequencyRamp> {
    FrequencyRamp::new(omega0, omega_f, t_final)
}

/// Ramp value and analytic derivatives at `t`; see [`FrequencyRamp::derivatives`].
pub fn ramp_derivatives(ramp: &FrequencyRamp, t: f64) -> Result<(f64, f64, f64)> {
    ramp.derivatives(t)
}

/// Adiabatic scaling factor gamma(t) = sqrt(omega0 / omega(t)).
pub fn scaling_factor(ramp: &FrequencyRamp, t: f64) -> Result<f64> {
    let omega = ramp.value(t)?;
    if omega <= 0.0 {
        return Err(Error::Domain(format!(
            "omega(t) = {omega} <= 0: scaling factor undefined"
        )));
    }
    Ok((ramp.omega0() / omega).sqrt())
}

/// Scaling factor and its time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub gamma: f64,
    pub gamma_dot: f64,
    pub gamma_ddot: f64,
}

/// gamma, gamma_dot, gamma_ddot at `t`, by the chain rule on the ramp
/// derivatives: gamma_dot = -(gamma/2)(omega_dot/omega) and
/// gamma_ddot/gamma = (3/4)(omega_dot/omega)^2 - (1/2)(omega_ddot/omega).
pub fn scaling_derivatives(ramp: &FrequencyRamp, t: f64) -> Result<ScalingPoint> {
    let (omega, omega_dot, omega_ddot) = ramp.derivatives(t)?;
    if omega <= 0.0 {
        return Err(Error::Domain(format!(
            "omega(t) = {omega} <= 0: scaling factor undefined"
        )));
    }
    let gamma = (ramp.omega0() / omega).sqrt();
    let r1 = omega_dot / omega;
    let r2 = omega_ddot / omega;
    Ok(ScalingPoint {
        gamma,
        gamma_dot: -0.5 * gamma * r1,
        gamma_ddot: gamma * (0.75 * r1 * r1 - 0.5 * r2),
    })
}

/// Relative tolerance for the rescaled-time quadrature.
const TAU_REL_TOL: f64 = 1e-9;

/// Nodes and weights for 5-point Gauss-Legendre on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

/// Composite 5-point Gauss-Legendre integral of gamma^(-exponent) over
/// [a, b], with `panels` subdivisions.
fn gamma_power_integral_fixed(
    ramp: &FrequencyRamp,
    a: f64,
    b: f64,
    exponent: f64,
    panels: usize,
) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let half_exp = 0.5 * exponent;
    let omega0 = ramp.omega0();
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            let t = mid + 0.5 * h * node;
            // gamma^(-e) = (omega/omega0)^(e/2); avoids a sqrt round-trip.
            let omega = ramp.value(t.clamp(a, b))?;
            acc += weight * (omega / omega0).powf(half_exp);
        }
        total += 0.5 * h * acc;
    }
    Ok(total)
}

/// Integral of gamma^(-exponent) over [a, b], refined until the panel
/// doubling changes the result by less than [`TAU_REL_TOL`] relatively.
fn gamma_power_integral(ramp: &FrequencyRamp, a: f64, b: f64, exponent: f64) -> Result<f64> {
    let mut panels = 4;
    let mut previous = gamma_power_integral_fixed(ramp, a, b, exponent, panels)?;
    loop {
        panels *= 2;
        let current = gamma_power_integral_fixed(ramp, a, b, exponent, panels)?;
        if (current - previous).abs() <= TAU_REL_TOL * current.abs().max(1e-300) || panels >= 4096 {
            return Ok(current);
        }
        previous = current;
    }
}

/// Rescaled time tau(t) = integral of gamma(t')^(-exponent) over [0, t].
///
/// `exponent` is 2 for the standard scaling dynamics and the spatial
/// dimension D for the Thomas-Fermi variant. Computed by refined composite
/// Gauss-Legendre quadrature to a relative tolerance of 1e-9 (no closed form
/// exists for the quintic ramp); tau only enters phase factors, so this
/// keeps phase errors far below the fidelity tolerances.
pub fn rescaled_time(ramp: &FrequencyRamp, t: f64, exponent: f64) -> Result<f64> {
    ramp.check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    gamma_power_integral(ramp, 0.0, t, exponent)
}

/// Interaction modulation epsilon(t) = gamma(t)^(alpha - 2) needed to keep
/// the scaling ansatz consistent for an interaction of homogeneity exponent
/// `alpha`. Identically 1 for alpha = 2.
pub fn coupling_modulation(ramp: &FrequencyRamp, alpha: f64, t: f64) -> Result<f64> {
    if alpha == 2.0 {
        // Exact, not just numerically close: the exponent vanishes.
        ramp.check_time(t)?;
        return Ok(1.0);
    }
    Ok(scaling_factor(ramp, t)?.powf(alpha - 2.0))
}

/// Squared counter-diabatic frequency
/// Omega^2(t) = omega^2 - (3/4)(omega_dot/omega)^2 + (1/2)(omega_ddot/omega).
///
/// May be negative: ultrafast ramps transiently invert the trap.
pub fn cd_frequency(ramp: &FrequencyRamp, t: f64) -> Result<f64> {
    let (omega, omega_dot, omega_ddot) = ramp.derivatives(t)?;
    if omega <= 0.0 {
        return Err(Error::Domain(format!("omega(t) = {omega} <= 0")));
    }
    let r1 = omega_dot / omega;
    Ok(omega * omega - 0.75 * r1 * r1 + 0.5 * omega_ddot / omega)
}

/// Squared CD frequency via the scaling factor:
/// Omega^2(t) = omega^2 - gamma_ddot/gamma.
///
/// Algebraically identical to [`cd_frequency`]; kept as an independent code
/// path so the identity can be checked numerically.
pub fn cd_frequency_via_gamma(ramp: &FrequencyRamp, t: f64) -> Result<f64> {
    let omega = ramp.value(t)?;
    let sp = scaling_derivatives(ramp, t)?;
    Ok(omega * omega - sp.gamma_ddot / sp.gamma)
}

/// Squared CD frequency in the Thomas-Fermi regime for spatial dimension
/// `dim`:
/// Omega_TF^2(t) = omega0 omega (omega/omega0)^(D/2)
///                 - (3/4)(omega_dot/omega)^2 + (1/2)(omega_ddot/omega).
///
/// Reduces to [`cd_frequency`] for D = 2.
pub fn cd_frequency_tf(ramp: &FrequencyRamp, dim: u32, t: f64) -> Result<f64> {
    check_dim(dim)?;
    let (omega, omega_dot, omega_ddot) = ramp.derivatives(t)?;
    if omega <= 0.0 {
        return Err(Error::Domain(format!("omega(t) = {omega} <= 0")));
    }
    let r1 = omega_dot / omega;
    let omega0 = ramp.omega0();
    Ok(omega0 * omega * (omega / omega0).powf(dim as f64 / 2.0) - 0.75 * r1 * r1
        + 0.5 * omega_ddot / omega)
}

fn check_dim(dim: u32) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dim must be 1, 2, or 3, got {dim}"
        )))
    }
}

/// Mean-field coupling consistent with the scaling ansatz in dimension D:
/// g(t) = g0 gamma(t)^(D-2). Constant for D = 2.
pub fn gpe_coupling(g0: f64, dim: u32, gamma: f64) -> Result<f64> {
    check_dim(dim)?;
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    Ok(g0 * gamma.powi(dim as i32 - 2))
}

/// Power exponent of a `A |q/xi|^b` trap, with an explicit sentinel for the
/// hard-wall piston limit b -> infinity (avoids overflow and keeps the limit
/// test meaningful).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerLawExponent {
    /// Finite exponent b > 0.
    Finite(f64),
    /// Hard-wall limit b -> infinity: an expanding quantum piston.
    Piston,
}

impl PowerLawExponent {
    /// The ratio b/(b+2), which controls both the scaling-factor exponent
    /// and the auxiliary-potential prefactor; tends to 1 in the piston limit.
    pub fn exponent_ratio(self) -> f64 {
        match self {
            PowerLawExponent::Finite(b) => b / (b + 2.0),
            PowerLawExponent::Piston => 1.0,
        }
    }
}

impl std::fmt::Display for PowerLawExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PowerLawExponent::Finite(b) => write!(f, "{b}"),
            PowerLawExponent::Piston => write!(f, "piston"),
        }
    }
}

/// Smooth trap-width ramp xi(t) on `[0, t_final]`: the same quintic
/// interpolant family as [`FrequencyRamp`], so first and second width
/// derivatives vanish at both ends and the auxiliary potential switches off
/// exactly at the endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRamp {
    xi0: f64,
    xi_f: f64,
    t_final: f64,
}

impl WidthRamp {
    /// Build a width ramp; all parameters must be positive.
    pub fn new(xi0: f64, xi_f: f64, t_final: f64) -> Result<Self> {
        if !(xi0 > 0.0) || !(xi_f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trap widths must be positive, got xi0 = {xi0}, xiF = {xi_f}"
            )));
        }
        if !(t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tF must be positive, got {t_final}"
            )));
        }
        Ok(WidthRamp { xi0, xi_f, t_final })
    }

    /// Initial width xi(0).
    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    /// Final width xi(tF).
    pub fn xi_f(&self) -> f64 {
        self.xi_f
    }

    /// Ramp duration tF.
    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.t_final).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} outside ramp window [0, {}]",
                self.t_final
            )))
        }
    }

    /// xi(t).
    pub fn value(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.xi0 + (self.xi_f - self.xi0) * blend(t / self.t_final))
    }

    /// (xi, xi_dot, xi_ddot) at `t`.
    pub fn derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check_time(t)?;
        let s = t / self.t_final;
        let d = self.xi_f - self.xi0;
        Ok((
            self.xi0 + d * blend(s),
            d * blend_d1(s) / self.t_final,
            d * blend_d2(s) / (self.t_final * self.t_final),
        ))
    }
}

/// A power-law trap U(q, t) = A |q / xi(t)|^b with a time-dependent width.
///
/// The amplitude is named `A` rather than reusing the interaction exponent's
/// symbol; both meanings are preserved separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawTrap {
    exponent: PowerLawExponent,
    amplitude: f64,
    width: WidthRamp,
}

impl PowerLawTrap {
    /// Build a trap; the amplitude must be positive, finite exponents must
    /// be positive.
    pub fn new(exponent: PowerLawExponent, amplitude: f64, width: WidthRamp) -> Result<Self> {
        if let PowerLawExponent::Finite(b) = exponent {
            if !(b > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "power-law exponent must be positive, got {b}"
                )));
            }
        }
        if !(amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trap amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(PowerLawTrap {
            exponent,
            amplitude,
            width,
        })
    }

    /// Power exponent (finite or piston sentinel).
    pub fn exponent(&self) -> PowerLawExponent {
        self.exponent
    }

    /// Energy-scale amplitude A.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Width trajectory xi(t).
    pub fn width(&self) -> &WidthRamp {
        &self.width
    }
}

/// Scaling factor for a power-law trap:
/// gamma(t) = [xi(t)/xi(0)]^(b/(b+2)), exponent 1 in the piston limit.
pub fn powerlaw_scaling_factor(trap: &PowerLawTrap, t: f64) -> Result<f64> {
    let xi = trap.width().value(t)?;
    if xi <= 0.0 {
        return Err(Error::Domain(format!("xi(t) = {xi} <= 0")));
    }
    Ok((xi / trap.width().xi0()).powf(trap.exponent().exponent_ratio()))
}

/// Auxiliary-potential coefficient arithmetic: the potential k q^2 with
/// k = -(1/2) (b/(b+2)) (xi_ddot/xi); piston limit k = -(1/2)(xi_ddot/xi).
pub fn auxiliary_coefficient_from(exponent: PowerLawExponent, xidd_over_xi: f64) -> f64 {
    -0.5 * exponent.exponent_ratio() * xidd_over_xi
}

/// Auxiliary-potential coefficient k(t) for a power-law trap at time `t`;
/// see [`auxiliary_coefficient_from`].
pub fn powerlaw_auxiliary_coefficient(trap: &PowerLawTrap, t: f64) -> Result<f64> {
    let (xi, _, xi_ddot) = trap.width().derivatives(t)?;
    if xi <= 0.0 {
        return Err(Error::Domain(format!("xi(t) = {xi} <= 0")));
    }
    Ok(auxiliary_coefficient_from(trap.exponent(), xi_ddot / xi))
}

/// Rescaled time for a power-law trap: integral of gamma(t')^(-2) over
/// [0, t], by the same refined composite quadrature as [`rescaled_time`].
pub fn powerlaw_rescaled_time(trap: &PowerLawTrap, t: f64) -> Result<f64> {
    if !(0.0..=trap.width().t_final()).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside the trap window [0, {}]",
            trap.width().t_final()
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let integrate = |panels: usize| -> Result<f64> {
        let h = t / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            let mut acc = 0.0;
            for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
                let s = (mid + 0.5 * h * node).clamp(0.0, t);
                let gamma = powerlaw_scaling_factor(trap, s)?;
                acc += weight / (gamma * gamma);
            }
            total += 0.5 * h * acc;
        }
        Ok(total)
    };
    let mut panels = 4;
    let mut previous = integrate(panels)?;
    loop {
        panels *= 2;
        let current = integrate(panels)?;
        if (current - previous).abs() <= TAU_REL_TOL * current.abs().max(1e-300) || panels >= 4096 {
            return Ok(current);
        }
        previous = current;
    }
}

/// A fully sampled driving protocol: the ramp plus every derived waveform on
/// a uniform time grid, ready for export or propagation.
#[derive(Debug, Clone)]
pub struct DrivingProtocol {
    ramp: FrequencyRamp,
    dim: u32,
    alpha: f64,
    times: Vec<f64>,
    omega: Vec<f64>,
    omega_dot: Vec<f64>,
    omega_ddot: Vec<f64>,
    gamma: Vec<f64>,
    gamma_dot: Vec<f64>,
    gamma_ddot: Vec<f64>,
    tau: Vec<f64>,
    omega2_cd: Vec<f64>,
    omega2_tf: Vec<f64>,
    epsilon: Vec<f64>,
    g_ratio: Vec<f64>,
}

/// Header of the protocol CSV export.
pub const PROTOCOL_CSV_HEADER: &str =
    "t,omega,omega_dot,omega_ddot,gamma,gamma_dot,gamma_ddot,tau,Omega2,Omega2_TF,epsilon,g_ratio";

/// JSON envelope accompanying a protocol CSV: the generating parameters and
/// the unit convention.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProtocolEnvelope {
    pub omega0: f64,
    #[serde(rename = "omegaF")]
    pub omega_f: f64,
    #[serde(rename = "tF")]
    pub t_final: f64,
    pub dim: u32,
    pub alpha: f64,
    pub n_samples: usize,
    pub units: String,
}

/// Sample every protocol waveform on a uniform grid of `n_samples` points
/// covering `[0, tF]`.
pub fn synthesize(
    ramp: &FrequencyRamp,
    dim: u32,
    alpha: f64,
    n_samples: usize,
) -> Result<DrivingProtocol> {
    check_dim(dim)?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_samples must be at least 2, got {n_samples}"
        )));
    }
    let t_final = ramp.t_final();
    let n = n_samples;
    let mut p = DrivingProtocol {
        ramp: *ramp,
        dim,
        alpha,
        times: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        omega_dot: Vec::with_capacity(n),
        omega_ddot: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
        gamma_dot: Vec::with_capacity(n),
        gamma_ddot: Vec::with_capacity(n),
        tau: Vec::with_capacity(n),
        omega2_cd: Vec::with_capacity(n),
        omega2_tf: Vec::with_capacity(n),
        epsilon: Vec::with_capacity(n),
        g_ratio: Vec::with_capacity(n),
    };
    let mut tau_acc = 0.0;
    for i in 0..n {
        // Hit the endpoint exactly so boundary identities hold bit-for-bit.
        let t = if i == n - 1 {
            t_final
        } else {
            t_final * i as f64 / (n - 1) as f64
        };
        let (omega, omega_dot, omega_ddot) = ramp.derivatives(t)?;
        let sp = scaling_derivatives(ramp, t)?;
        if i > 0 {
            tau_acc += gamma_power_integral(ramp, p.times[i - 1], t, 2.0)?;
        }
        p.times.push(t);
        p.omega.push(omega);
        p.omega_dot.push(omega_dot);
        p.omega_ddot.push(omega_ddot);
        p.gamma.push(sp.gamma);
        p.gamma_dot.push(sp.gamma_dot);
        p.gamma_ddot.push(sp.gamma_ddot);
        p.tau.push(tau_acc);
        p.omega2_cd.push(cd_frequency(ramp, t)?);
        p.omega2_tf.push(cd_frequency_tf(ramp, dim, t)?);
        p.epsilon.push(coupling_modulation(ramp, alpha, t)?);
        p.g_ratio.push(sp.gamma.powi(dim as i32 - 2));
    }
    Ok(p)
}

impl DrivingProtocol {
    /// The generating ramp.
    pub fn ramp(&self) -> &FrequencyRamp {
        &self.ramp
    }

    /// Spatial dimension D used for the TF column and the coupling ratio.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Interaction homogeneity exponent alpha.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of samples.
    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    /// Ramp duration tF.
    pub fn t_final(&self) -> f64 {
        self.ramp.t_final()
    }

    /// Uniform time samples.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// gamma(t) samples.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// tau(t) samples with the standard exponent 2; the Thomas-Fermi
    /// variant is available through [`rescaled_time`] with exponent D.
    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Omega^2(t) samples.
    pub fn omega2_cd(&self) -> &[f64] {
        &self.omega2_cd
    }

    /// Omega_TF^2(t) samples.
    pub fn omega2_tf(&self) -> &[f64] {
        &self.omega2_tf
    }

    /// epsilon(t) samples.
    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    /// g(t)/g(0) samples.
    pub fn g_ratio(&self) -> &[f64] {
        &self.g_ratio
    }

    /// Bare drive omega^2(t) as a waveform.
    pub fn omega_squared_waveform(&self) -> Waveform {
        let values = self.omega.iter().map(|w| w * w).collect();
        Waveform::from_samples(values, self.t_final()).expect("protocol has >= 2 samples")
    }

    /// CD drive Omega^2(t) as a waveform.
    pub fn cd_waveform(&self) -> Waveform {
        Waveform::from_samples(self.omega2_cd.clone(), self.t_final())
            .expect("protocol has >= 2 samples")
    }

    /// TF CD drive Omega_TF^2(t) as a waveform.
    pub fn tf_waveform(&self) -> Waveform {
        Waveform::from_samples(self.omega2_tf.clone(), self.t_final())
            .expect("protocol has >= 2 samples")
    }

    /// Coupling ratio gamma^(D-2) as a waveform.
    pub fn g_ratio_waveform(&self) -> Waveform {
        Waveform::from_samples(self.g_ratio.clone(), self.t_final())
            .expect("protocol has >= 2 samples")
    }

    /// JSON envelope describing this protocol.
    pub fn envelope(&self) -> ProtocolEnvelope {
        ProtocolEnvelope {
            omega0: self.ramp.omega0(),
            omega_f: self.ramp.omega_f(),
            t_final: self.ramp.t_final(),
            dim: self.dim,
            alpha: self.alpha,
            n_samples: self.n_samples(),
            units: "hbar=m=1".to_string(),
        }
    }

    /// Write the protocol table as CSV with 16 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{PROTOCOL_CSV_HEADER}")?;
        for i in 0..self.n_samples() {
            writeln!(
                out,
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                self.times[i],
                self.omega[i],
                self.omega_dot[i],
                self.omega_ddot[i],
                self.gamma[i],
                self.gamma_dot[i],
                self.gamma_ddot[i],
                self.tau[i],
                self.omega2_cd[i],
                self.omega2_tf[i],
                self.epsilon[i],
                self.g_ratio[i],
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn reference_ramp() -> FrequencyRamp {
        FrequencyRamp::new(1.0, 0.25, 10.0).unwrap()
    }

    #[test]
    fn ramp_boundary_values_are_exact() {
        let r = reference_ramp();
        assert_eq!(r.value(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(r.value(10.0).unwrap(), 0.25, epsilon = 1e-15);
        let (_, d1, d2) = r.derivatives(0.0).unwrap();
        assert_eq!((d1, d2), (0.0, 0.0));
        let (_, d1, d2) = r.derivatives(10.0).unwrap();
        assert_eq!((d1, d2), (0.0, 0.0));
    }

    #[test]
    fn ramp_midpoint_value_frozen() {
        // omega0 + delta/2 at s = 1/2: symbolic evaluation of the quintic.
        let r = reference_ramp();
        assert_abs_diff_eq!(r.value(5.0).unwrap(), 0.625, epsilon = 1e-15);
        // Second derivative vanishes at s = 1/2 by symmetry of the cubic
        // 60s - 180s^2 + 120s^3.
        let (_, _, d2) = r.derivatives(5.0).unwrap();
        assert_abs_diff_eq!(d2, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ramp_rejects_bad_parameters_and_times() {
        assert!(FrequencyRamp::new(0.0, 1.0, 1.0).is_err());
        assert!(FrequencyRamp::new(1.0, -1.0, 1.0).is_err());
        assert!(FrequencyRamp::new(1.0, 1.0, 0.0).is_err());
        let r = reference_ramp();
        assert!(r.value(-0.1).is_err());
        assert!(r.value(10.1).is_err());
        assert!(r.value(f64::NAN).is_err());
    }

    #[test]
    fn ramp_derivatives_match_finite_differences() {
        let r = reference_ramp();
        let h = 1e-4 * r.t_final();
        for &t in &[1.0, 3.7, 5.0, 8.2] {
            let (_, d1, d2) = r.derivatives(t).unwrap();
            let fp = r.value(t + h).unwrap();
            let fm = r.value(t - h).unwrap();
            let f0 = r.value(t).unwrap();
            let fd1 = (fp - fm) / (2.0 * h);
            let fd2 = (fp - 2.0 * f0 + fm) / (h * h);
            assert_relative_eq!(d1, fd1, max_relative = 1e-6, epsilon = 1e-10);
            assert_relative_eq!(d2, fd2, max_relative = 1e-4, epsilon = 1e-8);
        }
    }

    #[test]
    fn scaling_factor_frozen_values() {
        let r = reference_ramp();
        assert_eq!(scaling_factor(&r, 0.0).unwrap(), 1.0);
        // omega(tF) = omega0/4 gives the expansion factor 2.
        assert_abs_diff_eq!(scaling_factor(&r, 10.0).unwrap(), 2.0, epsilon = 1e-14);
        // omega = 0.625 omega0 at the midpoint: sqrt(1/0.625).
        assert_abs_diff_eq!(
            scaling_factor(&r, 5.0).unwrap(),
            1.264_911_064_067_351_8,
            epsilon = 1e-14
        );
    }

    #[test]
    fn scaling_derivatives_match_finite_differences() {
        let r = reference_ramp();
        let h = 1e-4 * r.t_final();
        for &t in &[1.3, 2.5, 5.0, 7.9] {
            let sp = scaling_derivatives(&r, t).unwrap();
            let gp = scaling_factor(&r, t + h).unwrap();
            let gm = scaling_factor(&r, t - h).unwrap();
            let g0 = scaling_factor(&r, t).unwrap();
            assert_abs_diff_eq!(sp.gamma, g0, epsilon = 1e-14);
            assert_relative_eq!(sp.gamma_dot, (gp - gm) / (2.0 * h), max_relative = 1e-5);
            assert_relative_eq!(
                sp.gamma_ddot,
                (gp - 2.0 * g0 + gm) / (h * h),
                max_relative = 1e-4,
                epsilon = 1e-9
            );
        }
        let sp0 = scaling_derivatives(&r, 0.0).unwrap();
        assert_eq!((sp0.gamma, sp0.gamma_dot, sp0.gamma_ddot), (1.0, 0.0, 0.0));
        let spf = scaling_derivatives(&r, 10.0).unwrap();
        assert_abs_diff_eq!(spf.gamma, 2.0, epsilon = 1e-14);
        assert_eq!((spf.gamma_dot, spf.gamma_ddot), (0.0, 0.0));
    }

    #[test]
    fn rescaled_time_identity_and_zero() {
        let flat = FrequencyRamp::new(1.0, 1.0, 7.0).unwrap();
        for &t in &[0.0, 1.0, 3.5, 7.0] {
            assert_abs_diff_eq!(rescaled_time(&flat, t, 2.0).unwrap(), t, epsilon = 1e-12);
        }
        let r = reference_ramp();
        assert_eq!(rescaled_time(&r, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn rescaled_time_matches_brute_force_quadrature() {
        // Independent oracle: composite Simpson with a million panels on the
        // same integrand, written without the shared quadrature helpers.
        let r = reference_ramp();
        for &(t, exponent) in &[(10.0, 2.0), (10.0, 1.0), (6.3, 3.0), (2.0, 2.0)] {
            let n = 1_000_000_usize;
            let h = t / n as f64;
            let f = |tt: f64| {
                let omega = r.value(tt).unwrap();
                (omega / r.omega0()).powf(exponent / 2.0)
            };
            let mut acc = f(0.0) + f(t);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(i as f64 * h);
            }
            let oracle = acc * h / 3.0;
            let got = rescaled_time(&r, t, exponent).unwrap();
            assert_relative_eq!(got, oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn coupling_modulation_frozen_values() {
        let r = reference_ramp();
        // alpha = 2: identically one at any time.
        for &t in &[0.0, 2.0, 5.0, 10.0] {
            assert_eq!(coupling_modulation(&r, 2.0, t).unwrap(), 1.0);
        }
        // gamma(tF) = 2: alpha = 1 gives 1/2, alpha = 3 gives 2.
        assert_abs_diff_eq!(
            coupling_modulation(&r, 1.0, 10.0).unwrap(),
            0.5,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            coupling_modulation(&r, 3.0, 10.0).unwrap(),
            2.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn cd_frequency_boundaries_exact() {
        for &(w0, wf, tf) in &[(1.0, 0.25, 10.0), (1.0, 0.25, 1.0), (2.0, 0.5, 3.0)] {
            let r = FrequencyRamp::new(w0, wf, tf).unwrap();
            let scale = w0 * w0;
            assert_abs_diff_eq!(
                cd_frequency(&r, 0.0).unwrap(),
                w0 * w0,
                epsilon = 1e-12 * scale
            );
            assert_abs_diff_eq!(
                cd_frequency(&r, tf).unwrap(),
                wf * wf,
                epsilon = 1e-12 * scale
            );
        }
    }

    #[test]
    fn cd_frequency_goes_negative_for_fast_ramp() {
        let r = FrequencyRamp::new(1.0, 0.25, 1.0).unwrap();
        let min = (0..=1000)
            .map(|i| cd_frequency(&r, i as f64 / 1000.0).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min < 0.0, "fast ramp should invert the trap, min = {min}");
    }

    #[test]
    fn cd_frequency_routes_agree() {
        for &(w0, wf, tf) in &[(1.0, 0.25, 10.0), (1.0, 0.25, 1.0), (1.5, 0.9, 4.0)] {
            let r = FrequencyRamp::new(w0, wf, tf).unwrap();
            for i in 0..=200 {
                let t = tf * i as f64 / 200.0;
                let a = cd_frequency(&r, t).unwrap();
                let b = cd_frequency_via_gamma(&r, t).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-10, epsilon = 1e-10 * w0 * w0);
            }
        }
    }

    #[test]
    fn tf_frequency_reduces_to_cd_in_two_dimensions() {
        let r = reference_ramp();
        for i in 0..=200 {
            let t = 10.0 * i as f64 / 200.0;
            let tf2 = cd_frequency_tf(&r, 2, t).unwrap();
            let cd = cd_frequency(&r, t).unwrap();
            assert_relative_eq!(tf2, cd, max_relative = 1e-14, epsilon = 1e-14);
        }
    }

    #[test]
    fn tf_frequency_frozen_value_three_dimensions() {
        // At t = tF the derivatives vanish and omega = omega0/4:
        // omega0 * (omega0/4) * (1/4)^{3/2} = omega0^2 / 32.
        let r = reference_ramp();
        assert_abs_diff_eq!(
            cd_frequency_tf(&r, 3, 10.0).unwrap(),
            1.0 / 32.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(cd_frequency_tf(&r, 3, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(cd_frequency_tf(&r, 4, 1.0).is_err());
        assert!(cd_frequency_tf(&r, 0, 1.0).is_err());
    }

    #[test]
    fn gpe_coupling_frozen_values() {
        assert_eq!(gpe_coupling(3.0, 2, 1.7).unwrap(), 3.0);
        assert_abs_diff_eq!(gpe_coupling(1.0, 3, 2.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gpe_coupling(1.0, 1, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(gpe_coupling(1.0, 1, 0.0).is_err());
        assert!(gpe_coupling(1.0, 5, 1.0).is_err());
    }

    #[test]
    fn powerlaw_scaling_frozen_values() {
        let width = WidthRamp::new(1.0, 4.0, 10.0).unwrap();
        let trap = PowerLawTrap::new(PowerLawExponent::Finite(2.0), 1.0, width).unwrap();
        assert_eq!(powerlaw_scaling_factor(&trap, 0.0).unwrap(), 1.0);
        // b = 2, xi ratio 4: 4^(1/2) = 2, consistent with the harmonic
        // scaling factor since omega scales as 1/xi for b = 2 at fixed A.
        assert_abs_diff_eq!(
            powerlaw_scaling_factor(&trap, 10.0).unwrap(),
            2.0,
            epsilon = 1e-13
        );
        let width3 = WidthRamp::new(1.0, 3.0, 10.0).unwrap();
        let piston = PowerLawTrap::new(PowerLawExponent::Piston, 1.0, width3).unwrap();
        assert_abs_diff_eq!(
            powerlaw_scaling_factor(&piston, 10.0).unwrap(),
            3.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn auxiliary_coefficient_frozen_values() {
        // b = 2, xi_ddot/xi = 1: -(1/2)(2/4)(1) = -0.25.
        assert_abs_diff_eq!(
            auxiliary_coefficient_from(PowerLawExponent::Finite(2.0), 1.0),
            -0.25,
            epsilon = 1e-15
        );
        // b = 1e6 approaches the piston limit within 2e-6 relative:
        // the ratio gap is exactly 2/(b+2).
        let finite = auxiliary_coefficient_from(PowerLawExponent::Finite(1e6), 1.0);
        let piston = auxiliary_coefficient_from(PowerLawExponent::Piston, 1.0);
        let rel = ((finite - piston) / piston).abs();
        assert!(rel <= 2e-6, "relative gap {rel} exceeds 2e-6");
        // Constant-velocity wall: no curvature, no auxiliary term.
        assert_eq!(auxiliary_coefficient_from(PowerLawExponent::Finite(4.0), 0.0), 0.0);
    }

    #[test]
    fn auxiliary_coefficient_vanishes_at_ramp_endpoints() {
        let width = WidthRamp::new(1.0, 2.0, 5.0).unwrap();
        let trap = PowerLawTrap::new(PowerLawExponent::Finite(4.0), 0.5, width).unwrap();
        assert_eq!(powerlaw_auxiliary_coefficient(&trap, 0.0).unwrap(), 0.0);
        assert_eq!(powerlaw_auxiliary_coefficient(&trap, 5.0).unwrap(), 0.0);
        // Interior: nonzero and consistent with finite differences of xi.
        let t = 1.7;
        let h = 1e-5;
        let xi = |t: f64| trap.width().value(t).unwrap();
        let xidd = (xi(t + h) - 2.0 * xi(t) + xi(t - h)) / (h * h);
        let expected = -0.5 * (4.0 / 6.0) * xidd / xi(t);
        assert_relative_eq!(
            powerlaw_auxiliary_coefficient(&trap, t).unwrap(),
            expected,
            max_relative = 1e-5
        );
    }

    #[test]
    fn synthesize_no_op_ramp_is_flat() {
        let flat = FrequencyRamp::new(1.0, 1.0, 10.0).unwrap();
        let p = synthesize(&flat, 1, 2.0, 101).unwrap();
        for i in 0..p.n_samples() {
            assert_abs_diff_eq!(p.omega2_cd()[i], 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(p.gamma()[i], 1.0, epsilon = 1e-14);
            assert_eq!(p.epsilon()[i], 1.0);
            assert_abs_diff_eq!(p.tau()[i], p.times()[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn synthesize_validates_inputs() {
        let r = reference_ramp();
        assert!(synthesize(&r, 1, 2.0, 1).is_err());
        assert!(synthesize(&r, 4, 2.0, 100).is_err());
    }

    #[test]
    fn synthesize_boundary_invariants() {
        let r = FrequencyRamp::new(1.0, 0.25, 5.0).unwrap();
        let p = synthesize(&r, 1, 2.0, 501).unwrap();
        let n = p.n_samples();
        assert_abs_diff_eq!(p.omega2_cd()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.omega2_cd()[n - 1], 0.0625, epsilon = 1e-12);
        // Time samples strictly increasing and uniform.
        let dt = p.times()[1] - p.times()[0];
        for i in 1..n {
            let step = p.times()[i] - p.times()[i - 1];
            assert!(step > 0.0);
            assert_abs_diff_eq!(step, dt, epsilon = 1e-12);
        }
        // tau strictly increasing.
        for i in 1..n {
            assert!(p.tau()[i] > p.tau()[i - 1]);
        }
    }

    #[test]
    fn adiabatic_limit_scales_inverse_square() {
        // max |Omega^2 - omega^2| over the ramp must fall as 1/tF^2:
        // log-log slope -2 within 0.1, and monotone decreasing.
        let mut gaps = Vec::new();
        for &tf in &[10.0, 20.0, 40.0, 80.0] {
            let r = FrequencyRamp::new(1.0, 0.25, tf).unwrap();
            let gap = (0..=2000)
                .map(|i| {
                    let t = tf * i as f64 / 2000.0;
                    let w = r.value(t).unwrap();
                    (cd_frequency(&r, t).unwrap() - w * w).abs()
                })
                .fold(0.0_f64, f64::max);
            gaps.push((tf, gap));
        }
        for pair in gaps.windows(2) {
            assert!(pair[1].1 < pair[0].1, "gap must decrease with tF: {gaps:?}");
        }
        let (t0, g0) = gaps[0];
        let (t3, g3) = gaps[3];
        let slope = (g3.ln() - g0.ln()) / (t3.ln() - t0.ln());
        assert!(
            (slope + 2.0).abs() < 0.1,
            "expected slope -2 +- 0.1, got {slope}"
        );
    }

    #[test]
    fn csv_export_is_deterministic_with_exact_header() {
        let r = FrequencyRamp::new(1.0, 0.25, 5.0).unwrap();
        let p = synthesize(&r, 2, 2.0, 33).unwrap();
        let mut a = Vec::new();
        p.write_csv(&mut a).unwrap();
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.starts_with(PROTOCOL_CSV_HEADER));
        assert_eq!(text.lines().count(), 34);
        let p2 = synthesize(&r, 2, 2.0, 33).unwrap();
        let mut b = Vec::new();
        p2.write_csv(&mut b).unwrap();
        assert_eq!(a, b, "identical inputs must produce identical bytes");
    }

    #[test]
    fn envelope_round_trips_through_json() {
        let r = FrequencyRamp::new(1.0, 0.25, 5.0).unwrap();
        let p = synthesize(&r, 1, 2.0, 11).unwrap();
        let env = p.envelope();
        assert_eq!(env.units, "hbar=m=1");
        let text = serde_json::to_string(&env).unwrap();
        assert!(text.contains("\"omegaF\""));
        assert!(text.contains("\"tF\""));
        let back: ProtocolEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env);
    }
}
