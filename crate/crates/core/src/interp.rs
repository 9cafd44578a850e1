//! Uniformly sampled waveforms and the cubic interpolation kernel shared by
//! time-dependent drives and spatial resampling.
//!
//! Interpolation is 4-point Lagrange on a uniform stencil: O(h^4) accurate on
//! smooth data, exact on cubics, and free of the knot bookkeeping a spline
//! would need. The stencil is clamped at the ends of the sample range.

use crate::error::{Error, Result};

/// Lagrange weights for a 4-point uniform stencil.
///
/// `u` is the evaluation point in stencil-local units: node `i` sits at
/// `u = i` for `i` in `0..4`. Weights sum to 1 for any `u`.
pub(crate) fn lagrange4(u: f64) -> [f64; 4] {
    let a = u - 1.0;
    let b = u - 2.0;
    let c = u - 3.0;
    [
        -a * b * c / 6.0,
        u * b * c / 2.0,
        -u * a * c / 2.0,
        u * a * b / 6.0,
    ]
}

/// Stencil placement for fractional sample index `s` on `n` samples.
///
/// Returns the first stencil index and the local coordinate `u` so the
/// evaluation point is interior to the stencil whenever possible. Callers
/// must ensure `0 <= s <= n - 1` and `n >= 4`.
pub(crate) fn stencil(n: usize, s: f64) -> (usize, f64) {
    let j = s.floor() as isize - 1;
    let i0 = j.clamp(0, n as isize - 4) as usize;
    (i0, s - i0 as f64)
}

/// A scalar function of time, either constant or uniformly sampled on
/// `[0, t_end]` with cubic interpolation between samples.
#[derive(Debug, Clone)]
pub enum Waveform {
    /// Same value for all times.
    Constant(f64),
    /// `values[i]` sampled at `t = i * t_end / (len - 1)`.
    Sampled { values: Vec<f64>, t_end: f64 },
}

impl Waveform {
    /// Constant waveform.
    pub fn constant(value: f64) -> Self {
        Waveform::Constant(value)
    }

    /// Uniformly sampled waveform on `[0, t_end]`.
    ///
    /// Requires at least 4 samples (the interpolation stencil width) and a
    /// positive duration.
    pub fn from_samples(values: Vec<f64>, t_end: f64) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidParameter(format!(
                "waveform needs at least 4 samples, got {}",
                values.len()
            )));
        }
        if !(t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waveform duration must be positive, got {t_end}"
            )));
        }
        Ok(Waveform::Sampled { values, t_end })
    }

    /// Duration covered by the samples; `None` for a constant.
    pub fn t_end(&self) -> Option<f64> {
        match self {
            Waveform::Constant(_) => None,
            Waveform::Sampled { t_end, .. } => Some(*t_end),
        }
    }

    /// Value at time `t`.
    ///
    /// `t` is clamped to the sample range: propagator substeps may land a
    /// rounding error outside `[0, t_end]` and the drive is constant beyond
    /// its endpoints by construction.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Waveform::Constant(v) => *v,
            Waveform::Sampled { values, t_end } => {
                let n = values.len();
                let s = (t / t_end).clamp(0.0, 1.0) * (n - 1) as f64;
                let (i0, u) = stencil(n, s);
                let w = lagrange4(u);
                w[0] * values[i0]
                    + w[1] * values[i0 + 1]
                    + w[2] * values[i0 + 2]
                    + w[3] * values[i0 + 3]
            }
        }
    }

    /// Largest absolute value over the samples (or the constant itself).
    pub fn max_abs(&self) -> f64 {
        match self {
            Waveform::Constant(v) => v.abs(),
            Waveform::Sampled { values, .. } => {
                values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
        }
    }
}
