//! FFT workspace shared by observables, relaxation, and propagation.
//!
//! Wraps the FFT plans for one grid size together with the conjugate
//! wavenumber grid and scratch buffers. One instance per run; never shared
//! across threads.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT plans plus wavenumber bookkeeping for an `n`-point grid of spacing
/// `dx`.
pub(crate) struct Spectral {
    n: usize,
    dx: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// k_j^2 / 2 in FFT layout.
    kinetic: Vec<f64>,
    scratch: Vec<Complex64>,
    freq_buf: Vec<Complex64>,
}

impl Spectral {
    pub fn new(n: usize, dx: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let kinetic = wavenumbers(n, dx).iter().map(|k| 0.5 * k * k).collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Spectral {
            n,
            dx,
            forward,
            inverse,
            kinetic,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            freq_buf: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// k_j^2/2 factors in FFT layout.
    pub fn kinetic_factors(&self) -> &[f64] {
        &self.kinetic
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// In-place inverse transform, normalized by 1/n.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Kinetic energy (1/2)||d psi/dq||^2 by Parseval:
    /// (dx/n) sum_k (k^2/2) |psi_hat_k|^2.
    pub fn kinetic_energy(&mut self, psi: &[Complex64]) -> f64 {
        self.freq_buf.copy_from_slice(psi);
        let mut buf = std::mem::take(&mut self.freq_buf);
        self.forward(&mut buf);
        let sum: f64 = buf
            .iter()
            .zip(self.kinetic.iter())
            .map(|(c, k2)| k2 * c.norm_sqr())
            .sum();
        self.freq_buf = buf;
        sum * self.dx / self.n as f64
    }

    /// Apply the Hamiltonian with effective potential `veff` (trap plus any
    /// mean-field term): out = -psi''/2 + veff psi.
    pub fn apply_hamiltonian(&mut self, psi: &[Complex64], veff: &[f64], out: &mut [Complex64]) {
        out.copy_from_slice(psi);
        self.forward(out);
        for (c, k2) in out.iter_mut().zip(self.kinetic.iter()) {
            *c *= k2;
        }
        self.inverse(out);
        for ((o, p), v) in out.iter_mut().zip(psi.iter()).zip(veff.iter()) {
            *o += v * p;
        }
    }
}

/// Conjugate wavenumbers in FFT layout: index i maps to i*dk for i < n/2 and
/// to -(n-i)*dk above, with dk = 2 pi / (n dx).
pub(crate) fn wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    (0..n)
        .map(|i| {
            if i < n / 2 {
                i as f64 * dk
            } else {
                -((n - i) as f64) * dk
            }
        })
        .collect()
}
