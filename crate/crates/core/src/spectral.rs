//! FFT plumbing for periodic uniform grids.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::real::SpectralReal;

/// Forward/inverse transform pair of one length, with unitary-free scaling:
/// `inverse(forward(x)) == x`.
pub struct Spectral<T: SpectralReal> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    len: usize,
}

impl<T: SpectralReal> Spectral<T> {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&mut self, data: &mut [Complex<T>]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform including the `1/n` normalisation.
    pub fn inverse(&mut self, data: &mut [Complex<T>]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        let scale = T::count(self.len).recip();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Angular wave numbers in FFT order for `n` samples over one `period`.
pub fn wavenumbers<T: SpectralReal>(n: usize, period: T) -> Vec<T> {
    let base = T::lit(2.0) * T::PI() / period;
    (0..n)
        .map(|j| {
            if j <= n / 2 {
                base * T::count(j)
            } else {
                -(base * T::count(n - j))
            }
        })
        .collect()
}

/// Spectral first derivative of periodic samples. The Nyquist mode is
/// dropped so the derivative of a real signal stays real.
pub fn derivative<T: SpectralReal>(
    fft: &mut Spectral<T>,
    values: &[Complex<T>],
    k: &[T],
) -> Vec<Complex<T>> {
    let mut buf = values.to_vec();
    fft.forward(&mut buf);
    let n = buf.len();
    for (j, (v, &kj)) in buf.iter_mut().zip(k).enumerate() {
        *v = if n.is_multiple_of(2) && j == n / 2 {
            Complex::new(T::zero(), T::zero())
        } else {
            *v * Complex::new(T::zero(), kj)
        };
    }
    fft.inverse(&mut buf);
    buf
}
