//! Radix-2 complex FFT for power-of-two lengths.
//!
//! Twiddle factors are evaluated directly with `sin`/`cos` for every index
//! rather than by recurrence, which keeps the round-trip error near machine
//! precision for lengths up to 2^20.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed plan for a transform of fixed length. Immutable once built, so
/// a single plan can be shared between threads.
#[derive(Clone, Debug)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let bits = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|j| {
                let theta = -2.0 * PI * (j as f64) / (len as f64);
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(Self { len, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized forward transform, `X_j = sum_m x_m exp(-2 pi i j m / n)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Unnormalized inverse transform (positive exponent, no `1/n`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }

    /// Forward transform scaled by `n^{-1/2}`.
    pub fn forward_unitary(&self, data: &mut [Complex64]) {
        self.forward(data);
        self.scale(data);
    }

    /// Inverse transform scaled by `n^{-1/2}`.
    pub fn inverse_unitary(&self, data: &mut [Complex64]) {
        self.inverse(data);
        self.scale(data);
    }

    fn scale(&self, data: &mut [Complex64]) {
        let s = 1.0 / libm::sqrt(self.len as f64);
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if j > i {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}
