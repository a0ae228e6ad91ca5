//! Iterative radix-2 complex FFT.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::fm;

/// Precomputed plan for transforms of a fixed power-of-two length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    rev: Vec<usize>,
}

impl Fft {
    /// Plan for length `n`; panics unless `n` is a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "fft length must be a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
                Complex64::new(fm::cos(a), fm::sin(a))
            })
            .collect();
        Self { n, twiddles, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Forward transform `X_k = sum_j x_j e^{-2 pi i jk/n}`, unnormalized.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
        let s = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    /// Angular wavenumbers `2 pi m / L` in FFT order for a period `length`.
    pub fn wavenumbers(&self, length: f64) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|i| {
                let m = if i <= n / 2 - 1 { i } else { i - n };
                2.0 * core::f64::consts::PI * m as f64 / length
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    #[test]
    fn agrees_with_reference_fft() {
        for n in [2usize, 8, 64, 1024] {
            let input: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(libm::sin(0.3 * i as f64) + 0.1 * i as f64, libm::cos(1.7 * i as f64)))
                .collect();
            let mut ours = input.clone();
            Fft::new(n).forward(&mut ours);
            let mut reference: Vec<rustfft::num_complex::Complex64> = input
                .iter()
                .map(|z| rustfft::num_complex::Complex64::new(z.re, z.im))
                .collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut reference);
            for (a, b) in ours.iter().zip(&reference) {
                assert!((a.re - b.re).abs() < 1e-9 * n as f64);
                assert!((a.im - b.im).abs() < 1e-9 * n as f64);
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let n = 256;
        let fft = Fft::new(n);
        let input: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut data = input.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&input) {
            assert!((a - b).norm_sqr() < 1e-20);
        }
    }
}
