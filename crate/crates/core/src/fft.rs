//! Power-of-two complex FFT.
//!
//! A small iterative radix-2 transform so the crate stays `no_std`; the twiddle
//! table is computed once per plan with direct `sin`/`cos` calls (no
//! recurrences), which keeps the round-trip error at a few ulps for 2^20 points.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Complex64, Error, Result};

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    log2n: u32,
    // e^{-2πik/n}, k < n/2
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let t = -2.0 * PI * (k as f64) / (n as f64);
                Complex64::new(libm::cos(t), libm::sin(t))
            })
            .collect();
        Ok(FftPlan { n, log2n: n.trailing_zeros(), twiddles })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place `X_k = Σ_j x_j e^{-2πijk/n}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    /// In place `x_j = Σ_k X_k e^{+2πijk/n}`; unnormalised.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    fn run(&self, buf: &mut [Complex64], conj: bool) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        let n = self.n;
        let shift = usize::BITS - self.log2n;
        for i in 0..n {
            let j = i.reverse_bits() >> shift;
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                let (lo, hi) = buf[start..start + 2 * half].split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[k * stride];
                    if conj {
                        w.im = -w.im;
                    }
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }
}
