//! Abate–Whitt inversion of z-transforms on a circle of radius `ρ < 1`.
//!
//! ```text
//! f(n) ≈ 1/(2n ρ^n) Σ_{k=0}^{2n-1} (−1)^k f̃(ρ e^{iπk/n})
//! ```
//!
//! The aliasing error is `Σ_{j≥1} f(n + 2jn) ρ^{2jn}`, so with `ρ = 10^{−λ/(2n)}`
//! a bounded sequence is recovered to about `10^{−λ}`; round-off grows like
//! `10^{λ/2}·ε`, which caps useful `λ` near 11.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::exec::Executor;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZPlan {
    n: usize,
    lambda_acc: f64,
    rho: f64,
}

impl ZPlan {
    pub const DEFAULT_ACCURACY: f64 = 8.0;

    pub fn new(n: usize) -> Result<Self> {
        Self::with_accuracy(n, Self::DEFAULT_ACCURACY)
    }

    pub fn with_accuracy(n: usize, lambda_acc: f64) -> Result<Self> {
        if !(lambda_acc.is_finite() && lambda_acc > 0.0) {
            return Err(Error::Parameter { name: "lambda_acc", reason: "must be positive" });
        }
        let rho = if n == 0 { 0.0 } else { libm::pow(10.0, -lambda_acc / (2.0 * n as f64)) };
        Self::with_radius(n, lambda_acc, rho)
    }

    fn with_radius(n: usize, lambda_acc: f64, rho: f64) -> Result<Self> {
        if n > 0 && !(rho > 0.0 && rho < 1.0) {
            return Err(Error::RadiusDegenerate(rho));
        }
        Ok(ZPlan { n, lambda_acc, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn lambda_acc(&self) -> f64 {
        self.lambda_acc
    }

    /// Number of circle points, `2n` (one point, `q = 0`, when `n = 0`).
    pub fn len(&self) -> usize {
        (2 * self.n).max(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `k`-th evaluation point `ρ e^{iπk/n}`.
    pub fn point(&self, k: usize) -> Complex64 {
        if self.n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.rho, PI * k as f64 / self.n as f64)
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    fn weight(&self, k: usize) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        s / (2.0 * self.n as f64 * libm::pow(self.rho, self.n as f64))
    }

    /// Invert a scalar generating function.
    pub fn invert<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.len() {
            acc += f(self.point(k))? * self.weight(k);
        }
        Ok(acc)
    }

    /// Invert a generating function whose values are arrays over a grid, with
    /// the circle points fanned out through `exec`.
    pub fn invert_vec<E, F>(&self, exec: &E, f: F) -> Result<Vec<Complex64>>
    where
        E: Executor,
        F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync,
    {
        let values = exec.map(self.len(), |k| f(self.point(k)));
        let mut acc: Option<Vec<Complex64>> = None;
        for (k, v) in values.into_iter().enumerate() {
            let v = v?;
            let w = self.weight(k);
            let a = acc.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); v.len()]);
            a.iter_mut().zip(&v).for_each(|(a, v)| *a += v * w);
        }
        Ok(acc.unwrap_or_default())
    }

    /// As [`ZPlan::invert_vec`] for a function with `f̃(q̄)[i] = conj(f̃(q)[mirror(i)])`,
    /// which holds whenever `f̃` is the transform of a real sequence of real
    /// densities. Only the points on the closed upper half of the circle are
    /// evaluated.
    pub fn invert_vec_hermitian<E, F, M>(&self, exec: &E, mirror: M, f: F) -> Result<Vec<Complex64>>
    where
        E: Executor,
        F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync,
        M: Fn(usize) -> usize,
    {
        if self.n == 0 {
            return self.invert_vec(exec, f);
        }
        let upper = self.n + 1;
        let values = exec.map(upper, |k| f(self.point(k)));
        let mut acc: Option<Vec<Complex64>> = None;
        for (k, v) in values.into_iter().enumerate() {
            let v = v?;
            let w = self.weight(k);
            let a = acc.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); v.len()]);
            if k == 0 || k == self.n {
                a.iter_mut().zip(&v).for_each(|(a, v)| *a += v * w);
            } else {
                for (i, a) in a.iter_mut().enumerate() {
                    *a += (v[i] + v[mirror(i)].conj()) * w;
                }
            }
        }
        Ok(acc.unwrap_or_default())
    }
}
