//! Paired log-price / frequency grids and the Fourier conventions used throughout.
//!
//! The forward transform is `f̂(ξ) = ∫ e^{iξx} f(x) dx` and the inverse carries
//! the `1/2π` and `e^{-iξx}`. On a grid of `n` points
//!
//! ```text
//! x_j = -b + j·dx,  dx = 2b/n        ξ_k = -ξ_max + k·dξ,  dξ = π/b,  ξ_max = π/dx
//! ```
//!
//! so `x = 0` and `ξ = 0` both sit at index `n/2`. For `n` a multiple of four the
//! quadrature `Σ_j dx f_j e^{iξ_k x_j}` collapses to a DFT with alternating signs,
//! `f̂_k = dx (-1)^k Σ_j (-1)^j f_j e^{2πijk/n}`, which is what [`Spectral`] runs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft::FftPlan;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    b: f64,
    dx: f64,
    dxi: f64,
}

impl Grid {
    pub fn new(n: usize, b: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::GridBound(b));
        }
        Ok(Grid { n, b, dx: 2.0 * b / n as f64, dxi: PI / b })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.b
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn xi_max(&self) -> f64 {
        PI / self.dx
    }

    /// Index of both `x = 0` and `ξ = 0`.
    pub fn zero(&self) -> usize {
        self.n / 2
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx
    }

    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - (self.n / 2) as f64) * self.dxi
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.xi(k)).collect()
    }

    /// Index of `-ξ_k` on the periodic grid (`-ξ_max` maps onto itself).
    pub fn mirror(&self, k: usize) -> usize {
        (self.n - k) % self.n
    }
}

/// Exponential filter of even order: `σ(η) = exp(ln(ε)·η^order)`, `η = ξ/ξ_max`.
///
/// `σ(0) = 1` and `σ(±1)` is machine epsilon.
pub fn exponential_filter(grid: &Grid, order: u32) -> Result<Vec<f64>> {
    if order == 0 || order % 2 == 1 {
        return Err(Error::Parameter { name: "filter order", reason: "must be even and positive" });
    }
    let c = libm::log(f64::EPSILON);
    let xm = grid.xi_max();
    Ok((0..grid.len()).map(|k| libm::exp(c * libm::pow(grid.xi(k) / xm, order as f64))).collect())
}

pub fn apply_filter(values: &mut [Complex64], filter: &[f64]) {
    for (v, s) in values.iter_mut().zip(filter) {
        *v *= *s;
    }
}

/// A grid together with the FFT plan that realises its transforms.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: Grid,
    plan: FftPlan,
}

impl Spectral {
    pub fn new(grid: Grid) -> Result<Self> {
        Ok(Spectral { plan: FftPlan::new(grid.len())?, grid })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `f(x_j) ↦ f̂(ξ_k)` in place.
    pub fn forward(&self, f: &mut [Complex64]) {
        alternate(f);
        self.plan.inverse(f);
        alternate(f);
        let dx = self.grid.dx;
        f.iter_mut().for_each(|v| *v *= dx);
    }

    /// `f̂(ξ_k) ↦ f(x_j)` in place.
    pub fn inverse(&self, f: &mut [Complex64]) {
        alternate(f);
        self.plan.forward(f);
        alternate(f);
        let s = 1.0 / (self.grid.n as f64 * self.grid.dx);
        f.iter_mut().for_each(|v| *v *= s);
    }

    pub fn forward_to_vec(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut v = f.to_vec();
        self.forward(&mut v);
        v
    }

    pub fn inverse_to_vec(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut v = f.to_vec();
        self.inverse(&mut v);
        v
    }
}

fn alternate(f: &mut [Complex64]) {
    f.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
}
