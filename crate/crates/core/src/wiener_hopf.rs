//! Hilbert transform, Plemelj–Sokhotsky decomposition and Wiener–Hopf
//! factorisation by log-decompose-exp.
//!
//! Two discrete Hilbert kernels are provided:
//!
//! * [`HilbertKernel::Periodic`] is the sinc quadrature wrapped onto the
//!   periodic frequency grid. It acts exactly as `-i·F[sgn(x)·F⁻¹ f]`, so a
//!   decomposition about a level `l` is a plain indicator mask in log-price
//!   space (half weight on a grid point that coincides with `l`). This is the
//!   default: it converges spectrally and keeps every later step consistent
//!   with the lattice.
//! * [`HilbertKernel::Sinc`] is Stenger's linear sinc sum
//!   `(Hf)_k = Σ_{j≠k} f_j (1 − cos((k−j)π))/((k−j)π)` evaluated by a
//!   zero-padded FFT convolution. Its truncation error decays only like `1/n`
//!   for functions that do not vanish at the grid edges.
//!
//! Convention: `H f(ξ) = (1/π) PV∫ f(η)/(ξ−η) dη`, so a function analytic in
//! the upper half-plane (log-price support on `x > 0`) satisfies `H f = −i f`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft::FftPlan;
use crate::grid::Spectral;
use crate::{Complex64, Error, Result};

const ZERO_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HilbertKernel {
    #[default]
    Periodic,
    Sinc,
}

/// `f = plus + minus` with log-price supports above and below the level.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub level: f64,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

/// `Φ = Φ⊕·Φ⊖`, kept together with the decomposed logarithms.
#[derive(Debug, Clone)]
pub struct WhFactors {
    pub log_plus: Vec<Complex64>,
    pub log_minus: Vec<Complex64>,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

pub struct WienerHopf<'a> {
    sp: &'a Spectral,
    kernel: HilbertKernel,
    sinc: Option<(FftPlan, Vec<Complex64>)>,
}

impl<'a> WienerHopf<'a> {
    pub fn new(sp: &'a Spectral, kernel: HilbertKernel) -> Result<Self> {
        let sinc = match kernel {
            HilbertKernel::Periodic => None,
            HilbertKernel::Sinc => {
                let n = sp.grid().len();
                let plan = FftPlan::new(2 * n)?;
                let mut k = vec![Complex64::new(0.0, 0.0); 2 * n];
                for m in 1..n {
                    if m % 2 == 1 {
                        let c = 2.0 / (PI * m as f64);
                        k[m] = Complex64::new(c, 0.0);
                        k[2 * n - m] = Complex64::new(-c, 0.0);
                    }
                }
                plan.forward(&mut k);
                Some((plan, k))
            }
        };
        Ok(WienerHopf { sp, kernel, sinc })
    }

    pub fn spectral(&self) -> &Spectral {
        self.sp
    }

    pub fn kernel(&self) -> HilbertKernel {
        self.kernel
    }

    pub fn hilbert(&self, f: &[Complex64]) -> Vec<Complex64> {
        match &self.sinc {
            None => {
                let grid = self.sp.grid();
                let mut g = self.sp.inverse_to_vec(f);
                let z = grid.zero();
                for (j, v) in g.iter_mut().enumerate() {
                    match j.cmp(&z) {
                        core::cmp::Ordering::Less => *v = -*v,
                        core::cmp::Ordering::Equal => *v = Complex64::new(0.0, 0.0),
                        core::cmp::Ordering::Greater => {}
                    }
                }
                self.sp.forward(&mut g);
                g.iter_mut().for_each(|v| *v *= Complex64::new(0.0, -1.0));
                g
            }
            Some((plan, khat)) => {
                let n = f.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
                buf[..n].copy_from_slice(f);
                plan.forward(&mut buf);
                buf.iter_mut().zip(khat).for_each(|(b, k)| *b *= k);
                plan.inverse(&mut buf);
                let s = 1.0 / (2 * n) as f64;
                buf.truncate(n);
                buf.iter_mut().for_each(|v| *v *= s);
                buf
            }
        }
    }

    /// Plemelj–Sokhotsky split of `f` about the log-level `l`.
    pub fn decompose(&self, f: &[Complex64], l: f64) -> Decomposition {
        match self.kernel {
            HilbertKernel::Periodic => {
                let g = self.sp.inverse_to_vec(f);
                let (mut plus, mut minus) = split_at_level(self.sp, &g, l);
                self.sp.forward(&mut plus);
                self.sp.forward(&mut minus);
                Decomposition { level: l, plus, minus }
            }
            HilbertKernel::Sinc => {
                let grid = self.sp.grid();
                let shifted: Vec<Complex64> = f
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * Complex64::from_polar(1.0, -l * grid.xi(k)))
                    .collect();
                let h = self.hilbert(&shifted);
                let mut plus = Vec::with_capacity(f.len());
                let mut minus = Vec::with_capacity(f.len());
                for (k, (v, hv)) in f.iter().zip(&h).enumerate() {
                    let t = Complex64::from_polar(1.0, l * grid.xi(k)) * Complex64::new(0.0, 1.0) * hv;
                    plus.push(0.5 * (v + t));
                    minus.push(0.5 * (v - t));
                }
                Decomposition { level: l, plus, minus }
            }
        }
    }

    /// `Φ⊕ = exp((log Φ)₀₊)`, `Φ⊖ = exp((log Φ)₀₋)`.
    pub fn factorize(&self, phi: &[Complex64]) -> Result<WhFactors> {
        let log_phi = continuous_log(phi, self.sp.grid().zero())?;
        let d = self.decompose(&log_phi, 0.0);
        let plus = d.plus.iter().map(|v| v.exp()).collect();
        let minus = d.minus.iter().map(|v| v.exp()).collect();
        Ok(WhFactors { log_plus: d.plus, log_minus: d.minus, plus, minus })
    }
}

/// Log-price masks `g·1{x>l}` and `g·1{x<l}`; a grid point on `l` is shared
/// half and half, which is what the periodic Hilbert kernel does at `x = 0`.
pub fn split_at_level(sp: &Spectral, g: &[Complex64], l: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = sp.grid();
    let tol = 1e-9 * grid.dx();
    let mut plus = g.to_vec();
    let mut minus = g.to_vec();
    for (j, (p, m)) in plus.iter_mut().zip(minus.iter_mut()).enumerate() {
        let x = grid.x(j);
        if (x - l).abs() <= tol {
            *p *= 0.5;
            *m *= 0.5;
        } else if x > l {
            *m = Complex64::new(0.0, 0.0);
        } else {
            *p = Complex64::new(0.0, 0.0);
        }
    }
    (plus, minus)
}

/// Weight applied at `x_j` when integrating over `x < l` with the same
/// half-point convention as [`split_at_level`].
pub fn below_weight(x: f64, l: f64, dx: f64) -> f64 {
    if (x - l).abs() <= 1e-9 * dx {
        0.5
    } else if x < l {
        1.0
    } else {
        0.0
    }
}

/// Logarithm with the argument unwrapped along the grid and pinned to the
/// principal value at `anchor`. Rejects zeros and nonzero winding.
pub fn continuous_log(phi: &[Complex64], anchor: usize) -> Result<Vec<Complex64>> {
    let mut args = Vec::with_capacity(phi.len());
    let mut prev = 0.0;
    for (k, v) in phi.iter().enumerate() {
        let m = v.norm();
        if m.is_nan() {
            return Err(Error::NonFinite("factorisation input"));
        }
        if m <= ZERO_GUARD {
            return Err(Error::ZeroCrossing(m));
        }
        let mut a = v.arg();
        if k > 0 {
            let steps = libm::round((a - prev) / (2.0 * PI));
            a -= steps * 2.0 * PI;
        }
        args.push(a);
        prev = a;
    }
    let winding = libm::round((args[args.len() - 1] - args[0]) / (2.0 * PI)) as i64;
    if winding != 0 {
        return Err(Error::NonzeroIndex(winding));
    }
    let offset = phi[anchor].arg() - args[anchor];
    Ok(phi.iter().zip(&args).map(|(v, a)| Complex64::new(libm::log(v.norm()), a + offset)).collect())
}
