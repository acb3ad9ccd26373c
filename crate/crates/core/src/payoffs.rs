//! Damped vanilla and barrier payoffs, their closed-form transforms and the
//! Plancherel pricing sum.
//!
//! The damped payoff is `φ(x) = e^{α_d x} S0 (θ(e^x − e^k))⁺ 1_{(l,u)}(x)` and
//! its transform is integrated in closed form between `a` and `b`:
//!
//! ```text
//! φ̂(ξ) = S0 [ (e^{(1+iξ+α)a} − e^{(1+iξ+α)b}) / (1+iξ+α) − (e^{k+(iξ+α)a} − e^{k+(iξ+α)b}) / (iξ+α) ]
//! ```
//!
//! with `a = u, b = max(k, l)` for a call and `a = l, b = min(k, u)` for a put.

use alloc::vec::Vec;

use crate::grid::Grid;
use crate::{Complex64, Error, Result};

const POLE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    pub fn theta(self) -> f64 {
        match self {
            OptionKind::Call => 1.0,
            OptionKind::Put => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffSpec {
    pub kind: OptionKind,
    pub s0: f64,
    pub strike: f64,
    /// Lower log-barrier `log(L/S0)`, possibly `-inf`.
    pub lower: f64,
    /// Upper log-barrier `log(U/S0)`, possibly `+inf`.
    pub upper: f64,
    pub alpha_d: f64,
}

impl PayoffSpec {
    /// Plain vanilla payoff (no barriers).
    pub fn vanilla(kind: OptionKind, s0: f64, strike: f64, alpha_d: f64) -> Result<Self> {
        Self::new(kind, s0, strike, f64::NEG_INFINITY, f64::INFINITY, alpha_d)
    }

    pub fn new(kind: OptionKind, s0: f64, strike: f64, lower: f64, upper: f64, alpha_d: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::Parameter { name: "S0", reason: "must be positive" });
        }
        if !(strike.is_finite() && strike > 0.0) {
            return Err(Error::Parameter { name: "K", reason: "must be positive" });
        }
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::Parameter { name: "barriers", reason: "need lower < upper" });
        }
        if !alpha_d.is_finite() {
            return Err(Error::Parameter { name: "alpha_d", reason: "must be finite" });
        }
        Ok(PayoffSpec { kind, s0, strike, lower, upper, alpha_d })
    }

    pub fn log_strike(&self) -> f64 {
        libm::log(self.strike / self.s0)
    }

    fn limits(&self) -> (f64, f64) {
        let k = self.log_strike();
        match self.kind {
            OptionKind::Call => (self.upper, k.max(self.lower)),
            OptionKind::Put => (self.lower, k.min(self.upper)),
        }
    }

    /// Undamped payoff at log-price `x`.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.lower || x >= self.upper {
            return 0.0;
        }
        let s = self.s0 * libm::exp(x);
        match self.kind {
            OptionKind::Call => (s - self.strike).max(0.0),
            OptionKind::Put => (self.strike - s).max(0.0),
        }
    }

    /// Damped payoff `φ(x)` at log-price `x`.
    pub fn damped(&self, x: f64) -> f64 {
        let v = self.value(x);
        if v == 0.0 {
            0.0
        } else {
            v * libm::exp(self.alpha_d * x)
        }
    }

    /// Interval of log-prices where the payoff is nonzero.
    pub fn support(&self) -> (f64, f64) {
        let (far, near) = self.limits();
        match self.kind {
            OptionKind::Call => (near, far),
            OptionKind::Put => (far, near),
        }
    }

    /// Value and first two derivatives at `x` of the smooth branch
    /// `θ(S0 e^x − K) e^{α_d x}` that the damped payoff follows on its support.
    pub fn branch_derivatives(&self, x: f64) -> [f64; 3] {
        let a = self.alpha_d;
        let s = self.s0 * libm::exp((1.0 + a) * x);
        let k = self.strike * libm::exp(a * x);
        let t = self.kind.theta();
        [t * (s - k), t * ((1.0 + a) * s - a * k), t * ((1.0 + a) * (1.0 + a) * s - a * a * k)]
    }

    /// `φ(x_j)` on the grid, with half weight on a barrier that falls on a node.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        let tol = 1e-9 * grid.dx();
        (0..grid.len())
            .map(|j| {
                let x = grid.x(j);
                if (x - self.lower).abs() <= tol || (x - self.upper).abs() <= tol {
                    let s = self.s0 * libm::exp(x);
                    let v = (self.kind.theta() * (s - self.strike)).max(0.0);
                    0.5 * v * libm::exp(self.alpha_d * x)
                } else {
                    self.damped(x)
                }
            })
            .collect()
    }

    /// Closed-form transform `φ̂(ξ)`; `ξ` may be complex.
    pub fn transform(&self, xi: Complex64) -> Result<Complex64> {
        let (a, b) = self.limits();
        let empty = match self.kind {
            OptionKind::Call => b >= a,
            OptionKind::Put => b <= a,
        };
        if empty {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let k = self.log_strike();
        let c1 = Complex64::new(1.0 + self.alpha_d, 0.0) + Complex64::new(0.0, 1.0) * xi;
        let c0 = c1 - 1.0;
        if c1.norm() < POLE_GUARD {
            return Err(Error::PoleProximity("1 + iξ + α_d"));
        }
        if c0.norm() < POLE_GUARD {
            return Err(Error::PoleProximity("iξ + α_d"));
        }
        let t1 = (edge(c1, a, 0.0, self.alpha_d)? - edge(c1, b, 0.0, self.alpha_d)?) / c1;
        let t0 = (edge(c0, a, k, self.alpha_d)? - edge(c0, b, k, self.alpha_d)?) / c0;
        Ok(self.s0 * (t1 - t0))
    }
}

/// `e^{shift + c·x}`, with the infinite endpoints sent to their limits.
fn edge(c: Complex64, x: f64, shift: f64, alpha_d: f64) -> Result<Complex64> {
    if x.is_finite() {
        return Ok((c * x + shift).exp());
    }
    if c.re * x.signum() < 0.0 {
        Ok(Complex64::new(0.0, 0.0))
    } else {
        Err(Error::NotIntegrable(alpha_d))
    }
}

/// `discount · (dξ/2π) Σ φ̂(ξ_k) conj(p̂(ξ_k))`, where `p̂` is the transform of
/// the damped density `e^{-α_d x} p(x)`, i.e. `Ψ(ξ + iα_d)`.
///
/// The sum must come out real; a residual above `1e-8·|price|` (plus a small
/// absolute floor) is reported as [`Error::ImaginaryResidual`].
pub fn plancherel_price(grid: &Grid, payoff_hat: &[Complex64], p_hat: &[Complex64], discount: f64) -> Result<f64> {
    if payoff_hat.len() != grid.len() || p_hat.len() != grid.len() {
        return Err(Error::GridSize(payoff_hat.len()));
    }
    let s: Complex64 = payoff_hat.iter().zip(p_hat).map(|(f, p)| f * p.conj()).sum();
    let v = s * discount * grid.dxi() / (2.0 * core::f64::consts::PI);
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::NonFinite("Plancherel sum"));
    }
    if v.im.abs() > 1e-8 * v.re.abs() + 1e-14 {
        return Err(Error::ImaginaryResidual(v.im));
    }
    Ok(v.re)
}

/// Payoff transform sampled on the frequency grid.
pub fn transform_on_grid(spec: &PayoffSpec, grid: &Grid) -> Result<Vec<Complex64>> {
    (0..grid.len()).map(|k| spec.transform(Complex64::new(grid.xi(k), 0.0))).collect()
}
