//! Perpetual Bermudan and American puts.
//!
//! With `Φ(ξ) = 1 − e^{−rΔt} σ(ξ) Ψ(ξ + iα_d, Δt)` (or `Φ_c = r − σ(ξ) ψ(ξ + iα_d)`
//! under continuous monitoring) factorised as `Φ = Φ⊕Φ⊖`, the discounted
//! distribution of the first-passage position below a level `l` is
//!
//! ```text
//! ĝ_l(ξ) = Φ⊖(ξ) · F[ 1{x<l} · F⁻¹[1/Φ⊖] ](ξ)
//! ```
//!
//! Two routes to the price are provided:
//!
//! * **Green**: the barrier is `D = K Φ⊖(0)/Φ⊖(−i)` and the price is the
//!   first-touch plus overshoot residue formula.
//! * **Spitzer**: the exercise value `v(D)` of the contract started on its own
//!   barrier is linear in `D`, `v(D) = c + mD`; probing it at `D1 = 0` and `D2`
//!   gives the line, and the barrier is where it meets `K − D`. The price is
//!   then `Σ_{x<l} (K − S0 e^x) g_l(x) dx`.
//!
//! All `x`-space sums carry the weight `e^{α_d x}`, which undoes the damping.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{exponential_filter, Grid, Spectral};
use crate::processes::LevyModel;
use crate::wiener_hopf::{below_weight, split_at_level, HilbertKernel, WienerHopf};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Monitoring {
    /// Exercise allowed every `Δt` years.
    Discrete(f64),
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Green,
    #[default]
    Spitzer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpetualPut {
    pub model: LevyModel,
    pub strike: f64,
    pub s0: f64,
    pub monitoring: Monitoring,
}

impl PerpetualPut {
    pub fn new(model: LevyModel, strike: f64, s0: f64, monitoring: Monitoring) -> Result<Self> {
        if !(strike.is_finite() && strike > 0.0) {
            return Err(Error::Parameter { name: "K", reason: "must be positive" });
        }
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::Parameter { name: "S0", reason: "must be positive" });
        }
        if let Monitoring::Discrete(dt) = monitoring {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Parameter { name: "dt", reason: "must be positive" });
            }
        }
        if model.r.is_nan() || model.r <= 0.0 {
            return Err(Error::Parameter { name: "r", reason: "must be positive for a perpetual contract" });
        }
        Ok(PerpetualPut { model, strike, s0, monitoring })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpetualNumerics {
    pub grid: usize,
    /// Truncation exponent λ in `T_bound = λ ln 10 / r`.
    pub lambda_bound: f64,
    /// Overrides the truncation bound when set.
    pub half_width: Option<f64>,
    pub alpha_d: f64,
    /// Order-12 filter inside `Φ`; `None` means on for discrete monitoring
    /// and off for continuous.
    pub filter: Option<bool>,
    pub filter_order: u32,
    /// First probe of the Spitzer line; `None` means `K/2`.
    pub d2: Option<f64>,
    /// Move the probe onto the barrier until it stops changing.
    pub refine: bool,
    /// Two-grid Richardson extrapolation of the barrier; `None` means on for
    /// continuous monitoring only.
    pub extrapolate: Option<bool>,
    pub kernel: HilbertKernel,
}

impl PerpetualNumerics {
    pub fn with_grid(grid: usize) -> Self {
        PerpetualNumerics { grid, ..Self::default() }
    }

    fn filter_on(&self, m: Monitoring) -> bool {
        self.filter.unwrap_or(matches!(m, Monitoring::Discrete(_)))
    }

    fn extrapolate_on(&self, m: Monitoring) -> bool {
        self.extrapolate.unwrap_or(matches!(m, Monitoring::Continuous))
    }
}

impl Default for PerpetualNumerics {
    fn default() -> Self {
        PerpetualNumerics {
            grid: 1 << 16,
            lambda_bound: 10.0,
            half_width: None,
            alpha_d: 0.0,
            filter: None,
            filter_order: 12,
            d2: None,
            refine: true,
            extrapolate: None,
            kernel: HilbertKernel::Periodic,
        }
    }
}

/// The exercise-value line `v(D) = c + m D` of the Spitzer calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub m: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierResult {
    pub barrier: f64,
    /// `log(D/S0)`.
    pub level: f64,
    pub line: Option<Line>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerpetualResult {
    pub price: f64,
    pub barrier: f64,
    pub line: Option<Line>,
    /// Barrier on the half-size grid, when extrapolation was used.
    pub coarse_barrier: Option<f64>,
    pub grid: usize,
    pub half_width: f64,
}

/// `b = 6 σ √(λ ln 10 / r)`: the log-price half-width beyond which discounting
/// has made every contribution smaller than `10^{−λ}`.
pub fn truncation_bound(model: &LevyModel, lambda_bound: f64) -> Result<f64> {
    if model.r.is_nan() || model.r <= 0.0 {
        return Err(Error::Parameter { name: "r", reason: "must be positive for a truncation bound" });
    }
    if !(lambda_bound.is_finite() && lambda_bound > 0.0) {
        return Err(Error::Parameter { name: "lambda_bound", reason: "must be positive" });
    }
    let t_bound = lambda_bound * core::f64::consts::LN_10 / model.r;
    Ok(6.0 * model.volatility() * libm::sqrt(t_bound))
}

/// The function to be factorised at frequency `ξ`, with filter value `sigma`.
pub fn phi_body(model: &LevyModel, monitoring: Monitoring, xi: f64, alpha_d: f64, sigma: f64) -> Result<Complex64> {
    let z = Complex64::new(xi, alpha_d);
    match monitoring {
        Monitoring::Discrete(dt) => {
            let q = libm::exp(-model.r * dt);
            Ok(1.0 - q * sigma * model.char_function(z, dt)?)
        }
        Monitoring::Continuous => Ok(model.r - sigma * model.exponent(z)?),
    }
}

/// `F[e^{c x} F⁻¹ f̂](0)`, i.e. `f̂` read at `ξ = −ic`.
pub fn eval_shifted(sp: &Spectral, f_hat: &[Complex64], c: f64) -> Complex64 {
    let g = sp.inverse_to_vec(f_hat);
    let grid = sp.grid();
    let s: Complex64 = g.iter().enumerate().map(|(j, v)| v * libm::exp(c * grid.x(j))).sum();
    s * grid.dx()
}

/// Factorisation and first-passage kernel for one grid.
pub struct Prepared {
    sp: Spectral,
    phi_minus: Vec<Complex64>,
    /// `F⁻¹[log Φ⊖]`, supported on `x ≤ 0` up to round-off.
    ell_minus: Vec<Complex64>,
    /// `F⁻¹[1/Φ⊖]`.
    p: Vec<Complex64>,
    /// `e^{α_d x_j}`.
    undamp: Vec<f64>,
}

impl Prepared {
    pub fn new(contract: &PerpetualPut, numerics: &PerpetualNumerics, n: usize, b: f64) -> Result<Self> {
        let grid = Grid::new(n, b)?;
        let sp = Spectral::new(grid)?;
        let sigma = if numerics.filter_on(contract.monitoring) {
            exponential_filter(&grid, numerics.filter_order)?
        } else {
            vec![1.0; n]
        };
        let phi = (0..n)
            .map(|k| phi_body(&contract.model, contract.monitoring, grid.xi(k), numerics.alpha_d, sigma[k]))
            .collect::<Result<Vec<_>>>()?;
        let wh = WienerHopf::new(&sp, numerics.kernel)?;
        let f = wh.factorize(&phi)?;
        let ell_minus = sp.inverse_to_vec(&f.log_minus);
        let inv: Vec<Complex64> = f.minus.iter().map(|v| 1.0 / v).collect();
        let p = sp.inverse_to_vec(&inv);
        let undamp = (0..n).map(|j| libm::exp(numerics.alpha_d * grid.x(j))).collect();
        Ok(Prepared { sp, phi_minus: f.minus, ell_minus, p, undamp })
    }

    pub fn grid(&self) -> &Grid {
        self.sp.grid()
    }

    /// `log Φ⊖` read at `ξ = −ic` (undamped).
    fn log_minus_at(&self, c: f64) -> f64 {
        let grid = self.grid();
        // Only the support x ≤ 0 is summed: round-off above zero would be
        // amplified by e^{cx}.
        let s: Complex64 = self.ell_minus[..=grid.zero()]
            .iter()
            .zip(&self.undamp)
            .enumerate()
            .map(|(j, (v, u))| v * u * libm::exp(c * grid.x(j)))
            .sum();
        s.re * grid.dx()
    }

    /// `Φ⊖(0)` and `Φ⊖(−i)`.
    pub fn minus_factor_values(&self) -> (f64, f64) {
        (libm::exp(self.log_minus_at(0.0)), libm::exp(self.log_minus_at(1.0)))
    }

    /// Discounted first-passage density `g_l` on the grid for the level `l`.
    fn passage(&self, l: f64) -> Vec<Complex64> {
        let (_, mut below) = split_at_level(&self.sp, &self.p, l);
        self.sp.forward(&mut below);
        below.iter_mut().zip(&self.phi_minus).for_each(|(a, b)| *a *= b);
        self.sp.inverse(&mut below);
        below
    }

    /// `(Σ_{x<l} g dx, Σ_{x<l} e^x g dx)` for the undamped `g`.
    fn passage_moments(&self, g: &[Complex64], l: f64) -> (f64, f64) {
        let grid = self.grid();
        let dx = grid.dx();
        let (mut a, mut e) = (0.0, 0.0);
        for (j, (v, u)) in g.iter().zip(&self.undamp).enumerate() {
            let x = grid.x(j);
            let w = below_weight(x, l, dx);
            if w > 0.0 {
                let gv = v.re * u * w;
                a += gv;
                e += gv * libm::exp(x);
            }
        }
        (a * dx, e * dx)
    }

    /// Barrier from the Green residue formula, `D = K Φ⊖(0)/Φ⊖(−i)`.
    pub fn green_barrier(&self, strike: f64) -> f64 {
        strike * libm::exp(self.log_minus_at(0.0) - self.log_minus_at(1.0))
    }

    /// Spitzer calibration: the exercise-value line and the barrier where it
    /// meets `K − D`.
    pub fn spitzer_barrier(&self, strike: f64, d2: f64, refine: bool) -> Result<BarrierResult> {
        let grid = self.grid();
        let le = -0.5 * grid.dx();
        let g = self.passage(le);
        // v(D1 = 0) is the total discounted first-passage mass, read at ξ = 0.
        let total: f64 = g.iter().zip(&self.undamp).map(|(v, u)| v.re * u).sum::<f64>() * grid.dx();
        let v1 = strike * total;
        let (mass, emom) = self.passage_moments(&g, le);
        let mut d2 = d2;
        let mut barrier = d2;
        let mut line = Line { m: 0.0, c: v1 };
        for _ in 0..64 {
            let v2 = strike * mass - d2 * emom;
            let den = v2 - v1 + d2;
            if den.abs() < 1e-12 {
                return Err(Error::DegenerateLine(den));
            }
            barrier = (strike - v1) * d2 / den;
            line = Line { m: (v2 - v1) / d2, c: v1 };
            if !refine || (barrier - d2).abs() <= 1e-15 * strike {
                break;
            }
            d2 = barrier;
        }
        if !(barrier > 0.0 && barrier < strike) {
            return Err(Error::BarrierOutOfRange(barrier));
        }
        Ok(BarrierResult { barrier, level: 0.0, line: Some(line) })
    }

    /// Spitzer price with exercise below `barrier`.
    pub fn spitzer_price(&self, contract: &PerpetualPut, barrier: f64) -> f64 {
        if contract.s0 <= barrier {
            return contract.strike - contract.s0;
        }
        let l = libm::log(barrier / contract.s0);
        let g = self.passage(l);
        let (mass, emom) = self.passage_moments(&g, l);
        contract.strike * mass - contract.s0 * emom
    }

    /// Green price: first-touch plus overshoot, `K Φ⊖(0) Σ p₋ − S0 Φ⊖(−i) Σ e^x p₋`.
    pub fn green_price(&self, contract: &PerpetualPut, barrier: f64) -> f64 {
        if contract.s0 <= barrier {
            return contract.strike - contract.s0;
        }
        let l = libm::log(barrier / contract.s0);
        let (mass, emom) = self.passage_moments(&self.p, l);
        let (f0, fi) = self.minus_factor_values();
        contract.strike * f0 * mass - contract.s0 * fi * emom
    }

    fn barrier(&self, contract: &PerpetualPut, numerics: &PerpetualNumerics, method: Method) -> Result<BarrierResult> {
        let k = contract.strike;
        match method {
            Method::Green => {
                let d = self.green_barrier(k);
                if !(d > 0.0 && d < k) {
                    return Err(Error::BarrierOutOfRange(d));
                }
                Ok(BarrierResult { barrier: d, level: 0.0, line: None })
            }
            Method::Spitzer => self.spitzer_barrier(k, numerics.d2.unwrap_or(0.5 * k), numerics.refine),
        }
    }
}

fn solve(
    contract: &PerpetualPut,
    numerics: &PerpetualNumerics,
    method: Method,
) -> Result<(Prepared, BarrierResult, Option<f64>)> {
    let b = match numerics.half_width {
        Some(b) => b,
        None => truncation_bound(&contract.model, numerics.lambda_bound)?,
    };
    let fine = Prepared::new(contract, numerics, numerics.grid, b)?;
    let mut br = fine.barrier(contract, numerics, method)?;
    let mut coarse_barrier = None;
    if numerics.extrapolate_on(contract.monitoring) {
        let coarse = Prepared::new(contract, numerics, numerics.grid / 2, b)?;
        let bc = coarse.barrier(contract, numerics, method)?.barrier;
        coarse_barrier = Some(bc);
        br.barrier = 2.0 * br.barrier - bc;
        if !(br.barrier > 0.0 && br.barrier < contract.strike) {
            return Err(Error::BarrierOutOfRange(br.barrier));
        }
    }
    br.level = libm::log(br.barrier / contract.s0);
    Ok((fine, br, coarse_barrier))
}

/// Optimal exercise barrier without the final pricing pass.
pub fn calibrate_barrier(contract: &PerpetualPut, numerics: &PerpetualNumerics, method: Method) -> Result<BarrierResult> {
    Ok(solve(contract, numerics, method)?.1)
}

pub fn price_perpetual(contract: &PerpetualPut, numerics: &PerpetualNumerics, method: Method) -> Result<PerpetualResult> {
    let (fine, br, coarse_barrier) = solve(contract, numerics, method)?;
    let price = match method {
        Method::Green => fine.green_price(contract, br.barrier),
        Method::Spitzer => fine.spitzer_price(contract, br.barrier),
    };
    if !(price.is_finite() && br.barrier.is_finite()) {
        return Err(Error::NonFinite("perpetual price"));
    }
    Ok(PerpetualResult {
        price,
        barrier: br.barrier,
        line: br.line,
        coarse_barrier,
        grid: numerics.grid,
        half_width: fine.grid().half_width(),
    })
}
