//! Discretely monitored α-quantile options.
//!
//! With `j = round(αN)` the α-quantile of the walk `{X_0 = 0, X_1, …, X_N}`
//! splits (Dassios–Port–Wendel) into the maximum over `j` steps plus an
//! independent minimum over `N − j` steps. Their Fourier-z transforms come from
//! the Spitzer identities
//!
//! ```text
//! max: 1 / (Φ⊕(ξ,q) Φ⊖(0,q))      min: 1 / (Φ⊕(0,q) Φ⊖(ξ,q)),      Φ = 1 − q σ(ξ) Ψ(ξ + iα_d, Δt)
//! ```
//!
//! Each is inverted in `q` at its own date count, the two characteristic
//! functions are multiplied, filtered once more, and the product is paired
//! with the payoff on the log-price lattice, with end corrections where the
//! payoff has a kink or jump.

use alloc::vec::Vec;

use crate::exec::{Executor, Serial};
use crate::grid::{apply_filter, exponential_filter, Grid, Spectral};
use crate::inverse_z::ZPlan;
use crate::payoffs::PayoffSpec;
use crate::processes::LevyModel;
use crate::wiener_hopf::{HilbertKernel, WienerHopf};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileContract {
    pub model: LevyModel,
    pub payoff: PayoffSpec,
    pub maturity: f64,
    pub dates: usize,
    pub alpha: f64,
}

impl QuantileContract {
    pub fn new(model: LevyModel, payoff: PayoffSpec, maturity: f64, dates: usize, alpha: f64) -> Result<Self> {
        if !(maturity.is_finite() && maturity > 0.0) {
            return Err(Error::Parameter { name: "T", reason: "must be positive" });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter { name: "alpha", reason: "must lie in (0, 1)" });
        }
        let c = QuantileContract { model, payoff, maturity, dates, alpha };
        let j = c.index();
        if j < 1 || j + 1 > dates {
            return Err(Error::Parameter { name: "alpha", reason: "round(alpha N) must lie in 1..=N-1" });
        }
        Ok(c)
    }

    /// `j = round(αN)`, the number of steps taken by the maximum.
    pub fn index(&self) -> usize {
        libm::round(self.alpha * self.dates as f64) as usize
    }

    /// True when `αN` is not an integer and the quantile level was rounded.
    pub fn rounded(&self) -> bool {
        (self.alpha * self.dates as f64 - self.index() as f64).abs() > 1e-9
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.dates as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileNumerics {
    pub grid: usize,
    /// Grid half-width; `None` picks `max(2, 10·σ·√T)`.
    pub half_width: Option<f64>,
    pub filter: bool,
    pub filter_order: u32,
    pub lambda_acc: f64,
    pub kernel: HilbertKernel,
}

impl QuantileNumerics {
    pub fn with_grid(grid: usize) -> Self {
        QuantileNumerics { grid, ..Self::default() }
    }

    pub fn half_width_for(&self, contract: &QuantileContract) -> f64 {
        self.half_width.unwrap_or_else(|| {
            let s = contract.model.volatility() * libm::sqrt(contract.maturity);
            (10.0 * s).max(2.0)
        })
    }
}

impl Default for QuantileNumerics {
    fn default() -> Self {
        QuantileNumerics {
            grid: 1 << 12,
            half_width: None,
            filter: true,
            filter_order: 12,
            lambda_acc: ZPlan::DEFAULT_ACCURACY,
            kernel: HilbertKernel::Periodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileResult {
    pub price: f64,
    /// Total mass of the quantile density on the lattice, after undamping.
    pub mass: f64,
    pub index: usize,
    pub rounded: bool,
    pub grid: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Grid, filter and one-step characteristic function for a contract.
pub struct QuantileEngine {
    sp: Spectral,
    kernel: HilbertKernel,
    sigma: Vec<f64>,
    psi: Vec<Complex64>,
    lambda_acc: f64,
}

impl QuantileEngine {
    pub fn new(contract: &QuantileContract, numerics: &QuantileNumerics) -> Result<Self> {
        let b = numerics.half_width_for(contract);
        let grid = Grid::new(numerics.grid, b)?;
        let sigma = if numerics.filter {
            exponential_filter(&grid, numerics.filter_order)?
        } else {
            alloc::vec![1.0; grid.len()]
        };
        let dt = contract.dt();
        let ad = contract.payoff.alpha_d;
        let psi = (0..grid.len())
            .map(|k| contract.model.char_function(Complex64::new(grid.xi(k), ad), dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantileEngine { sp: Spectral::new(grid)?, kernel: numerics.kernel, sigma, psi, lambda_acc: numerics.lambda_acc })
    }

    pub fn grid(&self) -> &Grid {
        self.sp.grid()
    }

    /// Fourier-z transform of the running maximum or minimum at `q`.
    pub fn extremum_z(&self, q: Complex64, which: Extremum) -> Result<Vec<Complex64>> {
        let wh = WienerHopf::new(&self.sp, self.kernel)?;
        let phi: Vec<Complex64> = self.psi.iter().zip(&self.sigma).map(|(p, s)| 1.0 - q * *s * p).collect();
        let f = wh.factorize(&phi)?;
        let z = self.grid().zero();
        Ok(match which {
            Extremum::Max => {
                let c = f.log_minus[z];
                f.log_plus.iter().map(|l| (-l - c).exp()).collect()
            }
            Extremum::Min => {
                let c = f.log_plus[z];
                f.log_minus.iter().map(|l| (-l - c).exp()).collect()
            }
        })
    }

    /// Characteristic function of the extremum over `steps` monitoring steps,
    /// made exactly Hermitian.
    pub fn extremum<E: Executor>(&self, exec: &E, steps: usize, which: Extremum) -> Result<Vec<Complex64>> {
        let plan = ZPlan::with_accuracy(steps, self.lambda_acc)?;
        let grid = *self.grid();
        let p = plan.invert_vec_hermitian(exec, |k| grid.mirror(k), |q| self.extremum_z(q, which))?;
        Ok((0..p.len()).map(|k| 0.5 * (p[k] + p[grid.mirror(k)].conj())).collect())
    }

    /// Damped density of `X_α` on the log-price grid.
    pub fn density<E: Executor>(&self, exec: &E, contract: &QuantileContract) -> Result<Vec<f64>> {
        let j = contract.index();
        let max = self.extremum(exec, j, Extremum::Max)?;
        let min = self.extremum(exec, contract.dates - j, Extremum::Min)?;
        let mut prod: Vec<Complex64> = max.iter().zip(&min).map(|(a, b)| a * b).collect();
        apply_filter(&mut prod, &self.sigma);
        self.sp.inverse(&mut prod);
        Ok(prod.into_iter().map(|v| v.re).collect())
    }
}

pub fn price_quantile(contract: &QuantileContract, numerics: &QuantileNumerics) -> Result<QuantileResult> {
    price_quantile_with(&Serial, contract, numerics)
}

pub fn price_quantile_with<E: Executor>(
    exec: &E,
    contract: &QuantileContract,
    numerics: &QuantileNumerics,
) -> Result<QuantileResult> {
    let engine = QuantileEngine::new(contract, numerics)?;
    let grid = *engine.grid();
    let density = engine.density(exec, contract)?;
    let phi = contract.payoff.sample(&grid);
    let dx = grid.dx();
    let ad = contract.payoff.alpha_d;
    let mut price = 0.0;
    let mut mass = 0.0;
    for (j, (g, f)) in density.iter().zip(&phi).enumerate() {
        price += f * g;
        mass += libm::exp(ad * grid.x(j)) * g;
    }
    price += kink_correction(&grid, &density, &contract.payoff) / dx;
    let disc = libm::exp(-contract.model.r * contract.maturity);
    let price = disc * price * dx;
    if !price.is_finite() {
        return Err(Error::NonFinite("quantile price"));
    }
    Ok(QuantileResult {
        price,
        mass: mass * dx,
        index: contract.index(),
        rounded: contract.rounded(),
        grid: grid.len(),
        half_width: grid.half_width(),
    })
}

fn bernoulli(m: usize, t: f64) -> f64 {
    match m {
        1 => t - 0.5,
        2 => t * t - t + 1.0 / 6.0,
        _ => t * t * t - 1.5 * t * t + 0.5 * t,
    }
}

/// Density and its first two derivatives at `p` from the cubic through four
/// nodes near `p`. The stencil stays on one side of `x = 0`, where the density
/// has its atom and jump; `None` if `p` is too close to zero for that.
fn local_density(grid: &Grid, g: &[f64], p: f64) -> Option<[f64; 3]> {
    let dx = grid.dx();
    let n = grid.len() as i64;
    let zero = grid.zero() as i64;
    let left = libm::floor((p - grid.x(0)) / dx) as i64;
    let mut first = left - 1;
    if p < 0.0 {
        first = first.min(zero - 4);
    } else {
        first = first.max(zero + 1);
    }
    if first < 0 || first + 3 >= n {
        return None;
    }
    let x0 = grid.x(first as usize);
    let t = (p - x0) / dx;
    if !(0.0..=3.0).contains(&t) {
        return None;
    }
    let y = |i: i64| g[(first + i) as usize];
    // Newton form on nodes 0..3 in units of dx.
    let d1 = [y(1) - y(0), y(2) - y(1), y(3) - y(2)];
    let d2 = [(d1[1] - d1[0]) / 2.0, (d1[2] - d1[1]) / 2.0];
    let d3 = (d2[1] - d2[0]) / 3.0;
    let v = y(0) + t * (d1[0] + (t - 1.0) * (d2[0] + (t - 2.0) * d3));
    let dv = d1[0] + (2.0 * t - 1.0) * d2[0] + (3.0 * t * t - 6.0 * t + 2.0) * d3;
    let ddv = 2.0 * d2[0] + (6.0 * t - 6.0) * d3;
    Some([v, dv / dx, ddv / (dx * dx)])
}

/// Euler–Maclaurin end terms at the edges of the payoff support.
///
/// The lattice sum `Σ φ_j g_j dx` is only second-order accurate across a kink
/// or jump of the payoff. On each side of an edge `p` the nodes sit at
/// `p ± (k + θ)dx`, and `Σ_k dx F(p + (k+θ)dx) = ∫_p F − Σ_m dx^m B_m(θ)/m! F^{(m−1)}(p)`
/// with Bernoulli polynomials `B_m`; adding the `m ≤ 3` terms leaves a fourth
/// order remainder. A node on the edge carries half weight, which cancels the
/// `m = 1` term.
fn kink_correction(grid: &Grid, g: &[f64], payoff: &PayoffSpec) -> f64 {
    let dx = grid.dx();
    let (lo, hi) = payoff.support();
    let inside = |p: f64| p.is_finite() && p > grid.x(0) + 4.0 * dx && p < grid.x(grid.len() - 1) - 4.0 * dx;
    let mut total = 0.0;
    // (edge, +1 when the support lies to its right)
    for (p, side) in [(lo, 1.0), (hi, -1.0)] {
        if !inside(p) {
            continue;
        }
        let Some(gd) = local_density(grid, g, p) else { continue };
        let f = payoff.branch_derivatives(p);
        let d = [f[0] * gd[0], f[1] * gd[0] + f[0] * gd[1], f[2] * gd[0] + 2.0 * f[1] * gd[1] + f[0] * gd[2]];
        // offset of the first node into the support, in units of dx
        let s = (p - grid.x(0)) / dx;
        let mut theta = if side > 0.0 { libm::ceil(s) - s } else { s - libm::floor(s) };
        let on_node = !(1e-9..=1.0 - 1e-9).contains(&theta);
        if on_node {
            theta = 0.0;
        }
        let mut h = 1.0;
        let mut fact = 1.0;
        for m in 1..=3usize {
            h *= dx;
            fact *= m as f64;
            if on_node && m == 1 {
                continue;
            }
            // F^{(m−1)} seen from the support, reflected for a left-side support
            let deriv = if side > 0.0 || m % 2 == 1 { d[m - 1] } else { -d[m - 1] };
            total += h * bernoulli(m, theta) / fact * deriv;
        }
    }
    total
}
