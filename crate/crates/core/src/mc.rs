//! Monte Carlo oracle for the quantile and perpetual Bermudan prices.
//!
//! Every path owns a ChaCha8 stream selected by its index, and paths are
//! reduced in fixed blocks, so a run is bit-reproducible whatever executor is
//! used.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};

use crate::early_exercise::PerpetualPut;
use crate::exec::Executor;
use crate::processes::{LevyModel, Process};
use crate::quantile::QuantileContract;
use crate::{Error, Result};

const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantileEstimator {
    /// Sort one `N`-step path and take the `j`-th smallest of `X_0..X_N`.
    #[default]
    OrderStatistic,
    /// Maximum of a `j`-step path plus minimum of an independent `(N−j)`-step path.
    DpwSplit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    /// Bermudan truncation in monitoring dates; `None` uses
    /// `ceil(λ ln 10 / (rΔt))` with `λ = horizon_lambda`.
    pub horizon: Option<usize>,
    pub horizon_lambda: f64,
    pub estimator: QuantileEstimator,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { paths: 100_000, seed: 20_240_601, horizon: None, horizon_lambda: 10.0, estimator: QuantileEstimator::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    /// Two sample standard deviations of the mean.
    pub two_sd: f64,
    pub paths: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McBermudan {
    pub estimate: McEstimate,
    pub barrier: f64,
    /// Exercise-value line `c + mD` estimated from paths started on the barrier.
    pub m: f64,
    pub c: f64,
    pub horizon: usize,
}

/// One-step sampler of the log-price increment over `Δt`.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    drift: f64,
    kind: StepKind,
}

#[derive(Debug, Clone, Copy)]
enum StepKind {
    Gaussian { sd: f64 },
    VarianceGamma { theta: f64, sigma: f64, gamma: Gamma<f64> },
    Merton { sd: f64, jumps: Option<Poisson<f64>>, mu_j: f64, delta: f64 },
    Kou { sd: f64, jumps: Option<Poisson<f64>>, p: f64, eta1: f64, eta2: f64 },
}

impl Stepper {
    pub fn new(model: &LevyModel, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Parameter { name: "dt", reason: "must be positive" });
        }
        let poisson = |rate: f64| -> Result<Option<Poisson<f64>>> {
            if rate > 0.0 {
                Poisson::new(rate).map(Some).map_err(|_| Error::Parameter { name: "lambda", reason: "invalid jump rate" })
            } else {
                Ok(None)
            }
        };
        let kind = match model.process {
            Process::Gaussian { sigma } => StepKind::Gaussian { sd: sigma * libm::sqrt(dt) },
            Process::VarianceGamma { theta, sigma, nu } => StepKind::VarianceGamma {
                theta,
                sigma,
                gamma: Gamma::new(dt / nu, nu).map_err(|_| Error::Parameter { name: "nu", reason: "invalid gamma clock" })?,
            },
            Process::MertonJump { sigma, lambda, mu_j, delta } => {
                StepKind::Merton { sd: sigma * libm::sqrt(dt), jumps: poisson(lambda * dt)?, mu_j, delta }
            }
            Process::Kou { sigma, lambda, p, eta1, eta2 } => {
                StepKind::Kou { sd: sigma * libm::sqrt(dt), jumps: poisson(lambda * dt)?, p, eta1, eta2 }
            }
        };
        Ok(Stepper { drift: model.drift() * dt, kind })
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        let z = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
        self.drift
            + match self.kind {
                StepKind::Gaussian { sd } => sd * z(rng),
                StepKind::VarianceGamma { theta, sigma, gamma } => {
                    let g = gamma.sample(rng);
                    theta * g + sigma * libm::sqrt(g) * z(rng)
                }
                StepKind::Merton { sd, jumps, mu_j, delta } => {
                    let mut x = sd * z(rng);
                    if let Some(po) = jumps {
                        let n = po.sample(rng);
                        if n > 0.0 {
                            x += mu_j * n + delta * libm::sqrt(n) * z(rng);
                        }
                    }
                    x
                }
                StepKind::Kou { sd, jumps, p, eta1, eta2 } => {
                    let mut x = sd * z(rng);
                    if let Some(po) = jumps {
                        let n = po.sample(rng) as u64;
                        for _ in 0..n {
                            let u = uniform(rng);
                            let e: f64 = Exp1.sample(rng);
                            x += if u < p { e / eta1 } else { -e / eta2 };
                        }
                    }
                    x
                }
            }
    }
}

fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn path_rng(seed: u64, phase: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((phase << 48) | path as u64);
    rng
}

/// Per-block `(Σ v, Σ v², extra...)`, reduced in block order.
fn run_blocks<E, F, const W: usize>(exec: &E, paths: usize, f: F) -> [f64; W]
where
    E: Executor,
    F: Fn(usize) -> [f64; W] + Sync,
{
    let blocks = paths.div_ceil(BLOCK);
    let sums = exec.map(blocks, |b| {
        let mut acc = [0.0; W];
        for i in b * BLOCK..((b + 1) * BLOCK).min(paths) {
            let v = f(i);
            acc.iter_mut().zip(v).for_each(|(a, v)| *a += v);
        }
        acc
    });
    let mut total = [0.0; W];
    for s in sums {
        total.iter_mut().zip(s).for_each(|(t, s)| *t += s);
    }
    total
}

fn estimate(sum: f64, sum2: f64, paths: usize) -> McEstimate {
    let n = paths as f64;
    let mean = sum / n;
    let var = ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0);
    McEstimate { price: mean, two_sd: 2.0 * libm::sqrt(var / n), paths }
}

fn check_paths(paths: usize) -> Result<()> {
    if paths < 2 {
        return Err(Error::Parameter { name: "paths", reason: "need at least two paths" });
    }
    Ok(())
}

/// Discounted α-quantile payoff.
pub fn quantile_price<E: Executor>(exec: &E, contract: &QuantileContract, cfg: &McConfig) -> Result<McEstimate> {
    check_paths(cfg.paths)?;
    let stepper = Stepper::new(&contract.model, contract.dt())?;
    let n = contract.dates;
    let j = contract.index();
    let disc = libm::exp(-contract.model.r * contract.maturity);
    let payoff = contract.payoff;
    let sums = run_blocks(exec, cfg.paths, |i| {
        let x = match cfg.estimator {
            QuantileEstimator::OrderStatistic => {
                let mut rng = path_rng(cfg.seed, 0, i);
                let mut xs = Vec::with_capacity(n + 1);
                let mut x = 0.0;
                xs.push(x);
                for _ in 0..n {
                    x += stepper.sample(&mut rng);
                    xs.push(x);
                }
                let (_, v, _) = xs.select_nth_unstable_by(j, f64::total_cmp);
                *v
            }
            QuantileEstimator::DpwSplit => {
                let mut rng = path_rng(cfg.seed, 1, i);
                let (mut x, mut hi) = (0.0f64, 0.0f64);
                for _ in 0..j {
                    x += stepper.sample(&mut rng);
                    hi = hi.max(x);
                }
                let (mut y, mut lo) = (0.0f64, 0.0f64);
                for _ in 0..n - j {
                    y += stepper.sample(&mut rng);
                    lo = lo.min(y);
                }
                hi + lo
            }
        };
        let v = disc * payoff.value(x);
        [v, v * v]
    });
    Ok(estimate(sums[0], sums[1], cfg.paths))
}

/// Dates simulated before a Bermudan path is abandoned.
pub fn bermudan_horizon(contract: &PerpetualPut, dt: f64, cfg: &McConfig) -> usize {
    cfg.horizon.unwrap_or_else(|| {
        libm::ceil(cfg.horizon_lambda * core::f64::consts::LN_10 / (contract.model.r * dt)) as usize
    })
}

/// First date `n ≥ 1` with `X_n ≤ level`, and `X_n`, within `horizon` dates.
fn first_passage<R: RngCore>(stepper: &Stepper, rng: &mut R, level: f64, horizon: usize) -> Option<(usize, f64)> {
    let mut x = 0.0;
    for n in 1..=horizon {
        x += stepper.sample(rng);
        if x <= level {
            return Some((n, x));
        }
    }
    None
}

/// Perpetual Bermudan put by truncated-horizon simulation.
///
/// Paths started on a candidate barrier `D` are stopped at the first date they
/// are at or below it. For fixed stopping dates the discounted exercise value
/// is `K E[e^{−rτΔt}] − D E[e^{−rτΔt} e^{X_τ}]`, a line in `D`; one batch of
/// paths gives both coefficients and the barrier is where the line meets
/// `K − D`. An independent batch from `S0` then prices at that barrier.
pub fn bermudan_price<E: Executor>(exec: &E, contract: &PerpetualPut, cfg: &McConfig) -> Result<McBermudan> {
    check_paths(cfg.paths)?;
    let dt = match contract.monitoring {
        crate::early_exercise::Monitoring::Discrete(dt) => dt,
        crate::early_exercise::Monitoring::Continuous => {
            return Err(Error::Parameter { name: "monitoring", reason: "Monte Carlo needs discrete monitoring" })
        }
    };
    let stepper = Stepper::new(&contract.model, dt)?;
    let horizon = bermudan_horizon(contract, dt, cfg);
    let rdt = contract.model.r * dt;
    let k = contract.strike;

    let line = run_blocks(exec, cfg.paths, |i| {
        let mut rng = path_rng(cfg.seed, 2, i);
        match first_passage(&stepper, &mut rng, 0.0, horizon) {
            Some((n, x)) => {
                let a = libm::exp(-rdt * n as f64);
                [a, a * libm::exp(x)]
            }
            None => [0.0, 0.0],
        }
    });
    let c = k * line[0] / cfg.paths as f64;
    let m = -line[1] / cfg.paths as f64;
    let barrier = (k - c) / (1.0 + m);
    if !(barrier > 0.0 && barrier < k) {
        return Err(Error::BarrierOutOfRange(barrier));
    }

    let estimate = if contract.s0 <= barrier {
        McEstimate { price: k - contract.s0, two_sd: 0.0, paths: cfg.paths }
    } else {
        let level = libm::log(barrier / contract.s0);
        let s = run_blocks(exec, cfg.paths, |i| {
            let mut rng = path_rng(cfg.seed, 3, i);
            let v = match first_passage(&stepper, &mut rng, level, horizon) {
                Some((n, x)) => libm::exp(-rdt * n as f64) * (k - contract.s0 * libm::exp(x)),
                None => 0.0,
            };
            [v, v * v]
        });
        estimate(s[0], s[1], cfg.paths)
    };
    let tail = k * libm::exp(-rdt * horizon as f64);
    if tail >= 0.5 * estimate.two_sd && estimate.two_sd > 0.0 {
        return Err(Error::HorizonTooShort(tail));
    }
    Ok(McBermudan { estimate, barrier, m, c, horizon })
}
