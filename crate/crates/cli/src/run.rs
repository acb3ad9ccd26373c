use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use spitzer_core::early_exercise::{price_perpetual, Monitoring, PerpetualPut};
use spitzer_core::mc::{bermudan_price, quantile_price};
use spitzer_core::processes::Process;
use spitzer_core::quantile::price_quantile_with;

use crate::config::{Contract, Reference, ReferenceKind, Resolved};
use crate::error::{CliError, Context, Result};
use crate::exec::Rayon;

/// One pricing at a fixed grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priced {
    pub price: f64,
    pub barrier: Option<f64>,
    pub half_width: f64,
    pub mass: Option<f64>,
    pub rounded_alpha: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub contract: &'static str,
    pub process: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<&'static str>,
    pub price: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<f64>,
    pub grid_n: usize,
    pub grid_exponent: u32,
    pub half_width: f64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_two_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounded_alpha: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRecord {
    pub contract: &'static str,
    pub process: String,
    pub price: f64,
    pub two_sd: f64,
    pub paths: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub seconds: f64,
}

/// Perpetual put under Black–Scholes with continuous exercise: barrier
/// `γK/(1+γ)` with `γ = 2r/σ²`.
pub fn american_gaussian(put: &PerpetualPut) -> Option<(f64, f64)> {
    let (Process::Gaussian { sigma }, Monitoring::Continuous) = (put.model.process, put.monitoring) else {
        return None;
    };
    let g = 2.0 * put.model.r / (sigma * sigma);
    let d = g * put.strike / (1.0 + g);
    let price = if put.s0 <= d { put.strike - put.s0 } else { (put.strike - d) * (put.s0 / d).powf(-g) };
    Some((price, d))
}

impl Resolved {
    pub fn price_at(&self, exponent: u32) -> Result<Priced> {
        let n = 1usize << exponent;
        match &self.contract {
            Contract::Perpetual { put, method } => {
                let numerics = spitzer_core::early_exercise::PerpetualNumerics { grid: n, ..self.perpetual };
                let r = price_perpetual(put, &numerics, *method).ctx("early_exercise")?;
                Ok(Priced { price: r.price, barrier: Some(r.barrier), half_width: r.half_width, mass: None, rounded_alpha: None })
            }
            Contract::Quantile(c) => {
                let numerics = spitzer_core::quantile::QuantileNumerics { grid: n, ..self.quantile };
                let r = price_quantile_with(&Rayon, c, &numerics).ctx("quantile")?;
                Ok(Priced { price: r.price, barrier: None, half_width: r.half_width, mass: Some(r.mass), rounded_alpha: Some(r.rounded) })
            }
        }
    }

    fn method(&self) -> Option<&'static str> {
        match self.contract {
            Contract::Perpetual { method, .. } => Some(match method {
                spitzer_core::early_exercise::Method::Spitzer => "spitzer",
                spitzer_core::early_exercise::Method::Green => "green",
            }),
            Contract::Quantile(_) => None,
        }
    }

    /// Exponent of the self reference: the configured one, else two above the
    /// finest grid in use, capped at the top of the range.
    pub fn reference_exponent(&self, finest: u32) -> u32 {
        self.reference_grid.unwrap_or((finest + 2).min(22))
    }

    /// Reference price and, for Monte Carlo, its two-standard-deviation band.
    pub fn reference_value(&self, finest: u32) -> Result<Option<(f64, Option<f64>)>> {
        let Some(reference) = self.reference else { return Ok(None) };
        Ok(Some(match reference {
            Reference::Value(v) => (v, None),
            Reference::Named(ReferenceKind::ClosedForm) => {
                let Contract::Perpetual { put, .. } = &self.contract else { unreachable!("checked in resolve") };
                (american_gaussian(put).expect("checked in resolve").0, None)
            }
            Reference::Named(ReferenceKind::SelfGrid) => (self.price_at(self.reference_exponent(finest))?.price, None),
            Reference::Named(ReferenceKind::Mc) => {
                let mc = self.mc()?;
                (mc.price, Some(mc.two_sd))
            }
        }))
    }

    pub fn run(&self) -> Result<Record> {
        let start = Instant::now();
        let p = self.price_at(self.grid)?;
        let seconds = start.elapsed().as_secs_f64();
        let reference = self.reference_value(self.grid)?;
        Ok(Record {
            contract: self.contract.kind(),
            process: self.process.clone(),
            method: self.method(),
            price: p.price,
            barrier: p.barrier,
            grid_n: 1 << self.grid,
            grid_exponent: self.grid,
            half_width: p.half_width,
            seconds,
            reference: reference.map(|r| r.0),
            abs_error: reference.map(|r| (p.price - r.0).abs()),
            mc_two_sd: reference.and_then(|r| r.1),
            mass: p.mass,
            rounded_alpha: p.rounded_alpha,
        })
    }

    /// Rows of `(grid_n, price, barrier, abs_error, cpu_seconds)`, one per
    /// exponent. Rows run one after another so the timings do not compete for
    /// cores.
    pub fn sweep_rows(&self) -> Result<Vec<SweepRow>> {
        let (lo, hi) = self.sweep.unwrap_or((self.grid, self.grid));
        let reference = self.reference_value(hi)?.map(|r| r.0);
        (lo..=hi)
            .map(|e| {
                let (p, seconds) = timed(|| self.price_at(e))?;
                Ok(SweepRow {
                    grid_n: 1 << e,
                    price: p.price,
                    barrier: p.barrier,
                    abs_error: reference.map(|r| (p.price - r).abs()),
                    cpu_seconds: seconds,
                })
            })
            .collect()
    }

    pub fn mc(&self) -> Result<McRecord> {
        let start = Instant::now();
        let cfg = &self.mc;
        let rec = match &self.contract {
            Contract::Perpetual { put, .. } => {
                let b = bermudan_price(&Rayon, put, cfg).ctx("mc")?;
                McRecord {
                    contract: self.contract.kind(),
                    process: self.process.clone(),
                    price: b.estimate.price,
                    two_sd: b.estimate.two_sd,
                    paths: b.estimate.paths,
                    seed: cfg.seed,
                    estimator: None,
                    barrier: Some(b.barrier),
                    horizon: Some(b.horizon),
                    seconds: 0.0,
                }
            }
            Contract::Quantile(c) => {
                let e = quantile_price(&Rayon, c, cfg).ctx("mc")?;
                McRecord {
                    contract: "quantile",
                    process: self.process.clone(),
                    price: e.price,
                    two_sd: e.two_sd,
                    paths: e.paths,
                    seed: cfg.seed,
                    estimator: Some(match cfg.estimator {
                        spitzer_core::mc::QuantileEstimator::OrderStatistic => "order-statistic",
                        spitzer_core::mc::QuantileEstimator::DpwSplit => "dpw-split",
                    }),
                    barrier: None,
                    horizon: None,
                    seconds: 0.0,
                }
            }
        };
        Ok(McRecord { seconds: start.elapsed().as_secs_f64(), ..rec })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub grid_n: usize,
    pub price: f64,
    pub barrier: Option<f64>,
    pub abs_error: Option<f64>,
    pub cpu_seconds: f64,
}

/// Median of three monotonic-clock timings; the value is from the first call.
pub fn timed<T>(mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = [0.0; 3];
    let start = Instant::now();
    let out = f()?;
    times[0] = start.elapsed().as_secs_f64();
    for t in &mut times[1..] {
        let start = Instant::now();
        f()?;
        *t = start.elapsed().as_secs_f64();
    }
    times.sort_by(f64::total_cmp);
    Ok((out, times[1]))
}

pub const SWEEP_HEADER: [&str; 5] = ["grid_n", "price", "barrier", "abs_error", "cpu_seconds"];

fn full(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([r.grid_n.to_string(), full(Some(r.price)), full(r.barrier), full(r.abs_error), full(Some(r.cpu_seconds))])?;
    }
    w.flush().map_err(|source| CliError::Io { path: "<csv>".into(), source })?;
    Ok(())
}
