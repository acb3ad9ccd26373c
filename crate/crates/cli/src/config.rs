//! TOML run configuration and the built-in presets.
//!
//! ```toml
//! reference = "closed-form"      # or "self", "mc", or a number
//!
//! [contract]
//! kind = "american"              # "bermudan" (with dt), "american" or "quantile"
//! s0 = 1.0
//! strike = 1.0
//! method = "spitzer"
//!
//! [model]
//! kind = "gaussian"              # or preset = "vg-paper"
//! sigma = 0.4
//! r = 0.02
//!
//! [numerics]
//! grid = 20                      # log2 of the grid size, 7..=22
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spitzer_core::early_exercise::{Method, Monitoring, PerpetualNumerics, PerpetualPut};
use spitzer_core::mc::{McConfig, QuantileEstimator};
use spitzer_core::payoffs::{OptionKind, PayoffSpec};
use spitzer_core::processes::{LevyModel, Process};
use spitzer_core::quantile::{QuantileContract, QuantileNumerics};
use spitzer_core::wiener_hopf::HilbertKernel;

use crate::error::{CliError, Context, Result};

pub const GRID_EXPONENTS: std::ops::RangeInclusive<u32> = 7..=22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub contract: ContractConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reference {
    Value(f64),
    Named(ReferenceKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Perpetual American put under Black–Scholes.
    ClosedForm,
    /// The same contract on the richest grid.
    #[serde(rename = "self")]
    SelfGrid,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    #[default]
    Spitzer,
    Green,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Spitzer => Method::Spitzer,
            MethodName::Green => Method::Green,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionName {
    #[default]
    Call,
    Put,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContractConfig {
    Bermudan {
        #[serde(default = "one")]
        s0: f64,
        #[serde(default = "one")]
        strike: f64,
        dt: f64,
        #[serde(default)]
        method: MethodName,
    },
    American {
        #[serde(default = "one")]
        s0: f64,
        #[serde(default = "one")]
        strike: f64,
        #[serde(default)]
        method: MethodName,
    },
    Quantile {
        #[serde(default = "one")]
        s0: f64,
        strike: f64,
        #[serde(default)]
        option: OptionName,
        #[serde(default = "one")]
        maturity: f64,
        dates: usize,
        alpha: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Gaussian,
    #[serde(alias = "vg")]
    VarianceGamma,
    #[serde(alias = "mjd")]
    Merton,
    Kou,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ProcessKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    #[default]
    Periodic,
    Sinc,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// log2 of the grid size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<u32>,
    /// Inclusive range of grid exponents for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<[u32; 2]>,
    /// Grid exponent of the `self` reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_grid: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    #[default]
    OrderStatistic,
    DpwSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorName>,
}

macro_rules! quantile_preset {
    ($process:literal) => {
        concat!(
            r#"
            [contract]
            kind = "quantile"
            strike = 0.9
            option = "call"
            maturity = 1.0
            dates = 252
            alpha = 0.75
            [model]
            preset = ""#,
            $process,
            r#""
            r = 0.05
            [numerics]
            grid = 14
            "#
        )
    };
}

const PRESETS: &[(&str, &str)] = &[
    (
        "bermudan-spitzer",
        r#"
        [contract]
        kind = "bermudan"
        dt = 1.0
        method = "spitzer"
        [model]
        preset = "gaussian-paper"
        r = 0.05
        [numerics]
        grid = 20
        "#,
    ),
    (
        "bermudan-green",
        r#"
        [contract]
        kind = "bermudan"
        dt = 1.0
        method = "green"
        [model]
        preset = "gaussian-paper"
        r = 0.05
        [numerics]
        grid = 20
        "#,
    ),
    (
        "american-spitzer",
        r#"
        reference = "closed-form"
        [contract]
        kind = "american"
        method = "spitzer"
        [model]
        preset = "gaussian-paper"
        r = 0.02
        [numerics]
        grid = 20
        "#,
    ),
    (
        "american-green",
        r#"
        reference = "closed-form"
        [contract]
        kind = "american"
        method = "green"
        [model]
        preset = "gaussian-paper"
        r = 0.02
        [numerics]
        grid = 20
        "#,
    ),
    ("quantile-gaussian", quantile_preset!("gaussian-paper")),
    ("quantile-vg", quantile_preset!("vg-paper")),
    ("quantile-mjd", quantile_preset!("mjd-paper")),
];


pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|source| CliError::Parse { path: origin.to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
        Self::parse(text, name)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configs always serialise")
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let model = self.model.build()?;
        let n = &self.numerics;
        let contract = match self.contract {
            ContractConfig::Bermudan { s0, strike, dt, method } => Contract::Perpetual {
                put: PerpetualPut::new(model, strike, s0, Monitoring::Discrete(dt)).ctx("contract")?,
                method: method.into(),
            },
            ContractConfig::American { s0, strike, method } => Contract::Perpetual {
                put: PerpetualPut::new(model, strike, s0, Monitoring::Continuous).ctx("contract")?,
                method: method.into(),
            },
            ContractConfig::Quantile { s0, strike, option, maturity, dates, alpha } => {
                let kind = match option {
                    OptionName::Call => OptionKind::Call,
                    OptionName::Put => OptionKind::Put,
                };
                let payoff = PayoffSpec::vanilla(kind, s0, strike, n.alpha_d.unwrap_or(0.0)).ctx("payoffs")?;
                Contract::Quantile(QuantileContract::new(model, payoff, maturity, dates, alpha).ctx("quantile")?)
            }
        };
        let default_grid = match contract {
            Contract::Perpetual { .. } => 20,
            Contract::Quantile(_) => 14,
        };
        let grid = n.grid.unwrap_or(default_grid);
        check_exponent("numerics.grid", grid)?;
        if let Some([lo, hi]) = n.sweep {
            check_exponent("numerics.sweep", lo)?;
            check_exponent("numerics.sweep", hi)?;
            if lo > hi {
                return Err(CliError::invalid("numerics.sweep", "range must be increasing"));
            }
        }
        if let Some(g) = n.reference_grid {
            check_exponent("numerics.reference_grid", g)?;
        }
        if matches!(self.reference, Some(Reference::Named(ReferenceKind::ClosedForm))) {
            let gaussian_american = matches!(
                contract,
                Contract::Perpetual { put: PerpetualPut { monitoring: Monitoring::Continuous, model: LevyModel { process: Process::Gaussian { .. }, .. }, .. }, .. }
            );
            if !gaussian_american {
                return Err(CliError::invalid("reference", "a closed form exists only for the Gaussian American put"));
            }
        }

        let kernel = match n.kernel.unwrap_or_default() {
            KernelName::Periodic => HilbertKernel::Periodic,
            KernelName::Sinc => HilbertKernel::Sinc,
        };
        let base_p = PerpetualNumerics::default();
        let perpetual = PerpetualNumerics {
            grid: 1 << grid,
            lambda_bound: n.lambda_bound.unwrap_or(base_p.lambda_bound),
            half_width: n.half_width,
            alpha_d: n.alpha_d.unwrap_or(base_p.alpha_d),
            filter: n.filter,
            kernel,
            ..base_p
        };
        let base_q = QuantileNumerics::default();
        let quantile = QuantileNumerics {
            grid: 1 << grid,
            half_width: n.half_width,
            filter: n.filter.unwrap_or(base_q.filter),
            lambda_acc: n.lambda_acc.unwrap_or(base_q.lambda_acc),
            kernel,
            ..base_q
        };
        let m = self.mc.unwrap_or_default();
        let base_mc = McConfig::default();
        let mc = McConfig {
            paths: m.paths.unwrap_or(base_mc.paths),
            seed: m.seed.unwrap_or(base_mc.seed),
            horizon: m.horizon,
            horizon_lambda: m.horizon_lambda.unwrap_or(base_mc.horizon_lambda),
            estimator: match m.estimator.unwrap_or_default() {
                EstimatorName::OrderStatistic => QuantileEstimator::OrderStatistic,
                EstimatorName::DpwSplit => QuantileEstimator::DpwSplit,
            },
        };
        if mc.paths < 2 {
            return Err(CliError::invalid("mc.paths", "need at least two paths"));
        }
        Ok(Resolved {
            contract,
            grid,
            sweep: n.sweep.map(|[a, b]| (a, b)),
            reference_grid: n.reference_grid,
            reference: self.reference,
            perpetual,
            quantile,
            mc,
            process: self.model.label(),
        })
    }
}

fn check_exponent(field: &str, e: u32) -> Result<()> {
    if GRID_EXPONENTS.contains(&e) {
        Ok(())
    } else {
        Err(CliError::invalid(field, format!("grid exponent {e} outside 7..=22")))
    }
}

impl ModelConfig {
    fn label(&self) -> String {
        match (&self.preset, self.kind) {
            (Some(p), _) => p.clone(),
            (None, Some(k)) => serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            (None, None) => String::new(),
        }
    }

    pub fn build(&self) -> Result<LevyModel> {
        let process = match (&self.preset, self.kind) {
            (Some(_), Some(_)) => return Err(CliError::invalid("model", "give either `preset` or `kind`, not both")),
            (None, None) => return Err(CliError::invalid("model", "missing `preset` or `kind`")),
            (Some(name), None) => {
                Process::preset(name).ok_or_else(|| CliError::invalid("model.preset", format!("unknown process preset `{name}`")))?
            }
            (None, Some(kind)) => {
                let get = |v: Option<f64>, field: &str| {
                    v.ok_or_else(|| CliError::invalid(format!("model.{field}"), "required for this process"))
                };
                match kind {
                    ProcessKind::Gaussian => Process::Gaussian { sigma: get(self.sigma, "sigma")? },
                    ProcessKind::VarianceGamma => Process::VarianceGamma {
                        theta: get(self.theta, "theta")?,
                        sigma: get(self.sigma, "sigma")?,
                        nu: get(self.nu, "nu")?,
                    },
                    ProcessKind::Merton => Process::MertonJump {
                        sigma: get(self.sigma, "sigma")?,
                        lambda: get(self.lambda, "lambda")?,
                        mu_j: get(self.mu_j, "mu_j")?,
                        delta: get(self.delta, "delta")?,
                    },
                    ProcessKind::Kou => Process::Kou {
                        sigma: get(self.sigma, "sigma")?,
                        lambda: get(self.lambda, "lambda")?,
                        p: get(self.p, "p")?,
                        eta1: get(self.eta1, "eta1")?,
                        eta2: get(self.eta2, "eta2")?,
                    },
                }
            }
        };
        LevyModel::new(process, self.r).ctx("processes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contract {
    Perpetual { put: PerpetualPut, method: Method },
    Quantile(QuantileContract),
}

impl Contract {
    pub fn kind(&self) -> &'static str {
        match self {
            Contract::Perpetual { put, .. } => match put.monitoring {
                Monitoring::Discrete(_) => "bermudan",
                Monitoring::Continuous => "american",
            },
            Contract::Quantile(_) => "quantile",
        }
    }
}

/// A validated configuration in core types.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub contract: Contract,
    pub grid: u32,
    pub sweep: Option<(u32, u32)>,
    pub reference_grid: Option<u32>,
    pub reference: Option<Reference>,
    pub perpetual: PerpetualNumerics,
    pub quantile: QuantileNumerics,
    pub mc: McConfig,
    pub process: String,
}
