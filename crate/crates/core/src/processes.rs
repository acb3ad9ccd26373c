//! Lévy models: characteristic exponents with the risk-neutral drift folded in.
//!
//! `Ψ(ξ,t) = E[e^{iξX_t}] = e^{ψ(ξ)t}` with `ψ(ξ) = iμξ + ψ₀(ξ)`, where `ψ₀` is the
//! driftless exponent and `μ = r − ψ₀(−i)`, so that `E[e^{X_t}] = e^{rt}`.

use crate::{Complex64, Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Process {
    Gaussian { sigma: f64 },
    VarianceGamma { theta: f64, sigma: f64, nu: f64 },
    MertonJump { sigma: f64, lambda: f64, mu_j: f64, delta: f64 },
    Kou { sigma: f64, lambda: f64, p: f64, eta1: f64, eta2: f64 },
}

impl Process {
    /// Parameters behind the published Gaussian test cases.
    pub fn gaussian_paper() -> Self {
        Process::Gaussian { sigma: 0.4 }
    }

    /// The variance gamma test parameters. The skew enters with a negative sign:
    /// that is the orientation under which the published VG prices are
    /// reproduced.
    pub fn vg_paper() -> Self {
        Process::VarianceGamma { theta: -1.0 / 9.0, sigma: 1.0 / (3.0 * libm::sqrt(3.0)), nu: 0.25 }
    }

    pub fn mjd_paper() -> Self {
        Process::MertonJump { sigma: 0.1, lambda: 3.0, mu_j: -0.05, delta: 0.086 }
    }

    pub fn kou_paper() -> Self {
        Process::Kou { sigma: 0.1, lambda: 3.0, p: 0.3, eta1: 40.0, eta2: 12.0 }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "gaussian-paper" => Some(Self::gaussian_paper()),
            "vg-paper" => Some(Self::vg_paper()),
            "mjd-paper" => Some(Self::mjd_paper()),
            "kou-paper" => Some(Self::kou_paper()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason| Err(Error::Parameter { name, reason });
        let finite = |v: f64| v.is_finite();
        match *self {
            Process::Gaussian { sigma } => {
                if !(finite(sigma) && sigma > 0.0) {
                    return bad("sigma", "must be positive");
                }
            }
            Process::VarianceGamma { theta, sigma, nu } => {
                if !(finite(sigma) && sigma > 0.0) {
                    return bad("sigma", "must be positive");
                }
                if !(finite(nu) && nu > 0.0) {
                    return bad("nu", "must be positive");
                }
                if !finite(theta) {
                    return bad("theta", "must be finite");
                }
                if 1.0 - theta * nu - 0.5 * sigma * sigma * nu <= 0.0 {
                    return bad("theta", "exponential moment E[e^X] does not exist");
                }
            }
            Process::MertonJump { sigma, lambda, mu_j, delta } => {
                if !(finite(sigma) && sigma > 0.0) {
                    return bad("sigma", "must be positive");
                }
                if !(finite(lambda) && lambda >= 0.0) {
                    return bad("lambda", "must be non-negative");
                }
                if !(finite(mu_j) && finite(delta) && delta >= 0.0) {
                    return bad("delta", "jump sizes need finite mean and non-negative spread");
                }
            }
            Process::Kou { sigma, lambda, p, eta1, eta2 } => {
                if !(finite(sigma) && sigma > 0.0) {
                    return bad("sigma", "must be positive");
                }
                if !(finite(lambda) && lambda >= 0.0) {
                    return bad("lambda", "must be non-negative");
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad("p", "must lie in [0, 1]");
                }
                if !(finite(eta1) && eta1 > 1.0) {
                    return bad("eta1", "must exceed 1 for E[e^X] to exist");
                }
                if !(finite(eta2) && eta2 > 0.0) {
                    return bad("eta2", "must be positive");
                }
            }
        }
        Ok(())
    }

    /// Admissible range of `Im ξ` for the driftless exponent.
    pub fn strip(&self) -> (f64, f64) {
        match *self {
            Process::Gaussian { .. } | Process::MertonJump { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Process::VarianceGamma { theta, sigma, nu } => {
                let s2 = sigma * sigma;
                let d = libm::sqrt(theta * theta + 2.0 * s2 / nu);
                ((theta - d) / s2, (theta + d) / s2)
            }
            Process::Kou { eta1, eta2, .. } => (-eta1, eta2),
        }
    }

    /// Driftless exponent `ψ₀(ξ)`.
    pub fn exponent0(&self, xi: Complex64) -> Result<Complex64> {
        let (lo, hi) = self.strip();
        if !(xi.im > lo && xi.im < hi) {
            return Err(Error::StripViolation(xi.im));
        }
        Ok(match *self {
            Process::Gaussian { sigma } => -0.5 * sigma * sigma * xi * xi,
            Process::VarianceGamma { theta, sigma, nu } => {
                let base = 1.0 - I * nu * theta * xi + 0.5 * nu * sigma * sigma * xi * xi;
                -base.ln() / nu
            }
            Process::MertonJump { sigma, lambda, mu_j, delta } => {
                -0.5 * sigma * sigma * xi * xi
                    + lambda * ((I * mu_j * xi - 0.5 * delta * delta * xi * xi).exp() - 1.0)
            }
            Process::Kou { sigma, lambda, p, eta1, eta2 } => {
                -0.5 * sigma * sigma * xi * xi
                    + lambda * ((1.0 - p) * eta2 / (eta2 + I * xi) + p * eta1 / (eta1 - I * xi) - 1.0)
            }
        })
    }

    /// Annual variance of the driftless process, `−ψ₀''(0)`.
    pub fn variance_rate(&self) -> f64 {
        match *self {
            Process::Gaussian { sigma } => sigma * sigma,
            Process::VarianceGamma { theta, sigma, nu } => sigma * sigma + nu * theta * theta,
            Process::MertonJump { sigma, lambda, mu_j, delta } => {
                sigma * sigma + lambda * (mu_j * mu_j + delta * delta)
            }
            Process::Kou { sigma, lambda, p, eta1, eta2 } => {
                sigma * sigma + 2.0 * lambda * (p / (eta1 * eta1) + (1.0 - p) / (eta2 * eta2))
            }
        }
    }
}

/// A process under the risk-neutral measure for a given short rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyModel {
    pub process: Process,
    pub r: f64,
    drift: f64,
}

impl LevyModel {
    pub fn new(process: Process, r: f64) -> Result<Self> {
        process.validate()?;
        if !r.is_finite() {
            return Err(Error::Parameter { name: "r", reason: "must be finite" });
        }
        let d = process.exponent0(Complex64::new(0.0, -1.0))?;
        Ok(LevyModel { process, r, drift: r - d.re })
    }

    /// Risk-neutral drift `μ = r − ψ₀(−i)`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn exponent(&self, xi: Complex64) -> Result<Complex64> {
        Ok(I * self.drift * xi + self.process.exponent0(xi)?)
    }

    pub fn char_function(&self, xi: Complex64, t: f64) -> Result<Complex64> {
        if t == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok((self.exponent(xi)? * t).exp())
    }

    pub fn volatility(&self) -> f64 {
        libm::sqrt(self.process.variance_rate())
    }
}
