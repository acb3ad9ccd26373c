use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything the pricers can reject or fail on.
///
/// Variants split into input validation (bad parameters, grids, contracts) and
/// numerical failure (the factorisation or calibration broke down);
/// [`Error::is_numerical`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 8")]
    GridSize(usize),
    #[error("grid half-width must be positive and finite, got {0}")]
    GridBound(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: &'static str },
    #[error("argument outside the analyticity strip of the model (Im = {0})")]
    StripViolation(f64),
    #[error("function to factorise vanishes on the grid (|phi| = {0:e})")]
    ZeroCrossing(f64),
    #[error("function to factorise has winding number {0}")]
    NonzeroIndex(i64),
    #[error("payoff transform pole: {0} is too close to zero")]
    PoleProximity(&'static str),
    #[error("payoff is not integrable with damping {0}")]
    NotIntegrable(f64),
    #[error("z-inversion radius {0} is not inside the unit disc")]
    RadiusDegenerate(f64),
    #[error("degenerate calibration line (denominator {0:e})")]
    DegenerateLine(f64),
    #[error("optimal barrier {0} lies outside (0, K)")]
    BarrierOutOfRange(f64),
    #[error("Monte Carlo horizon too short: truncated discount {0:e} exceeds the standard error")]
    HorizonTooShort(f64),
    #[error("Plancherel sum left an imaginary residual of {0:e}")]
    ImaginaryResidual(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroCrossing(_)
                | Error::NonzeroIndex(_)
                | Error::DegenerateLine(_)
                | Error::BarrierOutOfRange(_)
                | Error::HorizonTooShort(_)
                | Error::ImaginaryResidual(_)
                | Error::NonFinite(_)
        )
    }
}
