use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a series needs at least one coefficient")]
    EmptySeries,
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("series of order {order} must carry {expected} coefficients, got {got}")]
    OrderMismatch {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("divisor vanishes to truncation order or has higher valuation than the dividend")]
    DivisorVanishes,
    #[error("inner series of a composition must have zero constant term")]
    InnerNotVanishing,
    #[error("series is not normalized: need c0 = 0 and c1 = 1")]
    NotNormalized,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("expected constant term 1, got {0}")]
    BadConstantTerm(Complex64),
    #[error("quadrature radius {0} is outside (0, 1)")]
    RadiusOutOfRange(f64),
    #[error("quadrature needs at least 256 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("convolution f*k has vanishing linear coefficient")]
    DegenerateConvolution,
    #[error("kernel coefficient k_{index} vanishes")]
    KernelCoefficientZero { index: usize },
    #[error("alpha = {alpha} is excluded: {reason}")]
    ExcludedAlpha { alpha: Complex64, reason: &'static str },
    #[error("2(1+2a)k3 - (1+3a)k2^2 vanishes")]
    DegenerateDenominator,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(&'static str),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
