use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cutoff {cutoff} is too small (truncated mass {tail:.3e}); need cutoff >= {required}")]
    CutoffTooSmall {
        cutoff: usize,
        required: usize,
        tail: f64,
    },

    #[error("operator is not Hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("overlap at node {node} underflows (log|<v|f(v)>| = {log_overlap:.3e})")]
    VanishingOverlap { node: usize, log_overlap: f64 },

    #[error("overlap {overlap:.3e} is below the admissible floor {floor:.3e}")]
    OverlapBelowFloor { overlap: f64, floor: f64 },

    #[error("angular resolution too low: n_angular = {have}, need at least {need}")]
    UnderResolvedGrid { have: usize, need: usize },

    #[error("required truncation radius {radius:.3} exceeds the safe bound {limit:.3}")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("principal value does not settle under refinement (delta {delta:.3e}); undeclared pole?")]
    UndeclaredPole { delta: f64 },

    #[error("denominator at n = {n} is {value:.3e}, below the floor {floor:.3e}")]
    SingularTerm { n: i64, value: f64, floor: f64 },

    #[error("x-window half-width {have:.3} too small; need at least {need:.3}")]
    WindowTooSmall { have: f64, need: f64 },

    #[error("nested quadrature supports at most 2 slices, got {slices}; use Monte Carlo with a seed")]
    TooManySlices { slices: usize },

    #[error("integrand forms disagree: relative discrepancy {discrepancy:.3e}")]
    FormMismatch { discrepancy: f64 },

    #[error("propagator not converged in the cutoff: delta {delta:.3e} > {tol:.3e}")]
    NotConverged { delta: f64, tol: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
