use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("coupling Rabi frequency is zero")]
    ZeroCoupling,
    #[error("probe Rabi frequency is zero")]
    ZeroProbe,
    #[error("tolerances must lie in (0, 1e-2], got rel_tol={rel_tol:e}, abs_tol={abs_tol:e}")]
    InvalidTolerance { rel_tol: f64, abs_tol: f64 },
    #[error("adaptive step fell to {step:e} at t={t}")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("matrix exponential of the generator failed")]
    SingularGenerator,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("optical depth αL = {optical_depth} exceeds 1")]
    RegimeViolation { optical_depth: f64 },
    #[error("slice count must be at least 1")]
    InvalidSliceCount,
    #[error("fit diverged: residual rms {residual_rms:e} vs peak-to-peak {peak_to_peak:e}")]
    FitDiverged { residual_rms: f64, peak_to_peak: f64 },
    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),
    #[error("quadrature did not converge: relative change {change:e} at {points} points")]
    QuadratureNonConvergent { points: usize, change: f64 },
    #[error("invalid Doppler configuration: {0}")]
    InvalidDopplerConfig(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            reason: reason.into(),
        }
    }
}
