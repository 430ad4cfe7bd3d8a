use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures of the numerical kernels. Every variant carries enough context to
/// reproduce the failing evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("branch cut: Σw² = {re:e}{im:+e}i lies within {margin:e} of (-∞, 0]")]
    BranchCut { re: f64, im: f64, margin: f64 },
    #[error("point lies on the critical set K of u (κ = {kappa:e})")]
    CriticalPoint { kappa: f64 },
    #[error("cover point too close to the origin (|w| = {norm:e})")]
    ZeroPoint { norm: f64 },
    #[error("lost track of the ± branch at sample {index} (step {step:e}, bound {bound:e})")]
    TrackingLoss { index: usize, step: f64, bound: f64 },
    #[error("spectral overflow: residual {residual:e} exceeds {limit:e}")]
    SpectralOverflow { residual: f64, limit: f64 },
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no polynomial up to degree {max_degree} verifies (best margin {best_margin:e})")]
    DegreeExhausted { max_degree: usize, best_margin: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("Newton iteration diverged (last residual {residual:e})")]
    NewtonDivergence { residual: f64 },
    #[error("fiber coordinate |τ| = {tau:e} outside chart radius {radius:e}")]
    OutOfChart { tau: f64, radius: f64 },
    #[error("level curve not found at boundary sample {index}")]
    LevelCurveNotFound { index: usize },
    #[error("Theodorsen iteration stalled (last update {update:e})")]
    ConformalStall { update: f64 },
    #[error("Fejér degree budget {max_degree} exhausted (defect {defect:e} vs η = {eta:e})")]
    FejerBudget { max_degree: usize, defect: f64, eta: f64 },
    #[error("loop is not null-homotopic in M' (cover lift does not close)")]
    NotNullHomotopic,
    #[error("disc extension passes too close to 0 for every schedule (best margin {margin:e})")]
    ExtensionHitsZero { margin: f64 },
    #[error("tangent vector fails tangency by {defect:e}")]
    TangencyViolation { defect: f64 },
    #[error("regular lift failed after {retries} retries (worst κ margin {margin:e} at t-index {t_index})")]
    LiftFailure { retries: usize, margin: f64, t_index: usize },
    #[error("degenerate lift: {0}")]
    DegenerateLift(String),
    #[error("step rule forces δ below the t-grid resolution at step {index} (distance {distance:e} ≥ bound {bound:e})")]
    StepFailure { index: usize, distance: f64, bound: f64 },
    #[error("continuation values disagree on the overlap at step {index} ({residual:e} > {limit:e})")]
    OverlapMismatch { index: usize, residual: f64, limit: f64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Variant name, used as the machine-readable error kind in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BranchCut { .. } => "BranchCut",
            Error::CriticalPoint { .. } => "CriticalPoint",
            Error::ZeroPoint { .. } => "ZeroPoint",
            Error::TrackingLoss { .. } => "TrackingLoss",
            Error::SpectralOverflow { .. } => "SpectralOverflow",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::Infeasible(_) => "Infeasible",
            Error::DegreeExhausted { .. } => "DegreeExhausted",
            Error::Precondition(_) => "Precondition",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::OutOfChart { .. } => "OutOfChart",
            Error::LevelCurveNotFound { .. } => "LevelCurveNotFound",
            Error::ConformalStall { .. } => "ConformalStall",
            Error::FejerBudget { .. } => "FejerBudget",
            Error::NotNullHomotopic => "NotNullHomotopic",
            Error::ExtensionHitsZero { .. } => "ExtensionHitsZero",
            Error::TangencyViolation { .. } => "TangencyViolation",
            Error::LiftFailure { .. } => "LiftFailure",
            Error::DegenerateLift(_) => "DegenerateLift",
            Error::StepFailure { .. } => "StepFailure",
            Error::OverlapMismatch { .. } => "OverlapMismatch",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
