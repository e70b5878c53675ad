use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the correctors. Variants carry the measured
/// quantity that tripped the check so callers can report it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not {property} (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    NotStructured {
        property: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("matrix is numerically singular (smallest singular value {sigma_min:.3e})")]
    NearSingular { sigma_min: f64 },

    #[error("eigenvalue {re:.6}{im:+.6}i lies too close to the branch cut at -1")]
    BranchCut { re: f64, im: f64 },

    #[error("eigenvalue {re:.6}{im:+.6}i lies within {gap:.3e} of a rounding midpoint")]
    MidpointCollision { re: f64, im: f64, gap: f64 },

    #[error("eigenvalue {value:.6} lies in the forbidden band [0.4, 0.6]")]
    ForbiddenBand { value: f64 },

    #[error("spectral decomposition failed: {0}")]
    Spectral(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid tower: {0}")]
    InvalidTower(String),

    #[error("level {level} out of range (tower has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("element is not invariant (defect {defect:.3e})")]
    NotInvariant { defect: f64 },

    #[error("precondition violated: {quantity} = {value:.6e} exceeds limit {limit:.6e}{}", attained_at.as_ref().map(|s| format!(" (attained at {s})")).unwrap_or_default())]
    Precondition {
        quantity: String,
        value: f64,
        limit: f64,
        attained_at: Option<String>,
    },

    #[error("no convergence after {iterations} iterations (last defect {last:.3e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        trace: Vec<(usize, f64, f64)>,
    },

    #[error("no tower level meets the defect threshold {threshold:.3e}")]
    NoLevel {
        threshold: f64,
        table: Vec<(usize, f64, f64)>,
    },

    #[error("bound violated: {name}: {value:.6e} > {bound:.6e}")]
    BoundViolation {
        name: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("unknown symbol: {0}")]
    UnknownSymbol(String),

    #[error("invalid relation system: {0}")]
    InvalidRelations(String),

    #[error("group is not abelian")]
    NonAbelian,

    #[error("group is not cyclic")]
    NotCyclic,

    #[error("json: {0}")]
    Json(String),
}
