use thiserror::Error;

use crate::expr::ExprError;

/// Errors raised by the geometric computations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} lies outside the chart domain of `{chart}`")]
    PointOutsideChart { chart: String, point: Vec<f64> },
    #[error("metric is degenerate at {point:?} (|det g| = {det:e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },
    #[error("derivative failed: {0}")]
    DerivativeFailure(String),
    #[error("induced metric is degenerate at u = {u:?} (|det γ| = {det:e})")]
    DegenerateInducedMetric { u: Vec<f64>, det: f64 },
    #[error("immersion is rank deficient at u = {u:?}")]
    RankDeficientImmersion { u: Vec<f64> },
    #[error("vector is not normal to the submanifold (|g(n, e_{axis})| = {overlap:e})")]
    NotNormal { axis: usize, overlap: f64 },
    #[error("submanifold is not spacelike at u = {u:?}")]
    NotSpacelike { u: Vec<f64> },
    #[error("submanifold `{0}` is not declared closed")]
    NotClosed(String),
    #[error("vector field `{field}` is not conformal Killing (residual {residual:e} > {tolerance:e})")]
    NotConformal { field: String, residual: f64, tolerance: f64 },
    #[error("flow left the chart at {point:?} (τ = {tau})")]
    FlowLeftChart { point: Vec<f64>, tau: f64 },
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("parameter `{name}` = {value} outside range [{min}, {max}] for `{entry}`")]
    ParamOutOfRange { entry: String, name: String, value: f64, min: f64, max: f64 },
    #[error("malformed catalog reference `{0}` (expected name or name:key=value,…)")]
    InvalidReference(String),
    #[error("unknown parameter `{name}` for `{entry}`")]
    UnknownParam { entry: String, name: String },
    #[error("embedding `{embedding}` needs a `{expected}` chart, metric `{metric}` provides `{found}`")]
    IncompatibleChart { embedding: String, metric: String, expected: String, found: String },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation requires a Lorentzian metric with a time orientation")]
    NotLorentzian,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid tolerance `{name}` = {value}: {reason}")]
    InvalidTolerance { name: String, value: f64, reason: String },
    #[error("invalid flow specification: {0}")]
    InvalidFlow(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl GeomError {
    /// Stable identifier used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            GeomError::PointOutsideChart { .. } => "PointOutsideChart",
            GeomError::DegenerateMetric { .. } => "DegenerateMetric",
            GeomError::DerivativeFailure(_) => "DerivativeFailure",
            GeomError::DegenerateInducedMetric { .. } => "DegenerateInducedMetric",
            GeomError::RankDeficientImmersion { .. } => "RankDeficientImmersion",
            GeomError::NotNormal { .. } => "NotNormal",
            GeomError::NotSpacelike { .. } => "NotSpacelike",
            GeomError::NotClosed(_) => "NotClosed",
            GeomError::NotConformal { .. } => "NotConformal",
            GeomError::FlowLeftChart { .. } => "FlowLeftChart",
            GeomError::UnknownEntry(_) => "UnknownEntry",
            GeomError::ParamOutOfRange { .. } => "ParamOutOfRange",
            GeomError::InvalidReference(_) => "InvalidReference",
            GeomError::UnknownParam { .. } => "UnknownParam",
            GeomError::IncompatibleChart { .. } => "IncompatibleChart",
            GeomError::DimensionMismatch { .. } => "DimensionMismatch",
            GeomError::NotLorentzian => "NotLorentzian",
            GeomError::InvalidGrid(_) => "InvalidGrid",
            GeomError::InvalidEmbedding(_) => "InvalidEmbedding",
            GeomError::InvalidMetric(_) => "InvalidMetric",
            GeomError::InvalidTolerance { .. } => "InvalidTolerance",
            GeomError::InvalidFlow(_) => "InvalidFlow",
            GeomError::Expr(_) => "Expression",
        }
    }
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
