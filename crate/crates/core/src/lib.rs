//! Causal classification of closed spacelike submanifolds in Lorentzian
//! manifolds via the mean curvature vector, and the first-variation and
//! conformal-Killing integral identities that obstruct trapping.

// `!(x > y)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod checks;
pub mod embedding;
pub mod error;
pub mod expr;
pub mod extrinsic;
pub mod fd;
pub mod geometry;
pub mod quadrature;
pub mod report;
pub mod symbolic;
pub mod tolerances;
pub mod variation;

pub use embedding::{AxisBoundary, Embedding, InducedPointData, ParamAxis, ParamDomain};
pub use error::{GeomError, Result};
pub use extrinsic::{
    classify_submanifold, mean_curvature, shape_tensor, ClassificationReport, ExtrinsicData, PointLabel, Verdict,
};
pub use geometry::{
    AmbientVector, CausalCharacter, CausalKind, ChartDomain, Christoffel, CoordinatePoint, MetricField,
    TimeOrientation, VectorField,
};
pub use quadrature::{Grid, GridSpec, QuadratureRule};
pub use tolerances::Tolerances;
