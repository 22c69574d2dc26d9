//! The ambient semi-Riemannian manifold: points, vectors, metrics, vector fields.

mod causal;
mod field;
mod metric;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use causal::{CausalCharacter, CausalKind, TimeOrientation};
pub use field::VectorField;
pub use metric::{
    causal_character_with, reference_norm2_with as metric_ref_norm2, ChartDomain, Christoffel, MetricField,
};

/// A point of the ambient chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinatePoint(Vec<f64>);

impl CoordinatePoint {
    pub fn new(coords: Vec<f64>) -> Self {
        CoordinatePoint(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl From<&[f64]> for CoordinatePoint {
    fn from(c: &[f64]) -> Self {
        CoordinatePoint(c.to_vec())
    }
}

impl From<&DVector<f64>> for CoordinatePoint {
    fn from(c: &DVector<f64>) -> Self {
        CoordinatePoint(c.as_slice().to_vec())
    }
}

/// A contravariant vector at a point of the ambient chart.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector {
    pub base: CoordinatePoint,
    pub components: DVector<f64>,
}

impl AmbientVector {
    pub fn new(base: CoordinatePoint, components: DVector<f64>) -> Self {
        debug_assert_eq!(base.dim(), components.len());
        AmbientVector { base, components }
    }

    pub fn from_slices(base: &[f64], components: &[f64]) -> Self {
        AmbientVector::new(base.into(), DVector::from_column_slice(components))
    }

    pub fn zero(base: CoordinatePoint) -> Self {
        let d = base.dim();
        AmbientVector::new(base, DVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.amax()
    }
}
