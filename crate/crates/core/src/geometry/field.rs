use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::metric::{MatrixFn, VectorFn};
use crate::error::{GeomError, Result};
use crate::fd;

/// An ambient vector field `ξ` with optional analytic jacobian `∂_ν ξ^μ`.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    dim: usize,
    value: VectorFn,
    jacobian: Option<MatrixFn>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new<F>(name: &str, dim: usize, value: F) -> Self
    where
        F: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    {
        VectorField { name: name.to_string(), dim, value: Arc::new(value), jacobian: None }
    }

    /// Analytic jacobian with entry `(μ, ν) = ∂_ν ξ^μ`.
    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn without_analytic_jacobian(&self) -> Self {
        let mut f = self.clone();
        f.jacobian = None;
        f
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn value_at(&self, p: &[f64]) -> DVector<f64> {
        (self.value)(p)
    }

    pub fn jacobian_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        if let Some(j) = &self.jacobian {
            return Ok(j(p));
        }
        self.fd_jacobian_at(p)
    }

    pub fn fd_jacobian_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let cols = fd::gradient(
            |y: &[f64]| {
                let v = self.value_at(y);
                if v.iter().all(|c| c.is_finite()) {
                    Ok(v)
                } else {
                    Err(GeomError::DerivativeFailure(format!("field `{}` is not finite at {y:?}", self.name)))
                }
            },
            p,
        )?;
        Ok(DMatrix::from_columns(&cols))
    }

    /// `∂_ν ξ^μ` analytic vs finite differences, max-abs difference.
    pub fn jacobian_discrepancy(&self, p: &[f64]) -> Result<f64> {
        let a = self.jacobian_at(p)?;
        let n = self.fd_jacobian_at(p)?;
        Ok((a - n).amax())
    }
}
