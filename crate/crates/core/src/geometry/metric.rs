use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{AmbientVector, CausalCharacter, CausalKind, CoordinatePoint, TimeOrientation, VectorField};
use crate::error::{GeomError, Result};
use crate::fd;

pub(crate) type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub(crate) type MatrixListFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;
pub(crate) type VectorFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;

pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-12;

/// Open coordinate box on which a chart is valid. Infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDomain {
    /// Identifies the coordinate system, e.g. `cartesian` or `eddington_finkelstein`.
    pub kind: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartDomain {
    pub fn unbounded(kind: &str, dim: usize) -> Self {
        ChartDomain { kind: kind.to_string(), lower: vec![f64::NEG_INFINITY; dim], upper: vec![f64::INFINITY; dim] }
    }

    pub fn with_bounds(mut self, axis: usize, lower: f64, upper: f64) -> Self {
        self.lower[axis] = lower;
        self.upper[axis] = upper;
        self
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.lower.len()
            && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (lo, hi))| x.is_finite() && x > lo && x < hi)
    }
}

/// Connection coefficients `Γ^μ_{ρσ}` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Christoffel { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, mu: usize, rho: usize, sigma: usize) -> f64 {
        self.data[(mu * self.dim + rho) * self.dim + sigma]
    }

    #[inline]
    fn set(&mut self, mu: usize, rho: usize, sigma: usize, v: f64) {
        self.data[(mu * self.dim + rho) * self.dim + sigma] = v;
    }

    /// `Γ^μ_{ρσ} a^ρ b^σ`.
    pub fn contract(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |mu, _| {
            let mut s = 0.0;
            for rho in 0..n {
                if a[rho] == 0.0 {
                    continue;
                }
                for sigma in 0..n {
                    s += self.get(mu, rho, sigma) * a[rho] * b[sigma];
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// The ambient metric `g` as coordinate-component functions on a single chart.
///
/// Lorentzian metrics use the signature `(-,+,...,+)` and carry an explicit
/// future-pointing timelike field `T` that fixes the time orientation.
#[derive(Clone)]
pub struct MetricField {
    name: String,
    coordinates: Vec<String>,
    signature: Vec<i8>,
    chart: ChartDomain,
    components: MatrixFn,
    derivatives: Option<MatrixListFn>,
    time_orientation: Option<VectorFn>,
    degeneracy_tol: f64,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.name)
            .field("coordinates", &self.coordinates)
            .field("signature", &self.signature)
            .field("chart", &self.chart)
            .field("analytic_derivatives", &self.derivatives.is_some())
            .field("time_orientation", &self.time_orientation.is_some())
            .finish()
    }
}

impl MetricField {
    /// A Lorentzian metric with signature `(-,+,...,+)`.
    pub fn lorentzian<F>(name: &str, coordinates: &[&str], chart: ChartDomain, components: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let dim = coordinates.len();
        let mut signature = vec![1i8; dim];
        if dim > 0 {
            signature[0] = -1;
        }
        Self::with_signature(name, coordinates.iter().map(|s| s.to_string()).collect(), signature, chart, components)
    }

    pub fn with_signature<F>(
        name: &str,
        coordinates: Vec<String>,
        signature: Vec<i8>,
        chart: ChartDomain,
        components: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let dim = coordinates.len();
        if dim < 2 {
            return Err(GeomError::InvalidMetric(format!("dimension {dim} < 2")));
        }
        if signature.len() != dim || chart.lower.len() != dim || chart.upper.len() != dim {
            return Err(GeomError::InvalidMetric("signature/chart length does not match the coordinates".into()));
        }
        if signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(GeomError::InvalidMetric("signature entries must be ±1".into()));
        }
        Ok(MetricField {
            name: name.to_string(),
            coordinates,
            signature,
            chart,
            components: Arc::new(components),
            derivatives: None,
            time_orientation: None,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        })
    }

    /// Analytic `∂_ρ g_{μν}`, returned as one matrix per `ρ`.
    pub fn with_derivatives<F>(mut self, derivatives: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    {
        self.derivatives = Some(Arc::new(derivatives));
        self
    }

    pub fn with_time_orientation<F>(mut self, field: F) -> Self
    where
        F: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    {
        self.time_orientation = Some(Arc::new(field));
        self
    }

    pub fn with_degeneracy_tolerance(mut self, tol: f64) -> Self {
        self.degeneracy_tol = tol;
        self
    }

    /// Same metric with derivatives taken by finite differences.
    pub fn without_analytic_derivatives(&self) -> Self {
        let mut m = self.clone();
        m.derivatives = None;
        m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn chart(&self) -> &ChartDomain {
        &self.chart
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    pub fn is_lorentzian(&self) -> bool {
        self.signature.iter().filter(|s| **s < 0).count() == 1
    }

    pub fn has_time_orientation(&self) -> bool {
        self.time_orientation.is_some()
    }

    pub fn in_chart(&self, p: &[f64]) -> bool {
        self.chart.contains(p)
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dimension() {
            return Err(GeomError::DimensionMismatch { expected: self.dimension(), found: p.len() });
        }
        if !self.chart.contains(p) {
            return Err(GeomError::PointOutsideChart { chart: self.name.clone(), point: p.to_vec() });
        }
        Ok(())
    }

    fn raw_components(&self, p: &[f64]) -> DMatrix<f64> {
        (self.components)(p)
    }

    /// `g_{μν}(p)`.
    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        let g = self.raw_components(p);
        let scale: f64 = g.row_iter().map(|r| r.amax()).product();
        let det = g.determinant();
        if !det.is_finite() || det.abs() <= self.degeneracy_tol * scale {
            return Err(GeomError::DegenerateMetric { point: p.to_vec(), det });
        }
        Ok(g)
    }

    pub fn inverse_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(p)?;
        g.try_inverse().ok_or_else(|| GeomError::DegenerateMetric { point: p.to_vec(), det: 0.0 })
    }

    /// `∂_ρ g_{μν}(p)`, one matrix per `ρ`: analytic when supplied, otherwise
    /// fourth-order central differences whose stencil must stay in the chart.
    pub fn metric_derivatives_at(&self, p: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(p)?;
        if let Some(d) = &self.derivatives {
            return Ok(d(p));
        }
        fd::gradient(
            |y: &[f64]| {
                if self.chart.contains(y) {
                    Ok(self.raw_components(y))
                } else {
                    Err(GeomError::DerivativeFailure(format!(
                        "finite-difference stencil at {y:?} leaves the chart of `{}`",
                        self.name
                    )))
                }
            },
            p,
        )
    }

    /// Finite-difference `∂_ρ g_{μν}` regardless of analytic availability.
    pub fn fd_metric_derivatives_at(&self, p: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.without_analytic_derivatives().metric_derivatives_at(p)
    }

    /// `Γ^μ_{ρσ} = ½ g^{μν} (∂_ρ g_{νσ} + ∂_σ g_{νρ} − ∂_ν g_{ρσ})`.
    pub fn christoffel_at(&self, p: &[f64]) -> Result<Christoffel> {
        let ginv = self.inverse_at(p)?;
        let dg = self.metric_derivatives_at(p)?;
        Ok(christoffel_from(&ginv, &dg))
    }

    pub fn inner(&self, p: &[f64], a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        let g = self.metric_at(p)?;
        Ok(a.dot(&(&g * b)))
    }

    /// The future-pointing timelike field `T(p)`.
    pub fn time_orientation_at(&self, p: &[f64]) -> Result<DVector<f64>> {
        self.check_point(p)?;
        let t = self.time_orientation.as_ref().ok_or(GeomError::NotLorentzian)?;
        Ok(t(p))
    }

    /// `|v|²_ref = vᵀ |g| v`, where `|g| = Q |Λ| Qᵀ` is the absolute value of
    /// `g` in its orthonormal eigenframe. Positive definite for any
    /// nondegenerate `g`; used to scale the null band.
    pub fn reference_norm2(&self, p: &[f64], v: &DVector<f64>) -> Result<f64> {
        let g = self.metric_at(p)?;
        Ok(reference_norm2_with(&g, v))
    }

    /// Causal character of `v` with null band `|g(v,v)| ≤ tol·|v|²_ref`.
    pub fn causal_character(&self, v: &AmbientVector, tol: f64) -> Result<CausalCharacter> {
        let p = v.base.coords();
        if !self.is_lorentzian() {
            return Err(GeomError::NotLorentzian);
        }
        if v.dim() != self.dimension() {
            return Err(GeomError::DimensionMismatch { expected: self.dimension(), found: v.dim() });
        }
        let g = self.metric_at(p)?;
        let t = self.time_orientation_at(p)?;
        Ok(causal_character_with(&g, &t, &v.components, tol))
    }

    /// `(£_ξ g)_{μν} = ξ^ρ ∂_ρ g_{μν} + g_{ρν} ∂_μ ξ^ρ + g_{μρ} ∂_ν ξ^ρ`.
    pub fn lie_derivative(&self, xi: &VectorField, p: &[f64]) -> Result<DMatrix<f64>> {
        if xi.dim() != self.dimension() {
            return Err(GeomError::DimensionMismatch { expected: self.dimension(), found: xi.dim() });
        }
        let g = self.metric_at(p)?;
        let dg = self.metric_derivatives_at(p)?;
        let v = xi.value_at(p);
        let j = xi.jacobian_at(p)?;
        let mut out = &j.transpose() * &g + &g * &j;
        for (rho, d) in dg.iter().enumerate() {
            out += d * v[rho];
        }
        Ok(out)
    }

    /// Checks symmetry, nondegeneracy, declared signature and (Lorentzian)
    /// `g(T,T) < 0` at each sample point.
    pub fn validate_at(&self, samples: &[CoordinatePoint]) -> Result<()> {
        let want_neg = self.signature.iter().filter(|s| **s < 0).count();
        for p in samples {
            let g = self.metric_at(p.coords())?;
            let asym = (&g - g.transpose()).amax();
            if asym > 1e-12 * (1.0 + g.amax()) {
                return Err(GeomError::InvalidMetric(format!("components not symmetric at {:?}", p.coords())));
            }
            let eig = SymmetricEigen::new(g.clone());
            let neg = eig.eigenvalues.iter().filter(|l| **l < 0.0).count();
            if neg != want_neg {
                return Err(GeomError::InvalidMetric(format!(
                    "signature mismatch at {:?}: {neg} negative eigenvalues, expected {want_neg}",
                    p.coords()
                )));
            }
            if self.is_lorentzian() {
                if let Some(tf) = &self.time_orientation {
                    let t = tf(p.coords());
                    if t.dot(&(&g * &t)) >= 0.0 {
                        return Err(GeomError::InvalidMetric(format!(
                            "time orientation is not timelike at {:?}",
                            p.coords()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn christoffel_from(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Christoffel {
    let n = ginv.nrows();
    let mut gamma = Christoffel::zeros(n);
    for mu in 0..n {
        for rho in 0..n {
            for sigma in rho..n {
                let mut s = 0.0;
                for nu in 0..n {
                    let gi = ginv[(mu, nu)];
                    if gi == 0.0 {
                        continue;
                    }
                    s += gi * (dg[rho][(nu, sigma)] + dg[sigma][(nu, rho)] - dg[nu][(rho, sigma)]);
                }
                gamma.set(mu, rho, sigma, 0.5 * s);
                gamma.set(mu, sigma, rho, 0.5 * s);
            }
        }
    }
    gamma
}

pub fn reference_norm2_with(g: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let eig = SymmetricEigen::new(g.clone());
    let w = eig.eigenvectors.transpose() * v;
    w.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| l.abs() * c * c).sum()
}

pub fn causal_character_with(g: &DMatrix<f64>, t: &DVector<f64>, v: &DVector<f64>, tol: f64) -> CausalCharacter {
    if v.amax() < tol {
        return CausalCharacter { kind: CausalKind::Zero, time: TimeOrientation::NotApplicable };
    }
    let q = v.dot(&(g * v));
    let scale = reference_norm2_with(g, v);
    let kind = if q.abs() <= tol * scale {
        CausalKind::Null
    } else if q < 0.0 {
        CausalKind::Timelike
    } else {
        CausalKind::Spacelike
    };
    let time = match kind {
        CausalKind::Null | CausalKind::Timelike => {
            if v.dot(&(g * t)) < 0.0 {
                TimeOrientation::Future
            } else {
                TimeOrientation::Past
            }
        }
        _ => TimeOrientation::NotApplicable,
    };
    CausalCharacter { kind, time }
}
