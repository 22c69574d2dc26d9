//! Parametrized submanifolds `Φ: S → V` and their induced first-order data.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::fd;
use crate::geometry::{AmbientVector, CoordinatePoint, MetricField};
use crate::quadrature::{Grid, GridSpec};

type MapFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type HessianFn = Arc<dyn Fn(&[f64]) -> Vec<DVector<f64>> + Send + Sync>;

/// How a parameter axis closes up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisBoundary {
    /// Endpoints are identified.
    Periodic,
    /// Each endpoint collapses to a single point (e.g. `θ = 0, π` on a sphere).
    Pole,
    /// A genuine boundary.
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamAxis {
    pub lower: f64,
    pub upper: f64,
    pub boundary: AxisBoundary,
}

impl ParamAxis {
    pub fn new(lower: f64, upper: f64, boundary: AxisBoundary) -> Self {
        ParamAxis { lower, upper, boundary }
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    axes: Vec<ParamAxis>,
}

impl ParamDomain {
    pub fn new(axes: Vec<ParamAxis>) -> Self {
        ParamDomain { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.axes.len()
            && u.iter().zip(&self.axes).all(|(x, a)| {
                let slack = 1e-12 * (1.0 + a.length().abs());
                x.is_finite() && *x >= a.lower - slack && *x <= a.upper + slack
            })
    }
}

/// First-order data of `S` at one parameter point.
#[derive(Debug, Clone)]
pub struct InducedPointData {
    pub u: Vec<f64>,
    pub p: CoordinatePoint,
    /// Columns are the frame vectors `e_a = ∂Φ/∂u^a`.
    pub frame: DMatrix<f64>,
    /// Ambient metric at `p`.
    pub metric: DMatrix<f64>,
    /// `γ_{ab} = g(e_a, e_b)`.
    pub gamma: DMatrix<f64>,
    pub gamma_inv: DMatrix<f64>,
    /// `√|det γ|`.
    pub vol_density: f64,
}

impl InducedPointData {
    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame_vector(&self, a: usize) -> DVector<f64> {
        self.frame.column(a).into_owned()
    }

    /// Coefficients `c^a = γ^{ab} g(e_b, v)` of the tangential part in the frame.
    pub fn tangent_coefficients(&self, v: &DVector<f64>) -> DVector<f64> {
        let gv = &self.metric * v;
        let overlaps = self.frame.transpose() * gv;
        &self.gamma_inv * overlaps
    }

    pub fn tangent_part(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame * self.tangent_coefficients(v)
    }

    pub fn normal_part(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.tangent_part(v)
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.metric * b))
    }

    /// `γ` positive definite, via leading principal minors.
    pub fn is_spacelike(&self) -> bool {
        let d = self.dim();
        (1..=d).all(|k| self.gamma.view((0, 0), (k, k)).determinant() > 0.0)
    }
}

/// An imbedding `Φ` of a `d`-dimensional parameter box into the ambient chart.
#[derive(Clone)]
pub struct Embedding {
    name: String,
    ambient: MetricField,
    domain: ParamDomain,
    closed: bool,
    map: MapFn,
    jacobian: Option<JacobianFn>,
    hessian: Option<HessianFn>,
    pole_epsilon: f64,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Embedding")
            .field("name", &self.name)
            .field("ambient", &self.ambient.name())
            .field("domain", &self.domain)
            .field("closed", &self.closed)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

pub const DEFAULT_POLE_EPSILON: f64 = 1e-6;

impl Embedding {
    pub fn new<F>(name: &str, ambient: MetricField, domain: ParamDomain, map: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
    {
        let d = domain.dim();
        let big_d = ambient.dimension();
        if d == 0 || d >= big_d {
            return Err(GeomError::InvalidEmbedding(format!(
                "submanifold dimension {d} must satisfy 1 ≤ d ≤ {}",
                big_d - 1
            )));
        }
        if let Some(a) = domain.axes().iter().find(|a| !(a.upper > a.lower)) {
            return Err(GeomError::InvalidEmbedding(format!("empty parameter interval [{}, {}]", a.lower, a.upper)));
        }
        Ok(Embedding {
            name: name.to_string(),
            ambient,
            domain,
            closed: false,
            map: Arc::new(map),
            jacobian: None,
            hessian: None,
            pole_epsilon: DEFAULT_POLE_EPSILON,
        })
    }

    /// Analytic `∂Φ^μ/∂u^a` as a `D × d` matrix.
    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Analytic `∂²Φ/∂u^a∂u^b`, returned row-major (`index = a·d + b`).
    pub fn with_hessian<F>(mut self, hessian: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<DVector<f64>> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    /// Declares `S` compact without boundary. This is trusted, not detected;
    /// it requires every axis to be periodic or to end in poles.
    pub fn closed(mut self, closed: bool) -> Result<Self> {
        if closed {
            if let Some(i) = self.domain.axes().iter().position(|a| a.boundary == AxisBoundary::Open) {
                return Err(GeomError::InvalidEmbedding(format!(
                    "`{}` declared closed but parameter axis {i} has an open boundary",
                    self.name
                )));
            }
        }
        self.closed = closed;
        Ok(self)
    }

    pub fn with_pole_epsilon(mut self, eps: f64) -> Self {
        self.pole_epsilon = eps;
        self
    }

    /// Same embedding with the ambient metric swapped (e.g. to apply tolerance overrides).
    pub fn with_ambient(mut self, ambient: MetricField) -> Result<Self> {
        if ambient.dimension() != self.ambient.dimension() {
            return Err(GeomError::DimensionMismatch {
                expected: self.ambient.dimension(),
                found: ambient.dimension(),
            });
        }
        self.ambient = ambient;
        Ok(self)
    }

    /// Same submanifold with every derivative (of `Φ` and of `g`) taken numerically.
    pub fn without_analytic_derivatives(&self) -> Self {
        let mut e = self.clone();
        e.jacobian = None;
        e.hessian = None;
        e.ambient = self.ambient.without_analytic_derivatives();
        e
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient(&self) -> &MetricField {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn codimension(&self) -> usize {
        self.ambient.dimension() - self.dim()
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn pole_epsilon(&self) -> f64 {
        self.pole_epsilon
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.jacobian.is_some() && self.hessian.is_some() && self.ambient.has_analytic_derivatives()
    }

    pub fn grid(&self, spec: &GridSpec) -> Result<Grid> {
        Grid::build(&self.domain, spec, self.pole_epsilon)
    }

    /// `Φ(u)` without any domain or chart checks.
    pub fn map_at(&self, u: &[f64]) -> DVector<f64> {
        (self.map)(u)
    }

    /// `∂Φ^μ/∂u^a`, analytic or fourth-order finite differences.
    pub fn jacobian_at(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        if let Some(j) = &self.jacobian {
            return Ok(j(u));
        }
        self.fd_jacobian_at(u)
    }

    pub fn fd_jacobian_at(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let cols = fd::gradient(|v: &[f64]| Ok::<_, GeomError>(self.map_at(v)), u)?;
        Ok(DMatrix::from_columns(&cols))
    }

    /// `∂²Φ/∂u^a∂u^b` row-major. Without an analytic hessian this
    /// differentiates the analytic jacobian, or failing that uses the
    /// second-difference stencil directly.
    pub fn hessian_at(&self, u: &[f64]) -> Result<Vec<DVector<f64>>> {
        if let Some(h) = &self.hessian {
            return Ok(h(u));
        }
        let d = self.dim();
        let mut out = vec![DVector::zeros(0); d * d];
        if let Some(j) = &self.jacobian {
            for a in 0..d {
                let dj = fd::partial(|v: &[f64]| Ok::<_, GeomError>(j(v)), u, a, fd::first_step(u[a]))?;
                for b in 0..d {
                    out[a * d + b] = dj.column(b).into_owned();
                }
            }
            return Ok(out);
        }
        for a in 0..d {
            for b in a..d {
                let h = fd::second_partial(
                    |v: &[f64]| Ok::<_, GeomError>(self.map_at(v)),
                    u,
                    a,
                    b,
                    fd::second_step(u[a]),
                    fd::second_step(u[b]),
                )?;
                out[a * d + b] = h.clone();
                out[b * d + a] = h;
            }
        }
        Ok(out)
    }

    /// Moves parameters on pole axes at least `pole_epsilon` away from the poles.
    pub fn clamp_to_sampling(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.domain.axes())
            .map(|(&x, a)| match a.boundary {
                AxisBoundary::Pole => x.clamp(a.lower + self.pole_epsilon, a.upper - self.pole_epsilon),
                _ => x,
            })
            .collect()
    }

    fn check_param(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(GeomError::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        if !self.domain.contains(u) {
            return Err(GeomError::InvalidEmbedding(format!("parameter point {u:?} outside the parameter domain")));
        }
        Ok(())
    }

    /// `γ`, its inverse and the volume density at `u`.
    pub fn induced_point_data(&self, u: &[f64]) -> Result<InducedPointData> {
        self.check_param(u)?;
        let u = self.clamp_to_sampling(u);
        self.induced_unchecked(&u)
    }

    /// As [`Embedding::induced_point_data`] but without the parameter-domain
    /// check or pole clamping (finite-difference stencils may step outside).
    pub(crate) fn induced_unchecked(&self, u: &[f64]) -> Result<InducedPointData> {
        let x = self.map_at(u);
        let p = CoordinatePoint::from(&x);
        let metric = self.ambient.metric_at(p.coords())?;
        let frame = self.jacobian_at(u)?;
        let d = self.dim();
        if frame.nrows() != self.ambient.dimension() || frame.ncols() != d {
            return Err(GeomError::InvalidEmbedding(format!(
                "jacobian has shape {}×{}, expected {}×{d}",
                frame.nrows(),
                frame.ncols(),
                self.ambient.dimension()
            )));
        }
        let sv = frame.clone().svd(false, false).singular_values;
        let (smin, smax) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
        if !(smax > 0.0) || smin <= 1e-12 * smax {
            return Err(GeomError::RankDeficientImmersion { u: u.to_vec() });
        }
        let gamma = frame.transpose() * &metric * &frame;
        let gamma = 0.5 * (&gamma + gamma.transpose());
        let det = gamma.determinant();
        let scale: f64 =
            (0..d).map(|a| crate::geometry::metric_ref_norm2(&metric, &frame.column(a).into_owned())).product();
        if !det.is_finite() || det.abs() <= self.ambient.degeneracy_tolerance() * scale {
            return Err(GeomError::DegenerateInducedMetric { u: u.to_vec(), det });
        }
        let gamma_inv = gamma.clone().try_inverse().ok_or(GeomError::DegenerateInducedMetric { u: u.to_vec(), det })?;
        Ok(InducedPointData { u: u.to_vec(), p, frame, metric, gamma, gamma_inv, vol_density: det.abs().sqrt() })
    }

    /// `γ` positive definite at every grid point.
    pub fn is_spacelike(&self, grid: &GridSpec) -> Result<bool> {
        let grid = self.grid(grid)?;
        let flags: Result<Vec<bool>> =
            grid.points.par_iter().map(|gp| Ok(self.induced_point_data(&gp.u)?.is_spacelike())).collect();
        Ok(flags?.into_iter().all(|f| f))
    }

    /// Splits `v` into tangent and normal parts relative to `S` at `u`.
    pub fn decompose(&self, u: &[f64], v: &AmbientVector) -> Result<(AmbientVector, AmbientVector)> {
        let data = self.induced_point_data(u)?;
        if v.dim() != self.ambient.dimension() {
            return Err(GeomError::DimensionMismatch { expected: self.ambient.dimension(), found: v.dim() });
        }
        let t = data.tangent_part(&v.components);
        let n = &v.components - &t;
        Ok((AmbientVector::new(data.p.clone(), t), AmbientVector::new(data.p, n)))
    }

    /// `∫_S η_S` over a closed submanifold.
    pub fn volume(&self, grid: &GridSpec) -> Result<f64> {
        if !self.closed {
            return Err(GeomError::NotClosed(self.name.clone()));
        }
        self.volume_with_boundary(grid)
    }

    /// `∫ √|det γ| du` over the parameter box, boundary or not.
    pub fn volume_with_boundary(&self, grid: &GridSpec) -> Result<f64> {
        let grid = self.grid(grid)?;
        let dens: Result<Vec<f64>> =
            grid.points.par_iter().map(|gp| Ok(self.induced_point_data(&gp.u)?.vol_density)).collect();
        Ok(grid.integrate(&dens?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartDomain;
    use std::f64::consts::PI;

    fn minkowski() -> MetricField {
        MetricField::lorentzian("mink", &["t", "x", "y", "z"], ChartDomain::unbounded("cartesian", 4), |_| {
            DMatrix::from_diagonal(&DVector::from_column_slice(&[-1.0, 1.0, 1.0, 1.0]))
        })
        .unwrap()
        .with_derivatives(|_| vec![DMatrix::zeros(4, 4); 4])
        .with_time_orientation(|_| DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]))
    }

    fn sphere(r: f64) -> Embedding {
        let domain = ParamDomain::new(vec![
            ParamAxis::new(0.0, PI, AxisBoundary::Pole),
            ParamAxis::new(0.0, 2.0 * PI, AxisBoundary::Periodic),
        ]);
        Embedding::new("sphere", minkowski(), domain, move |u| {
            DVector::from_column_slice(&[0.0, r * u[0].sin() * u[1].cos(), r * u[0].sin() * u[1].sin(), r * u[0].cos()])
        })
        .unwrap()
        .closed(true)
        .unwrap()
    }

    #[test]
    fn sphere_induced_metric_by_finite_differences() {
        let e = sphere(2.0);
        let d = e.induced_point_data(&[PI / 2.0, 0.0]).unwrap();
        assert!((d.gamma[(0, 0)] - 4.0).abs() < 1e-9);
        assert!((d.gamma[(1, 1)] - 4.0).abs() < 1e-9);
        assert!(d.gamma[(0, 1)].abs() < 1e-9);
        assert!((d.vol_density - 4.0).abs() < 1e-9);
    }

    #[test]
    fn open_axis_cannot_be_closed() {
        let domain = ParamDomain::new(vec![ParamAxis::new(0.0, 1.0, AxisBoundary::Open)]);
        let e =
            Embedding::new("seg", minkowski(), domain, |u| DVector::from_column_slice(&[0.0, u[0], 0.0, 0.0])).unwrap();
        assert!(matches!(e.closed(true), Err(GeomError::InvalidEmbedding(_))));
    }

    #[test]
    fn dimension_bounds() {
        let domain = ParamDomain::new(vec![ParamAxis::new(0.0, 1.0, AxisBoundary::Open); 4]);
        assert!(Embedding::new("full", minkowski(), domain, DVector::from_column_slice).is_err());
    }

    #[test]
    fn rank_deficient_immersion() {
        let domain = ParamDomain::new(vec![
            ParamAxis::new(0.0, 1.0, AxisBoundary::Open),
            ParamAxis::new(0.0, 1.0, AxisBoundary::Open),
        ]);
        let e =
            Embedding::new("fold", minkowski(), domain, |u| DVector::from_column_slice(&[0.0, u[0] + u[1], 0.0, 0.0]))
                .unwrap();
        assert!(matches!(e.induced_point_data(&[0.5, 0.5]), Err(GeomError::RankDeficientImmersion { .. })));
    }

    #[test]
    fn parameters_outside_domain() {
        let e = sphere(1.0);
        assert!(e.induced_point_data(&[4.0, 0.0]).is_err());
        assert!(e.induced_point_data(&[1.0]).is_err());
    }

    #[test]
    fn pole_clamping_keeps_gamma_nondegenerate() {
        let e = sphere(1.0);
        let d = e.induced_point_data(&[0.0, 1.0]).unwrap();
        assert!((d.u[0] - DEFAULT_POLE_EPSILON).abs() < 1e-18);
        assert!(d.vol_density > 0.0);
    }

    #[test]
    fn open_surface_volume_needs_flag() {
        let domain = ParamDomain::new(vec![
            ParamAxis::new(-1.0, 1.0, AxisBoundary::Open),
            ParamAxis::new(-1.0, 1.0, AxisBoundary::Open),
        ]);
        let e = Embedding::new("plane", minkowski(), domain, |u| DVector::from_column_slice(&[0.0, u[0], u[1], 0.0]))
            .unwrap();
        let spec = GridSpec::default_for(2);
        assert!(matches!(e.volume(&spec), Err(GeomError::NotClosed(_))));
        assert!((e.volume_with_boundary(&spec).unwrap() - 4.0).abs() < 1e-9);
    }
}
