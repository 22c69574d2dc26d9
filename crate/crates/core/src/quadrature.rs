//! Tensor-product sampling grids and quadrature over the parameter box.

use serde::{Deserialize, Serialize};

use crate::embedding::{AxisBoundary, ParamDomain};
use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Endpoint trapezoid on every axis (pole endpoints pulled in by the pole epsilon).
    Trapezoid,
    /// Gauss–Legendre on non-periodic axes, equispaced trapezoid on periodic axes.
    GaussLegendre,
}

impl std::str::FromStr for QuadratureRule {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" => Ok(QuadratureRule::Trapezoid),
            "gauss-legendre" | "gauss" => Ok(QuadratureRule::GaussLegendre),
            other => Err(GeomError::InvalidGrid(format!("unknown quadrature rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_axis: Vec<usize>,
    pub rule: QuadratureRule,
}

impl GridSpec {
    pub fn new(points_per_axis: Vec<usize>, rule: QuadratureRule) -> Result<Self> {
        let spec = GridSpec { points_per_axis, rule };
        spec.validate()?;
        Ok(spec)
    }

    /// Sixteen Gauss–Legendre nodes per axis.
    pub fn default_for(dim: usize) -> Self {
        GridSpec { points_per_axis: vec![16; dim], rule: QuadratureRule::GaussLegendre }
    }

    pub fn uniform(dim: usize, n: usize, rule: QuadratureRule) -> Result<Self> {
        GridSpec::new(vec![n; dim], rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis.is_empty() {
            return Err(GeomError::InvalidGrid("no axes".into()));
        }
        if let Some(n) = self.points_per_axis.iter().find(|n| **n < 2) {
            return Err(GeomError::InvalidGrid(format!("{n} points on an axis; need at least 2")));
        }
        Ok(())
    }

    pub fn total_points(&self) -> usize {
        self.points_per_axis.iter().product()
    }
}

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: Vec<usize>,
    pub u: Vec<f64>,
    pub weight: f64,
}

/// A realized tensor-product grid in row-major order (last axis fastest).
#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    pub axes: Vec<AxisRule>,
    pub points: Vec<GridPoint>,
}

impl Grid {
    pub fn build(domain: &ParamDomain, spec: &GridSpec, pole_epsilon: f64) -> Result<Grid> {
        spec.validate()?;
        if spec.points_per_axis.len() != domain.dim() {
            return Err(GeomError::InvalidGrid(format!(
                "grid has {} axes, parameter domain has {}",
                spec.points_per_axis.len(),
                domain.dim()
            )));
        }
        let axes: Vec<AxisRule> = domain
            .axes()
            .iter()
            .zip(&spec.points_per_axis)
            .map(|(axis, &n)| {
                let (lo, hi) = (axis.lower, axis.upper);
                match (axis.boundary, spec.rule) {
                    (AxisBoundary::Periodic, _) => periodic_trapezoid(lo, hi, n),
                    (_, QuadratureRule::GaussLegendre) => gauss_legendre_on(lo, hi, n),
                    (AxisBoundary::Pole, QuadratureRule::Trapezoid) => {
                        trapezoid(lo + pole_epsilon, hi - pole_epsilon, n)
                    }
                    (AxisBoundary::Open, QuadratureRule::Trapezoid) => trapezoid(lo, hi, n),
                }
            })
            .collect();
        let dims: Vec<usize> = axes.iter().map(|a| a.nodes.len()).collect();
        let total: usize = dims.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut index = vec![0usize; dims.len()];
        for _ in 0..total {
            let u = index.iter().zip(&axes).map(|(&i, a)| a.nodes[i]).collect();
            let weight = index.iter().zip(&axes).map(|(&i, a)| a.weights[i]).product();
            points.push(GridPoint { index: index.clone(), u, weight });
            for k in (0..dims.len()).rev() {
                index[k] += 1;
                if index[k] < dims[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        Ok(Grid { spec: spec.clone(), axes, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ w_i f_i` with pairwise summation in grid order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.points.len());
        let terms: Vec<f64> = values.iter().zip(&self.points).map(|(v, p)| v * p.weight).collect();
        pairwise_sum(&terms)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> AxisRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    AxisRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gauss_legendre_on(lo: f64, hi: f64, n: usize) -> AxisRule {
    let base = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    AxisRule {
        nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
        weights: base.weights.iter().map(|w| half * w).collect(),
    }
}

fn periodic_trapezoid(lo: f64, hi: f64, n: usize) -> AxisRule {
    let h = (hi - lo) / n as f64;
    AxisRule { nodes: (0..n).map(|i| lo + h * i as f64).collect(), weights: vec![h; n] }
}

fn trapezoid(lo: f64, hi: f64, n: usize) -> AxisRule {
    let h = (hi - lo) / (n - 1) as f64;
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    AxisRule { nodes: (0..n).map(|i| lo + h * i as f64).collect(), weights }
}

/// Pairwise (cascade) summation; deterministic for a fixed input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
