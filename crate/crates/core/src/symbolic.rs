//! Metrics, embeddings and vector fields given by closed-form component
//! expressions. Derivatives are taken symbolically, so objects built here
//! always carry analytic jacobians.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::embedding::{Embedding, ParamDomain};
use crate::error::{GeomError, Result};
use crate::expr::{Expr, Symbols};
use crate::geometry::{ChartDomain, MetricField, VectorField};

pub type Constants = BTreeMap<String, f64>;

struct Component {
    i: usize,
    j: usize,
    value: Expr,
    grad: Vec<Expr>,
}

fn parse_all(sources: &[String], symbols: &Symbols) -> Result<Vec<Expr>> {
    sources.iter().map(|s| Ok(Expr::parse(s, symbols)?)).collect()
}

fn eval_vec(exprs: &[Expr], x: &[f64]) -> DVector<f64> {
    DVector::from_iterator(exprs.len(), exprs.iter().map(|e| e.eval(x)))
}

/// A metric from its nonzero components `g_{ij}`, `i ≤ j`, in the given coordinates.
#[allow(clippy::too_many_arguments)]
pub fn metric(
    name: &str,
    coordinates: &[String],
    signature: Vec<i8>,
    chart: ChartDomain,
    entries: &[((usize, usize), String)],
    time_orientation: Option<&[String]>,
    constants: &Constants,
) -> Result<MetricField> {
    let dim = coordinates.len();
    let symbols = Symbols::new(coordinates).with_constants(constants);
    let mut comps = Vec::with_capacity(entries.len());
    for ((a, b), src) in entries {
        let (i, j) = if a <= b { (*a, *b) } else { (*b, *a) };
        if j >= dim {
            return Err(GeomError::InvalidMetric(format!("component ({a},{b}) outside dimension {dim}")));
        }
        if comps.iter().any(|c: &Component| c.i == i && c.j == j) {
            return Err(GeomError::InvalidMetric(format!("component ({i},{j}) given twice")));
        }
        let value = Expr::parse(src, &symbols)?;
        let grad = (0..dim).map(|r| value.derivative(r)).collect();
        comps.push(Component { i, j, value, grad });
    }
    let comps = Arc::new(comps);
    let c1 = Arc::clone(&comps);
    let c2 = Arc::clone(&comps);
    let mut m = MetricField::with_signature(name, coordinates.to_vec(), signature, chart, move |x| {
        let mut g = DMatrix::zeros(dim, dim);
        for c in c1.iter() {
            let v = c.value.eval(x);
            g[(c.i, c.j)] = v;
            g[(c.j, c.i)] = v;
        }
        g
    })?
    .with_derivatives(move |x| {
        let mut dg = vec![DMatrix::zeros(dim, dim); dim];
        for c in c2.iter() {
            for (r, e) in c.grad.iter().enumerate() {
                let v = e.eval(x);
                dg[r][(c.i, c.j)] = v;
                dg[r][(c.j, c.i)] = v;
            }
        }
        dg
    });
    if let Some(t) = time_orientation {
        if t.len() != dim {
            return Err(GeomError::DimensionMismatch { expected: dim, found: t.len() });
        }
        let t = parse_all(t, &symbols)?;
        m = m.with_time_orientation(move |x| eval_vec(&t, x));
    }
    Ok(m)
}

/// An embedding `Φ(u) = (Φ^0(u), …, Φ^{D−1}(u))` with symbolic jacobian and hessian.
pub fn embedding(
    name: &str,
    ambient: MetricField,
    parameters: &[String],
    domain: ParamDomain,
    components: &[String],
    constants: &Constants,
) -> Result<Embedding> {
    let big_d = ambient.dimension();
    if components.len() != big_d {
        return Err(GeomError::DimensionMismatch { expected: big_d, found: components.len() });
    }
    let d = parameters.len();
    if domain.dim() != d {
        return Err(GeomError::DimensionMismatch { expected: d, found: domain.dim() });
    }
    let symbols = Symbols::new(parameters).with_constants(constants);
    let map = Arc::new(parse_all(components, &symbols)?);
    let jac: Arc<Vec<Vec<Expr>>> = Arc::new(map.iter().map(|c| (0..d).map(|a| c.derivative(a)).collect()).collect());
    let hess: Arc<Vec<Vec<Expr>>> =
        Arc::new((0..d * d).map(|ab| jac.iter().map(|row| row[ab % d].derivative(ab / d)).collect()).collect());
    let m2 = Arc::clone(&map);
    let j2 = Arc::clone(&jac);
    Ok(Embedding::new(name, ambient, domain, move |u| eval_vec(&m2, u))?
        .with_jacobian(move |u| DMatrix::from_fn(big_d, d, |mu, a| j2[mu][a].eval(u)))
        .with_hessian(move |u| hess.iter().map(|h| eval_vec(h, u)).collect()))
}

/// A vector field `ξ^μ(x)` with symbolic jacobian `∂_ν ξ^μ`.
pub fn vector_field(
    name: &str,
    coordinates: &[String],
    components: &[String],
    constants: &Constants,
) -> Result<VectorField> {
    let dim = coordinates.len();
    if components.len() != dim {
        return Err(GeomError::DimensionMismatch { expected: dim, found: components.len() });
    }
    let symbols = Symbols::new(coordinates).with_constants(constants);
    let comps = Arc::new(parse_all(components, &symbols)?);
    let jac: Arc<Vec<Vec<Expr>>> =
        Arc::new(comps.iter().map(|c| (0..dim).map(|n| c.derivative(n)).collect()).collect());
    let c2 = Arc::clone(&comps);
    Ok(VectorField::new(name, dim, move |x| eval_vec(&c2, x))
        .with_jacobian(move |x| DMatrix::from_fn(dim, dim, |mu, nu| jac[mu][nu].eval(x))))
}
