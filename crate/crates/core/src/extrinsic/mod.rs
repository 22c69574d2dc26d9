//! Shape tensor, second fundamental forms, mean curvature vector and expansions.
//!
//! Sign convention: `K(x, y) = −(∇_x y)^⊥` and `H = tr_γ K`. For a round
//! sphere of radius `r` in a flat spatial slice this makes `H = (2/r) n̂`
//! with `n̂` the outward unit normal, so the expansion along `n̂` is `+2/r`
//! and matches the rate of area growth under the outward unit flow.

mod classify;

use nalgebra::{DMatrix, DVector};

pub use classify::{
    classify_point, classify_submanifold, verdict_from_labels, ClassificationReport, HypersurfaceSummary, PointLabel,
    Verdict,
};

use crate::embedding::{Embedding, InducedPointData};
use crate::error::{GeomError, Result};
use crate::geometry::{metric_ref_norm2, AmbientVector, CausalKind, VectorField};
use crate::tolerances::Tolerances;

/// Extrinsic data of `S` at one parameter point.
#[derive(Debug, Clone)]
pub struct ExtrinsicData {
    pub base: InducedPointData,
    /// `K^μ_{ab}` stored row-major in `(a, b)`.
    shape: Vec<DVector<f64>>,
    pub mean_curvature: AmbientVector,
    /// `g(H, H)`.
    pub h_norm2: f64,
}

impl ExtrinsicData {
    pub fn shape(&self, a: usize, b: usize) -> &DVector<f64> {
        &self.shape[a * self.base.dim() + b]
    }

    /// Largest component of `K` in absolute value.
    pub fn shape_max_abs(&self) -> f64 {
        self.shape.iter().fold(0.0, |m, k| m.max(k.amax()))
    }

    /// `max_{a,b} ‖K_{ab} − K_{ba}‖_∞`.
    pub fn shape_asymmetry(&self) -> f64 {
        let d = self.base.dim();
        let mut m = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                m = m.max((self.shape(a, b) - self.shape(b, a)).amax());
            }
        }
        m
    }

    /// `|H|_ref`, the positive-definite reference norm of `H`.
    pub fn h_ref_norm(&self) -> f64 {
        metric_ref_norm2(&self.base.metric, &self.mean_curvature.components).sqrt()
    }

    /// Worst normalized overlap `|g(v, e_a)| / (1 + |v|_ref |e_a|_ref)` of `H` and `K_{ab}` with the frame.
    pub fn normality_defect(&self) -> f64 {
        let mut worst = normal_defect(&self.base, &self.mean_curvature.components);
        for k in &self.shape {
            worst = worst.max(normal_defect(&self.base, k));
        }
        worst
    }
}

fn normal_defect(base: &InducedPointData, v: &DVector<f64>) -> f64 {
    let vn = metric_ref_norm2(&base.metric, v).sqrt();
    (0..base.dim())
        .map(|a| {
            let e = base.frame_vector(a);
            let en = metric_ref_norm2(&base.metric, &e).sqrt();
            base.inner(v, &e).abs() / (1.0 + vn * en)
        })
        .fold(0.0, f64::max)
}

/// `∇_{e_a} e_b = ∂_a e_b + Γ(e_a, e_b)` as ambient vectors, row-major in `(a, b)`.
fn frame_covariant_derivatives(e: &Embedding, base: &InducedPointData) -> Result<Vec<DVector<f64>>> {
    let d = base.dim();
    let hess = e.hessian_at(&base.u)?;
    if hess.len() != d * d {
        return Err(GeomError::InvalidEmbedding(format!("hessian has {} entries, expected {}", hess.len(), d * d)));
    }
    let gamma = e.ambient().christoffel_at(base.p.coords())?;
    let frame: Vec<DVector<f64>> = (0..d).map(|a| base.frame_vector(a)).collect();
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            out.push(&hess[a * d + b] + gamma.contract(&frame[a], &frame[b]));
        }
    }
    Ok(out)
}

/// `K^μ_{ab} = −(∂_a e_b + Γ^μ_{ρσ} e_a^ρ e_b^σ)^⊥` together with `H` and `g(H,H)`.
pub fn shape_tensor(e: &Embedding, u: &[f64]) -> Result<ExtrinsicData> {
    let base = e.induced_point_data(u)?;
    extrinsic_from_base(e, base)
}

pub(crate) fn extrinsic_from_base(e: &Embedding, base: InducedPointData) -> Result<ExtrinsicData> {
    let d = base.dim();
    let nabla = frame_covariant_derivatives(e, &base)?;
    let shape: Vec<DVector<f64>> = nabla.iter().map(|v| -base.normal_part(v)).collect();
    let mut h = DVector::zeros(e.ambient().dimension());
    for a in 0..d {
        for b in 0..d {
            h.axpy(base.gamma_inv[(a, b)], &shape[a * d + b], 1.0);
        }
    }
    let h_norm2 = base.inner(&h, &h);
    let mean_curvature = AmbientVector::new(base.p.clone(), h);
    Ok(ExtrinsicData { base, shape, mean_curvature, h_norm2 })
}

/// `H^μ = γ^{ab} K^μ_{ab}`.
pub fn mean_curvature(e: &Embedding, u: &[f64]) -> Result<AmbientVector> {
    Ok(shape_tensor(e, u)?.mean_curvature)
}

fn check_normal(base: &InducedPointData, n: &DVector<f64>, tol: f64) -> Result<()> {
    if n.len() != base.metric.nrows() {
        return Err(GeomError::DimensionMismatch { expected: base.metric.nrows(), found: n.len() });
    }
    let nn = metric_ref_norm2(&base.metric, n).sqrt();
    for a in 0..base.dim() {
        let ea = base.frame_vector(a);
        let en = metric_ref_norm2(&base.metric, &ea).sqrt();
        let overlap = base.inner(n, &ea);
        if overlap.abs() > tol * (1.0 + nn * en) {
            return Err(GeomError::NotNormal { axis: a, overlap });
        }
    }
    Ok(())
}

/// `(K_n)_{ab} = g(n, K_{ab})` for a normal vector `n`.
pub fn second_fundamental_form(e: &Embedding, u: &[f64], n: &AmbientVector) -> Result<DMatrix<f64>> {
    second_fundamental_form_with(e, u, n, Tolerances::default().normality)
}

pub fn second_fundamental_form_with(
    e: &Embedding,
    u: &[f64],
    n: &AmbientVector,
    normality: f64,
) -> Result<DMatrix<f64>> {
    let data = shape_tensor(e, u)?;
    check_normal(&data.base, &n.components, normality)?;
    let d = data.base.dim();
    let gn = &data.base.metric * &n.components;
    Ok(DMatrix::from_fn(d, d, |a, b| gn.dot(data.shape(a, b))))
}

/// Expansion `g(H, n)` along a normal vector `n`.
pub fn expansion(e: &Embedding, u: &[f64], n: &AmbientVector) -> Result<f64> {
    let data = shape_tensor(e, u)?;
    check_normal(&data.base, &n.components, Tolerances::default().normality)?;
    Ok(data.base.inner(&data.mean_curvature.components, &n.components))
}

/// Intrinsic connection coefficients `Γ̄^c_{ab}` read off as the frame
/// components of `(∇_{e_a} e_b)^T`. Returned as one `d × d` matrix per `c`.
pub fn induced_connection(e: &Embedding, u: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let base = e.induced_point_data(u)?;
    let d = base.dim();
    let nabla = frame_covariant_derivatives(e, &base)?;
    let coeffs: Vec<DVector<f64>> = nabla.iter().map(|v| base.tangent_coefficients(v)).collect();
    Ok((0..d).map(|c| DMatrix::from_fn(d, d, |a, b| coeffs[a * d + b][c])).collect())
}

/// Future-pointing null normals of a spacelike codimension-2 surface.
#[derive(Debug, Clone)]
pub struct NullExpansions {
    /// `l₊`, outgoing: `g(l₊, R) > 0` for the reference field `R`.
    pub outgoing: DVector<f64>,
    pub ingoing: DVector<f64>,
    /// `θ₊ = g(H, l₊)`.
    pub theta_plus: f64,
    /// `θ₋ = g(H, l₋)`.
    pub theta_minus: f64,
}

/// Null normal pair with `g(l₊, l₋) = −1` and `g(l₊, T) = g(l₋, T)`, built as
/// `l± = (τ ± s)/√2` from the unit normal part `τ` of the time orientation and
/// the unit spacelike normal `s ⊥ τ` pointing along the reference field.
pub fn null_expansions(e: &Embedding, u: &[f64], reference: &VectorField) -> Result<NullExpansions> {
    if e.codimension() != 2 {
        return Err(GeomError::InvalidEmbedding(format!(
            "null normal pair needs codimension 2, `{}` has codimension {}",
            e.name(),
            e.codimension()
        )));
    }
    let data = shape_tensor(e, u)?;
    let base = &data.base;
    if !base.is_spacelike() {
        return Err(GeomError::NotSpacelike { u: base.u.clone() });
    }
    let p = base.p.coords();
    let t = e.ambient().time_orientation_at(p)?;
    let tn = base.normal_part(&t);
    let tn2 = base.inner(&tn, &tn);
    if !(tn2 < 0.0) {
        return Err(GeomError::NotSpacelike { u: base.u.clone() });
    }
    let tau = tn / (-tn2).sqrt();
    let r = reference.value_at(p);
    let rn = base.normal_part(&r);
    let s0 = &rn + &tau * base.inner(&rn, &tau);
    let s2 = base.inner(&s0, &s0);
    if !(s2 > 1e-24 * (1.0 + metric_ref_norm2(&base.metric, &r))) {
        return Err(GeomError::InvalidEmbedding(format!(
            "reference field `{}` has no spacelike normal component at u = {:?}",
            reference.name(),
            base.u
        )));
    }
    let mut s = s0 / s2.sqrt();
    if base.inner(&s, &r) < 0.0 {
        s = -s;
    }
    let k = std::f64::consts::FRAC_1_SQRT_2;
    let outgoing = (&tau + &s) * k;
    let ingoing = (&tau - &s) * k;
    let h = &data.mean_curvature.components;
    Ok(NullExpansions { theta_plus: base.inner(h, &outgoing), theta_minus: base.inner(h, &ingoing), outgoing, ingoing })
}

/// Unit normal of a hypersurface and the expansion `θ` in `H = θ n`.
#[derive(Debug, Clone)]
pub struct HypersurfaceNormal {
    pub normal: DVector<f64>,
    /// `Timelike` or `Spacelike`.
    pub kind: CausalKind,
    pub theta: f64,
}

/// For `d = D − 1`: the unit normal (future-pointing when timelike) and `θ = g(H, n)/g(n, n)`.
pub fn hypersurface_normal(e: &Embedding, u: &[f64]) -> Result<HypersurfaceNormal> {
    if e.codimension() != 1 {
        return Err(GeomError::InvalidEmbedding(format!("`{}` is not a hypersurface", e.name())));
    }
    let data = shape_tensor(e, u)?;
    let base = &data.base;
    let d_amb = e.ambient().dimension();
    let normal = (0..d_amb)
        .map(|mu| {
            let mut v = DVector::zeros(d_amb);
            v[mu] = 1.0;
            base.normal_part(&v)
        })
        .max_by(|a, b| metric_ref_norm2(&base.metric, a).total_cmp(&metric_ref_norm2(&base.metric, b)))
        .expect("ambient dimension ≥ 2");
    let nn = base.inner(&normal, &normal);
    let mut normal = normal / nn.abs().sqrt();
    let kind = if nn < 0.0 { CausalKind::Timelike } else { CausalKind::Spacelike };
    match kind {
        CausalKind::Timelike => {
            if let Ok(t) = e.ambient().time_orientation_at(base.p.coords()) {
                if base.inner(&normal, &t) > 0.0 {
                    normal = -normal;
                }
            }
        }
        _ => {
            let imax = normal.iamax();
            if normal[imax] < 0.0 {
                normal = -normal;
            }
        }
    }
    let theta = base.inner(&data.mean_curvature.components, &normal) / nn.signum();
    Ok(HypersurfaceNormal { normal, kind, theta })
}
