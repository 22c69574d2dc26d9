//! First variation of volume and the conformal-Killing integral identity.
//!
//! Pointwise, for any ambient field `ξ`:
//!
//! ```text
//! ½ tr_γ Φ*(£_ξ g) = div_S ξ̄ + g(ξ, H)
//! ```
//!
//! where `ξ̄` is the tangential part of `ξ`. [`first_variation_density`]
//! computes the left side from the Lie derivative of the metric,
//! [`rhs_identity`] the right side from the tangential divergence and the
//! mean curvature vector. Integrated over `S` this gives `dV/dτ`, which
//! [`flow_volume_oracle`] reproduces independently by flowing `S` along `ξ`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{AxisBoundary, Embedding};
use crate::error::{GeomError, Result};
use crate::extrinsic::{extrinsic_from_base, Verdict};
use crate::fd;
use crate::geometry::{
    causal_character_with, metric_ref_norm2, CausalCharacter, CausalKind, CoordinatePoint, MetricField,
    TimeOrientation, VectorField,
};
use crate::quadrature::GridSpec;
use crate::tolerances::Tolerances;

/// `½ γ^{ab} (£_ξ g)_{μν} e_a^μ e_b^ν` at `u`.
pub fn first_variation_density(e: &Embedding, xi: &VectorField, u: &[f64]) -> Result<f64> {
    let base = e.induced_point_data(u)?;
    let lie = e.ambient().lie_derivative(xi, base.p.coords())?;
    let pulled = base.frame.transpose() * lie * &base.frame;
    Ok(0.5 * base.gamma_inv.component_mul(&pulled).sum())
}

/// The two terms on the right of the first-variation identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTerms {
    /// `div_S ξ̄ = (1/√γ) ∂_a(√γ ξ̄^a)`.
    pub divergence: f64,
    /// `g(ξ, H)`.
    pub normal_flux: f64,
}

impl IdentityTerms {
    pub fn total(&self) -> f64 {
        self.divergence + self.normal_flux
    }
}

/// `div_S ξ̄ + g(ξ, H)` at `u`, with the divergence taken by finite
/// differences of `√γ ξ̄^a` in parameter space.
pub fn rhs_identity(e: &Embedding, xi: &VectorField, u: &[f64]) -> Result<IdentityTerms> {
    let base = e.induced_point_data(u)?;
    let u = base.u.clone();
    let d = e.dim();
    let analytic_frame = e.has_analytic_derivatives();
    let weighted_tangent = |v: &[f64]| -> Result<DVector<f64>> {
        let b = e.induced_unchecked(v)?;
        let x = xi.value_at(b.p.coords());
        Ok(b.tangent_coefficients(&x) * b.vol_density)
    };
    let mut div = 0.0;
    for a in 0..d {
        let h = if analytic_frame { fd::first_step(u[a]) } else { fd::second_step(u[a]) };
        // √γ has a kink at poles, so near an endpoint the stencil looks inward only.
        let axis = &e.domain().axes()[a];
        let room = fd::STENCIL_REACH * h + e.pole_epsilon();
        let partial = match axis.boundary {
            AxisBoundary::Periodic => fd::partial(weighted_tangent, &u, a, h)?,
            _ if u[a] - axis.lower < room => fd::one_sided_partial(weighted_tangent, &u, a, h)?,
            _ if axis.upper - u[a] < room => fd::one_sided_partial(weighted_tangent, &u, a, -h)?,
            _ => fd::partial(weighted_tangent, &u, a, h)?,
        };
        div += partial[a];
    }
    let divergence = div / base.vol_density;
    let data = extrinsic_from_base(e, base)?;
    let x = xi.value_at(data.base.p.coords());
    let normal_flux = data.base.inner(&x, &data.mean_curvature.components);
    Ok(IdentityTerms { divergence, normal_flux })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    RequireClosed,
    /// Integrate over the parameter box anyway; the boundary term is reported unverified.
    AcceptBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeVariation {
    /// `dV/dτ = ∫ (div ξ̄ + g(ξ,H)) η_S`.
    pub derivative: f64,
    /// `∫ div ξ̄ η_S`; vanishes for closed `S`.
    pub divergence_integral: f64,
    /// `∫ g(ξ,H) η_S`.
    pub normal_integral: f64,
    /// `∫ first_variation_density η_S`, the same quantity via the Lie derivative.
    pub lie_integral: f64,
    pub volume: f64,
    pub boundary_unverified: bool,
}

/// First variation of the volume of `S` along `ξ`.
pub fn volume_variation(
    e: &Embedding,
    xi: &VectorField,
    grid: &GridSpec,
    policy: BoundaryPolicy,
) -> Result<VolumeVariation> {
    if !e.is_closed() && policy == BoundaryPolicy::RequireClosed {
        return Err(GeomError::NotClosed(e.name().to_string()));
    }
    let g = e.grid(grid)?;
    let rows: Vec<(f64, f64, f64, f64)> = g
        .points
        .par_iter()
        .map(|gp| {
            let terms = rhs_identity(e, xi, &gp.u)?;
            let lie = first_variation_density(e, xi, &gp.u)?;
            let dens = e.induced_point_data(&gp.u)?.vol_density;
            Ok((terms.divergence * dens, terms.normal_flux * dens, lie * dens, dens))
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&(f64, f64, f64, f64)) -> f64| g.integrate(&rows.iter().map(f).collect::<Vec<_>>());
    let divergence_integral = col(|r| r.0);
    let normal_integral = col(|r| r.1);
    Ok(VolumeVariation {
        derivative: divergence_integral + normal_integral,
        divergence_integral,
        normal_integral,
        lie_integral: col(|r| r.2),
        volume: col(|r| r.3),
        boundary_unverified: !e.is_closed(),
    })
}

/// The flow `φ_τ` of `ξ`, sampled by a fixed-step one-step integrator.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub field: VectorField,
    /// The flow time `τ` of the central difference.
    pub tau_step: f64,
    /// Integrator steps per flow time `τ`.
    pub steps: usize,
    pub integrator_order: usize,
}

impl FlowSpec {
    pub fn new(field: VectorField, tau: f64) -> Self {
        FlowSpec { field, tau_step: tau, steps: 4, integrator_order: 4 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_step > 0.0 && self.tau_step.is_finite()) {
            return Err(GeomError::InvalidFlow(format!("τ = {} must be positive", self.tau_step)));
        }
        if self.steps == 0 {
            return Err(GeomError::InvalidFlow("at least one integrator step is required".into()));
        }
        if self.integrator_order != 4 {
            return Err(GeomError::InvalidFlow(format!(
                "integrator order {} unsupported; only the classical fourth-order scheme is available",
                self.integrator_order
            )));
        }
        Ok(())
    }
}

/// Flows `x0` for time `tau` along `field` with classical RK4; every stage must stay in the chart.
pub fn flow_point(
    metric: &MetricField,
    field: &VectorField,
    x0: &DVector<f64>,
    tau: f64,
    steps: usize,
) -> Result<DVector<f64>> {
    let h = tau / steps as f64;
    let eval = |x: &DVector<f64>, t: f64| -> Result<DVector<f64>> {
        if !metric.in_chart(x.as_slice()) {
            return Err(GeomError::FlowLeftChart { point: x.as_slice().to_vec(), tau: t });
        }
        let v = field.value_at(x.as_slice());
        if v.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::FlowLeftChart { point: x.as_slice().to_vec(), tau: t });
        }
        Ok(v)
    };
    let mut x = x0.clone();
    for i in 0..steps {
        let t = h * i as f64;
        let k1 = eval(&x, t)?;
        let k2 = eval(&(&x + &k1 * (0.5 * h)), t + 0.5 * h)?;
        let k3 = eval(&(&x + &k2 * (0.5 * h)), t + 0.5 * h)?;
        let k4 = eval(&(&x + &k3 * h), t + h)?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    if !metric.in_chart(x.as_slice()) {
        return Err(GeomError::FlowLeftChart { point: x.as_slice().to_vec(), tau });
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOracle {
    /// `(V(S_τ) − V(S_{−τ})) / 2τ`.
    pub derivative: f64,
    pub volume_plus: f64,
    pub volume_minus: f64,
    pub tau: f64,
}

/// Volume of `φ_τ ∘ Φ` over the parameter box, with the jacobian of the
/// flowed map taken by finite differences in parameter space.
fn flowed_volume(e: &Embedding, flow: &FlowSpec, grid: &crate::quadrature::Grid, tau: f64) -> Result<f64> {
    let metric = e.ambient();
    let steps = flow.steps;
    let flowed = |u: &[f64]| -> Result<DVector<f64>> { flow_point(metric, &flow.field, &e.map_at(u), tau, steps) };
    let dens: Vec<f64> = grid
        .points
        .par_iter()
        .map(|gp| {
            let u = e.clamp_to_sampling(&gp.u);
            let x = flowed(&u)?;
            let cols = fd::gradient(flowed, &u)?;
            let jac = nalgebra::DMatrix::from_columns(&cols);
            let g = metric.metric_at(x.as_slice())?;
            let gamma = jac.transpose() * g * &jac;
            Ok(gamma.determinant().abs().sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(grid.integrate(&dens))
}

/// Independent estimate of `dV/dτ` by flowing `S` to `±τ`.
pub fn flow_volume_oracle(e: &Embedding, flow: &FlowSpec, grid: &GridSpec) -> Result<FlowOracle> {
    flow.validate()?;
    let g = e.grid(grid)?;
    let tau = flow.tau_step;
    let volume_plus = flowed_volume(e, flow, &g, tau)?;
    let volume_minus = flowed_volume(e, flow, &g, -tau)?;
    Ok(FlowOracle { derivative: (volume_plus - volume_minus) / (2.0 * tau), volume_plus, volume_minus, tau })
}

/// `Ψ = (1/2D) g^{μν} (£_ξ g)_{μν}`.
pub fn conformal_factor(m: &MetricField, xi: &VectorField, p: &[f64]) -> Result<f64> {
    let lie = m.lie_derivative(xi, p)?;
    let ginv = m.inverse_at(p)?;
    Ok(ginv.component_mul(&lie).sum() / (2.0 * m.dimension() as f64))
}

fn conformal_residual(m: &MetricField, xi: &VectorField, p: &[f64]) -> Result<(f64, f64, f64)> {
    let lie = m.lie_derivative(xi, p)?;
    let g = m.metric_at(p)?;
    let ginv = m.inverse_at(p)?;
    let psi = ginv.component_mul(&lie).sum() / (2.0 * m.dimension() as f64);
    let residual = (lie - &g * (2.0 * psi)).amax();
    Ok((psi, residual, g.amax().max(1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalData {
    pub field: String,
    /// `Ψ` at each sample point.
    pub psi: Vec<f64>,
    /// `max ‖£_ξ g − 2Ψ g‖_∞` over the samples.
    pub residual: f64,
    /// `max ‖£_ξ g − 2Ψ g‖_∞ / max(1, ‖g‖_∞)`.
    pub normalized_residual: f64,
    pub tolerance: f64,
    pub accepted: bool,
}

/// Tests `£_ξ g = 2Ψ g` at the samples.
pub fn conformal_check(
    m: &MetricField,
    xi: &VectorField,
    samples: &[CoordinatePoint],
    tol: f64,
) -> Result<ConformalData> {
    let rows: Vec<(f64, f64, f64)> =
        samples.par_iter().map(|p| conformal_residual(m, xi, p.coords())).collect::<Result<Vec<_>>>()?;
    let residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let normalized_residual = rows.iter().map(|r| r.1 / r.2).fold(0.0, f64::max);
    Ok(ConformalData {
        field: xi.name().to_string(),
        psi: rows.iter().map(|r| r.0).collect(),
        residual,
        normalized_residual,
        tolerance: tol,
        accepted: normalized_residual < tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
    Zero,
    Indefinite,
}

fn sign_of(values: &[f64], zero: f64) -> Sign {
    if values.iter().all(|v| v.abs() <= zero) {
        Sign::Zero
    } else if values.iter().all(|v| *v > zero) {
        Sign::Positive
    } else if values.iter().all(|v| *v < -zero) {
        Sign::Negative
    } else {
        Sign::Indefinite
    }
}

/// What the integral identity forbids for a closed `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignVerdict {
    /// Sign of `Ψ|_S` on the grid.
    pub psi: Sign,
    /// Sign of `∫ g(ξ,H) η_S`.
    pub flux: Sign,
    /// Causal character of `ξ` when uniform over `S`.
    pub field: Option<CausalCharacter>,
    /// The flux has the sign of `Ψ` (vacuous when `Ψ` changes sign).
    pub consistent: bool,
    /// Verdicts that a closed `S` cannot have.
    pub excluded: Vec<Verdict>,
    /// Non-spacelike `H` must be null and proportional to `ξ`.
    pub null_alignment_required: bool,
    pub statement: String,
}

const FUTURE_FAMILY: [Verdict; 3] =
    [Verdict::FutureTrapped, Verdict::NearlyFutureTrapped, Verdict::MarginallyFutureTrapped];
const PAST_FAMILY: [Verdict; 3] = [Verdict::PastTrapped, Verdict::NearlyPastTrapped, Verdict::MarginallyPastTrapped];

/// Classes excluded for closed `S` given the causal character of `ξ` and the sign of `Ψ`.
pub fn obstruction(field: Option<CausalCharacter>, psi: Sign) -> (Vec<Verdict>, bool, String) {
    let Some(c) = field.filter(|c| c.is_causal()) else {
        return (Vec::new(), false, "ξ is not uniformly causal on S: no restriction".to_string());
    };
    match (c.kind, psi) {
        (CausalKind::Timelike, Sign::Zero) => (
            FUTURE_FAMILY.iter().chain(&PAST_FAMILY).copied().collect(),
            false,
            "Killing ξ timelike on S: ∫g(ξ,H)η = 0, so closed S cannot be (nearly, marginally) trapped".to_string(),
        ),
        (CausalKind::Null, Sign::Zero) => (
            vec![
                Verdict::FutureTrapped,
                Verdict::NearlyFutureTrapped,
                Verdict::PastTrapped,
                Verdict::NearlyPastTrapped,
            ],
            true,
            "Killing ξ null on S: ∫g(ξ,H)η = 0, so non-spacelike H must be null and proportional to ξ".to_string(),
        ),
        (_, Sign::Positive | Sign::Negative) => {
            // g(ξ,H) integrates with the sign of Ψ; causal H in the cone of sign(Ψ)ξ would give the opposite sign.
            let cone = if psi == Sign::Positive { c.time } else { c.time.flipped() };
            let mut excluded: Vec<Verdict> =
                if cone == TimeOrientation::Future { FUTURE_FAMILY.to_vec() } else { PAST_FAMILY.to_vec() };
            excluded.push(Verdict::Extremal);
            let allowed = if cone == TimeOrientation::Future { "past" } else { "future" };
            (
                excluded,
                false,
                format!("Ψ has a sign on S: ∫g(ξ,H)η shares it, so H, if non-spacelike, must be {allowed}-pointing"),
            )
        }
        _ => (Vec::new(), false, "Ψ changes sign on S: no restriction".to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingIntegral {
    pub field: String,
    pub dim: usize,
    /// `∫ Ψ η_S`.
    pub lhs: f64,
    /// `(1/d) ∫ g(ξ,H) η_S`.
    pub rhs: f64,
    /// `|lhs − rhs| / (1 + |lhs|)`.
    pub residual: f64,
    pub flux_integral: f64,
    pub abs_flux_integral: f64,
    pub conformal: ConformalData,
    pub sign: SignVerdict,
}

/// Integral identity `∫Ψη = (1/d)∫g(ξ,H)η` on a closed `S`, with its sign obstruction.
pub fn killing_integral_check(
    e: &Embedding,
    xi: &VectorField,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<KillingIntegral> {
    if !e.is_closed() {
        return Err(GeomError::NotClosed(e.name().to_string()));
    }
    let m = e.ambient();
    let g = e.grid(grid)?;
    struct Row {
        dens: f64,
        psi: f64,
        residual: f64,
        gnorm: f64,
        flux: f64,
        field: Option<CausalCharacter>,
    }
    let rows: Vec<Row> = g
        .points
        .par_iter()
        .map(|gp| {
            let base = e.induced_point_data(&gp.u)?;
            let data = extrinsic_from_base(e, base)?;
            let p = data.base.p.coords();
            let (psi, residual, gnorm) = conformal_residual(m, xi, p)?;
            let x = xi.value_at(p);
            let flux = data.base.inner(&x, &data.mean_curvature.components);
            let field = match m.time_orientation_at(p) {
                Ok(t) if m.is_lorentzian() => Some(causal_character_with(&data.base.metric, &t, &x, tol.null_band)),
                _ => None,
            };
            Ok(Row { dens: data.base.vol_density, psi, residual, gnorm, flux, field })
        })
        .collect::<Result<Vec<_>>>()?;
    let normalized_residual = rows.iter().map(|r| r.residual / r.gnorm).fold(0.0, f64::max);
    let conformal = ConformalData {
        field: xi.name().to_string(),
        psi: rows.iter().map(|r| r.psi).collect(),
        residual: rows.iter().map(|r| r.residual).fold(0.0, f64::max),
        normalized_residual,
        tolerance: tol.conformal,
        accepted: normalized_residual < tol.conformal,
    };
    if !conformal.accepted {
        return Err(GeomError::NotConformal {
            field: xi.name().to_string(),
            residual: normalized_residual,
            tolerance: tol.conformal,
        });
    }
    let lhs = g.integrate(&rows.iter().map(|r| r.psi * r.dens).collect::<Vec<_>>());
    let flux_integral = g.integrate(&rows.iter().map(|r| r.flux * r.dens).collect::<Vec<_>>());
    let abs_flux_integral = g.integrate(&rows.iter().map(|r| r.flux.abs() * r.dens).collect::<Vec<_>>());
    let d = e.dim();
    let rhs = flux_integral / d as f64;
    let residual = (lhs - rhs).abs() / (1.0 + lhs.abs());

    let gmax = rows.iter().map(|r| r.gnorm).fold(1.0, f64::max);
    let psi_sign = sign_of(&conformal.psi, tol.conformal * gmax);
    let flux_sign = sign_of(&[flux_integral], tol.integral_zero * (1.0 + abs_flux_integral));
    let field = rows[0].field.filter(|c0| rows.iter().all(|r| r.field.as_ref() == Some(c0)));
    let consistent = match psi_sign {
        Sign::Indefinite => true,
        s => s == flux_sign,
    };
    let (excluded, null_alignment_required, statement) = obstruction(field, psi_sign);
    Ok(KillingIntegral {
        field: xi.name().to_string(),
        dim: d,
        lhs,
        rhs,
        residual,
        flux_integral,
        abs_flux_integral,
        conformal,
        sign: SignVerdict {
            psi: psi_sign,
            flux: flux_sign,
            field,
            consistent,
            excluded,
            null_alignment_required,
            statement,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub field: String,
    pub points: usize,
    /// Points where `H` is not spacelike.
    pub causal_points: usize,
    pub spacelike_somewhere: bool,
    /// `ξ` is null at every grid point.
    pub field_null: bool,
    /// Worst `|H − λξ|_ref / (1 + |H|_ref)` over the non-spacelike points, `λ` fitted by least squares.
    pub max_fit_residual: f64,
    pub tolerance: f64,
    /// `H` is spacelike somewhere, or every non-spacelike `H` fits `λξ`.
    pub consistent: bool,
}

/// For a null Killing `ξ`: non-spacelike `H` must be null and parallel to `ξ`.
pub fn null_killing_alignment(
    e: &Embedding,
    xi: &VectorField,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<AlignmentReport> {
    let m = e.ambient();
    let g = e.grid(grid)?;
    let rows: Vec<(CausalKind, bool, f64)> = g
        .points
        .par_iter()
        .map(|gp| {
            let base = e.induced_point_data(&gp.u)?;
            let data = extrinsic_from_base(e, base)?;
            let p = data.base.p.coords();
            let t = m.time_orientation_at(p)?;
            let h = &data.mean_curvature.components;
            let x = xi.value_at(p);
            let hc = causal_character_with(&data.base.metric, &t, h, tol.null_band);
            let xc = causal_character_with(&data.base.metric, &t, &x, tol.null_band);
            let lambda = x.dot(h) / x.dot(&x);
            let fit = h - &x * lambda;
            let r = metric_ref_norm2(&data.base.metric, &fit).sqrt()
                / (1.0 + metric_ref_norm2(&data.base.metric, h).sqrt());
            Ok((hc.kind, xc.kind == CausalKind::Null, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let spacelike_somewhere = rows.iter().any(|r| r.0 == CausalKind::Spacelike);
    let causal: Vec<&(CausalKind, bool, f64)> = rows.iter().filter(|r| r.0 != CausalKind::Spacelike).collect();
    let max_fit_residual = causal.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(AlignmentReport {
        field: xi.name().to_string(),
        points: rows.len(),
        causal_points: causal.len(),
        spacelike_somewhere,
        field_null: rows.iter().all(|r| r.1),
        max_fit_residual,
        tolerance: tol.alignment,
        consistent: spacelike_somewhere || max_fit_residual < tol.alignment,
    })
}
