//! Randomized sweeps of the variational identities and evaluation of
//! catalog scenario expectations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, Basis, EntryRef, ExpectedValue, Scenario};
use crate::embedding::{AxisBoundary, Embedding};
use crate::error::{GeomError, Result};
use crate::extrinsic::{classify_submanifold, hypersurface_normal, null_expansions};
use crate::geometry::VectorField;
use crate::quadrature::GridSpec;
use crate::tolerances::Tolerances;
use crate::variation::{
    first_variation_density, flow_volume_oracle, killing_integral_check, null_killing_alignment, rhs_identity,
    volume_variation, BoundaryPolicy, FlowSpec,
};

/// Default seed of every randomized run.
pub const DEFAULT_SEED: u64 = 20_080_101;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eq3Sample {
    pub embedding: String,
    pub field: String,
    pub u: Vec<f64>,
    /// `½ tr_γ Φ*(£_ξ g)`.
    pub lie_density: f64,
    pub divergence: f64,
    pub normal_flux: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eq3Sweep {
    pub seed: u64,
    pub finite_differences: bool,
    pub max_residual: f64,
    pub samples: Vec<Eq3Sample>,
}

/// A random interior parameter point, kept away from poles.
fn random_point(e: &Embedding, rng: &mut ChaCha8Rng) -> Vec<f64> {
    e.domain()
        .axes()
        .iter()
        .map(|a| {
            let s: f64 = match a.boundary {
                AxisBoundary::Periodic => rng.random_range(0.0..1.0),
                _ => rng.random_range(0.02..0.98),
            };
            a.lower + s * a.length()
        })
        .collect()
}

fn polynomial_ref(rng: &mut ChaCha8Rng, scale: f64) -> EntryRef {
    EntryRef::new("polynomial")
        .with("seed", rng.random_range(0..1_000_000u32) as f64)
        .with("degree", rng.random_range(1..=2u32) as f64)
        .with("scale", scale)
}

/// Residual of the pointwise first-variation identity at `count` random
/// (embedding, polynomial field, point) triples drawn from the catalog.
pub fn eq3_sweep(seed: u64, count: usize, finite_differences: bool) -> Result<Eq3Sweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = catalog::nondegenerate_embeddings();
    let draws: Vec<(&str, EntryRef, u64)> = (0..count)
        .map(|_| (pool[rng.random_range(0..pool.len())], polynomial_ref(&mut rng, 1.0), rng.random()))
        .collect();
    let samples = draws
        .par_iter()
        .map(|(name, field_ref, point_seed)| {
            let mut e = catalog::embedding(&EntryRef::new(name))?;
            let mut xi = catalog::vector_field(field_ref, e.ambient())?;
            if finite_differences {
                e = e.without_analytic_derivatives();
                xi = xi.without_analytic_jacobian();
            }
            let u = random_point(&e, &mut ChaCha8Rng::seed_from_u64(*point_seed));
            let lie_density = first_variation_density(&e, &xi, &u)?;
            let terms = rhs_identity(&e, &xi, &u)?;
            Ok(Eq3Sample {
                embedding: name.to_string(),
                field: field_ref.to_string(),
                u,
                lie_density,
                divergence: terms.divergence,
                normal_flux: terms.normal_flux,
                residual: (lie_density - terms.total()).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(Eq3Sweep { seed, finite_differences, max_residual, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationPair {
    pub embedding: String,
    pub field: String,
    pub volume: f64,
    /// `∫ (div ξ̄ + g(ξ,H)) η_S`.
    pub identity: f64,
    pub divergence_integral: f64,
    /// Central difference of the flowed volume.
    pub oracle: f64,
    pub relative_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationSweep {
    pub seed: u64,
    pub tau: f64,
    pub max_relative_difference: f64,
    pub pairs: Vec<VariationPair>,
}

/// `|a − b| / max(|a|, |b|, 1e−3·V)`; the floor keeps volume-preserving fields from dividing by ~0.
pub fn variation_relative_difference(a: f64, b: f64, volume: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3 * volume.abs())
}

/// Compares the first variation of volume with the flow oracle.
pub fn variation_pair(e: &Embedding, xi: &VectorField, grid: &GridSpec, tau: f64) -> Result<VariationPair> {
    let vv = volume_variation(e, xi, grid, BoundaryPolicy::RequireClosed)?;
    let oracle = flow_volume_oracle(e, &FlowSpec::new(xi.clone(), tau), grid)?;
    Ok(VariationPair {
        embedding: e.name().to_string(),
        field: xi.name().to_string(),
        volume: vv.volume,
        identity: vv.derivative,
        divergence_integral: vv.divergence_integral,
        oracle: oracle.derivative,
        relative_difference: variation_relative_difference(vv.derivative, oracle.derivative, vv.volume),
    })
}

/// `count` random (closed catalog embedding, polynomial field) pairs.
pub fn variation_sweep(seed: u64, count: usize) -> Result<VariationSweep> {
    let tau = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = catalog::closed_embeddings();
    let draws: Vec<(&str, EntryRef)> =
        (0..count).map(|_| (pool[rng.random_range(0..pool.len())], polynomial_ref(&mut rng, 0.5))).collect();
    let pairs = draws
        .iter()
        .map(|(name, field_ref)| {
            let e = catalog::embedding(&EntryRef::new(name))?;
            let xi = catalog::vector_field(field_ref, e.ambient())?;
            let grid = GridSpec::default_for(e.dim());
            let mut pair = variation_pair(&e, &xi, &grid, tau)?;
            pair.field = field_ref.to_string();
            Ok(pair)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_relative_difference = pairs.iter().map(|p| p.relative_difference).fold(0.0, f64::max);
    Ok(VariationSweep { seed, tau, max_relative_difference, pairs })
}

/// One evaluated scenario expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub quantity: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
    pub basis: Basis,
}

fn field_index(quantity: &str) -> Result<(&str, usize)> {
    match quantity.split_once('[') {
        Some((q, rest)) => {
            let i = rest.trim_end_matches(']').parse().map_err(|_| GeomError::InvalidReference(quantity.into()))?;
            Ok((q, i))
        }
        None => Ok((quantity, 0)),
    }
}

fn field(s: &Scenario, i: usize) -> Result<&VectorField> {
    s.fields.get(i).ok_or(GeomError::DimensionMismatch { expected: i + 1, found: s.fields.len() })
}

/// Worst `|f(u) − value|` over the grid.
fn grid_max_error(s: &Scenario, value: f64, f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
    let g = s.embedding.grid(&s.grid)?;
    let errs = g.points.par_iter().map(|p| Ok((f(&p.u)? - value).abs())).collect::<Result<Vec<f64>>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Evaluates every expectation of a scenario under the given tolerances.
pub fn check_scenario(s: &Scenario, tol: &Tolerances) -> Result<Vec<Outcome>> {
    let e = &s.embedding;
    let report = classify_submanifold(e, &s.grid, tol)?;
    let mut out = Vec::new();
    for exp in &s.expected {
        let (quantity, expected, actual, pass) = match &exp.value {
            ExpectedValue::Verdict { verdict } => {
                ("verdict".to_string(), verdict.to_string(), report.verdict.to_string(), report.verdict == *verdict)
            }
            ExpectedValue::Scalar { quantity, value, tolerance } => {
                let (q, i) = field_index(quantity)?;
                let (actual, err) = match q {
                    "g(H,H)" => {
                        let err = report.labels.iter().map(|l| (l.h_norm2 - value).abs()).fold(0.0, f64::max);
                        (format!("max error {err:e}"), err)
                    }
                    "theta_plus" | "theta_minus" => {
                        let reference =
                            s.fields.last().ok_or(GeomError::DimensionMismatch { expected: 1, found: 0 })?;
                        let err = grid_max_error(s, *value, |u| {
                            let n = null_expansions(e, u, reference)?;
                            Ok(if q == "theta_plus" { n.theta_plus } else { n.theta_minus })
                        })?;
                        (format!("max error {err:e}"), err)
                    }
                    "theta" => {
                        let err = grid_max_error(s, *value, |u| Ok(hypersurface_normal(e, u)?.theta))?;
                        (format!("max error {err:e}"), err)
                    }
                    _ => {
                        let v = match q {
                            "volume" => e.volume(&s.grid)?,
                            "dV/dtau" => {
                                volume_variation(e, field(s, i)?, &s.grid, BoundaryPolicy::RequireClosed)?.derivative
                            }
                            "flux_integral" => killing_integral_check(e, field(s, i)?, &s.grid, tol)?.flux_integral,
                            "killing_lhs" => killing_integral_check(e, field(s, i)?, &s.grid, tol)?.lhs,
                            "killing_rhs" => killing_integral_check(e, field(s, i)?, &s.grid, tol)?.rhs,
                            other => return Err(GeomError::InvalidReference(other.to_string())),
                        };
                        (format!("{v:.12e}"), (v - value).abs())
                    }
                };
                (quantity.to_string(), format!("{value:.12e} ± {tolerance:e}"), actual, err <= *tolerance)
            }
            ExpectedValue::Excluded { verdicts } => {
                let k = killing_integral_check(e, field(s, 0)?, &s.grid, tol)?;
                let covers = verdicts.iter().all(|v| k.sign.excluded.contains(v));
                let pass = covers && !k.sign.excluded.contains(&report.verdict) && k.sign.consistent;
                (
                    "excluded".to_string(),
                    format!("{verdicts:?}"),
                    format!("{:?}; verdict {}", k.sign.excluded, report.verdict),
                    pass,
                )
            }
            ExpectedValue::Aligned => {
                let a = null_killing_alignment(e, field(s, 0)?, &s.grid, tol)?;
                (
                    "null_killing_alignment".to_string(),
                    "consistent".to_string(),
                    format!(
                        "spacelike somewhere: {}, max fit residual {:e}",
                        a.spacelike_somewhere, a.max_fit_residual
                    ),
                    a.consistent,
                )
            }
        };
        out.push(Outcome { quantity, expected, actual, pass, basis: exp.basis.clone() });
    }
    Ok(out)
}
