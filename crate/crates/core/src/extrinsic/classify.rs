//! Pointwise causal labels of `H` and the submanifold-level trapping verdict.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{extrinsic_from_base, hypersurface_normal};
use crate::embedding::Embedding;
use crate::error::{GeomError, Result};
use crate::geometry::{causal_character_with, CausalCharacter, CausalKind, TimeOrientation};
use crate::quadrature::GridSpec;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    FutureTrapped,
    PastTrapped,
    NearlyFutureTrapped,
    NearlyPastTrapped,
    MarginallyFutureTrapped,
    MarginallyPastTrapped,
    Extremal,
    AbsolutelyNonTrapped,
    Mixed,
}

impl Verdict {
    pub const ALL: [Verdict; 9] = [
        Verdict::FutureTrapped,
        Verdict::PastTrapped,
        Verdict::NearlyFutureTrapped,
        Verdict::NearlyPastTrapped,
        Verdict::MarginallyFutureTrapped,
        Verdict::MarginallyPastTrapped,
        Verdict::Extremal,
        Verdict::AbsolutelyNonTrapped,
        Verdict::Mixed,
    ];

    /// Any of the six (future or past) trapped, nearly trapped or marginally trapped classes.
    pub fn is_trapped_family(self) -> bool {
        !matches!(self, Verdict::Extremal | Verdict::AbsolutelyNonTrapped | Verdict::Mixed)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Verdict::ALL.into_iter().find(|v| v.to_string() == s).ok_or_else(|| format!("unknown verdict `{s}`"))
    }
}

/// Causal label of `H` at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLabel {
    pub u: Vec<f64>,
    pub causal: CausalCharacter,
    pub h_norm2: f64,
    /// `|H|_ref`.
    pub h_ref_norm: f64,
    /// `|g(H,H)| / |H|²_ref − null_band`: positive outside the null band, negative inside.
    pub margin: f64,
    /// Null within the band but with `|H|_ref ≤ 10·null_band`: cannot be told apart from zero.
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceSummary {
    /// Causal type of the unit normal when uniform over the grid.
    pub normal: Option<CausalKind>,
    /// `θ` in `H = θ n` per grid point.
    pub theta: Vec<f64>,
    pub maximal: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub embedding: String,
    pub verdict: Verdict,
    pub grid: GridSpec,
    pub null_band: f64,
    pub nonzero_threshold: f64,
    /// Smallest `|margin|` over the grid.
    pub min_margin: f64,
    pub boundary_points: usize,
    pub diagnostics: Vec<String>,
    pub labels: Vec<PointLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypersurface: Option<HypersurfaceSummary>,
}

fn label_from(u: Vec<f64>, causal: CausalCharacter, h_norm2: f64, h_ref: f64, tol: f64) -> PointLabel {
    let scale = h_ref * h_ref;
    let mut causal = causal;
    let mut boundary = false;
    let margin = match causal.kind {
        CausalKind::Zero => -tol,
        _ => h_norm2.abs() / scale - tol,
    };
    if causal.kind == CausalKind::Null && h_ref <= 10.0 * tol {
        causal = CausalCharacter { kind: CausalKind::Zero, time: TimeOrientation::NotApplicable };
        boundary = true;
    }
    PointLabel { u, causal, h_norm2, h_ref_norm: h_ref, margin, boundary }
}

/// Causal label of `H` at `u`; `S` must be spacelike there.
pub fn classify_point(e: &Embedding, u: &[f64], tol: &Tolerances) -> Result<PointLabel> {
    let metric = e.ambient();
    if !metric.is_lorentzian() || !metric.has_time_orientation() {
        return Err(GeomError::NotLorentzian);
    }
    let base = e.induced_point_data(u)?;
    if !base.is_spacelike() {
        return Err(GeomError::NotSpacelike { u: base.u.clone() });
    }
    let data = extrinsic_from_base(e, base)?;
    let t = metric.time_orientation_at(data.base.p.coords())?;
    let causal = causal_character_with(&data.base.metric, &t, &data.mean_curvature.components, tol.null_band);
    Ok(label_from(data.base.u.clone(), causal, data.h_norm2, data.h_ref_norm(), tol.null_band))
}

/// Aggregates point labels with the universal/existential quantifiers of the
/// trapped-submanifold taxonomy, evaluated on the grid. Zero points count as
/// compatible with either time orientation.
pub fn verdict_from_labels(labels: &[PointLabel]) -> (Verdict, Vec<String>) {
    let mut diagnostics = Vec::new();
    let n = labels.len();
    let boundary = labels.iter().filter(|l| l.boundary).count();
    if boundary > 0 {
        diagnostics.push(format!(
            "{boundary} point(s) have H inside the null band with |H|_ref too small to separate from zero; \
             verdict is Mixed at this resolution"
        ));
        return (Verdict::Mixed, diagnostics);
    }
    let count = |kind: CausalKind, time: TimeOrientation| {
        labels.iter().filter(|l| l.causal.kind == kind && (kind == CausalKind::Zero || l.causal.time == time)).count()
    };
    let tf = count(CausalKind::Timelike, TimeOrientation::Future);
    let tp = count(CausalKind::Timelike, TimeOrientation::Past);
    let nf = count(CausalKind::Null, TimeOrientation::Future);
    let np = count(CausalKind::Null, TimeOrientation::Past);
    let z = count(CausalKind::Zero, TimeOrientation::NotApplicable);
    let s = count(CausalKind::Spacelike, TimeOrientation::NotApplicable);
    let verdict = if n == 0 {
        Verdict::Mixed
    } else if s == n {
        Verdict::AbsolutelyNonTrapped
    } else if z == n {
        Verdict::Extremal
    } else if tf == n {
        Verdict::FutureTrapped
    } else if tp == n {
        Verdict::PastTrapped
    } else if tf + nf + z == n && tf > 0 {
        Verdict::NearlyFutureTrapped
    } else if tp + np + z == n && tp > 0 {
        Verdict::NearlyPastTrapped
    } else if nf + z == n && nf > 0 {
        Verdict::MarginallyFutureTrapped
    } else if np + z == n && np > 0 {
        Verdict::MarginallyPastTrapped
    } else {
        diagnostics.push(format!(
            "labels: {tf} timelike-future, {tp} timelike-past, {nf} null-future, {np} null-past, {z} zero, {s} spacelike"
        ));
        Verdict::Mixed
    };
    (verdict, diagnostics)
}

/// Classifies `S` over the grid.
pub fn classify_submanifold(e: &Embedding, grid: &GridSpec, tol: &Tolerances) -> Result<ClassificationReport> {
    let g = e.grid(grid)?;
    let labels: Vec<PointLabel> =
        g.points.par_iter().map(|gp| classify_point(e, &gp.u, tol)).collect::<Result<Vec<_>>>()?;
    let (verdict, mut diagnostics) = verdict_from_labels(&labels);
    let min_margin = labels.iter().map(|l| l.margin.abs()).fold(f64::INFINITY, f64::min);
    let boundary_points = labels.iter().filter(|l| l.boundary).count();

    let hypersurface = if e.codimension() == 1 {
        let normals = g.points.par_iter().map(|gp| hypersurface_normal(e, &gp.u)).collect::<Result<Vec<_>>>()?;
        let first = normals[0].kind;
        let normal = normals.iter().all(|n| n.kind == first).then_some(first);
        let maximal = normal == Some(CausalKind::Timelike) && verdict == Verdict::Extremal;
        let note = match normal {
            Some(CausalKind::Timelike) if maximal => "spacelike hypersurface with H = 0: maximal".to_string(),
            Some(CausalKind::Timelike) => "spacelike hypersurface: H = θ n with n the future unit normal".to_string(),
            _ => "hypersurface: H = θ n with n the unit normal".to_string(),
        };
        Some(HypersurfaceSummary { normal, theta: normals.iter().map(|n| n.theta).collect(), maximal, note })
    } else {
        None
    };
    if verdict != Verdict::Mixed && min_margin < 10.0 * tol.null_band && verdict != Verdict::Extremal {
        let has_non_null = labels.iter().any(|l| matches!(l.causal.kind, CausalKind::Timelike | CausalKind::Spacelike));
        if has_non_null {
            diagnostics.push(format!("smallest distance from the null band is {min_margin:e}; consider refining"));
        }
    }

    Ok(ClassificationReport {
        metric: e.ambient().name().to_string(),
        embedding: e.name().to_string(),
        verdict,
        grid: grid.clone(),
        null_band: tol.null_band,
        nonzero_threshold: 10.0 * tol.null_band,
        min_margin,
        boundary_points,
        diagnostics,
        labels,
        hypersurface,
    })
}
