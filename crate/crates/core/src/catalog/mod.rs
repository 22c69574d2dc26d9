//! Built-in spacetimes, submanifolds, vector fields and scenarios.
//!
//! Entries are addressed by `name` or `name:key=value,key=value`. Every
//! object is built from closed-form component expressions, so metric
//! derivatives, embedding jacobians and hessians, and field jacobians are
//! all analytic.

mod entries;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{GeomError, Result};
use crate::extrinsic::Verdict;
use crate::geometry::{MetricField, VectorField};
use crate::quadrature::{GridSpec, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Metric,
    Embedding,
    VectorField,
    Scenario,
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::Metric => "metric",
            EntryKind::Embedding => "embedding",
            EntryKind::VectorField => "vector_field",
            EntryKind::Scenario => "scenario",
        })
    }
}

/// A named real parameter with default and inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
    pub doc: &'static str,
}

/// Where an expected value comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum Basis {
    /// A consequence of the sign obstructions and classification theorems.
    Theorem,
    /// Immediate from the construction.
    Construction,
    /// Checked against an independent closed-form oracle.
    ClosedForm { oracle: &'static str },
}

/// A quantity a scenario is expected to reproduce.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExpectedValue {
    Verdict {
        verdict: Verdict,
    },
    /// A scalar with absolute tolerance. Known quantities: `g(H,H)` (at every
    /// grid point), `theta_plus`, `theta_minus`, `theta` (at every grid point),
    /// `volume`, `dV/dtau`, `flux_integral`, `killing_lhs`, `killing_rhs`.
    Scalar {
        quantity: &'static str,
        value: f64,
        tolerance: f64,
    },
    /// The verdict must be among those excluded by the integral identity.
    Excluded {
        verdicts: Vec<Verdict>,
    },
    /// The null-Killing alignment check must pass.
    Aligned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    #[serde(flatten)]
    pub value: ExpectedValue,
    pub basis: Basis,
}

/// Components of a scenario, as catalog references.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRefs {
    pub metric: &'static str,
    pub embedding: &'static str,
    pub fields: Vec<&'static str>,
    pub grid: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: EntryKind,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
    /// Metric: chart kind produced. Embedding or field: chart kinds accepted (empty = any).
    pub charts: Vec<&'static str>,
    /// For embeddings and fields, the metric used when none is given.
    pub default_metric: Option<&'static str>,
    /// Embeddings only: compact without boundary.
    pub closed: Option<bool>,
    /// Vector fields only: metrics in which the field is conformal Killing.
    pub conformal_in: Vec<&'static str>,
    pub scenario: Option<ScenarioRefs>,
    pub expected: Vec<Expected>,
    pub notes: Vec<&'static str>,
}

fn registry() -> &'static [CatalogEntry] {
    static ENTRIES: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        let mut v = entries::all();
        v.sort_by(|a, b| (a.kind, a.name).cmp(&(b.kind, b.name)));
        v
    })
}

/// All entries, ordered by kind then name.
pub fn list_entries() -> &'static [CatalogEntry] {
    registry()
}

pub fn entry(name: &str) -> Result<&'static CatalogEntry> {
    registry().iter().find(|e| e.name == name).ok_or_else(|| GeomError::UnknownEntry(name.to_string()))
}

/// Resolved parameter values, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

/// Validates `given` against the entry's parameter specs.
pub fn resolve_params(entry: &CatalogEntry, given: &BTreeMap<String, f64>) -> Result<Params> {
    if let Some(name) = given.keys().find(|k| !entry.params.iter().any(|p| p.name == k.as_str())) {
        return Err(GeomError::UnknownParam { entry: entry.name.to_string(), name: name.clone() });
    }
    let mut out = BTreeMap::new();
    for p in &entry.params {
        let value = given.get(p.name).copied().unwrap_or(p.default);
        if !(value >= p.min && value <= p.max) || (p.integer && value.fract() != 0.0) {
            return Err(GeomError::ParamOutOfRange {
                entry: entry.name.to_string(),
                name: p.name.to_string(),
                value,
                min: p.min,
                max: p.max,
            });
        }
        out.insert(p.name.to_string(), value);
    }
    Ok(Params(out))
}

/// `name` or `name:key=value,key=value`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntryRef {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl EntryRef {
    pub fn new(name: &str) -> Self {
        EntryRef { name: name.to_string(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

impl FromStr for EntryRef {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GeomError::InvalidReference(s.to_string());
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (s.trim(), None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad());
        }
        let mut params = BTreeMap::new();
        if let Some(rest) = rest {
            for kv in rest.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                let k = k.trim();
                let v: f64 = v.trim().parse().map_err(|_| bad())?;
                if k.is_empty() || params.insert(k.to_string(), v).is_some() {
                    return Err(bad());
                }
            }
        }
        Ok(EntryRef { name: name.to_string(), params })
    }
}

impl fmt::Display for EntryRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl Serialize for EntryRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntryRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn lookup(r: &EntryRef, kind: EntryKind) -> Result<(&'static CatalogEntry, Params)> {
    let e = entry(&r.name)?;
    if e.kind != kind {
        return Err(GeomError::UnknownEntry(format!("{} (is a {}, not a {kind})", r.name, e.kind)));
    }
    Ok((e, resolve_params(e, &r.params)?))
}

fn check_chart(e: &CatalogEntry, m: &MetricField) -> Result<()> {
    let found = &m.chart().kind;
    if e.charts.is_empty() || e.charts.iter().any(|c| c == found) {
        Ok(())
    } else {
        Err(GeomError::IncompatibleChart {
            embedding: e.name.to_string(),
            metric: m.name().to_string(),
            expected: e.charts.join("|"),
            found: found.clone(),
        })
    }
}

pub fn metric(r: &EntryRef) -> Result<MetricField> {
    let (e, p) = lookup(r, EntryKind::Metric)?;
    entries::build_metric(e.name, &p)
}

/// An embedding in its default ambient metric.
pub fn embedding(r: &EntryRef) -> Result<Embedding> {
    let e = entry(&r.name)?;
    let m = metric(&default_metric_ref(e)?)?;
    embedding_in(r, m)
}

/// An embedding in the given ambient metric, which must use a compatible chart.
pub fn embedding_in(r: &EntryRef, ambient: MetricField) -> Result<Embedding> {
    let (e, p) = lookup(r, EntryKind::Embedding)?;
    check_chart(e, &ambient)?;
    let emb = entries::build_embedding(e.name, &p, ambient)?;
    emb.closed(e.closed.unwrap_or(false))
}

/// A vector field on the given ambient metric.
pub fn vector_field(r: &EntryRef, ambient: &MetricField) -> Result<VectorField> {
    let (e, p) = lookup(r, EntryKind::VectorField)?;
    check_chart(e, ambient)?;
    entries::build_field(e.name, &p, ambient)
}

fn default_metric_ref(e: &CatalogEntry) -> Result<EntryRef> {
    e.default_metric.ok_or_else(|| GeomError::UnknownEntry(format!("{} has no default metric", e.name)))?.parse()
}

/// A fully wired scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub metric: MetricField,
    pub embedding: Embedding,
    pub fields: Vec<VectorField>,
    pub grid: GridSpec,
    pub expected: Vec<Expected>,
}

pub fn scenario(name: &str) -> Result<Scenario> {
    let e = entry(name)?;
    let refs = e.scenario.as_ref().ok_or_else(|| GeomError::UnknownEntry(format!("{name} is not a scenario")))?;
    let metric = self::metric(&refs.metric.parse()?)?;
    let embedding = embedding_in(&refs.embedding.parse()?, metric.clone())?;
    let fields = refs.fields.iter().map(|f| vector_field(&f.parse()?, &metric)).collect::<Result<Vec<_>>>()?;
    let grid = GridSpec::new(refs.grid.clone(), QuadratureRule::GaussLegendre)?;
    Ok(Scenario { name: name.to_string(), metric, embedding, fields, grid, expected: e.expected.clone() })
}

/// Any catalog object.
#[derive(Debug, Clone)]
pub enum Instance {
    Metric(MetricField),
    Embedding(Embedding),
    VectorField(VectorField),
    Scenario(Box<Scenario>),
}

/// Builds an entry by reference; embeddings and fields use their default metric.
pub fn instantiate(r: &EntryRef) -> Result<Instance> {
    let e = entry(&r.name)?;
    Ok(match e.kind {
        EntryKind::Metric => Instance::Metric(metric(r)?),
        EntryKind::Embedding => Instance::Embedding(embedding(r)?),
        EntryKind::VectorField => {
            let m = self::metric(&default_metric_ref(e)?)?;
            Instance::VectorField(vector_field(r, &m)?)
        }
        EntryKind::Scenario => {
            if !r.params.is_empty() {
                return Err(GeomError::UnknownParam {
                    entry: e.name.to_string(),
                    name: r.params.keys().next().cloned().unwrap_or_default(),
                });
            }
            Instance::Scenario(Box::new(scenario(&r.name)?))
        }
    })
}

/// Names of the entries of one kind, in listing order.
pub fn names_of(kind: EntryKind) -> Vec<&'static str> {
    registry().iter().filter(|e| e.kind == kind).map(|e| e.name).collect()
}

/// Closed embeddings with their default metric, for property sweeps.
pub fn closed_embeddings() -> Vec<&'static str> {
    registry().iter().filter(|e| e.kind == EntryKind::Embedding && e.closed == Some(true)).map(|e| e.name).collect()
}

/// Embeddings with a nondegenerate induced metric, for property sweeps.
pub fn nondegenerate_embeddings() -> Vec<&'static str> {
    registry()
        .iter()
        .filter(|e| e.kind == EntryKind::Embedding && !e.notes.iter().any(|n| n.starts_with("degenerate")))
        .map(|e| e.name)
        .collect()
}
