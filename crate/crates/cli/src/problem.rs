//! Builds core objects from a run configuration.

use trapped::catalog::{self, EntryRef};
use trapped::checks::DEFAULT_SEED;
use trapped::symbolic;
use trapped::{ChartDomain, Embedding, GeomError, GridSpec, MetricField, ParamDomain, Tolerances, VectorField};

use crate::config::{GridConfig, InlineEmbedding, InlineField, InlineMetric, RunConfig, Source};
use crate::error::CliError;

/// Everything a command needs, resolved from the configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub metric: Option<MetricField>,
    pub embedding: Option<Embedding>,
    pub fields: Vec<VectorField>,
    /// Grid given in the configuration or scenario; commands fall back to the default.
    pub grid: Option<GridSpec>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub finite_differences: bool,
}

impl Problem {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        let mut cfg = cfg.clone();
        if let Some(name) = cfg.scenario.clone() {
            apply_scenario(&mut cfg, &name)?;
        }

        let mut tolerances = Tolerances::default();
        for (name, value) in &cfg.tolerances {
            tolerances.set(name, *value).map_err(|e| CliError::at(&format!("tolerances.{name}"), e))?;
        }

        let mut metric = match &cfg.metric {
            Some(Source::Catalog(r)) => Some(catalog::metric(r).map_err(|e| CliError::at("metric", e))?),
            Some(Source::Inline(m)) => Some(inline_metric(m).map_err(|e| CliError::at("metric", e))?),
            None => None,
        };

        let embedding = match &cfg.embedding {
            Some(Source::Catalog(r)) => Some(
                match &metric {
                    Some(m) => catalog::embedding_in(r, m.clone()),
                    None => catalog::embedding(r),
                }
                .map_err(|e| CliError::at("embedding", e))?,
            ),
            Some(Source::Inline(def)) => {
                let m = metric
                    .clone()
                    .ok_or_else(|| CliError::config("embedding", "an inline embedding needs a metric"))?;
                Some(inline_embedding(def, m).map_err(|e| CliError::at("embedding", e))?)
            }
            None => None,
        };
        if metric.is_none() {
            metric = embedding.as_ref().map(|e| e.ambient().clone());
        }

        let mut fields = Vec::with_capacity(cfg.fields.len());
        for (i, f) in cfg.fields.iter().enumerate() {
            let key = format!("fields[{i}]");
            let m = metric.as_ref().ok_or_else(|| CliError::config(&key, "vector fields need a metric"))?;
            let xi = match f {
                Source::Catalog(r) => catalog::vector_field(r, m),
                Source::Inline(def) => inline_field(def, m),
            }
            .map_err(|e| CliError::at(&key, e))?;
            fields.push(xi);
        }

        let grid = match &cfg.grid {
            Some(g) => Some(grid_spec(g, embedding.as_ref())?),
            None => None,
        };

        let fd = cfg.finite_differences;
        Ok(Problem {
            metric: metric.map(|m| if fd { m.without_analytic_derivatives() } else { m }),
            embedding: embedding.map(|e| if fd { e.without_analytic_derivatives() } else { e }),
            fields: fields.into_iter().map(|f| if fd { f.without_analytic_jacobian() } else { f }).collect(),
            grid,
            tolerances,
            seed: cfg.seed.unwrap_or(DEFAULT_SEED),
            finite_differences: fd,
        })
    }

    pub fn require_embedding(&self) -> Result<&Embedding, CliError> {
        self.embedding.as_ref().ok_or_else(|| CliError::config("embedding", "this command needs an embedding"))
    }

    pub fn require_fields(&self) -> Result<&[VectorField], CliError> {
        if self.fields.is_empty() {
            Err(CliError::config("fields", "this command needs at least one vector field"))
        } else {
            Ok(&self.fields)
        }
    }

    pub fn grid_for(&self, e: &Embedding) -> GridSpec {
        self.grid.clone().unwrap_or_else(|| GridSpec::default_for(e.dim()))
    }
}

/// Scenario components fill whatever the configuration leaves unset.
fn apply_scenario(cfg: &mut RunConfig, name: &str) -> Result<(), CliError> {
    let entry = catalog::entry(name).map_err(|e| CliError::at("scenario", e))?;
    let refs = entry.scenario.as_ref().ok_or_else(|| CliError::UnknownEntry(format!("{name} (not a scenario)")))?;
    let parse = |s: &str| s.parse::<EntryRef>().map_err(|e| CliError::at("scenario", e));
    if cfg.metric.is_none() {
        cfg.metric = Some(Source::Catalog(parse(refs.metric)?));
    }
    if cfg.embedding.is_none() {
        cfg.embedding = Some(Source::Catalog(parse(refs.embedding)?));
    }
    if cfg.fields.is_empty() {
        cfg.fields = refs.fields.iter().map(|f| parse(f).map(Source::Catalog)).collect::<Result<_, _>>()?;
    }
    if cfg.grid.is_none() {
        cfg.grid = Some(GridConfig { points: refs.grid.clone(), rule: trapped::QuadratureRule::GaussLegendre });
    }
    Ok(())
}

/// A single point count applies to every axis.
fn grid_spec(g: &GridConfig, e: Option<&Embedding>) -> Result<GridSpec, CliError> {
    let mut points = g.points.clone();
    if let Some(e) = e {
        if points.len() == 1 && e.dim() > 1 {
            points = vec![points[0]; e.dim()];
        }
        if points.len() != e.dim() {
            return Err(CliError::config(
                "grid",
                format!("{} point counts given for a {}-dimensional parameter domain", points.len(), e.dim()),
            ));
        }
    }
    GridSpec::new(points, g.rule).map_err(|e| CliError::at("grid", e))
}

fn inline_metric(m: &InlineMetric) -> Result<MetricField, GeomError> {
    let dim = m.coordinates.len();
    let signature = m.signature.clone().unwrap_or_else(|| (0..dim).map(|i| if i == 0 { -1 } else { 1 }).collect());
    let mut chart = ChartDomain::unbounded(&m.chart, dim);
    for (bound, slot) in [(&m.lower, &mut chart.lower), (&m.upper, &mut chart.upper)] {
        if let Some(b) = bound {
            if b.len() != dim {
                return Err(GeomError::DimensionMismatch { expected: dim, found: b.len() });
            }
            slot.clone_from(b);
        }
    }
    let entries: Vec<_> = m.components.iter().map(|c| ((c.i, c.j), c.value.clone())).collect();
    symbolic::metric(&m.name, &m.coordinates, signature, chart, &entries, m.time_orientation.as_deref(), &m.constants)
}

fn inline_embedding(def: &InlineEmbedding, metric: MetricField) -> Result<Embedding, GeomError> {
    let domain = ParamDomain::new(def.axes.clone());
    symbolic::embedding(&def.name, metric, &def.parameters, domain, &def.components, &def.constants)?.closed(def.closed)
}

fn inline_field(def: &InlineField, metric: &MetricField) -> Result<VectorField, GeomError> {
    symbolic::vector_field(&def.name, metric.coordinates(), &def.components, &def.constants)
}
