//! Run configuration file (TOML).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use trapped::catalog::EntryRef;
use trapped::{ParamAxis, QuadratureRule};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Catalog scenario supplying metric, embedding, fields and grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Source<InlineMetric>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Source<InlineEmbedding>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<Source<InlineField>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Overrides by tolerance name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Drop analytic derivatives and use finite differences throughout.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub finite_differences: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            scenario: None,
            metric: None,
            embedding: None,
            fields: Vec::new(),
            grid: None,
            tolerances: BTreeMap::new(),
            outputs: Vec::new(),
            seed: None,
            finite_differences: false,
            verify: None,
        }
    }
}

/// Either a catalog reference `name:key=value,…` or an inline definition.
#[derive(Debug, Clone, PartialEq)]
pub enum Source<T> {
    Catalog(EntryRef),
    Inline(T),
}

impl<T: Serialize> Serialize for Source<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Source::Catalog(r) => r.serialize(s),
            Source::Inline(t) => t.serialize(s),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Source<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = Source<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a catalog reference string or an inline table")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                v.parse().map(Source::Catalog).map_err(E::custom)
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Self::Value, A::Error> {
                T::deserialize(de::value::MapAccessDeserializer::new(map)).map(Source::Inline)
            }
        }

        d.deserialize_any(V(std::marker::PhantomData))
    }
}

/// One metric component `g_{ij}` (symmetric; give each pair once).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub i: usize,
    pub j: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMetric {
    pub name: String,
    pub coordinates: Vec<String>,
    /// Diagonal signs of the signature; defaults to `(−,+,…,+)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<i8>>,
    /// Chart kind, matched against the charts catalog embeddings accept.
    #[serde(default = "default_chart")]
    pub chart: String,
    /// Open coordinate box; `inf` allowed. Defaults to all of `R^D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    pub components: Vec<Component>,
    /// Future-pointing timelike field as component expressions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_orientation: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
}

fn default_chart() -> String {
    "inline".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineEmbedding {
    pub name: String,
    pub parameters: Vec<String>,
    pub axes: Vec<ParamAxis>,
    /// `Φ^μ(u)`, one expression per ambient coordinate.
    pub components: Vec<String>,
    pub closed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineField {
    pub name: String,
    /// `ξ^μ(x)` in the metric's coordinates.
    pub components: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub points: Vec<usize>,
    #[serde(default = "default_rule")]
    pub rule: QuadratureRule,
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::GaussLegendre
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub format: OutputFormat,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random triples (`eq3`) or pairs (`variation`) when no embedding is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Flow step of the volume oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Pass threshold replacing the command default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("unsupported schema version {}; expected {SCHEMA_VERSION}", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configurations serialize to TOML")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// Names the key a TOML error refers to: the field named in the message, or
/// else the key on the line the error points at.
fn toml_error(text: &str, e: &toml::de::Error) -> CliError {
    let message = e.message().to_string();
    let quoted = ["unknown field `", "missing field `", "duplicate field `", "duplicate key `"]
        .iter()
        .find_map(|p| message.split_once(p).and_then(|(_, rest)| rest.split_once('`')).map(|(k, _)| k.to_string()));
    let key = quoted.or_else(|| {
        let start = e.span()?.start;
        let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
        let line = text[line_start..].lines().next().unwrap_or("");
        let key = line.split_once('=').map(|(k, _)| k).unwrap_or(line);
        let key = key.trim().trim_matches(|c| c == '[' || c == ']').trim();
        (!key.is_empty()).then(|| key.to_string())
    });
    CliError::config(key.as_deref().unwrap_or("config"), message)
}
