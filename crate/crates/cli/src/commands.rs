//! The `classify`, `verify` and `catalog` commands.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use trapped::catalog::{self, CatalogEntry};
use trapped::checks::{eq3_sweep, variation_pair, variation_sweep, Eq3Sample, Eq3Sweep, VariationPair, VariationSweep};
use trapped::extrinsic::ClassificationReport;
use trapped::report::{fmt9, report_json, write_labels_csv};
use trapped::variation::{
    first_variation_density, killing_integral_check, null_killing_alignment, rhs_identity, AlignmentReport,
    KillingIntegral,
};
use trapped::{classify_submanifold, Embedding, VectorField, Verdict};

use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_OK};
use crate::problem::Problem;

/// What a command produced: console text, the JSON report and optional CSV.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub exit: i32,
    pub text: String,
    pub json: String,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    Eq3,
    Killing,
    Variation,
}

/// Body of every `verify` report.
#[derive(Debug, Serialize)]
pub struct VerifyReport<T: Serialize> {
    pub check: &'static str,
    pub threshold: f64,
    pub pass: bool,
    pub result: T,
}

const DEFAULT_EQ3_SAMPLES: usize = 200;
const DEFAULT_VARIATION_PAIRS: usize = 20;
const DEFAULT_TAU: f64 = 1e-3;
const EQ3_FD_THRESHOLD: f64 = 1e-4;
const VARIATION_THRESHOLD: f64 = 1e-4;

fn grid_label(g: &trapped::GridSpec) -> String {
    let pts: Vec<String> = g.points_per_axis.iter().map(|n| n.to_string()).collect();
    format!("{} {:?}", pts.join("x"), g.rule)
}

pub fn classify(p: &Problem) -> Result<CommandOutput, CliError> {
    let e = p.require_embedding()?;
    let grid = p.grid_for(e);
    let report = classify_submanifold(e, &grid, &p.tolerances)?;
    let exit = if report.verdict == Verdict::Mixed && report.boundary_points > 0 { EXIT_CHECK_FAILED } else { EXIT_OK };
    let mut csv = Vec::new();
    write_labels_csv(&mut csv, &report.labels).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(CommandOutput {
        exit,
        text: classification_text(&report),
        json: report_json("classification", &report),
        csv: Some(String::from_utf8(csv).expect("CSV output is UTF-8")),
    })
}

fn classification_text(r: &ClassificationReport) -> String {
    let h: Vec<f64> = r.labels.iter().map(|l| l.h_norm2).collect();
    let (lo, hi) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    let mut s = String::new();
    let _ = writeln!(s, "metric          {}", r.metric);
    let _ = writeln!(s, "embedding       {}", r.embedding);
    let _ = writeln!(s, "grid            {}", grid_label(&r.grid));
    let _ = writeln!(s, "verdict         {}", r.verdict);
    let _ = writeln!(s, "g(H,H) range    [{}, {}]", fmt9(lo), fmt9(hi));
    let _ = writeln!(s, "min margin      {}", fmt9(r.min_margin));
    let _ = writeln!(s, "boundary points {}", r.boundary_points);
    if let Some(hs) = &r.hypersurface {
        let _ = writeln!(s, "hypersurface    {}", hs.note);
    }
    for d in &r.diagnostics {
        let _ = writeln!(s, "note            {d}");
    }
    s
}

pub fn verify(
    p: &Problem,
    kind: VerifyKind,
    samples: Option<usize>,
    tau: Option<f64>,
    threshold: Option<f64>,
) -> Result<CommandOutput, CliError> {
    match kind {
        VerifyKind::Eq3 => verify_eq3(p, samples, threshold),
        VerifyKind::Killing => verify_killing(p, threshold),
        VerifyKind::Variation => verify_variation(p, samples, tau, threshold),
    }
}

fn finish<T: Serialize>(check: &'static str, threshold: f64, pass: bool, result: T, text: String) -> CommandOutput {
    let report = VerifyReport { check, threshold, pass, result };
    let mut text = text;
    let _ = writeln!(text, "threshold       {}", fmt9(threshold));
    let _ = writeln!(text, "result          {}", if pass { "pass" } else { "FAIL" });
    CommandOutput {
        exit: if pass { EXIT_OK } else { EXIT_CHECK_FAILED },
        text,
        json: report_json("verify", &report),
        csv: None,
    }
}

/// Pointwise identity on the grid of one (embedding, field) pair.
fn eq3_on_grid(e: &Embedding, xi: &VectorField, p: &Problem) -> Result<Vec<Eq3Sample>, CliError> {
    let grid = e.grid(&p.grid_for(e))?;
    let samples = grid
        .points
        .par_iter()
        .map(|gp| {
            let lie = first_variation_density(e, xi, &gp.u)?;
            let terms = rhs_identity(e, xi, &gp.u)?;
            Ok(Eq3Sample {
                embedding: e.name().to_string(),
                field: xi.name().to_string(),
                u: gp.u.clone(),
                lie_density: lie,
                divergence: terms.divergence,
                normal_flux: terms.normal_flux,
                residual: (lie - terms.total()).abs(),
            })
        })
        .collect::<trapped::Result<Vec<_>>>()?;
    Ok(samples)
}

fn verify_eq3(p: &Problem, samples: Option<usize>, threshold: Option<f64>) -> Result<CommandOutput, CliError> {
    let sweep = match (&p.embedding, p.fields.is_empty()) {
        (Some(e), false) => {
            let mut all = Vec::new();
            for xi in &p.fields {
                all.extend(eq3_on_grid(e, xi, p)?);
            }
            let max_residual = all.iter().map(|s| s.residual).fold(0.0, f64::max);
            Eq3Sweep { seed: p.seed, finite_differences: p.finite_differences, max_residual, samples: all }
        }
        _ => eq3_sweep(p.seed, samples.unwrap_or(DEFAULT_EQ3_SAMPLES), p.finite_differences)?,
    };
    let thr = threshold.unwrap_or(if p.finite_differences { EQ3_FD_THRESHOLD } else { p.tolerances.identity });
    let mut text = String::new();
    let _ = writeln!(text, "check           first-variation identity (pointwise)");
    let _ = writeln!(text, "samples         {}", sweep.samples.len());
    let _ = writeln!(text, "seed            {}", sweep.seed);
    let _ =
        writeln!(text, "derivatives     {}", if sweep.finite_differences { "finite differences" } else { "analytic" });
    let _ = writeln!(text, "max residual    {}", fmt9(sweep.max_residual));
    let pass = sweep.max_residual < thr;
    Ok(finish("eq3", thr, pass, sweep, text))
}

#[derive(Debug, Serialize)]
struct KillingResult {
    integral: KillingIntegral,
    #[serde(skip_serializing_if = "Option::is_none")]
    alignment: Option<AlignmentReport>,
}

fn verify_killing(p: &Problem, threshold: Option<f64>) -> Result<CommandOutput, CliError> {
    let e = p.require_embedding()?;
    let grid = p.grid_for(e);
    let thr = threshold.unwrap_or(p.tolerances.identity);
    let mut results = Vec::new();
    let mut text = String::new();
    let mut pass = true;
    for xi in p.require_fields()? {
        let k = killing_integral_check(e, xi, &grid, &p.tolerances)?;
        let alignment = if k.sign.null_alignment_required {
            Some(null_killing_alignment(e, xi, &grid, &p.tolerances)?)
        } else {
            None
        };
        pass &= k.residual < thr && alignment.as_ref().is_none_or(|a| a.consistent);
        let _ = writeln!(text, "field           {}", k.field);
        let _ = writeln!(text, "  lhs ∫Ψη       {}", fmt9(k.lhs));
        let _ = writeln!(text, "  rhs ∫g(ξ,H)η/d {}", fmt9(k.rhs));
        let _ = writeln!(text, "  residual      {}", fmt9(k.residual));
        let _ = writeln!(text, "  sign          Ψ {:?}, flux {:?}", k.sign.psi, k.sign.flux);
        let _ = writeln!(text, "  statement     {}", k.sign.statement);
        if let Some(a) = &alignment {
            let _ = writeln!(
                text,
                "  alignment     {} (spacelike somewhere: {}, max fit residual {})",
                if a.consistent { "consistent" } else { "VIOLATED" },
                a.spacelike_somewhere,
                fmt9(a.max_fit_residual)
            );
        }
        results.push(KillingResult { integral: k, alignment });
    }
    Ok(finish("killing", thr, pass, results, text))
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum VariationResult {
    Pairs(Vec<VariationPair>),
    Sweep(VariationSweep),
}

fn verify_variation(
    p: &Problem,
    samples: Option<usize>,
    tau: Option<f64>,
    threshold: Option<f64>,
) -> Result<CommandOutput, CliError> {
    let thr = threshold.unwrap_or(VARIATION_THRESHOLD);
    let (result, pairs): (VariationResult, Vec<VariationPair>) = match (&p.embedding, p.fields.is_empty()) {
        (Some(e), false) => {
            let grid = p.grid_for(e);
            let tau = tau.unwrap_or(DEFAULT_TAU);
            let pairs =
                p.fields.iter().map(|xi| variation_pair(e, xi, &grid, tau)).collect::<trapped::Result<Vec<_>>>()?;
            (VariationResult::Pairs(pairs.clone()), pairs)
        }
        _ => {
            let sweep = variation_sweep(p.seed, samples.unwrap_or(DEFAULT_VARIATION_PAIRS))?;
            let pairs = sweep.pairs.clone();
            (VariationResult::Sweep(sweep), pairs)
        }
    };
    let mut text = String::new();
    let _ = writeln!(text, "check           first variation of volume vs flow oracle");
    let mut worst: f64 = 0.0;
    for pr in &pairs {
        worst = worst.max(pr.relative_difference);
        let _ = writeln!(
            text,
            "  {} / {}: identity {}, oracle {}, rel diff {}",
            pr.embedding,
            pr.field,
            fmt9(pr.identity),
            fmt9(pr.oracle),
            fmt9(pr.relative_difference)
        );
    }
    let _ = writeln!(text, "max rel diff    {}", fmt9(worst));
    Ok(finish("variation", thr, worst < thr, result, text))
}

#[derive(Debug, Serialize)]
struct ListedEntry {
    name: &'static str,
    kind: String,
    summary: &'static str,
}

pub fn catalog_list() -> CommandOutput {
    let entries = catalog::list_entries();
    let width = entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let mut text = String::new();
    for e in entries {
        let _ = writeln!(text, "{:<12} {:<width$}  {}", e.kind.to_string(), e.name, e.summary);
    }
    let listed: Vec<ListedEntry> =
        entries.iter().map(|e| ListedEntry { name: e.name, kind: e.kind.to_string(), summary: e.summary }).collect();
    CommandOutput { exit: EXIT_OK, text, json: report_json("catalog", &listed), csv: None }
}

#[derive(Debug, Serialize)]
struct ShownEntry {
    entry: &'static CatalogEntry,
    /// Scenarios built on the entry, with their expected results.
    scenarios: Vec<&'static CatalogEntry>,
}

fn ref_name(r: &str) -> &str {
    r.split(':').next().unwrap_or(r)
}

pub fn catalog_show(name: &str) -> Result<CommandOutput, CliError> {
    let e = catalog::entry(name)?;
    let scenarios: Vec<&'static CatalogEntry> = catalog::list_entries()
        .iter()
        .filter(|s| {
            s.scenario.as_ref().is_some_and(|r| {
                ref_name(r.metric) == name
                    || ref_name(r.embedding) == name
                    || r.fields.iter().any(|f| ref_name(f) == name)
            })
        })
        .collect();
    let mut text = entry_text(e);
    for sc in &scenarios {
        let _ = writeln!(text);
        text.push_str(&entry_text(sc));
    }
    let json = report_json("catalog_entry", &ShownEntry { entry: e, scenarios });
    Ok(CommandOutput { exit: EXIT_OK, text, json, csv: None })
}

fn entry_text(e: &CatalogEntry) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({})", e.name, e.kind);
    let _ = writeln!(s, "  {}", e.summary);
    if !e.charts.is_empty() {
        let label = if e.kind == catalog::EntryKind::Metric { "chart" } else { "charts" };
        let _ = writeln!(s, "{label}: {}", e.charts.join(", "));
    }
    if let Some(m) = e.default_metric {
        let _ = writeln!(s, "default metric: {m}");
    }
    if let Some(c) = e.closed {
        let _ = writeln!(s, "closed: {c}");
    }
    if !e.conformal_in.is_empty() {
        let _ = writeln!(s, "conformal Killing in: {}", e.conformal_in.join(", "));
    }
    if !e.params.is_empty() {
        let _ = writeln!(s, "params:");
        for p in &e.params {
            let _ = writeln!(
                s,
                "  {:<8} default {:<10} range [{}, {}]{}  {}",
                p.name,
                fmt9(p.default),
                fmt9(p.min),
                fmt9(p.max),
                if p.integer { " integer" } else { "" },
                p.doc
            );
        }
    }
    if let Some(sc) = &e.scenario {
        let grid: Vec<String> = sc.grid.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(
            s,
            "scenario: metric {}, embedding {}, fields [{}], grid {}",
            sc.metric,
            sc.embedding,
            sc.fields.join(", "),
            grid.join("x")
        );
    }
    if !e.expected.is_empty() {
        let _ = writeln!(s, "expected:");
        for x in &e.expected {
            let value = match &x.value {
                catalog::ExpectedValue::Verdict { verdict } => format!("verdict {verdict}"),
                catalog::ExpectedValue::Scalar { quantity, value, tolerance } => {
                    format!("{quantity} = {} ± {}", fmt9(*value), fmt9(*tolerance))
                }
                catalog::ExpectedValue::Excluded { verdicts } => {
                    let v: Vec<String> = verdicts.iter().map(|v| v.to_string()).collect();
                    format!("verdict not in {{{}}}", v.join(", "))
                }
                catalog::ExpectedValue::Aligned => "null Killing alignment holds".to_string(),
            };
            let tag = match &x.basis {
                catalog::Basis::Theorem => "theorem".to_string(),
                catalog::Basis::Construction => "by construction".to_string(),
                catalog::Basis::ClosedForm { oracle } => format!("closed form: {oracle}"),
            };
            let _ = writeln!(s, "  {value}  [{tag}]");
        }
    }
    for n in &e.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}
