//! Command-line front end: run configurations, command dispatch and the
//! exit-code contract.

pub mod commands;
pub mod config;
pub mod error;
pub mod problem;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use trapped::catalog::EntryRef;
use trapped::report::report_json;

pub use commands::{CommandOutput, VerifyKind};
pub use config::RunConfig;
pub use error::CliError;
pub use problem::Problem;

use config::{GridConfig, Output, OutputFormat, Source, VerifyConfig};

#[derive(Debug, Parser)]
#[command(name = "trapped", version, about = "Extrinsic geometry and trapped-submanifold classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the mean curvature vector of an embedding over its grid.
    Classify(RunArgs),
    /// Check one of the integral or pointwise identities.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Browse the built-in catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Pointwise first-variation identity.
    Eq3(RunArgs),
    /// Integral identity for a conformal Killing field on a closed surface.
    Killing(RunArgs),
    /// First variation of volume against the flowed-volume oracle.
    Variation(RunArgs),
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// One line per entry.
    List {
        #[arg(long, value_name = "PATH")]
        out_json: Option<PathBuf>,
    },
    /// Parameters, charts and expected results of one entry.
    Show {
        name: String,
        #[arg(long, value_name = "PATH")]
        out_json: Option<PathBuf>,
    },
}

/// Flags shared by `classify` and `verify`; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,
    #[arg(long, value_name = "REF")]
    pub metric: Option<String>,
    #[arg(long, value_name = "REF")]
    pub embedding: Option<String>,
    /// Repeatable; replaces the configured fields.
    #[arg(long = "field", value_name = "REF")]
    pub fields: Vec<String>,
    /// Points per axis, `N` or `N,N,…`.
    #[arg(long, value_name = "N[,N…]")]
    pub grid: Option<String>,
    /// Repeatable tolerance override.
    #[arg(long = "tol", value_name = "NAME=VAL")]
    pub tol: Vec<String>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Random samples for sweeps.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    /// Use finite differences instead of analytic derivatives.
    #[arg(long)]
    pub fd: bool,
    #[arg(long, value_name = "PATH")]
    pub out_json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out_csv: Option<PathBuf>,
}

impl RunArgs {
    /// The configuration file (or the default) with command-line overrides applied.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let catalog_ref =
            |key: &str, s: &str| -> Result<EntryRef, CliError> { s.parse().map_err(|e| CliError::at(key, e)) };
        if let Some(s) = &self.scenario {
            cfg.scenario = Some(s.clone());
        }
        if let Some(m) = &self.metric {
            cfg.metric = Some(Source::Catalog(catalog_ref("metric", m)?));
        }
        if let Some(e) = &self.embedding {
            cfg.embedding = Some(Source::Catalog(catalog_ref("embedding", e)?));
        }
        if !self.fields.is_empty() {
            cfg.fields =
                self.fields.iter().map(|f| catalog_ref("field", f).map(Source::Catalog)).collect::<Result<_, _>>()?;
        }
        if let Some(g) = &self.grid {
            let points = g
                .split(',')
                .map(|n| n.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::config("grid", format!("expected N[,N…], got `{g}`")))?;
            let rule = cfg.grid.as_ref().map_or(trapped::QuadratureRule::GaussLegendre, |c| c.rule);
            cfg.grid = Some(GridConfig { points, rule });
        }
        for t in &self.tol {
            let (name, value) =
                t.split_once('=').ok_or_else(|| CliError::config("tol", format!("expected NAME=VAL, got `{t}`")))?;
            let value: f64 = value.trim().parse().map_err(|_| {
                CliError::config(&format!("tolerances.{}", name.trim()), format!("not a number: `{value}`"))
            })?;
            cfg.tolerances.insert(name.trim().to_string(), value);
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(n) = self.samples {
            cfg.verify.get_or_insert_with(VerifyConfig::default).samples = Some(n);
        }
        cfg.finite_differences |= self.fd;
        for (format, path) in [(OutputFormat::Json, &self.out_json), (OutputFormat::Csv, &self.out_csv)] {
            if let Some(path) = path {
                cfg.outputs.retain(|o| o.format != format);
                cfg.outputs.push(Output { format, path: path.clone() });
            }
        }
        Ok(cfg)
    }
}

/// Runs a configured command (`None` for `classify`).
pub fn run_config(cfg: &RunConfig, verify: Option<VerifyKind>) -> Result<CommandOutput, CliError> {
    let problem = Problem::from_config(cfg)?;
    let v = cfg.verify.clone().unwrap_or_default();
    let out = match verify {
        None => commands::classify(&problem)?,
        Some(kind) => commands::verify(&problem, kind, v.samples, v.tau, v.threshold)?,
    };
    write_outputs(&cfg.outputs, &out)?;
    Ok(out)
}

fn write_outputs(outputs: &[Output], out: &CommandOutput) -> Result<(), CliError> {
    for o in outputs {
        let body = match o.format {
            OutputFormat::Json => &out.json,
            OutputFormat::Text => &out.text,
            OutputFormat::Csv => match &out.csv {
                Some(csv) => csv,
                None => return Err(CliError::config("outputs", "this command has no CSV output")),
            },
        };
        std::fs::write(&o.path, body).map_err(|e| CliError::Io(format!("{}: {e}", o.path.display())))?;
    }
    Ok(())
}

/// Executes a parsed command line and returns what to print and the exit code.
pub fn execute(cli: Cli) -> Result<CommandOutput, CliError> {
    match cli.command {
        Command::Classify(args) => run_config(&args.resolve()?, None),
        Command::Verify { check } => {
            let (kind, args) = match check {
                VerifyCommand::Eq3(a) => (VerifyKind::Eq3, a),
                VerifyCommand::Killing(a) => (VerifyKind::Killing, a),
                VerifyCommand::Variation(a) => (VerifyKind::Variation, a),
            };
            run_config(&args.resolve()?, Some(kind))
        }
        Command::Catalog { action } => {
            let (out, path) = match action {
                CatalogCommand::List { out_json } => (commands::catalog_list(), out_json),
                CatalogCommand::Show { name, out_json } => (commands::catalog_show(&name)?, out_json),
            };
            if let Some(p) = path {
                write_outputs(&[Output { format: OutputFormat::Json, path: p }], &out)?;
            }
            Ok(out)
        }
    }
}

/// The `error` report printed on stderr.
pub fn error_json(e: &CliError) -> String {
    report_json("error", &e.report())
}
