//! Command-line arguments and subcommand dispatch.

use std::path::{Path, PathBuf};

use adp_core::harness::{run_sin_recovery, run_synthetic_recovery, run_utility_histogram, sin_recovery_plot, SIN_BETA_SCALE, SIN_DIM, SIN_SEED};
use adp_core::models::SyntheticSinModel;
use adp_core::optimizer::{GcpConfig, Objective, PairScope};
use adp_core::{Loss, ModelHandle, UtilitySpec};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::audit::run_audit;
use crate::config::{AuditConfig, BoundsSection, DensitySetting, OutputSection, SearchSection};
use crate::error::{CliError, CliResult};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "adp", version, about = "Automatically choose interesting directional dependence plots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for the most interesting plot of a model on a dataset.
    Audit(AuditArgs),
    /// Planted-direction recovery on random non-monotone models.
    EvalRecovery(RecoveryArgs),
    /// Sin-model recovery with the Taylor-contrast and monotonicity utilities.
    EvalSin(SinArgs),
    /// Optimized utility against random sparse directions on the sin model.
    EvalHistogram(HistogramArgs),
}

fn parse_loss(s: &str) -> Result<Loss, String> {
    s.parse().map_err(|e: adp_core::AdpError| e.to_string())
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unrecognized value {s:?}"))
}

#[derive(Debug, Args, Default)]
pub struct SearchArgs {
    /// Maximum number of nonzero direction weights.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Number of rotation angles per pair.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Grid points per plot.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// anchored, touching or all.
    #[arg(long, value_parser = parse_kebab::<PairScope>)]
    pub pair_scope: Option<PairScope>,
    /// maximize or minimize.
    #[arg(long, value_parser = parse_kebab::<Objective>)]
    pub objective: Option<Objective>,
}

impl SearchArgs {
    fn section(&self) -> SearchSection {
        SearchSection {
            sparsity: self.sparsity,
            angles: self.angles,
            grid: self.grid,
            max_iter: self.max_iter,
            rel_tol: self.rel_tol,
            pair_scope: self.pair_scope,
            objective: self.objective,
        }
    }

    fn gcp(&self) -> CliResult<GcpConfig> {
        let mut cfg = AuditConfig { data: Some(String::new()), model: Some(String::new()), ..Default::default() };
        cfg.search = self.section();
        Ok(cfg.resolve()?.gcp)
    }
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// TOML file with defaults for every flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV file with a header row.
    #[arg(long)]
    pub data: Option<String>,
    /// builtin:<name>[:<params.json>], cmd:<command> or http:<url>.
    #[arg(long)]
    pub model: Option<String>,
    /// variance, constant-contrast, linear, monotonic, lipschitz:<L>,
    /// model-contrast:<model>, taylor or flip:<feature>.
    #[arg(long)]
    pub utility: Option<String>,
    /// squared or absolute.
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<Loss>,
    /// Row index or sample:<s>.
    #[arg(long)]
    pub target: Option<String>,
    /// raw, latent:<n> or transforms:<file>.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Divide integrated losses by the interval length.
    #[arg(long)]
    pub normalize: Option<bool>,
    /// Quantile of the fitted Gaussian bounding the plot, or off.
    #[arg(long)]
    pub density_quantile: Option<String>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub svg: Option<String>,
}

impl AuditArgs {
    fn flags(&self) -> CliResult<AuditConfig> {
        Ok(AuditConfig {
            data: self.data.clone(),
            model: self.model.clone(),
            utility: self.utility.clone(),
            loss: self.loss,
            target: self.target.clone(),
            space: self.space.clone(),
            seed: self.seed,
            normalize: self.normalize,
            search: self.search.section(),
            bounds: BoundsSection {
                density_quantile: self.density_quantile.as_deref().map(DensitySetting::parse).transpose()?,
            },
            output: OutputSection { out: self.out.clone(), svg: self.svg.clone() },
        })
    }
}

#[derive(Debug, Args)]
pub struct RecoveryArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Support sizes to plant.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct SinArgs {
    #[arg(long, default_value_t = SIN_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    /// Number of random directions.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 3)]
    pub max_nonzeros: usize,
    /// monotonic or taylor.
    #[arg(long, default_value = "monotonic")]
    pub utility: String,
    /// Seed for the random directions.
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    /// Seed for the sin-model coefficients.
    #[arg(long, default_value_t = SIN_SEED)]
    pub model_seed: u64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<String>,
}

fn write_file(path: &str, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(Path::new(path), e))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&str>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Audit(args) => {
            let base = match &args.config {
                Some(path) => AuditConfig::load(path)?,
                None => AuditConfig::default(),
            };
            let settings = base.overlay(args.flags()?).resolve()?;
            let report = run_audit(&settings)?;
            if let Some(path) = &settings.svg {
                write_file(path, &svg::render(&report))?;
            }
            match &settings.out {
                Some(path) => write_file(path, &report.to_json()),
                None => {
                    print!("{}", report.to_json());
                    Ok(())
                }
            }
        }
        Command::EvalRecovery(args) => {
            let report = run_synthetic_recovery(args.trials, args.dim, &args.sizes, &args.search.gcp()?, args.seed)?;
            for r in &report.results {
                eprintln!("support {}: {}/{} recovered", r.support_size, r.successes, r.trials);
            }
            emit_json(&report, args.out.as_deref())
        }
        Command::EvalSin(args) => {
            let report = run_sin_recovery(&args.search.gcp()?, args.seed)?;
            emit_json(&report, args.out.as_deref())
        }
        Command::EvalHistogram(args) => {
            let spec = match args.utility.as_str() {
                "monotonic" => UtilitySpec::monotonicity(),
                "taylor" => UtilitySpec::taylor(),
                other => return Err(CliError::Usage(format!("histogram utility must be monotonic or taylor, got {other:?}"))),
            };
            let m = ModelHandle::new(SyntheticSinModel::random(args.model_seed, SIN_DIM, SIN_BETA_SCALE)?);
            let family = sin_recovery_plot(SIN_DIM);
            let report = run_utility_histogram(
                &family,
                &m,
                &spec,
                args.samples,
                args.max_nonzeros,
                &args.search.gcp()?,
                args.seed,
            )?;
            eprintln!(
                "optimized {:.6}, best random {:.6}, {} random directions above",
                report.optimized_utility,
                report.best_random(),
                report.exceedance_rank
            );
            emit_json(&report, args.out.as_deref())
        }
    }
}
