//! Run configuration: a TOML file mirroring the command-line flags.
//!
//! ```toml
//! data = "sin.csv"
//! model = "builtin:sin:sin.json"
//! utility = "monotonic"
//! loss = "squared"
//! target = "0"
//! space = "raw"
//! seed = 7
//!
//! [search]
//! sparsity = 3
//! angles = 20
//! grid = 50
//! max-iter = 10
//!
//! [bounds]
//! density-quantile = 0.95   # or "off"
//!
//! [output]
//! out = "report.json"
//! svg = "plot.svg"
//! ```
//!
//! Relative paths in a file are resolved against the file's directory;
//! relative paths given as flags are resolved against the working directory.

use std::path::Path;

use adp_core::bounds::DEFAULT_DENSITY_QUANTILE;
use adp_core::optimizer::{GcpConfig, Objective, PairScope};
use adp_core::Loss;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySetting {
    Quantile(f64),
    Keyword(String),
}

impl DensitySetting {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.parse::<f64>() {
            Ok(q) => Ok(DensitySetting::Quantile(q)),
            Err(_) => Ok(DensitySetting::Keyword(s.to_string())),
        }
    }

    fn resolve(&self) -> CliResult<Option<f64>> {
        match self {
            DensitySetting::Quantile(q) if *q > 0.0 && *q < 1.0 => Ok(Some(*q)),
            DensitySetting::Quantile(q) => {
                Err(CliError::Config(format!("density quantile must lie in (0, 1), got {q}")))
            }
            DensitySetting::Keyword(k) if k == "off" => Ok(None),
            DensitySetting::Keyword(k) => Err(CliError::Config(format!("density quantile must be a number or \"off\", got {k:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SearchSection {
    pub sparsity: Option<usize>,
    pub angles: Option<usize>,
    pub grid: Option<usize>,
    pub max_iter: Option<usize>,
    pub rel_tol: Option<f64>,
    pub pair_scope: Option<PairScope>,
    pub objective: Option<Objective>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BoundsSection {
    pub density_quantile: Option<DensitySetting>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OutputSection {
    pub out: Option<String>,
    pub svg: Option<String>,
}

/// Every setting of an audit run, each optional so that files and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AuditConfig {
    pub data: Option<String>,
    pub model: Option<String>,
    pub utility: Option<String>,
    pub loss: Option<Loss>,
    pub target: Option<String>,
    pub space: Option<String>,
    pub seed: Option<u64>,
    pub normalize: Option<bool>,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl AuditConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    /// Reads a config file and rebases its relative paths on the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(cfg.rebased(base))
    }

    fn rebased(mut self, base: &Path) -> Self {
        self.data = self.data.map(|p| rebase_path(base, &p));
        self.model = self.model.map(|m| rebase_model_uri(base, &m));
        self.utility = self.utility.map(|u| match u.strip_prefix("model-contrast:") {
            Some(uri) => format!("model-contrast:{}", rebase_model_uri(base, uri)),
            None => u,
        });
        self.space = self.space.map(|s| match s.strip_prefix("transforms:") {
            Some(file) => format!("transforms:{}", rebase_path(base, file)),
            None => s,
        });
        self.output.out = self.output.out.map(|p| rebase_path(base, &p));
        self.output.svg = self.output.svg.map(|p| rebase_path(base, &p));
        self
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: AuditConfig) -> AuditConfig {
        AuditConfig {
            data: over.data.or(self.data),
            model: over.model.or(self.model),
            utility: over.utility.or(self.utility),
            loss: over.loss.or(self.loss),
            target: over.target.or(self.target),
            space: over.space.or(self.space),
            seed: over.seed.or(self.seed),
            normalize: over.normalize.or(self.normalize),
            search: SearchSection {
                sparsity: over.search.sparsity.or(self.search.sparsity),
                angles: over.search.angles.or(self.search.angles),
                grid: over.search.grid.or(self.search.grid),
                max_iter: over.search.max_iter.or(self.search.max_iter),
                rel_tol: over.search.rel_tol.or(self.search.rel_tol),
                pair_scope: over.search.pair_scope.or(self.search.pair_scope),
                objective: over.search.objective.or(self.search.objective),
            },
            bounds: BoundsSection { density_quantile: over.bounds.density_quantile.or(self.bounds.density_quantile) },
            output: OutputSection {
                out: over.output.out.or(self.output.out),
                svg: over.output.svg.or(self.output.svg),
            },
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(&self) -> CliResult<AuditSettings> {
        let data = self.data.clone().ok_or_else(|| CliError::Config("no dataset given (--data)".into()))?;
        let model = self.model.clone().ok_or_else(|| CliError::Config("no model given (--model)".into()))?;
        let defaults = GcpConfig::default();
        let gcp = GcpConfig {
            sparsity_cap: self.search.sparsity.unwrap_or(defaults.sparsity_cap),
            angle_count: self.search.angles.unwrap_or(defaults.angle_count),
            grid_size: self.search.grid.unwrap_or(defaults.grid_size),
            max_iter: self.search.max_iter.unwrap_or(defaults.max_iter),
            rel_tol: self.search.rel_tol.unwrap_or(defaults.rel_tol),
            objective: self.search.objective.unwrap_or(defaults.objective),
            pair_scope: self.search.pair_scope.unwrap_or(defaults.pair_scope),
            parallel: true,
        };
        gcp.validate()?;
        let density_quantile = match &self.bounds.density_quantile {
            Some(d) => d.resolve()?,
            None => Some(DEFAULT_DENSITY_QUANTILE),
        };
        Ok(AuditSettings {
            data,
            model,
            utility: self.utility.clone().unwrap_or_else(|| "monotonic".into()),
            loss: self.loss.unwrap_or_default(),
            target: TargetSpec::parse(self.target.as_deref().unwrap_or("0"))?,
            space: SpaceSpec::parse(self.space.as_deref().unwrap_or("raw"))?,
            seed: self.seed.unwrap_or(0),
            normalize: self.normalize.unwrap_or(true),
            density_quantile,
            gcp,
            out: self.output.out.clone(),
            svg: self.output.svg.clone(),
        })
    }
}

fn rebase_path(base: &Path, p: &str) -> String {
    let path = Path::new(p);
    if path.is_absolute() || base.as_os_str().is_empty() {
        p.to_string()
    } else {
        base.join(path).to_string_lossy().into_owned()
    }
}

fn rebase_model_uri(base: &Path, uri: &str) -> String {
    if let Some(rest) = uri.strip_prefix("builtin:") {
        if let Some((name, file)) = rest.split_once(':') {
            return format!("builtin:{name}:{}", rebase_path(base, file));
        }
    }
    uri.to_string()
}

/// Which rows are audited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSpec {
    Row(usize),
    Sample(usize),
}

impl TargetSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        if let Some(n) = s.strip_prefix("sample:") {
            let n: usize = n.parse().map_err(|_| CliError::Config(format!("bad sample size in target {s:?}")))?;
            if n == 0 {
                return Err(CliError::Config("target sample size must be positive".into()));
            }
            return Ok(TargetSpec::Sample(n));
        }
        s.parse()
            .map(TargetSpec::Row)
            .map_err(|_| CliError::Config(format!("target must be a row index or sample:<s>, got {s:?}")))
    }
}

/// Coordinates the search runs over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceSpec {
    Raw,
    Latent(usize),
    Transforms(String),
}

impl SpaceSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        if s == "raw" {
            return Ok(SpaceSpec::Raw);
        }
        if let Some(n) = s.strip_prefix("latent:") {
            return n
                .parse()
                .map(SpaceSpec::Latent)
                .map_err(|_| CliError::Config(format!("bad latent dimension in space {s:?}")));
        }
        if let Some(file) = s.strip_prefix("transforms:") {
            return Ok(SpaceSpec::Transforms(file.to_string()));
        }
        Err(CliError::Config(format!("space must be raw, latent:<n> or transforms:<file>, got {s:?}")))
    }

    pub fn label(&self) -> String {
        match self {
            SpaceSpec::Raw => "raw".into(),
            SpaceSpec::Latent(n) => format!("latent:{n}"),
            SpaceSpec::Transforms(f) => format!("transforms:{f}"),
        }
    }
}

/// Fully resolved audit settings. The report echoes them without the output paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub data: String,
    pub model: String,
    pub utility: String,
    pub loss: Loss,
    pub target: TargetSpec,
    pub space: SpaceSpec,
    pub seed: u64,
    pub normalize: bool,
    pub density_quantile: Option<f64>,
    pub gcp: GcpConfig,
    pub out: Option<String>,
    pub svg: Option<String>,
}

/// Transform pipeline file: a list of `[[transform]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformFile {
    pub transform: Vec<adp_core::spaces::BuiltinTransform>,
}

impl TransformFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}
