//! End-to-end audit: data, model, utility and space in; report out.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use adp_core::bounds::{BoxBound, GaussianDensity, PlotBounds, DEFAULT_RIDGE_SCALE};
use adp_core::optimizer::{gcp_optimize, optimize_over_instances, GcpResult};
use adp_core::spaces::{fit_affine_map, GenerativeMap, TransformPipeline};
use adp_core::{AdpError, CurveFamily, Dataset, InstancePlot, Instance, LatentPlot, TransformPlot, VERSION};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{AuditSettings, SpaceSpec, TargetSpec, TransformFile};
use crate::dataset::load_csv;
use crate::error::{CliError, CliResult};
use crate::report::{AuditReport, CandidateScore};
use crate::uri::{parse_model, parse_utility};

/// Search space resolved against a dataset.
enum Space {
    Raw(PlotBounds),
    Latent(Arc<dyn GenerativeMap>),
    Transforms(TransformPipeline),
}

impl Space {
    fn build(spec: &SpaceSpec, data: &Dataset, density_quantile: Option<f64>) -> CliResult<(Space, Vec<String>)> {
        match spec {
            SpaceSpec::Raw => {
                let mut bounds = PlotBounds::boxed(BoxBound::from_dataset(data));
                if let Some(q) = density_quantile {
                    bounds = bounds.with_density(GaussianDensity::fit(data, q, DEFAULT_RIDGE_SCALE)?);
                }
                Ok((Space::Raw(bounds), data.feature_names().to_vec()))
            }
            SpaceSpec::Latent(n) => {
                let map = fit_affine_map(data, *n)?;
                Ok((Space::Latent(Arc::new(map)), (0..*n).map(|j| format!("z{j}")).collect()))
            }
            SpaceSpec::Transforms(file) => {
                let spec = TransformFile::load(Path::new(file))?;
                let pipeline = TransformPipeline::from_builtins(spec.transform);
                let names = unique_names(pipeline.names());
                Ok((Space::Transforms(pipeline), names))
            }
        }
    }

    fn family(&self, x0: &Instance) -> adp_core::Result<Box<dyn CurveFamily>> {
        Ok(match self {
            Space::Raw(bounds) => Box::new(InstancePlot::new(x0.clone(), bounds.clone())?),
            Space::Latent(map) => Box::new(LatentPlot::new(map.clone(), x0.clone())?),
            Space::Transforms(p) => Box::new(TransformPlot::new(p.clone(), x0.clone())?),
        })
    }
}

/// Appends `#<n>` to names that occur more than once.
fn unique_names(names: Vec<String>) -> Vec<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for n in &names {
        *counts.entry(n.as_str()).or_default() += 1;
    }
    let mut seen: HashMap<String, usize> = HashMap::new();
    names
        .iter()
        .map(|n| {
            if counts[n.as_str()] > 1 {
                let i = seen.entry(n.clone()).or_default();
                *i += 1;
                format!("{n}#{i}")
            } else {
                n.clone()
            }
        })
        .collect()
}

/// Rows searched: one explicit index, or a seeded sample in increasing order.
pub fn resolve_targets(target: TargetSpec, n: usize, seed: u64) -> CliResult<Vec<usize>> {
    match target {
        TargetSpec::Row(i) if i < n => Ok(vec![i]),
        TargetSpec::Row(i) => Err(AdpError::IndexOutOfRange { index: i, dim: n }.into()),
        TargetSpec::Sample(s) if s <= n => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = rand::seq::index::sample(&mut rng, n, s).into_vec();
            rows.sort_unstable();
            Ok(rows)
        }
        TargetSpec::Sample(s) => {
            Err(CliError::Config(format!("cannot sample {s} targets from {n} rows")))
        }
    }
}

/// Runs the configured audit and assembles the report.
pub fn run_audit(settings: &AuditSettings) -> CliResult<AuditReport> {
    let data = load_csv(Path::new(&settings.data))?;
    let model = parse_model(&settings.model, data.d())?;
    let spec = parse_utility(&settings.utility, settings.loss, data.feature_names())?
        .with_normalize(settings.normalize);
    let (space, coordinate_names) = Space::build(&settings.space, &data, settings.density_quantile)?;
    let rows = resolve_targets(settings.target, data.n(), settings.seed)?;
    let candidates: Vec<Instance> = rows.iter().map(|&i| data.rows()[i].clone()).collect();

    let (row, result, scores): (usize, GcpResult, Option<Vec<CandidateScore>>) = if candidates.len() == 1 {
        let family = space.family(&candidates[0])?;
        let utility = spec.prepare(&model, family.target())?;
        (rows[0], gcp_optimize(family.as_ref(), &model, &utility, &settings.gcp)?, None)
    } else {
        let best =
            optimize_over_instances(|x0| space.family(x0), &model, &spec, &candidates, &settings.gcp)?;
        let scores = rows
            .iter()
            .zip(&best.per_candidate)
            .map(|(&row, &utility)| CandidateScore { row, utility })
            .collect();
        (rows[best.index], best.result, Some(scores))
    };

    let x0 = &data.rows()[row];
    let family = space.family(x0)?;
    let prediction = model.evaluate(x0)?;
    let curve = &result.evaluation.curve;
    let tick_labels = curve
        .ts()
        .iter()
        .map(|&t| {
            family
                .coordinate_values(&result.direction, t)
                .into_iter()
                .map(|(j, value)| (coordinate_names[j].clone(), value))
                .collect()
        })
        .collect();
    let direction: BTreeMap<String, f64> =
        result.direction.iter().map(|(j, w)| (coordinate_names[j].clone(), w)).collect();
    let reconstruction_residual = match &space {
        Space::Latent(map) => Some(map.reconstruction_residual(x0)?),
        _ => None,
    };

    let report = AuditReport {
        engine_version: VERSION.to_string(),
        model: model.describe(),
        space: settings.space.label(),
        target_index: row,
        target: x0.values().to_vec(),
        prediction,
        direction,
        interval: curve.interval(),
        ts: curve.ts().to_vec(),
        fs: curve.fs().to_vec(),
        fit_values: result.evaluation.reference.clone(),
        utility: result.utility(),
        utility_spec: spec.label(),
        feature_names: data.feature_names().to_vec(),
        coordinate_names,
        tick_labels,
        eval_count: model.eval_count(),
        reconstruction_residual,
        candidates: scores,
        trace: result.trace,
        config: AuditSettings { out: None, svg: None, ..settings.clone() },
    };
    report.validate()?;
    Ok(report)
}
