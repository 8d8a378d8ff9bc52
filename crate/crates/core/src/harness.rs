//! Reproducible experiments measuring how well the search recovers known
//! interesting directions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{BoxBound, GaussianDensity, PlotBounds};
use crate::curves::{CurveFamily, InstancePlot};
use crate::direction::Direction;
use crate::error::{AdpError, Result};
use crate::models::{make_random_nonmonotone_model, recovery_plot, ModelHandle, SyntheticSinModel};
use crate::optimizer::{gcp_optimize, random_direction_baseline, GcpConfig, GcpResult};
use crate::types::Instance;
use crate::utilities::UtilitySpec;

/// Cosine threshold for counting a recovered direction as correct.
pub const RECOVERY_COSINE: f64 = 0.9;
/// Required alignment with the plane of the two active sin-model features.
pub const SIN_ALIGNMENT: f64 = 0.99;
pub const SIN_DIM: usize = 10;
pub const SIN_BETA_SCALE: f64 = 1.0;
pub const SIN_RADIUS: f64 = 1.0;
/// Seed for the sin-model coefficients used by the experiments.
pub const SIN_SEED: u64 = 7;
const SIN_HALF_WIDTH: f64 = 3.0;
const HISTOGRAM_BINS: usize = 30;

/// Deterministic 64-bit mixer used to derive per-trial seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn trial_seed(master: u64, support_size: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(master ^ ((support_size as u64) << 32)).wrapping_add(trial as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTrial {
    pub trial: usize,
    pub seed: u64,
    pub planted_support: Vec<usize>,
    pub found_support: Vec<usize>,
    pub cosine: f64,
    pub success: bool,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRecovery {
    pub support_size: usize,
    /// Trials with a generated model.
    pub trials: usize,
    pub successes: usize,
    pub generation_failures: usize,
    pub success_rate: f64,
    pub details: Vec<RecoveryTrial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub dim: usize,
    pub seed: u64,
    pub config: GcpConfig,
    pub results: Vec<SupportRecovery>,
}

impl RecoveryReport {
    pub fn rate(&self, support_size: usize) -> Option<f64> {
        self.results.iter().find(|r| r.support_size == support_size).map(|r| r.success_rate)
    }
}

fn recovery_trial(dim: usize, support_size: usize, trial: usize, seed: u64, cfg: &GcpConfig) -> Result<RecoveryTrial> {
    let model = make_random_nonmonotone_model(seed, dim, support_size)?;
    let planted = model.planted_direction();
    let handle = ModelHandle::new(model);
    let family = recovery_plot(dim);
    let utility = UtilitySpec::monotonicity().prepare(&handle, None)?;
    let r = gcp_optimize(&family, &handle, &utility, cfg)?;
    let found_support = r.direction.support();
    let cosine = r.direction.dot(&planted).abs();
    let success = found_support == planted.support() && cosine >= RECOVERY_COSINE;
    Ok(RecoveryTrial {
        trial,
        seed,
        planted_support: planted.support(),
        found_support,
        cosine,
        success,
        evaluations: r.trace.total_evaluations(),
    })
}

/// Plants random non-monotone directions and counts how often the search finds them.
pub fn run_synthetic_recovery(
    n_trials: usize,
    dim: usize,
    support_sizes: &[usize],
    cfg: &GcpConfig,
    seed: u64,
) -> Result<RecoveryReport> {
    if n_trials < 1 {
        return Err(AdpError::InvalidArgument("need at least one trial".into()));
    }
    cfg.validate()?;
    let mut results = Vec::with_capacity(support_sizes.len());
    for &size in support_sizes {
        let outcomes: Vec<Result<RecoveryTrial>> = (0..n_trials)
            .into_par_iter()
            .map(|trial| recovery_trial(dim, size, trial, trial_seed(seed, size, trial), cfg))
            .collect();
        let mut details = Vec::with_capacity(n_trials);
        let mut generation_failures = 0;
        for outcome in outcomes {
            match outcome {
                Ok(t) => details.push(t),
                Err(AdpError::GenerationFailure { .. }) => generation_failures += 1,
                Err(e) => return Err(e),
            }
        }
        if generation_failures > 0 {
            log::warn!("{generation_failures} models with support size {size} could not be generated");
        }
        let successes = details.iter().filter(|t| t.success).count();
        let trials = details.len();
        let success_rate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        results.push(SupportRecovery { support_size: size, trials, successes, generation_failures, success_rate, details });
    }
    Ok(RecoveryReport { dim, seed, config: cfg.clone(), results })
}

/// Plot family for the sin model: target at the origin, plotted inside the unit ball.
pub fn sin_recovery_plot(dim: usize) -> InstancePlot {
    let bounds = PlotBounds::boxed(BoxBound::symmetric(dim, SIN_HALF_WIDTH))
        .with_density(GaussianDensity::ball(vec![0.0; dim], SIN_RADIUS));
    InstancePlot::new(Instance::zeros(dim), bounds).expect("matching dimensions")
}

/// Norm of the projection of `v` onto the plane of features 0 and 1.
pub fn plane_alignment(v: &Direction) -> f64 {
    (v.weight(0).powi(2) + v.weight(1).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinRecoveryRun {
    pub utility_label: String,
    pub direction: Vec<f64>,
    pub support: Vec<usize>,
    pub alignment: f64,
    pub utility: f64,
    pub evaluations: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinRecoveryReport {
    pub seed: u64,
    pub beta: Vec<f64>,
    pub runs: Vec<SinRecoveryRun>,
}

/// Checks that both the Taylor-contrast and monotonicity searches stay in the
/// plane of the two sinusoidal features.
pub fn run_sin_recovery(cfg: &GcpConfig, seed: u64) -> Result<SinRecoveryReport> {
    cfg.validate()?;
    let model = SyntheticSinModel::random(seed, SIN_DIM, SIN_BETA_SCALE)?;
    let beta = model.beta.clone();
    let m = ModelHandle::new(model);
    let family = sin_recovery_plot(SIN_DIM);
    let mut runs = Vec::new();
    for spec in [UtilitySpec::taylor(), UtilitySpec::monotonicity()] {
        let utility = spec.prepare(&m, family.target())?;
        let r: GcpResult = gcp_optimize(&family, &m, &utility, cfg)?;
        let alignment = plane_alignment(&r.direction);
        let support = r.direction.support();
        let passed = alignment >= SIN_ALIGNMENT && support.iter().all(|&j| j < 2);
        if !passed {
            let trace = serde_json::to_string(&r.trace).unwrap_or_default();
            return Err(AdpError::AssertionFailure(format!(
                "{} left the sinusoidal plane: support {support:?}, alignment {alignment}; trace {trace}",
                spec.label()
            )));
        }
        runs.push(SinRecoveryRun {
            utility_label: spec.label(),
            direction: r.direction.to_dense(),
            support,
            alignment,
            utility: r.utility(),
            evaluations: r.trace.total_evaluations(),
            passed,
        });
    }
    Ok(SinRecoveryReport { seed, beta, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub seed: u64,
    pub n_samples: usize,
    pub max_nonzeros: usize,
    pub utility_label: String,
    /// Random-direction utilities in increasing order.
    pub random_utilities: Vec<f64>,
    pub optimized_utility: f64,
    pub optimized_direction: Vec<f64>,
    /// Number of random directions with a strictly larger utility.
    pub exceedance_rank: usize,
    pub bins: Vec<HistogramBin>,
}

impl HistogramReport {
    pub fn best_random(&self) -> f64 {
        self.random_utilities.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Equal-width bins on `[0, top]`; every value lands in exactly one bin.
pub fn histogram(values: &[f64], top: f64, n_bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(0.0f64, f64::min);
    let hi = if top > lo { top } else { lo + 1.0 };
    let width = (hi - lo) / n_bins as f64;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|b| HistogramBin {
            lo: lo + width * b as f64,
            hi: if b + 1 == n_bins { hi } else { lo + width * (b + 1) as f64 },
            count: 0,
        })
        .collect();
    for &v in values {
        let idx = (((v - lo) / width).floor().max(0.0) as usize).min(n_bins - 1);
        bins[idx].count += 1;
    }
    bins
}

/// Compares the optimized utility with utilities of random sparse directions.
pub fn run_utility_histogram(
    family: &dyn CurveFamily,
    m: &ModelHandle,
    spec: &UtilitySpec,
    n_samples: usize,
    max_nonzeros: usize,
    cfg: &GcpConfig,
    seed: u64,
) -> Result<HistogramReport> {
    let utility = spec.prepare(m, family.target())?;
    let mut random = random_direction_baseline(family, m, &utility, n_samples, max_nonzeros, cfg, seed)?;
    random.sort_by(f64::total_cmp);
    let r = gcp_optimize(family, m, &utility, cfg)?;
    let optimized = r.utility();
    let exceedance_rank = random.iter().filter(|&&u| u > optimized).count();
    let top = random.last().copied().unwrap_or(0.0).max(optimized);
    let bins = histogram(&random, top, HISTOGRAM_BINS);
    Ok(HistogramReport {
        seed,
        n_samples,
        max_nonzeros,
        utility_label: spec.label(),
        random_utilities: random,
        optimized_utility: optimized,
        optimized_direction: r.direction.to_dense(),
        exceedance_rank,
        bins,
    })
}
