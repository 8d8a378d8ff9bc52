//! Greedy Coordinate Pairs search over sparse directions.
//!
//! Starting from the best axis, each iteration tries Givens rotations of the
//! current direction in coordinate pairs touching its support, over the
//! angles `{pi/M, 2 pi/M, ..., pi}`, and keeps the best candidate that
//! respects the sparsity cap.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{CurveFamily, DEFAULT_GRID_SIZE};
use crate::direction::Direction;
use crate::error::{AdpError, Result};
use crate::models::{ConcurrencyClass, ModelHandle};
use crate::types::Instance;
use crate::utilities::{PlotEvaluation, PreparedUtility, UtilitySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    Maximize,
    Minimize,
}

impl Objective {
    /// Utility mapped so that larger is always better.
    pub fn score(self, utility: f64) -> f64 {
        match self {
            Objective::Maximize => utility,
            Objective::Minimize => -utility,
        }
    }
}

/// Ordered pairs `(i, j)` searched by each iteration.
///
/// A rotation with `theta` in `[0, pi]` moves weight from `i` into an empty
/// coordinate `j` with the sign of `v_i` only, so `Anchored` cannot reach half
/// of the sign patterns; `Touching` adds the mirrored pairs `(j, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairScope {
    /// `i` in the support, `j` anywhere.
    Anchored,
    /// At least one of `i`, `j` in the support.
    #[default]
    Touching,
    /// Every ordered pair.
    All,
}

impl PairScope {
    pub fn pairs(self, support: &[usize], dim: usize) -> Vec<(usize, usize)> {
        let in_support = |x: usize| support.binary_search(&x).is_ok();
        let mut out = Vec::new();
        for i in 0..dim {
            for j in (0..dim).filter(|&j| j != i) {
                let keep = match self {
                    PairScope::Anchored => in_support(i),
                    PairScope::Touching => in_support(i) || in_support(j),
                    PairScope::All => true,
                };
                if keep {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GcpConfig {
    pub sparsity_cap: usize,
    pub angle_count: usize,
    pub grid_size: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub objective: Objective,
    /// Which coordinate pairs are rotated each iteration.
    pub pair_scope: PairScope,
    /// Evaluate candidates on the rayon pool when the models allow it.
    pub parallel: bool,
}

impl Default for GcpConfig {
    fn default() -> Self {
        GcpConfig {
            sparsity_cap: 3,
            angle_count: 20,
            grid_size: DEFAULT_GRID_SIZE,
            max_iter: 10,
            rel_tol: 1e-6,
            objective: Objective::Maximize,
            pair_scope: PairScope::default(),
            parallel: true,
        }
    }
}

impl GcpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sparsity_cap < 1 {
            return Err(AdpError::InvalidArgument("sparsity cap must be at least 1".into()));
        }
        if self.angle_count < 2 {
            return Err(AdpError::InvalidArgument("angle count must be at least 2".into()));
        }
        if self.max_iter < 1 {
            return Err(AdpError::InvalidArgument("iteration cap must be at least 1".into()));
        }
        if self.grid_size < 3 {
            return Err(AdpError::InvalidArgument("grid size must be at least 3".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(AdpError::InvalidArgument("relative tolerance must be non-negative".into()));
        }
        Ok(())
    }

    /// The angle set `{0, pi/M, ..., pi}`.
    pub fn angles(&self) -> Vec<f64> {
        (0..=self.angle_count).map(|q| PI * q as f64 / self.angle_count as f64).collect()
    }
}

/// One accepted step of the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcpStep {
    pub iteration: usize,
    /// Rotated pair, `None` for the initial axis and for iterations that kept the incumbent.
    pub pair: Option<(usize, usize)>,
    pub theta: f64,
    pub utility: f64,
    pub support: Vec<usize>,
    pub direction: Direction,
    /// Model evaluations since the search started.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GcpTrace {
    pub steps: Vec<GcpStep>,
}

impl GcpTrace {
    pub fn utilities(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.utility).collect()
    }

    pub fn total_evaluations(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.evaluations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcpResult {
    pub direction: Direction,
    pub evaluation: PlotEvaluation,
    pub trace: GcpTrace,
}

impl GcpResult {
    pub fn utility(&self) -> f64 {
        self.evaluation.utility
    }
}

fn use_parallel(m: &ModelHandle, utility: &PreparedUtility, cfg: &GcpConfig) -> bool {
    cfg.parallel
        && m.concurrency() == ConcurrencyClass::Pure
        && utility.contrast_model().is_none_or(|g| g.concurrency() == ConcurrencyClass::Pure)
}

/// Evaluates each direction, turning interval failures into `None`.
fn evaluate_all(
    family: &dyn CurveFamily,
    m: &ModelHandle,
    utility: &PreparedUtility,
    dirs: &[Direction],
    cfg: &GcpConfig,
) -> Result<Vec<Option<PlotEvaluation>>> {
    let one = |v: &Direction| match utility.evaluate(family, m, v, cfg.grid_size) {
        Ok(e) => Ok(Some(e)),
        Err(e) if e.is_interval_error() => Ok(None),
        Err(e) => Err(e),
    };
    if use_parallel(m, utility, cfg) {
        dirs.par_iter().map(one).collect()
    } else {
        dirs.iter().map(one).collect()
    }
}

/// The axis with the best utility; ties go to the lowest index.
pub fn best_axis_direction(
    family: &dyn CurveFamily,
    m: &ModelHandle,
    utility: &PreparedUtility,
    cfg: &GcpConfig,
) -> Result<(Direction, PlotEvaluation)> {
    cfg.validate()?;
    let d = family.dim();
    if d == 0 {
        return Err(AdpError::InvalidArgument("no coordinates to search".into()));
    }
    let axes = (0..d).map(|i| Direction::axis(i, d)).collect::<Result<Vec<_>>>()?;
    let evals = evaluate_all(family, m, utility, &axes, cfg)?;
    let mut best: Option<(usize, PlotEvaluation)> = None;
    for (i, e) in evals.into_iter().enumerate() {
        let Some(e) = e else { continue };
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| cfg.objective.score(e.utility) > cfg.objective.score(b.utility));
        if better {
            best = Some((i, e));
        }
    }
    match best {
        Some((i, e)) => Ok((axes[i].clone(), e)),
        None => {
            for v in &axes {
                if let Err(e) = family.interval(v) {
                    if matches!(e, AdpError::TargetOutsideDensity { .. } | AdpError::EmptyInterval) {
                        return Err(e);
                    }
                }
            }
            Err(AdpError::AllAxesDegenerate)
        }
    }
}

/// Runs the greedy pair search from the best axis.
pub fn gcp_optimize(
    family: &dyn CurveFamily,
    m: &ModelHandle,
    utility: &PreparedUtility,
    cfg: &GcpConfig,
) -> Result<GcpResult> {
    cfg.validate()?;
    let start = m.eval_count();
    let d = family.dim();
    let angles = cfg.angles();
    let (mut v, mut eval) = best_axis_direction(family, m, utility, cfg)?;
    let mut trace = GcpTrace::default();
    trace.steps.push(GcpStep {
        iteration: 0,
        pair: None,
        theta: 0.0,
        utility: eval.utility,
        support: v.support(),
        direction: v.clone(),
        evaluations: m.eval_count() - start,
    });

    for iteration in 1..=cfg.max_iter {
        let mut moves = Vec::new();
        let mut candidates = Vec::new();
        for (i, j) in cfg.pair_scope.pairs(&v.support(), d) {
            for &theta in &angles[1..] {
                let rotated = v.givens_rotate(i, j, theta)?;
                if rotated.support_size() <= cfg.sparsity_cap && rotated != v {
                    moves.push((i, j, theta));
                    candidates.push(rotated);
                }
            }
        }
        let evals = evaluate_all(family, m, utility, &candidates, cfg)?;
        let current = cfg.objective.score(eval.utility);
        let mut best: Option<(usize, f64)> = None;
        for (idx, e) in evals.iter().enumerate() {
            if let Some(e) = e {
                let s = cfg.objective.score(e.utility);
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((idx, s));
                }
            }
        }
        let improved = best.filter(|&(_, s)| s > current);
        let Some((idx, s)) = improved else {
            trace.steps.push(GcpStep {
                iteration,
                pair: None,
                theta: 0.0,
                utility: eval.utility,
                support: v.support(),
                direction: v.clone(),
                evaluations: m.eval_count() - start,
            });
            break;
        };
        let (i, j, theta) = moves[idx];
        v = candidates.swap_remove(idx);
        eval = evals.into_iter().nth(idx).flatten().expect("evaluated candidate");
        trace.steps.push(GcpStep {
            iteration,
            pair: Some((i, j)),
            theta,
            utility: eval.utility,
            support: v.support(),
            direction: v.clone(),
            evaluations: m.eval_count() - start,
        });
        if s - current < cfg.rel_tol * current.abs().max(1e-12) {
            break;
        }
    }
    Ok(GcpResult { direction: v, evaluation: eval, trace })
}

/// Result of searching over several target instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSetResult {
    pub index: usize,
    pub instance: Instance,
    pub result: GcpResult,
    /// Final utility per candidate, `None` where the search failed.
    pub per_candidate: Vec<Option<f64>>,
}

/// Runs the search for every candidate target and keeps the best.
pub fn optimize_over_instances<F>(
    family_for: F,
    m: &ModelHandle,
    spec: &UtilitySpec,
    candidates: &[Instance],
    cfg: &GcpConfig,
) -> Result<InstanceSetResult>
where
    F: Fn(&Instance) -> Result<Box<dyn CurveFamily>>,
{
    if candidates.is_empty() {
        return Err(AdpError::InvalidArgument("candidate list is empty".into()));
    }
    let mut best: Option<(usize, GcpResult)> = None;
    let mut first_error = None;
    let mut per_candidate = Vec::with_capacity(candidates.len());
    for (idx, x0) in candidates.iter().enumerate() {
        let run = || -> Result<GcpResult> {
            let family = family_for(x0)?;
            let utility = spec.prepare(m, Some(x0))?;
            gcp_optimize(family.as_ref(), m, &utility, cfg)
        };
        match run() {
            Ok(r) => {
                per_candidate.push(Some(r.utility()));
                let better = best.as_ref().is_none_or(|(_, b)| {
                    cfg.objective.score(r.utility()) > cfg.objective.score(b.utility())
                });
                if better {
                    best = Some((idx, r));
                }
            }
            Err(e) => {
                log::warn!("candidate {idx} failed: {e}");
                per_candidate.push(None);
                first_error.get_or_insert(e);
            }
        }
    }
    match best {
        Some((index, result)) => {
            Ok(InstanceSetResult { index, instance: candidates[index].clone(), result, per_candidate })
        }
        None => Err(first_error.expect("at least one candidate")),
    }
}

const MAX_REDRAWS: usize = 10_000;

/// Draws a random direction with at most `max_nonzeros` nonzeros.
pub fn random_sparse_direction(rng: &mut ChaCha8Rng, dim: usize, max_nonzeros: usize) -> Result<Direction> {
    let cap = max_nonzeros.min(dim);
    loop {
        let size = rng.gen_range(1..=cap);
        let support = sample(rng, dim, size).into_vec();
        let weights: Vec<f64> = (0..size).map(|_| rng.sample(StandardNormal)).collect();
        match Direction::new(support.into_iter().zip(weights), dim) {
            Ok(v) => return Ok(v),
            Err(AdpError::ZeroVector) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Utilities of `n_samples` random sparse directions.
pub fn random_direction_baseline(
    family: &dyn CurveFamily,
    m: &ModelHandle,
    utility: &PreparedUtility,
    n_samples: usize,
    max_nonzeros: usize,
    cfg: &GcpConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples < 1 {
        return Err(AdpError::InvalidArgument("need at least one sample".into()));
    }
    if max_nonzeros < 1 {
        return Err(AdpError::InvalidArgument("max nonzeros must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = Vec::with_capacity(n_samples);
    let mut redraws = 0;
    while dirs.len() < n_samples {
        let v = random_sparse_direction(&mut rng, family.dim(), max_nonzeros)?;
        match family.interval(&v) {
            Ok(_) => dirs.push(v),
            Err(e) if e.is_interval_error() && redraws < MAX_REDRAWS => redraws += 1,
            Err(e) => return Err(e),
        }
    }
    let one = |v: &Direction| utility.evaluate(family, m, v, cfg.grid_size).map(|e| e.utility);
    if use_parallel(m, utility, cfg) {
        dirs.par_iter().map(one).collect()
    } else {
        dirs.iter().map(one).collect()
    }
}
