//! Contracts of the greedy pair search.

use std::sync::Arc;

use adp_core::bounds::{BoxBound, GaussianDensity, PlotBounds};
use adp_core::curves::{CurveFamily, InstancePlot, LatentPlot, TransformPlot};
use adp_core::fits::FitKind;
use adp_core::models::{
    make_random_nonmonotone_model, recovery_plot, FnModel, LinearModel, QuadraticModel, SyntheticSinModel,
};
use adp_core::optimizer::{best_axis_direction, gcp_optimize, optimize_over_instances, GcpConfig, Objective, PairScope};
use adp_core::spaces::{fit_affine_map, BuiltinTransform, TransformPipeline};
use adp_core::{
    AdpError, ConcurrencyClass, ContrastKind, Dataset, Direction, Instance, Loss, Model, ModelHandle, Result,
    UtilitySpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn boxed(x0: Instance, hw: f64) -> InstancePlot {
    let d = x0.dim();
    InstancePlot::new(x0, PlotBounds::boxed(BoxBound::symmetric(d, hw))).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng, d: usize) -> ModelHandle {
    match rng.gen_range(0..3) {
        0 => ModelHandle::new(make_random_nonmonotone_model(rng.gen(), d, rng.gen_range(1..=d.min(3))).unwrap()),
        1 => ModelHandle::new(SyntheticSinModel::random(rng.gen(), d, 1.0).unwrap()),
        _ => {
            let lin = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut q = vec![vec![0.0; d]; d];
            for i in 0..d {
                for j in i..d {
                    let v = rng.gen_range(-1.0..1.0);
                    q[i][j] = v;
                    q[j][i] = v;
                }
            }
            ModelHandle::new(QuadraticModel::new(0.0, lin, q).unwrap())
        }
    }
}

fn random_spec(rng: &mut ChaCha8Rng) -> UtilitySpec {
    match rng.gen_range(0..7) {
        0 => UtilitySpec::variance(),
        1 => UtilitySpec::monotonicity(),
        2 => UtilitySpec::linearity().with_loss(Loss::Absolute),
        3 => UtilitySpec::property(FitKind::Lipschitz(rng.gen_range(0.5..3.0)), Loss::Squared),
        4 => UtilitySpec::taylor(),
        5 => UtilitySpec::contrast(ContrastKind::TargetPrediction, Loss::Absolute),
        _ => UtilitySpec::monotonicity().with_loss(Loss::Absolute),
    }
}

#[test]
fn traces_never_lose_utility() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..50 {
        let d = rng.gen_range(2..8);
        let m = random_model(&mut rng, d);
        let spec = random_spec(&mut rng);
        let x0 = Instance::new((0..d).map(|_| rng.gen_range(-0.5..0.5)).collect());
        let fam = boxed(x0.clone(), 1.5);
        let cfg = GcpConfig {
            sparsity_cap: rng.gen_range(1..=4),
            angle_count: rng.gen_range(2..12),
            grid_size: rng.gen_range(5..40),
            max_iter: rng.gen_range(1..6),
            ..GcpConfig::default()
        };
        let u = spec.prepare(&m, Some(&x0)).unwrap();
        let start = m.eval_count();
        let r = gcp_optimize(&fam, &m, &u, &cfg).unwrap();
        let us = r.trace.utilities();
        for (i, w) in us.windows(2).enumerate() {
            assert!(w[1] >= w[0], "{}: {us:?}", spec.label());
            if i + 2 < us.len() {
                assert!(w[1] - w[0] > cfg.rel_tol * w[0].abs().max(1e-12), "{us:?}");
            }
        }
        assert!(r.direction.support_size() <= cfg.sparsity_cap);
        assert_eq!(r.trace.total_evaluations(), m.eval_count() - start);
        assert_eq!(r.utility(), *us.last().unwrap());
    }
}

#[test]
fn single_coordinate_cap_returns_best_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..10 {
        let d = 6;
        let m = random_model(&mut rng, d);
        let spec = UtilitySpec::monotonicity();
        let fam = boxed(Instance::zeros(d), 1.0);
        let cfg = GcpConfig { sparsity_cap: 1, ..GcpConfig::default() };
        let u = spec.prepare(&m, None).unwrap();
        let (axis, _) = best_axis_direction(&fam, &m, &u, &cfg).unwrap();
        let r = gcp_optimize(&fam, &m, &u, &cfg).unwrap();
        assert_eq!(r.direction.support(), axis.support());
    }
}

#[test]
fn search_never_ends_below_best_axis() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..10 {
        let m = random_model(&mut rng, 5);
        let fam = boxed(Instance::zeros(5), 1.0);
        let u = UtilitySpec::variance().prepare(&m, None).unwrap();
        let cfg = GcpConfig::default();
        let (_, axis) = best_axis_direction(&fam, &m, &u, &cfg).unwrap();
        assert!(gcp_optimize(&fam, &m, &u, &cfg).unwrap().utility() >= axis.utility);
    }
}

#[test]
fn anchored_scope_respects_iteration_budget() {
    let m = ModelHandle::new(make_random_nonmonotone_model(4, 8, 3).unwrap());
    let fam = recovery_plot(8);
    let u = UtilitySpec::monotonicity().prepare(&m, None).unwrap();
    let cfg = GcpConfig { pair_scope: PairScope::Anchored, ..GcpConfig::default() };
    let r = gcp_optimize(&fam, &m, &u, &cfg).unwrap();
    let k = 51u64;
    let d = 8u64;
    assert_eq!(r.trace.steps[0].evaluations, d * k);
    for w in r.trace.steps.windows(2) {
        let s = w[0].support.len() as u64;
        assert!(w[1].evaluations - w[0].evaluations <= s * d * (cfg.angle_count as u64 + 1) * k);
    }
}

#[test]
fn scopes_nest() {
    let v = Direction::new([(1, 0.6), (3, 0.8)], 5).unwrap();
    let anchored = PairScope::Anchored.pairs(&v.support(), 5);
    let touching = PairScope::Touching.pairs(&v.support(), 5);
    let all = PairScope::All.pairs(&v.support(), 5);
    assert_eq!(anchored.len(), 2 * 4);
    assert_eq!(touching.len(), 2 * 4 + 3 * 2);
    assert_eq!(all.len(), 20);
    assert!(anchored.iter().all(|p| touching.contains(p)));
}

#[test]
fn planted_axes_are_recovered() {
    for seed in 0..20 {
        let model = make_random_nonmonotone_model(seed, 10, 1).unwrap();
        let planted = model.planted_direction();
        let m = ModelHandle::new(model);
        let u = UtilitySpec::monotonicity().prepare(&m, None).unwrap();
        let r = gcp_optimize(&recovery_plot(10), &m, &u, &GcpConfig::default()).unwrap();
        assert_eq!(r.direction.support(), planted.support());
    }
}

#[test]
fn flat_model_stops_after_first_iteration() {
    let m = ModelHandle::new(LinearModel::new(1.0, vec![0.5, 0.5, -1.0]));
    let u = UtilitySpec::monotonicity().prepare(&m, None).unwrap();
    let r = gcp_optimize(&boxed(Instance::zeros(3), 1.0), &m, &u, &GcpConfig::default()).unwrap();
    assert_eq!(r.trace.utilities(), vec![0.0, 0.0]);
    assert_eq!(r.direction, Direction::axis(0, 3).unwrap());
}

#[test]
fn minimization_walks_downhill() {
    let m = ModelHandle::new(SyntheticSinModel::new(vec![0.5, 0.2, -0.3]));
    let u = UtilitySpec::variance().prepare(&m, None).unwrap();
    let cfg = GcpConfig { objective: Objective::Minimize, ..GcpConfig::default() };
    let r = gcp_optimize(&boxed(Instance::zeros(5), 1.0), &m, &u, &cfg).unwrap();
    let us = r.trace.utilities();
    assert!(us.windows(2).all(|w| w[1] <= w[0]));
}

struct Queued(ModelHandle);

impl Model for Queued {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        self.0.evaluate_batch(points)
    }
    fn concurrency(&self) -> ConcurrencyClass {
        ConcurrencyClass::Serialized
    }
}

#[test]
fn serialized_models_give_identical_results() {
    let base = ModelHandle::new(SyntheticSinModel::new(vec![0.3, -0.2, 0.1]));
    let queued = ModelHandle::new(Queued(base.clone()));
    let fam = boxed(Instance::zeros(5), 1.0);
    let cfg = GcpConfig::default();
    let a = gcp_optimize(&fam, &base, &UtilitySpec::monotonicity().prepare(&base, None).unwrap(), &cfg).unwrap();
    let b = gcp_optimize(&fam, &queued, &UtilitySpec::monotonicity().prepare(&queued, None).unwrap(), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn degenerate_boxes_are_reported() {
    let m = ModelHandle::new(LinearModel::new(0.0, vec![1.0, 1.0]));
    let bounds = PlotBounds::boxed(BoxBound::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap());
    let fam = InstancePlot::new(Instance::zeros(2), bounds).unwrap();
    let u = UtilitySpec::variance().prepare(&m, None).unwrap();
    let err = gcp_optimize(&fam, &m, &u, &GcpConfig::default()).unwrap_err();
    assert_eq!(err, AdpError::AllAxesDegenerate);

    let bounds = PlotBounds::boxed(BoxBound::symmetric(2, 5.0)).with_density(GaussianDensity::ball(vec![0.0, 0.0], 1.0));
    let fam = InstancePlot::new(Instance::new(vec![3.0, 0.0]), bounds).unwrap();
    let err = gcp_optimize(&fam, &m, &u, &GcpConfig::default()).unwrap_err();
    assert!(matches!(err, AdpError::TargetOutsideDensity { .. }));
}

fn family_at(x0: &Instance) -> Result<Box<dyn CurveFamily>> {
    let d = x0.dim();
    Ok(Box::new(InstancePlot::new(x0.clone(), PlotBounds::boxed(BoxBound::symmetric(d, 2.0)))?))
}

#[test]
fn instance_search_with_one_candidate_is_plain_search() {
    let m = ModelHandle::new(SyntheticSinModel::new(vec![0.4]));
    let x0 = Instance::new(vec![0.2, -0.3, 0.1]);
    let cfg = GcpConfig::default();
    let spec = UtilitySpec::taylor();
    let r = optimize_over_instances(family_at, &m, &spec, std::slice::from_ref(&x0), &cfg).unwrap();
    let fam = family_at(&x0).unwrap();
    let direct = gcp_optimize(fam.as_ref(), &m, &spec.prepare(&m, Some(&x0)).unwrap(), &cfg).unwrap();
    assert_eq!(r.index, 0);
    assert_eq!(r.result.direction, direct.direction);
    assert_eq!(r.result.utility(), direct.utility());
}

#[test]
fn instance_search_finds_the_only_non_monotone_region() {
    let m = ModelHandle::new(FnModel::new(2, |x| {
        if x[0] > 5.0 {
            ((x[0] - 6.0) * 4.0).sin() + x[1]
        } else {
            x[0] + x[1]
        }
    }));
    let candidates: Vec<Instance> =
        [-4.0, -2.0, 0.0, 6.0, 2.5].iter().map(|&a| Instance::new(vec![a, 0.0])).collect();
    let spec = UtilitySpec::monotonicity();
    let family = |x0: &Instance| -> Result<Box<dyn CurveFamily>> {
        let bounds = PlotBounds::boxed(BoxBound::new(vec![x0[0] - 1.0, -1.0], vec![x0[0] + 1.0, 1.0])?);
        Ok(Box::new(InstancePlot::new(x0.clone(), bounds)?))
    };
    let r = optimize_over_instances(family, &m, &spec, &candidates, &GcpConfig::default()).unwrap();
    assert_eq!(r.index, 3);
    let scan: Vec<f64> = r.per_candidate.iter().map(|u| u.unwrap()).collect();
    assert!(scan.iter().enumerate().all(|(i, &u)| i == 3 || u < 1e-12));
}

#[test]
fn instance_search_reports_first_error_when_all_fail() {
    let m = ModelHandle::new(LinearModel::new(0.0, vec![1.0, 1.0]));
    let family = |x0: &Instance| -> Result<Box<dyn CurveFamily>> {
        let bounds = PlotBounds::boxed(BoxBound::symmetric(2, 1.0)).with_density(GaussianDensity::ball(vec![0.0; 2], 0.1));
        Ok(Box::new(InstancePlot::new(x0.clone(), bounds)?))
    };
    let far = [Instance::new(vec![0.9, 0.0]), Instance::new(vec![0.0, 0.9])];
    let err = optimize_over_instances(family, &m, &UtilitySpec::variance(), &far, &GcpConfig::default()).unwrap_err();
    assert!(matches!(err, AdpError::TargetOutsideDensity { .. }));
    assert!(optimize_over_instances(family, &m, &UtilitySpec::variance(), &[], &GcpConfig::default()).is_err());
}

#[test]
fn latent_search_runs_in_code_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let rows: Vec<Vec<f64>> = (0..80)
        .map(|_| {
            let z: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            vec![z[0], z[1], z[0] + z[1], z[2], 0.5 * z[2] + 0.01 * rng.gen_range(-1.0..1.0)]
        })
        .collect();
    let data = Dataset::from_rows(rows).unwrap();
    let map = Arc::new(fit_affine_map(&data, 3).unwrap());
    let m = ModelHandle::new(SyntheticSinModel::new(vec![0.1, 0.0, 0.2]));
    let x0 = data.row(0).unwrap().clone();
    let fam = LatentPlot::new(map, x0.clone()).unwrap();
    let u = UtilitySpec::monotonicity().prepare(&m, Some(&x0)).unwrap();
    let r = gcp_optimize(&fam, &m, &u, &GcpConfig::default()).unwrap();
    assert_eq!(r.direction.dim(), 3);
    assert_eq!(r.evaluation.curve.interval(), adp_core::spaces::LATENT_WINDOW);
    assert!(r.utility() > 0.0);
}

#[test]
fn transform_search_stays_in_parameter_cube() {
    let pipeline = TransformPipeline::from_builtins(vec![
        BuiltinTransform::Gain { strength: 1.0 },
        BuiltinTransform::Offset { amount: -2.0 },
        BuiltinTransform::MovingAverage { window: 3 },
    ]);
    let m = ModelHandle::new(SyntheticSinModel::new(vec![0.0, 0.0]));
    let x0 = Instance::new(vec![0.5, -0.2, 0.3, 0.1]);
    let fam = TransformPlot::new(pipeline, x0.clone()).unwrap();
    let u = UtilitySpec::variance().prepare(&m, Some(&x0)).unwrap();
    let r = gcp_optimize(&fam, &m, &u, &GcpConfig::default()).unwrap();
    assert_eq!(r.evaluation.curve.ts()[0], 0.0);
    assert_eq!(*r.evaluation.curve.ts().last().unwrap(), 1.0);
    assert_eq!(r.evaluation.curve.fs()[0], m.evaluate(&x0).unwrap());
    assert!(r.utility() > 0.0);
}
