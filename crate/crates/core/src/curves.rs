//! Sampling the univariate plot function for each plot family.
//!
//! | family    | plot function                        |
//! |-----------|--------------------------------------|
//! | instance  | `f(x0 + t v)`                        |
//! | pdp       | `mean_x f(x + t v)`                  |
//! | latent    | `f(G(z0 + t v))`, `z0 = G^-1(x0)`     |
//! | transform | `f(Lambda_x0(v t))`                  |

use std::sync::Arc;

use crate::bounds::PlotBounds;
use crate::direction::Direction;
use crate::error::{AdpError, Result};
use crate::models::ModelHandle;
use crate::spaces::{compose_transforms, GenerativeMap, TransformPipeline, LATENT_WINDOW};
use crate::types::{Instance, Interval, SampledCurve};

pub const DEFAULT_GRID_SIZE: usize = 50;

fn check_grid(k: usize) -> Result<()> {
    if k < SampledCurve::MIN_POINTS {
        return Err(AdpError::InvalidArgument(format!("grid size {k} is below 3")));
    }
    Ok(())
}

fn check_direction_dim(v: &Direction, expected: usize) -> Result<()> {
    if v.dim() != expected {
        return Err(AdpError::DimensionMismatch { expected, got: v.dim() });
    }
    Ok(())
}

/// Grid size actually used for `interval`: bumped to odd when the interval
/// straddles zero so that a symmetric grid contains `t = 0`.
pub fn effective_grid_size(k: usize, interval: Interval) -> usize {
    if interval.straddles_zero() && k.is_multiple_of(2) {
        k + 1
    } else {
        k
    }
}

/// `t -> f(x0 + t v)` on `k` grid points (exactly `k` evaluations).
pub fn instance_curve(
    m: &ModelHandle,
    x0: &Instance,
    v: &Direction,
    interval: Interval,
    k: usize,
) -> Result<SampledCurve> {
    check_grid(k)?;
    check_direction_dim(v, x0.dim())?;
    let points: Vec<Instance> = interval.grid(k).into_iter().map(|t| x0.shifted(t, v.iter())).collect();
    SampledCurve::new(interval, m.evaluate_batch(&points)?)
}

/// `t -> mean over data of f(x + t v)` (`n k` evaluations).
pub fn pdp_curve(
    m: &ModelHandle,
    data: &[Instance],
    v: &Direction,
    interval: Interval,
    k: usize,
) -> Result<SampledCurve> {
    check_grid(k)?;
    if data.is_empty() {
        return Err(AdpError::InvalidArgument("pdp subset is empty".into()));
    }
    let ts = interval.grid(k);
    let mut points = Vec::with_capacity(data.len() * k);
    for x in data {
        check_direction_dim(v, x.dim())?;
        points.extend(ts.iter().map(|&t| x.shifted(t, v.iter())));
    }
    let scores = m.evaluate_batch(&points)?;
    let mut fs = vec![0.0; k];
    for chunk in scores.chunks(k) {
        for (acc, s) in fs.iter_mut().zip(chunk) {
            *acc += s;
        }
    }
    let n = data.len() as f64;
    fs.iter_mut().for_each(|f| *f /= n);
    SampledCurve::new(interval, fs)
}

/// `t -> f(decode(encode(x0) + t v))`.
pub fn latent_curve(
    m: &ModelHandle,
    g: &dyn GenerativeMap,
    x0: &Instance,
    v: &Direction,
    interval: Interval,
    k: usize,
) -> Result<SampledCurve> {
    let z0 = g.encode(x0)?;
    latent_curve_from_code(m, g, &z0, v, interval, k)
}

fn latent_curve_from_code(
    m: &ModelHandle,
    g: &dyn GenerativeMap,
    z0: &[f64],
    v: &Direction,
    interval: Interval,
    k: usize,
) -> Result<SampledCurve> {
    check_grid(k)?;
    check_direction_dim(v, g.latent_dim())?;
    let codes: Vec<Vec<f64>> = interval
        .grid(k)
        .into_iter()
        .map(|t| {
            let mut z = z0.to_vec();
            for (j, w) in v.iter() {
                z[j] += t * w;
            }
            z
        })
        .collect();
    let points = g.decode(&codes)?;
    SampledCurve::new(interval, m.evaluate_batch(&points)?)
}

/// `t -> f(compose_transforms(p, x0, v, t))` on `[0, 1]`.
pub fn transform_curve(
    m: &ModelHandle,
    p: &TransformPipeline,
    x0: &Instance,
    v: &[f64],
    k: usize,
) -> Result<SampledCurve> {
    check_grid(k)?;
    let interval = Interval { a: 0.0, b: 1.0 };
    let points = interval
        .grid(k)
        .into_iter()
        .map(|t| compose_transforms(p, x0, v, t))
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(interval, m.evaluate_batch(&points)?)
}

/// A family of plots indexed by a direction, as searched by the optimizer.
pub trait CurveFamily: Send + Sync {
    /// Number of direction coordinates.
    fn dim(&self) -> usize;

    /// Plot interval for direction `v`.
    fn interval(&self, v: &Direction) -> Result<Interval>;

    /// Samples model `m` along `v` on `k` grid points of `interval`.
    fn sample(&self, m: &ModelHandle, v: &Direction, interval: Interval, k: usize) -> Result<SampledCurve>;

    /// Target instance the plots are anchored at, if any.
    fn target(&self) -> Option<&Instance>;

    /// Values of the changing coordinates at `t`, for axis labels.
    fn coordinate_values(&self, v: &Direction, t: f64) -> Vec<(usize, f64)>;

    fn grid_size(&self, k: usize, interval: Interval) -> usize {
        effective_grid_size(k, interval)
    }
}

/// Instance-specific directional plots in raw feature space.
#[derive(Debug, Clone)]
pub struct InstancePlot {
    x0: Instance,
    bounds: PlotBounds,
}

impl InstancePlot {
    pub fn new(x0: Instance, bounds: PlotBounds) -> Result<Self> {
        if x0.dim() != bounds.box_bound.dim() {
            return Err(AdpError::DimensionMismatch { expected: bounds.box_bound.dim(), got: x0.dim() });
        }
        Ok(InstancePlot { x0, bounds })
    }

    pub fn bounds(&self) -> &PlotBounds {
        &self.bounds
    }
}

impl CurveFamily for InstancePlot {
    fn dim(&self) -> usize {
        self.x0.dim()
    }

    fn interval(&self, v: &Direction) -> Result<Interval> {
        self.bounds.interval(&self.x0, v)
    }

    fn sample(&self, m: &ModelHandle, v: &Direction, interval: Interval, k: usize) -> Result<SampledCurve> {
        instance_curve(m, &self.x0, v, interval, k)
    }

    fn target(&self) -> Option<&Instance> {
        Some(&self.x0)
    }

    fn coordinate_values(&self, v: &Direction, t: f64) -> Vec<(usize, f64)> {
        v.iter().map(|(j, w)| (j, self.x0[j] + t * w)).collect()
    }
}

/// Global directional plots averaged over a set of instances.
///
/// The interval is the one of the subset's centroid: intersecting the
/// per-instance intervals collapses to a point whenever the subset contains
/// the extreme rows of the box.
#[derive(Debug, Clone)]
pub struct PdpPlot {
    data: Vec<Instance>,
    centroid: Instance,
    bounds: PlotBounds,
}

impl PdpPlot {
    pub fn new(data: Vec<Instance>, bounds: PlotBounds) -> Result<Self> {
        let first = data.first().ok_or_else(|| AdpError::InvalidArgument("pdp subset is empty".into()))?;
        let d = first.dim();
        let mut centroid = vec![0.0; d];
        for x in &data {
            if x.dim() != d {
                return Err(AdpError::DimensionMismatch { expected: d, got: x.dim() });
            }
            centroid.iter_mut().zip(x.iter()).for_each(|(c, v)| *c += v);
        }
        let n = data.len() as f64;
        centroid.iter_mut().for_each(|c| *c /= n);
        Ok(PdpPlot { data, centroid: Instance(centroid), bounds })
    }
}

impl CurveFamily for PdpPlot {
    fn dim(&self) -> usize {
        self.centroid.dim()
    }

    fn interval(&self, v: &Direction) -> Result<Interval> {
        self.bounds.interval(&self.centroid, v)
    }

    fn sample(&self, m: &ModelHandle, v: &Direction, interval: Interval, k: usize) -> Result<SampledCurve> {
        pdp_curve(m, &self.data, v, interval, k)
    }

    fn target(&self) -> Option<&Instance> {
        None
    }

    fn coordinate_values(&self, v: &Direction, t: f64) -> Vec<(usize, f64)> {
        v.iter().map(|(j, w)| (j, self.centroid[j] + t * w)).collect()
    }
}

/// Directions in the latent space of a generative map.
#[derive(Clone)]
pub struct LatentPlot {
    map: Arc<dyn GenerativeMap>,
    x0: Instance,
    z0: Vec<f64>,
    window: Interval,
}

impl LatentPlot {
    pub fn new(map: Arc<dyn GenerativeMap>, x0: Instance) -> Result<Self> {
        Self::with_window(map, x0, LATENT_WINDOW)
    }

    pub fn with_window(map: Arc<dyn GenerativeMap>, x0: Instance, window: Interval) -> Result<Self> {
        if x0.dim() != map.ambient_dim() {
            return Err(AdpError::DimensionMismatch { expected: map.ambient_dim(), got: x0.dim() });
        }
        let z0 = map.encode(&x0)?;
        Ok(LatentPlot { map, x0, z0, window })
    }

    pub fn code(&self) -> &[f64] {
        &self.z0
    }

    pub fn map(&self) -> &Arc<dyn GenerativeMap> {
        &self.map
    }
}

impl CurveFamily for LatentPlot {
    fn dim(&self) -> usize {
        self.map.latent_dim()
    }

    fn interval(&self, _v: &Direction) -> Result<Interval> {
        Ok(self.window)
    }

    fn sample(&self, m: &ModelHandle, v: &Direction, interval: Interval, k: usize) -> Result<SampledCurve> {
        latent_curve_from_code(m, self.map.as_ref(), &self.z0, v, interval, k)
    }

    fn target(&self) -> Option<&Instance> {
        Some(&self.x0)
    }

    fn coordinate_values(&self, v: &Direction, t: f64) -> Vec<(usize, f64)> {
        v.iter().map(|(j, w)| (j, self.z0[j] + t * w)).collect()
    }
}

/// Directions in the parameter cube of a transformation pipeline.
///
/// A unit direction is mapped into `[0, 1]^l` by clipping negative weights to
/// zero; the plot runs over `t` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct TransformPlot {
    pipeline: TransformPipeline,
    x0: Instance,
}

impl TransformPlot {
    pub fn new(pipeline: TransformPipeline, x0: Instance) -> Result<Self> {
        if pipeline.is_empty() {
            return Err(AdpError::InvalidArgument("transform pipeline is empty".into()));
        }
        Ok(TransformPlot { pipeline, x0 })
    }

    pub fn parameters(v: &Direction) -> Vec<f64> {
        v.to_dense().into_iter().map(|w| w.clamp(0.0, 1.0)).collect()
    }

    pub fn pipeline(&self) -> &TransformPipeline {
        &self.pipeline
    }
}

impl CurveFamily for TransformPlot {
    fn dim(&self) -> usize {
        self.pipeline.len()
    }

    fn interval(&self, _v: &Direction) -> Result<Interval> {
        Ok(Interval { a: 0.0, b: 1.0 })
    }

    fn sample(&self, m: &ModelHandle, v: &Direction, interval: Interval, k: usize) -> Result<SampledCurve> {
        check_direction_dim(v, self.pipeline.len())?;
        if interval != (Interval { a: 0.0, b: 1.0 }) {
            return Err(AdpError::InvalidArgument("transform plots run over t in [0, 1]".into()));
        }
        transform_curve(m, &self.pipeline, &self.x0, &Self::parameters(v), k)
    }

    fn target(&self) -> Option<&Instance> {
        Some(&self.x0)
    }

    fn coordinate_values(&self, v: &Direction, t: f64) -> Vec<(usize, f64)> {
        v.iter().map(|(j, w)| (j, w.clamp(0.0, 1.0) * t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::BoxBound;
    use crate::models::{FnModel, LinearModel, SyntheticSinModel};
    use crate::spaces::{fit_affine_map, AffineGenerativeMap, BuiltinTransform};
    use crate::types::Dataset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(a: f64) -> Interval {
        Interval::new(-a, a).unwrap()
    }

    #[test]
    fn linear_instance_curve() {
        let m = ModelHandle::new(FnModel::new(2, |x| 2.0 * x[0]));
        let c = instance_curve(&m, &Instance::zeros(2), &Direction::axis(0, 2).unwrap(), sym(1.0), 3).unwrap();
        assert_eq!(c.fs(), &[-2.0, 0.0, 2.0]);
        assert_eq!(m.eval_count(), 3);
    }

    #[test]
    fn odd_symmetric_grid_contains_target() {
        let m = ModelHandle::new(SyntheticSinModel::new(vec![0.5]));
        let x0 = Instance::new(vec![0.2, -0.4, 1.0]);
        let v = Direction::new([(0, 1.0), (2, -2.0)], 3).unwrap();
        let c = instance_curve(&m, &x0, &v, sym(1.5), 51).unwrap();
        assert_eq!(c.ts()[25], 0.0);
        assert_eq!(c.fs()[25], m.evaluate(&x0).unwrap());
        assert_eq!(m.eval_count(), 52);
    }

    #[test]
    fn sin_model_along_second_axis_is_cosine() {
        let m = ModelHandle::new(SyntheticSinModel::new(vec![]));
        let c = instance_curve(&m, &Instance::zeros(2), &Direction::axis(1, 2).unwrap(), sym(2.0), 41).unwrap();
        for (t, f) in c.ts().iter().zip(c.fs()) {
            assert!((f - (3.0 * t).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn pdp_of_single_point_is_instance_curve() {
        let m = ModelHandle::new(SyntheticSinModel::new(vec![0.3, 0.1]));
        let x = Instance::new(vec![0.1, 0.2, 0.3, 0.4]);
        let v = Direction::new([(1, 1.0), (3, 0.5)], 4).unwrap();
        let a = pdp_curve(&m, std::slice::from_ref(&x), &v, sym(1.0), 11).unwrap();
        let b = instance_curve(&m, &x, &v, sym(1.0), 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pdp_of_square_over_two_points() {
        let m = ModelHandle::new(FnModel::new(1, |x| x[0] * x[0]));
        let data = [Instance::new(vec![-1.0]), Instance::new(vec![1.0])];
        let c = pdp_curve(&m, &data, &Direction::axis(0, 1).unwrap(), sym(2.0), 9).unwrap();
        for (t, f) in c.ts().iter().zip(c.fs()) {
            assert!((f - (t * t + 1.0)).abs() < 1e-12);
        }
        assert_eq!(m.eval_count(), 18);
    }

    #[test]
    fn pdp_is_mean_of_instance_curves() {
        let m = ModelHandle::new(SyntheticSinModel::new(vec![0.7]));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data: Vec<Instance> =
            (0..6).map(|_| Instance::new((0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect();
        let v = Direction::new([(0, 0.4), (1, 0.9), (2, -0.2)], 3).unwrap();
        let pdp = pdp_curve(&m, &data, &v, sym(0.8), 15).unwrap();
        let mut mean = vec![0.0; 15];
        for x in &data {
            let c = instance_curve(&m, x, &v, sym(0.8), 15).unwrap();
            mean.iter_mut().zip(c.fs()).for_each(|(a, b)| *a += b / 6.0);
        }
        assert!(pdp.fs().iter().zip(&mean).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn linear_pdp_has_instance_slope() {
        let m = ModelHandle::new(LinearModel::new(0.0, vec![1.5, -2.0]));
        let data = [Instance::new(vec![0.5, 1.0]), Instance::new(vec![-1.0, 3.0])];
        let v = Direction::axis(1, 2).unwrap();
        let pdp = pdp_curve(&m, &data, &v, sym(1.0), 5).unwrap();
        let ice = instance_curve(&m, &data[0], &v, sym(1.0), 5).unwrap();
        let offset = pdp.fs()[0] - ice.fs()[0];
        for (a, b) in pdp.fs().iter().zip(ice.fs()) {
            assert!((a - b - offset).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_latent_map_matches_instance_curve() {
        let m = ModelHandle::new(SyntheticSinModel::new(vec![0.3]));
        let x0 = Instance::new(vec![0.2, -0.1, 0.5]);
        let v = Direction::new([(0, 0.6), (1, 0.8)], 3).unwrap();
        let g = AffineGenerativeMap::identity(3);
        let a = latent_curve(&m, &g, &x0, &v, sym(1.0), 21).unwrap();
        let b = instance_curve(&m, &x0, &v, sym(1.0), 21).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn affine_latent_curve_of_linear_model_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<Vec<f64>> =
            (0..50).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let data = Dataset::from_rows(rows).unwrap();
        let g = fit_affine_map(&data, 2).unwrap();
        let m = ModelHandle::new(LinearModel::new(1.0, vec![0.5, -1.0, 2.0, 0.1]));
        let x0 = data.row(3).unwrap().clone();
        let c = latent_curve(&m, &g, &x0, &Direction::new([(0, 1.0), (1, 1.0)], 2).unwrap(), sym(3.0), 13)
            .unwrap();
        let slope = (c.fs()[1] - c.fs()[0]) / c.step();
        for i in 1..c.len() {
            assert!((c.fs()[i] - c.fs()[i - 1] - slope * c.step()).abs() < 1e-10);
        }
    }

    #[test]
    fn transform_curves() {
        let m = ModelHandle::new(FnModel::new(2, |x| x[0]));
        let x0 = Instance::zeros(2);
        let p = TransformPipeline::from_builtins(vec![BuiltinTransform::Offset { amount: 1.0 }]);
        let c = transform_curve(&m, &p, &x0, &[1.0], 11).unwrap();
        for (t, f) in c.ts().iter().zip(c.fs()) {
            assert!((f - t).abs() < 1e-15);
        }
        let frozen = transform_curve(&m, &p, &Instance::new(vec![0.25, 1.0]), &[0.0], 5).unwrap();
        assert!(frozen.fs().iter().all(|&f| f == 0.25));
    }

    #[test]
    fn families_report_endpoints() {
        let m = ModelHandle::new(SyntheticSinModel::new(vec![0.3]));
        let bounds = PlotBounds::boxed(BoxBound::symmetric(3, 1.0));
        let fam = InstancePlot::new(Instance::new(vec![0.5, 0.0, 0.0]), bounds).unwrap();
        let v = Direction::axis(0, 3).unwrap();
        let iv = fam.interval(&v).unwrap();
        let k = fam.grid_size(50, iv);
        assert_eq!(k, 51);
        let c = fam.sample(&m, &v, iv, k).unwrap();
        assert_eq!(c.ts()[0], -1.5);
        assert_eq!(*c.ts().last().unwrap(), 0.5);
    }
}
