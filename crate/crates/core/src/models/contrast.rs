//! Reference models `g` that a plot is contrasted against.

use serde::{Deserialize, Serialize};

use super::{Model, ModelHandle};
use crate::error::{AdpError, Result};
use crate::types::Instance;

/// Constant model fixed to the prediction at the target, `g(x) = f(x0)`.
#[derive(Debug, Clone)]
pub struct ConstantModel {
    dim: usize,
    value: f64,
}

impl ConstantModel {
    pub fn new(dim: usize, value: f64) -> Self {
        ConstantModel { dim, value }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl Model for ConstantModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(vec![self.value; points.len()])
    }

    fn describe(&self) -> String {
        format!("constant({})", self.value)
    }
}

pub fn constant_contrast(m: &ModelHandle, x0: &Instance) -> Result<ModelHandle> {
    let value = m.evaluate(x0)?;
    Ok(ModelHandle::new(ConstantModel::new(m.dim(), value)))
}

/// Step rule for the central differences of [`taylor_contrast`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FiniteDifferenceStep {
    /// The same step for every coordinate.
    Fixed(f64),
    /// `h_j = scale * (1 + |x0_j|)`.
    Relative(f64),
}

impl Default for FiniteDifferenceStep {
    fn default() -> Self {
        FiniteDifferenceStep::Relative(1e-4)
    }
}

impl FiniteDifferenceStep {
    fn step(&self, x0j: f64) -> f64 {
        match *self {
            FiniteDifferenceStep::Fixed(h) => h,
            FiniteDifferenceStep::Relative(s) => s * (1.0 + x0j.abs()),
        }
    }
}

/// First-order local approximation `g(x) = f(x0) + grad . (x - x0)`.
#[derive(Debug, Clone)]
pub struct TaylorModel {
    anchor: Instance,
    value: f64,
    gradient: Vec<f64>,
}

impl TaylorModel {
    /// Estimates the gradient at `x0` with central differences (`2d + 1` evaluations).
    pub fn fit(m: &ModelHandle, x0: &Instance, step: FiniteDifferenceStep) -> Result<Self> {
        let d = m.dim();
        if x0.dim() != d {
            return Err(AdpError::DimensionMismatch { expected: d, got: x0.dim() });
        }
        let steps: Vec<f64> = x0.iter().map(|&x| step.step(x)).collect();
        if steps.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(AdpError::InvalidArgument("finite-difference step must be positive".into()));
        }
        let mut batch = Vec::with_capacity(2 * d + 1);
        batch.push(x0.clone());
        for (j, &h) in steps.iter().enumerate() {
            let mut plus = x0.clone();
            plus.0[j] += h;
            let mut minus = x0.clone();
            minus.0[j] -= h;
            batch.push(plus);
            batch.push(minus);
        }
        let scores = m.evaluate_batch(&batch)?;
        let gradient = (0..d)
            .map(|j| {
                // actual spacing after rounding of x0 +/- h
                let span = batch[2 * j + 1][j] - batch[2 * j + 2][j];
                (scores[2 * j + 1] - scores[2 * j + 2]) / span
            })
            .collect();
        Ok(TaylorModel { anchor: x0.clone(), value: scores[0], gradient })
    }

    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl Model for TaylorModel {
    fn dim(&self) -> usize {
        self.anchor.dim()
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(points
            .iter()
            .map(|x| {
                self.value
                    + self
                        .gradient
                        .iter()
                        .zip(x.iter().zip(self.anchor.iter()))
                        .map(|(g, (xi, ai))| g * (xi - ai))
                        .sum::<f64>()
            })
            .collect())
    }

    fn describe(&self) -> String {
        "taylor".to_string()
    }
}

pub fn taylor_contrast(
    m: &ModelHandle,
    x0: &Instance,
    step: FiniteDifferenceStep,
) -> Result<ModelHandle> {
    Ok(ModelHandle::new(TaylorModel::fit(m, x0, step)?))
}

/// `g(x) = f(sigma(x))` where `sigma` replaces `x_attr` by `1 - x_attr`.
struct FlipModel {
    base: ModelHandle,
    attr: usize,
}

impl Model for FlipModel {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        let flipped: Vec<Instance> = points
            .iter()
            .map(|x| {
                let mut y = x.clone();
                y.0[self.attr] = 1.0 - y.0[self.attr];
                y
            })
            .collect();
        self.base.evaluate_batch(&flipped)
    }

    fn concurrency(&self) -> super::ConcurrencyClass {
        self.base.concurrency()
    }

    fn describe(&self) -> String {
        format!("flip({}, attr={})", self.base.describe(), self.attr)
    }
}

pub fn flip_attribute_contrast(m: &ModelHandle, attr: usize) -> Result<ModelHandle> {
    if attr >= m.dim() {
        return Err(AdpError::IndexOutOfRange { index: attr, dim: m.dim() });
    }
    Ok(ModelHandle::new(FlipModel { base: m.clone(), attr }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FnModel, LinearModel, SyntheticSinModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(seed: u64, n: usize, d: usize) -> Vec<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Instance::new((0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()))
            .collect()
    }

    #[test]
    fn constant_contrast_returns_target_prediction() {
        let f = ModelHandle::new(FnModel::new(1, |x| x[0]));
        let g = constant_contrast(&f, &Instance::new(vec![0.3])).unwrap();
        for x in [-5.0, 0.0, 0.3, 17.0] {
            assert_eq!(g.evaluate(&Instance::new(vec![x])).unwrap(), 0.3);
        }
        let sin = ModelHandle::new(SyntheticSinModel::new(vec![]));
        let g = constant_contrast(&sin, &Instance::zeros(2)).unwrap();
        assert_eq!(g.evaluate(&Instance::new(vec![0.7, -0.2])).unwrap(), 1.0);
    }

    #[test]
    fn taylor_gradient_of_linear_model() {
        let f = ModelHandle::new(LinearModel::new(0.0, vec![2.0, 3.0]));
        for h in [1e-6, 1e-4, 0.5, 3.0] {
            let t = TaylorModel::fit(&f, &Instance::new(vec![0.4, -1.1]), FiniteDifferenceStep::Fixed(h))
                .unwrap();
            assert!((t.gradient()[0] - 2.0).abs() < 1e-9);
            assert!((t.gradient()[1] - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn taylor_gradient_of_square() {
        let f = ModelHandle::new(FnModel::new(1, |x| x[0] * x[0]));
        let x0 = Instance::new(vec![1.0]);
        let t = TaylorModel::fit(&f, &x0, FiniteDifferenceStep::Fixed(1e-4)).unwrap();
        assert!((t.gradient()[0] - 2.0).abs() < 1e-7);
        assert_eq!(f.eval_count(), 3);
        let g = ModelHandle::new(t);
        assert_eq!(g.evaluate(&x0).unwrap(), f.evaluate(&x0).unwrap());
    }

    #[test]
    fn taylor_reproduces_affine_models() {
        let f = ModelHandle::new(LinearModel::new(-0.7, vec![1.5, -2.0, 0.25, 3.0]));
        let x0 = Instance::new(vec![0.2, 1.0, -0.5, 2.0]);
        let g = taylor_contrast(&f, &x0, FiniteDifferenceStep::default()).unwrap();
        let pts = random_points(9, 100, 4);
        let fs = f.evaluate_batch(&pts).unwrap();
        let gs = g.evaluate_batch(&pts).unwrap();
        let worst = fs.iter().zip(&gs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "max deviation {worst}");
    }

    #[test]
    fn flip_swaps_the_attribute() {
        let f = ModelHandle::new(FnModel::new(2, |x| 10.0 * x[0] + x[1]));
        let g = flip_attribute_contrast(&f, 0).unwrap();
        assert_eq!(g.evaluate(&Instance::new(vec![1.0, 0.5])).unwrap(), 0.5);
        assert_eq!(g.evaluate(&Instance::new(vec![0.0, 0.5])).unwrap(), 10.5);
        assert!(matches!(
            flip_attribute_contrast(&f, 2),
            Err(AdpError::IndexOutOfRange { index: 2, dim: 2 })
        ));
    }

    #[test]
    fn flip_is_an_involution() {
        let f = ModelHandle::new(FnModel::new(3, |x| (x[0] * 2.0).sin() + x[1] * x[2]));
        let gg = flip_attribute_contrast(&flip_attribute_contrast(&f, 1).unwrap(), 1).unwrap();
        let mut pts = random_points(4, 100, 3);
        for (i, p) in pts.iter_mut().enumerate() {
            p.0[1] = (i % 2) as f64;
        }
        assert_eq!(f.evaluate_batch(&pts).unwrap(), gg.evaluate_batch(&pts).unwrap());
    }
}
