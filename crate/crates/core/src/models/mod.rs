//! Black-box scoring functions `f: R^d -> R`.
//!
//! Every model is reached through a [`ModelHandle`], which validates inputs,
//! counts evaluations and serializes calls into stateful external scorers.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::error::{AdpError, Result};
use crate::types::Instance;

mod builtin;
mod contrast;
mod external;
mod synthetic;

pub use builtin::{FnModel, LinearModel, QuadraticModel};
pub use contrast::{
    constant_contrast, flip_attribute_contrast, taylor_contrast, ConstantModel, FiniteDifferenceStep, TaylorModel,
};
pub use external::{format_csv_line, HttpScorer, SubprocessClient, SubprocessScorer};
pub use synthetic::{
    make_random_nonmonotone_model, recovery_plot, Polynomial, RandomNonMonotoneModel,
    SyntheticSinModel, RECOVERY_RADIUS,
};

/// Whether a model may be called from several threads at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurrencyClass {
    Pure,
    Serialized,
}

/// A deterministic scoring function over fixed-dimension inputs.
pub trait Model: Send + Sync {
    fn dim(&self) -> usize;

    /// Scores every point, in order. Inputs are already dimension-checked.
    fn score(&self, points: &[Instance]) -> Result<Vec<f64>>;

    fn concurrency(&self) -> ConcurrencyClass {
        ConcurrencyClass::Pure
    }

    fn describe(&self) -> String {
        "model".to_string()
    }
}

/// Shared, counted access to a [`Model`].
#[derive(Clone)]
pub struct ModelHandle {
    model: Arc<dyn Model>,
    evals: Arc<AtomicU64>,
    queue: Option<Arc<Mutex<()>>>,
}

impl ModelHandle {
    pub fn new(model: impl Model + 'static) -> Self {
        Self::from_arc(Arc::new(model))
    }

    pub fn from_arc(model: Arc<dyn Model>) -> Self {
        let queue = match model.concurrency() {
            ConcurrencyClass::Pure => None,
            ConcurrencyClass::Serialized => Some(Arc::new(Mutex::new(()))),
        };
        ModelHandle { model, evals: Arc::new(AtomicU64::new(0)), queue }
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn concurrency(&self) -> ConcurrencyClass {
        self.model.concurrency()
    }

    pub fn describe(&self) -> String {
        self.model.describe()
    }

    /// Total single-point evaluations made through this handle and its clones.
    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::SeqCst)
    }

    /// Scores a batch of points, in input order.
    pub fn evaluate_batch(&self, points: &[Instance]) -> Result<Vec<f64>> {
        let dim = self.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(AdpError::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        if points.is_empty() {
            return Ok(Vec::new());
        }
        self.evals.fetch_add(points.len() as u64, Ordering::SeqCst);
        let scores = match &self.queue {
            Some(queue) => {
                let _turn = queue.lock().unwrap_or_else(|e| e.into_inner());
                self.model.score(points)?
            }
            None => self.model.score(points)?,
        };
        if scores.len() != points.len() {
            return Err(AdpError::ScorerFailure(format!(
                "expected {} scores, got {}",
                points.len(),
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(AdpError::ScorerFailure(format!("non-finite score at position {i}")));
        }
        Ok(scores)
    }

    pub fn evaluate(&self, point: &Instance) -> Result<f64> {
        Ok(self.evaluate_batch(std::slice::from_ref(point))?[0])
    }
}

impl fmt::Debug for ModelHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelHandle")
            .field("model", &self.describe())
            .field("dim", &self.dim())
            .field("evals", &self.eval_count())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counter_advances_by_batch_size() {
        let m = ModelHandle::new(LinearModel::new(0.0, vec![2.0, 3.0]));
        let pts: Vec<Instance> = (0..7).map(|i| Instance::new(vec![i as f64, 1.0])).collect();
        m.evaluate_batch(&pts).unwrap();
        assert_eq!(m.eval_count(), 7);
        let clone = m.clone();
        clone.evaluate(&pts[0]).unwrap();
        assert_eq!(m.eval_count(), 8);
    }

    #[test]
    fn dimension_is_checked() {
        let m = ModelHandle::new(LinearModel::new(0.0, vec![2.0, 3.0]));
        let err = m.evaluate(&Instance::new(vec![1.0])).unwrap_err();
        assert_eq!(err, AdpError::DimensionMismatch { expected: 2, got: 1 });
        assert_eq!(m.eval_count(), 0);
    }

    #[test]
    fn linear_and_sin_examples() {
        let lin = ModelHandle::new(LinearModel::new(0.0, vec![2.0, 3.0]));
        assert_eq!(lin.evaluate(&Instance::new(vec![1.0, 1.0])).unwrap(), 5.0);
        let sin = ModelHandle::new(SyntheticSinModel::new(vec![]));
        assert_eq!(sin.evaluate(&Instance::zeros(2)).unwrap(), 1.0);
    }

    #[test]
    fn builtins_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let models: Vec<ModelHandle> = vec![
            ModelHandle::new(LinearModel::new(0.5, vec![1.0, -2.0, 0.25, 4.0])),
            ModelHandle::new(QuadraticModel::new(
                0.1,
                vec![1.0, 0.0, 2.0, -1.0],
                vec![
                    vec![1.0, 0.2, 0.0, 0.0],
                    vec![0.2, -1.0, 0.0, 0.3],
                    vec![0.0, 0.0, 0.5, 0.0],
                    vec![0.0, 0.3, 0.0, 2.0],
                ],
            )
            .unwrap()),
            ModelHandle::new(SyntheticSinModel::new(vec![0.3, -0.7])),
            ModelHandle::new(make_random_nonmonotone_model(11, 4, 2).unwrap()),
        ];
        let batch: Vec<Instance> = (0..20)
            .map(|_| Instance::new((0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()))
            .collect();
        for m in &models {
            let first = m.evaluate_batch(&batch).unwrap();
            for _ in 0..100 {
                let again = m.evaluate_batch(&batch).unwrap();
                assert!(first.iter().zip(&again).all(|(a, b)| a.to_bits() == b.to_bits()));
            }
        }
    }
}
