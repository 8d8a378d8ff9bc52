//! Synthetic models with known interesting directions.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Model, ModelHandle};
use crate::bounds::{BoxBound, GaussianDensity, PlotBounds};
use crate::curves::InstancePlot;
use crate::direction::Direction;
use crate::error::{AdpError, Result};
use crate::types::Instance;
use crate::utilities::UtilitySpec;

/// `f(x) = sin(2 x0) + cos(3 x1) + beta . x[2..]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSinModel {
    pub beta: Vec<f64>,
}

impl SyntheticSinModel {
    pub fn new(beta: Vec<f64>) -> Self {
        SyntheticSinModel { beta }
    }

    /// Model in `dim` dimensions with `beta` drawn uniformly from `[-scale, scale]`.
    pub fn random(seed: u64, dim: usize, scale: f64) -> Result<Self> {
        if dim < 2 {
            return Err(AdpError::InvalidArgument(format!("sin model needs dim >= 2, got {dim}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::new((2..dim).map(|_| rng.gen_range(-scale..=scale)).collect()))
    }
}

impl Model for SyntheticSinModel {
    fn dim(&self) -> usize {
        self.beta.len() + 2
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(points
            .iter()
            .map(|x| {
                let tail: f64 = self.beta.iter().zip(&x[2..]).map(|(b, v)| b * v).sum();
                (2.0 * x[0]).sin() + (3.0 * x[1]).cos() + tail
            })
            .collect())
    }

    fn describe(&self) -> String {
        format!("synthetic-sin(d={})", self.dim())
    }
}

/// Polynomial in one variable, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Polynomial { coefficients }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coefficients.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    fn scaled(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coefficients.iter().map(|c| c * s).collect())
    }
}

/// Radius of the plot interval used by the recovery experiments.
pub const RECOVERY_RADIUS: f64 = 2.0;
const RECOVERY_HALF_WIDTH: f64 = 3.0;
const RECOVERY_GRID: usize = 51;
const TAIL_COEFFICIENT: f64 = 0.01;
const MAX_ATTEMPTS: usize = 100;
const MIN_PLANTED_UTILITY: f64 = 1e-3;
const AXIS_MARGIN: f64 = 10.0;
const MIN_SUPPORT_WEIGHT: f64 = 0.25;
const RANDOM_PROBES: usize = 32;

/// Plot family of the recovery experiments: target at the origin, box
/// `[-3, 3]^d` and a ball of radius 2, so every unit direction is plotted on
/// `[-2, 2]`.
pub fn recovery_plot(dim: usize) -> InstancePlot {
    let bounds = PlotBounds::boxed(BoxBound::symmetric(dim, RECOVERY_HALF_WIDTH))
        .with_density(GaussianDensity::ball(vec![0.0; dim], RECOVERY_RADIUS));
    InstancePlot::new(Instance::zeros(dim), bounds).expect("matching dimensions")
}

/// `f(x) = p(w . x_S) + c sum_{j not in S} x_j` with a planted direction `w` on `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomNonMonotoneModel {
    pub seed: Option<u64>,
    pub dim: usize,
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub polynomial: Polynomial,
    pub tail: f64,
}

impl RandomNonMonotoneModel {
    pub fn from_parts(
        dim: usize,
        support: Vec<usize>,
        weights: Vec<f64>,
        polynomial: Polynomial,
        tail: f64,
    ) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(AdpError::LengthMismatch(support.len(), weights.len()));
        }
        let dir = Direction::new(support.iter().copied().zip(weights.iter().copied()), dim)?;
        let support = dir.support();
        let weights = dir.iter().map(|(_, w)| w).collect();
        Ok(RandomNonMonotoneModel { seed: None, dim, support, weights, polynomial, tail })
    }

    pub fn planted_direction(&self) -> Direction {
        Direction::new(self.support.iter().copied().zip(self.weights.iter().copied()), self.dim)
            .expect("planted weights form a unit vector")
    }

    pub fn planted_support(&self) -> &[usize] {
        &self.support
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut u = 0.0;
        let mut next = 0;
        let mut tail = 0.0;
        for (j, v) in x.iter().enumerate() {
            if next < self.support.len() && self.support[next] == j {
                u += self.weights[next] * v;
                next += 1;
            } else {
                tail += v;
            }
        }
        self.polynomial.eval(u) + self.tail * tail
    }
}

impl Model for RandomNonMonotoneModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(points.iter().map(|x| self.value(x)).collect())
    }

    fn describe(&self) -> String {
        format!("random-nonmonotone(d={}, support={:?})", self.dim, self.support)
    }
}

fn random_polynomial(rng: &mut ChaCha8Rng) -> Option<Polynomial> {
    let degree = if rng.gen_bool(0.5) { 3 } else { 5 };
    let mut coefficients: Vec<f64> = (0..=degree).map(|_| rng.sample(StandardNormal)).collect();
    if coefficients[degree].abs() < 0.1 {
        coefficients[degree] = 0.1f64.copysign(coefficients[degree]);
    }
    let p = Polynomial::new(coefficients);
    let dp = p.derivative();
    let inner = 0.9 * RECOVERY_RADIUS;
    let grid: Vec<f64> = (0..=400).map(|i| -inner + 2.0 * inner * i as f64 / 400.0).collect();
    let sign_change = grid.windows(2).any(|w| dp.eval(w[0]) * dp.eval(w[1]) < 0.0);
    if !sign_change {
        return None;
    }
    let peak = (0..=400)
        .map(|i| p.eval(-RECOVERY_RADIUS + 2.0 * RECOVERY_RADIUS * i as f64 / 400.0).abs())
        .fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return None;
    }
    Some(p.scaled(1.0 / peak))
}

fn random_unit_weights(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..size).map(|_| rng.sample(StandardNormal)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let w: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        if size == 1 || w.iter().all(|x| x.abs() >= MIN_SUPPORT_WEIGHT) {
            return w;
        }
    }
}

fn planted_is_dominant(model: &RandomNonMonotoneModel, rng: &mut ChaCha8Rng) -> Result<bool> {
    let family = recovery_plot(model.dim);
    let handle = ModelHandle::new(model.clone());
    let utility = UtilitySpec::monotonicity().prepare(&handle, None)?;
    let eval = |v: &Direction| -> Result<f64> {
        Ok(utility.evaluate(&family, &handle, v, RECOVERY_GRID)?.utility)
    };
    let w = model.planted_direction();
    let planted = eval(&w)?;
    if planted < MIN_PLANTED_UTILITY {
        return Ok(false);
    }
    for j in (0..model.dim).filter(|j| !model.support.contains(j)) {
        if planted <= AXIS_MARGIN * eval(&Direction::axis(j, model.dim)?)? {
            return Ok(false);
        }
    }
    let mut probes: Vec<Direction> = Vec::new();
    if model.support.len() > 1 {
        for &i in &model.support {
            probes.push(Direction::axis(i, model.dim)?);
        }
    }
    for &i in &model.support {
        for j in 0..model.dim {
            if j == i {
                continue;
            }
            for theta in [std::f64::consts::PI / 40.0, std::f64::consts::PI / 20.0, std::f64::consts::PI / 10.0] {
                for s in [1.0, -1.0] {
                    probes.push(w.givens_rotate(i, j, s * theta)?);
                }
            }
        }
    }
    if model.support.len() > 1 {
        for _ in 0..RANDOM_PROBES {
            let ws = random_unit_weights(rng, model.support.len());
            probes.push(Direction::new(model.support.iter().copied().zip(ws), model.dim)?);
        }
    }
    for v in &probes {
        if eval(v)? > planted {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Draws a model whose planted direction is the most non-monotone one.
pub fn make_random_nonmonotone_model(seed: u64, dim: usize, support_size: usize) -> Result<RandomNonMonotoneModel> {
    if !(1..=3).contains(&support_size) {
        return Err(AdpError::InvalidArgument(format!("support size must be 1, 2 or 3, got {support_size}")));
    }
    if dim < support_size {
        return Err(AdpError::InvalidArgument(format!("dim {dim} is smaller than support size {support_size}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some(polynomial) = random_polynomial(&mut rng) else { continue };
        let mut support = sample(&mut rng, dim, support_size).into_vec();
        support.sort_unstable();
        let weights = random_unit_weights(&mut rng, support_size);
        let mut model = RandomNonMonotoneModel::from_parts(dim, support, weights, polynomial, TAIL_COEFFICIENT)?;
        model.seed = Some(seed);
        if planted_is_dominant(&model, &mut rng)? {
            return Ok(model);
        }
    }
    Err(AdpError::GenerationFailure { attempts: MAX_ATTEMPTS })
}
