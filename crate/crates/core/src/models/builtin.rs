use serde::{Deserialize, Serialize};

use super::Model;
use crate::error::{AdpError, Result};
use crate::types::Instance;

/// `f(x) = intercept + coefficients . x`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    #[serde(default)]
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn new(intercept: f64, coefficients: Vec<f64>) -> Self {
        LinearModel { intercept, coefficients }
    }
}

impl Model for LinearModel {
    fn dim(&self) -> usize {
        self.coefficients.len()
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(points
            .iter()
            .map(|x| {
                self.intercept + self.coefficients.iter().zip(x.iter()).map(|(c, v)| c * v).sum::<f64>()
            })
            .collect())
    }

    fn describe(&self) -> String {
        format!("linear(d={})", self.dim())
    }
}

/// `f(x) = intercept + linear . x + x^T quadratic x`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticModel {
    #[serde(default)]
    pub intercept: f64,
    pub linear: Vec<f64>,
    pub quadratic: Vec<Vec<f64>>,
}

impl QuadraticModel {
    pub fn new(intercept: f64, linear: Vec<f64>, quadratic: Vec<Vec<f64>>) -> Result<Self> {
        let m = QuadraticModel { intercept, linear, quadratic };
        m.validate()?;
        Ok(m)
    }

    /// Checks that the quadratic form is square and matches the linear part.
    pub fn validate(&self) -> Result<()> {
        let d = self.linear.len();
        if self.quadratic.len() != d {
            return Err(AdpError::DimensionMismatch { expected: d, got: self.quadratic.len() });
        }
        if let Some(row) = self.quadratic.iter().find(|r| r.len() != d) {
            return Err(AdpError::DimensionMismatch { expected: d, got: row.len() });
        }
        Ok(())
    }
}

impl Model for QuadraticModel {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(points
            .iter()
            .map(|x| {
                let lin: f64 = self.linear.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
                let quad: f64 = self
                    .quadratic
                    .iter()
                    .zip(x.iter())
                    .map(|(row, xi)| xi * row.iter().zip(x.iter()).map(|(q, xj)| q * xj).sum::<f64>())
                    .sum();
                self.intercept + lin + quad
            })
            .collect())
    }

    fn describe(&self) -> String {
        format!("quadratic(d={})", self.dim())
    }
}

/// Wraps a pointwise closure as a model.
pub struct FnModel<F> {
    dim: usize,
    f: F,
    name: String,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnModel { dim, f, name: "fn".to_string() }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl<F> Model for FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, points: &[Instance]) -> Result<Vec<f64>> {
        Ok(points.iter().map(|x| (self.f)(x)).collect())
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}
