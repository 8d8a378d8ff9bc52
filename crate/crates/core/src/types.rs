//! Shared domain types: datasets, target instances, plot intervals and
//! sampled plot curves.

use serde::{Deserialize, Serialize};
use std::ops::Deref;

use crate::error::{AdpError, Result};

/// A point in the model's input space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(pub Vec<f64>);

impl Instance {
    pub fn new(values: Vec<f64>) -> Self {
        Instance(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Instance(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `self + t * dir`, where `dir` is given as sparse `(index, weight)` pairs.
    pub fn shifted<'a>(&self, t: f64, dir: impl IntoIterator<Item = (usize, f64)> + 'a) -> Instance {
        let mut out = self.0.clone();
        for (j, w) in dir {
            out[j] += t * w;
        }
        Instance(out)
    }
}

impl Deref for Instance {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Instance {
    fn from(values: Vec<f64>) -> Self {
        Instance(values)
    }
}

/// Feature matrix with column names and per-feature ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Instance>,
    feature_names: Vec<String>,
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, feature_names: Vec<String>) -> Result<Self> {
        let d = feature_names.len();
        if rows.is_empty() || d == 0 {
            return Err(AdpError::InvalidArgument(
                "dataset needs at least one row and one feature".into(),
            ));
        }
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for row in &rows {
            if row.len() != d {
                return Err(AdpError::DimensionMismatch { expected: d, got: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(AdpError::InvalidArgument(format!(
                        "non-finite value in column {j}"
                    )));
                }
                mins[j] = mins[j].min(x);
                maxs[j] = maxs[j].max(x);
            }
        }
        Ok(Dataset {
            rows: rows.into_iter().map(Instance).collect(),
            feature_names,
            mins,
            maxs,
        })
    }

    /// Dataset with generated names `x0, x1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        Self::new(rows, (0..d).map(|j| format!("x{j}")).collect())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    pub fn rows(&self) -> &[Instance] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Option<&Instance> {
        self.rows.get(i)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d()];
        for row in &self.rows {
            for (m, x) in mean.iter_mut().zip(row.iter()) {
                *m += x;
            }
        }
        let n = self.n() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// Closed plot interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(AdpError::DegenerateInterval { a, b });
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }

    /// `k` equally spaced points with both endpoints hit exactly.
    pub fn grid(&self, k: usize) -> Vec<f64> {
        let step = self.length() / (k - 1) as f64;
        (0..k)
            .map(|i| if i + 1 == k { self.b } else { self.a + step * i as f64 })
            .collect()
    }

    pub fn straddles_zero(&self) -> bool {
        self.a < 0.0 && self.b > 0.0
    }
}

/// The univariate plot function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    ts: Vec<f64>,
    fs: Vec<f64>,
    interval: Interval,
}

impl SampledCurve {
    pub const MIN_POINTS: usize = 3;

    /// Builds a curve from values sampled on `interval.grid(fs.len())`.
    pub fn new(interval: Interval, fs: Vec<f64>) -> Result<Self> {
        if fs.len() < Self::MIN_POINTS {
            return Err(AdpError::InvalidArgument(format!(
                "a curve needs at least {} points, got {}",
                Self::MIN_POINTS,
                fs.len()
            )));
        }
        let ts = interval.grid(fs.len());
        Ok(SampledCurve { ts, fs, interval })
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn fs(&self) -> &[f64] {
        &self.fs
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fs.is_empty()
    }

    /// Spacing between consecutive grid points.
    pub fn step(&self) -> f64 {
        self.interval.length() / (self.len() - 1) as f64
    }

    /// Same curve traversed in the opposite direction (`v -> -v`).
    pub fn reversed(&self) -> SampledCurve {
        let interval = Interval { a: -self.interval.b, b: -self.interval.a };
        SampledCurve {
            ts: interval.grid(self.len()),
            fs: self.fs.iter().rev().copied().collect(),
            interval,
        }
    }
}
