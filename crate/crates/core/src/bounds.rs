//! Realistic plot intervals along a line `x0 + t v`.
//!
//! The box bound keeps every feature inside its observed range. The optional
//! Gaussian density bound additionally keeps the line inside the ellipsoid
//! where the squared Mahalanobis distance stays below a quantile of the
//! training distances.

use nalgebra::{DMatrix, DVector};

use crate::direction::Direction;
use crate::error::{AdpError, Result};
use crate::types::{Dataset, Instance, Interval};

/// Intervals shorter than this are rejected as degenerate.
pub const MIN_INTERVAL_LENGTH: f64 = 1e-9;

pub const DEFAULT_DENSITY_QUANTILE: f64 = 0.95;
pub const DEFAULT_RIDGE_SCALE: f64 = 1e-6;

/// Per-feature `[min, max]` box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBound {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl BoxBound {
    pub fn new(mins: Vec<f64>, maxs: Vec<f64>) -> Result<Self> {
        if mins.len() != maxs.len() {
            return Err(AdpError::LengthMismatch(mins.len(), maxs.len()));
        }
        if mins.iter().zip(&maxs).any(|(lo, hi)| !(lo <= hi)) {
            return Err(AdpError::InvalidArgument("box needs min <= max".into()));
        }
        Ok(BoxBound { mins, maxs })
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn symmetric(dim: usize, half_width: f64) -> Self {
        BoxBound { mins: vec![-half_width; dim], maxs: vec![half_width; dim] }
    }

    pub fn from_dataset(data: &Dataset) -> Self {
        BoxBound { mins: data.mins().to_vec(), maxs: data.maxs().to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.mins.iter().zip(&self.maxs)).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }
}

/// Largest `[a, b]` such that `x0 + t v` stays in the box for all `t` in it.
pub fn line_box_interval(x0: &Instance, v: &Direction, bound: &BoxBound) -> Result<Interval> {
    if x0.dim() != bound.dim() {
        return Err(AdpError::DimensionMismatch { expected: bound.dim(), got: x0.dim() });
    }
    if !bound.contains(x0) {
        return Err(AdpError::EmptyInterval);
    }
    let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
    for (j, w) in v.iter() {
        let lo = (bound.mins[j] - x0[j]) / w;
        let hi = (bound.maxs[j] - x0[j]) / w;
        let (lo, hi) = if w > 0.0 { (lo, hi) } else { (hi, lo) };
        a = a.max(lo);
        b = b.min(hi);
    }
    finish_interval(a, b)
}

fn finish_interval(a: f64, b: f64) -> Result<Interval> {
    if a > b {
        return Err(AdpError::EmptyInterval);
    }
    if !(b - a >= MIN_INTERVAL_LENGTH) || !a.is_finite() || !b.is_finite() {
        return Err(AdpError::DegenerateInterval { a, b });
    }
    Ok(Interval { a, b })
}

/// Ridge-regularized multivariate Gaussian with a Mahalanobis threshold.
#[derive(Debug, Clone)]
pub struct GaussianDensity {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    threshold: f64,
    quantile: Option<f64>,
}

impl GaussianDensity {
    /// Fits mean and covariance to `data`, adds `ridge_scale * trace / d` to
    /// the diagonal, and sets the threshold to the `quantile` of the training
    /// squared Mahalanobis distances.
    pub fn fit(data: &Dataset, quantile: f64, ridge_scale: f64) -> Result<Self> {
        if !(quantile > 0.0 && quantile < 1.0) {
            return Err(AdpError::InvalidArgument(format!("density quantile {quantile} not in (0, 1)")));
        }
        if !(ridge_scale > 0.0) {
            return Err(AdpError::InvalidArgument("ridge scale must be positive".into()));
        }
        let d = data.d();
        let n = data.n();
        let mean = DVector::from_vec(data.mean());
        let mut covariance = DMatrix::zeros(d, d);
        for row in data.rows() {
            let centered = DVector::from_column_slice(row) - &mean;
            covariance += &centered * centered.transpose();
        }
        covariance /= (n.max(2) - 1) as f64;
        let trace = covariance.trace();
        let ridge = if trace > 0.0 { ridge_scale * trace / d as f64 } else { ridge_scale };
        for j in 0..d {
            covariance[(j, j)] += ridge;
        }
        let precision = invert_spd(&covariance)?;
        let mut density =
            GaussianDensity { mean, covariance, precision, threshold: 0.0, quantile: Some(quantile) };
        let mut distances: Vec<f64> = data.rows().iter().map(|r| density.mahalanobis_sq(r)).collect();
        distances.sort_by(f64::total_cmp);
        density.threshold = quantile_sorted(&distances, quantile);
        Ok(density)
    }

    /// Density from explicit parameters; `threshold` is the squared-distance cutoff.
    pub fn from_parts(mean: Vec<f64>, covariance: Vec<Vec<f64>>, threshold: f64) -> Result<Self> {
        let d = mean.len();
        if covariance.len() != d || covariance.iter().any(|r| r.len() != d) {
            return Err(AdpError::DimensionMismatch { expected: d, got: covariance.len() });
        }
        if !(threshold > 0.0) {
            return Err(AdpError::InvalidArgument("density threshold must be positive".into()));
        }
        let covariance = DMatrix::from_fn(d, d, |i, j| covariance[i][j]);
        let precision = invert_spd(&covariance)?;
        Ok(GaussianDensity {
            mean: DVector::from_vec(mean),
            covariance,
            precision,
            threshold,
            quantile: None,
        })
    }

    /// Isotropic density whose high-density set is the ball of `radius` around `center`.
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let d = center.len();
        GaussianDensity {
            mean: DVector::from_vec(center),
            covariance: DMatrix::identity(d, d),
            precision: DMatrix::identity(d, d),
            threshold: radius * radius,
            quantile: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn quantile(&self) -> Option<f64> {
        self.quantile
    }

    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let centered = DVector::from_column_slice(x) - &self.mean;
        (centered.transpose() * &self.precision * &centered)[(0, 0)]
    }
}

fn invert_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| AdpError::DegenerateData("covariance is not positive definite".into()))
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Portion of the line inside the density's high-density ellipsoid.
pub fn line_density_interval(x0: &Instance, v: &Direction, g: &GaussianDensity) -> Result<Interval> {
    if x0.dim() != g.dim() || v.dim() != g.dim() {
        return Err(AdpError::DimensionMismatch { expected: g.dim(), got: x0.dim() });
    }
    let centered = DVector::from_column_slice(x0) - &g.mean;
    let dir = DVector::from_vec(v.to_dense());
    let pv = &g.precision * &dir;
    let alpha = dir.dot(&pv);
    let beta = 2.0 * centered.dot(&pv);
    let distance = centered.dot(&(&g.precision * &centered));
    let gamma = distance - g.threshold;
    if gamma > 0.0 {
        return Err(AdpError::TargetOutsideDensity { distance, threshold: g.threshold });
    }
    let disc = (beta * beta - 4.0 * alpha * gamma).max(0.0);
    let q = -0.5 * (beta + beta.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / alpha, gamma / q) };
    finish_interval(r1.min(r2), r1.max(r2))
}

/// Intersection of the box interval with the optional density interval.
pub fn plot_interval(
    x0: &Instance,
    v: &Direction,
    bound: &BoxBound,
    density: Option<&GaussianDensity>,
) -> Result<Interval> {
    let boxed = line_box_interval(x0, v, bound)?;
    match density {
        None => Ok(boxed),
        Some(g) => {
            let dense = line_density_interval(x0, v, g)?;
            finish_interval(boxed.a.max(dense.a), boxed.b.min(dense.b))
        }
    }
}

/// Box plus optional density bound, as used by instance plots.
#[derive(Debug, Clone)]
pub struct PlotBounds {
    pub box_bound: BoxBound,
    pub density: Option<GaussianDensity>,
}

impl PlotBounds {
    pub fn boxed(box_bound: BoxBound) -> Self {
        PlotBounds { box_bound, density: None }
    }

    pub fn with_density(mut self, density: GaussianDensity) -> Self {
        self.density = Some(density);
        self
    }

    pub fn interval(&self, x0: &Instance, v: &Direction) -> Result<Interval> {
        plot_interval(x0, v, &self.box_bound, self.density.as_ref())
    }
}
