//! Plot spaces beyond raw features: latent codes of a generative map and
//! parameters of a transformation pipeline.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{AdpError, Result};
use crate::models::{format_csv_line, SubprocessClient};
use crate::types::{Dataset, Instance, Interval};

/// Default latent plot window, in standardized latent units.
pub const LATENT_WINDOW: Interval = Interval { a: -3.0, b: 3.0 };

/// A decoder `R^latent -> R^ambient` with an approximate inverse.
pub trait GenerativeMap: Send + Sync {
    fn latent_dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn decode(&self, codes: &[Vec<f64>]) -> Result<Vec<Instance>>;
    fn encode(&self, x: &Instance) -> Result<Vec<f64>>;

    /// `|| decode(encode(x)) - x ||`
    fn reconstruction_residual(&self, x: &Instance) -> Result<f64> {
        let z = self.encode(x)?;
        let back = self.decode(std::slice::from_ref(&z))?;
        Ok(back[0].iter().zip(x.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
    }
}

/// `decode(z) = mean + basis * diag(scales) * z`, with orthonormal basis columns.
///
/// Latent coordinates are whitened: each has unit variance on the data the map
/// was fitted to.
#[derive(Debug, Clone)]
pub struct AffineGenerativeMap {
    mean: DVector<f64>,
    basis: DMatrix<f64>,
    scales: DVector<f64>,
}

impl AffineGenerativeMap {
    pub fn new(mean: Vec<f64>, basis: DMatrix<f64>, scales: Vec<f64>) -> Result<Self> {
        if basis.nrows() != mean.len() || basis.ncols() != scales.len() {
            return Err(AdpError::DimensionMismatch { expected: mean.len(), got: basis.nrows() });
        }
        if scales.iter().any(|s| !(*s > 0.0)) {
            return Err(AdpError::InvalidArgument("latent scales must be positive".into()));
        }
        let gram = basis.transpose() * &basis;
        if (gram - DMatrix::identity(scales.len(), scales.len())).amax() > 1e-8 {
            return Err(AdpError::InvalidArgument("basis columns must be orthonormal".into()));
        }
        Ok(AffineGenerativeMap {
            mean: DVector::from_vec(mean),
            basis,
            scales: DVector::from_vec(scales),
        })
    }

    /// Identity map on `R^dim`.
    pub fn identity(dim: usize) -> Self {
        AffineGenerativeMap {
            mean: DVector::zeros(dim),
            basis: DMatrix::identity(dim, dim),
            scales: DVector::from_element(dim, 1.0),
        }
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn scales(&self) -> &[f64] {
        self.scales.as_slice()
    }
}

/// Principal-component map onto the top `latent_dim` directions of `data`.
///
/// Each basis vector is signed so that its largest-magnitude component is
/// positive.
pub fn fit_affine_map(data: &Dataset, latent_dim: usize) -> Result<AffineGenerativeMap> {
    let (n, d) = (data.n(), data.d());
    if latent_dim == 0 || latent_dim > d || latent_dim + 1 > n {
        return Err(AdpError::InvalidArgument(format!(
            "latent dimension {latent_dim} must lie in [1, min(n - 1, d)] = [1, {}]",
            d.min(n.saturating_sub(1))
        )));
    }
    let mean = DVector::from_vec(data.mean());
    let mut cov = DMatrix::zeros(d, d);
    for row in data.rows() {
        let c = DVector::from_column_slice(row) - &mean;
        cov += &c * c.transpose();
    }
    cov /= (n - 1) as f64;

    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank_tol = 1e-12 * top.max(f64::MIN_POSITIVE);
    if eig.eigenvalues[order[latent_dim - 1]] <= rank_tol {
        return Err(AdpError::DegenerateData(format!(
            "covariance rank is below the requested latent dimension {latent_dim}"
        )));
    }

    let mut basis = DMatrix::zeros(d, latent_dim);
    let mut scales = Vec::with_capacity(latent_dim);
    for (col, &idx) in order.iter().take(latent_dim).enumerate() {
        let mut vec = eig.eigenvectors.column(idx).into_owned();
        let pivot = vec.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            vec.neg_mut();
        }
        basis.set_column(col, &vec);
        scales.push(eig.eigenvalues[idx].sqrt());
    }
    Ok(AffineGenerativeMap { mean, basis, scales: DVector::from_vec(scales) })
}

impl GenerativeMap for AffineGenerativeMap {
    fn latent_dim(&self) -> usize {
        self.basis.ncols()
    }

    fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    fn decode(&self, codes: &[Vec<f64>]) -> Result<Vec<Instance>> {
        codes
            .iter()
            .map(|z| {
                if z.len() != self.latent_dim() {
                    return Err(AdpError::DimensionMismatch { expected: self.latent_dim(), got: z.len() });
                }
                let scaled = DVector::from_column_slice(z).component_mul(&self.scales);
                Ok(Instance((&self.mean + &self.basis * scaled).as_slice().to_vec()))
            })
            .collect()
    }

    fn encode(&self, x: &Instance) -> Result<Vec<f64>> {
        if x.dim() != self.ambient_dim() {
            return Err(AdpError::DimensionMismatch { expected: self.ambient_dim(), got: x.dim() });
        }
        let centered = DVector::from_column_slice(x) - &self.mean;
        let z = (self.basis.transpose() * centered).component_div(&self.scales);
        Ok(z.as_slice().to_vec())
    }
}

/// Generative map backed by two external commands speaking the line protocol.
///
/// The decoder receives latent codes and answers with one CSV line of ambient
/// values per code; the encoder does the reverse.
pub struct SubprocessGenerativeMap {
    decoder: SubprocessClient,
    encoder: SubprocessClient,
    latent_dim: usize,
    ambient_dim: usize,
}

impl SubprocessGenerativeMap {
    pub fn spawn(decode_cmd: &str, encode_cmd: &str, latent_dim: usize, ambient_dim: usize) -> Result<Self> {
        Ok(SubprocessGenerativeMap {
            decoder: SubprocessClient::spawn(decode_cmd)?,
            encoder: SubprocessClient::spawn(encode_cmd)?,
            latent_dim,
            ambient_dim,
        })
    }
}

fn parse_vector(line: &str, expected: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = line
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| AdpError::ScorerFailure(format!("unparseable vector `{line}`")))?;
    if values.len() != expected {
        return Err(AdpError::ScorerFailure(format!(
            "expected {expected} values per line, got {}",
            values.len()
        )));
    }
    Ok(values)
}

impl GenerativeMap for SubprocessGenerativeMap {
    fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn decode(&self, codes: &[Vec<f64>]) -> Result<Vec<Instance>> {
        let lines: Vec<String> = codes.iter().map(|z| format_csv_line(z)).collect();
        self.decoder
            .request(&lines)?
            .iter()
            .map(|l| parse_vector(l, self.ambient_dim).map(Instance))
            .collect()
    }

    fn encode(&self, x: &Instance) -> Result<Vec<f64>> {
        let reply = self.encoder.request(&[format_csv_line(x)])?;
        parse_vector(&reply[0], self.latent_dim)
    }
}

/// A parameterized map `lambda_v: R^d -> R^d`, `v` in `[0, 1]`, with
/// `lambda_0` the identity.
pub trait Transform: Send + Sync {
    fn name(&self) -> String;
    fn apply(&self, x: &Instance, v: f64) -> Instance;
}

/// Transforms shipped with the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BuiltinTransform {
    /// `x * (1 + strength * v)`
    Gain {
        #[serde(default = "one")]
        strength: f64,
    },
    /// `x + amount * v`
    Offset {
        #[serde(default = "one")]
        amount: f64,
    },
    /// Blend towards `clamp(x, lo, hi)`.
    Clamp { lo: f64, hi: f64 },
    /// Blend towards a centered moving average over `window` neighbours.
    MovingAverage {
        #[serde(default = "three")]
        window: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

fn blend(x: &Instance, target: impl Iterator<Item = f64>, v: f64) -> Instance {
    Instance(x.iter().zip(target).map(|(a, b)| (1.0 - v) * a + v * b).collect())
}

impl Transform for BuiltinTransform {
    fn name(&self) -> String {
        match self {
            BuiltinTransform::Gain { .. } => "gain".into(),
            BuiltinTransform::Offset { .. } => "offset".into(),
            BuiltinTransform::Clamp { .. } => "clamp".into(),
            BuiltinTransform::MovingAverage { .. } => "moving-average".into(),
        }
    }

    fn apply(&self, x: &Instance, v: f64) -> Instance {
        if v == 0.0 {
            return x.clone();
        }
        match *self {
            BuiltinTransform::Gain { strength } => {
                let factor = 1.0 + strength * v;
                Instance(x.iter().map(|a| a * factor).collect())
            }
            BuiltinTransform::Offset { amount } => Instance(x.iter().map(|a| a + amount * v).collect()),
            BuiltinTransform::Clamp { lo, hi } => blend(x, x.iter().map(|a| a.clamp(lo, hi)), v),
            BuiltinTransform::MovingAverage { window } => {
                let half = window.max(1) / 2;
                let n = x.dim();
                let smoothed = (0..n).map(|i| {
                    let lo = i.saturating_sub(half);
                    let hi = (i + half + 1).min(n);
                    x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
                });
                blend(x, smoothed, v)
            }
        }
    }
}

/// Ordered list of transforms applied in sequence.
#[derive(Clone, Default)]
pub struct TransformPipeline {
    transforms: Vec<Arc<dyn Transform>>,
}

impl TransformPipeline {
    pub fn new(transforms: Vec<Arc<dyn Transform>>) -> Self {
        TransformPipeline { transforms }
    }

    pub fn from_builtins(transforms: Vec<BuiltinTransform>) -> Self {
        TransformPipeline {
            transforms: transforms.into_iter().map(|t| Arc::new(t) as Arc<dyn Transform>).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.transforms.iter().map(|t| t.name()).collect()
    }
}

impl std::fmt::Debug for TransformPipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

fn check_unit(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(AdpError::ParameterOutOfRange { value })
    }
}

/// Applies the pipeline to `x0`, transform `i` at parameter `v[i] * t`.
pub fn compose_transforms(p: &TransformPipeline, x0: &Instance, v: &[f64], t: f64) -> Result<Instance> {
    if v.len() != p.len() {
        return Err(AdpError::DimensionMismatch { expected: p.len(), got: v.len() });
    }
    check_unit(t)?;
    for &vi in v {
        check_unit(vi)?;
    }
    let mut x = x0.clone();
    for (transform, &vi) in p.transforms.iter().zip(v) {
        x = transform.apply(&x, vi * t);
    }
    Ok(x)
}
