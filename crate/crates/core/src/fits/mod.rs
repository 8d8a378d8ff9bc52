//! Reference regressions `h` fitted to a sampled curve.
//!
//! Every fit uses uniform weights on the grid. The reported `achieved_loss`
//! is the normalized trapezoid loss from [`crate::utilities::discrete_loss`].

use serde::{Deserialize, Serialize};

use crate::error::{AdpError, Result};
use crate::types::SampledCurve;
use crate::utilities::{discrete_loss, Loss};

mod isotonic;
mod lipschitz;

pub use isotonic::{pava_nondecreasing, pava_nondecreasing_l1};
pub use lipschitz::{lipschitz_least_squares, LipschitzSolution, LIPSCHITZ_MAX_ITER};

/// Function class of a reference fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum FitKind {
    ConstantMean,
    ConstantValue(f64),
    Linear,
    Isotonic,
    Lipschitz(f64),
}

impl FitKind {
    pub fn validate(&self, loss: Loss) -> Result<()> {
        match *self {
            FitKind::Lipschitz(l) if !(l > 0.0) => Err(AdpError::InvalidArgument(format!(
                "Lipschitz constant must be positive, got {l}"
            ))),
            FitKind::Lipschitz(_) if loss == Loss::Absolute => Err(AdpError::UnsupportedCombination(
                "Lipschitz fits are only defined for squared loss".into(),
            )),
            FitKind::ConstantValue(c) if !c.is_finite() => {
                Err(AdpError::InvalidArgument(format!("constant reference must be finite, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

/// Fitted reference values on the grid of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFit {
    pub hs: Vec<f64>,
    pub fit_kind: FitKind,
    pub loss: Loss,
    /// Normalized trapezoid loss between the curve and `hs`.
    pub achieved_loss: f64,
    /// Uniform-weight sum of pointwise losses, the quantity the fit minimizes.
    pub objective: f64,
}

impl ReferenceFit {
    fn new(curve: &SampledCurve, hs: Vec<f64>, fit_kind: FitKind, loss: Loss) -> Result<Self> {
        let achieved_loss = discrete_loss(curve.fs(), &hs, curve.ts(), loss)?;
        let objective = uniform_objective(curve.fs(), &hs, loss);
        Ok(ReferenceFit { hs, fit_kind, loss, achieved_loss, objective })
    }
}

/// Sum of pointwise losses with unit weights.
pub fn uniform_objective(fs: &[f64], hs: &[f64], loss: Loss) -> f64 {
    fs.iter().zip(hs).map(|(f, h)| loss.pointwise(*f, *h)).sum()
}

/// Fits `kind` to `curve` under `loss`.
pub fn fit(curve: &SampledCurve, kind: FitKind, loss: Loss) -> Result<ReferenceFit> {
    kind.validate(loss)?;
    match kind {
        FitKind::ConstantMean => fit_constant_mean(curve, loss),
        FitKind::ConstantValue(c) => fit_constant_value(curve, c, loss),
        FitKind::Linear => fit_linear(curve, loss),
        FitKind::Isotonic => fit_isotonic(curve, loss),
        FitKind::Lipschitz(l) => fit_lipschitz(curve, l, loss),
    }
}

/// Trapezoid-weighted mean of `fs` over the interval.
pub fn trapezoid_mean(fs: &[f64]) -> f64 {
    let k = fs.len();
    let inner: f64 = fs[1..k - 1].iter().sum();
    (0.5 * (fs[0] + fs[k - 1]) + inner) / (k - 1) as f64
}

pub fn fit_constant_mean(curve: &SampledCurve, loss: Loss) -> Result<ReferenceFit> {
    let c = trapezoid_mean(curve.fs());
    ReferenceFit::new(curve, vec![c; curve.len()], FitKind::ConstantMean, loss)
}

pub fn fit_constant_value(curve: &SampledCurve, c: f64, loss: Loss) -> Result<ReferenceFit> {
    FitKind::ConstantValue(c).validate(loss)?;
    ReferenceFit::new(curve, vec![c; curve.len()], FitKind::ConstantValue(c), loss)
}

const LAD_TOL: f64 = 1e-10;
const LAD_MAX_ITER: usize = 200;

fn weighted_line(ts: &[f64], fs: &[f64], ws: &[f64]) -> (f64, f64) {
    let sw: f64 = ws.iter().sum();
    let mt = ts.iter().zip(ws).map(|(t, w)| t * w).sum::<f64>() / sw;
    let mf = fs.iter().zip(ws).map(|(f, w)| f * w).sum::<f64>() / sw;
    let mut stt = 0.0;
    let mut stf = 0.0;
    for ((t, f), w) in ts.iter().zip(fs).zip(ws) {
        stt += w * (t - mt) * (t - mt);
        stf += w * (t - mt) * (f - mf);
    }
    let slope = if stt > 0.0 { stf / stt } else { 0.0 };
    (mf - slope * mt, slope)
}

/// Least-squares line, or least-absolute-deviation line by reweighting.
pub fn fit_linear(curve: &SampledCurve, loss: Loss) -> Result<ReferenceFit> {
    let ts = curve.ts();
    let fs = curve.fs();
    let mut ws = vec![1.0; fs.len()];
    let (mut c0, mut c1) = weighted_line(ts, fs, &ws);
    if loss == Loss::Absolute {
        let scale = fs.iter().fold(0.0f64, |m, f| m.max(f.abs())).max(1.0);
        let floor = 1e-12 * scale;
        let objective = |c0: f64, c1: f64| -> f64 {
            ts.iter().zip(fs).map(|(t, f)| (f - c0 - c1 * t).abs()).sum()
        };
        let mut best = (c0, c1, objective(c0, c1));
        for _ in 0..LAD_MAX_ITER {
            for ((w, t), f) in ws.iter_mut().zip(ts).zip(fs) {
                *w = 1.0 / (f - c0 - c1 * t).abs().max(floor);
            }
            let (n0, n1) = weighted_line(ts, fs, &ws);
            let change = (n0 - c0).abs() + (n1 - c1).abs();
            c0 = n0;
            c1 = n1;
            let obj = objective(c0, c1);
            if obj < best.2 {
                best = (c0, c1, obj);
            }
            if change <= LAD_TOL * (1.0 + c0.abs() + c1.abs()) {
                break;
            }
        }
        c0 = best.0;
        c1 = best.1;
    }
    let hs = ts.iter().map(|t| c0 + c1 * t).collect();
    ReferenceFit::new(curve, hs, FitKind::Linear, loss)
}

/// Best monotone fit, trying both orientations.
pub fn fit_isotonic(curve: &SampledCurve, loss: Loss) -> Result<ReferenceFit> {
    let solve = |ys: &[f64]| match loss {
        Loss::Squared => pava_nondecreasing(ys),
        Loss::Absolute => pava_nondecreasing_l1(ys),
    };
    let up = ReferenceFit::new(curve, solve(curve.fs()), FitKind::Isotonic, loss)?;
    let reversed: Vec<f64> = curve.fs().iter().rev().copied().collect();
    let mut down_hs = solve(&reversed);
    down_hs.reverse();
    let down = ReferenceFit::new(curve, down_hs, FitKind::Isotonic, loss)?;
    Ok(if down.achieved_loss < up.achieved_loss - ISOTONIC_TIE_TOL { down } else { up })
}

/// Losses closer than this count as a tie and keep the nondecreasing fit.
pub const ISOTONIC_TIE_TOL: f64 = 1e-12;

/// Best fit whose slopes are bounded by `l` in absolute value.
pub fn fit_lipschitz(curve: &SampledCurve, l: f64, loss: Loss) -> Result<ReferenceFit> {
    FitKind::Lipschitz(l).validate(loss)?;
    let sol = lipschitz_least_squares(curve.fs(), curve.step(), l)?;
    ReferenceFit::new(curve, sol.hs, FitKind::Lipschitz(l), loss)
}
