//! Plot utilities: how far a sampled curve is from a contrast curve or from
//! the nearest member of a reference class.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curves::CurveFamily;
use crate::direction::Direction;
use crate::error::{AdpError, Result};
use crate::fits::{fit, fit_constant_mean, FitKind, ReferenceFit};
use crate::models::{constant_contrast, flip_attribute_contrast, taylor_contrast, FiniteDifferenceStep, ModelHandle};
use crate::types::{Instance, SampledCurve};

/// Pointwise loss between a curve value and a reference value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    #[default]
    Squared,
    Absolute,
}

impl Loss {
    pub fn pointwise(self, f: f64, h: f64) -> f64 {
        match self {
            Loss::Squared => (f - h) * (f - h),
            Loss::Absolute => (f - h).abs(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Loss::Squared => "squared",
            Loss::Absolute => "absolute",
        }
    }
}

impl std::str::FromStr for Loss {
    type Err = AdpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Loss::Squared),
            "absolute" => Ok(Loss::Absolute),
            other => Err(AdpError::InvalidArgument(format!("unknown loss '{other}'"))),
        }
    }
}

/// Trapezoid integral of the pointwise loss over `ts`, not normalized.
pub fn integrated_loss(fs: &[f64], hs: &[f64], ts: &[f64], loss: Loss) -> Result<f64> {
    if fs.len() != hs.len() {
        return Err(AdpError::LengthMismatch(fs.len(), hs.len()));
    }
    if fs.len() != ts.len() {
        return Err(AdpError::LengthMismatch(fs.len(), ts.len()));
    }
    if fs.len() < 2 {
        return Err(AdpError::InvalidArgument("loss needs at least 2 grid points".into()));
    }
    let pts: Vec<f64> = fs.iter().zip(hs).map(|(f, h)| loss.pointwise(*f, *h)).collect();
    Ok(ts
        .windows(2)
        .zip(pts.windows(2))
        .map(|(t, p)| 0.5 * (t[1] - t[0]) * (p[0] + p[1]))
        .sum())
}

/// Trapezoid integral of the pointwise loss divided by the interval length.
pub fn discrete_loss(fs: &[f64], hs: &[f64], ts: &[f64], loss: Loss) -> Result<f64> {
    let total = integrated_loss(fs, hs, ts, loss)?;
    Ok(total / (ts[ts.len() - 1] - ts[0]))
}

/// Loss between a curve and a contrast curve sampled on the same grid.
pub fn contrast_utility(curve: &SampledCurve, contrast: &SampledCurve, loss: Loss) -> Result<f64> {
    if curve.len() != contrast.len() {
        return Err(AdpError::LengthMismatch(curve.len(), contrast.len()));
    }
    if curve.interval() != contrast.interval() {
        return Err(AdpError::InvalidArgument("contrast curve uses a different interval".into()));
    }
    discrete_loss(curve.fs(), contrast.fs(), curve.ts(), loss)
}

/// Squared loss to the curve's own mean.
pub fn variance_utility(curve: &SampledCurve) -> f64 {
    let fit = fit_constant_mean(curve, Loss::Squared).expect("constant fit on a valid curve");
    fit.achieved_loss
}

/// Loss of the best member of `kind`, with the fit itself.
pub fn property_utility(curve: &SampledCurve, kind: FitKind, loss: Loss) -> Result<(f64, ReferenceFit)> {
    let fit = fit(curve, kind, loss)?;
    Ok((fit.achieved_loss, fit))
}

/// Where the contrast curve comes from.
#[derive(Clone)]
pub enum ContrastKind {
    /// Mean of the curve itself; with squared loss this is the variance.
    ConstantMean,
    /// Constant at the target's own prediction.
    TargetPrediction,
    /// First-order expansion of the model around the target.
    Taylor(FiniteDifferenceStep),
    /// The model with a 0/1 attribute flipped.
    Flip(usize),
    /// An arbitrary second model.
    Model(ModelHandle),
}

impl fmt::Debug for ContrastKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContrastKind::ConstantMean => write!(f, "ConstantMean"),
            ContrastKind::TargetPrediction => write!(f, "TargetPrediction"),
            ContrastKind::Taylor(step) => write!(f, "Taylor({step:?})"),
            ContrastKind::Flip(a) => write!(f, "Flip({a})"),
            ContrastKind::Model(m) => write!(f, "Model({})", m.describe()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum UtilityKind {
    Contrast(ContrastKind),
    Property(FitKind),
}

/// Which utility to maximize.
#[derive(Debug, Clone)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub loss: Loss,
    /// Divide integrals by the interval length.
    pub normalize: bool,
}

impl UtilitySpec {
    pub fn new(kind: UtilityKind, loss: Loss) -> Self {
        UtilitySpec { kind, loss, normalize: true }
    }

    pub fn variance() -> Self {
        Self::new(UtilityKind::Contrast(ContrastKind::ConstantMean), Loss::Squared)
    }

    pub fn contrast(kind: ContrastKind, loss: Loss) -> Self {
        Self::new(UtilityKind::Contrast(kind), loss)
    }

    pub fn property(kind: FitKind, loss: Loss) -> Self {
        Self::new(UtilityKind::Property(kind), loss)
    }

    pub fn monotonicity() -> Self {
        Self::property(FitKind::Isotonic, Loss::Squared)
    }

    pub fn linearity() -> Self {
        Self::property(FitKind::Linear, Loss::Squared)
    }

    pub fn taylor() -> Self {
        Self::contrast(ContrastKind::Taylor(FiniteDifferenceStep::default()), Loss::Squared)
    }

    pub fn with_loss(mut self, loss: Loss) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            UtilityKind::Property(kind) => kind.validate(self.loss),
            UtilityKind::Contrast(_) => Ok(()),
        }
    }

    /// Short label such as `monotonic/squared`.
    pub fn label(&self) -> String {
        let name = match &self.kind {
            UtilityKind::Contrast(ContrastKind::ConstantMean) => "constant-mean".to_string(),
            UtilityKind::Contrast(ContrastKind::TargetPrediction) => "constant-contrast".to_string(),
            UtilityKind::Contrast(ContrastKind::Taylor(_)) => "taylor".to_string(),
            UtilityKind::Contrast(ContrastKind::Flip(a)) => format!("flip:{a}"),
            UtilityKind::Contrast(ContrastKind::Model(m)) => format!("model-contrast:{}", m.describe()),
            UtilityKind::Property(FitKind::ConstantMean) => "constant-mean-class".to_string(),
            UtilityKind::Property(FitKind::ConstantValue(c)) => format!("constant:{c}"),
            UtilityKind::Property(FitKind::Linear) => "linear".to_string(),
            UtilityKind::Property(FitKind::Isotonic) => "monotonic".to_string(),
            UtilityKind::Property(FitKind::Lipschitz(l)) => format!("lipschitz:{l}"),
        };
        format!("{name}/{}", self.loss.name())
    }

    /// Resolves contrast models that depend on the model and target.
    pub fn prepare(&self, m: &ModelHandle, target: Option<&Instance>) -> Result<PreparedUtility> {
        self.validate()?;
        let need_target = || {
            target.ok_or_else(|| {
                AdpError::UnsupportedCombination(format!("{} needs a target instance", self.label()))
            })
        };
        let contrast = match &self.kind {
            UtilityKind::Property(_) | UtilityKind::Contrast(ContrastKind::ConstantMean) => None,
            UtilityKind::Contrast(ContrastKind::TargetPrediction) => Some(constant_contrast(m, need_target()?)?),
            UtilityKind::Contrast(ContrastKind::Taylor(step)) => Some(taylor_contrast(m, need_target()?, *step)?),
            UtilityKind::Contrast(ContrastKind::Flip(attr)) => Some(flip_attribute_contrast(m, *attr)?),
            UtilityKind::Contrast(ContrastKind::Model(g)) => {
                if g.dim() != m.dim() {
                    return Err(AdpError::DimensionMismatch { expected: m.dim(), got: g.dim() });
                }
                Some(g.clone())
            }
        };
        Ok(PreparedUtility { spec: self.clone(), contrast })
    }
}

/// Utility of one direction together with the curves behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotEvaluation {
    pub utility: f64,
    pub curve: SampledCurve,
    /// Contrast curve or fitted reference on the same grid.
    pub reference: Vec<f64>,
}

/// A utility whose contrast model, if any, is fixed.
#[derive(Debug, Clone)]
pub struct PreparedUtility {
    spec: UtilitySpec,
    contrast: Option<ModelHandle>,
}

impl PreparedUtility {
    pub fn spec(&self) -> &UtilitySpec {
        &self.spec
    }

    pub fn contrast_model(&self) -> Option<&ModelHandle> {
        self.contrast.as_ref()
    }

    /// Samples `m` along `v` in `family` and scores the plot.
    pub fn evaluate(
        &self,
        family: &dyn CurveFamily,
        m: &ModelHandle,
        v: &Direction,
        k: usize,
    ) -> Result<PlotEvaluation> {
        let interval = family.interval(v)?;
        let k = family.grid_size(k, interval);
        let curve = family.sample(m, v, interval, k)?;
        self.score(family, v, curve)
    }

    /// Scores an already sampled curve of direction `v`.
    pub fn score(&self, family: &dyn CurveFamily, v: &Direction, curve: SampledCurve) -> Result<PlotEvaluation> {
        let loss = self.spec.loss;
        let (value, reference) = match (&self.spec.kind, &self.contrast) {
            (UtilityKind::Property(kind), _) => {
                let (u, fit) = property_utility(&curve, *kind, loss)?;
                (u, fit.hs)
            }
            (UtilityKind::Contrast(ContrastKind::ConstantMean), _) => {
                let fit = fit_constant_mean(&curve, loss)?;
                (fit.achieved_loss, fit.hs)
            }
            (UtilityKind::Contrast(_), Some(g)) => {
                let other = family.sample(g, v, curve.interval(), curve.len())?;
                (contrast_utility(&curve, &other, loss)?, other.fs().to_vec())
            }
            (UtilityKind::Contrast(_), None) => {
                return Err(AdpError::InvalidArgument("contrast model was not prepared".into()))
            }
        };
        let utility = if self.spec.normalize { value } else { value * curve.interval().length() };
        Ok(PlotEvaluation { utility, curve, reference })
    }
}
