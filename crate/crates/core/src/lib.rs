//! Automated directional dependence plots.
//!
//! Given a black-box scoring function, find sparse directions along which the
//! model's dependence plot is most interesting under a chosen utility, and
//! produce the sampled curve and its reference fit for rendering.

pub mod bounds;
pub mod curves;
pub mod direction;
pub mod error;
pub mod fits;
pub mod harness;
pub mod models;
pub mod optimizer;
pub mod spaces;
pub mod types;
pub mod utilities;

pub use bounds::{line_box_interval, line_density_interval, plot_interval, BoxBound, GaussianDensity, PlotBounds};
pub use curves::{
    instance_curve, latent_curve, pdp_curve, transform_curve, CurveFamily, InstancePlot, LatentPlot, PdpPlot,
    TransformPlot,
};
pub use direction::{Direction, ZERO_TOL};
pub use error::{AdpError, Result};
pub use fits::{FitKind, ReferenceFit};
pub use models::{ConcurrencyClass, Model, ModelHandle};
pub use optimizer::{
    best_axis_direction, gcp_optimize, optimize_over_instances, random_direction_baseline, GcpConfig, GcpResult,
    GcpTrace, Objective,
};
pub use types::{Dataset, Instance, Interval, SampledCurve};
pub use utilities::{ContrastKind, Loss, UtilityKind, UtilitySpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
