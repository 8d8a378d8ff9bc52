//! Model URIs and utility names.
//!
//! Models: `builtin:<name>[:<paramfile>]`, `cmd:<shell command>`, `http:<url>`.
//! Utilities: `variance`, `constant-contrast`, `linear`, `monotonic`,
//! `lipschitz:<L>`, `model-contrast:<model-uri>`, `taylor`, `flip:<feature>`.

use adp_core::fits::FitKind;
use adp_core::models::{
    make_random_nonmonotone_model, FiniteDifferenceStep, HttpScorer, LinearModel, QuadraticModel,
    RandomNonMonotoneModel, SubprocessScorer, SyntheticSinModel,
};
use adp_core::{AdpError, ContrastKind, Loss, ModelHandle, UtilitySpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

fn read_json<T: DeserializeOwned>(path: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NonMonotoneParams {
    Seeded { seed: u64, support_size: usize },
    Explicit(RandomNonMonotoneModel),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SinParams {
    Seeded {
        seed: u64,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
    Explicit(SyntheticSinModel),
}

fn unit_scale() -> f64 {
    1.0
}

/// Builds the model named by `uri` for `dim` features.
pub fn parse_model(uri: &str, dim: usize) -> CliResult<ModelHandle> {
    let handle = if let Some(rest) = uri.strip_prefix("builtin:") {
        let (name, file) = match rest.split_once(':') {
            Some((n, f)) => (n, Some(f)),
            None => (rest, None),
        };
        let need = || file.ok_or_else(|| CliError::Config(format!("builtin:{name} needs a parameter file")));
        match name {
            "linear" => {
                let m: LinearModel = read_json(need()?)?;
                ModelHandle::new(m)
            }
            "quadratic" => {
                let m: QuadraticModel = read_json(need()?)?;
                m.validate()?;
                ModelHandle::new(m)
            }
            "sin" => {
                let m = match file {
                    Some(f) => match read_json::<SinParams>(f)? {
                        SinParams::Seeded { seed, scale } => SyntheticSinModel::random(seed, dim, scale)?,
                        SinParams::Explicit(m) => m,
                    },
                    None if dim >= 2 => SyntheticSinModel::new(vec![0.0; dim - 2]),
                    None => return Err(AdpError::DimensionMismatch { expected: 2, got: dim }.into()),
                };
                ModelHandle::new(m)
            }
            "nonmonotone" => {
                let m = match read_json::<NonMonotoneParams>(need()?)? {
                    NonMonotoneParams::Seeded { seed, support_size } => {
                        make_random_nonmonotone_model(seed, dim, support_size)?
                    }
                    NonMonotoneParams::Explicit(m) => {
                        RandomNonMonotoneModel::from_parts(m.dim, m.support, m.weights, m.polynomial, m.tail)?
                    }
                };
                ModelHandle::new(m)
            }
            other => return Err(CliError::Config(format!("unknown builtin model {other:?}"))),
        }
    } else if let Some(cmd) = uri.strip_prefix("cmd:") {
        ModelHandle::new(SubprocessScorer::spawn(cmd, dim)?)
    } else if uri.starts_with("http://") || uri.starts_with("https://") {
        ModelHandle::new(HttpScorer::new(uri, dim))
    } else if let Some(url) = uri.strip_prefix("http:") {
        ModelHandle::new(HttpScorer::new(url, dim))
    } else {
        return Err(CliError::Config(format!("unrecognized model URI {uri:?}")));
    };
    if handle.dim() != dim {
        return Err(AdpError::DimensionMismatch { expected: dim, got: handle.dim() }.into());
    }
    Ok(handle)
}

/// Parses a utility name; `feature_names` resolves `flip:<feature>`.
pub fn parse_utility(name: &str, loss: Loss, feature_names: &[String]) -> CliResult<UtilitySpec> {
    let spec = match name {
        "variance" => UtilitySpec::variance().with_loss(loss),
        "constant-contrast" => UtilitySpec::contrast(ContrastKind::TargetPrediction, loss),
        "linear" => UtilitySpec::property(FitKind::Linear, loss),
        "monotonic" => UtilitySpec::property(FitKind::Isotonic, loss),
        "taylor" => UtilitySpec::contrast(ContrastKind::Taylor(FiniteDifferenceStep::default()), loss),
        other => {
            if let Some(l) = other.strip_prefix("lipschitz:") {
                let l: f64 = l.parse().map_err(|_| CliError::Config(format!("bad Lipschitz constant in {other:?}")))?;
                UtilitySpec::property(FitKind::Lipschitz(l), loss)
            } else if let Some(uri) = other.strip_prefix("model-contrast:") {
                let g = parse_model(uri, feature_names.len())?;
                UtilitySpec::contrast(ContrastKind::Model(g), loss)
            } else if let Some(feature) = other.strip_prefix("flip:") {
                let idx = feature_names
                    .iter()
                    .position(|n| n == feature)
                    .ok_or_else(|| CliError::Config(format!("no feature named {feature:?}")))?;
                UtilitySpec::contrast(ContrastKind::Flip(idx), loss)
            } else {
                return Err(CliError::Config(format!("unknown utility {other:?}")));
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utilities_parse() {
        let names: Vec<String> = vec!["age".into(), "sex".into()];
        assert!(parse_utility("monotonic", Loss::Squared, &names).is_ok());
        assert!(parse_utility("lipschitz:2.5", Loss::Squared, &names).is_ok());
        assert!(matches!(
            parse_utility("lipschitz:2.5", Loss::Absolute, &names),
            Err(CliError::Core(AdpError::UnsupportedCombination(_)))
        ));
        assert!(matches!(parse_utility("lipschitz:-1", Loss::Squared, &names), Err(CliError::Core(_))));
        assert!(parse_utility("flip:sex", Loss::Squared, &names).is_ok());
        assert!(parse_utility("flip:income", Loss::Squared, &names).is_err());
        assert!(parse_utility("model-contrast:builtin:sin", Loss::Squared, &names).is_ok());
        assert!(parse_utility("wiggliness", Loss::Squared, &names).is_err());
    }

    #[test]
    fn models_parse() {
        assert_eq!(parse_model("builtin:sin", 4).unwrap().dim(), 4);
        assert!(parse_model("builtin:linear", 4).is_err());
        assert!(parse_model("builtin:forest", 4).is_err());
        assert!(parse_model("ftp://x", 4).is_err());
        assert_eq!(parse_model("http:localhost:1", 3).unwrap().describe(), "http:localhost:1/score");
        assert_eq!(parse_model("http://localhost:1/", 3).unwrap().describe(), "http:http://localhost:1/score");
    }
}
