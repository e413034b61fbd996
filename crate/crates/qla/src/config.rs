//! JSON model files.

use std::path::Path;

use qla_core::{Distribution, Family, QueueModel};
use serde::Deserialize;

use crate::CliError;

/// A distribution as written in a model file, e.g.
/// `{"family":"erlang","shape":2,"rate":0.5}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Exponential {
        rate: f64,
    },
    Erlang {
        shape: u32,
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    #[serde(alias = "hyper_exponential")]
    Hyperexponential {
        weights: Vec<f64>,
        rates: Vec<f64>,
    },
    Pareto {
        alpha: f64,
        scale: f64,
    },
    Zero,
}

impl DistSpec {
    pub fn build(&self) -> qla_core::Result<Distribution> {
        let family = match self.clone() {
            DistSpec::Exponential { rate } => Family::Exponential { rate },
            DistSpec::Erlang { shape, rate } => Family::Erlang { shape, rate },
            DistSpec::Deterministic { value } => Family::Deterministic { value },
            DistSpec::Hyperexponential { weights, rates } => Family::HyperExponential { weights, rates },
            DistSpec::Pareto { alpha, scale } => Family::Pareto { alpha, scale },
            DistSpec::Zero => Family::Zero,
        };
        Distribution::new(family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueKind {
    /// M/G/1/N with exhaustive service and multiple vacations.
    #[default]
    Mg1nVacation,
    /// Standard M/G/1/N; the vacation must be zero or absent.
    Mg1n,
    /// GI/M/1/N: `service` is the interarrival law and `arrival_rate` is
    /// the service rate μ.
    Gim1n,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub arrival_rate: f64,
    pub service: DistSpec,
    #[serde(default = "zero_spec")]
    pub vacation: DistSpec,
    #[serde(default)]
    pub queue_kind: QueueKind,
}

fn zero_spec() -> DistSpec {
    DistSpec::Zero
}

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// M/G/1/N, with or without vacations.
    Mg1(QueueModel),
    Gim1 {
        interarrival: Distribution,
        mu: f64,
    },
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn build(&self) -> Result<Model, CliError> {
        let service = self.service.build()?;
        let vacation = self.vacation.build()?;
        match self.queue_kind {
            QueueKind::Mg1nVacation => Ok(Model::Mg1(QueueModel::new(self.arrival_rate, service, vacation)?)),
            QueueKind::Mg1n | QueueKind::Gim1n if !vacation.is_zero() => {
                Err(CliError::Config("queue_kind without vacations needs a zero vacation".into()))
            }
            QueueKind::Mg1n => Ok(Model::Mg1(QueueModel::standard(self.arrival_rate, service)?)),
            QueueKind::Gim1n => {
                let mu = self.arrival_rate;
                if !(mu.is_finite() && mu > 0.0) {
                    return Err(CliError::Config(format!("service rate must be positive, got {mu}")));
                }
                if service.is_zero() {
                    return Err(CliError::Config("interarrival law must have positive mean".into()));
                }
                Ok(Model::Gim1 { interarrival: service, mu })
            }
        }
    }
}
