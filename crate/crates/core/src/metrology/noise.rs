//! Additive technical noise on quadrature outcomes, in run order.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Independent Gaussian noise per run.
    White,
    /// Stationary first-order autoregressive noise.
    Ar1,
    /// Constant offset.
    Systematic,
}

/// Technical noise in quadrature units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    #[serde(default)]
    pub sigma_tech: f64,
    /// AR(1) coefficient; ignored by the other kinds.
    #[serde(default)]
    pub lambda: f64,
    /// Systematic offset `b`.
    #[serde(default)]
    pub offset: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { kind: NoiseKind::White, sigma_tech: 0.0, lambda: 0.0, offset: 0.0 }
    }

    pub fn white(sigma_tech: f64) -> Self {
        Self { sigma_tech, ..Self::none() }
    }

    pub fn ar1(sigma_tech: f64, lambda: f64) -> Self {
        Self { kind: NoiseKind::Ar1, sigma_tech, lambda, offset: 0.0 }
    }

    pub fn systematic(offset: f64) -> Self {
        Self { kind: NoiseKind::Systematic, sigma_tech: 0.0, lambda: 0.0, offset }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_tech >= 0.0 && self.sigma_tech.is_finite()) {
            return Err(Error::Validation(format!("sigma_tech must be >= 0, got {}", self.sigma_tech)));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::Validation(format!("lambda must be in [0,1), got {}", self.lambda)));
        }
        if !self.offset.is_finite() {
            return Err(Error::Validation("offset must be finite".into()));
        }
        Ok(())
    }

    /// `τ = −1/ln λ` in run periods (zero for uncorrelated noise).
    pub fn correlation_time(&self) -> f64 {
        match self.kind {
            NoiseKind::Ar1 if self.lambda > 0.0 => -1.0 / self.lambda.ln(),
            NoiseKind::Systematic => f64::INFINITY,
            _ => 0.0,
        }
    }
}

/// Stateful noise generator; one value per run.
#[derive(Clone, Debug)]
pub struct NoiseProcess {
    model: NoiseModel,
    last: Option<f64>,
}

impl NoiseProcess {
    pub fn new(model: NoiseModel) -> Self {
        Self { model, last: None }
    }

    pub fn next_value<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let m = &self.model;
        match m.kind {
            NoiseKind::Systematic => m.offset,
            // noiseless: no draws, so the stream stays untouched
            _ if m.sigma_tech == 0.0 => 0.0,
            NoiseKind::White => {
                let xi: f64 = rng.sample(StandardNormal);
                m.sigma_tech * xi
            }
            NoiseKind::Ar1 => {
                let xi: f64 = rng.sample(StandardNormal);
                let w = match self.last {
                    // stationary start
                    None => m.sigma_tech * xi,
                    Some(prev) => m.lambda * prev + (1.0 - m.lambda * m.lambda).sqrt() * m.sigma_tech * xi,
                };
                self.last = Some(w);
                w
            }
        }
    }
}

/// Adds noise to `samples`, treating slice order as run order.
pub fn apply_noise<R: Rng + ?Sized>(samples: &[f64], model: &NoiseModel, rng: &mut R) -> Result<Vec<f64>> {
    model.validate()?;
    let mut process = NoiseProcess::new(*model);
    Ok(samples.iter().map(|x| x + process.next_value(rng)).collect())
}
