//! Homodyne readout, technical noise and fixed-time estimation campaigns.

pub mod campaign;
pub mod homodyne;
pub mod noise;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use campaign::{
    run_campaign, run_campaign_recorded, time_budget, time_budget_for_probability, CampaignConfig,
    CampaignSummary, RunRecord, TimeBudget,
};
pub use homodyne::{quadrature_pdf, sample_homodyne, Grid, HomodyneSampler, QuadratureConvention, QuadraturePdf};
pub use noise::{apply_noise, NoiseKind, NoiseModel, NoiseProcess};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Homodyne on every run, no amplification.
    Direct,
    /// Homodyne on heralded runs only.
    Amplified,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Direct => "direct",
            Scheme::Amplified => "amplified",
        }
    }
}

/// Estimate of a real `α` from X-quadrature outcomes.
///
/// Direct: `mean/√2`. Amplified: `t · mean/√2`, i.e. the leading-order gain `1/t` is divided out.
pub fn estimate_alpha(samples: &[f64], scheme: Scheme, t: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::NoSuccess("no quadrature samples to estimate from".into()));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let direct = mean / QuadratureConvention::MEAN_SCALE;
    Ok(match scheme {
        Scheme::Direct => direct,
        Scheme::Amplified => t * direct,
    })
}
