//! Monte Carlo estimation campaigns at a fixed total measurement time.
//!
//! Every attempt occupies one run period. The direct scheme measures the
//! signal quadrature on every attempt; the amplified scheme measures only
//! after a herald click. Technical noise advances on every attempt, so the
//! amplified scheme samples a correlated noise process sparsely.
//!
//! Each replica draws from three ChaCha20 streams derived from the campaign
//! seed: herald decisions, quadrature outcomes and noise. The noise stream
//! does not depend on the scheme, so a direct and an amplified campaign with
//! the same seed see the same noise trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::homodyne::{quadrature_pdf, Grid, HomodyneSampler};
use super::noise::{NoiseModel, NoiseProcess};
use super::{estimate_alpha, Scheme};
use crate::error::{Error, Result};
use crate::fock::{ComplexAmplitude, State};
use crate::protocol::{run_exact, signal_state, ProtocolConfig};

const STREAMS_PER_REPLICA: u64 = 3;
const HERALD_STREAM: u64 = 0;
const QUADRATURE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub scheme: Scheme,
    /// Protocol settings; `alpha` is replaced by `true_alpha`. The direct scheme uses only
    /// `input_kind` and `cutoff`.
    pub protocol: ProtocolConfig,
    pub true_alpha: f64,
    /// Seconds per attempt.
    pub run_period: f64,
    /// Seconds available for the whole campaign.
    pub total_time: f64,
    pub noise: NoiseModel,
    pub seed: u64,
    pub replicas: usize,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.run_period > 0.0 && self.run_period.is_finite()) {
            return Err(Error::Validation(format!("run_period must be positive, got {}", self.run_period)));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::Validation(format!("total_time must be positive, got {}", self.total_time)));
        }
        if self.replicas == 0 {
            return Err(Error::Validation("replicas must be at least 1".into()));
        }
        if !self.true_alpha.is_finite() {
            return Err(Error::Validation("true_alpha must be finite".into()));
        }
        if self.attempts() == 0 {
            return Err(Error::Validation("total_time is shorter than one run period".into()));
        }
        self.noise.validate()?;
        self.effective_protocol()?.validate()
    }

    /// `R = floor(total_time / run_period)`, tolerant to the last-ulp rounding of the quotient.
    pub fn attempts(&self) -> u64 {
        (self.total_time / self.run_period * (1.0 + 1e-12)).floor() as u64
    }

    fn effective_protocol(&self) -> Result<ProtocolConfig> {
        let mut p = self.protocol;
        p.alpha = ComplexAmplitude::real(self.true_alpha)?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub scheme: Scheme,
    /// Attempts per replica.
    pub attempts: u64,
    pub replicas: usize,
    /// Heralded (sampled) runs summed over replicas.
    pub successes: u64,
    pub successes_per_replica: Vec<u64>,
    /// Per-attempt probability of a measured run.
    pub success_probability: f64,
    /// Per-replica estimates; `None` for replicas without a single success.
    pub estimates: Vec<Option<f64>>,
    pub no_success_replicas: usize,
    pub estimate_mean: Option<f64>,
    pub bias: Option<f64>,
    /// Population variance of the estimates.
    pub variance: Option<f64>,
    pub rmse: Option<f64>,
    /// Model time of one replica, `R · run_period` seconds.
    pub elapsed_model_time: f64,
}

impl CampaignSummary {
    pub fn no_success(&self) -> bool {
        self.no_success_replicas > 0
    }
}

/// One attempt of one replica.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub replica: usize,
    pub attempt_index: u64,
    pub heralded: bool,
    /// Noisy quadrature outcome; absent when the attempt was not heralded.
    pub x_sample: Option<f64>,
    pub noise_value: f64,
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignSummary> {
    run_inner(config, false).map(|(s, _)| s)
}

/// Like [`run_campaign`], also returning every attempt in replica-then-time order.
pub fn run_campaign_recorded(config: &CampaignConfig) -> Result<(CampaignSummary, Vec<RunRecord>)> {
    run_inner(config, true)
}

fn replica_rng(seed: u64, replica: usize, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64 * STREAMS_PER_REPLICA + stream);
    rng
}

struct ReplicaOutcome {
    estimate: Option<f64>,
    successes: u64,
    records: Vec<RunRecord>,
}

fn run_inner(config: &CampaignConfig, record: bool) -> Result<(CampaignSummary, Vec<RunRecord>)> {
    config.validate()?;
    let protocol = config.effective_protocol()?;
    let (measured_state, success_probability): (State, f64) = match config.scheme {
        Scheme::Direct => (
            State::Pure(signal_state(protocol.alpha, protocol.input_kind, protocol.cutoff)?),
            1.0,
        ),
        Scheme::Amplified => {
            let r = run_exact(&protocol)?;
            (r.conditional_state, r.success_probability)
        }
    };
    let pdf = quadrature_pdf(&measured_state, 0.0, &Grid::default())?;
    let sampler = HomodyneSampler::new(&pdf);
    let attempts = config.attempts();

    let outcomes: Vec<ReplicaOutcome> = (0..config.replicas)
        .into_par_iter()
        .map(|replica| {
            let mut herald_rng = replica_rng(config.seed, replica, HERALD_STREAM);
            let mut quad_rng = replica_rng(config.seed, replica, QUADRATURE_STREAM);
            let mut noise_rng = replica_rng(config.seed, replica, NOISE_STREAM);
            let mut noise = NoiseProcess::new(config.noise);
            let mut samples = Vec::new();
            let mut records = Vec::new();
            for k in 0..attempts {
                let w = noise.next_value(&mut noise_rng);
                let heralded = match config.scheme {
                    Scheme::Direct => true,
                    Scheme::Amplified => herald_rng.random::<f64>() < success_probability,
                };
                let x = heralded.then(|| sampler.sample(&mut quad_rng) + w);
                if let Some(x) = x {
                    samples.push(x);
                }
                if record {
                    records.push(RunRecord {
                        replica,
                        attempt_index: k,
                        heralded,
                        x_sample: x,
                        noise_value: w,
                    });
                }
            }
            ReplicaOutcome {
                estimate: estimate_alpha(&samples, config.scheme, protocol.t).ok(),
                successes: samples.len() as u64,
                records,
            }
        })
        .collect();

    let estimates: Vec<Option<f64>> = outcomes.iter().map(|o| o.estimate).collect();
    let successes_per_replica: Vec<u64> = outcomes.iter().map(|o| o.successes).collect();
    let valid: Vec<f64> = estimates.iter().flatten().copied().collect();
    let (estimate_mean, bias, variance, rmse) = if valid.is_empty() {
        (None, None, None, None)
    } else {
        let n = valid.len() as f64;
        let mean = valid.iter().sum::<f64>() / n;
        let var = valid.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
        let mse = valid.iter().map(|e| (e - config.true_alpha).powi(2)).sum::<f64>() / n;
        (Some(mean), Some(mean - config.true_alpha), Some(var), Some(mse.sqrt()))
    };
    let summary = CampaignSummary {
        scheme: config.scheme,
        attempts,
        replicas: config.replicas,
        successes: successes_per_replica.iter().sum(),
        no_success_replicas: estimates.iter().filter(|e| e.is_none()).count(),
        successes_per_replica,
        success_probability,
        estimates,
        estimate_mean,
        bias,
        variance,
        rmse,
        elapsed_model_time: attempts as f64 * config.run_period,
    };
    let records = outcomes.into_iter().flat_map(|o| o.records).collect();
    Ok((summary, records))
}

/// Expected model time to collect heralded points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget {
    pub success_probability: f64,
    pub run_period: f64,
    pub expected_attempts_per_point: f64,
    pub seconds_per_point: f64,
    pub target_points: u64,
    pub total_seconds: f64,
}

/// Time budget with the success probability taken from [`run_exact`].
pub fn time_budget(protocol: &ProtocolConfig, run_period: f64, target_points: u64) -> Result<TimeBudget> {
    let p = run_exact(protocol)?.success_probability;
    time_budget_for_probability(p, run_period, target_points)
}

/// `T_run / p` seconds per heralded point.
pub fn time_budget_for_probability(p: f64, run_period: f64, target_points: u64) -> Result<TimeBudget> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Validation(format!("success probability must be in (0,1], got {p}")));
    }
    if !(run_period > 0.0 && run_period.is_finite()) {
        return Err(Error::Validation(format!("run period must be positive, got {run_period}")));
    }
    let per_point = run_period / p;
    Ok(TimeBudget {
        success_probability: p,
        run_period,
        expected_attempts_per_point: 1.0 / p,
        seconds_per_point: per_point,
        target_points,
        total_seconds: per_point * target_points as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::NoiseModel;

    fn config(scheme: Scheme, total_time: f64) -> CampaignConfig {
        CampaignConfig {
            scheme,
            protocol: ProtocolConfig::new(ComplexAmplitude::zero(), 0.1),
            true_alpha: 0.01,
            run_period: 0.1,
            total_time,
            noise: NoiseModel::none(),
            seed: 7,
            replicas: 4,
        }
    }

    #[test]
    fn attempts_from_budget() {
        assert_eq!(config(Scheme::Direct, 1e5).attempts(), 1_000_000);
        assert_eq!(config(Scheme::Direct, 0.35).attempts(), 3);
        assert!(config(Scheme::Direct, 0.05).validate().is_err());
    }

    #[test]
    fn summary_identities() {
        let s = run_campaign(&config(Scheme::Amplified, 1000.0)).unwrap();
        assert_eq!(s.attempts, 10_000);
        assert!(s.successes <= s.attempts * s.replicas as u64);
        let (b, v, r) = (s.bias.unwrap(), s.variance.unwrap(), s.rmse.unwrap());
        assert!((r * r - (b * b + v)).abs() < 1e-12);
        assert!((s.elapsed_model_time - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_under_seed() {
        let c = config(Scheme::Amplified, 500.0);
        assert_eq!(run_campaign(&c).unwrap(), run_campaign(&c).unwrap());
        let mut other = c;
        other.seed = 8;
        assert_ne!(run_campaign(&c).unwrap().estimates, run_campaign(&other).unwrap().estimates);
    }

    #[test]
    fn no_success_is_flagged() {
        let mut c = config(Scheme::Amplified, 0.3);
        c.protocol.t = 0.001;
        let s = run_campaign(&c).unwrap();
        assert!(s.no_success());
        assert_eq!(s.rmse, None);
    }

    #[test]
    fn records_follow_timeline() {
        let mut c = config(Scheme::Amplified, 20.0);
        c.replicas = 2;
        c.noise = NoiseModel::ar1(0.1, 0.9);
        let (s, rec) = run_campaign_recorded(&c).unwrap();
        assert_eq!(rec.len(), 400);
        assert_eq!(rec[200].replica, 1);
        assert_eq!(rec[200].attempt_index, 0);
        assert_eq!(rec.iter().filter(|r| r.heralded).count() as u64, s.successes);
        assert_eq!(run_campaign(&c).unwrap(), s);
    }

    #[test]
    fn noise_stream_shared_between_schemes() {
        let mut d = config(Scheme::Direct, 5.0);
        d.noise = NoiseModel::ar1(0.2, 0.5);
        let mut a = d;
        a.scheme = Scheme::Amplified;
        let (_, rd) = run_campaign_recorded(&d).unwrap();
        let (_, ra) = run_campaign_recorded(&a).unwrap();
        let nd: Vec<f64> = rd.iter().map(|r| r.noise_value).collect();
        let na: Vec<f64> = ra.iter().map(|r| r.noise_value).collect();
        assert_eq!(nd, na);
    }

    #[test]
    fn time_budget_arithmetic() {
        let b = time_budget_for_probability(1.0 / 900.0, 0.1, 1).unwrap();
        assert!((b.seconds_per_point - 90.0).abs() < 1e-9);
        let b = time_budget_for_probability(1.0, 0.1, 3).unwrap();
        assert_eq!(b.seconds_per_point, 0.1);
        assert!((b.total_seconds - 0.3).abs() < 1e-15);
        assert!(time_budget_for_probability(0.0, 0.1, 1).is_err());
        let p = ProtocolConfig::new(ComplexAmplitude::real(0.01).unwrap(), 0.1);
        let b = time_budget(&p, 0.1, 1).unwrap();
        assert!((b.seconds_per_point - 10.0).abs() < 0.2);
    }
}
