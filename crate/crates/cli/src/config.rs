//! Campaign configuration files (TOML), keyed by the `CampaignConfig` field names.
//!
//! ```toml
//! scheme = "amplified"
//! true_alpha = 0.01
//! run_period = 0.1        # optional, seconds
//! total_time = 100000.0
//! replicas = 32
//!
//! [protocol]
//! t = 0.1
//! cutoff = 12                     # optional
//! input_kind = "truncated"        # optional
//! source_efficiency = 1.0         # optional
//!
//! [protocol.herald]               # optional, ideal by default
//! read_efficiency = 1.0
//! dark_count = 0.0
//! resolving = true
//!
//! [noise]
//! kind = "white"
//! sigma_tech = 0.0
//! ```

use hal_core::fock::{ComplexAmplitude, DEFAULT_CUTOFF};
use hal_core::metrology::{CampaignConfig, NoiseKind, NoiseModel, Scheme};
use hal_core::protocol::{protocol_herald, InputKind, ProtocolConfig};
use serde::Deserialize;

pub const DEFAULT_RUN_PERIOD: f64 = 0.1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignFile {
    scheme: Option<Scheme>,
    protocol: Option<ProtocolSection>,
    true_alpha: Option<f64>,
    run_period: Option<f64>,
    total_time: Option<f64>,
    noise: Option<NoiseSection>,
    seed: Option<u64>,
    replicas: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolSection {
    t: Option<f64>,
    cutoff: Option<usize>,
    input_kind: Option<InputKind>,
    source_efficiency: Option<f64>,
    herald: Option<HeraldSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeraldSection {
    read_efficiency: Option<f64>,
    dark_count: Option<f64>,
    resolving: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    kind: Option<NoiseKind>,
    sigma_tech: Option<f64>,
    lambda: Option<f64>,
    offset: Option<f64>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, String> {
    v.ok_or_else(|| format!("missing field `{name}`"))
}

/// Parses a campaign file; `seed` comes from the command line and must agree with the file if present.
pub fn parse_campaign(text: &str, seed: u64) -> Result<CampaignConfig, String> {
    let file: CampaignFile = toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())?;
    let section = required(file.protocol, "protocol")?;
    let herald = match section.herald {
        None => protocol_herald(1.0, 0.0, true),
        Some(h) => protocol_herald(
            h.read_efficiency.unwrap_or(1.0),
            h.dark_count.unwrap_or(0.0),
            h.resolving.unwrap_or(true),
        ),
    }
    .map_err(|e| e.to_string())?;
    let true_alpha = required(file.true_alpha, "true_alpha")?;
    let protocol = ProtocolConfig {
        alpha: ComplexAmplitude::real(true_alpha).map_err(|e| e.to_string())?,
        t: required(section.t, "protocol.t")?,
        cutoff: section.cutoff.unwrap_or(DEFAULT_CUTOFF),
        input_kind: section.input_kind.unwrap_or(InputKind::Truncated),
        source_efficiency: section.source_efficiency.unwrap_or(1.0),
        herald,
    };
    let noise = required(file.noise, "noise")?;
    let noise = NoiseModel {
        kind: required(noise.kind, "noise.kind")?,
        sigma_tech: noise.sigma_tech.unwrap_or(0.0),
        lambda: noise.lambda.unwrap_or(0.0),
        offset: noise.offset.unwrap_or(0.0),
    };
    if let Some(s) = file.seed {
        if s != seed {
            return Err(format!("field `seed` = {s} conflicts with --seed {seed}"));
        }
    }
    Ok(CampaignConfig {
        scheme: required(file.scheme, "scheme")?,
        protocol,
        true_alpha,
        run_period: file.run_period.unwrap_or(DEFAULT_RUN_PERIOD),
        total_time: required(file.total_time, "total_time")?,
        noise,
        seed,
        replicas: required(file.replicas, "replicas")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
scheme = "direct"
true_alpha = 0.01
total_time = 10.0
replicas = 2
[protocol]
t = 0.1
[noise]
kind = "ar1"
sigma_tech = 0.1
lambda = 0.9
"#;

    #[test]
    fn parses_with_defaults() {
        let c = parse_campaign(FULL, 5).unwrap();
        assert_eq!(c.scheme, Scheme::Direct);
        assert_eq!(c.run_period, 0.1);
        assert_eq!(c.attempts(), 100);
        assert_eq!(c.noise, NoiseModel::ar1(0.1, 0.9));
        assert_eq!(c.protocol.cutoff, 12);
        assert_eq!(c.seed, 5);
    }

    #[test]
    fn missing_fields_are_named() {
        let e = parse_campaign(&FULL.replace("replicas = 2\n", ""), 5).unwrap_err();
        assert!(e.contains("`replicas`"), "{e}");
        let e = parse_campaign(&FULL.replace("t = 0.1\n", ""), 5).unwrap_err();
        assert!(e.contains("`protocol.t`"), "{e}");
        let e = parse_campaign(&FULL.replace("kind = \"ar1\"\n", ""), 5).unwrap_err();
        assert!(e.contains("`noise.kind`"), "{e}");
    }

    #[test]
    fn rejects_unknown_fields_and_seed_conflicts() {
        assert!(parse_campaign(&format!("{FULL}\nextra = 1\n"), 5).is_err());
        let with_seed = format!("seed = 4\n{FULL}");
        assert!(parse_campaign(&with_seed, 5).unwrap_err().contains("seed"));
        assert!(parse_campaign(&with_seed, 4).is_ok());
    }
}
