//! Heralded amplification by single-photon catalysis.
//!
//! Mode A carries the signal `|α⟩` (the ensemble), mode B an auxiliary single
//! excitation. After a beam splitter with small transmission amplitude `t`,
//! a click in the readout of mode A leaves mode B in a state whose
//! one-excitation amplitude is enhanced relative to the vacuum amplitude by
//! about `1/t`, with success probability about `t²`.
//!
//! [`run_first_order`] evaluates the leading-order closed form;
//! [`run_exact`] simulates every order in the truncated Fock space, including
//! an imperfect single-photon source and an imperfect herald.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, fidelity, first_order_state, mix, number_state, tensor_product,
    tensor_product_density, to_density, ComplexAmplitude, Modes, PureState, State, C64,
    DEFAULT_CUTOFF,
};
use crate::optics::{herald_click, project_number, BeamSplitter, HeraldModel, Mode};

/// How the signal mode is prepared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// `(|0⟩ + α|1⟩)` normalized.
    Truncated,
    /// Full coherent state `|α⟩` up to the cutoff.
    Coherent,
}

/// Which evaluation of the protocol to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Exact,
    FirstOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub alpha: ComplexAmplitude,
    pub t: f64,
    pub cutoff: usize,
    pub input_kind: InputKind,
    /// Probability that the auxiliary source emits one photon rather than vacuum.
    pub source_efficiency: f64,
    pub herald: HeraldModel,
}

impl ProtocolConfig {
    /// Ideal protocol with the default cutoff and a truncated first-order input.
    pub fn new(alpha: ComplexAmplitude, t: f64) -> Self {
        Self {
            alpha,
            t,
            cutoff: DEFAULT_CUTOFF,
            input_kind: InputKind::Truncated,
            source_efficiency: 1.0,
            herald: HeraldModel::ideal(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(Error::Validation(format!("t must be in (0,1), got {}", self.t)));
        }
        if self.cutoff < 2 {
            return Err(Error::Validation(format!(
                "cutoff must be at least 2 for the two-photon block, got {}",
                self.cutoff
            )));
        }
        if !(0.0..=1.0).contains(&self.source_efficiency) {
            return Err(Error::Validation(format!(
                "source efficiency must be in [0,1], got {}",
                self.source_efficiency
            )));
        }
        self.herald.validate()
    }

    /// `|α| ≪ t ≪ 1`, read as `|α| ≤ t/3` and `t ≤ 1/3`.
    pub fn in_recommended_regime(&self) -> bool {
        recommended_regime(self.alpha, self.t)
    }
}

fn recommended_regime(alpha: ComplexAmplitude, t: f64) -> bool {
    alpha.abs() <= t / 3.0 && t <= 1.0 / 3.0
}

/// Leading-order predictions `p ≈ t²`, `gain ≈ 1/t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrder {
    pub p: f64,
    pub gain: f64,
}

impl LeadingOrder {
    pub fn for_t(t: f64) -> Self {
        Self { p: t * t, gain: 1.0 / t }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeraldResult {
    pub success_probability: f64,
    /// Normalized state of the optical mode after a herald click.
    pub conditional_state: State,
    /// `(|c₁|/|c₀|)` of the conditional state over the same ratio of the input.
    /// `None` when undefined (zero input amplitude or empty vacuum component).
    pub gain: Option<f64>,
    /// Overlap with `|0⟩ + (α/t)|1⟩`, normalized.
    pub fidelity_to_target: f64,
    pub leading_order: LeadingOrder,
    pub recommended_regime: bool,
    /// Probability mass discarded by the cutoff along the pipeline.
    pub truncation: f64,
}

impl HeraldResult {
    /// `√(ρ₁₁/ρ₀₀)` of the conditional state.
    pub fn amplitude_ratio(&self) -> Option<f64> {
        amplitude_ratio(&self.conditional_state)
    }
}

fn amplitude_ratio(state: &State) -> Option<f64> {
    let (p0, p1) = match state {
        State::Pure(s) => (s.amplitudes()[0].norm_sqr(), s.amplitudes()[1].norm_sqr()),
        State::Mixed(r) => (r.matrix()[(0, 0)].re, r.matrix()[(1, 1)].re),
    };
    if p0 > 0.0 {
        Some((p1.max(0.0) / p0).sqrt())
    } else {
        None
    }
}

fn target_state(alpha: ComplexAmplitude, t: f64, cutoff: usize) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
    amps[0] = C64::new(1.0, 0.0);
    amps[1] = alpha.value() / t;
    PureState::new(amps, cutoff, Modes::One)?.normalize()
}

/// Closed-form leading-order result: conditional state `∝ t|0⟩ + α|1⟩`,
/// `p = t² + |α|²` and gain exactly `1/t`.
pub fn run_first_order(alpha: ComplexAmplitude, t: f64) -> Result<HeraldResult> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Validation(format!("t must be in (0,1), got {t}")));
    }
    let amps = vec![C64::new(t, 0.0), alpha.value()];
    let raw = PureState::new(amps, 1, Modes::One)?;
    let p = raw.norm_sqr();
    let cond = raw.normalize()?;
    let target = target_state(alpha, t, 1)?;
    Ok(HeraldResult {
        success_probability: p,
        fidelity_to_target: fidelity(&cond, &target)?,
        conditional_state: State::Pure(cond),
        gain: Some(1.0 / t),
        leading_order: LeadingOrder::for_t(t),
        recommended_regime: recommended_regime(alpha, t),
        truncation: 0.0,
    })
}

/// Builds the signal-mode input state.
pub fn signal_state(alpha: ComplexAmplitude, kind: InputKind, cutoff: usize) -> Result<PureState> {
    match kind {
        InputKind::Truncated => first_order_state(alpha, cutoff),
        InputKind::Coherent => coherent_state(alpha, cutoff),
    }
}

/// Full simulation of state preparation, beam splitter and herald.
pub fn run_exact(config: &ProtocolConfig) -> Result<HeraldResult> {
    config.validate()?;
    let cutoff = config.cutoff;
    let signal = signal_state(config.alpha, config.input_kind, cutoff)?;
    let bs = BeamSplitter::new(config.t)?;
    let herald = &config.herald;

    let projection = if config.source_efficiency == 1.0 && herald.is_ideal() {
        let input = tensor_product(&signal, &number_state(1, cutoff)?)?;
        let out = bs.apply_pure(&input)?;
        project_number(&State::Pure(out), herald.mode, 1)?
    } else {
        let p1 = config.source_efficiency;
        let source = mix(
            &[p1, 1.0 - p1],
            &[to_density(&number_state(1, cutoff)?), to_density(&number_state(0, cutoff)?)],
        )?;
        let input = tensor_product_density(&to_density(&signal), &source)?;
        let out = bs.apply_density(&input)?;
        herald_click(&out, herald)?
    };

    let input_ratio = config.alpha.abs();
    let gain = match amplitude_ratio(&projection.conditional) {
        Some(r) if input_ratio > 0.0 => Some(r / input_ratio),
        _ => None,
    };
    let target = target_state(config.alpha, config.t, cutoff)?;
    Ok(HeraldResult {
        success_probability: projection.probability,
        gain,
        fidelity_to_target: fidelity(&projection.conditional, &target)?,
        truncation: projection.conditional.truncation(),
        conditional_state: projection.conditional,
        leading_order: LeadingOrder::for_t(config.t),
        recommended_regime: config.in_recommended_regime(),
    })
}

/// Runs either evaluation of the protocol.
pub fn run(config: &ProtocolConfig, model: Model) -> Result<HeraldResult> {
    match model {
        Model::Exact => run_exact(config),
        Model::FirstOrder => {
            config.validate()?;
            run_first_order(config.alpha, config.t)
        }
    }
}

/// Parameters that a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Alpha,
    AlphaIm,
    T,
    /// Sets `t = 1/value`.
    InvT,
    P1,
    EtaR,
    PD,
    Cutoff,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::AlphaIm => "alpha_im",
            Axis::T => "t",
            Axis::InvT => "inv_t",
            Axis::P1 => "p1",
            Axis::EtaR => "eta_r",
            Axis::PD => "p_d",
            Axis::Cutoff => "cutoff",
        }
    }

    pub fn from_name(name: &str) -> Option<Axis> {
        Some(match name {
            "alpha" | "alpha_re" => Axis::Alpha,
            "alpha_im" => Axis::AlphaIm,
            "t" => Axis::T,
            "inv_t" => Axis::InvT,
            "p1" | "source_eff" => Axis::P1,
            "eta_r" | "read_eff" => Axis::EtaR,
            "p_d" | "dark_count" => Axis::PD,
            "cutoff" => Axis::Cutoff,
            _ => return None,
        })
    }

    fn apply(self, config: &mut ProtocolConfig, value: f64) -> Result<()> {
        match self {
            Axis::Alpha => config.alpha = ComplexAmplitude::new(value, config.alpha.im())?,
            Axis::AlphaIm => config.alpha = ComplexAmplitude::new(config.alpha.re(), value)?,
            Axis::T => config.t = value,
            Axis::InvT => config.t = 1.0 / value,
            Axis::P1 => config.source_efficiency = value,
            Axis::EtaR => config.herald.read_efficiency = value,
            Axis::PD => config.herald.dark_count = value,
            Axis::Cutoff => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= 64.0) {
                    return Err(Error::Validation(format!("cutoff must be an integer in 0..=64, got {value}")));
                }
                config.cutoff = value as usize;
            }
        }
        Ok(())
    }
}

/// Declared axes; the first axis varies slowest.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepGrid {
    axes: Vec<(Axis, Vec<f64>)>,
}

impl SweepGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis(mut self, axis: Axis, values: Vec<f64>) -> Self {
        self.axes.push((axis, values));
        self
    }

    pub fn push(&mut self, axis: Axis, values: Vec<f64>) {
        self.axes.push((axis, values));
    }

    pub fn axes(&self) -> &[(Axis, Vec<f64>)] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of grid point `index` in row-major order.
    fn point(&self, mut index: usize) -> Vec<(Axis, f64)> {
        let mut out = vec![(Axis::T, 0.0); self.axes.len()];
        for (slot, (axis, values)) in self.axes.iter().enumerate().rev() {
            out[slot] = (*axis, values[index % values.len()]);
            index /= values.len();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub config: ProtocolConfig,
    pub result: Result<HeraldResult>,
}

/// Evaluates every grid point; failures are kept in their row.
pub fn sweep(base: &ProtocolConfig, grid: &SweepGrid, model: Model) -> Vec<SweepRow> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut config = *base;
            let applied = grid
                .point(i)
                .into_iter()
                .try_for_each(|(axis, v)| axis.apply(&mut config, v));
            let result = applied.and_then(|_| run(&config, model));
            SweepRow { config, result }
        })
        .collect()
}

/// Flat record of one sweep row in the documented column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub t: f64,
    pub p1: f64,
    pub eta_r: f64,
    pub p_d: f64,
    pub cutoff: usize,
    pub success_prob: Option<f64>,
    pub gain: Option<f64>,
    pub fidelity: Option<f64>,
    pub leading_p: f64,
    pub leading_gain: f64,
    pub error_code: String,
}

impl ResultRow {
    pub const COLUMNS: [&'static str; 13] = [
        "alpha_re", "alpha_im", "t", "p1", "eta_r", "p_d", "cutoff", "success_prob", "gain",
        "fidelity", "leading_p", "leading_gain", "error_code",
    ];

    pub fn new(config: &ProtocolConfig, result: &Result<HeraldResult>) -> Self {
        let leading = LeadingOrder::for_t(config.t);
        let (p, gain, fid, code) = match result {
            Ok(r) => (Some(r.success_probability), r.gain, Some(r.fidelity_to_target), String::new()),
            Err(e) => (None, None, None, e.code().to_string()),
        };
        Self {
            alpha_re: config.alpha.re(),
            alpha_im: config.alpha.im(),
            t: config.t,
            p1: config.source_efficiency,
            eta_r: config.herald.read_efficiency,
            p_d: config.herald.dark_count,
            cutoff: config.cutoff,
            success_prob: p,
            gain,
            fidelity: fid,
            leading_p: leading.p,
            leading_gain: leading.gain,
            error_code: code,
        }
    }
}

impl From<&SweepRow> for ResultRow {
    fn from(row: &SweepRow) -> Self {
        ResultRow::new(&row.config, &row.result)
    }
}

/// Herald on the atomic mode, as used by the protocol.
pub fn protocol_herald(read_efficiency: f64, dark_count: f64, resolving: bool) -> Result<HeraldModel> {
    HeraldModel::new(read_efficiency, dark_count, Mode::A, resolving)
}
