//! Linear-optical channels and measurements on truncated two-mode states.
//!
//! Beam-splitter convention: with mode A first and mode B second, the
//! Heisenberg-picture transformation is `a → r·a + t·b`, `b → −t·a + r·b`,
//! generated by `U = exp(θ(a†b − a b†))` with `θ = arcsin t`. In the
//! one-excitation sector this sends `|0,1⟩ → t|1,0⟩ + r|0,1⟩`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    two_mode_index, DensityOperator, Modes, PureState, State, C64, DEFAULT_TAIL_THRESHOLD,
};

/// Probabilities below this are treated as impossible outcomes.
pub const IMPOSSIBLE_THRESHOLD: f64 = 1e-300;

/// One of the two modes. A is the atomic (signal) mode, B the optical mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    pub fn other(self) -> Mode {
        match self {
            Mode::A => Mode::B,
            Mode::B => Mode::A,
        }
    }
}

/// Index of the two-mode basis element with `own` quanta in `mode` and `rest` in the other.
#[inline]
fn index_for(mode: Mode, cutoff: usize, own: usize, rest: usize) -> usize {
    match mode {
        Mode::A => two_mode_index(cutoff, own, rest),
        Mode::B => two_mode_index(cutoff, rest, own),
    }
}

fn require_two_modes(modes: Modes, what: &str) -> Result<()> {
    if modes != Modes::Two {
        return Err(Error::Shape(format!("{what} needs a two-mode state")));
    }
    Ok(())
}

/// Real beam splitter with transmission amplitude `t = sin θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    t: f64,
    r: f64,
    theta: f64,
    leakage_threshold: f64,
}

impl BeamSplitter {
    /// Physical beam splitter, `0 < t < 1`.
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Validation(format!("transmission amplitude must be in (0,1), got {t}")));
        }
        Ok(Self::from_angle(t.asin()))
    }

    /// Mixing angle form; any finite angle, including negative ones for inverses.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            t: theta.sin(),
            r: theta.cos(),
            theta,
            leakage_threshold: DEFAULT_TAIL_THRESHOLD,
        }
    }

    pub fn with_leakage_threshold(mut self, threshold: f64) -> Self {
        self.leakage_threshold = threshold;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn inverse(&self) -> Self {
        Self { leakage_threshold: self.leakage_threshold, ..Self::from_angle(-self.theta) }
    }

    /// Exact unitary on the block of total occupation `total`, basis `|m, total−m⟩`, m = 0..=total.
    pub fn block_unitary(&self, total: usize) -> DMatrix<f64> {
        let dim = total + 1;
        let mut gen = DMatrix::<f64>::zeros(dim, dim);
        for m in 0..total {
            // a†b |m, N−m⟩ = √((m+1)(N−m)) |m+1, N−m−1⟩
            let el = ((m + 1) as f64 * (total - m) as f64).sqrt() * self.theta;
            gen[(m + 1, m)] = el;
            gen[(m, m + 1)] = -el;
        }
        gen.exp()
    }

    /// Unitary on the truncated two-mode space. Blocks that extend past the
    /// cutoff are applied in full and then projected, so the result is a
    /// contraction whose norm loss is the leakage.
    pub fn truncated_unitary(&self, cutoff: usize) -> DMatrix<f64> {
        let w = cutoff + 1;
        let mut u = DMatrix::<f64>::zeros(w * w, w * w);
        for total in 0..=2 * cutoff {
            let block = self.block_unitary(total);
            let lo = total.saturating_sub(cutoff);
            let hi = total.min(cutoff);
            for mi in lo..=hi {
                for mo in lo..=hi {
                    u[(two_mode_index(cutoff, mo, total - mo), two_mode_index(cutoff, mi, total - mi))] =
                        block[(mo, mi)];
                }
            }
        }
        u
    }

    pub fn apply_pure(&self, state: &PureState) -> Result<PureState> {
        require_two_modes(state.modes(), "beam splitter")?;
        let cutoff = state.cutoff();
        let u = self.truncated_unitary(cutoff);
        let psi = state.amplitudes();
        let out: Vec<C64> = (0..psi.len())
            .map(|i| (0..psi.len()).map(|j| psi[j] * u[(i, j)]).sum())
            .collect();
        let before = state.norm_sqr();
        let after: f64 = out.iter().map(|c| c.norm_sqr()).sum();
        let leakage = ((before - after) / before).max(0.0);
        self.check_leakage(leakage)?;
        Ok(PureState::from_parts_unchecked(out, cutoff, Modes::Two, state.truncation()).with_truncation(leakage))
    }

    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        require_two_modes(rho.modes(), "beam splitter")?;
        let u = self.truncated_unitary(rho.cutoff()).map(|x| C64::new(x, 0.0));
        let out = &u * rho.matrix() * u.transpose();
        let before = rho.trace();
        let after: f64 = out.diagonal().iter().map(|c| c.re).sum();
        let leakage = ((before - after) / before).max(0.0);
        self.check_leakage(leakage)?;
        Ok(DensityOperator::from_parts_unchecked(out, rho.cutoff(), Modes::Two, rho.truncation())
            .with_truncation(leakage))
    }

    fn check_leakage(&self, leakage: f64) -> Result<()> {
        if leakage > self.leakage_threshold {
            return Err(Error::Truncation { mass: leakage, threshold: self.leakage_threshold });
        }
        Ok(())
    }
}

/// Beam splitter acting on either kind of two-mode state; returns the same kind.
pub fn apply_beam_splitter(state: &State, bs: &BeamSplitter) -> Result<State> {
    match state {
        State::Pure(s) => bs.apply_pure(s).map(State::Pure),
        State::Mixed(r) => bs.apply_density(r).map(State::Mixed),
    }
}

/// Outcome of a conditioning measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub probability: f64,
    /// Normalized state of the unmeasured mode.
    pub conditional: State,
}

fn impossible_check(p: f64) -> Result<()> {
    if p.is_nan() || p < IMPOSSIBLE_THRESHOLD {
        return Err(Error::ImpossibleOutcome { probability: p.max(0.0) });
    }
    Ok(())
}

/// Projects `mode` onto occupation `n` and returns the conditional state of the other mode.
pub fn project_number(state: &State, mode: Mode, n: usize) -> Result<Projection> {
    require_two_modes(state.modes(), "number projection")?;
    let cutoff = state.cutoff();
    if n > cutoff {
        return Err(Error::Range(format!("occupation {n} exceeds cutoff {cutoff}")));
    }
    match state {
        State::Pure(s) => {
            let amps: Vec<C64> = (0..=cutoff)
                .map(|k| s.amplitudes()[index_for(mode, cutoff, n, k)])
                .collect();
            let weight: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
            let p = weight / s.norm_sqr();
            impossible_check(p)?;
            let cond = PureState::from_parts_unchecked(amps, cutoff, Modes::One, s.truncation()).normalize()?;
            Ok(Projection { probability: p, conditional: State::Pure(cond) })
        }
        State::Mixed(rho) => {
            let m = rho.matrix();
            let reduced = DMatrix::from_fn(cutoff + 1, cutoff + 1, |k, l| {
                m[(index_for(mode, cutoff, n, k), index_for(mode, cutoff, n, l))]
            });
            let weight: f64 = reduced.diagonal().iter().map(|c| c.re).sum();
            let p = weight / rho.trace();
            impossible_check(p)?;
            let cond = DensityOperator::from_parts_unchecked(reduced, cutoff, Modes::One, rho.truncation())
                .normalize()?;
            Ok(Projection { probability: p, conditional: State::Mixed(cond) })
        }
    }
}

/// Imperfect single-photon readout of one mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeraldModel {
    /// Probability that a stored excitation is converted and detected.
    pub read_efficiency: f64,
    /// Probability of a spurious click per readout window.
    pub dark_count: f64,
    pub mode: Mode,
    /// Number-resolving (exactly one click) vs. threshold (at least one click).
    pub resolving: bool,
}

impl Default for HeraldModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl HeraldModel {
    pub fn new(read_efficiency: f64, dark_count: f64, mode: Mode, resolving: bool) -> Result<Self> {
        let model = Self { read_efficiency, dark_count, mode, resolving };
        model.validate()?;
        Ok(model)
    }

    /// Perfect number-resolving readout of mode A.
    pub fn ideal() -> Self {
        Self { read_efficiency: 1.0, dark_count: 0.0, mode: Mode::A, resolving: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.read_efficiency) {
            return Err(Error::Validation(format!(
                "read efficiency must be in [0,1], got {}",
                self.read_efficiency
            )));
        }
        if !(0.0..1.0).contains(&self.dark_count) {
            return Err(Error::Validation(format!(
                "dark count probability must be in [0,1), got {}",
                self.dark_count
            )));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.read_efficiency == 1.0 && self.dark_count == 0.0 && self.resolving
    }

    /// POVM weight of a herald click given `stored` excitations in the read mode.
    pub fn click_weight(&self, stored: usize) -> f64 {
        let eta = self.read_efficiency;
        let pd = self.dark_count;
        let miss_all = (1.0 - eta).powi(stored as i32);
        if self.resolving {
            let one_real = if stored == 0 {
                0.0
            } else {
                stored as f64 * eta * (1.0 - eta).powi(stored as i32 - 1)
            };
            (1.0 - pd) * one_real + pd * miss_all
        } else {
            1.0 - (1.0 - pd) * miss_all
        }
    }

    /// Distribution of the number of detector clicks: binomial real clicks plus a Bernoulli dark click.
    pub fn click_count_distribution(&self, stored: usize) -> Vec<f64> {
        let eta = self.read_efficiency;
        let pd = self.dark_count;
        let mut real = vec![0.0; stored + 1];
        real[0] = 1.0;
        for _ in 0..stored {
            for k in (0..=stored).rev() {
                let prev = if k > 0 { real[k - 1] } else { 0.0 };
                real[k] = real[k] * (1.0 - eta) + prev * eta;
            }
        }
        let mut out = vec![0.0; stored + 2];
        for (k, p) in real.iter().enumerate() {
            out[k] += p * (1.0 - pd);
            out[k + 1] += p * pd;
        }
        out
    }

    /// POVM weight of the complementary (non-herald) outcome, from the click-count distribution.
    pub fn no_click_weight(&self, stored: usize) -> f64 {
        let dist = self.click_count_distribution(stored);
        if self.resolving {
            dist[0] + dist[2..].iter().sum::<f64>()
        } else {
            dist[0]
        }
    }
}

/// Herald click on a two-mode density operator: returns the click probability
/// and the conditional reduced state of the unread mode.
pub fn herald_click(rho: &DensityOperator, model: &HeraldModel) -> Result<Projection> {
    model.validate()?;
    let reduced = apply_diagonal_povm(rho, model.mode, |n| model.click_weight(n))?;
    let p = reduced.trace() / rho.trace();
    impossible_check(p)?;
    Ok(Projection { probability: p, conditional: State::Mixed(reduced.normalize()?) })
}

/// `(P(click), P(no click))`, each computed from its own POVM element.
pub fn herald_probabilities(rho: &DensityOperator, model: &HeraldModel) -> Result<(f64, f64)> {
    model.validate()?;
    let tr = rho.trace();
    let click = apply_diagonal_povm(rho, model.mode, |n| model.click_weight(n))?.trace() / tr;
    let none = apply_diagonal_povm(rho, model.mode, |n| model.no_click_weight(n))?.trace() / tr;
    Ok((click, none))
}

/// `Tr_mode[(E ⊗ I) ρ]` for an element `E` diagonal in the occupation of `mode`.
fn apply_diagonal_povm(
    rho: &DensityOperator,
    mode: Mode,
    weight: impl Fn(usize) -> f64,
) -> Result<DensityOperator> {
    require_two_modes(rho.modes(), "herald")?;
    let cutoff = rho.cutoff();
    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(cutoff + 1, cutoff + 1);
    for n in 0..=cutoff {
        let w = weight(n);
        if w == 0.0 {
            continue;
        }
        for k in 0..=cutoff {
            for l in 0..=cutoff {
                out[(k, l)] += m[(index_for(mode, cutoff, n, k), index_for(mode, cutoff, n, l))] * w;
            }
        }
    }
    Ok(DensityOperator::from_parts_unchecked(out, cutoff, Modes::One, rho.truncation()))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Pure-loss channel with transmissivity `eta` on one mode (mode A for single-mode states).
pub fn loss_channel(state: &State, mode: Mode, eta: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Validation(format!("transmissivity must be in [0,1], got {eta}")));
    }
    let rho = state.to_density();
    let cutoff = rho.cutoff();
    // kraus[k][(n)] = ⟨n−k|K_k|n⟩ = √C(n,k) η^{(n−k)/2} (1−η)^{k/2}
    let kraus = |n: usize, k: usize| -> f64 {
        binomial(n, k).sqrt() * eta.powf((n - k) as f64 / 2.0) * (1.0 - eta).powf(k as f64 / 2.0)
    };
    let dim = rho.dim();
    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    match rho.modes() {
        Modes::One => {
            if mode != Mode::A {
                return Err(Error::Shape("single-mode state only has mode A".into()));
            }
            for n in 0..=cutoff {
                for p in 0..=cutoff {
                    let x = m[(n, p)];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for k in 0..=n.min(p) {
                        out[(n - k, p - k)] += x * (kraus(n, k) * kraus(p, k));
                    }
                }
            }
        }
        Modes::Two => {
            for n in 0..=cutoff {
                for q in 0..=cutoff {
                    for p in 0..=cutoff {
                        for s in 0..=cutoff {
                            let x = m[(index_for(mode, cutoff, n, q), index_for(mode, cutoff, p, s))];
                            if x == C64::new(0.0, 0.0) {
                                continue;
                            }
                            for k in 0..=n.min(p) {
                                out[(index_for(mode, cutoff, n - k, q), index_for(mode, cutoff, p - k, s))] +=
                                    x * (kraus(n, k) * kraus(p, k));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(DensityOperator::from_parts_unchecked(out, cutoff, rho.modes(), rho.truncation()))
}

/// Reduced state of the `keep` mode.
pub fn partial_trace(rho: &DensityOperator, keep: Mode) -> Result<DensityOperator> {
    require_two_modes(rho.modes(), "partial trace")?;
    let cutoff = rho.cutoff();
    let traced = keep.other();
    let m = rho.matrix();
    let out = DMatrix::from_fn(cutoff + 1, cutoff + 1, |k, l| {
        (0..=cutoff)
            .map(|j| m[(index_for(traced, cutoff, j, k), index_for(traced, cutoff, j, l))])
            .sum()
    });
    Ok(DensityOperator::from_parts_unchecked(out, cutoff, Modes::One, rho.truncation()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, fidelity, number_state, tensor_product, to_density, ComplexAmplitude};

    fn ket(m: usize, n: usize, cutoff: usize) -> PureState {
        tensor_product(&number_state(m, cutoff).unwrap(), &number_state(n, cutoff).unwrap()).unwrap()
    }

    #[test]
    fn single_excitation_transfer() {
        for t in [0.05, 0.3, 0.9] {
            let bs = BeamSplitter::new(t).unwrap();
            let out = bs.apply_pure(&ket(0, 1, 4)).unwrap();
            assert!((out.amplitude2(1, 0) - C64::new(t, 0.0)).norm() < 1e-15);
            assert!((out.amplitude2(0, 1) - C64::new(bs.r(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn hong_ou_mandel_null() {
        let bs = BeamSplitter::new(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let out = bs.apply_pure(&ket(1, 1, 4)).unwrap();
        assert!(out.amplitude2(1, 1).norm() < 1e-12);
    }

    #[test]
    fn two_photon_coincidence_amplitude() {
        let bs = BeamSplitter::new(0.3).unwrap();
        let out = bs.apply_pure(&ket(1, 1, 4)).unwrap();
        assert!((out.amplitude2(1, 1).norm() - 0.82).abs() < 1e-12);
    }

    #[test]
    fn shape_and_range_errors() {
        let bs = BeamSplitter::new(0.2).unwrap();
        assert!(matches!(bs.apply_pure(&number_state(1, 3).unwrap()), Err(Error::Shape(_))));
        assert!(BeamSplitter::new(0.0).is_err());
        assert!(BeamSplitter::new(1.0).is_err());
        let s = State::Pure(ket(0, 1, 2));
        assert!(matches!(project_number(&s, Mode::A, 3), Err(Error::Range(_))));
    }

    #[test]
    fn leakage_is_reported() {
        // |2,2⟩ at cutoff 2 spreads into |4,0⟩ and |0,4⟩, which lie outside the space
        let bs = BeamSplitter::new(0.5).unwrap();
        assert!(matches!(bs.apply_pure(&ket(2, 2, 2)), Err(Error::Truncation { .. })));
        let loose = bs.with_leakage_threshold(1.0);
        let out = loose.apply_pure(&ket(2, 2, 2)).unwrap();
        assert!(out.truncation() > 0.1);
    }

    #[test]
    fn projection_after_beam_splitter() {
        let t = 0.2;
        let bs = BeamSplitter::new(t).unwrap();
        let out = State::Pure(bs.apply_pure(&ket(0, 1, 3)).unwrap());
        let proj = project_number(&out, Mode::A, 1).unwrap();
        assert!((proj.probability - t * t).abs() < 1e-15);
        let vac = number_state(0, 3).unwrap();
        assert!((fidelity(&proj.conditional, &vac).unwrap() - 1.0).abs() < 1e-14);

        let before = State::Pure(ket(0, 1, 3));
        assert!(matches!(
            project_number(&before, Mode::A, 1),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn projection_pure_and_mixed_agree() {
        let sig = coherent_state(ComplexAmplitude::new(0.2, 0.1).unwrap(), 6).unwrap();
        let s = tensor_product(&sig, &number_state(1, 6).unwrap()).unwrap();
        let out = BeamSplitter::new(0.3).unwrap().apply_pure(&s).unwrap();
        let pure = project_number(&State::Pure(out.clone()), Mode::A, 1).unwrap();
        let mixed = project_number(&State::Mixed(to_density(&out)), Mode::A, 1).unwrap();
        assert!((pure.probability - mixed.probability).abs() < 1e-14);
        let State::Pure(p) = &pure.conditional else { panic!() };
        assert!((fidelity(&mixed.conditional, p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herald_weights() {
        let ideal = HeraldModel::ideal();
        assert_eq!(ideal.click_weight(0), 0.0);
        assert_eq!(ideal.click_weight(1), 1.0);
        assert_eq!(ideal.click_weight(2), 0.0);
        let blind = HeraldModel::new(0.0, 0.0, Mode::A, false).unwrap();
        assert!((0..5).all(|n| blind.click_weight(n) == 0.0));
        assert!(HeraldModel::new(1.2, 0.0, Mode::A, true).is_err());
        assert!(HeraldModel::new(0.5, 1.0, Mode::A, true).is_err());
        let m = HeraldModel::new(0.5, 1e-3, Mode::A, true).unwrap();
        // exactly one click: one real and no dark, or none real and a dark
        let expected = (1.0 - 1e-3) * 3.0 * 0.5 * 0.25 + 1e-3 * 0.125;
        assert!((m.click_weight(3) - expected).abs() < 1e-16);
    }

    #[test]
    fn threshold_herald_matches_projector_on_low_support() {
        let cutoff = 3;
        let sig = crate::fock::first_order_state(ComplexAmplitude::real(0.02).unwrap(), cutoff).unwrap();
        // input with mode-A support on {0,1}
        let s = tensor_product(&sig, &number_state(0, cutoff).unwrap()).unwrap();
        let rho = to_density(&s);
        let threshold = HeraldModel::new(1.0, 0.0, Mode::A, false).unwrap();
        let a = herald_click(&rho, &threshold).unwrap();
        let b = project_number(&State::Pure(s), Mode::A, 1).unwrap();
        assert!((a.probability - b.probability).abs() < 1e-15);
        let State::Pure(bp) = &b.conditional else { panic!() };
        assert!((fidelity(&a.conditional, bp).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_on_single_photon() {
        let eta = 0.7;
        let one = State::Pure(number_state(1, 3).unwrap());
        let out = loss_channel(&one, Mode::A, eta).unwrap();
        let pops = out.populations();
        assert!((pops[0] - 0.3).abs() < 1e-15 && (pops[1] - 0.7).abs() < 1e-15);
        let id = loss_channel(&one, Mode::A, 1.0).unwrap();
        assert!((id.matrix() - one.to_density().matrix()).norm() < 1e-15);
        assert!(loss_channel(&one, Mode::A, 1.5).is_err());
        assert!(loss_channel(&one, Mode::B, 0.5).is_err());
    }

    #[test]
    fn loss_on_two_modes_acts_on_chosen_mode() {
        let s = State::Pure(ket(1, 2, 3));
        let out = loss_channel(&s, Mode::B, 0.5).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-14);
        let a = partial_trace(&out, Mode::A).unwrap();
        assert!((a.populations()[1] - 1.0).abs() < 1e-14);
        let b = partial_trace(&out, Mode::B).unwrap();
        let p = b.populations();
        assert!((p[0] - 0.25).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14 && (p[2] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn partial_traces() {
        let r = to_density(&ket(0, 1, 2));
        let b = partial_trace(&r, Mode::B).unwrap();
        assert_eq!(b.populations(), vec![0.0, 1.0, 0.0]);
        let a = partial_trace(&r, Mode::A).unwrap();
        assert_eq!(a.populations(), vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            partial_trace(&to_density(&number_state(0, 2).unwrap()), Mode::A),
            Err(Error::Shape(_))
        ));
    }
}
