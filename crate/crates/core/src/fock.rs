//! Truncated one- and two-mode bosonic Fock spaces.
//!
//! Single-mode states are indexed by occupation `n = 0..=cutoff`. Two-mode
//! states use a lexicographic layout with mode A major: the amplitude of
//! `|m, n⟩` lives at index `m * (cutoff + 1) + n`. Every module in this crate
//! shares that layout.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default per-mode occupation cutoff.
pub const DEFAULT_CUTOFF: usize = 12;

/// Default ceiling on probability mass discarded by truncation.
pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Number of modes of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Modes {
    One,
    Two,
}

impl Modes {
    pub fn count(self) -> usize {
        match self {
            Modes::One => 1,
            Modes::Two => 2,
        }
    }
}

impl From<Modes> for u8 {
    fn from(m: Modes) -> u8 {
        m.count() as u8
    }
}

impl TryFrom<u8> for Modes {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Modes::One),
            2 => Ok(Modes::Two),
            other => Err(format!("mode count must be 1 or 2, got {other}")),
        }
    }
}

/// Hilbert-space dimension for a cutoff and mode count.
pub fn dimension(cutoff: usize, modes: Modes) -> usize {
    (cutoff + 1).pow(modes.count() as u32)
}

/// Index of `|m, n⟩` in the two-mode layout.
#[inline]
pub fn two_mode_index(cutoff: usize, m: usize, n: usize) -> usize {
    m * (cutoff + 1) + n
}

/// A finite complex amplitude such as a per-atom rotation or a coherent amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct ComplexAmplitude(C64);

impl ComplexAmplitude {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(Error::Validation(format!(
                "complex amplitude must be finite, got ({re}, {im})"
            )));
        }
        Ok(Self(C64::new(re, im)))
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn zero() -> Self {
        Self(C64::new(0.0, 0.0))
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn abs(self) -> f64 {
        self.0.norm()
    }

    pub fn value(self) -> C64 {
        self.0
    }
}

impl From<ComplexAmplitude> for C64 {
    fn from(a: ComplexAmplitude) -> C64 {
        a.0
    }
}

impl TryFrom<(f64, f64)> for ComplexAmplitude {
    type Error = Error;
    fn try_from((re, im): (f64, f64)) -> Result<Self> {
        Self::new(re, im)
    }
}

impl From<ComplexAmplitude> for (f64, f64) {
    fn from(a: ComplexAmplitude) -> (f64, f64) {
        (a.0.re, a.0.im)
    }
}

/// Pure state over a truncated Fock basis.
///
/// `truncation` accumulates probability mass that was discarded by the
/// cutoff while building or evolving the state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateRepr", into = "PureStateRepr")]
pub struct PureState {
    amplitudes: Vec<C64>,
    cutoff: usize,
    modes: Modes,
    truncation: f64,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, cutoff: usize, modes: Modes) -> Result<Self> {
        let dim = dimension(cutoff, modes);
        if amplitudes.len() != dim {
            return Err(Error::Shape(format!(
                "expected {dim} amplitudes for cutoff {cutoff} and {} mode(s), got {}",
                modes.count(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let state = Self { amplitudes, cutoff, modes, truncation: 0.0 };
        if state.norm_sqr() <= 0.0 {
            return Err(Error::Degenerate("state has zero norm".into()));
        }
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(
        amplitudes: Vec<C64>,
        cutoff: usize,
        modes: Modes,
        truncation: f64,
    ) -> Self {
        Self { amplitudes, cutoff, modes, truncation }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Probability mass discarded by truncation so far.
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub(crate) fn with_truncation(mut self, extra: f64) -> Self {
        self.truncation += extra;
        self
    }

    /// Amplitude of `|m, n⟩` for a two-mode state.
    pub fn amplitude2(&self, m: usize, n: usize) -> C64 {
        debug_assert_eq!(self.modes, Modes::Two);
        self.amplitudes[two_mode_index(self.cutoff, m, n)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate("cannot normalize zero-norm state".into()));
        }
        let amplitudes = self.amplitudes.iter().map(|c| c / norm).collect();
        Ok(Self { amplitudes, ..self.clone() })
    }

    fn check_same_basis(&self, other: &PureState) -> Result<()> {
        if self.cutoff != other.cutoff || self.modes != other.modes {
            return Err(Error::Shape(format!(
                "basis mismatch: (cutoff {}, {} mode) vs (cutoff {}, {} mode)",
                self.cutoff,
                self.modes.count(),
                other.cutoff,
                other.modes.count()
            )));
        }
        Ok(())
    }

    /// `⟨self|other⟩` without normalization.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.check_same_basis(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Mean total occupation `⟨n_A + n_B⟩` (or `⟨n⟩` for one mode).
    pub fn mean_occupation(&self) -> f64 {
        let norm = self.norm_sqr();
        let w = self.cutoff + 1;
        let total: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let occ = match self.modes {
                    Modes::One => i,
                    Modes::Two => i / w + i % w,
                };
                occ as f64 * c.norm_sqr()
            })
            .sum();
        total / norm
    }
}

#[derive(Serialize, Deserialize)]
struct PureStateRepr {
    cutoff: usize,
    modes: Modes,
    amplitudes: Vec<(f64, f64)>,
}

impl From<PureState> for PureStateRepr {
    fn from(s: PureState) -> Self {
        Self {
            cutoff: s.cutoff,
            modes: s.modes,
            amplitudes: s.amplitudes.iter().map(|c| (c.re, c.im)).collect(),
        }
    }
}

impl TryFrom<PureStateRepr> for PureState {
    type Error = Error;
    fn try_from(r: PureStateRepr) -> Result<Self> {
        let amps = r.amplitudes.into_iter().map(|(re, im)| C64::new(re, im)).collect();
        PureState::new(amps, r.cutoff, r.modes)
    }
}

/// Mixed state over a truncated Fock basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
    cutoff: usize,
    modes: Modes,
    truncation: f64,
}

impl DensityOperator {
    /// Validates shape, finiteness and hermiticity. The trace is not forced to one.
    pub fn new(matrix: DMatrix<C64>, cutoff: usize, modes: Modes) -> Result<Self> {
        let dim = dimension(cutoff, modes);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Shape(format!(
                "expected {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        for i in 0..dim {
            for j in 0..=i {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::Validation(format!(
                        "matrix not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let rho = Self { matrix, cutoff, modes, truncation: 0.0 };
        if rho.trace() <= 0.0 {
            return Err(Error::Degenerate("density operator has non-positive trace".into()));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(
        matrix: DMatrix<C64>,
        cutoff: usize,
        modes: Modes,
        truncation: f64,
    ) -> Self {
        Self { matrix, cutoff, modes, truncation }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub(crate) fn with_truncation(mut self, extra: f64) -> Self {
        self.truncation += extra;
        self
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::Degenerate("cannot normalize zero-trace operator".into()));
        }
        Ok(Self { matrix: self.matrix.unscale(tr), ..self.clone() })
    }

    /// `Tr(ρ²)` of the normalized operator.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        let m = &self.matrix;
        // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        m.iter().map(|c| c.norm_sqr()).sum::<f64>() / (tr * tr)
    }

    /// Eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Hermitian, unit trace and positive semidefinite within the documented tolerances.
    pub fn is_physical(&self) -> bool {
        let dim = self.dim();
        let herm = (0..dim).all(|i| {
            (0..=i).all(|j| (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() <= HERMITIAN_TOL)
        });
        herm && (self.trace() - 1.0).abs() <= TRACE_TOL
            && self.eigenvalues().first().is_none_or(|&e| e >= -1e-9)
    }

    /// Diagonal of the matrix (occupation probabilities for one mode).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|c| c.re).collect()
    }

    /// `⟨ψ|ρ|ψ⟩` without normalization.
    pub fn expectation_in(&self, psi: &PureState) -> Result<f64> {
        if psi.cutoff() != self.cutoff || psi.modes() != self.modes {
            return Err(Error::Shape("density operator and state bases differ".into()));
        }
        let a = psi.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            if a[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..self.dim() {
                acc += a[i].conj() * self.matrix[(i, j)] * a[j];
            }
        }
        Ok(acc.re)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    cutoff: usize,
    modes: Modes,
    matrix: Vec<Vec<(f64, f64)>>,
}

impl From<DensityOperator> for DensityRepr {
    fn from(d: DensityOperator) -> Self {
        let n = d.dim();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (d.matrix[(i, j)].re, d.matrix[(i, j)].im)).collect())
            .collect();
        Self { cutoff: d.cutoff, modes: d.modes, matrix }
    }
}

impl TryFrom<DensityRepr> for DensityOperator {
    type Error = Error;
    fn try_from(r: DensityRepr) -> Result<Self> {
        let n = r.matrix.len();
        if r.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("density matrix rows have unequal length".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            let (re, im) = r.matrix[i][j];
            C64::new(re, im)
        });
        DensityOperator::new(m, r.cutoff, r.modes)
    }
}

/// Either kind of state, for operations that accept both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "state", rename_all = "snake_case")]
pub enum State {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl State {
    pub fn cutoff(&self) -> usize {
        match self {
            State::Pure(s) => s.cutoff(),
            State::Mixed(r) => r.cutoff(),
        }
    }

    pub fn modes(&self) -> Modes {
        match self {
            State::Pure(s) => s.modes(),
            State::Mixed(r) => r.modes(),
        }
    }

    pub fn truncation(&self) -> f64 {
        match self {
            State::Pure(s) => s.truncation(),
            State::Mixed(r) => r.truncation(),
        }
    }

    /// Density operator view (normalization preserved).
    pub fn to_density(&self) -> DensityOperator {
        match self {
            State::Pure(s) => to_density(s),
            State::Mixed(r) => r.clone(),
        }
    }
}

impl From<PureState> for State {
    fn from(s: PureState) -> Self {
        State::Pure(s)
    }
}

impl From<DensityOperator> for State {
    fn from(r: DensityOperator) -> Self {
        State::Mixed(r)
    }
}

/// Borrowed view of either kind of state.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a PureState> for StateRef<'a> {
    fn from(s: &'a PureState) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(r: &'a DensityOperator) -> Self {
        StateRef::Mixed(r)
    }
}

impl<'a> From<&'a State> for StateRef<'a> {
    fn from(s: &'a State) -> Self {
        match s {
            State::Pure(p) => StateRef::Pure(p),
            State::Mixed(r) => StateRef::Mixed(r),
        }
    }
}

/// Tail mass `Σ_{n > cutoff} e^{-|α|²} |α|^{2n} / n!` of a Poisson distribution.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let first = cutoff + 1;
    let ln_fact: f64 = (2..=first).map(|k| (k as f64).ln()).sum();
    let mut term = (-mean + first as f64 * mean.ln() - ln_fact).exp();
    let mut sum = 0.0;
    let mut n = first;
    loop {
        sum += term;
        n += 1;
        term *= mean / n as f64;
        if (n as f64 > mean && term <= sum * 1e-17) || term == 0.0 || n > first + 100_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Coherent state `|α⟩` truncated at `cutoff`, using the default tail threshold.
pub fn coherent_state(alpha: ComplexAmplitude, cutoff: usize) -> Result<PureState> {
    coherent_state_with_threshold(alpha, cutoff, DEFAULT_TAIL_THRESHOLD)
}

/// Coherent state that fails when the discarded Poisson tail exceeds `threshold`.
pub fn coherent_state_with_threshold(
    alpha: ComplexAmplitude,
    cutoff: usize,
    threshold: f64,
) -> Result<PureState> {
    if cutoff < 1 {
        return Err(Error::Range("coherent state needs cutoff >= 1".into()));
    }
    let a = alpha.value();
    let tail = poisson_tail(a.norm_sqr(), cutoff);
    if tail > threshold {
        return Err(Error::Truncation { mass: tail, threshold });
    }
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..=cutoff {
        c = c * a / (n as f64).sqrt();
        amps.push(c);
    }
    let state = PureState::new(amps, cutoff, Modes::One)?.normalize()?;
    Ok(state.with_truncation(tail))
}

/// Truncated first-order coherent state `(|0⟩ + α|1⟩)/√(1+|α|²)`.
pub fn first_order_state(alpha: ComplexAmplitude, cutoff: usize) -> Result<PureState> {
    if cutoff < 1 {
        return Err(Error::Range("first-order state needs cutoff >= 1".into()));
    }
    let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
    amps[0] = C64::new(1.0, 0.0);
    amps[1] = alpha.value();
    PureState::new(amps, cutoff, Modes::One)?.normalize()
}

/// Fock state `|n⟩`.
pub fn number_state(n: usize, cutoff: usize) -> Result<PureState> {
    if n > cutoff {
        return Err(Error::Range(format!("occupation {n} exceeds cutoff {cutoff}")));
    }
    let mut amps = vec![C64::new(0.0, 0.0); cutoff + 1];
    amps[n] = C64::new(1.0, 0.0);
    PureState::new(amps, cutoff, Modes::One)
}

/// `|a⟩ ⊗ |b⟩` with mode A = `a`.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    if a.modes() != Modes::One || b.modes() != Modes::One {
        return Err(Error::Shape("tensor product takes two single-mode states".into()));
    }
    if a.cutoff() != b.cutoff() {
        return Err(Error::Shape(format!(
            "cutoff mismatch: {} vs {}",
            a.cutoff(),
            b.cutoff()
        )));
    }
    let amps = a
        .amplitudes()
        .iter()
        .flat_map(|x| b.amplitudes().iter().map(move |y| x * y))
        .collect();
    Ok(PureState::from_parts_unchecked(
        amps,
        a.cutoff(),
        Modes::Two,
        a.truncation() + b.truncation(),
    ))
}

/// Tensor product of two single-mode density operators.
pub fn tensor_product_density(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    if a.modes() != Modes::One || b.modes() != Modes::One {
        return Err(Error::Shape("tensor product takes two single-mode operators".into()));
    }
    if a.cutoff() != b.cutoff() {
        return Err(Error::Shape("cutoff mismatch".into()));
    }
    Ok(DensityOperator::from_parts_unchecked(
        a.matrix().kronecker(b.matrix()),
        a.cutoff(),
        Modes::Two,
        a.truncation() + b.truncation(),
    ))
}

/// Overlap of `a` with the pure state `b`, both normalized first.
///
/// `|⟨a|b⟩|²` for pure `a`, `⟨b|ρ|b⟩` for mixed `a`.
pub fn fidelity<'a>(a: impl Into<StateRef<'a>>, b: &PureState) -> Result<f64> {
    let b = b.normalize()?;
    let f = match a.into() {
        StateRef::Pure(a) => a.normalize()?.inner(&b)?.norm_sqr(),
        StateRef::Mixed(r) => r.normalize()?.expectation_in(&b)?,
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `|ψ⟩⟨ψ|` for the normalized state.
pub fn to_density(s: &PureState) -> DensityOperator {
    let norm = s.norm_sqr();
    let v = nalgebra::DVector::from_column_slice(s.amplitudes());
    let m = (&v * v.adjoint()).unscale(norm);
    DensityOperator::from_parts_unchecked(m, s.cutoff(), s.modes(), s.truncation())
}

/// Convex mixture `Σ wᵢ ρᵢ`.
pub fn mix(weights: &[f64], operators: &[DensityOperator]) -> Result<DensityOperator> {
    if weights.len() != operators.len() || operators.is_empty() {
        return Err(Error::Shape("weights and operators must be non-empty and equal length".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Error::Validation(format!("negative or non-finite weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!("weights sum to {total}, expected 1")));
    }
    let first = &operators[0];
    if operators
        .iter()
        .any(|r| r.cutoff() != first.cutoff() || r.modes() != first.modes())
    {
        return Err(Error::Shape("operators act on different bases".into()));
    }
    let mut m = DMatrix::zeros(first.dim(), first.dim());
    let mut trunc = 0.0;
    for (w, r) in weights.iter().zip(operators) {
        let tr = r.trace();
        m += r.matrix().scale(*w / tr);
        trunc += w * r.truncation();
    }
    Ok(DensityOperator::from_parts_unchecked(m, first.cutoff(), first.modes(), trunc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp(re: f64, im: f64) -> ComplexAmplitude {
        ComplexAmplitude::new(re, im).unwrap()
    }

    #[test]
    fn vacuum_coherent_state() {
        let s = coherent_state(ComplexAmplitude::zero(), 5).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn coherent_amplitude_ratios() {
        let s = coherent_state(amp(0.1, 0.0), 8).unwrap();
        let c = s.amplitudes();
        assert!((c[1] / c[0] - C64::new(0.1, 0.0)).norm() < 1e-15);
        assert!((c[2] / c[0] - C64::new(0.01 / 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_tail_below_threshold() {
        // independent oracle: log-domain Poisson terms via lgamma-free summation
        let mean: f64 = 0.25;
        let mut tail = 0.0;
        for n in 13..60u32 {
            let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
            tail += (-mean + n as f64 * mean.ln() - ln_fact).exp();
        }
        let s = coherent_state(amp(0.5, 0.0), 12).unwrap();
        assert!(tail < 1e-12);
        assert!((s.truncation() - tail).abs() <= 1e-3 * tail);
    }

    #[test]
    fn coherent_truncation_error() {
        let err = coherent_state(amp(3.0, 0.0), 4).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        assert!(coherent_state(amp(0.1, 0.0), 0).is_err());
    }

    #[test]
    fn number_states() {
        let s = number_state(1, 4).unwrap();
        let expected: Vec<C64> = [0.0, 1.0, 0.0, 0.0, 0.0].iter().map(|&x| C64::new(x, 0.0)).collect();
        assert_eq!(s.amplitudes(), expected.as_slice());
        assert_eq!(number_state(0, 0).unwrap().amplitudes(), &[C64::new(1.0, 0.0)]);
        assert!(matches!(number_state(3, 2), Err(Error::Range(_))));
    }

    #[test]
    fn tensor_product_layout() {
        let vac = number_state(0, 3).unwrap();
        let one = number_state(1, 3).unwrap();
        let s = tensor_product(&vac, &one).unwrap();
        assert_eq!(s.amplitude2(0, 1), C64::new(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|c| c.norm() > 0.0).count(), 1);

        let alpha = 0.05;
        let sig = first_order_state(amp(alpha, 0.0), 3).unwrap();
        let s = tensor_product(&sig, &one).unwrap();
        assert!((s.amplitude2(1, 1) / s.amplitude2(0, 1) - C64::new(alpha, 0.0)).norm() < 1e-15);

        assert!(matches!(
            tensor_product(&vac, &number_state(0, 4).unwrap()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn fidelity_basics() {
        let s = coherent_state(amp(0.3, -0.2), 10).unwrap();
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-14);
        let vac = number_state(0, 4).unwrap();
        let one = number_state(1, 4).unwrap();
        assert_eq!(fidelity(&vac, &one).unwrap(), 0.0);
        let a = coherent_state(amp(0.1, 0.0), 12).unwrap();
        let b = coherent_state(amp(0.2, 0.0), 12).unwrap();
        let f = fidelity(&a, &b).unwrap();
        assert!((f - (-0.01f64).exp()).abs() < 1e-12);
        let rho = to_density(&a);
        assert!((fidelity(&rho, &b).unwrap() - f).abs() < 1e-14);
    }

    #[test]
    fn zero_norm_rejected() {
        let z = vec![C64::new(0.0, 0.0); 3];
        assert!(matches!(PureState::new(z, 2, Modes::One), Err(Error::Degenerate(_))));
    }

    #[test]
    fn density_and_mix() {
        let vac = number_state(0, 3).unwrap();
        let one = number_state(1, 3).unwrap();
        let r0 = to_density(&vac);
        assert_eq!(r0.matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(r0.matrix().iter().filter(|c| c.norm() > 0.0).count(), 1);
        let m = mix(&[0.5, 0.5], &[r0.clone(), to_density(&one)]).unwrap();
        assert_eq!(m.populations(), vec![0.5, 0.5, 0.0, 0.0]);
        assert!(m.purity() < 1.0);
        assert!(m.is_physical());
        assert!(matches!(mix(&[-0.5, 1.5], &[r0.clone(), r0.clone()]), Err(Error::Validation(_))));
        assert!(matches!(mix(&[0.4, 0.5], &[r0.clone(), r0]), Err(Error::Validation(_))));
    }

    #[test]
    fn serialization_roundtrip() {
        let s = coherent_state(amp(0.2, 0.1), 6).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("{\"cutoff\":6,\"modes\":1,\"amplitudes\":[["));
        let back: PureState = serde_json::from_str(&json).unwrap();
        assert_eq!(back.amplitudes(), s.amplitudes());
        let bad = r#"{"cutoff":1,"modes":1,"amplitudes":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<PureState>(bad).is_err());
    }
}
