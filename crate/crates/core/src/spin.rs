//! Collective-spin (Dicke) description of a uniformly rotated ensemble and
//! its oscillator approximation.
//!
//! Each atom starts in `g` and is rotated to `(|g⟩ + ε|s⟩)/√(1+|ε|²)`. The
//! product state lives in the symmetric sector, expanded over Dicke states
//! `|k⟩` with `k` atoms in `s`:
//!
//! `c_k = √C(N,k) · ε^k / (1+|ε|²)^{N/2}`.
//!
//! Spin conventions follow the per-atom labeling `σ_x = |g⟩⟨g| − |s⟩⟨s|`,
//! `σ_y = |g⟩⟨s| + |s⟩⟨g|`, `σ_z = i(|s⟩⟨g| − |g⟩⟨s|)`, so `[J_y, J_z] = iJ_x`
//! and the all-`g` state is the top `J_x` eigenstate. Quadratures are
//! `X = J_y/√(N/2)`, `P = J_z/√(N/2)`. Dicke state `|k⟩` is identified with
//! oscillator number state `|k⟩` (leading Holstein–Primakoff order).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_state, fidelity, ComplexAmplitude, Modes, PureState, C64, DEFAULT_TAIL_THRESHOLD};

/// Atom number and per-atom rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    n_atoms: u64,
    epsilon: ComplexAmplitude,
}

impl EnsembleSpec {
    pub fn new(n_atoms: u64, epsilon: ComplexAmplitude) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::Validation("ensemble needs at least one atom".into()));
        }
        Ok(Self { n_atoms, epsilon })
    }

    pub fn n_atoms(&self) -> u64 {
        self.n_atoms
    }

    pub fn epsilon(&self) -> ComplexAmplitude {
        self.epsilon
    }

    /// Oscillator amplitude `α = √N ε`.
    pub fn alpha(&self) -> ComplexAmplitude {
        let s = (self.n_atoms as f64).sqrt();
        ComplexAmplitude::new(s * self.epsilon.re(), s * self.epsilon.im())
            .expect("finite epsilon and atom count give a finite alpha")
    }
}

/// Symmetric-sector state truncated at `k_max` excitations.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeState {
    amplitudes: Vec<C64>,
    n_atoms: u64,
    tail_mass: f64,
}

impl DickeState {
    pub fn new(amplitudes: Vec<C64>, n_atoms: u64) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() as u64 > n_atoms + 1 {
            return Err(Error::Shape(format!(
                "Dicke state of {n_atoms} atoms needs 1..={} amplitudes, got {}",
                n_atoms + 1,
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate("Dicke state has zero norm".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|c| c / norm).collect();
        Ok(Self { amplitudes, n_atoms, tail_mass: 0.0 })
    }

    /// Dicke basis state `|k⟩`.
    pub fn excitation(k: usize, n_atoms: u64) -> Result<Self> {
        if k as u64 > n_atoms {
            return Err(Error::Range(format!("{k} excitations exceed {n_atoms} atoms")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); k + 1];
        amps[k] = C64::new(1.0, 0.0);
        Self::new(amps, n_atoms)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_atoms(&self) -> u64 {
        self.n_atoms
    }

    pub fn k_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Probability mass beyond `k_max` dropped before renormalization.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Identifies Dicke state `|k⟩` with Fock state `|k⟩`.
    pub fn to_fock(&self, cutoff: usize) -> Result<PureState> {
        if self.k_max() > cutoff {
            return Err(Error::Range(format!(
                "k_max {} exceeds Fock cutoff {cutoff}",
                self.k_max()
            )));
        }
        let mut amps = self.amplitudes.clone();
        amps.resize(cutoff + 1, C64::new(0.0, 0.0));
        PureState::new(amps, cutoff, Modes::One)
    }
}

/// `k_max = min(N, cutoff)`.
pub fn default_k_max(spec: &EnsembleSpec, cutoff: usize) -> usize {
    (spec.n_atoms.min(cutoff as u64)) as usize
}

/// Exact symmetric expansion of the rotated product state, using the default tail threshold.
pub fn rotated_product_state(spec: &EnsembleSpec, k_max: usize) -> Result<DickeState> {
    rotated_product_state_with_threshold(spec, k_max, DEFAULT_TAIL_THRESHOLD)
}

pub fn rotated_product_state_with_threshold(
    spec: &EnsembleSpec,
    k_max: usize,
    threshold: f64,
) -> Result<DickeState> {
    let n = spec.n_atoms;
    if k_max < 1 || k_max as u64 > n {
        return Err(Error::Range(format!("k_max must be in 1..={n}, got {k_max}")));
    }
    let eps = spec.epsilon.value();
    let mag2 = eps.norm_sqr();
    let nf = n as f64;
    let mut amps = vec![C64::new(0.0, 0.0); k_max + 1];
    if mag2 == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
        return Ok(DickeState { amplitudes: amps, n_atoms: n, tail_mass: 0.0 });
    }
    let ln_eps = 0.5 * mag2.ln();
    let phase = eps.arg();
    let ln_norm = 0.5 * nf * mag2.ln_1p();
    let mut ln_binom = 0.0;
    for (k, a) in amps.iter_mut().enumerate() {
        if k > 0 {
            ln_binom += ((n - k as u64 + 1) as f64).ln() - (k as f64).ln();
        }
        let ln_mag = 0.5 * ln_binom + k as f64 * ln_eps - ln_norm;
        *a = C64::from_polar(ln_mag.exp(), k as f64 * phase);
    }
    let tail = binomial_tail(n, mag2, k_max, ln_binom);
    if tail > threshold {
        return Err(Error::Truncation { mass: tail, threshold });
    }
    let mut state = DickeState::new(amps, n)?;
    state.tail_mass = tail;
    Ok(state)
}

/// Mass of the excitation-number distribution above `k_max`. `ln_binom_kmax` is `ln C(N, k_max)`.
fn binomial_tail(n: u64, mag2: f64, k_max: usize, ln_binom_kmax: f64) -> f64 {
    let k0 = k_max as u64 + 1;
    if k0 > n {
        return 0.0;
    }
    let nf = n as f64;
    let ln_binom = ln_binom_kmax + ((n - k0 + 1) as f64).ln() - (k0 as f64).ln();
    let mut term = (ln_binom + k0 as f64 * mag2.ln() - nf * mag2.ln_1p()).exp();
    let mean = nf * mag2 / (1.0 + mag2);
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        if k == n {
            break;
        }
        term *= (n - k) as f64 / (k + 1) as f64 * mag2;
        k += 1;
        if term == 0.0 || (k as f64 > mean && term <= sum * 1e-17) || k > k0 + 1_000_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Coherent state `|√N ε⟩` standing in for the ensemble.
pub fn oscillator_approximation(spec: &EnsembleSpec, cutoff: usize) -> Result<PureState> {
    coherent_state(spec.alpha(), cutoff)
}

/// Overlap between the exact Dicke expansion (embedded in Fock space) and its coherent approximation.
pub fn dicke_coherent_fidelity(spec: &EnsembleSpec, cutoff: usize) -> Result<f64> {
    let dicke = rotated_product_state(spec, default_k_max(spec, cutoff))?.to_fock(cutoff)?;
    let coh = oscillator_approximation(spec, cutoff)?;
    fidelity(&dicke, &coh)
}

/// Collective-spin moments of a Dicke state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectiveExpectations {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// `⟨[X, P]⟩ = i⟨J_x⟩/(N/2)`, as `(re, im)`.
    pub commutator_xp: (f64, f64),
    /// `|⟨[X, P]⟩/i − 1|`.
    pub commutator_deviation: f64,
}

pub fn collective_expectations(d: &DickeState) -> CollectiveExpectations {
    let n = d.n_atoms as f64;
    let c = &d.amplitudes;
    // S† |k⟩ = √((k+1)(N−k)) |k+1⟩ raises the number of atoms in s
    let raise = |k: usize| ((k + 1) as f64 * (n - k as f64)).sqrt();
    let mut s_up = C64::new(0.0, 0.0);
    let mut s_up2 = C64::new(0.0, 0.0);
    let mut up_down = 0.0;
    let mut down_up = 0.0;
    let mut jx = 0.0;
    for k in 0..c.len() {
        let p = c[k].norm_sqr();
        jx += p * (n / 2.0 - k as f64);
        up_down += p * k as f64 * (n - k as f64 + 1.0);
        down_up += p * (k + 1) as f64 * (n - k as f64);
        if k + 1 < c.len() {
            s_up += c[k + 1].conj() * c[k] * raise(k);
        }
        if k + 2 < c.len() {
            s_up2 += c[k + 2].conj() * c[k] * raise(k) * raise(k + 1);
        }
    }
    let jy = s_up.re;
    // written as a difference so a real state reports +0, not −0
    let jz = 0.0 - s_up.im;
    let jy2 = 0.25 * (2.0 * s_up2.re + up_down + down_up);
    let jz2 = 0.25 * (up_down + down_up - 2.0 * s_up2.re);
    let half = n / 2.0;
    let ratio = jx / half;
    CollectiveExpectations {
        jx,
        jy,
        jz,
        var_x: (jy2 - jy * jy) / half,
        var_p: (jz2 - jz * jz) / half,
        commutator_xp: (0.0, ratio),
        commutator_deviation: (ratio - 1.0).abs(),
    }
}
