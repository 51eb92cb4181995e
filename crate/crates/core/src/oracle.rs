//! Independent reference computations.
//!
//! Nothing here calls into the block-structured beam splitter, the POVM
//! helpers or the log-domain Dicke expansion; each routine recomputes its
//! quantity from first principles with dense matrices or closed forms.

use nalgebra::DMatrix;

use crate::fock::{two_mode_index, C64};
use crate::optics::HeraldModel;

/// Annihilation operators `(a ⊗ I, I ⊗ b)` on the truncated two-mode space.
pub fn dense_ladder(cutoff: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let w = cutoff + 1;
    let mut a = DMatrix::zeros(w * w, w * w);
    let mut b = DMatrix::zeros(w * w, w * w);
    for m in 0..w {
        for n in 0..w {
            let i = two_mode_index(cutoff, m, n);
            if m > 0 {
                a[(two_mode_index(cutoff, m - 1, n), i)] = (m as f64).sqrt();
            }
            if n > 0 {
                b[(two_mode_index(cutoff, m, n - 1), i)] = (n as f64).sqrt();
            }
        }
    }
    (a, b)
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn dense_expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.iter().map(|x| x.abs()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale /= 2.0;
        squarings += 1;
    }
    let x = m * scale;
    let dim = m.nrows();
    let mut term = DMatrix::<f64>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Dense `exp(θ(a†b − a b†))` built from truncated ladder operators.
///
/// Exact on every block with total occupation `≤ cutoff`.
pub fn dense_beam_splitter(cutoff: usize, theta: f64) -> DMatrix<f64> {
    let (a, b) = dense_ladder(cutoff);
    let gen = (a.transpose() * &b - &a * b.transpose()) * theta;
    dense_expm(&gen)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Output amplitudes for input `|m, n⟩` from the creation-operator expansion
/// `a† → r a† − t b†`, `b† → t a† + r b†`. Returned in the two-mode layout.
pub fn fock_formula_beam_splitter(m: usize, n: usize, t: f64, cutoff: usize) -> Vec<f64> {
    let r = (1.0 - t * t).sqrt();
    let w = cutoff + 1;
    let mut out = vec![0.0; w * w];
    let total = m + n;
    for i in 0..=m {
        for j in 0..=n {
            let coef = binomial(m, i) * r.powi(i as i32) * (-t).powi((m - i) as i32)
                * binomial(n, j) * t.powi(j as i32) * r.powi((n - j) as i32);
            let p = i + j;
            let q = total - p;
            if p <= cutoff && q <= cutoff {
                out[two_mode_index(cutoff, p, q)] +=
                    coef * (factorial(p) * factorial(q) / (factorial(m) * factorial(n))).sqrt();
            }
        }
    }
    out
}

/// `|⟨β|γ⟩|² = exp(−|β − γ|²)`.
pub fn coherent_overlap(beta: C64, gamma: C64) -> f64 {
    (-(beta - gamma).norm_sqr()).exp()
}

/// Two-atom product `(|g⟩+ε|s⟩)^{⊗2}/(1+|ε|²)` projected on the symmetric states `|gg⟩, (|gs⟩+|sg⟩)/√2, |ss⟩`.
pub fn two_atom_dicke(eps: C64) -> [C64; 3] {
    let norm = (1.0 + eps.norm_sqr()).sqrt();
    let single = [C64::new(1.0 / norm, 0.0), eps / norm];
    // basis gg, gs, sg, ss
    let prod = [
        single[0] * single[0],
        single[0] * single[1],
        single[1] * single[0],
        single[1] * single[1],
    ];
    [prod[0], (prod[1] + prod[2]) / 2f64.sqrt(), prod[3]]
}

/// Dense POVM element `E ⊗ I` for a herald on mode A, using the closed-form click weights.
pub fn dense_click_operator(cutoff: usize, model: &HeraldModel) -> DMatrix<f64> {
    let w = cutoff + 1;
    let eta = model.read_efficiency;
    let pd = model.dark_count;
    let mut e = DMatrix::zeros(w * w, w * w);
    for m in 0..w {
        let weight = if model.resolving {
            let one_real = if m == 0 { 0.0 } else { m as f64 * eta * (1.0 - eta).powi(m as i32 - 1) };
            (1.0 - pd) * one_real + pd * (1.0 - eta).powi(m as i32)
        } else {
            1.0 - (1.0 - pd) * (1.0 - eta).powi(m as i32)
        };
        for n in 0..w {
            let i = two_mode_index(cutoff, m, n);
            e[(i, i)] = weight;
        }
    }
    e
}
