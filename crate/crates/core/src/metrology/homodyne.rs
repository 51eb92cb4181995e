//! Homodyne quadrature statistics on a tabulated grid.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Modes, StateRef, C64};

/// Quadrature convention shared by every routine in this crate.
///
/// `X_φ = (a e^{−iφ} + a† e^{iφ})/√2`. At `φ = 0`, a coherent state `|β⟩` has
/// quadrature mean `√2·Re β` and variance `1/2`; the Fock state `|n⟩` has
/// wavefunction `u_n(x) = π^{−1/4} (2ⁿ n!)^{−1/2} Hₙ(x) e^{−x²/2}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuadratureConvention;

impl QuadratureConvention {
    /// Ratio between the quadrature mean and `Re β`.
    pub const MEAN_SCALE: f64 = SQRT_2;
    pub const VACUUM_VARIANCE: f64 = 0.5;

    pub fn coherent_mean(beta: C64, phase: f64) -> f64 {
        Self::MEAN_SCALE * (beta * C64::from_polar(1.0, -phase)).re
    }
}

/// Required agreement between the tabulated density's integral and one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Uniform grid for tabulating quadrature densities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self { min: -8.0, max: 8.0, step: 1e-3 }
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.max > self.min && self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Validation(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step).round() as usize;
        (0..=n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

/// Hermite functions `u_0(x) ..= u_cutoff(x)` by the stable three-term recursion.
pub fn hermite_functions(x: f64, cutoff: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if cutoff >= 1 {
        out.push(SQRT_2 * x * out[0]);
    }
    for n in 1..cutoff {
        let next = (2.0 / (n + 1) as f64).sqrt() * x * out[n] - (n as f64 / (n + 1) as f64).sqrt() * out[n - 1];
        out.push(next);
    }
}

/// Tabulated quadrature density.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraturePdf {
    pub xs: Vec<f64>,
    pub density: Vec<f64>,
    pub step: f64,
}

impl QuadraturePdf {
    fn trapezoid(&self, f: impl Fn(f64) -> f64) -> f64 {
        let n = self.xs.len();
        let mut acc = 0.0;
        for i in 0..n {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * self.density[i] * f(self.xs[i]);
        }
        acc * self.step
    }

    pub fn integral(&self) -> f64 {
        self.trapezoid(|_| 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.trapezoid(|x| x) / self.integral()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.trapezoid(|x| (x - m) * (x - m)) / self.integral()
    }
}

/// Density of the `φ`-quadrature outcome for a single-mode state.
pub fn quadrature_pdf<'a>(state: impl Into<StateRef<'a>>, phase: f64, grid: &Grid) -> Result<QuadraturePdf> {
    grid.validate()?;
    let state = state.into();
    // ρ'_{mn} = ρ_{mn} e^{−i(m−n)φ}, normalized
    let rho = match state {
        StateRef::Pure(s) => {
            if s.modes() != Modes::One {
                return Err(Error::Shape("quadrature density needs a single-mode state".into()));
            }
            let s = s.normalize()?;
            let c: Vec<C64> = s
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(n, c)| c * C64::from_polar(1.0, -(n as f64) * phase))
                .collect();
            Density::Pure(c)
        }
        StateRef::Mixed(r) => {
            if r.modes() != Modes::One {
                return Err(Error::Shape("quadrature density needs a single-mode state".into()));
            }
            let r = r.normalize()?;
            let d = r.dim();
            let m = r.matrix();
            let mut out = vec![C64::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] = m[(i, j)] * C64::from_polar(1.0, -((i as f64) - (j as f64)) * phase);
                }
            }
            Density::Mixed(out, d)
        }
    };
    let cutoff = match &rho {
        Density::Pure(c) => c.len() - 1,
        Density::Mixed(_, d) => d - 1,
    };
    let xs = grid.points();
    let mut u = Vec::with_capacity(cutoff + 1);
    let density = xs
        .iter()
        .map(|&x| {
            hermite_functions(x, cutoff, &mut u);
            match &rho {
                Density::Pure(c) => c.iter().zip(&u).map(|(c, u)| c * u).sum::<C64>().norm_sqr(),
                Density::Mixed(m, d) => {
                    let mut acc = 0.0;
                    for i in 0..*d {
                        for j in 0..*d {
                            acc += (m[i * d + j] * (u[i] * u[j])).re;
                        }
                    }
                    acc.max(0.0)
                }
            }
        })
        .collect();
    let pdf = QuadraturePdf { xs, density, step: grid.step };
    let integral = pdf.integral();
    if (integral - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::GridTooCoarse { integral, tolerance: NORMALIZATION_TOLERANCE });
    }
    Ok(pdf)
}

enum Density {
    Pure(Vec<C64>),
    Mixed(Vec<C64>, usize),
}

/// Inverse-CDF sampler over a tabulated density, linear within grid cells.
#[derive(Clone, Debug)]
pub struct HomodyneSampler {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl HomodyneSampler {
    pub fn new(pdf: &QuadraturePdf) -> Self {
        let n = pdf.xs.len();
        let mut cdf = Vec::with_capacity(n);
        cdf.push(0.0);
        for i in 1..n {
            let prev = cdf[i - 1];
            cdf.push(prev + 0.5 * (pdf.density[i - 1] + pdf.density[i]) * pdf.step);
        }
        let total = cdf[n - 1];
        for c in &mut cdf {
            *c /= total;
        }
        Self { xs: pdf.xs.clone(), cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let width = self.cdf[i + 1] - self.cdf[i];
        let frac = if width > 0.0 { (u - self.cdf[i]) / width } else { 0.5 };
        self.xs[i] + frac * (self.xs[i + 1] - self.xs[i])
    }
}

/// `count` homodyne outcomes drawn from `pdf`.
pub fn sample_homodyne<R: Rng + ?Sized>(pdf: &QuadraturePdf, count: usize, rng: &mut R) -> Vec<f64> {
    let sampler = HomodyneSampler::new(pdf);
    (0..count).map(|_| sampler.sample(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state, to_density, ComplexAmplitude};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn vacuum_density_is_gaussian() {
        let vac = number_state(0, 4).unwrap();
        let pdf = quadrature_pdf(&vac, 0.0, &Grid::default()).unwrap();
        for (x, p) in pdf.xs.iter().zip(&pdf.density).step_by(997) {
            let exact = (-x * x).exp() / PI.sqrt();
            assert!((p - exact).abs() < 1e-14);
        }
        assert!(pdf.mean().abs() < 1e-12);
        assert!((pdf.variance() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_photon_density() {
        let one = number_state(1, 4).unwrap();
        let pdf = quadrature_pdf(&one, 0.3, &Grid::default()).unwrap();
        for (x, p) in pdf.xs.iter().zip(&pdf.density).step_by(991) {
            let exact = 2.0 * x * x * (-x * x).exp() / PI.sqrt();
            assert!((p - exact).abs() < 1e-14);
        }
        assert!(pdf.mean().abs() < 1e-12);
    }

    #[test]
    fn coherent_mean_follows_convention() {
        let beta = ComplexAmplitude::new(0.1, 0.05).unwrap();
        let s = coherent_state(beta, 10).unwrap();
        let pdf = quadrature_pdf(&s, 0.0, &Grid::default()).unwrap();
        assert!((pdf.mean() - SQRT_2 * 0.1).abs() < 1e-6);
        let pdf = quadrature_pdf(&s, std::f64::consts::FRAC_PI_2, &Grid::default()).unwrap();
        let expected = QuadratureConvention::coherent_mean(beta.value(), std::f64::consts::FRAC_PI_2);
        assert!((pdf.mean() - expected).abs() < 1e-6);
        assert!((expected - SQRT_2 * 0.05).abs() < 1e-15);
    }

    #[test]
    fn mixed_and_pure_densities_agree() {
        let s = coherent_state(ComplexAmplitude::new(0.4, -0.2).unwrap(), 10).unwrap();
        let g = Grid { min: -8.0, max: 8.0, step: 1e-2 };
        let a = quadrature_pdf(&s, 0.7, &g).unwrap();
        let b = quadrature_pdf(&to_density(&s), 0.7, &g).unwrap();
        let diff = a.density.iter().zip(&b.density).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-13);
    }

    #[test]
    fn coarse_or_narrow_grid_rejected() {
        let vac = number_state(0, 2).unwrap();
        let narrow = Grid { min: -1.0, max: 1.0, step: 1e-3 };
        assert!(matches!(quadrature_pdf(&vac, 0.0, &narrow), Err(Error::GridTooCoarse { .. })));
        let bad = Grid { min: 1.0, max: -1.0, step: 1e-3 };
        assert!(quadrature_pdf(&vac, 0.0, &bad).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let vac = number_state(0, 2).unwrap();
        let pdf = quadrature_pdf(&vac, 0.0, &Grid::default()).unwrap();
        let a = sample_homodyne(&pdf, 1000, &mut ChaCha20Rng::seed_from_u64(5));
        let b = sample_homodyne(&pdf, 1000, &mut ChaCha20Rng::seed_from_u64(5));
        assert_eq!(a, b);
        let count = 1_000_000;
        let xs = sample_homodyne(&pdf, count, &mut ChaCha20Rng::seed_from_u64(11));
        let mean = xs.iter().sum::<f64>() / count as f64;
        assert!(mean.abs() < 5.0 * (0.5f64).sqrt() / (count as f64).sqrt());
    }

    #[test]
    fn coherent_sample_variance() {
        let s = coherent_state(ComplexAmplitude::real(0.1).unwrap(), 10).unwrap();
        let pdf = quadrature_pdf(&s, 0.0, &Grid::default()).unwrap();
        let count = 1_000_000;
        let xs = sample_homodyne(&pdf, count, &mut ChaCha20Rng::seed_from_u64(3));
        let mean = xs.iter().sum::<f64>() / count as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
        assert!((var - 0.5).abs() < 0.005, "{var}");
    }
}
