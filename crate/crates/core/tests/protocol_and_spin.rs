use hal_core::fock::{fidelity, number_state, two_mode_index, ComplexAmplitude, State};
use hal_core::optics::{HeraldModel, Mode};
use hal_core::oracle;
use hal_core::protocol::{run_exact, run_first_order, InputKind, ProtocolConfig};
use hal_core::spin::{
    collective_expectations, dicke_coherent_fidelity, rotated_product_state, DickeState, EnsembleSpec,
};
use proptest::prelude::*;

fn config(alpha: f64, t: f64) -> ProtocolConfig {
    ProtocolConfig::new(ComplexAmplitude::real(alpha).unwrap(), t)
}

/// Herald probability from the dense unitary and dense POVM, for a truncated signal `|0⟩+α|1⟩`
/// and a source emitting `|1⟩` with probability `p1`.
fn dense_success_probability(alpha: f64, t: f64, p1: f64, model: &HeraldModel) -> f64 {
    let cutoff = 4;
    let u = oracle::dense_beam_splitter(cutoff, t.asin());
    let e = oracle::dense_click_operator(cutoff, model);
    let norm = (1.0 + alpha * alpha).sqrt();
    let mut p = 0.0;
    for (photons, weight) in [(1usize, p1), (0usize, 1.0 - p1)] {
        let mut psi = nalgebra::DVector::<f64>::zeros(u.nrows());
        psi[two_mode_index(cutoff, 0, photons)] = 1.0 / norm;
        psi[two_mode_index(cutoff, 1, photons)] = alpha / norm;
        let out = &u * psi;
        p += weight * (out.transpose() * &e * &out)[(0, 0)];
    }
    p
}

#[test]
fn gain_converges_as_t_shrinks_at_fixed_ratio() {
    let ratio = 0.1;
    let mut last_gt = 0.0;
    let mut last_fid = 0.0;
    for t in [0.3, 0.2, 0.1, 0.05, 0.02] {
        let r = run_exact(&config(ratio * t, t)).unwrap();
        let gt = r.gain.unwrap() * t;
        assert!(gt > last_gt && r.fidelity_to_target > last_fid, "t = {t}");
        last_gt = gt;
        last_fid = r.fidelity_to_target;
    }
    assert!((last_gt - 1.0).abs() < 1e-3);
    assert!((last_fid - 1.0).abs() < 1e-6);
}

#[test]
fn first_order_agreement_constant() {
    let mut c: f64 = 0.0;
    for t in [0.02, 0.05, 0.1, 0.2, 0.3] {
        for frac in [0.0, 0.05, 0.1, 1.0 / 3.0] {
            let alpha = frac * t;
            let exact = run_exact(&config(alpha, t)).unwrap();
            let fo = run_first_order(ComplexAmplitude::real(alpha).unwrap(), t).unwrap();
            let scale = t * t + frac * frac;
            let dp = (exact.success_probability - fo.success_probability).abs() / fo.success_probability;
            c = c.max(dp / scale);
            if let (Some(ge), Some(gf)) = (exact.gain, fo.gain) {
                c = c.max((ge - gf).abs() / gf / scale);
            }
        }
    }
    assert!(c <= 3.0, "measured constant {c}");
}

#[test]
fn source_vacuum_is_transparent() {
    let mut cfg = config(0.0, 0.1);
    cfg.source_efficiency = 0.6;
    let r = run_exact(&cfg).unwrap();
    assert!((r.success_probability - 0.6 * 0.01).abs() < 1e-14);
    let vac = number_state(0, cfg.cutoff).unwrap();
    assert!((fidelity(&r.conditional_state, &vac).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn coherent_input_sits_close_to_truncated_input() {
    let mut cfg = config(0.01, 0.1);
    let truncated = run_exact(&cfg).unwrap();
    cfg.input_kind = InputKind::Coherent;
    let coherent = run_exact(&cfg).unwrap();
    assert!((coherent.success_probability - truncated.success_probability).abs() < 1e-4);
    match (&truncated.conditional_state, &coherent.conditional_state) {
        (State::Pure(a), State::Pure(b)) => assert!(a.inner(b).unwrap().norm() > 0.999),
        _ => panic!("ideal runs stay pure"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn success_probability_matches_dense_povm(
        alpha in -0.2f64..0.2, t in 0.02f64..0.5, p1 in 0.0f64..=1.0,
        eta in 0.0f64..=1.0, pd in 0.0f64..0.1, resolving in any::<bool>(),
    ) {
        let mut cfg = config(alpha, t);
        cfg.source_efficiency = p1;
        cfg.herald = HeraldModel::new(eta, pd, Mode::A, resolving).unwrap();
        let expected = dense_success_probability(alpha, t, p1, &cfg.herald);
        match run_exact(&cfg) {
            Ok(r) => prop_assert!((r.success_probability - expected).abs() < 1e-12),
            Err(_) => prop_assert!(expected < 1e-300),
        }
    }

    #[test]
    fn exact_gain_law(alpha in 1e-4f64..0.05, t in 0.02f64..0.6) {
        let r = run_exact(&config(alpha, t)).unwrap();
        prop_assert!((r.gain.unwrap() * t - (1.0 - 2.0 * t * t)).abs() < 1e-9);
        let p = (t * t + alpha * alpha * (1.0 - 2.0 * t * t).powi(2)) / (1.0 + alpha * alpha);
        prop_assert!((r.success_probability - p).abs() < 1e-12);
    }

    #[test]
    fn dicke_states_are_normalized(n in 1u64..1_000_000_000, alpha in 0.0f64..0.3) {
        let eps = alpha / (n as f64).sqrt();
        let spec = EnsembleSpec::new(n, ComplexAmplitude::real(eps).unwrap()).unwrap();
        let k_max = (n as usize).min(12);
        if let Ok(d) = rotated_product_state(&spec, k_max) {
            let norm: f64 = d.amplitudes().iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn dicke_fidelity_deficit_is_bounded_by_alpha4_over_n() {
    // 1 − F ≤ c·|α|⁴/N with c measured on the grid; the deficit in fact falls as |α|⁴/(8N²)
    let mut c_max: f64 = 0.0;
    for n in [100u64, 1_000, 10_000] {
        for alpha in [0.1, 0.2, 0.3, 1.0] {
            let eps = alpha / (n as f64).sqrt();
            let spec = EnsembleSpec::new(n, ComplexAmplitude::real(eps).unwrap()).unwrap();
            let deficit = 1.0 - dicke_coherent_fidelity(&spec, 12).unwrap();
            let a4 = alpha.powi(4);
            c_max = c_max.max(deficit * n as f64 / a4);
            let c2 = deficit * (n * n) as f64 / a4;
            assert!((0.1..0.4).contains(&c2), "N = {n}, alpha = {alpha}: {c2}");
        }
    }
    assert!(c_max < 4e-3, "{c_max}");
}

#[test]
fn ground_state_quadratures() {
    for n in [1u64, 10, 10_000, 1_000_000_000] {
        let e = collective_expectations(&DickeState::excitation(0, n).unwrap());
        assert!(e.jy.abs() < 1e-12 && e.jz.abs() < 1e-12);
        assert!((e.var_x - 0.5).abs() < 1e-12 && (e.var_p - 0.5).abs() < 1e-12);
        assert!(e.commutator_deviation < 1e-12);
    }
}

#[test]
fn commutator_deviation_for_small_rotation() {
    let spec = EnsembleSpec::new(10_000, ComplexAmplitude::real(1e-3).unwrap()).unwrap();
    let d = rotated_product_state(&spec, 12).unwrap();
    let e = collective_expectations(&d);
    // ⟨J_x⟩/(N/2) = 1 − 2|ε|²/(1+|ε|²)
    assert!((e.commutator_deviation - 2e-6 / (1.0 + 1e-6)).abs() < 1e-12);
    // ⟨X⟩ = √2 α for the real rotation, up to the 1 − O(|ε|²) spin contraction
    assert!((e.jy / (5_000f64).sqrt() - 2f64.sqrt() * 0.1).abs() < 1e-6);
}
