use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use ratchet::propagator::{gauss_sum_free_step, resonant_free_step, GammaTable};
use ratchet::{
    period_map, split_step_oracle, GridSpec, KickPotential, ResonanceOrder, WaveFunction,
};

fn coprime_order() -> impl Strategy<Value = ResonanceOrder> {
    (1u64..=32, 1u64..=32).prop_filter_map("coprime", |(r, q)| ResonanceOrder::new(r, q).ok())
}

fn norm_drift(state: &WaveFunction) -> f64 {
    (state.norm_sqr() - 1.0).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_operations_preserve_norm(
        seed in any::<u64>(),
        s in -10.0f64..10.0,
        order in coprime_order(),
        k in 0.0f64..8.0,
        a in 0.0f64..2.0,
        alpha in -3.2f64..3.2,
    ) {
        let v = KickPotential::new(k, a, alpha).unwrap();
        let grid = v.grid_with_cutoff(96).unwrap();
        let phi = WaveFunction::random(grid, 20, seed);
        prop_assert!(norm_drift(&phi) <= 1e-12);
        prop_assert!(norm_drift(&phi.translate(s)) <= 1e-12);
        prop_assert!(norm_drift(&phi.parity_reflect()) <= 1e-12);
        prop_assert!(norm_drift(&resonant_free_step(&phi, order)) <= 1e-12);
        prop_assert!(norm_drift(&period_map(&phi, v, order).unwrap()) <= 1e-12);
    }

    #[test]
    fn reflection_flips_momentum(seed in any::<u64>(), band in 1usize..40) {
        let phi = WaveFunction::random(GridSpec::with_cutoff(48).unwrap(), band, seed);
        let (p, pr) = (phi.observables(0).p_mean, phi.parity_reflect().observables(0).p_mean);
        prop_assert!((p + pr).abs() <= 1e-13, "{} vs {}", p, pr);
    }

    #[test]
    fn translation_keeps_momentum_spectrum(seed in any::<u64>(), s in -50.0f64..50.0) {
        let phi = WaveFunction::random(GridSpec::with_cutoff(40).unwrap(), 30, seed);
        let shifted = phi.translate(s);
        for (a, b) in phi.coeffs().iter().zip(shifted.coeffs()) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-15);
        }
    }

    #[test]
    fn position_round_trip(seed in any::<u64>(), m_max in 1usize..80, extra in 0usize..64) {
        let grid = GridSpec::new(m_max, 2 * m_max + 1 + extra).unwrap();
        let phi = WaveFunction::random(grid, m_max, seed);
        let back = WaveFunction::from_position_samples(&phi.to_position_samples(), grid).unwrap();
        prop_assert!(phi.max_difference(&back).unwrap() <= 1e-13);
    }

    #[test]
    fn gauss_sum_and_phase_forms_agree(seed in any::<u64>(), order in coprime_order()) {
        let phi = WaveFunction::random(GridSpec::with_cutoff(64).unwrap(), 64, seed);
        let table = GammaTable::new(order);
        let d = resonant_free_step(&phi, order)
            .max_difference(&gauss_sum_free_step(&phi, &table))
            .unwrap();
        prop_assert!(d <= 1e-12, "r={} q={}: {}", order.r(), order.q(), d);
    }

    #[test]
    fn period_map_matches_split_step(
        seed in any::<u64>(),
        which in 0usize..5,
        k in 0.0f64..6.0,
        a in 0.0f64..2.0,
        alpha in -3.2f64..3.2,
    ) {
        let (r, q) = [(1, 2), (1, 3), (2, 3), (1, 5), (3, 5)][which];
        let order = ResonanceOrder::new(r, q).unwrap();
        let v = KickPotential::new(k, a, alpha).unwrap();
        let phi = WaveFunction::random(v.grid_with_cutoff(128).unwrap(), 24, seed);
        let d = period_map(&phi, v, order)
            .unwrap()
            .max_difference(&split_step_oracle(&phi, v, order).unwrap())
            .unwrap();
        prop_assert!(d <= 1e-10, "{}", d);
    }
}

#[test]
fn long_run_stays_unitary() {
    let v = KickPotential::new(0.5, 0.3, 1.0).unwrap();
    let order = ResonanceOrder::new(1, 3).unwrap();
    let mut phi = WaveFunction::uniform(v.grid_for_kicks(1000));
    let mut previous = phi.norm_sqr();
    for _ in 0..1000 {
        phi = period_map(&phi, v, order).unwrap();
        let norm = phi.norm_sqr();
        assert!((norm - previous).abs() <= 1e-12);
        previous = norm;
    }
    assert!(norm_drift(&phi) <= 1e-9);
}

#[test]
fn energy_grows_quadratically_at_resonance() {
    let v = KickPotential::new(1.0, 0.0, 0.0).unwrap();
    let order = ResonanceOrder::new(1, 3).unwrap();
    let grid = v.grid_for_kicks(200);
    let phi = WaveFunction::from_position_fn(|t| 1.0 + 0.5 * Complex64::from_polar(1.0, t), grid)
        .unwrap();
    let trajectory = ratchet::evolve(&phi, v, order, 200).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = trajectory.records[50..]
        .iter()
        .map(|r| ((r.kick as f64).ln(), r.observables.p_second.ln()))
        .unzip();
    let fit = ratchet::analysis::linear_fit(&x, &y);
    assert!((fit.slope - 2.0).abs() <= 0.1, "exponent {}", fit.slope);
}

#[test]
fn uniform_state_first_kick_matches_position_form() {
    // One period from the uniform state is e^{−iV(θ)}/√(2π), whatever q is.
    let v = KickPotential::new(2.3, 0.4, 0.6).unwrap();
    let grid = v.grid_with_cutoff(64).unwrap();
    for (r, q) in [(1, 3), (2, 5), (3, 7)] {
        let order = ResonanceOrder::new(r, q).unwrap();
        let samples = period_map(&WaveFunction::uniform(grid), v, order)
            .unwrap()
            .to_position_samples();
        for (j, s) in samples.iter().enumerate() {
            let expected = Complex64::from_polar(1.0 / TAU.sqrt(), -v.value(grid.theta(j)));
            assert!((s - expected).norm() <= 1e-12);
        }
    }
}
