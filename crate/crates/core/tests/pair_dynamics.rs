use std::sync::Arc;

use cqed_core::basis::{build_two_node_collective_basis, Basis, PairStates};
use cqed_core::dynamics::{
    analytic_pair_evolution, first_maximum, pair_product_state, pair_sector_frequencies, pair_swap_hamiltonian,
    time_grid, Propagator,
};
use cqed_core::gates::{equivalence_up_to_global_phase, et_matrix};
use cqed_core::scalar::CMatrix;
use cqed_core::StateVector;
use num_complex::Complex64;
use proptest::prelude::*;

const OMEGA: f64 = 0.013;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn setup(n: usize) -> (PairStates, Propagator<f64>) {
    let pair = build_two_node_collective_basis(n, n).unwrap();
    let h = pair_swap_hamiltonian(&pair, n, OMEGA).unwrap();
    (pair.clone(), Propagator::new(&h).unwrap())
}

fn on_pair(pair: &PairStates, psi: &StateVector<f64>) -> StateVector<f64> {
    let (s, leak) = psi.to_pair_states(pair).unwrap();
    assert!(leak < 1e-12, "left the pair states: {leak:e}");
    s
}

#[test]
fn single_excitation_branches_match_closed_form() {
    // β₁β₂ = 0 keeps the state in the ground and single-excitation sectors.
    let amps = [(c(0.6, 0.0), c(0.0, 0.8), c(1.0, 0.0), c(0.0, 0.0)), (c(1.0, 0.0), c(0.0, 0.0), c(0.28, 0.0), c(0.0, 0.96))];
    for n in 1..=3 {
        let (pair, prop) = setup(n);
        for &(a1, b1, a2, b2) in &amps {
            let psi0 = pair_product_state(&pair, a1, b1, a2, b2).unwrap();
            let period = std::f64::consts::PI / (n as f64 * OMEGA);
            for t in time_grid(period, 100) {
                let numeric = on_pair(&pair, &prop.evolve(&psi0, t).unwrap());
                let (analytic, missing) = analytic_pair_evolution(a1, b1, a2, b2, OMEGA, n, t).to_state(&pair).unwrap();
                assert!(missing < 1e-15);
                let f = numeric.fidelity(&analytic).unwrap();
                assert!(f >= 1.0 - 1e-9, "N={n} t={t}: fidelity {f}");
            }
        }
    }
}

#[test]
fn transfer_frequency_is_n_omega() {
    for n in 1..=3 {
        let (pair, prop) = setup(n);
        let psi0 = pair_product_state(&pair, c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let k3 = pair.position("ψ3").unwrap();
        let p3 = |t: f64| on_pair(&pair, &prop.evolve(&psi0, t).unwrap()).population(k3);
        let horizon = 2.0 * std::f64::consts::PI / (n as f64 * OMEGA);
        let t_star = first_maximum(p3, 0.0, horizon, 400, 0.5).unwrap();
        let freq = std::f64::consts::FRAC_PI_2 / t_star;
        let want = n as f64 * OMEGA;
        assert!(((freq - want) / want).abs() < 1e-6, "N={n}: {freq} vs {want}");
        assert!((p3(t_star) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn double_excitation_sector_uses_exact_collective_frequency() {
    for n in 2..=3 {
        let (pair, prop) = setup(n);
        let k4 = pair.position("ψ4").unwrap();
        let k5 = pair.position("ψ5").unwrap();
        let psi4 = StateVector::basis_state(Arc::new(Basis::Pair(pair.clone())), k4).unwrap().from_pair_states().unwrap();
        let (_, w, peak) = pair_sector_frequencies(OMEGA, n);
        let p5 = |t: f64| on_pair(&pair, &prop.evolve(&psi4, t).unwrap()).population(k5);
        let t_star = first_maximum(p5, 0.0, 2.0 * std::f64::consts::PI / w, 400, 0.1).unwrap();
        let freq = std::f64::consts::FRAC_PI_2 / t_star;
        assert!(((freq - w) / w).abs() < 1e-6, "N={n}: {freq} vs {w}");
        assert!((p5(t_star) - peak).abs() < 1e-9);
        // The doubled rate 2NΩ_σ is only the large-N limit.
        let doubled = 2.0 * n as f64 * OMEGA;
        assert!(((freq - doubled) / doubled).abs() > 0.1);
    }
}

#[test]
fn double_excitation_closed_form_approaches_exact_at_large_n() {
    let mut previous = f64::INFINITY;
    for n in [2, 8, 32, 128] {
        let (pair, prop) = setup(n);
        let b = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi0 = pair_product_state(&pair, b, b, b, b).unwrap();
        // Short window so the accumulated phase error stays comparable across N.
        let horizon = 0.5 / (n as f64 * OMEGA);
        let worst = time_grid(horizon, 50)
            .into_iter()
            .map(|t| {
                let numeric = on_pair(&pair, &prop.evolve(&psi0, t).unwrap());
                let (analytic, _) = analytic_pair_evolution(b, b, b, b, OMEGA, n, t).to_state(&pair).unwrap();
                1.0 - numeric.fidelity(&analytic).unwrap()
            })
            .fold(0.0, f64::max);
        assert!(worst < previous, "N={n}: {worst:e} did not improve on {previous:e}");
        previous = worst;
    }
    assert!(previous < 1e-3);
}

#[test]
fn swap_evolution_is_the_et_gate() {
    for n in 1..=3 {
        let (pair, prop) = setup(n);
        let product = pair.product();
        // Logical |0⟩ = node 1 empty, node 2 excited.
        let cols = [product.index(&[0, 1]).unwrap(), product.index(&[1, 0]).unwrap()];
        for theta in [0.3, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 2.5] {
            let u = prop.unitary(theta / (2.0 * OMEGA * n as f64));
            let mut m = CMatrix::<f64>::zeros(2, 2);
            for (j, &cj) in cols.iter().enumerate() {
                for (i, &ci) in cols.iter().enumerate() {
                    m[(i, j)] = u[(ci, cj)];
                }
            }
            let r = equivalence_up_to_global_phase(&m, &et_matrix(theta), 1e-9).unwrap();
            assert!(r.equal, "N={n} θ={theta}: {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagation_conserves_norm(
        n in 1usize..=3,
        t in 0.0f64..2000.0,
        x in prop::array::uniform4(-1.0f64..1.0),
        y in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let (pair, prop) = setup(n);
        let n1 = (x[0] * x[0] + x[1] * x[1] + y[0] * y[0] + y[1] * y[1]).sqrt().max(1e-3);
        let n2 = (x[2] * x[2] + x[3] * x[3] + y[2] * y[2] + y[3] * y[3]).sqrt().max(1e-3);
        let psi0 = pair_product_state(
            &pair,
            c(x[0], y[0]) / n1,
            c(x[1], y[1]) / n1,
            c(x[2], y[2]) / n2,
            c(x[3], y[3]) / n2,
        )
        .unwrap();
        let psi = prop.evolve(&psi0, t).unwrap();
        prop_assert!((psi.norm() - psi0.norm()).abs() <= 1e-9);
    }
}
