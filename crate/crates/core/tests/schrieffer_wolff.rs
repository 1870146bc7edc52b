//! The second-order effective Hamiltonian against brute-force matrix algebra.

use cqed_core::basis::{build_microscopic_basis, CompositeBasis, FockFactor, Mode, NodeSpec, Transition};
use cqed_core::hamiltonian::{
    effective_hamiltonian, microscopic_parts, sw_generator, CavityModel, CouplingSet, Frame, Photons,
};
use cqed_core::scalar::{commutator, frobenius, max_abs, CMatrix};
use num_complex::Complex64;

/// `|a⟩⟨b|` on factor `f`, identity elsewhere, built entry by entry from basis tuples.
fn local(basis: &CompositeBasis, f: usize, a: usize, b: usize) -> CMatrix<f64> {
    let d = basis.dimension();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        let ti = basis.tuple(i);
        if ti[f] != a {
            continue;
        }
        let mut tj = ti.clone();
        tj[f] = b;
        if let Some(j) = basis.index(&tj) {
            m[(i, j)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

struct Setup {
    model: CavityModel<f64>,
    basis: CompositeBasis,
    energies: [[f64; 3]; 2],
    g: [Complex64; 3],
    freq: [f64; 3],
}

fn setup() -> Setup {
    let energies = [[0.0, 1.0, 2.3], [0.05, 1.08, 2.41]];
    let freq = [0.82, 1.05, 2.02];
    let g = [Complex64::new(0.011, 0.0), Complex64::new(0.0, 0.017), Complex64::new(0.008, -0.003)];
    let nodes: Vec<NodeSpec<f64>> = energies.iter().map(|e| NodeSpec::three_level(1, *e).unwrap()).collect();
    let modes = FockFactor::new(
        Transition::ALL.iter().zip(freq).map(|(&t, w)| Mode::new(t, w, 2)).collect(),
    )
    .unwrap();
    let mut couplings = CouplingSet::new();
    for (k, &t) in Transition::ALL.iter().enumerate() {
        couplings = couplings.with_all(2, t, g[k]);
    }
    let basis = build_microscopic_basis(&nodes, Some(&modes)).unwrap();
    let model = CavityModel::new(nodes, modes, couplings).unwrap();
    Setup { model, basis, energies, g, freq }
}

#[test]
fn generator_cancels_first_order_coupling() {
    let s = setup();
    let (h0, h1) = microscopic_parts(&s.model, &s.basis).unwrap();
    let gen = sw_generator(&s.model, &s.basis).unwrap();
    let residual = frobenius(&(&h1 + commutator(&h0, &gen)));
    assert!(residual <= 1e-10 * frobenius(&h1), "residual {residual:e}");
    // s is anti-Hermitian
    assert!(max_abs(&(&gen + gen.adjoint())) < 1e-15);
}

#[test]
fn zero_photon_sector_matches_term_by_term_expression() {
    let s = setup();
    let (h0, h1) = microscopic_parts(&s.model, &s.basis).unwrap();
    let gen = sw_generator(&s.model, &s.basis).unwrap();
    let hs = &h0 + commutator(&h1, &gen) * Complex64::new(0.5, 0.0);

    // Independent construction: bare energies, intra-node swaps |g|²/Δ S_hl S_lh
    // and inter-node exchange ½(1/Δ₁ + 1/Δ₂)|g|² (S_hl¹ S_lh² + h.c.).
    let b = &s.basis;
    let d = b.dimension();
    let mut want = CMatrix::<f64>::zeros(d, d);
    for m in 0..2 {
        for lvl in 0..3 {
            want += local(b, m, lvl, lvl) * Complex64::new(s.energies[m][lvl], 0.0);
        }
    }
    for (k, &t) in Transition::ALL.iter().enumerate() {
        let (hi, lo) = t.levels();
        let delta: Vec<f64> = (0..2).map(|m| s.energies[m][hi] - s.energies[m][lo] - s.freq[k]).collect();
        let g2 = s.g[k].norm_sqr();
        for m in 0..2 {
            want += local(b, m, hi, lo) * local(b, m, lo, hi) * Complex64::new(g2 / delta[m], 0.0);
        }
        let ex = local(b, 0, hi, lo) * local(b, 1, lo, hi);
        let c = Complex64::new(0.5 * (1.0 / delta[0] + 1.0 / delta[1]) * g2, 0.0);
        want += (&ex + ex.adjoint()) * c;
    }

    let zero: Vec<usize> = (0..d).filter(|&i| b.photon_numbers(i) == [0, 0, 0]).collect();
    assert_eq!(zero.len(), 9);
    let scale = max_abs(&h1);
    for &i in &zero {
        for &j in &zero {
            let diff = (hs[(i, j)] - want[(i, j)]).norm();
            assert!(diff <= 1e-10 * scale, "({}, {}): {diff:e}", b.label(i), b.label(j));
        }
    }

    // The library's closed form agrees with the brute-force commutator on the same block.
    let closed = effective_hamiltonian(&s.model, b, Photons::Quantized, &Frame::Lab).unwrap();
    for &i in &zero {
        for &j in &zero {
            assert!((closed.element(i, j) - hs[(i, j)]).norm() <= 1e-12);
        }
    }
}

#[test]
fn closed_form_matches_commutator_on_one_photon_states() {
    let s = setup();
    let (h0, h1) = microscopic_parts(&s.model, &s.basis).unwrap();
    let gen = sw_generator(&s.model, &s.basis).unwrap();
    let hs = &h0 + commutator(&h1, &gen) * Complex64::new(0.5, 0.0);
    let closed = effective_hamiltonian(&s.model, &s.basis, Photons::Quantized, &Frame::Lab).unwrap();
    // Below the truncation edge the brute-force product is exact.
    let low: Vec<usize> =
        (0..s.basis.dimension()).filter(|&i| s.basis.photon_numbers(i).iter().sum::<usize>() <= 1).collect();
    for &i in &low {
        for &j in &low {
            assert!((closed.element(i, j) - hs[(i, j)]).norm() <= 1e-12, "{} {}", s.basis.label(i), s.basis.label(j));
        }
    }
}
