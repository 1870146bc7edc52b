use cqed_core::circuits::{
    and_gate, apply, controlled_power_improved, controlled_power_standard, encoded_toffoli, logical_action,
    random_unitary, single_qubit_ops, standard_toffoli_upto_phase, verify_controlled_power, Address, Circuit,
    LogicalRegister, Op,
};
use cqed_core::gates::{
    cnot, controlled_et, equivalence_up_to_global_phase, et_matrix, hadamard, pauli_x, pcet,
    phase_matrix, synthesize_rotation, toffoli, unitarity_defect,
};
use cqed_core::scalar::{max_abs, CMatrix};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn pcet_phase_is_read_from_the_first_diagonal_entry() {
    let p = pcet::<f64>().matrix;
    let r = equivalence_up_to_global_phase(&p, &cnot().matrix, 1e-12).unwrap();
    assert!(r.equal);
    assert!((p[(0, 0)].norm() - 1.0).abs() < 1e-15);
    assert!((r.phase - p[(0, 0)].arg()).abs() < 1e-12);
    assert!((r.phase + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    // PCET is its own inverse up to phase.
    let sq = &p * &p;
    assert!(equivalence_up_to_global_phase(&sq, &CMatrix::identity(4, 4), 1e-12).unwrap().equal);
    // C(ET(0)) is the identity.
    assert!(max_abs(&(controlled_et(0.0f64).matrix - CMatrix::identity(4, 4))) < 1e-15);
}

#[test]
fn and_gate_reproduces_the_four_branch_map() {
    let a = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.1, 0.7)];
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v = DVector::from_iterator(4, a.iter().map(|z| z / norm));
    let reg = LogicalRegister::from_logical(&v, 2, 1).unwrap();
    let mut circ = Circuit::new(2, 1);
    circ.extend(and_gate(0, 1, Address::Ancilla(0)));
    let out = apply(&reg, &circ).unwrap();
    let phase = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    // Node order: q0.a q0.b q1.a q1.b anc, bit k = node k.
    let mask = |occ: [u8; 5]| occ.iter().enumerate().fold(0u64, |m, (k, &o)| m | ((o as u64) << k));
    let expect = [
        (mask([0, 1, 0, 1, 0]), v[0]),
        (mask([0, 1, 1, 0, 0]), v[1]),
        (mask([1, 0, 0, 1, 0]), v[2]),
        (mask([1, 0, 0, 0, 1]), v[3]),
    ];
    let mut total = 0.0;
    for (m, z) in expect {
        assert!((out.amplitude(m) - z * phase).norm() < 1e-15);
        total += out.amplitude(m).norm_sqr();
    }
    assert!((total - 1.0).abs() < 1e-14);
}

#[test]
fn encoded_toffoli_truth_table_and_ancilla() {
    let mut circ = Circuit::<f64>::new(3, 1);
    circ.push(encoded_toffoli(0, 1, 2, Address::Ancilla(0)));
    let act = logical_action(&circ, &[0, 1, 2]).unwrap();
    let r = equivalence_up_to_global_phase(&act.matrix, &toffoli().matrix, 1e-10).unwrap();
    assert!(r.equal, "{r}");
    assert!(act.ancilla_residual <= 1e-10);
    // |110⟩ → |111⟩ and |10ψ⟩ unchanged.
    assert!((act.matrix[(7, 6)].norm() - 1.0).abs() < 1e-12);
    assert!((act.matrix[(4, 4)].norm() - 1.0).abs() < 1e-12);
    assert_eq!(circ.counts().pcet_class, 3);
}

#[test]
fn standard_toffoli_has_toffoli_moduli() {
    let circ = standard_toffoli_upto_phase::<f64>().unwrap();
    let act = logical_action(&circ, &[0, 1, 2]).unwrap();
    let t = toffoli::<f64>().matrix;
    for i in 0..8 {
        for j in 0..8 {
            assert!((act.matrix[(i, j)].norm() - t[(i, j)].norm()).abs() < 1e-10);
        }
    }
    // Only the controlled-off block is phase-free up to a global phase; the
    // circuit is not the Toffoli itself.
    assert!(!equivalence_up_to_global_phase(&act.matrix, &t, 1e-6).unwrap().equal);
    assert_eq!(circ.counts().pcet_class, 3);
}

#[test]
fn improved_controlled_not_on_four_controls() {
    let x = pauli_x::<f64>();
    let circ = controlled_power_improved(4, &x).unwrap();
    let (eq, act) = verify_controlled_power(&circ, 4, &x, 1e-9).unwrap();
    assert!(eq.equal, "{eq}");
    assert_eq!(act.matrix.nrows(), 32);
    assert!(act.ancilla_residual <= 1e-10 && act.leakage <= 1e-10);
}

#[test]
fn identity_payload_gives_identity() {
    let i = CMatrix::<f64>::identity(2, 2);
    for t in 2..=4 {
        for circ in [controlled_power_standard(t, &i).unwrap(), controlled_power_improved(t, &i).unwrap()] {
            let act = logical_action(&circ, &(0..=t).collect::<Vec<_>>()).unwrap();
            let n = act.matrix.nrows();
            assert!(equivalence_up_to_global_phase(&act.matrix, &CMatrix::identity(n, n), 1e-10).unwrap().equal);
        }
    }
}

#[test]
fn gate_counts_follow_from_the_emitted_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = random_unitary::<f64, _>(&mut rng);
    for t in 2..=6 {
        let s = controlled_power_standard(t, &u).unwrap().counts();
        let i = controlled_power_improved(t, &u).unwrap().counts();
        assert_eq!(s.toffoli, 2 * (t - 1));
        assert_eq!(s.pcet_class, 6 * (t - 1));
        assert_eq!(s.ancilla_nodes, 1);
        assert_eq!(i.toffoli, 0);
        assert_eq!(i.pcet_class, 2 * (t - 1));
        assert_eq!(i.ancilla_nodes, t - 1);
        assert_eq!((s.controlled_u, i.controlled_u), (1, 1));
    }
}

#[test]
fn address_out_of_range_is_an_error() {
    let mut circ = Circuit::<f64>::new(1, 0);
    circ.push(Op::Et { theta: 1.0, x: Address::a(0), y: Address::b(3) });
    let reg = LogicalRegister::new(1, 0).unwrap();
    assert!(matches!(apply(&reg, &circ), Err(cqed_core::Error::AddressError(_))));
}

#[test]
fn leakage_is_reported() {
    // Driving a transfer on a pair that holds two excitations leaves the model.
    let mut circ = Circuit::<f64>::new(2, 0);
    circ.push(Op::Et { theta: 1.0, x: Address::a(0), y: Address::b(1) });
    let reg = LogicalRegister::from_bits(&[true, false], 0).unwrap();
    assert!(matches!(apply(&reg, &circ), Err(cqed_core::Error::LeakageError(_))));
}

#[test]
fn hadamard_synthesis_executes_on_the_register() {
    let ops = single_qubit_ops(&hadamard::<f64>(), 0).unwrap();
    let mut circ = Circuit::new(1, 0);
    circ.extend(ops);
    let act = logical_action(&circ, &[0]).unwrap();
    assert!(equivalence_up_to_global_phase(&act.matrix, &hadamard(), 1e-12).unwrap().equal);
}

fn unitary_strategy() -> impl Strategy<Value = CMatrix<f64>> {
    any::<u64>().prop_map(|seed| random_unitary::<f64, _>(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gates_are_unitary(theta in -10.0f64..10.0, chi in -10.0f64..10.0) {
        prop_assert!(unitarity_defect(&et_matrix(theta)) <= 1e-12);
        prop_assert!(unitarity_defect(&phase_matrix(chi)) <= 1e-12);
        prop_assert!(unitarity_defect(&controlled_et(theta).matrix) <= 1e-12);
    }

    #[test]
    fn et_is_a_one_parameter_group(a in -7.0f64..7.0, b in -7.0f64..7.0) {
        prop_assert!(max_abs(&(et_matrix(a) * et_matrix(b) - et_matrix(a + b))) <= 1e-12);
    }

    #[test]
    fn synthesis_recomposes(u in unitary_strategy()) {
        let e = synthesize_rotation(&u).unwrap();
        let r = equivalence_up_to_global_phase(&u, &e.matrix(), 1e-10).unwrap();
        prop_assert!(r.equal);
        prop_assert!((r.phase - e.global_phase).abs() < 1e-9);
    }

    #[test]
    fn constructions_agree_for_random_payloads(u in unitary_strategy(), t in 2usize..=3) {
        let s = controlled_power_standard(t, &u).unwrap();
        let i = controlled_power_improved(t, &u).unwrap();
        let (es, as_) = verify_controlled_power(&s, t, &u, 1e-9).unwrap();
        let (ei, ai) = verify_controlled_power(&i, t, &u, 1e-9).unwrap();
        prop_assert!(es.equal && ei.equal);
        prop_assert!(as_.ancilla_residual <= 1e-10 && ai.ancilla_residual <= 1e-10);
        prop_assert!(equivalence_up_to_global_phase(&as_.matrix, &ai.matrix, 1e-9).unwrap().equal);
    }

    #[test]
    fn text_format_round_trips(u in unitary_strategy(), t in 2usize..=4) {
        for circ in [controlled_power_standard(t, &u).unwrap(), controlled_power_improved(t, &u).unwrap()] {
            prop_assert_eq!(Circuit::<f64>::parse(&circ.to_text()).unwrap(), circ);
        }
    }
}
