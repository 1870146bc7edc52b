//! Ideal gate unitaries on the pairwise encoding.
//!
//! A logical qubit lives on two nodes `(a, b)`: `|0_L⟩ = |0⟩_a|1⟩_b` and
//! `|1_L⟩ = |1⟩_a|0⟩_b`, so the logical bit equals the occupation of `a`.
//! Two-qubit matrices index the logical basis as `2·control + target`.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, dagger, im, max_abs, modulus, phase_of, re, wrap_angle, CMatrix, CVector, Real};

/// A named unitary acting on `arity` logical qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct GateUnitary<T: Real> {
    pub matrix: CMatrix<T>,
    pub arity: usize,
    pub label: String,
    pub params: Vec<T>,
}

impl<T: Real> GateUnitary<T> {
    pub fn new(label: impl Into<String>, arity: usize, params: Vec<T>, matrix: CMatrix<T>) -> Result<Self> {
        let dim = 1usize << arity;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for arity {arity}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, arity, label: label.into(), params })
    }

    /// `max |U†U − I|`
    pub fn unitarity_defect(&self) -> T {
        unitarity_defect(&self.matrix)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Applies the gate to a logical state vector.
    pub fn apply(&self, v: &CVector<T>) -> Result<CVector<T>> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!("vector of length {} for {}", v.len(), self.label)));
        }
        Ok(&self.matrix * v)
    }

    pub fn compose(&self, after: &GateUnitary<T>) -> Result<GateUnitary<T>> {
        if after.arity != self.arity {
            return Err(Error::DimensionMismatch(format!("{} after {}", after.label, self.label)));
        }
        Ok(GateUnitary {
            matrix: &after.matrix * &self.matrix,
            arity: self.arity,
            label: format!("{}·{}", after.label, self.label),
            params: Vec::new(),
        })
    }
}

pub fn unitarity_defect<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    max_abs(&(dagger(m) * m - CMatrix::<T>::identity(n, n)))
}

fn mat2<T: Real>(e: [[Complex<T>; 2]; 2]) -> CMatrix<T> {
    CMatrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]])
}

/// `Rx(θ)`: the partial excitation swap between the two nodes of a pair.
pub fn et_matrix<T: Real>(theta: T) -> CMatrix<T> {
    let h = theta / T::lit(2.0);
    let (c, s) = (re(h.cos()), im(-h.sin()));
    mat2([[c, s], [s, c]])
}

/// `Rz(χ) = diag(e^{−iχ/2}, e^{iχ/2})`.
pub fn phase_matrix<T: Real>(chi: T) -> CMatrix<T> {
    let h = chi / T::lit(2.0);
    mat2([[cis(-h), re(T::zero())], [re(T::zero()), cis(h)]])
}

/// `Ry(θ) = exp(−iθY/2)`.
pub fn ry_matrix<T: Real>(theta: T) -> CMatrix<T> {
    let h = theta / T::lit(2.0);
    mat2([[re(h.cos()), re(-h.sin())], [re(h.sin()), re(h.cos())]])
}

pub fn pauli_x<T: Real>() -> CMatrix<T> {
    let (o, l) = (re(T::zero()), re(T::one()));
    mat2([[o, l], [l, o]])
}

pub fn hadamard<T: Real>() -> CMatrix<T> {
    let h = re(T::one() / T::lit(2.0).sqrt());
    mat2([[h, h], [h, -h]])
}

pub fn et_gate<T: Real>(theta: T) -> GateUnitary<T> {
    GateUnitary { matrix: et_matrix(theta), arity: 1, label: format!("ET({theta})"), params: vec![theta] }
}

pub fn phase_gate<T: Real>(chi: T) -> GateUnitary<T> {
    GateUnitary { matrix: phase_matrix(chi), arity: 1, label: format!("PHASE({chi})"), params: vec![chi] }
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U` for a single-qubit `U`.
pub fn controlled<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    let mut m = CMatrix::identity(4, 4);
    m.view_mut((2, 2), (2, 2)).copy_from(u);
    m
}

pub fn controlled_et<T: Real>(theta: T) -> GateUnitary<T> {
    GateUnitary { matrix: controlled(&et_matrix(theta)), arity: 2, label: format!("C(ET({theta}))"), params: vec![theta] }
}

/// `(PHASE(π/2) ⊗ I)·C(ET(π))`, the logical CNOT up to a global phase.
pub fn pcet<T: Real>() -> GateUnitary<T> {
    let phase = phase_matrix(T::frac_pi_2()).kronecker(&CMatrix::identity(2, 2));
    GateUnitary { matrix: phase * controlled(&et_matrix(T::pi())), arity: 2, label: "PCET".into(), params: Vec::new() }
}

pub fn cnot<T: Real>() -> GateUnitary<T> {
    GateUnitary { matrix: controlled(&pauli_x()), arity: 2, label: "CNOT".into(), params: Vec::new() }
}

/// `C^t(U)` on `t + 1` qubits, controls most significant.
pub fn multi_controlled<T: Real>(controls: usize, u: &CMatrix<T>) -> CMatrix<T> {
    let dim = 1usize << (controls + 1);
    let mut m = CMatrix::identity(dim, dim);
    m.view_mut((dim - 2, dim - 2), (2, 2)).copy_from(u);
    m
}

pub fn toffoli<T: Real>() -> GateUnitary<T> {
    GateUnitary { matrix: multi_controlled(2, &pauli_x()), arity: 3, label: "TOFFOLI".into(), params: Vec::new() }
}

/// Outcome of comparing two matrices up to a global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceResult<T: Real> {
    pub equal: bool,
    /// `φ` such that `A ≈ e^{iφ}·B`.
    pub phase: T,
    pub deviation: T,
    /// Per basis column: `max_i |A_ij − e^{iφ}B_ij|`.
    pub columns: Vec<T>,
}

impl<T: Real> fmt::Display for EquivalenceResult<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (phase {:.12}, deviation {:.3e})",
            if self.equal { "equal" } else { "different" },
            self.phase.to_f64(),
            self.deviation.to_f64()
        )
    }
}

/// `max_ij ||A_ij| − |B_ij||`: agreement up to arbitrary per-entry phases.
pub fn modulus_deviation<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(a.iter().zip(b.iter()).fold(T::zero(), |m, (x, y)| m.max((modulus(*x) - modulus(*y)).abs())))
}

/// Reads the phase off the largest entry of `b` and checks `‖A − e^{iφ}B‖_max ≤ tol`.
pub fn equivalence_up_to_global_phase<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, tol: T) -> Result<EquivalenceResult<T>> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let mut best = (0, T::zero());
    for (k, z) in b.iter().enumerate() {
        let m = modulus(*z);
        if m > best.1 {
            best = (k, m);
        }
    }
    let phase = if best.1 > T::zero() && modulus(a[best.0]) > T::zero() {
        wrap_angle(phase_of(a[best.0]) - phase_of(b[best.0]))
    } else {
        T::zero()
    };
    let rotated = b * cis(phase);
    let columns: Vec<T> = (0..a.ncols())
        .map(|j| {
            (0..a.nrows()).fold(T::zero(), |acc, i| {
                let d = modulus(a[(i, j)] - rotated[(i, j)]);
                if d > acc {
                    d
                } else {
                    acc
                }
            })
        })
        .collect();
    let deviation = columns.iter().fold(T::zero(), |acc, &d| if d > acc { d } else { acc });
    Ok(EquivalenceResult { equal: deviation <= tol, phase, deviation, columns })
}

/// `U = e^{iφ}·Rz(α)·Rx(β)·Rz(γ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerAngles<T: Real> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub global_phase: T,
}

/// A primitive acting on one logical qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairGate<T: Real> {
    Et(T),
    Phase(T),
}

impl<T: Real> PairGate<T> {
    pub fn matrix(&self) -> CMatrix<T> {
        match *self {
            PairGate::Et(theta) => et_matrix(theta),
            PairGate::Phase(chi) => phase_matrix(chi),
        }
    }
}

impl<T: Real> EulerAngles<T> {
    /// `Rz(α)·Rx(β)·Rz(γ)` without the global phase.
    pub fn matrix(&self) -> CMatrix<T> {
        phase_matrix(self.alpha) * et_matrix(self.beta) * phase_matrix(self.gamma)
    }

    /// Primitives in application order, zero angles dropped.
    pub fn sequence(&self) -> Vec<PairGate<T>> {
        [PairGate::Phase(self.gamma), PairGate::Et(self.beta), PairGate::Phase(self.alpha)]
            .into_iter()
            .filter(|g| match *g {
                PairGate::Et(x) | PairGate::Phase(x) => x != T::zero(),
            })
            .collect()
    }
}

/// Rz–Rx–Rz decomposition of a 2×2 unitary.
pub fn synthesize_rotation<T: Real>(u: &CMatrix<T>) -> Result<EulerAngles<T>> {
    if u.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(format!("expected 2x2, got {:?}", u.shape())));
    }
    let defect = unitarity_defect(u);
    if defect > T::lit(1e-8) {
        return Err(Error::DecompositionFailure(defect.to_f64()));
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let half = phase_of(det) / T::lit(2.0);
    let su = u * cis(-half);
    let (mut a, mut b) = (su[(0, 0)], su[(0, 1)]);
    // Fix the SU(2) sign so that arg a ∈ (−π/2, π/2].
    let arg_a = phase_of(a);
    if arg_a > T::frac_pi_2() || arg_a <= -T::frac_pi_2() {
        a = -a;
        b = -b;
    }
    let (ma, mb) = (modulus(a), modulus(b));
    let beta = T::lit(2.0) * mb.atan2(ma);
    let tiny = T::lit(1e-14);
    let (sum, diff) = if mb <= tiny {
        let s = T::lit(-2.0) * phase_of(a);
        (s, s)
    } else if ma <= tiny {
        let d = T::lit(-2.0) * (phase_of(b) + T::frac_pi_2());
        (d, d)
    } else {
        (T::lit(-2.0) * phase_of(a), T::lit(-2.0) * (phase_of(b) + T::frac_pi_2()))
    };
    let two = T::lit(2.0);
    let mut angles = EulerAngles {
        alpha: wrap_angle((sum + diff) / two),
        beta: wrap_angle(beta),
        gamma: wrap_angle((sum - diff) / two),
        global_phase: T::zero(),
    };
    let check = equivalence_up_to_global_phase(u, &angles.matrix(), T::lit(1e-9))?;
    if !check.equal {
        return Err(Error::DecompositionFailure(check.deviation.to_f64()));
    }
    angles.global_phase = check.phase;
    Ok(angles)
}

/// Node handles of one encoded qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LogicalQubit {
    pub a: usize,
    pub b: usize,
}

impl LogicalQubit {
    /// Qubit `q` on nodes `2q` and `2q + 1`.
    pub fn standard(q: usize) -> Self {
        Self { a: 2 * q, b: 2 * q + 1 }
    }
}

/// Node occupations (node `2q`, `2q + 1` per qubit) for a logical bitstring.
pub fn encode(bits: &[bool]) -> Vec<bool> {
    bits.iter().flat_map(|&b| [b, !b]).collect()
}

/// Occupation bitmask (bit `k` = node `k`) of the encoded bitstring.
pub fn encode_mask(bits: &[bool]) -> u64 {
    encode(bits).iter().enumerate().fold(0, |m, (k, &o)| if o { m | (1 << k) } else { m })
}

/// Dense physical state over `2^(2n)` occupations for a logical bitstring.
pub fn encode_state<T: Real>(bits: &[bool]) -> CVector<T> {
    let mut v = DVector::from_element(1usize << (2 * bits.len()), re(T::zero()));
    v[encode_mask(bits) as usize] = re(T::one());
    v
}

/// Projects a dense physical state of `qubits` pairs onto the encoded subspace.
/// Logical index: first qubit most significant. Returns the amplitudes and the
/// norm² left outside.
pub fn decode<T: Real>(physical: &CVector<T>, qubits: usize) -> Result<(CVector<T>, T)> {
    if physical.len() != 1usize << (2 * qubits) {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {qubits} pairs", physical.len())));
    }
    let mut out = DVector::from_element(1usize << qubits, re(T::zero()));
    let mut kept = T::zero();
    for x in 0..out.len() {
        let bits: Vec<bool> = (0..qubits).map(|q| x >> (qubits - 1 - q) & 1 == 1).collect();
        let z = physical[encode_mask(&bits) as usize];
        kept += z.norm_sqr();
        out[x] = z;
    }
    let total = physical.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    Ok((out, (total - kept).max(T::zero())))
}
