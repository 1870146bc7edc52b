//! State-vector simulation of pairwise-encoded logical qubits stored on
//! multi-atom ensembles ("nodes") that exchange excitations through virtual
//! photons of a shared cavity.
//!
//! The numeric core is generic over the real scalar ([`Real`], implemented
//! for `f32` and `f64`); the `*64` aliases below fix it to `f64`, which every
//! tolerance in the test-suite assumes.

pub mod basis;
pub mod circuits;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod operators;
pub mod scalar;
pub mod state;

pub use basis::{
    build_collective_basis, build_microscopic_basis, build_two_node_collective_basis, Basis,
    CompositeBasis, Factor, FockFactor, LevelCounts, Mode, NodeSpec, PairStates, Transition,
    WaveVectors,
};
pub use circuits::{Address, Circuit, GateCounts, LogicalRegister, Op};
pub use error::{Error, Result};
pub use gates::{EquivalenceResult, EulerAngles, GateUnitary, LogicalQubit};
pub use hamiltonian::{
    CavityModel, CouplingSet, DetuningSet, EffectiveRates, Frame, HamiltonianMatrix, Photons,
    TransistorCouplings,
};
pub use scalar::{CMatrix, CVector, Real};
pub use state::StateVector;

pub type NodeSpec64 = NodeSpec<f64>;
pub type FockFactor64 = FockFactor<f64>;
pub type StateVector64 = StateVector<f64>;
pub type HamiltonianMatrix64 = HamiltonianMatrix<f64>;
pub type CavityModel64 = CavityModel<f64>;
pub type CouplingSet64 = CouplingSet<f64>;
pub type EffectiveRates64 = EffectiveRates<f64>;
pub type Complex64 = num_complex::Complex<f64>;
pub type GateUnitary64 = GateUnitary<f64>;
pub type Circuit64 = Circuit<f64>;
pub type LogicalRegister64 = LogicalRegister<f64>;
