use thiserror::Error;

use crate::basis::Transition;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis dimension {dimension} exceeds the cap of {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("transition {transition:?} is enabled on node {node} but has no coupling constant")]
    MissingCoupling { node: usize, transition: Transition },

    #[error("detuning {value:e} on node {node} for {transition:?} is below the resonance floor {floor:e}")]
    ResonanceSingularity {
        node: usize,
        transition: Transition,
        value: f64,
        floor: f64,
    },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("cannot decompose a non-unitary matrix (deviation {0:e})")]
    DecompositionFailure(f64),

    #[error("invalid address: {0}")]
    AddressError(String),

    #[error("leakage {0:e} out of the modeled occupation space")]
    LeakageError(f64),

    #[error("ancilla node {node} has ground population {population}, expected 1")]
    AncillaNotGround { node: usize, population: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid node specification: {0}")]
    InvalidNode(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
