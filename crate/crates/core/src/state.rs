//! State vectors tied to the basis they are expressed in.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex;

use crate::basis::{expansion_matrix, Basis, CompositeBasis, NodeSpec, PairStates, WaveVectors};
use crate::error::{Error, Result};
use crate::scalar::{dagger, inner, norm, CVector, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: CVector<T>,
    basis: Arc<Basis>,
}

impl<T: Real> StateVector<T> {
    pub fn new(basis: Arc<Basis>, amplitudes: CVector<T>) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dimension()
            )));
        }
        Ok(Self { amplitudes, basis })
    }

    pub fn basis_state(basis: Arc<Basis>, index: usize) -> Result<Self> {
        let dim = basis.dimension();
        if index >= dim {
            return Err(Error::DimensionMismatch(format!("index {index} out of {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex::new(T::one(), T::zero());
        Ok(Self { amplitudes: v, basis })
    }

    /// Product state given one local index per factor.
    pub fn from_tuple(basis: Arc<Basis>, tuple: &[usize]) -> Result<Self> {
        let product = basis
            .as_product()
            .ok_or_else(|| Error::BasisMismatch("tuple addressing needs a product basis".into()))?;
        let index = product
            .index(tuple)
            .ok_or_else(|| Error::DimensionMismatch(format!("tuple {tuple:?} is outside the basis")))?;
        Self::basis_state(basis, index)
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector<T> {
        self.amplitudes
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        norm(&self.amplitudes)
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self.amplitudes.unscale_mut(n);
        }
        self
    }

    pub fn amplitude(&self, index: usize) -> Complex<T> {
        self.amplitudes[index]
    }

    pub fn population(&self, index: usize) -> T {
        self.amplitudes[index].norm_sqr()
    }

    pub fn populations(&self) -> Vec<T> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_basis(other)?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn check_same_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch("states live in different bases".into()))
        }
    }

    /// Same amplitudes with a new, dimensionally compatible basis handle.
    pub fn with_amplitudes(&self, amplitudes: CVector<T>) -> Result<Self> {
        Self::new(self.basis.clone(), amplitudes)
    }

    /// Components along the named pair states; the second value is the
    /// population outside their span.
    pub fn to_pair_states(&self, pair: &PairStates) -> Result<(Self, T)> {
        match self.basis.as_ref() {
            Basis::Product(b) if b == pair.product() => {}
            _ => return Err(Error::BasisMismatch("state is not on the pair product basis".into())),
        }
        let v = pair.isometry::<T>();
        let coeffs = dagger(&v) * &self.amplitudes;
        let kept = norm(&coeffs);
        let leak = (self.norm() * self.norm() - kept * kept).max(T::zero());
        Ok((Self::new(Arc::new(Basis::Pair(pair.clone())), coeffs)?, leak))
    }

    pub fn from_pair_states(&self) -> Result<Self> {
        match self.basis.as_ref() {
            Basis::Pair(p) => {
                let v = p.isometry::<T>();
                Self::new(Arc::new(Basis::Product(p.product().clone())), v * &self.amplitudes)
            }
            Basis::Product(_) => Err(Error::BasisMismatch("state is already on a product basis".into())),
        }
    }
}

/// Projects a microscopic state onto the symmetric (collective) subspace.
///
/// Returns the collective components and the leakage `1 − ‖P ψ‖²` out of
/// the symmetric subspace (relative to the state's own norm).
pub fn symmetrize<T: Real>(
    state: &StateVector<T>,
    collective: Arc<Basis>,
    nodes: &[NodeSpec<T>],
    waves: &WaveVectors<T>,
) -> Result<(StateVector<T>, T)> {
    let micro = product_of(state.basis())?;
    let coll = product_of(&collective)?;
    let v = expansion_matrix(coll, micro, nodes, waves)?;
    let coeffs = dagger(&v) * state.amplitudes();
    let total = state.norm() * state.norm();
    let kept = norm(&coeffs) * norm(&coeffs);
    let leakage = if total > T::zero() { (T::one() - kept / total).max(T::zero()) } else { T::zero() };
    Ok((StateVector::new(collective, coeffs)?, leakage))
}

/// Inverse of [`symmetrize`] on the symmetric subspace.
pub fn expand<T: Real>(
    state: &StateVector<T>,
    microscopic: Arc<Basis>,
    nodes: &[NodeSpec<T>],
    waves: &WaveVectors<T>,
) -> Result<StateVector<T>> {
    let micro = product_of(&microscopic)?;
    let coll = product_of(state.basis())?;
    let v = expansion_matrix(coll, micro, nodes, waves)?;
    StateVector::new(microscopic, v * state.amplitudes())
}

fn product_of(basis: &Basis) -> Result<&CompositeBasis> {
    basis
        .as_product()
        .ok_or_else(|| Error::BasisMismatch("operation needs a product basis".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_collective_basis, build_microscopic_basis, build_two_node_collective_basis};

    #[test]
    fn fidelity_and_mismatch() {
        let p = build_two_node_collective_basis(2, 2).unwrap();
        let b = Arc::new(Basis::Product(p.product().clone()));
        let a = StateVector::<f64>::basis_state(b.clone(), 0).unwrap();
        let c = StateVector::<f64>::basis_state(b, 1).unwrap();
        assert_eq!(a.fidelity(&a).unwrap(), 1.0);
        assert_eq!(a.fidelity(&c).unwrap(), 0.0);

        let other = Arc::new(Basis::Pair(p));
        let d = StateVector::<f64>::basis_state(other, 0).unwrap();
        assert!(matches!(a.fidelity(&d), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn pair_round_trip() {
        let p = build_two_node_collective_basis(3, 2).unwrap();
        let pb = Arc::new(Basis::Pair(p.clone()));
        let psi5 = StateVector::<f64>::basis_state(pb, p.position("ψ5").unwrap()).unwrap();
        let prod = psi5.from_pair_states().unwrap();
        let (back, leak) = prod.to_pair_states(&p).unwrap();
        assert!(leak < 1e-14);
        assert!((back.fidelity(&psi5).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetrize_detects_antisymmetric_component() {
        let node = NodeSpec::two_level(2, 0.0, 1.0).unwrap();
        let nodes = [node];
        let micro = Arc::new(Basis::Product(build_microscopic_basis::<f64>(&nodes, None).unwrap()));
        let coll = Arc::new(Basis::Product(build_collective_basis::<f64>(&nodes, &[2], None).unwrap()));
        // |eg⟩ has half its weight outside the symmetric subspace
        let eg = StateVector::<f64>::from_tuple(micro, &[2]).unwrap();
        let (s, leak) = symmetrize(&eg, coll.clone(), &nodes, &WaveVectors::zero()).unwrap();
        assert!((leak - 0.5).abs() < 1e-14);
        assert!((s.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        let back = expand(&s.normalized(), eg.basis().clone(), &nodes, &WaveVectors::zero()).unwrap();
        assert!((back.norm() - 1.0).abs() < 1e-14);
    }
}
