//! Matrix representations of atomic transition, population and photon
//! operators on a [`CompositeBasis`].

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::basis::{
    dot, microscopic_index, microscopic_levels, CompositeBasis, Factor, NodeSpec, Transition,
    WaveVectors,
};
use crate::error::{Error, Result};
use crate::scalar::{cis, re, sparse_mul, CMatrix, Real};

/// Local raising operator `Σ_j e^{ik·r_j} S^j_{hi,lo}` of one node factor.
///
/// On a collective factor the same operator acts on phase-matched symmetric
/// states, `J_{hi,lo}|n⟩ = √(n_lo(n_hi+1)) |n − e_lo + e_hi⟩`; states pushed
/// beyond the factor's truncation are dropped.
pub fn local_transition<T: Real>(
    factor: &Factor,
    node: &NodeSpec<T>,
    transition: Transition,
    wave: [T; 3],
) -> Result<CMatrix<T>> {
    let (hi, lo) = transition.levels();
    let dim = factor.dimension();
    let mut out = DMatrix::zeros(dim, dim);
    match factor {
        Factor::Microscopic { atoms, levels } => {
            if hi >= *levels {
                return Err(Error::MissingCoupling { node: usize::MAX, transition });
            }
            let phases: Vec<Complex<T>> =
                node.positions().iter().map(|r| cis(dot(&wave, r))).collect();
            for col in 0..dim {
                let mut lv = microscopic_levels(col, *atoms, *levels);
                for j in 0..*atoms {
                    if lv[j] == lo {
                        lv[j] = hi;
                        out[(microscopic_index(&lv, *levels), col)] += phases[j];
                        lv[j] = lo;
                    }
                }
            }
        }
        Factor::Collective { levels, states, .. } => {
            if hi >= *levels {
                return Err(Error::MissingCoupling { node: usize::MAX, transition });
            }
            for (col, s) in states.iter().enumerate() {
                let n = s.0;
                if n[lo] == 0 {
                    continue;
                }
                let mut m = n;
                m[lo] -= 1;
                m[hi] += 1;
                if let Some(row) = states.iter().position(|t| t.0 == m) {
                    out[(row, col)] = re(T::count(n[lo] * (n[hi] + 1)).sqrt());
                }
            }
        }
        Factor::Mode { .. } => {
            return Err(Error::BasisMismatch("transition operator on a photon factor".into()))
        }
    }
    Ok(out)
}

/// Local `Σ_j S^j_{μμ}` (number of atoms in `level`).
pub fn local_population<T: Real>(factor: &Factor, level: usize) -> Result<CMatrix<T>> {
    let dim = factor.dimension();
    let mut out = DMatrix::zeros(dim, dim);
    match factor {
        Factor::Microscopic { atoms, levels } => {
            for i in 0..dim {
                let c = microscopic_levels(i, *atoms, *levels).iter().filter(|&&l| l == level).count();
                out[(i, i)] = re(T::count(c));
            }
        }
        Factor::Collective { states, .. } => {
            for (i, s) in states.iter().enumerate() {
                out[(i, i)] = re(T::count(s.0[level]));
            }
        }
        Factor::Mode { .. } => {
            return Err(Error::BasisMismatch("population operator on a photon factor".into()))
        }
    }
    Ok(out)
}

/// Truncated annihilation operator `a|n⟩ = √n |n−1⟩`.
pub fn annihilation<T: Real>(n_max: usize) -> CMatrix<T> {
    let mut a = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = re(T::count(n).sqrt());
    }
    a
}

pub fn number<T: Real>(n_max: usize) -> CMatrix<T> {
    let mut a = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 0..=n_max {
        a[(n, n)] = re(T::count(n));
    }
    a
}

/// Embeds a local operator on factor `factor` into the full basis.
pub fn embed<T: Real>(basis: &CompositeBasis, factor: usize, local: &CMatrix<T>) -> CMatrix<T> {
    let dim = basis.dimension();
    let ldim = basis.factor_dims()[factor];
    let stride = basis.stride(factor);
    let mut out = DMatrix::zeros(dim, dim);
    let zero = Complex::new(T::zero(), T::zero());
    let entries: Vec<Vec<(usize, Complex<T>)>> = (0..ldim)
        .map(|c| (0..ldim).filter(|&r| local[(r, c)] != zero).map(|r| (r, local[(r, c)])).collect())
        .collect();
    for col in 0..dim {
        let d = (col / stride) % ldim;
        let base = col - d * stride;
        for &(r, v) in &entries[d] {
            out[(base + r * stride, col)] = v;
        }
    }
    out
}

/// Diagonal weighted-excitation operator: level weights 0, 1, 2 per atom plus
/// photon quanta weighted by the transition each mode drives.
pub fn excitation_operator<T: Real>(basis: &CompositeBasis) -> CMatrix<T> {
    let dim = basis.dimension();
    let mut q = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        q[(i, i)] = re(T::count(basis.excitation(i)));
    }
    q
}

/// Builds full-space operators for the nodes and modes of one basis.
pub struct Operators<'a, T: Real> {
    basis: &'a CompositeBasis,
    nodes: &'a [NodeSpec<T>],
    waves: WaveVectors<T>,
    node_factors: Vec<usize>,
}

impl<'a, T: Real> Operators<'a, T> {
    pub fn new(
        basis: &'a CompositeBasis,
        nodes: &'a [NodeSpec<T>],
        waves: WaveVectors<T>,
    ) -> Result<Self> {
        let node_factors = basis.node_factors();
        if node_factors.len() != nodes.len() {
            return Err(Error::BasisMismatch(format!(
                "basis has {} node factors but {} node specs were given",
                node_factors.len(),
                nodes.len()
            )));
        }
        for (m, &fi) in node_factors.iter().enumerate() {
            let ok = match &basis.factors()[fi] {
                Factor::Microscopic { atoms, levels } | Factor::Collective { atoms, levels, .. } => {
                    *atoms == nodes[m].atoms() && *levels == nodes[m].level_count()
                }
                Factor::Mode { .. } => false,
            };
            if !ok {
                return Err(Error::BasisMismatch(format!("node {m} does not match its basis factor")));
            }
        }
        Ok(Self { basis, nodes, waves, node_factors })
    }

    pub fn basis(&self) -> &CompositeBasis {
        self.basis
    }

    pub fn nodes(&self) -> &[NodeSpec<T>] {
        self.nodes
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn zero(&self) -> CMatrix<T> {
        DMatrix::zeros(self.dimension(), self.dimension())
    }

    pub fn identity(&self) -> CMatrix<T> {
        DMatrix::identity(self.dimension(), self.dimension())
    }

    /// Collective raising operator `X^{(c)}_m` of node `m` on transition `c`.
    pub fn raise(&self, node: usize, transition: Transition) -> Result<CMatrix<T>> {
        let fi = self.node_factor(node)?;
        let local = local_transition(
            &self.basis.factors()[fi],
            &self.nodes[node],
            transition,
            self.waves.get(transition),
        )
        .map_err(|e| match e {
            Error::MissingCoupling { transition, .. } => Error::InvalidNode(format!(
                "node {node} has no {transition:?} transition"
            )),
            other => other,
        })?;
        Ok(embed(self.basis, fi, &local))
    }

    pub fn population(&self, node: usize, level: usize) -> Result<CMatrix<T>> {
        let fi = self.node_factor(node)?;
        Ok(embed(self.basis, fi, &local_population(&self.basis.factors()[fi], level)?))
    }

    /// Bare atomic energy `Σ_μ ε^μ Σ_j S^j_μμ` of one node.
    pub fn node_energy(&self, node: usize) -> Result<CMatrix<T>> {
        let mut h = self.zero();
        for (level, &e) in self.nodes[node].level_energies().iter().enumerate() {
            h += self.population(node, level)? * re(e);
        }
        Ok(h)
    }

    /// Collective generator `Σ_j S^j_{ab}` (levels zero-based), phase-matched
    /// on collective factors and carrying `e^{i(K_a − K_b)·r_j}` on microscopic ones.
    pub fn generator(&self, node: usize, a: usize, b: usize) -> Result<CMatrix<T>> {
        let fi = self.node_factor(node)?;
        let factor = &self.basis.factors()[fi];
        let dim = factor.dimension();
        let mut out = DMatrix::zeros(dim, dim);
        match factor {
            Factor::Microscopic { atoms, levels } => {
                let ka = self.waves.of_level(a);
                let kb = self.waves.of_level(b);
                let dk = [ka[0] - kb[0], ka[1] - kb[1], ka[2] - kb[2]];
                let phases: Vec<Complex<T>> =
                    self.nodes[node].positions().iter().map(|r| cis(dot(&dk, r))).collect();
                for col in 0..dim {
                    let mut lv = microscopic_levels(col, *atoms, *levels);
                    for j in 0..*atoms {
                        if lv[j] == b {
                            lv[j] = a;
                            out[(microscopic_index(&lv, *levels), col)] += phases[j];
                            lv[j] = b;
                        }
                    }
                }
            }
            Factor::Collective { states, .. } => {
                for (col, s) in states.iter().enumerate() {
                    let n = s.0;
                    if a == b {
                        out[(col, col)] = re(T::count(n[a]));
                        continue;
                    }
                    if n[b] == 0 {
                        continue;
                    }
                    let mut m = n;
                    m[b] -= 1;
                    m[a] += 1;
                    if let Some(row) = states.iter().position(|t| t.0 == m) {
                        out[(row, col)] = re(T::count(n[b] * (n[a] + 1)).sqrt());
                    }
                }
            }
            Factor::Mode { .. } => unreachable!("node factors only"),
        }
        Ok(embed(self.basis, fi, &out))
    }

    /// `[O_j, O_k]` for transition operators `O = X` (raising) or `X†`.
    ///
    /// On collective factors the commutator is taken from the `S_{ab}` algebra,
    /// `[S_ab, S_cd] = δ_bc S_ad − δ_da S_cb`, so the excitation truncation does
    /// not corrupt it; on microscopic factors the matrices are exact already.
    pub fn transition_commutator(
        &self,
        j: (usize, Transition, bool),
        k: (usize, Transition, bool),
    ) -> Result<CMatrix<T>> {
        if j.0 != k.0 {
            return Ok(self.zero());
        }
        let node = j.0;
        let fi = self.node_factor(node)?;
        let op = |(m, t, dag): (usize, Transition, bool)| -> Result<CMatrix<T>> {
            let x = self.raise(m, t)?;
            Ok(if dag { crate::scalar::dagger(&x) } else { x })
        };
        if matches!(self.basis.factors()[fi], Factor::Microscopic { .. }) {
            let a = op(j)?;
            let b = op(k)?;
            return Ok(sparse_mul(&a, &b) - sparse_mul(&b, &a));
        }
        let levels = |(_, t, dag): (usize, Transition, bool)| {
            let (hi, lo) = t.levels();
            if dag {
                (lo, hi)
            } else {
                (hi, lo)
            }
        };
        let (a, b) = levels(j);
        let (c, d) = levels(k);
        let mut out = self.zero();
        if b == c {
            out += self.generator(node, a, d)?;
        }
        if d == a {
            out -= self.generator(node, c, b)?;
        }
        Ok(out)
    }

    pub fn annihilation(&self, transition: Transition) -> Result<CMatrix<T>> {
        let (fi, n_max) = self.mode_factor(transition)?;
        Ok(embed(self.basis, fi, &annihilation(n_max)))
    }

    pub fn photon_number(&self, transition: Transition) -> Result<CMatrix<T>> {
        let (fi, n_max) = self.mode_factor(transition)?;
        Ok(embed(self.basis, fi, &number(n_max)))
    }

    pub fn has_mode(&self, transition: Transition) -> bool {
        self.basis.mode_factor(transition).is_some()
    }

    fn node_factor(&self, node: usize) -> Result<usize> {
        self.node_factors
            .get(node)
            .copied()
            .ok_or_else(|| Error::InvalidNode(format!("node index {node} out of range")))
    }

    fn mode_factor(&self, transition: Transition) -> Result<(usize, usize)> {
        let fi = self.basis.mode_factor(transition).ok_or_else(|| {
            Error::BasisMismatch(format!("basis has no photon mode for {transition:?}"))
        })?;
        match self.basis.factors()[fi] {
            Factor::Mode { n_max, .. } => Ok((fi, n_max)),
            _ => unreachable!("mode_factor returns mode factors"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_collective_basis, build_microscopic_basis, FockFactor, Mode};
    use crate::scalar::{commutator, dagger, max_abs};

    #[test]
    fn annihilation_matches_number() {
        let a = annihilation::<f64>(4);
        let n = dagger(&a) * &a;
        assert!(max_abs(&(n - number::<f64>(4))) < 1e-14);
    }

    #[test]
    fn collective_ladder_matches_dicke_values() {
        // J+J-|k⟩ = k(N-k+1)
        let nodes = [NodeSpec::two_level(4, 0.0, 1.0).unwrap()];
        let b = build_collective_basis::<f64>(&nodes, &[2], None).unwrap();
        let ops = Operators::new(&b, &nodes, WaveVectors::zero()).unwrap();
        let jp = ops.raise(0, Transition::Lower).unwrap();
        let jpm = &jp * dagger(&jp);
        for k in 0..3 {
            assert!((jpm[(k, k)].re - (k * (4 - k + 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn commutator_of_collective_spin_is_population_difference() {
        let nodes = [NodeSpec::two_level(3, 0.0, 1.0).unwrap()];
        let b = build_microscopic_basis::<f64>(&nodes, None).unwrap();
        let ops = Operators::new(&b, &nodes, WaveVectors::zero()).unwrap();
        let x = ops.raise(0, Transition::Lower).unwrap();
        let c = commutator(&x, &dagger(&x));
        let d = ops.population(0, 1).unwrap() - ops.population(0, 0).unwrap();
        assert!(max_abs(&(c - d)) < 1e-12);
    }

    #[test]
    fn embedding_commutes_across_factors() {
        let nodes = [NodeSpec::two_level(1, 0.0, 1.0).unwrap(), NodeSpec::two_level(2, 0.0, 1.0).unwrap()];
        let fock = FockFactor::new(vec![Mode::new(Transition::Lower, 0.9, 2)]).unwrap();
        let b = build_microscopic_basis(&nodes, Some(&fock)).unwrap();
        let ops = Operators::new(&b, &nodes, WaveVectors::zero()).unwrap();
        let x0 = ops.raise(0, Transition::Lower).unwrap();
        let x1 = ops.raise(1, Transition::Lower).unwrap();
        let a = ops.annihilation(Transition::Lower).unwrap();
        assert!(max_abs(&commutator(&x0, &x1)) < 1e-14);
        assert!(max_abs(&commutator(&x0, &a)) < 1e-14);
    }

    #[test]
    fn rejects_mismatched_nodes() {
        let nodes = [NodeSpec::two_level(2, 0.0, 1.0).unwrap()];
        let other = [NodeSpec::two_level(3, 0.0, 1.0).unwrap()];
        let b = build_microscopic_basis::<f64>(&nodes, None).unwrap();
        assert!(Operators::new(&b, &other, WaveVectors::zero()).is_err());
    }
}
