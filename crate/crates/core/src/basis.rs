//! Hilbert spaces: node specifications, photon modes and the composite
//! product bases built from them.
//!
//! A [`CompositeBasis`] is a lexicographically ordered tensor product of
//! factors. Node factors are either *microscopic* (one digit per atom) or
//! *collective* (permutation-symmetric states labelled by how many atoms sit
//! in each level). Photon modes are truncated Fock factors. The first factor
//! is the most significant digit of the flat index.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, CMatrix, Real};

/// Default upper bound on the dimension of a microscopic product basis.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// Atomic transition addressed by a cavity mode. Levels are numbered 1, 2, 3
/// in the physics and 0, 1, 2 in code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transition {
    /// 1 ↔ 2
    Lower,
    /// 2 ↔ 3
    Upper,
    /// 1 ↔ 3
    Direct,
}

impl Transition {
    pub const ALL: [Transition; 3] = [Transition::Lower, Transition::Upper, Transition::Direct];

    /// `(upper level, lower level)`, zero-based.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::Lower => (1, 0),
            Transition::Upper => (2, 1),
            Transition::Direct => (2, 0),
        }
    }

    pub fn slot(self) -> usize {
        match self {
            Transition::Lower => 0,
            Transition::Upper => 1,
            Transition::Direct => 2,
        }
    }

    /// Quanta carried by one photon of the mode driving this transition,
    /// measured in units of the level weight (level 1 → 0, 2 → 1, 3 → 2).
    pub fn photon_weight(self) -> usize {
        let (hi, lo) = self.levels();
        hi - lo
    }
}

/// One ensemble of identical atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSpec<T: Real> {
    atoms: usize,
    level_energies: Vec<T>,
    positions: Vec<[T; 3]>,
}

impl<T: Real> NodeSpec<T> {
    pub fn new(atoms: usize, level_energies: Vec<T>) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidNode("a node needs at least one atom".into()));
        }
        if !(2..=3).contains(&level_energies.len()) {
            return Err(Error::InvalidNode(format!(
                "level count must be 2 or 3, got {}",
                level_energies.len()
            )));
        }
        if level_energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidNode("level energies must be strictly increasing".into()));
        }
        let positions = vec![[T::zero(); 3]; atoms];
        Ok(Self { atoms, level_energies, positions })
    }

    pub fn two_level(atoms: usize, ground: T, excited: T) -> Result<Self> {
        Self::new(atoms, vec![ground, excited])
    }

    pub fn three_level(atoms: usize, energies: [T; 3]) -> Result<Self> {
        Self::new(atoms, energies.to_vec())
    }

    pub fn with_positions(mut self, positions: Vec<[T; 3]>) -> Result<Self> {
        if positions.len() != self.atoms {
            return Err(Error::InvalidNode(format!(
                "{} positions supplied for {} atoms",
                positions.len(),
                self.atoms
            )));
        }
        self.positions = positions;
        Ok(self)
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn level_count(&self) -> usize {
        self.level_energies.len()
    }

    pub fn level_energies(&self) -> &[T] {
        &self.level_energies
    }

    pub fn energy(&self, level: usize) -> T {
        self.level_energies[level]
    }

    pub fn positions(&self) -> &[[T; 3]] {
        &self.positions
    }

    pub fn supports(&self, transition: Transition) -> bool {
        transition.levels().0 < self.level_count()
    }

    /// `ε^(hi) − ε^(lo)` for the given transition.
    pub fn transition_frequency(&self, transition: Transition) -> Option<T> {
        let (hi, lo) = transition.levels();
        if hi < self.level_count() {
            Some(self.level_energies[hi] - self.level_energies[lo])
        } else {
            None
        }
    }
}

/// A single quantized cavity mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Mode<T: Real> {
    pub transition: Transition,
    pub frequency: T,
    pub wave_vector: [T; 3],
    pub n_max: usize,
}

impl<T: Real> Mode<T> {
    pub fn new(transition: Transition, frequency: T, n_max: usize) -> Self {
        Self { transition, frequency, wave_vector: [T::zero(); 3], n_max }
    }
}

/// The photon part of a product basis. At most one mode per transition.
#[derive(Clone, Debug, PartialEq)]
pub struct FockFactor<T: Real> {
    modes: Vec<Mode<T>>,
}

impl<T: Real> FockFactor<T> {
    pub fn new(modes: Vec<Mode<T>>) -> Result<Self> {
        for (i, a) in modes.iter().enumerate() {
            if modes[..i].iter().any(|b| b.transition == a.transition) {
                return Err(Error::InvalidInput(format!(
                    "two modes drive transition {:?}",
                    a.transition
                )));
            }
        }
        Ok(Self { modes })
    }

    pub fn empty() -> Self {
        Self { modes: Vec::new() }
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn mode(&self, transition: Transition) -> Option<&Mode<T>> {
        self.modes.iter().find(|m| m.transition == transition)
    }

    /// Smallest truncation that holds `max_reachable` photons plus one guard level.
    pub fn guarded_truncation(max_reachable: usize) -> usize {
        max_reachable + 1
    }

}

/// Wave vectors `k₁, k₂, k₃` of the modes driving the lower, upper and direct
/// transitions. They fix the position phases `e^{ik·r}` of collective states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveVectors<T: Real>(pub [[T; 3]; 3]);

impl<T: Real> WaveVectors<T> {
    pub fn zero() -> Self {
        WaveVectors([[T::zero(); 3]; 3])
    }

    pub fn from_fock(fock: &FockFactor<T>) -> Self {
        let mut w = Self::zero();
        for m in fock.modes() {
            w.0[m.transition.slot()] = m.wave_vector;
        }
        w
    }

    pub fn get(&self, transition: Transition) -> [T; 3] {
        self.0[transition.slot()]
    }

    /// Phase wave vector of an atom sitting in `level`: level 2 carries `k₁`,
    /// level 3 carries `k₁ + k₂`.
    pub fn of_level(&self, level: usize) -> [T; 3] {
        let k1 = self.0[0];
        let k2 = self.0[1];
        match level {
            0 => [T::zero(); 3],
            1 => k1,
            _ => [k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2]],
        }
    }
}

/// Occupation of each level in a permutation-symmetric node state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelCounts(pub [usize; 3]);

impl LevelCounts {
    pub fn ground(atoms: usize) -> Self {
        LevelCounts([atoms, 0, 0])
    }

    /// Excitation weight: level 2 counts once, level 3 twice.
    pub fn weight(&self) -> usize {
        self.0[1] + 2 * self.0[2]
    }

    pub fn atoms(&self) -> usize {
        self.0.iter().sum()
    }
}

/// One tensor factor of a [`CompositeBasis`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    /// Every atom of the node carries its own digit; atom 0 is most significant.
    Microscopic { atoms: usize, levels: usize },
    /// Symmetric node states, ordered by weight then by level-3 count.
    Collective { atoms: usize, levels: usize, states: Vec<LevelCounts> },
    /// Photon number `0..=n_max` of the mode driving `transition`.
    Mode { transition: Transition, n_max: usize },
}

impl Factor {
    pub fn dimension(&self) -> usize {
        match self {
            Factor::Microscopic { atoms, levels } => levels.pow(*atoms as u32),
            Factor::Collective { states, .. } => states.len(),
            Factor::Mode { n_max, .. } => n_max + 1,
        }
    }

    pub fn is_node(&self) -> bool {
        !matches!(self, Factor::Mode { .. })
    }

    /// Collective node states with weight ≤ `max_excitation` that fit in `atoms`.
    pub fn collective(atoms: usize, levels: usize, max_excitation: usize) -> Factor {
        let mut states = Vec::new();
        for weight in 0..=max_excitation {
            for n3 in 0..=weight / 2 {
                if n3 > 0 && levels < 3 {
                    continue;
                }
                let n2 = weight - 2 * n3;
                if n2 + n3 <= atoms {
                    states.push(LevelCounts([atoms - n2 - n3, n2, n3]));
                }
            }
        }
        Factor::Collective { atoms, levels, states }
    }

    fn node_shape(&self) -> Option<(usize, usize)> {
        match self {
            Factor::Microscopic { atoms, levels } | Factor::Collective { atoms, levels, .. } => {
                Some((*atoms, *levels))
            }
            Factor::Mode { .. } => None,
        }
    }
}

/// Levels of every atom for a microscopic local index.
pub fn microscopic_levels(local: usize, atoms: usize, levels: usize) -> Vec<usize> {
    let mut out = vec![0; atoms];
    let mut rest = local;
    for slot in out.iter_mut().rev() {
        *slot = rest % levels;
        rest /= levels;
    }
    out
}

pub fn microscopic_index(levels_of_atoms: &[usize], levels: usize) -> usize {
    levels_of_atoms.iter().fold(0, |acc, &l| acc * levels + l)
}

/// Lexicographic tensor-product basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeBasis {
    factors: Vec<Factor>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dimension: usize,
}

impl CompositeBasis {
    pub fn new(factors: Vec<Factor>) -> Self {
        Self::with_cap(factors, usize::MAX).expect("uncapped basis")
    }

    pub fn with_cap(factors: Vec<Factor>, cap: usize) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(Factor::dimension).collect();
        let mut dimension: usize = 1;
        for &d in &dims {
            dimension = dimension.checked_mul(d).unwrap_or(usize::MAX);
        }
        if dimension > cap {
            return Err(Error::DimensionCap { dimension, cap });
        }
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(Self { factors, dims, strides, dimension })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn stride(&self, factor: usize) -> usize {
        self.strides[factor]
    }

    pub fn index(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0;
        for ((&t, &d), &s) in tuple.iter().zip(&self.dims).zip(&self.strides) {
            if t >= d {
                return None;
            }
            idx += t * s;
        }
        Some(idx)
    }

    pub fn tuple(&self, index: usize) -> Vec<usize> {
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &s)| (index / s) % d)
            .collect()
    }

    /// Positions (in `factors`) of the node factors, in node order.
    pub fn node_factors(&self) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| self.factors[i].is_node()).collect()
    }

    pub fn node_factor(&self, node: usize) -> Option<usize> {
        self.node_factors().get(node).copied()
    }

    pub fn mode_factor(&self, transition: Transition) -> Option<usize> {
        self.factors.iter().position(
            |f| matches!(f, Factor::Mode { transition: t, .. } if *t == transition),
        )
    }

    pub fn has_modes(&self) -> bool {
        self.factors.iter().any(|f| !f.is_node())
    }

    /// Photon numbers `[n_lower, n_upper, n_direct]` of a basis index.
    pub fn photon_numbers(&self, index: usize) -> [usize; 3] {
        let tuple = self.tuple(index);
        let mut n = [0; 3];
        for (f, &t) in self.factors.iter().zip(&tuple) {
            if let Factor::Mode { transition, .. } = f {
                n[transition.slot()] = t;
            }
        }
        n
    }

    /// Total weighted excitation (atomic level weights plus photon quanta).
    pub fn excitation(&self, index: usize) -> usize {
        let tuple = self.tuple(index);
        self.factors
            .iter()
            .zip(&tuple)
            .map(|(f, &t)| match f {
                Factor::Microscopic { atoms, levels } => {
                    microscopic_levels(t, *atoms, *levels).iter().sum()
                }
                Factor::Collective { states, .. } => states[t].weight(),
                Factor::Mode { transition, .. } => t * transition.photon_weight(),
            })
            .sum()
    }

    pub fn label(&self, index: usize) -> String {
        let tuple = self.tuple(index);
        let parts: Vec<String> = self
            .factors
            .iter()
            .zip(&tuple)
            .map(|(f, &t)| match f {
                Factor::Microscopic { atoms, levels } => microscopic_levels(t, *atoms, *levels)
                    .iter()
                    .map(|&l| ['g', 'e', 'r'][l])
                    .collect(),
                Factor::Collective { states, .. } => {
                    let c = states[t].0;
                    if c[2] == 0 {
                        format!("{}", c[1])
                    } else {
                        format!("({},{})", c[1], c[2])
                    }
                }
                Factor::Mode { transition, .. } => format!("n{}={}", transition.slot() + 1, t),
            })
            .collect();
        format!("|{}⟩", parts.join(","))
    }

    /// Checks node-for-node agreement of atom and level counts.
    pub fn same_nodes(&self, other: &CompositeBasis) -> bool {
        let a: Vec<_> = self.factors.iter().filter_map(Factor::node_shape).collect();
        let b: Vec<_> = other.factors.iter().filter_map(Factor::node_shape).collect();
        a == b
    }

    pub fn same_modes(&self, other: &CompositeBasis) -> bool {
        let a: Vec<_> = self.factors.iter().filter(|f| !f.is_node()).collect();
        let b: Vec<_> = other.factors.iter().filter(|f| !f.is_node()).collect();
        a == b
    }
}

impl fmt::Display for CompositeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompositeBasis(dim={}, factors={:?})", self.dimension, self.factors)
    }
}

fn mode_factors<T: Real>(fock: Option<&FockFactor<T>>) -> Vec<Factor> {
    fock.map(|f| {
        f.modes()
            .iter()
            .map(|m| Factor::Mode { transition: m.transition, n_max: m.n_max })
            .collect()
    })
    .unwrap_or_default()
}

/// Full microscopic product basis of `nodes` and the optional photon modes.
pub fn build_microscopic_basis<T: Real>(
    nodes: &[NodeSpec<T>],
    fock: Option<&FockFactor<T>>,
) -> Result<CompositeBasis> {
    build_microscopic_basis_capped(nodes, fock, DEFAULT_DIMENSION_CAP)
}

pub fn build_microscopic_basis_capped<T: Real>(
    nodes: &[NodeSpec<T>],
    fock: Option<&FockFactor<T>>,
    cap: usize,
) -> Result<CompositeBasis> {
    let mut factors: Vec<Factor> = nodes
        .iter()
        .map(|n| Factor::Microscopic { atoms: n.atoms(), levels: n.level_count() })
        .collect();
    // Product of per-factor sizes can overflow before the cap check; guard with f64.
    let approx: f64 = nodes
        .iter()
        .map(|n| (n.level_count() as f64).powi(n.atoms() as i32))
        .product::<f64>()
        * fock
            .map(|f| f.modes().iter().map(|m| (m.n_max + 1) as f64).product::<f64>())
            .unwrap_or(1.0);
    if approx > cap as f64 {
        return Err(Error::DimensionCap { dimension: approx.min(usize::MAX as f64) as usize, cap });
    }
    factors.extend(mode_factors(fock));
    CompositeBasis::with_cap(factors, cap)
}

/// Collective basis: each node truncated at `max_excitation[m]` weighted quanta.
pub fn build_collective_basis<T: Real>(
    nodes: &[NodeSpec<T>],
    max_excitation: &[usize],
    fock: Option<&FockFactor<T>>,
) -> Result<CompositeBasis> {
    if max_excitation.len() != nodes.len() {
        return Err(Error::InvalidInput(format!(
            "{} truncations for {} nodes",
            max_excitation.len(),
            nodes.len()
        )));
    }
    let mut factors: Vec<Factor> = nodes
        .iter()
        .zip(max_excitation)
        .map(|(n, &k)| Factor::collective(n.atoms(), n.level_count(), k))
        .collect();
    factors.extend(mode_factors(fock));
    Ok(CompositeBasis::new(factors))
}

/// The named two-node states |ψ⟩₁..|ψ⟩₆ on top of a two-node collective
/// product basis (two-level nodes, at most two excitations per node).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairStates {
    product: CompositeBasis,
    labels: Vec<String>,
    /// Each column: product indices with signs; normalized by `1/√len`.
    columns: Vec<Vec<(usize, i8)>>,
}

/// Builds |ψ⟩₁ = |0,0⟩, |ψ⟩₂ = |1,0⟩, |ψ⟩₃ = |0,1⟩, |ψ⟩₄ = |1,1⟩,
/// |ψ⟩₅,₆ = (|2,0⟩ ± |0,2⟩)/√2 for nodes of `n1` and `n2` atoms.
///
/// A node with a single atom has no |2⟩ state; in that case |ψ⟩₅,₆ are
/// replaced by whichever of |2,0⟩, |0,2⟩ exists so the set still spans the
/// ≤ 2 excitation sector.
pub fn build_two_node_collective_basis(n1: usize, n2: usize) -> Result<PairStates> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidNode("a node needs at least one atom".into()));
    }
    let product = CompositeBasis::new(vec![
        Factor::collective(n1, 2, 2),
        Factor::collective(n2, 2, 2),
    ]);
    let at = |a: usize, b: usize| product.index(&[a, b]);
    let mut labels = Vec::new();
    let mut columns = Vec::new();
    for (name, a, b) in [("ψ1", 0, 0), ("ψ2", 1, 0), ("ψ3", 0, 1), ("ψ4", 1, 1)] {
        labels.push(name.to_string());
        columns.push(vec![(at(a, b).expect("single excitations always fit"), 1)]);
    }
    match (at(2, 0), at(0, 2)) {
        (Some(i), Some(j)) => {
            labels.push("ψ5".into());
            columns.push(vec![(i, 1), (j, 1)]);
            labels.push("ψ6".into());
            columns.push(vec![(i, 1), (j, -1)]);
        }
        (Some(i), None) => {
            labels.push("|2,0⟩".into());
            columns.push(vec![(i, 1)]);
        }
        (None, Some(j)) => {
            labels.push("|0,2⟩".into());
            columns.push(vec![(j, 1)]);
        }
        (None, None) => {}
    }
    Ok(PairStates { product, labels, columns })
}

impl PairStates {
    pub fn product(&self) -> &CompositeBasis {
        &self.product
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Position of a named state such as `"ψ5"`.
    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `product.dimension() × dimension()` isometry whose columns are the named states.
    pub fn isometry<T: Real>(&self) -> CMatrix<T> {
        let mut v = DMatrix::zeros(self.product.dimension(), self.columns.len());
        for (c, col) in self.columns.iter().enumerate() {
            let norm = T::one() / T::count(col.len()).sqrt();
            for &(row, sign) in col {
                let s = if sign < 0 { -norm } else { norm };
                v[(row, c)] = Complex::new(s, T::zero());
            }
        }
        v
    }
}

/// Basis attached to a state vector or Hamiltonian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Basis {
    Product(CompositeBasis),
    Pair(PairStates),
}

impl Basis {
    pub fn dimension(&self) -> usize {
        match self {
            Basis::Product(b) => b.dimension(),
            Basis::Pair(p) => p.dimension(),
        }
    }

    pub fn label(&self, index: usize) -> String {
        match self {
            Basis::Product(b) => b.label(index),
            Basis::Pair(p) => p.labels[index].clone(),
        }
    }

    pub fn as_product(&self) -> Option<&CompositeBasis> {
        match self {
            Basis::Product(b) => Some(b),
            Basis::Pair(_) => None,
        }
    }
}

impl From<CompositeBasis> for Basis {
    fn from(b: CompositeBasis) -> Self {
        Basis::Product(b)
    }
}

impl From<PairStates> for Basis {
    fn from(p: PairStates) -> Self {
        Basis::Pair(p)
    }
}

pub(crate) fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Microscopic amplitudes of one symmetric node state, including the
/// position phase factors `e^{iK·r}` of each excited atom.
pub fn dicke_vector<T: Real>(
    node: &NodeSpec<T>,
    counts: LevelCounts,
    waves: &WaveVectors<T>,
) -> Vec<(usize, Complex<T>)> {
    let atoms = node.atoms();
    let levels = node.level_count();
    let total = levels.pow(atoms as u32);
    let wave: Vec<[T; 3]> = (0..levels).map(|l| waves.of_level(l)).collect();
    let mut out = Vec::new();
    for local in 0..total {
        let lv = microscopic_levels(local, atoms, levels);
        let mut c = [0usize; 3];
        for &l in &lv {
            c[l] += 1;
        }
        if c == counts.0 {
            let phase = lv
                .iter()
                .zip(node.positions())
                .fold(T::zero(), |acc, (&l, r)| acc + dot(&wave[l], r));
            out.push((local, cis(phase)));
        }
    }
    let norm = T::one() / T::count(out.len().max(1)).sqrt();
    for (_, z) in out.iter_mut() {
        *z = z.scale(norm);
    }
    out
}

/// Isometry mapping a collective basis into the microscopic basis of the
/// same nodes and modes (columns are the expanded collective states).
pub fn expansion_matrix<T: Real>(
    collective: &CompositeBasis,
    microscopic: &CompositeBasis,
    nodes: &[NodeSpec<T>],
    waves: &WaveVectors<T>,
) -> Result<CMatrix<T>> {
    if !collective.same_nodes(microscopic) || !collective.same_modes(microscopic) {
        return Err(Error::BasisMismatch(
            "collective and microscopic bases describe different nodes or modes".into(),
        ));
    }
    let node_idx = collective.node_factors();
    if node_idx.len() != nodes.len() {
        return Err(Error::BasisMismatch(format!(
            "{} node specs for {} node factors",
            nodes.len(),
            node_idx.len()
        )));
    }
    for (m, &fi) in node_idx.iter().enumerate() {
        if collective.factors()[fi].node_shape() != Some((nodes[m].atoms(), nodes[m].level_count())) {
            return Err(Error::BasisMismatch(format!("node {m} disagrees with its spec")));
        }
        if !matches!(microscopic.factors()[fi], Factor::Microscopic { .. })
            || !matches!(collective.factors()[fi], Factor::Collective { .. })
        {
            return Err(Error::BasisMismatch(format!(
                "factor {fi} must be collective on one side and microscopic on the other"
            )));
        }
    }

    // Per-factor local expansions (identity on modes).
    let local: Vec<Vec<Vec<(usize, Complex<T>)>>> = collective
        .factors()
        .iter()
        .enumerate()
        .map(|(fi, f)| match f {
            Factor::Collective { states, .. } => {
                let m = node_idx.iter().position(|&x| x == fi).expect("node factor");
                states.iter().map(|&s| dicke_vector(&nodes[m], s, waves)).collect()
            }
            Factor::Mode { n_max, .. } => {
                (0..=*n_max).map(|n| vec![(n, Complex::new(T::one(), T::zero()))]).collect()
            }
            Factor::Microscopic { .. } => unreachable!("checked above"),
        })
        .collect();

    let mut v = DMatrix::zeros(microscopic.dimension(), collective.dimension());
    for col in 0..collective.dimension() {
        let tuple = collective.tuple(col);
        // Tensor product of the local expansions.
        let mut acc: Vec<(usize, Complex<T>)> = vec![(0, Complex::new(T::one(), T::zero()))];
        for (fi, &t) in tuple.iter().enumerate() {
            let stride = microscopic.stride(fi);
            let mut next = Vec::with_capacity(acc.len() * local[fi][t].len());
            for &(row, amp) in &acc {
                for &(l, a) in &local[fi][t] {
                    next.push((row + l * stride, amp * a));
                }
            }
            acc = next;
        }
        for (row, amp) in acc {
            v[(row, col)] = amp;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{dagger, max_abs};

    fn two_level(n: usize) -> NodeSpec<f64> {
        NodeSpec::two_level(n, 0.0, 1.0).unwrap()
    }

    #[test]
    fn node_spec_validation() {
        assert!(NodeSpec::<f64>::new(2, vec![0.0, 0.0]).is_err());
        assert!(NodeSpec::<f64>::new(2, vec![1.0, 0.5]).is_err());
        assert!(NodeSpec::<f64>::new(2, vec![0.0]).is_err());
        assert!(NodeSpec::<f64>::new(0, vec![0.0, 1.0]).is_err());
        let n = NodeSpec::three_level(2, [0.0, 1.0, 2.5]).unwrap();
        assert!(n.clone().with_positions(vec![[0.0; 3]]).is_err());
        assert!(n.with_positions(vec![[0.0; 3], [1.0, 0.0, 0.0]]).is_ok());
    }

    #[test]
    fn microscopic_dimensions() {
        let fock1 = FockFactor::new(vec![Mode::new(Transition::Lower, 0.9, 2)]).unwrap();
        let b = build_microscopic_basis(&[two_level(1), two_level(1)], Some(&fock1)).unwrap();
        assert_eq!(b.dimension(), 12);

        let three = NodeSpec::three_level(1, [0.0, 1.0, 2.2]).unwrap();
        let fock3 = FockFactor::new(vec![
            Mode::new(Transition::Lower, 0.9, 2),
            Mode::new(Transition::Upper, 1.1, 2),
            Mode::new(Transition::Direct, 2.0, 2),
        ])
        .unwrap();
        let b = build_microscopic_basis(&[three.clone(), three], Some(&fock3)).unwrap();
        assert_eq!(b.dimension(), 243);

        let fock = FockFactor::new(vec![Mode::new(Transition::Lower, 0.9, 1)]).unwrap();
        let b = build_microscopic_basis(&[two_level(3), two_level(3)], Some(&fock)).unwrap();
        assert_eq!(b.dimension(), 128);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let err = build_microscopic_basis_capped::<f64>(&[two_level(10), two_level(10)], None, 1000)
            .unwrap_err();
        assert!(matches!(err, Error::DimensionCap { cap: 1000, .. }));
        assert!(build_microscopic_basis::<f64>(&[two_level(20), two_level(20)], None).is_err());
    }

    #[test]
    fn duplicate_modes_rejected() {
        let r = FockFactor::new(vec![
            Mode::new(Transition::Lower, 1.0, 1),
            Mode::new(Transition::Lower, 2.0, 1),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn index_round_trip() {
        let fock = FockFactor::new(vec![Mode::new(Transition::Lower, 0.9, 2)]).unwrap();
        let b = build_microscopic_basis(&[two_level(2), two_level(1)], Some(&fock)).unwrap();
        for i in 0..b.dimension() {
            assert_eq!(b.index(&b.tuple(i)), Some(i));
        }
        assert_eq!(b.index(&[4, 0, 0]), None);
        assert_eq!(b.index(&[0, 0]), None);
    }

    #[test]
    fn collective_factor_states() {
        match Factor::collective(3, 2, 2) {
            Factor::Collective { states, .. } => {
                assert_eq!(states, vec![LevelCounts([3, 0, 0]), LevelCounts([2, 1, 0]), LevelCounts([1, 2, 0])]);
            }
            _ => unreachable!(),
        }
        match Factor::collective(2, 3, 2) {
            Factor::Collective { states, .. } => assert_eq!(states.len(), 4),
            _ => unreachable!(),
        }
        // single atom cannot hold two excitations of level 2
        assert_eq!(Factor::collective(1, 2, 2).dimension(), 2);
    }

    #[test]
    fn pair_states_are_orthonormal() {
        for (n1, n2) in [(1, 1), (2, 2), (3, 2), (1, 3)] {
            let p = build_two_node_collective_basis(n1, n2).unwrap();
            let v = p.isometry::<f64>();
            let gram = dagger(&v) * &v;
            let id = CMatrix::<f64>::identity(p.dimension(), p.dimension());
            assert!(max_abs(&(gram - id)) < 1e-12);
        }
        assert_eq!(build_two_node_collective_basis(2, 2).unwrap().dimension(), 6);
        assert_eq!(build_two_node_collective_basis(1, 1).unwrap().dimension(), 4);
    }

    #[test]
    fn psi5_amplitudes() {
        let p = build_two_node_collective_basis(2, 2).unwrap();
        let v = p.isometry::<f64>();
        let col = p.position("ψ5").unwrap();
        let i20 = p.product().index(&[2, 0]).unwrap();
        let i02 = p.product().index(&[0, 2]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[(i20, col)].re - s).abs() < 1e-15);
        assert!((v[(i02, col)].re - s).abs() < 1e-15);
        let col6 = p.position("ψ6").unwrap();
        assert!((v[(i02, col6)].re + s).abs() < 1e-15);
    }

    #[test]
    fn excitation_and_labels() {
        let fock = FockFactor::new(vec![Mode::new(Transition::Direct, 2.0, 2)]).unwrap();
        let three = NodeSpec::three_level(1, [0.0, 1.0, 2.2]).unwrap();
        let b = build_microscopic_basis(&[three], Some(&fock)).unwrap();
        // atom in level 3 with one photon of the 1↔3 mode: 2 + 2
        let i = b.index(&[2, 1]).unwrap();
        assert_eq!(b.excitation(i), 4);
        assert_eq!(b.label(i), "|r,n3=1⟩");
        assert_eq!(b.photon_numbers(i), [0, 0, 1]);
    }
}
