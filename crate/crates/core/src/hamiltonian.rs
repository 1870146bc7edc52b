//! Microscopic and effective Hamiltonians as dense matrices.
//!
//! Conventions: `ħ = 1`; the atom–field coupling of node `m` on transition
//! `c` is `g X a + g* X† a†` with `X = Σ_j e^{ik·r_j} S^j_{hi,lo}` the
//! collective raising operator; detunings are `Δ = ε_hi − ε_lo − ω_mode`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;

use crate::basis::{Basis, CompositeBasis, FockFactor, NodeSpec, PairStates, Transition, WaveVectors};
use crate::error::{Error, Result};
use crate::operators::{excitation_operator, Operators};
use crate::scalar::{dagger, max_abs, modulus, phase_of, re, sparse_mul, CMatrix, Real};

/// Dense Hermitian matrix tagged with the basis it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix<T: Real> {
    matrix: CMatrix<T>,
    basis: Arc<Basis>,
    label: String,
}

impl<T: Real> HamiltonianMatrix<T> {
    pub fn new(matrix: CMatrix<T>, basis: Arc<Basis>, label: impl Into<String>) -> Result<Self> {
        let d = basis.dimension();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} matrix for a basis of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, basis, label: label.into() })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max|H − H†| / max|H|` (zero for the zero matrix).
    pub fn hermiticity_defect(&self) -> T {
        let scale = max_abs(&self.matrix);
        if scale == T::zero() {
            return T::zero();
        }
        max_abs(&(&self.matrix - dagger(&self.matrix))) / scale
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn element(&self, row: usize, col: usize) -> Complex<T> {
        self.matrix[(row, col)]
    }

    /// Restriction `V† H V` onto the named two-node states.
    pub fn project_onto_pair_states(&self, pair: &PairStates) -> Result<Self> {
        match self.basis.as_ref() {
            Basis::Product(b) if b == pair.product() => {}
            _ => return Err(Error::BasisMismatch("Hamiltonian is not on the pair product basis".into())),
        }
        let v = pair.isometry::<T>();
        let m = dagger(&v) * &self.matrix * v;
        Self::new(m, Arc::new(Basis::Pair(pair.clone())), self.label.clone())
    }
}

/// Reference frame applied after a Hamiltonian is assembled.
#[derive(Clone, Debug, PartialEq)]
pub enum Frame<T: Real> {
    Lab,
    /// Subtracts `ω_ref · Q`, where `Q` is the weighted excitation operator.
    /// `Q` commutes with every excitation-conserving Hamiltonian, so this only
    /// shifts sector phases.
    Excitation(T),
    /// Subtracts an arbitrary user-supplied diagonal.
    Diagonal(Vec<T>),
}

impl<T: Real> Frame<T> {
    fn apply(&self, h: &mut CMatrix<T>, basis: &CompositeBasis) -> Result<()> {
        match self {
            Frame::Lab => {}
            Frame::Excitation(w) => {
                *h -= excitation_operator::<T>(basis) * re(*w);
            }
            Frame::Diagonal(d) => {
                if d.len() != basis.dimension() {
                    return Err(Error::DimensionMismatch(format!(
                        "frame diagonal has {} entries for dimension {}",
                        d.len(),
                        basis.dimension()
                    )));
                }
                for (i, &x) in d.iter().enumerate() {
                    h[(i, i)] -= re(x);
                }
            }
        }
        Ok(())
    }
}

/// Atom–field coupling constants `g^{(m)}_c`, per node and transition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CouplingSet<T: Real> {
    entries: BTreeMap<(usize, Transition), Complex<T>>,
}

impl<T: Real> CouplingSet<T> {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// Same coupling on every node for one transition.
    pub fn uniform(node_count: usize, transition: Transition, g: Complex<T>) -> Self {
        Self::new().with_all(node_count, transition, g)
    }

    pub fn with(mut self, node: usize, transition: Transition, g: Complex<T>) -> Self {
        self.set(node, transition, g);
        self
    }

    pub fn with_all(mut self, node_count: usize, transition: Transition, g: Complex<T>) -> Self {
        for m in 0..node_count {
            self.set(m, transition, g);
        }
        self
    }

    pub fn set(&mut self, node: usize, transition: Transition, g: Complex<T>) {
        self.entries.insert((node, transition), g);
    }

    pub fn get(&self, node: usize, transition: Transition) -> Option<Complex<T>> {
        self.entries.get(&(node, transition)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Transition, Complex<T>)> + '_ {
        self.entries.iter().map(|(&(m, t), &g)| (m, t, g))
    }
}

/// Detunings `Δ^{(c)}_m` of every node/transition that has a mode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DetuningSet<T: Real> {
    entries: BTreeMap<(usize, Transition), T>,
}

impl<T: Real> DetuningSet<T> {
    /// `Δ = ε_hi − ε_lo − ω` for each node and each mode it can absorb.
    pub fn derive(nodes: &[NodeSpec<T>], modes: &FockFactor<T>) -> Self {
        let mut entries = BTreeMap::new();
        for (m, node) in nodes.iter().enumerate() {
            for mode in modes.modes() {
                if let Some(w) = node.transition_frequency(mode.transition) {
                    entries.insert((m, mode.transition), w - mode.frequency);
                }
            }
        }
        Self { entries }
    }

    pub fn get(&self, node: usize, transition: Transition) -> Option<T> {
        self.entries.get(&(node, transition)).copied()
    }

    pub fn set(&mut self, node: usize, transition: Transition, delta: T) {
        self.entries.insert((node, transition), delta);
    }
}

/// One coupled node/mode pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Channel<T: Real> {
    pub node: usize,
    pub transition: Transition,
    pub g: Complex<T>,
    pub delta: T,
}

/// Nodes, photon modes and couplings of one cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityModel<T: Real> {
    nodes: Vec<NodeSpec<T>>,
    modes: FockFactor<T>,
    couplings: CouplingSet<T>,
    detunings: DetuningSet<T>,
    floor_factor: T,
}

/// Denominators below this fraction of the largest energy scale are rejected.
pub const DEFAULT_RESONANCE_FLOOR: f64 = 1e-9;

impl<T: Real> CavityModel<T> {
    pub fn new(nodes: Vec<NodeSpec<T>>, modes: FockFactor<T>, couplings: CouplingSet<T>) -> Result<Self> {
        for (m, t, _) in couplings.iter() {
            let node = nodes
                .get(m)
                .ok_or_else(|| Error::InvalidInput(format!("coupling given for missing node {m}")))?;
            if !node.supports(t) {
                return Err(Error::InvalidInput(format!(
                    "coupling given for {t:?} on node {m}, which has {} levels",
                    node.level_count()
                )));
            }
        }
        let detunings = DetuningSet::derive(&nodes, &modes);
        Ok(Self { nodes, modes, couplings, detunings, floor_factor: T::lit(DEFAULT_RESONANCE_FLOOR) })
    }

    /// Replaces a derived detuning. The microscopic Hamiltonian keeps using
    /// the bare energies, so overridden models are effective-only.
    pub fn with_detuning(mut self, node: usize, transition: Transition, delta: T) -> Self {
        self.detunings.set(node, transition, delta);
        self
    }

    pub fn with_resonance_floor(mut self, factor: T) -> Self {
        self.floor_factor = factor;
        self
    }

    pub fn nodes(&self) -> &[NodeSpec<T>] {
        &self.nodes
    }

    pub fn modes(&self) -> &FockFactor<T> {
        &self.modes
    }

    pub fn couplings(&self) -> &CouplingSet<T> {
        &self.couplings
    }

    pub fn detunings(&self) -> &DetuningSet<T> {
        &self.detunings
    }

    pub fn waves(&self) -> WaveVectors<T> {
        WaveVectors::from_fock(&self.modes)
    }

    /// Largest |ε| or |ω| in the model (1 if everything is zero).
    pub fn energy_scale(&self) -> T {
        let mut s = T::zero();
        for n in &self.nodes {
            for &e in n.level_energies() {
                s = s.max(e.abs());
            }
        }
        for m in self.modes.modes() {
            s = s.max(m.frequency.abs());
        }
        if s == T::zero() {
            T::one()
        } else {
            s
        }
    }

    pub fn resonance_floor(&self) -> T {
        self.floor_factor * self.energy_scale()
    }

    /// Every node/mode pair with a nonzero coupling.
    pub fn channels(&self) -> Result<Vec<Channel<T>>> {
        let mut out = Vec::new();
        for mode in self.modes.modes() {
            for (m, node) in self.nodes.iter().enumerate() {
                if !node.supports(mode.transition) {
                    continue;
                }
                let g = self
                    .couplings
                    .get(m, mode.transition)
                    .ok_or(Error::MissingCoupling { node: m, transition: mode.transition })?;
                if g == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                let delta = self.detunings.get(m, mode.transition).expect("derived for every supported mode");
                out.push(Channel { node: m, transition: mode.transition, g, delta });
            }
        }
        Ok(out)
    }

    /// Channels with their detunings checked against the resonance floor.
    pub fn dispersive_channels(&self) -> Result<Vec<Channel<T>>> {
        let floor = self.resonance_floor();
        let channels = self.channels()?;
        for c in &channels {
            if !(c.delta.abs() > floor) {
                return Err(Error::ResonanceSingularity {
                    node: c.node,
                    transition: c.transition,
                    value: c.delta.to_f64(),
                    floor: floor.to_f64(),
                });
            }
        }
        Ok(channels)
    }

    fn operators<'a>(&'a self, basis: &'a CompositeBasis) -> Result<Operators<'a, T>> {
        Operators::new(basis, &self.nodes, self.waves())
    }

    fn check_modes(&self, basis: &CompositeBasis) -> Result<()> {
        let model: Vec<_> = self.modes.modes().iter().map(|m| (m.transition, m.n_max)).collect();
        let present: Vec<_> = basis
            .factors()
            .iter()
            .filter_map(|f| match f {
                crate::basis::Factor::Mode { transition, n_max } => Some((*transition, *n_max)),
                _ => None,
            })
            .collect();
        if model != present {
            return Err(Error::BasisMismatch(format!(
                "basis modes {present:?} differ from model modes {model:?}"
            )));
        }
        Ok(())
    }
}

/// One entry of the generator coefficient table: `s` contains
/// `α g X a + β g* X† a†` for this node and transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwCoefficient<T: Real> {
    pub node: usize,
    pub transition: Transition,
    pub alpha: T,
    pub beta: T,
}

/// `α = −β = −1/Δ` for every coupled node/mode pair.
pub fn sw_coefficients<T: Real>(model: &CavityModel<T>) -> Result<Vec<SwCoefficient<T>>> {
    Ok(model
        .dispersive_channels()?
        .into_iter()
        .map(|c| {
            let alpha = -T::one() / c.delta;
            SwCoefficient { node: c.node, transition: c.transition, alpha, beta: -alpha }
        })
        .collect())
}

/// Free part `H₀ = H_d + H_f` and coupling part `H₁` on a basis with photon modes.
pub fn microscopic_parts<T: Real>(
    model: &CavityModel<T>,
    basis: &CompositeBasis,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    model.check_modes(basis)?;
    let ops = model.operators(basis)?;
    let mut h0 = ops.zero();
    for m in 0..model.nodes.len() {
        h0 += ops.node_energy(m)?;
    }
    for mode in model.modes.modes() {
        h0 += ops.photon_number(mode.transition)? * re(mode.frequency);
    }
    let mut h1 = ops.zero();
    for c in model.channels()? {
        let term = sparse_mul(&ops.raise(c.node, c.transition)?, &ops.annihilation(c.transition)?) * c.g;
        h1 += &term + dagger(&term);
    }
    Ok((h0, h1))
}

/// `H = H_d + H_f + H₂₁ + H₃₂ + H₃₁` in the rotating-wave approximation.
pub fn microscopic_hamiltonian<T: Real>(
    model: &CavityModel<T>,
    basis: &CompositeBasis,
    frame: &Frame<T>,
) -> Result<HamiltonianMatrix<T>> {
    let (h0, h1) = microscopic_parts(model, basis)?;
    let mut h = h0 + h1;
    frame.apply(&mut h, basis)?;
    HamiltonianMatrix::new(h, Arc::new(Basis::Product(basis.clone())), "microscopic")
}

/// The anti-Hermitian generator `s` as a matrix, built from [`sw_coefficients`].
pub fn sw_generator<T: Real>(model: &CavityModel<T>, basis: &CompositeBasis) -> Result<CMatrix<T>> {
    model.check_modes(basis)?;
    let ops = model.operators(basis)?;
    let coefficients = sw_coefficients(model)?;
    let channels = model.dispersive_channels()?;
    let mut s = ops.zero();
    for (c, k) in channels.iter().zip(&coefficients) {
        let a = sparse_mul(&ops.raise(c.node, c.transition)?, &ops.annihilation(c.transition)?) * c.g;
        s += &a * re(k.alpha) + dagger(&a) * re(k.beta);
    }
    Ok(s)
}

/// How photons enter the effective Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Photons {
    /// Photon numbers `[n₁, n₂, n₃]` are c-numbers on an atom-only basis; only
    /// photon-number-conserving terms survive and the photon energy is omitted.
    Fixed([usize; 3]),
    /// The basis carries Fock factors; two-photon and Raman terms are kept.
    Quantized,
}

/// Second-order effective Hamiltonian `H₀ + ½[H₁, s]` in closed, normal-ordered form.
///
/// With `A_j = g_j X_j a_j` summed over coupled node/mode pairs `j`:
///
/// `H₂ = ½ Σ_{jj'} (1/Δ_j + 1/Δ_j') [A_j, A_j'†] + ¼ Σ_{jj'} (1/Δ_j − 1/Δ_j') ([A_j, A_j'] + h.c.)`
///
/// where same-mode products are normal ordered analytically,
/// `[X a, Y a†] = [X, Y] n + X Y`, so no Fock truncation enters the photon
/// algebra.
pub fn effective_hamiltonian<T: Real>(
    model: &CavityModel<T>,
    basis: &CompositeBasis,
    photons: Photons,
    frame: &Frame<T>,
) -> Result<HamiltonianMatrix<T>> {
    let channels = model.dispersive_channels()?;
    let ops = model.operators(basis)?;
    match photons {
        Photons::Fixed(_) if basis.has_modes() => {
            return Err(Error::BasisMismatch("fixed photon numbers need an atom-only basis".into()))
        }
        Photons::Quantized => model.check_modes(basis)?,
        Photons::Fixed(_) => {}
    }

    let mut h = ops.zero();
    for m in 0..model.nodes.len() {
        h += ops.node_energy(m)?;
    }
    if photons == Photons::Quantized {
        for mode in model.modes.modes() {
            h += ops.photon_number(mode.transition)? * re(mode.frequency);
        }
    }

    let xs: Vec<CMatrix<T>> =
        channels.iter().map(|c| ops.raise(c.node, c.transition)).collect::<Result<_>>()?;
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);

    for (j, cj) in channels.iter().enumerate() {
        for (k, ck) in channels.iter().enumerate() {
            let same_mode = cj.transition == ck.transition;
            let plus = half * (T::one() / cj.delta + T::one() / ck.delta);
            let gg = cj.g * ck.g.conj() * plus;
            let y = dagger(&xs[k]);
            let xy = sparse_mul(&xs[j], &y);
            let comm = ops.transition_commutator((cj.node, cj.transition, false), (ck.node, ck.transition, true))?;
            match photons {
                Photons::Fixed(n) => {
                    if same_mode {
                        let nc = T::count(n[cj.transition.slot()]);
                        h += (comm * re(nc) + xy) * gg;
                    }
                }
                Photons::Quantized => {
                    if same_mode {
                        let num = ops.photon_number(cj.transition)?;
                        h += (sparse_mul(&comm, &num) + xy) * gg;
                    } else {
                        let a = ops.annihilation(cj.transition)?;
                        let b_dag = dagger(&ops.annihilation(ck.transition)?);
                        h += sparse_mul(&comm, &sparse_mul(&a, &b_dag)) * gg;
                    }
                    let minus = quarter * (T::one() / cj.delta - T::one() / ck.delta);
                    if minus != T::zero() {
                        let pair = ops.transition_commutator(
                            (cj.node, cj.transition, false),
                            (ck.node, ck.transition, false),
                        )?;
                        let aa = sparse_mul(&ops.annihilation(cj.transition)?, &ops.annihilation(ck.transition)?);
                        let term = sparse_mul(&pair, &aa) * (cj.g * ck.g * minus);
                        h += &term + dagger(&term);
                    }
                }
            }
        }
    }
    frame.apply(&mut h, basis)?;
    HamiltonianMatrix::new(h, Arc::new(Basis::Product(basis.clone())), "effective")
}

/// Photon-mediated rates of two two-level nodes sharing the lower-transition mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveRates<T: Real> {
    /// `Ω_m = |g^{(m)}|² / Δ_m`
    pub omega: [T; 2],
    /// `|Ω_σ|`, where `Ω_σ = ½ g^{(1)} g^{(2)*} (1/Δ₁ + 1/Δ₂)`.
    pub omega_sigma: T,
    /// `arg Ω_σ` (zero for real couplings).
    pub sigma_phase: T,
    /// Bare transition frequencies `ω_m = ε_m^(2) − ε_m^(1)`.
    pub bare: [T; 2],
}

impl<T: Real> EffectiveRates<T> {
    pub fn from_couplings(g: [Complex<T>; 2], delta: [T; 2], bare: [T; 2]) -> Result<Self> {
        for (m, d) in delta.iter().enumerate() {
            if *d == T::zero() {
                return Err(Error::ResonanceSingularity {
                    node: m,
                    transition: Transition::Lower,
                    value: 0.0,
                    floor: 0.0,
                });
            }
        }
        let omega = [g[0].norm_sqr() / delta[0], g[1].norm_sqr() / delta[1]];
        let sigma = g[0] * g[1].conj() * (T::lit(0.5) * (T::one() / delta[0] + T::one() / delta[1]));
        let mut omega_sigma = modulus(sigma);
        let mut sigma_phase = phase_of(sigma);
        // keep the sign for real negative detunings instead of a π phase
        if sigma.im == T::zero() && sigma.re < T::zero() {
            omega_sigma = sigma.re;
            sigma_phase = T::zero();
        }
        Ok(Self { omega, omega_sigma, sigma_phase, bare })
    }

    /// Equal per-node rates `Ω₁ = Ω₂ = Ω_σ` (the single-coupling swap model).
    pub fn symmetric(omega_sigma: T, bare: [T; 2]) -> Self {
        Self { omega: [omega_sigma; 2], omega_sigma, sigma_phase: T::zero(), bare }
    }

    /// Rates with `ω₂` tuned so the photon-free swap `|ψ⟩₂ ↔ |ψ⟩₃` is
    /// resonant: `ω₂ = ω₁ + N₁Ω₁ − N₂Ω₂`.
    pub fn resonant(omega: [T; 2], omega_sigma: T, atoms: [usize; 2], w1: T) -> Self {
        let w2 = w1 + T::count(atoms[0]) * omega[0] - T::count(atoms[1]) * omega[1];
        Self { omega, omega_sigma, sigma_phase: T::zero(), bare: [w1, w2] }
    }

    pub fn sigma(&self) -> Complex<T> {
        Complex::new(self.sigma_phase.cos(), self.sigma_phase.sin()) * self.omega_sigma
    }

    /// `ω̃_m = ω_m + 2 n Ω_m`
    pub fn dressed(&self, photons: usize) -> [T; 2] {
        let n = T::count(photons);
        let two = T::lit(2.0);
        [self.bare[0] + two * n * self.omega[0], self.bare[1] + two * n * self.omega[1]]
    }

    /// `ω̃₂ − ω̃₁ + N₂Ω₂ − N₁Ω₁`, the detuning of the single-excitation swap.
    pub fn swap_mismatch(&self, atoms: [usize; 2], photons: usize) -> T {
        let d = self.dressed(photons);
        d[1] - d[0] + T::count(atoms[1]) * self.omega[1] - T::count(atoms[0]) * self.omega[0]
    }
}

fn check_two_level_pair<T: Real>(nodes: &[NodeSpec<T>]) -> Result<()> {
    if nodes.len() != 2 || nodes.iter().any(|n| n.level_count() != 2) {
        return Err(Error::BasisMismatch("this Hamiltonian needs exactly two two-level nodes".into()));
    }
    Ok(())
}

/// Photon-number-dressed swap Hamiltonian of two two-level nodes:
/// bare energies, Lamb shifts `Ω_m (S₂₂ − S₁₁) n`, intra-node swaps
/// `Ω_m X_m X_m†` and the inter-node exchange `Ω_σ X₁ X₂† + h.c.`.
pub fn lamb_shift_hamiltonian<T: Real>(
    basis: &CompositeBasis,
    nodes: &[NodeSpec<T>],
    rates: &EffectiveRates<T>,
    photons: usize,
    frame: &Frame<T>,
) -> Result<HamiltonianMatrix<T>> {
    check_two_level_pair(nodes)?;
    let ops = Operators::new(basis, nodes, WaveVectors::zero())?;
    let n = T::count(photons);
    let mut h = ops.zero();
    let mut xs = Vec::with_capacity(2);
    for m in 0..2 {
        h += ops.node_energy(m)?;
        let x = ops.raise(m, Transition::Lower)?;
        let xd = dagger(&x);
        let lamb = ops.population(m, 1)? - ops.population(m, 0)?;
        h += (lamb * re(n) + sparse_mul(&x, &xd)) * re(rates.omega[m]);
        xs.push(x);
    }
    let exchange = sparse_mul(&xs[0], &dagger(&xs[1])) * rates.sigma();
    h += &exchange + dagger(&exchange);
    frame.apply(&mut h, basis)?;
    HamiltonianMatrix::new(h, Arc::new(Basis::Product(basis.clone())), "lamb-shift")
}

/// Zero-photon swap Hamiltonian with a single rate `Ω_σ` for intra- and
/// inter-node exchange.
pub fn two_level_swap_hamiltonian<T: Real>(
    basis: &CompositeBasis,
    nodes: &[NodeSpec<T>],
    omega_sigma: T,
    frame: &Frame<T>,
) -> Result<HamiltonianMatrix<T>> {
    check_two_level_pair(nodes)?;
    let bare = [
        nodes[0].transition_frequency(Transition::Lower).expect("two-level"),
        nodes[1].transition_frequency(Transition::Lower).expect("two-level"),
    ];
    let h = lamb_shift_hamiltonian(basis, nodes, &EffectiveRates::symmetric(omega_sigma, bare), 0, frame)?;
    HamiltonianMatrix::new(h.into_matrix(), Arc::new(Basis::Product(basis.clone())), "two-level-swap")
}

/// Couplings of the cross-transition exchange between a control node's lower
/// transition and the upper transitions of its target nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TransistorCouplings<T: Real> {
    pub g21_control: Complex<T>,
    pub delta_control: T,
    pub g32_targets: Vec<Complex<T>>,
    pub delta_targets: Vec<T>,
    /// Include the exchange between target nodes on their upper transition.
    pub co_transfer: bool,
    pub waves: WaveVectors<T>,
}

impl<T: Real> TransistorCouplings<T> {
    /// Equal couplings and detunings on every target.
    pub fn uniform(g21: Complex<T>, delta_control: T, g32: Complex<T>, delta_target: T, targets: usize) -> Self {
        Self {
            g21_control: g21,
            delta_control,
            g32_targets: vec![g32; targets],
            delta_targets: vec![delta_target; targets],
            co_transfer: false,
            waves: WaveVectors::zero(),
        }
    }

    /// `Ω_m = ½ g₂₁^{(c)*} g₃₂^{(m)} (1/Δ_c + 1/Δ_m)`
    pub fn exchange_rate(&self, target: usize) -> Complex<T> {
        self.g21_control.conj()
            * self.g32_targets[target]
            * (T::lit(0.5) * (T::one() / self.delta_control + T::one() / self.delta_targets[target]))
    }

    fn target_rate(&self, a: usize, b: usize) -> Complex<T> {
        self.g32_targets[a]
            * self.g32_targets[b].conj()
            * (T::lit(0.5) * (T::one() / self.delta_targets[a] + T::one() / self.delta_targets[b]))
    }

    fn check(&self) -> Result<()> {
        if self.g32_targets.len() != self.delta_targets.len() {
            return Err(Error::InvalidInput("one detuning per target coupling is required".into()));
        }
        let mut scale = self.g21_control.norm_sqr().sqrt().max(self.delta_control.abs());
        for (g, d) in self.g32_targets.iter().zip(&self.delta_targets) {
            scale = scale.max(modulus(*g)).max(d.abs());
        }
        let floor = T::lit(DEFAULT_RESONANCE_FLOOR) * scale;
        let all = std::iter::once((0usize, Transition::Lower, self.delta_control))
            .chain(self.delta_targets.iter().enumerate().map(|(m, &d)| (m + 1, Transition::Upper, d)));
        for (node, transition, d) in all {
            if !(d.abs() > floor) {
                return Err(Error::ResonanceSingularity {
                    node,
                    transition,
                    value: d.to_f64(),
                    floor: floor.to_f64(),
                });
            }
        }
        Ok(())
    }
}

/// Cross-transition exchange `Σ_m Ω_m X₂₁^{(c)†} X₃₂^{(m)} + h.c.` with node 0
/// the control and nodes `1..` the targets (all three-level).
pub fn transistor_hamiltonian<T: Real>(
    basis: &CompositeBasis,
    nodes: &[NodeSpec<T>],
    couplings: &TransistorCouplings<T>,
) -> Result<HamiltonianMatrix<T>> {
    couplings.check()?;
    if nodes.len() != couplings.g32_targets.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} nodes for one control and {} targets",
            nodes.len(),
            couplings.g32_targets.len()
        )));
    }
    if nodes.iter().any(|n| n.level_count() != 3) {
        return Err(Error::BasisMismatch("transistor nodes must be three-level".into()));
    }
    let ops = Operators::new(basis, nodes, couplings.waves)?;
    let xc_dag = dagger(&ops.raise(0, Transition::Lower)?);
    let mut h = ops.zero();
    let targets: Vec<CMatrix<T>> = (1..nodes.len())
        .map(|m| ops.raise(m, Transition::Upper))
        .collect::<Result<_>>()?;
    for (m, x) in targets.iter().enumerate() {
        let term = sparse_mul(&xc_dag, x) * couplings.exchange_rate(m);
        h += &term + dagger(&term);
    }
    if couplings.co_transfer {
        for a in 0..targets.len() {
            for b in (a + 1)..targets.len() {
                let term = sparse_mul(&targets[a], &dagger(&targets[b])) * couplings.target_rate(a, b);
                h += &term + dagger(&term);
            }
        }
    }
    HamiltonianMatrix::new(h, Arc::new(Basis::Product(basis.clone())), "transistor")
}
