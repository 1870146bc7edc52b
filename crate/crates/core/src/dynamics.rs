//! Time evolution, the analytic closed forms for pair swaps, photon blockade
//! and transistor transfer, and the effective-versus-microscopic error study.

use std::sync::Arc;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex;

use crate::basis::{
    build_collective_basis, build_microscopic_basis, expansion_matrix, Basis, CompositeBasis,
    FockFactor, LevelCounts, Mode, NodeSpec, PairStates, Transition, WaveVectors,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    microscopic_hamiltonian, two_level_swap_hamiltonian, CavityModel, CouplingSet, EffectiveRates,
    Frame, HamiltonianMatrix,
};
use crate::scalar::{cis, dagger, im, inner, norm, re, CMatrix, CVector, Real};
use crate::state::StateVector;

/// Cached eigendecomposition of a Hamiltonian for repeated propagation.
#[derive(Clone, Debug)]
pub struct Propagator<T: Real> {
    energies: Vec<T>,
    vectors: CMatrix<T>,
    vectors_dag: CMatrix<T>,
    basis: Arc<Basis>,
}

const EIGEN_MAX_ITER: usize = 10_000;

impl<T: Real> Propagator<T> {
    pub fn new(h: &HamiltonianMatrix<T>) -> Result<Self> {
        // Symmetrize first so round-off asymmetry cannot bias the solver.
        let m = (h.matrix() + dagger(h.matrix())) * re(T::lit(0.5));
        let eig = SymmetricEigen::try_new(m, T::epsilon(), EIGEN_MAX_ITER).ok_or(Error::EigenFailure)?;
        let energies: Vec<T> = eig.eigenvalues.iter().copied().collect();
        let vectors = eig.eigenvectors;
        let vectors_dag = dagger(&vectors);
        Ok(Self { energies, vectors, vectors_dag, basis: h.basis().clone() })
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// `exp(−iHt) ψ`
    pub fn evolve(&self, psi: &StateVector<T>, t: T) -> Result<StateVector<T>> {
        if psi.basis() != &self.basis && psi.basis().as_ref() != self.basis.as_ref() {
            return Err(Error::BasisMismatch("state and Hamiltonian use different bases".into()));
        }
        let mut c = &self.vectors_dag * psi.amplitudes();
        for (z, &e) in c.iter_mut().zip(&self.energies) {
            *z *= cis(-e * t);
        }
        StateVector::new(self.basis.clone(), &self.vectors * c)
    }

    /// The full unitary `exp(−iHt)`.
    pub fn unitary(&self, t: T) -> CMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.energies.iter().enumerate() {
            let phase = cis(-e * t);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= phase;
            }
        }
        scaled * &self.vectors_dag
    }
}

/// `ψ(t) = exp(−iHt) ψ₀` by exact eigendecomposition.
pub fn propagate<T: Real>(h: &HamiltonianMatrix<T>, psi0: &StateVector<T>, t: T) -> Result<StateVector<T>> {
    Propagator::new(h)?.evolve(psi0, t)
}

/// `|⟨a|b⟩|²`
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    a.fidelity(b)
}

/// Uniform grid of `points` times on `[0, t_max]` (both ends included).
pub fn time_grid<T: Real>(t_max: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..points).map(|i| t_max * T::count(i) / T::count(points - 1)).collect(),
    }
}

/// Location of the first local maximum of `f` on `[lo, hi]`.
///
/// The maximum is bracketed on a grid of `samples` points and refined by
/// golden-section search. Returns `None` if the sampled values never rise
/// above `floor`.
pub fn first_maximum<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, samples: usize, floor: T) -> Option<T> {
    let grid = time_grid(hi - lo, samples.max(3));
    let vals: Vec<T> = grid.iter().map(|&t| f(lo + t)).collect();
    let mut idx = None;
    for i in 1..vals.len() - 1 {
        if vals[i] > floor && vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            idx = Some(i);
            break;
        }
    }
    let i = idx?;
    let mut a = lo + grid[i - 1];
    let mut b = lo + grid[i + 1];
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * (a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    Some((a + b) * T::lit(0.5))
}

/// Amplitudes on the named two-node states |ψ⟩₁..|ψ⟩₆.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairAmplitudes<T: Real>(pub [Complex<T>; 6]);

impl<T: Real> PairAmplitudes<T> {
    pub fn get(&self, k: usize) -> Complex<T> {
        self.0[k - 1]
    }

    pub fn norm(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Places the amplitudes on a concrete pair basis. The second value is the
    /// weight on states that basis does not contain (|ψ⟩₅,₆ for single atoms).
    pub fn to_state(&self, pair: &PairStates) -> Result<(StateVector<T>, T)> {
        let mut v = DVector::zeros(pair.dimension());
        let mut missing = T::zero();
        for (k, z) in self.0.iter().enumerate() {
            match pair.position(&format!("ψ{}", k + 1)) {
                Some(i) => v[i] = *z,
                None => missing += z.norm_sqr(),
            }
        }
        Ok((StateVector::new(Arc::new(Basis::Pair(pair.clone())), v)?, missing))
    }
}

/// Closed-form two-pair evolution under the interaction part of the swap
/// Hamiltonian, as the four-branch expression with `θ = Ω_σ N t`:
/// single-excitation branches oscillate as `e^{−iθ}(cos θ, −i sin θ)`, the
/// doubly excited branch as `e^{−2iθ}(cos 2θ |ψ⟩₄ − i sin 2θ |ψ⟩₅)`.
///
/// The doubly excited branch is the large-`N` form; for finite `N` the exact
/// dynamics differs (see [`pair_sector_frequencies`]).
pub fn analytic_pair_evolution<T: Real>(
    alpha1: Complex<T>,
    beta1: Complex<T>,
    alpha2: Complex<T>,
    beta2: Complex<T>,
    omega_sigma: T,
    atoms: usize,
    t: T,
) -> PairAmplitudes<T> {
    let theta = omega_sigma * T::count(atoms) * t;
    let two = T::lit(2.0);
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (two * theta).sin_cos();
    let p1 = cis(-theta);
    let p2 = cis(-two * theta);
    let zero = Complex::new(T::zero(), T::zero());
    PairAmplitudes([
        alpha1 * alpha2,
        p1 * (beta1 * alpha2 * re(c) - alpha1 * beta2 * im(s)),
        p1 * (alpha1 * beta2 * re(c) - beta1 * alpha2 * im(s)),
        p2 * beta1 * beta2 * re(c2),
        p2 * beta1 * beta2 * im(-s2),
        zero,
    ])
}

/// Exact oscillation frequencies of the swap Hamiltonian restricted to
/// symmetric states of two `N`-atom nodes: `(NΩ_σ, (2N−1)Ω_σ)` for the
/// |ψ⟩₂↔|ψ⟩₃ and |ψ⟩₄↔|ψ⟩₅ sectors, and the peak |ψ⟩₅ population
/// `4N(N−1)/(2N−1)²` reached from |ψ⟩₄.
pub fn pair_sector_frequencies<T: Real>(omega_sigma: T, atoms: usize) -> (T, T, T) {
    let n = T::count(atoms);
    let two = T::lit(2.0);
    let m = two * n - T::one();
    (n * omega_sigma, m * omega_sigma, T::lit(4.0) * n * (n - T::one()) / (m * m))
}

/// Product state `(α₁|0⟩ + β₁|1⟩)(α₂|0⟩ + β₂|1⟩)` on a two-node collective basis.
pub fn pair_product_state<T: Real>(
    pair: &PairStates,
    alpha1: Complex<T>,
    beta1: Complex<T>,
    alpha2: Complex<T>,
    beta2: Complex<T>,
) -> Result<StateVector<T>> {
    let b = pair.product();
    let mut v = DVector::zeros(b.dimension());
    for (i, j, z) in [(0, 0, alpha1 * alpha2), (1, 0, beta1 * alpha2), (0, 1, alpha1 * beta2), (1, 1, beta1 * beta2)] {
        v[b.index(&[i, j]).expect("single excitations exist")] = z;
    }
    StateVector::new(Arc::new(Basis::Product(b.clone())), v)
}

/// Two-node swap model of equal `N`-atom two-level nodes, in the frame that
/// removes the bare transition energy (so only the interaction part acts).
pub fn pair_swap_hamiltonian<T: Real>(pair: &PairStates, atoms: usize, omega_sigma: T) -> Result<HamiltonianMatrix<T>> {
    let nodes = vec![NodeSpec::two_level(atoms, T::zero(), T::one())?; 2];
    two_level_swap_hamiltonian(pair.product(), &nodes, omega_sigma, &Frame::Excitation(T::one()))
}

/// Closed-form single-excitation dynamics of two nodes with photon-dependent
/// Lamb shifts, for `c₂(0) = 1, c₃(0) = 0`.
///
/// The amplitudes obey `dc₂/dt = i B₂ c₂ − i V c₃`, `dc₃/dt = i B₃ c₃ − i V c₂`
/// with `V = √(N₁N₂) Ω_σ` and the brace coefficients
/// `B₂ = (N₁/2 − 1) ω̃₁ + (N₂/2) ω̃₂ − N₁Ω₁`, `B₃ = (N₁/2) ω̃₁ + (N₂/2 − 1) ω̃₂ − N₂Ω₂`.
/// In the Hamiltonian picture (`dc/dt = −iHc`) the block is `[[−B₂, V], [V, −B₃]]`,
/// which is what [`crate::hamiltonian::lamb_shift_hamiltonian`] produces with
/// level energies `∓ω_m/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockadeSolution<T: Real> {
    pub r: [T; 2],
    pub c: [T; 2],
    pub b2: T,
    pub b3: T,
    pub coupling: T,
    /// `E₂, E₃` of the photon-free case (bare frequencies).
    pub e2: T,
    pub e3: T,
    pub mismatch: T,
}

pub fn blockade_solution<T: Real>(rates: &EffectiveRates<T>, atoms: [usize; 2], photons: usize) -> BlockadeSolution<T> {
    let half = T::lit(0.5);
    let n1 = T::count(atoms[0]);
    let n2 = T::count(atoms[1]);
    let w = rates.dressed(photons);
    let b2 = (n1 * half - T::one()) * w[0] + n2 * half * w[1] - n1 * rates.omega[0];
    let b3 = n1 * half * w[0] + (n2 * half - T::one()) * w[1] - n2 * rates.omega[1];
    let e2 = (n1 * half - T::one()) * rates.bare[0] + n2 * half * rates.bare[1] - n1 * rates.omega[0];
    let e3 = n1 * half * rates.bare[0] + (n2 * half - T::one()) * rates.bare[1] - n2 * rates.omega[1];
    let v = (n1 * n2).sqrt() * rates.omega_sigma;
    let mismatch = rates.swap_mismatch(atoms, photons);
    let root = (mismatch * mismatch + T::lit(4.0) * v * v).sqrt();
    let s = b2 + b3;
    let r = [half * (s + root), half * (s - root)];
    let c1 = if root > T::zero() { -v / root } else { T::zero() };
    BlockadeSolution { r, c: [c1, -c1], b2, b3, coupling: v, e2, e3, mismatch }
}

impl<T: Real> BlockadeSolution<T> {
    pub fn c3(&self, t: T) -> Complex<T> {
        cis(self.r[0] * t) * self.c[0] + cis(self.r[1] * t) * self.c[1]
    }

    pub fn c2(&self, t: T) -> Complex<T> {
        if self.coupling == T::zero() {
            return cis(self.b2 * t);
        }
        (cis(self.r[0] * t) * ((self.b3 - self.r[0]) * self.c[0])
            + cis(self.r[1] * t) * ((self.b3 - self.r[1]) * self.c[1]))
            / self.coupling
    }

    /// Largest right-hand-side mismatch of the two amplitude equations at `t`,
    /// with derivatives taken by a five-point stencil, relative to the
    /// largest rate in the problem.
    pub fn residual(&self, t: T) -> T {
        let scale = self.r[0].abs().max(self.r[1].abs()).max(self.coupling.abs()).max(T::lit(1e-300));
        let h = T::lit(1e-3) / scale;
        let d = |f: &dyn Fn(T) -> Complex<T>| {
            (f(t - h - h) - f(t - h) * T::lit(8.0) + f(t + h) * T::lit(8.0) - f(t + h + h)) / (h * T::lit(12.0))
        };
        let dc2 = d(&|x| self.c2(x));
        let dc3 = d(&|x| self.c3(x));
        let i = Complex::new(T::zero(), T::one());
        let rhs2 = i * self.c2(t) * self.b2 - i * self.c3(t) * self.coupling;
        let rhs3 = i * self.c3(t) * self.b3 - i * self.c2(t) * self.coupling;
        (dc2 - rhs2).norm_sqr().sqrt().max((dc3 - rhs3).norm_sqr().sqrt()) / scale
    }

    /// `max_t |c₃|² = 4C₁²`
    pub fn max_transfer(&self) -> T {
        T::lit(4.0) * self.c[0] * self.c[0]
    }

    /// Time of full transfer in the resonant case, `π / (2√(N₁N₂)Ω_σ)`.
    pub fn transfer_time(&self) -> T {
        T::pi() / (T::lit(2.0) * self.coupling.abs())
    }
}

/// Collective states used by the transistor gate on a control + two-target
/// basis of three-level nodes.
pub struct TransistorStates {
    basis: CompositeBasis,
    atoms: [usize; 3],
}

impl TransistorStates {
    /// Control node with `control_atoms` atoms, two targets with `target_atoms` each.
    pub fn new(control_atoms: usize, target_atoms: usize) -> Result<Self> {
        let nodes = vec![
            NodeSpec::<f64>::three_level(control_atoms, [0.0, 1.0, 2.0])?,
            NodeSpec::<f64>::three_level(target_atoms, [0.0, 1.0, 2.0])?,
            NodeSpec::<f64>::three_level(target_atoms, [0.0, 1.0, 2.0])?,
        ];
        let basis = build_collective_basis(&nodes, &[2, 2, 2], None)?;
        Ok(Self { basis, atoms: [control_atoms, target_atoms, target_atoms] })
    }

    pub fn basis(&self) -> &CompositeBasis {
        &self.basis
    }

    /// Index of the product of node states given as `(n₂, n₃)` per node.
    pub fn index(&self, occupations: [(usize, usize); 3]) -> Option<usize> {
        let mut tuple = Vec::with_capacity(3);
        for (fi, (n2, n3)) in occupations.iter().enumerate() {
            let counts = LevelCounts([self.atoms[fi].checked_sub(n2 + n3)?, *n2, *n3]);
            match &self.basis.factors()[fi] {
                crate::basis::Factor::Collective { states, .. } => {
                    tuple.push(states.iter().position(|s| *s == counts)?)
                }
                _ => return None,
            }
        }
        self.basis.index(&tuple)
    }
}

/// First time the target population is fully parked, `π / (2√N Ω)`.
pub fn transistor_transfer_time<T: Real>(control_atoms: usize, omega: T) -> T {
    T::frac_pi_2() / (T::count(control_atoms).sqrt() * omega.abs())
}

/// Closed-form transistor dynamics from `|1⟩^(A) (α|0,1⟩ + β|1,0⟩)`:
/// `cos(√N Ω t)` on the initial branch and `−i sin(√N Ω t)` on
/// `|0⟩^(A)(α|0,2⟩ + β|2,0⟩)`, where |2⟩ of a target holds one atom on level 3.
pub fn transistor_evolution<T: Real>(
    states: &TransistorStates,
    alpha: Complex<T>,
    beta: Complex<T>,
    omega: T,
    t: T,
) -> Result<StateVector<T>> {
    let n = T::count(states.atoms[0]);
    let (s, c) = (n.sqrt() * omega * t).sin_cos();
    let idx = |o| {
        states.index(o).ok_or_else(|| Error::InvalidInput("transistor state outside the basis".into()))
    };
    let mut v = DVector::zeros(states.basis.dimension());
    v[idx([(1, 0), (0, 0), (1, 0)])?] = alpha * c;
    v[idx([(1, 0), (1, 0), (0, 0)])?] = beta * c;
    v[idx([(0, 0), (0, 0), (0, 1)])?] = alpha * im(-s);
    v[idx([(0, 0), (0, 1), (0, 0)])?] = beta * im(-s);
    StateVector::new(Arc::new(Basis::Product(states.basis.clone())), v)
}

/// Inputs of the effective-model error study.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorStudy<T: Real> {
    /// Atoms per node (both nodes).
    pub atoms: usize,
    /// `|g₂₁|`, identical for both nodes.
    pub coupling: T,
    /// Detunings `Δ` to sample.
    pub detunings: Vec<T>,
    /// Number of swap periods to simulate.
    pub periods: usize,
    /// Time points per run (default 200).
    pub grid_points: usize,
    /// Photon truncation of the microscopic model.
    pub n_max: usize,
}

impl<T: Real> ErrorStudy<T> {
    pub fn new(atoms: usize, coupling: T, detunings: Vec<T>) -> Self {
        Self { atoms, coupling, detunings, periods: 1, grid_points: 200, n_max: 2 }
    }
}

/// One row of an [`ErrorReport`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSample<T: Real> {
    pub detuning: T,
    pub max_infidelity: T,
    pub max_leakage: T,
    pub period: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport<T: Real> {
    pub samples: Vec<ErrorSample<T>>,
    pub metric: &'static str,
}

impl<T: Real> ErrorReport<T> {
    /// True when each sample's infidelity is at most `(1 + jitter)` times
    /// the previous one. Samples are taken in the order given, so sort by
    /// increasing `|Δ|` first.
    pub fn decreasing_within(&self, jitter: T) -> bool {
        self.worst_rise() <= jitter
    }

    /// Largest relative increase `I_{k+1}/I_k − 1` of the infidelity between
    /// successive samples; `−1` when there is nothing to compare.
    pub fn worst_rise(&self) -> T {
        self.samples.windows(2).fold(-T::one(), |m, w| {
            let (a, b) = (w[0].max_infidelity, w[1].max_infidelity);
            let rise = if a > T::zero() {
                b / a - T::one()
            } else if b > T::zero() {
                T::lit(f64::INFINITY)
            } else {
                -T::one()
            };
            m.max(rise)
        })
    }
}

/// Text describing the infidelity metric, stored with every report.
pub const ERROR_METRIC: &str = "max over the time grid of 1 - |<psi_eff|P psi_full>|^2 / ||P psi_full||^2, \
P = projection onto zero photons and the symmetric subspace; leakage = 1 - ||P psi_full||^2";

/// Runs the microscopic and effective models side by side for every detuning.
pub fn effective_model_error<T: Real>(study: &ErrorStudy<T>) -> Result<ErrorReport<T>> {
    let samples = study
        .detunings
        .iter()
        .map(|&d| effective_model_error_point(study, d))
        .collect::<Result<_>>()?;
    Ok(ErrorReport { samples, metric: ERROR_METRIC })
}

/// One detuning of the error study: two `N`-atom two-level nodes, one mode
/// detuned by `Δ` below the transition, the excitation starting on node 1.
pub fn effective_model_error_point<T: Real>(study: &ErrorStudy<T>, detuning: T) -> Result<ErrorSample<T>> {
    let n = study.atoms;
    // Atomic frequency chosen so the mode frequency `w − Δ` stays positive.
    let w = T::lit(2.0) * detuning.abs() + T::one();
    let nodes = vec![NodeSpec::two_level(n, T::zero(), w)?; 2];
    let modes = FockFactor::new(vec![Mode::new(Transition::Lower, w - detuning, study.n_max)])?;
    let g = Complex::new(study.coupling, T::zero());
    let model = CavityModel::new(nodes.clone(), modes.clone(), CouplingSet::uniform(2, Transition::Lower, g))?;
    let micro = build_microscopic_basis(&nodes, Some(&modes))?;
    let full = microscopic_hamiltonian(&model, &micro, &Frame::Excitation(w))?;

    let collective = build_collective_basis(&nodes, &[2, 2], None)?;
    let omega_sigma = study.coupling * study.coupling / detuning;
    let eff = two_level_swap_hamiltonian(&collective, &nodes, omega_sigma, &Frame::Excitation(w))?;
    let period = if omega_sigma == T::zero() {
        // No exchange at all: any window works, pick unit time.
        T::one()
    } else {
        T::pi() / (T::count(n) * omega_sigma.abs())
    };

    // Collective |1,0⟩ with zero photons, expanded into the microscopic space.
    let coll_with_mode = build_collective_basis(&nodes, &[2, 2], Some(&modes))?;
    let embed = expansion_matrix(&coll_with_mode, &micro, &nodes, &WaveVectors::zero())?;
    let start_coll = coll_with_mode.index(&[1, 0, 0]).expect("single excitation");
    let psi_full0 = StateVector::new(
        Arc::new(Basis::Product(micro.clone())),
        embed.column(start_coll).into_owned(),
    )?;
    let psi_eff0 = StateVector::from_tuple(Arc::new(Basis::Product(collective.clone())), &[1, 0])?;

    // Projection onto zero photons: collective-with-mode columns with n = 0 map
    // one-to-one onto the photon-free collective basis.
    let zero_photon: Vec<usize> =
        (0..coll_with_mode.dimension()).filter(|&i| coll_with_mode.tuple(i)[2] == 0).collect();
    let p: CMatrix<T> = {
        let mut p = CMatrix::zeros(collective.dimension(), micro.dimension());
        for (row, &col) in zero_photon.iter().enumerate() {
            let v = embed.column(col);
            for k in 0..micro.dimension() {
                p[(row, k)] = v[k].conj();
            }
        }
        p
    };

    let prop_full = Propagator::new(&full)?;
    let prop_eff = Propagator::new(&eff)?;
    let total = period * T::count(study.periods.max(1));
    let mut worst = T::zero();
    let mut worst_leak = T::zero();
    for t in time_grid(total, study.grid_points) {
        let f = prop_full.evolve(&psi_full0, t)?;
        let e = prop_eff.evolve(&psi_eff0, t)?;
        let projected: CVector<T> = &p * f.amplitudes();
        let kept = norm(&projected);
        let leak = (T::one() - kept * kept).max(T::zero());
        let overlap = inner(e.amplitudes(), &projected).norm_sqr();
        let infidelity = if kept > T::zero() {
            (T::one() - overlap / (kept * kept)).max(T::zero())
        } else {
            T::one()
        };
        worst = worst.max(infidelity);
        worst_leak = worst_leak.max(leak);
    }
    Ok(ErrorSample { detuning, max_infidelity: worst, max_leakage: worst_leak, period })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_two_node_collective_basis;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn rabi_half_period() {
        let p = build_two_node_collective_basis(1, 1).unwrap();
        let b = Arc::new(Basis::Pair(p));
        let mut m = CMatrix::<f64>::zeros(4, 4);
        m[(1, 2)] = c(0.7);
        m[(2, 1)] = c(0.7);
        let h = HamiltonianMatrix::new(m, b.clone(), "σx").unwrap();
        let psi = StateVector::basis_state(b, 1).unwrap();
        let out = propagate(&h, &psi, std::f64::consts::PI / (2.0 * 0.7)).unwrap();
        assert!((out.amplitude(2) - Complex::new(0.0, -1.0)).norm() < 1e-12);
        let same = propagate(&h, &psi, 0.0).unwrap();
        assert!((same.amplitude(1) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn first_maximum_of_sin_squared() {
        let t = first_maximum(|t: f64| (1.3 * t).sin().powi(2), 0.0, 5.0, 100, 0.0).unwrap();
        assert!((t - std::f64::consts::PI / 2.6).abs() < 1e-8);
        assert!(first_maximum(|_t: f64| 0.0, 0.0, 1.0, 10, 1e-12).is_none());
    }

    #[test]
    fn analytic_pair_at_quarter_period() {
        let a = analytic_pair_evolution(c(0.0), c(1.0), c(1.0), c(0.0), 0.3, 4, std::f64::consts::PI / (2.0 * 0.3 * 4.0));
        assert!((a.get(3) - c(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn blockade_norm_is_conserved() {
        let rates = EffectiveRates::from_couplings([c(0.02), c(0.3)], [1.0, 1.0], [1.0, 1.1]).unwrap();
        let sol = blockade_solution(&rates, [2, 3], 1);
        for k in 0..50 {
            let t = k as f64 * 3.7;
            assert!((sol.c2(t).norm_sqr() + sol.c3(t).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
