//! Node-level circuits over encoded qubits and single ancilla nodes.
//!
//! The register stores amplitudes over node occupation bitmasks, so the
//! intermediate `|00⟩`/`|11⟩` pair states produced by node-controlled swaps
//! are represented exactly. Qubit `q` occupies nodes `2q` (`a`) and `2q + 1`
//! (`b`); ancilla `i` is node `2n + i`.
//!
//! # Text format
//!
//! One operation per line, `KIND(params) controls -> targets`. Blank lines and
//! lines starting with `#` are ignored. Addresses are `q<i>.a`, `q<i>.b` and
//! `anc<i>`.
//!
//! | kind | params | controls | targets |
//! |---|---|---|---|
//! | `ET(θ)` | angle | none | `x y` |
//! | `PHASE(χ)` | angle | none | `x y` (pair) or `x` (single node) |
//! | `CET(θ)` | angle | `c` | `x y` |
//! | `PCET`, `PCET_DAG` | none | `c` | `x y` |
//! | `CSWAP`, `CSWAP_DAG` | none | `c` | `y z` |
//! | `CU(u00re,u00im,u01re,u01im,u10re,u10im,u11re,u11im)` | 2×2 row-major | `c` | `x y` |
//! | `TOFFOLI` | none | `c1 c2` | `x y anc` |
//!
//! `CSWAP c -> y z` moves the excitation of `y` into the empty node `z` when
//! `c` is occupied and then applies `PHASE(π/2)` to `z`; with `y` the `a` node
//! of a logical input this is the AND of `c` and `y` stored in `z`.
//! `TOFFOLI c1 c2 -> x y anc` expands to `CSWAP c1 -> c2 anc`,
//! `PCET anc -> x y`, `CSWAP_DAG c1 -> c2 anc`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gates::{
    equivalence_up_to_global_phase, et_matrix, multi_controlled, ry_matrix, synthesize_rotation,
    unitarity_defect, EquivalenceResult, PairGate,
};
use crate::scalar::{cis, dagger, re, CMatrix, CVector, Real};

/// Leakage above which [`apply`] gives up.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
/// Ancilla population tolerated before a swap into it.
pub const ANCILLA_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Address {
    /// `q<i>.a` (`second = false`) or `q<i>.b`.
    Half { qubit: usize, second: bool },
    Ancilla(usize),
}

impl Address {
    pub fn a(qubit: usize) -> Self {
        Address::Half { qubit, second: false }
    }

    pub fn b(qubit: usize) -> Self {
        Address::Half { qubit, second: true }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Address::Half { qubit, second } => write!(f, "q{qubit}.{}", if second { 'b' } else { 'a' }),
            Address::Ancilla(i) => write!(f, "anc{i}"),
        }
    }
}

impl FromStr for Address {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::AddressError(format!("cannot parse address `{s}`"));
        if let Some(rest) = s.strip_prefix("anc") {
            return rest.parse().map(Address::Ancilla).map_err(|_| bad());
        }
        let rest = s.strip_prefix('q').ok_or_else(bad)?;
        let (q, half) = rest.split_once('.').ok_or_else(bad)?;
        let qubit = q.parse().map_err(|_| bad())?;
        match half {
            "a" => Ok(Address::a(qubit)),
            "b" => Ok(Address::b(qubit)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op<T: Real> {
    Et { theta: T, x: Address, y: Address },
    PairPhase { chi: T, x: Address, y: Address },
    NodePhase { chi: T, x: Address },
    Cet { theta: T, c: Address, x: Address, y: Address },
    Pcet { c: Address, x: Address, y: Address, adjoint: bool },
    Cswap { c: Address, y: Address, z: Address, adjoint: bool },
    Cu { u: CMatrix<T>, c: Address, x: Address, y: Address },
    Toffoli { c1: Address, c2: Address, x: Address, y: Address, anc: Address },
}

impl<T: Real> Op<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Op::Et { .. } => "ET",
            Op::PairPhase { .. } | Op::NodePhase { .. } => "PHASE",
            Op::Cet { .. } => "CET",
            Op::Pcet { adjoint: false, .. } => "PCET",
            Op::Pcet { adjoint: true, .. } => "PCET_DAG",
            Op::Cswap { adjoint: false, .. } => "CSWAP",
            Op::Cswap { adjoint: true, .. } => "CSWAP_DAG",
            Op::Cu { .. } => "CU",
            Op::Toffoli { .. } => "TOFFOLI",
        }
    }

    /// Node-controlled excitation transfers, counted as one physical two-qubit gate each.
    pub fn is_pcet_class(&self) -> bool {
        matches!(self, Op::Pcet { .. } | Op::Cswap { .. })
    }

    fn addresses(&self) -> Vec<Address> {
        match *self {
            Op::Et { x, y, .. } | Op::PairPhase { x, y, .. } => vec![x, y],
            Op::NodePhase { x, .. } => vec![x],
            Op::Cet { c, x, y, .. } | Op::Pcet { c, x, y, .. } | Op::Cu { c, x, y, .. } => vec![c, x, y],
            Op::Cswap { c, y, z, .. } => vec![c, y, z],
            Op::Toffoli { c1, c2, x, y, anc } => vec![c1, c2, x, y, anc],
        }
    }

    pub fn inverse(&self) -> Op<T> {
        match self.clone() {
            Op::Et { theta, x, y } => Op::Et { theta: -theta, x, y },
            Op::PairPhase { chi, x, y } => Op::PairPhase { chi: -chi, x, y },
            Op::NodePhase { chi, x } => Op::NodePhase { chi: -chi, x },
            Op::Cet { theta, c, x, y } => Op::Cet { theta: -theta, c, x, y },
            Op::Pcet { c, x, y, adjoint } => Op::Pcet { c, x, y, adjoint: !adjoint },
            Op::Cswap { c, y, z, adjoint } => Op::Cswap { c, y, z, adjoint: !adjoint },
            Op::Cu { u, c, x, y } => Op::Cu { u: dagger(&u), c, x, y },
            // Toffoli is an involution up to a global phase.
            op @ Op::Toffoli { .. } => op,
        }
    }

    /// Rewrites composite operations into node-level primitives.
    pub fn expand(&self) -> Vec<Op<T>> {
        match *self {
            Op::Toffoli { c1, c2, x, y, anc } => vec![
                Op::Cswap { c: c1, y: c2, z: anc, adjoint: false },
                Op::Pcet { c: anc, x, y, adjoint: false },
                Op::Cswap { c: c1, y: c2, z: anc, adjoint: true },
            ],
            _ => vec![self.clone()],
        }
    }
}

fn fmt_f64(x: f64) -> String {
    // `{:?}` gives the shortest round-trip representation.
    format!("{x:?}")
}

impl<T: Real> fmt::Display for Op<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |a: &[Address]| a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        match self {
            Op::Et { theta, x, y } => write!(f, "ET({}) -> {x} {y}", fmt_f64(theta.to_f64())),
            Op::PairPhase { chi, x, y } => write!(f, "PHASE({}) -> {x} {y}", fmt_f64(chi.to_f64())),
            Op::NodePhase { chi, x } => write!(f, "PHASE({}) -> {x}", fmt_f64(chi.to_f64())),
            Op::Cet { theta, c, x, y } => write!(f, "CET({}) {c} -> {x} {y}", fmt_f64(theta.to_f64())),
            Op::Pcet { c, x, y, .. } => write!(f, "{} {c} -> {x} {y}", self.kind()),
            Op::Cswap { c, y, z, .. } => write!(f, "{} {c} -> {y} {z}", self.kind()),
            Op::Cu { u, c, x, y } => {
                let p: Vec<String> = (0..2)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .flat_map(|(i, j)| [u[(i, j)].re.to_f64(), u[(i, j)].im.to_f64()])
                    .map(fmt_f64)
                    .collect();
                write!(f, "CU({}) {c} -> {x} {y}", p.join(","))
            }
            Op::Toffoli { c1, c2, x, y, anc } => write!(f, "TOFFOLI {} -> {}", list(&[*c1, *c2]), list(&[*x, *y, *anc])),
        }
    }
}

/// An ordered operation list over a fixed register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T: Real> {
    pub qubits: usize,
    pub ancillas: usize,
    pub ops: Vec<Op<T>>,
}

/// Operation tallies of a circuit, before and after expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct GateCounts {
    pub toffoli: usize,
    pub pcet_class: usize,
    pub controlled_u: usize,
    pub single_qubit: usize,
    pub ancilla_nodes: usize,
}

impl<T: Real> Circuit<T> {
    pub fn new(qubits: usize, ancillas: usize) -> Self {
        Self { qubits, ancillas, ops: Vec::new() }
    }

    pub fn push(&mut self, op: Op<T>) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn extend(&mut self, ops: impl IntoIterator<Item = Op<T>>) -> &mut Self {
        self.ops.extend(ops);
        self
    }

    pub fn inverse(&self) -> Self {
        Self { qubits: self.qubits, ancillas: self.ancillas, ops: self.ops.iter().rev().map(Op::inverse).collect() }
    }

    pub fn expanded(&self) -> Self {
        Self { qubits: self.qubits, ancillas: self.ancillas, ops: self.ops.iter().flat_map(Op::expand).collect() }
    }

    /// Counts on the circuit as emitted; `pcet_class` includes the transfers
    /// hidden inside Toffoli blocks.
    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts { ancilla_nodes: self.ancillas, ..Default::default() };
        for op in &self.ops {
            match op {
                Op::Toffoli { .. } => c.toffoli += 1,
                Op::Cu { .. } => c.controlled_u += 1,
                Op::Et { .. } | Op::PairPhase { .. } | Op::NodePhase { .. } => c.single_qubit += 1,
                _ => {}
            }
        }
        c.pcet_class = self.expanded().ops.iter().filter(|o| o.is_pcet_class()).count();
        c
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# qubits {} ancillas {}\n", self.qubits, self.ancillas);
        for op in &self.ops {
            s.push_str(&op.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the text format; the layout is the smallest one covering every address
    /// unless a `# qubits N ancillas M` header says otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ops = Vec::new();
        let mut header = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let w: Vec<&str> = rest.split_whitespace().collect();
                if let ["qubits", q, "ancillas", a] = w.as_slice() {
                    if let (Ok(q), Ok(a)) = (q.parse(), a.parse()) {
                        header = Some((q, a));
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            ops.push(parse_op(line).map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?);
        }
        let (mut q, mut a) = (0, 0);
        for op in &ops {
            for addr in op.addresses() {
                match addr {
                    Address::Half { qubit, .. } => q = q.max(qubit + 1),
                    Address::Ancilla(i) => a = a.max(i + 1),
                }
            }
        }
        let (qubits, ancillas) = header.unwrap_or((q, a));
        let c = Circuit { qubits, ancillas, ops };
        c.validate()?;
        Ok(c)
    }

    /// Checks that every address fits the layout and operands are distinct.
    pub fn validate(&self) -> Result<()> {
        for op in &self.ops {
            let addrs = op.addresses();
            let mut nodes = Vec::with_capacity(addrs.len());
            for a in &addrs {
                nodes.push(node_index(*a, self.qubits, self.ancillas)?);
            }
            let mut sorted = nodes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != nodes.len() {
                return Err(Error::AddressError(format!("repeated node in `{op}`")));
            }
            if let Op::Cu { u, .. } = op {
                if u.shape() != (2, 2) || unitarity_defect(u) > T::lit(1e-9) {
                    return Err(Error::InvalidInput(format!("CU payload is not a 2x2 unitary in `{op}`")));
                }
            }
        }
        Ok(())
    }
}

fn parse_op<T: Real>(line: &str) -> Result<Op<T>> {
    let (lhs, rhs) = line.split_once("->").ok_or_else(|| Error::InvalidInput(format!("missing `->` in `{line}`")))?;
    let lhs = lhs.trim();
    let (head, controls) = match lhs.find(')') {
        Some(p) => (&lhs[..=p], &lhs[p + 1..]),
        None => lhs.split_once(char::is_whitespace).unwrap_or((lhs, "")),
    };
    let (kind, params) = match head.split_once('(') {
        Some((k, p)) => {
            let p = p.strip_suffix(')').ok_or_else(|| Error::InvalidInput(format!("unclosed `(` in `{line}`")))?;
            let vals = p
                .split(',')
                .map(|s| s.trim().parse::<f64>().map(T::lit))
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|e| Error::InvalidInput(format!("bad parameter in `{line}`: {e}")))?;
            (k.trim(), vals)
        }
        None => (head.trim(), Vec::new()),
    };
    let addrs = |s: &str| s.split_whitespace().map(Address::from_str).collect::<Result<Vec<_>>>();
    let c = addrs(controls)?;
    let t = addrs(rhs)?;
    let arity = |np: usize, nc: usize, nt: &[usize]| {
        if params.len() != np || c.len() != nc || !nt.contains(&t.len()) {
            Err(Error::InvalidInput(format!(
                "`{kind}` takes {np} parameter(s), {nc} control(s) and {nt:?} target(s): `{line}`"
            )))
        } else {
            Ok(())
        }
    };
    Ok(match kind {
        "ET" => {
            arity(1, 0, &[2])?;
            Op::Et { theta: params[0], x: t[0], y: t[1] }
        }
        "PHASE" => {
            arity(1, 0, &[1, 2])?;
            if t.len() == 1 {
                Op::NodePhase { chi: params[0], x: t[0] }
            } else {
                Op::PairPhase { chi: params[0], x: t[0], y: t[1] }
            }
        }
        "CET" => {
            arity(1, 1, &[2])?;
            Op::Cet { theta: params[0], c: c[0], x: t[0], y: t[1] }
        }
        "PCET" | "PCET_DAG" => {
            arity(0, 1, &[2])?;
            Op::Pcet { c: c[0], x: t[0], y: t[1], adjoint: kind == "PCET_DAG" }
        }
        "CSWAP" | "CSWAP_DAG" => {
            arity(0, 1, &[2])?;
            Op::Cswap { c: c[0], y: t[0], z: t[1], adjoint: kind == "CSWAP_DAG" }
        }
        "CU" => {
            arity(8, 1, &[2])?;
            let z: Vec<Complex<T>> = params.chunks(2).map(|p| Complex::new(p[0], p[1])).collect();
            Op::Cu { u: CMatrix::from_row_slice(2, 2, &z), c: c[0], x: t[0], y: t[1] }
        }
        "TOFFOLI" => {
            arity(0, 2, &[3])?;
            Op::Toffoli { c1: c[0], c2: c[1], x: t[0], y: t[1], anc: t[2] }
        }
        other => return Err(Error::InvalidInput(format!("unknown operation `{other}`"))),
    })
}

fn node_index(a: Address, qubits: usize, ancillas: usize) -> Result<usize> {
    match a {
        Address::Half { qubit, second } if qubit < qubits => Ok(2 * qubit + second as usize),
        Address::Ancilla(i) if i < ancillas => Ok(2 * qubits + i),
        _ => Err(Error::AddressError(format!("{a} is outside {qubits} qubit(s) and {ancillas} ancilla(s)"))),
    }
}

/// Sparse state over node occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalRegister<T: Real> {
    qubits: usize,
    ancillas: usize,
    amps: BTreeMap<u64, Complex<T>>,
}

impl<T: Real> LogicalRegister<T> {
    /// All qubits `|0_L⟩`, all ancillas empty.
    pub fn new(qubits: usize, ancillas: usize) -> Result<Self> {
        Self::from_bits(&vec![false; qubits], ancillas)
    }

    pub fn from_bits(bits: &[bool], ancillas: usize) -> Result<Self> {
        if 2 * bits.len() + ancillas > 64 {
            return Err(Error::InvalidInput("at most 64 nodes".into()));
        }
        let mut amps = BTreeMap::new();
        amps.insert(crate::gates::encode_mask(bits), re(T::one()));
        Ok(Self { qubits: bits.len(), ancillas, amps })
    }

    /// Encodes a dense logical vector (first qubit most significant).
    pub fn from_logical(v: &CVector<T>, qubits: usize, ancillas: usize) -> Result<Self> {
        if v.len() != 1usize << qubits {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for {qubits} qubits", v.len())));
        }
        let mut reg = Self::new(qubits, ancillas)?;
        reg.amps.clear();
        for (x, z) in v.iter().enumerate() {
            if z.norm_sqr() > T::zero() {
                reg.amps.insert(crate::gates::encode_mask(&bits_of(x, qubits)), *z);
            }
        }
        Ok(reg)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn amplitude(&self, mask: u64) -> Complex<T> {
        self.amps.get(&mask).copied().unwrap_or_else(|| re(T::zero()))
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (u64, Complex<T>)> + '_ {
        self.amps.iter().map(|(&m, &z)| (m, z))
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.values().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn node(&self, a: Address) -> Result<usize> {
        node_index(a, self.qubits, self.ancillas)
    }

    /// Probability that the node is occupied.
    pub fn occupation(&self, a: Address) -> Result<T> {
        let bit = 1u64 << self.node(a)?;
        Ok(self.amps.iter().filter(|(m, _)| *m & bit != 0).fold(T::zero(), |acc, (_, z)| acc + z.norm_sqr()))
    }

    /// Largest occupation over all ancilla nodes.
    pub fn ancilla_residual(&self) -> T {
        (0..self.ancillas)
            .map(|i| self.occupation(Address::Ancilla(i)).expect("ancilla in range"))
            .fold(T::zero(), |acc, p| if p > acc { p } else { acc })
    }

    /// Logical amplitudes with every ancilla empty, plus the norm² outside that subspace.
    pub fn decode(&self) -> (CVector<T>, T) {
        let mut v = DVector::from_element(1usize << self.qubits, re(T::zero()));
        let mut kept = T::zero();
        for x in 0..v.len() {
            let z = self.amplitude(crate::gates::encode_mask(&bits_of(x, self.qubits)));
            kept += z.norm_sqr();
            v[x] = z;
        }
        (v, (self.norm_sqr() - kept).max(T::zero()))
    }

    fn pair_rotation(&mut self, u: &CMatrix<T>, c: Option<usize>, x: usize, y: usize) -> T {
        let (bx, by) = (1u64 << x, 1u64 << y);
        let mut leak = T::zero();
        let mut out: BTreeMap<u64, Complex<T>> = BTreeMap::new();
        for (&m, &z) in &self.amps {
            let active = c.is_none_or(|c| m & (1 << c) != 0);
            let (nx, ny) = (m & bx != 0, m & by != 0);
            if !active || nx == ny {
                if active && nx {
                    leak += z.norm_sqr();
                }
                *out.entry(m).or_insert_with(|| re(T::zero())) += z;
                continue;
            }
            let rest = m & !(bx | by);
            let col = nx as usize;
            for (row, bits) in [(0, by), (1, bx)] {
                let w = u[(row, col)];
                if w.norm_sqr() > T::zero() {
                    *out.entry(rest | bits).or_insert_with(|| re(T::zero())) += w * z;
                }
            }
        }
        out.retain(|_, z| z.norm_sqr() > T::zero());
        self.amps = out;
        leak
    }

    fn phase_by(&mut self, f: impl Fn(u64) -> T) {
        for (m, z) in self.amps.iter_mut() {
            *z *= cis(f(*m));
        }
    }

    fn node_phase(&mut self, x: usize, chi: T) {
        let h = chi / T::lit(2.0);
        self.phase_by(|m| if m & (1 << x) != 0 { h } else { -h });
    }

    /// Applies one operation in place.
    pub fn apply_op(&mut self, op: &Op<T>) -> Result<()> {
        let n = |a: Address| self.node(a);
        let limit = T::lit(LEAKAGE_LIMIT);
        let check = |leak: T| if leak > limit { Err(Error::LeakageError(leak.to_f64())) } else { Ok(()) };
        match op {
            Op::Et { theta, x, y } => {
                let (x, y) = (n(*x)?, n(*y)?);
                check(self.pair_rotation(&et_matrix(*theta), None, x, y))
            }
            Op::PairPhase { chi, x, y } => {
                let (x, y) = (n(*x)?, n(*y)?);
                let h = *chi / T::lit(2.0);
                self.phase_by(|m| {
                    let d = ((m >> x) & 1) as i32 - ((m >> y) & 1) as i32;
                    h * T::lit(d as f64)
                });
                Ok(())
            }
            Op::NodePhase { chi, x } => {
                let x = n(*x)?;
                self.node_phase(x, *chi);
                Ok(())
            }
            Op::Cet { theta, c, x, y } => {
                let (c, x, y) = (n(*c)?, n(*x)?, n(*y)?);
                check(self.pair_rotation(&et_matrix(*theta), Some(c), x, y))
            }
            Op::Pcet { c, x, y, adjoint } => {
                let (c, x, y) = (n(*c)?, n(*x)?, n(*y)?);
                let q = T::frac_pi_2();
                if *adjoint {
                    self.node_phase(c, -q);
                    check(self.pair_rotation(&et_matrix(-T::pi()), Some(c), x, y))
                } else {
                    check(self.pair_rotation(&et_matrix(T::pi()), Some(c), x, y))?;
                    self.node_phase(c, q);
                    Ok(())
                }
            }
            Op::Cswap { c, y, z, adjoint } => {
                let (zi, c, y) = (n(*z)?, n(*c)?, n(*y)?);
                let q = T::frac_pi_2();
                if *adjoint {
                    self.node_phase(zi, -q);
                    check(self.pair_rotation(&et_matrix(-T::pi()), Some(c), y, zi))
                } else {
                    let p = self.occupation(*z)?;
                    if p > T::lit(ANCILLA_TOLERANCE) {
                        return Err(Error::AncillaNotGround { node: zi, population: 1.0 - p.to_f64() });
                    }
                    check(self.pair_rotation(&et_matrix(T::pi()), Some(c), y, zi))?;
                    self.node_phase(zi, q);
                    Ok(())
                }
            }
            Op::Cu { u, c, x, y } => {
                let (c, x, y) = (n(*c)?, n(*x)?, n(*y)?);
                check(self.pair_rotation(u, Some(c), x, y))
            }
            Op::Toffoli { .. } => {
                for p in op.expand() {
                    self.apply_op(&p)?;
                }
                Ok(())
            }
        }
    }
}

fn bits_of(x: usize, n: usize) -> Vec<bool> {
    (0..n).map(|q| x >> (n - 1 - q) & 1 == 1).collect()
}

/// Applies the circuit left to right.
pub fn apply<T: Real>(register: &LogicalRegister<T>, circuit: &Circuit<T>) -> Result<LogicalRegister<T>> {
    if register.qubits != circuit.qubits || register.ancillas != circuit.ancillas {
        return Err(Error::AddressError(format!(
            "circuit layout ({}, {}) does not match register ({}, {})",
            circuit.qubits, circuit.ancillas, register.qubits, register.ancillas
        )));
    }
    let mut r = register.clone();
    for op in &circuit.ops {
        r.apply_op(op)?;
    }
    Ok(r)
}

/// `ET`/`PHASE` primitives implementing a single-qubit unitary on qubit `q`.
pub fn single_qubit_ops<T: Real>(u: &CMatrix<T>, q: usize) -> Result<Vec<Op<T>>> {
    let angles = synthesize_rotation(u)?;
    Ok(angles
        .sequence()
        .into_iter()
        .map(|g| match g {
            PairGate::Et(theta) => Op::Et { theta, x: Address::a(q), y: Address::b(q) },
            PairGate::Phase(chi) => Op::PairPhase { chi, x: Address::a(q), y: Address::b(q) },
        })
        .collect())
}

/// Logical CNOT (up to global phase) between two encoded qubits.
pub fn logical_cnot<T: Real>(control: usize, target: usize) -> Op<T> {
    Op::Pcet { c: Address::a(control), x: Address::a(target), y: Address::b(target), adjoint: false }
}

/// Stores `control AND input` in the empty node `ancilla`; on the `11` branch
/// the input pair is left as `|00⟩`.
pub fn and_gate<T: Real>(control: usize, input: usize, ancilla: Address) -> Vec<Op<T>> {
    vec![Op::Cswap { c: Address::a(control), y: Address::a(input), z: ancilla, adjoint: false }]
}

/// Toffoli from three node-controlled transfers and one ancilla node.
pub fn encoded_toffoli<T: Real>(c1: usize, c2: usize, target: usize, ancilla: Address) -> Op<T> {
    Op::Toffoli { c1: Address::a(c1), c2: Address::a(c2), x: Address::a(target), y: Address::b(target), anc: ancilla }
}

/// Toffoli up to relative phases from four `Ry(±π/4)` rotations and three CNOTs.
pub fn standard_toffoli_upto_phase<T: Real>() -> Result<Circuit<T>> {
    let quarter = T::frac_pi_4();
    let mut c = Circuit::new(3, 0);
    let ry = |s: T| single_qubit_ops(&ry_matrix(s * quarter), 2);
    c.extend(ry(T::one())?);
    c.push(logical_cnot(1, 2));
    c.extend(ry(T::one())?);
    c.push(logical_cnot(0, 2));
    c.extend(ry(-T::one())?);
    c.push(logical_cnot(1, 2));
    c.extend(ry(-T::one())?);
    Ok(c)
}

/// `C^t(U)` through a chain of encoded Toffolis into `t − 1` work qubits.
///
/// Layout: controls `0..t`, target `t`, work qubits `t + 1..2t`, one ancilla
/// node reused by every Toffoli.
pub fn controlled_power_standard<T: Real>(t: usize, u: &CMatrix<T>) -> Result<Circuit<T>> {
    check_controls(t, u)?;
    let target = t;
    let work = |i: usize| t + 1 + i;
    let anc = Address::Ancilla(0);
    let mut compute = vec![encoded_toffoli(0, 1, work(0), anc)];
    for i in 1..t - 1 {
        compute.push(encoded_toffoli(work(i - 1), i + 1, work(i), anc));
    }
    let mut c = Circuit::new(2 * t, 1);
    c.extend(compute.iter().cloned());
    c.push(Op::Cu { u: u.clone(), c: Address::a(work(t - 2)), x: Address::a(target), y: Address::b(target) });
    c.extend(compute.iter().rev().cloned());
    Ok(c)
}

/// `C^t(U)` through a balanced tree of node swaps into `t − 1` ancilla nodes.
///
/// Layout: controls `0..t`, target `t`, ancillas `0..t − 1`.
pub fn controlled_power_improved<T: Real>(t: usize, u: &CMatrix<T>) -> Result<Circuit<T>> {
    check_controls(t, u)?;
    let target = t;
    let mut compute: Vec<Op<T>> = Vec::new();
    let mut level: Vec<Address> = (0..t).map(Address::a).collect();
    let mut next_anc = 0;
    while level.len() > 1 {
        let mut merged = Vec::with_capacity(level.len().div_ceil(2));
        for chunk in level.chunks(2) {
            if let [c, y] = *chunk {
                let z = Address::Ancilla(next_anc);
                next_anc += 1;
                compute.push(Op::Cswap { c, y, z, adjoint: false });
                merged.push(z);
            } else {
                merged.push(chunk[0]);
            }
        }
        level = merged;
    }
    let mut c = Circuit::new(t + 1, t - 1);
    c.extend(compute.iter().cloned());
    c.push(Op::Cu { u: u.clone(), c: level[0], x: Address::a(target), y: Address::b(target) });
    c.extend(compute.iter().rev().map(Op::inverse));
    Ok(c)
}

fn check_controls<T: Real>(t: usize, u: &CMatrix<T>) -> Result<()> {
    if t < 2 {
        return Err(Error::InvalidInput(format!("need at least two controls, got {t}")));
    }
    if u.shape() != (2, 2) || unitarity_defect(u) > T::lit(1e-9) {
        return Err(Error::InvalidInput("U must be a 2x2 unitary".into()));
    }
    Ok(())
}

/// Result of running a circuit on every logical basis input.
#[derive(Clone, Debug, PartialEq)]
pub struct LogicalAction<T: Real> {
    /// Columns indexed by the data-qubit basis (first data qubit most significant).
    pub matrix: CMatrix<T>,
    /// Largest ancilla occupation left after any input.
    pub ancilla_residual: T,
    /// Largest norm² outside the data subspace (work qubits must return to `|0_L⟩`).
    pub leakage: T,
}

/// Assembles the action of `circuit` on `data` qubits; all other qubits start
/// in `|0_L⟩` and must come back there.
pub fn logical_action<T: Real>(circuit: &Circuit<T>, data: &[usize]) -> Result<LogicalAction<T>> {
    let dim = 1usize << data.len();
    let mut matrix = CMatrix::zeros(dim, dim);
    let mut ancilla_residual = T::zero();
    let mut leakage = T::zero();
    let place = |x: usize| {
        let mut bits = vec![false; circuit.qubits];
        for (k, &q) in data.iter().enumerate() {
            bits[q] = x >> (data.len() - 1 - k) & 1 == 1;
        }
        bits
    };
    for col in 0..dim {
        let start = LogicalRegister::from_bits(&place(col), circuit.ancillas)?;
        let out = apply(&start, circuit)?;
        ancilla_residual = ancilla_residual.max(out.ancilla_residual());
        let mut kept = T::zero();
        for row in 0..dim {
            let z = out.amplitude(crate::gates::encode_mask(&place(row)));
            kept += z.norm_sqr();
            matrix[(row, col)] = z;
        }
        leakage = leakage.max((out.norm_sqr() - kept).max(T::zero()));
    }
    Ok(LogicalAction { matrix, ancilla_residual, leakage })
}

/// Compares the logical action of a `C^t(U)` circuit with the ideal matrix.
pub fn verify_controlled_power<T: Real>(
    circuit: &Circuit<T>,
    t: usize,
    u: &CMatrix<T>,
    tol: T,
) -> Result<(EquivalenceResult<T>, LogicalAction<T>)> {
    let data: Vec<usize> = (0..=t).collect();
    let action = logical_action(circuit, &data)?;
    let eq = equivalence_up_to_global_phase(&action.matrix, &multi_controlled(t, u), tol)?;
    Ok((eq, action))
}

/// Haar-random 2×2 unitary: a uniform unit quaternion times a uniform phase.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R) -> CMatrix<T> {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| T::lit(v / n));
    let a = Complex::new(w, z);
    let b = Complex::new(y, x);
    let phase = cis(T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)));
    CMatrix::from_row_slice(2, 2, &[a, b, -b.conj(), a.conj()]) * phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{cnot, pauli_x, toffoli};
    use crate::scalar::{im, max_abs};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn address_round_trip() {
        for a in [Address::a(3), Address::b(0), Address::Ancilla(7)] {
            assert_eq!(a.to_string().parse::<Address>().unwrap(), a);
        }
        assert!("q1.c".parse::<Address>().is_err());
        assert!("x1".parse::<Address>().is_err());
    }

    #[test]
    fn empty_circuit_is_identity() {
        let r = LogicalRegister::<f64>::from_bits(&[true, false], 1).unwrap();
        assert_eq!(apply(&r, &Circuit::new(2, 1)).unwrap(), r);
    }

    #[test]
    fn et_pi_on_zero() {
        let mut c = Circuit::new(1, 0);
        c.push(Op::Et { theta: PI, x: Address::a(0), y: Address::b(0) });
        let out = apply(&LogicalRegister::new(1, 0).unwrap(), &c).unwrap();
        let (v, leak) = out.decode();
        assert!(leak < 1e-15);
        assert!((v[1] - im(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn pcet_twice_is_identity() {
        let mut c = Circuit::<f64>::new(2, 0);
        c.push(logical_cnot(0, 1)).push(logical_cnot(0, 1));
        let act = logical_action(&c, &[0, 1]).unwrap();
        assert!(equivalence_up_to_global_phase(&act.matrix, &CMatrix::identity(4, 4), 1e-12).unwrap().equal);
        let mut one = Circuit::<f64>::new(2, 0);
        one.push(logical_cnot(0, 1));
        let act = logical_action(&one, &[0, 1]).unwrap();
        assert!(equivalence_up_to_global_phase(&act.matrix, &cnot().matrix, 1e-12).unwrap().equal);
    }

    #[test]
    fn and_gate_branches() {
        let mut c = Circuit::<f64>::new(2, 1);
        c.extend(and_gate(0, 1, Address::Ancilla(0)));
        let out = apply(&LogicalRegister::from_bits(&[true, true], 1).unwrap(), &c).unwrap();
        // q0 = |10⟩, q1 = |00⟩, ancilla occupied.
        let mask = 0b1_00_01;
        assert!((out.amplitude(mask).norm() - 1.0).abs() < 1e-15);
        for bits in [[false, false], [false, true], [true, false]] {
            let start = LogicalRegister::from_bits(&bits, 1).unwrap();
            let out = apply(&start, &c).unwrap();
            assert!(out.ancilla_residual() < 1e-15);
            assert!((out.decode().0 - start.decode().0 * cis(-PI / 4.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn occupied_ancilla_is_rejected() {
        let mut c = Circuit::<f64>::new(2, 1);
        c.extend(and_gate(0, 1, Address::Ancilla(0)));
        c.extend(and_gate(0, 1, Address::Ancilla(0)));
        let r = LogicalRegister::from_bits(&[true, true], 1).unwrap();
        assert!(matches!(apply(&r, &c), Err(Error::AncillaNotGround { .. })));
    }

    #[test]
    fn toffoli_is_exact_up_to_phase() {
        let mut c = Circuit::<f64>::new(3, 1);
        c.push(encoded_toffoli(0, 1, 2, Address::Ancilla(0)));
        let act = logical_action(&c, &[0, 1, 2]).unwrap();
        let r = equivalence_up_to_global_phase(&act.matrix, &toffoli().matrix, 1e-12).unwrap();
        assert!(r.equal, "{r}");
        assert!(act.ancilla_residual < 1e-15 && act.leakage < 1e-15);
        assert_eq!(c.counts().pcet_class, 3);
    }

    #[test]
    fn standard_toffoli_moduli() {
        let c = standard_toffoli_upto_phase::<f64>().unwrap();
        let act = logical_action(&c, &[0, 1, 2]).unwrap();
        let diff = act.matrix.map(|z| re(z.norm())) - toffoli::<f64>().matrix.map(|z| re(z.norm()));
        assert!(max_abs(&diff) < 1e-12);
    }

    #[test]
    fn constructions_match_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in 2..=4 {
            let u = random_unitary::<f64, _>(&mut rng);
            for c in [controlled_power_standard(t, &u).unwrap(), controlled_power_improved(t, &u).unwrap()] {
                let (eq, act) = verify_controlled_power(&c, t, &u, 1e-10).unwrap();
                assert!(eq.equal, "t={t}: {eq}");
                assert!(act.ancilla_residual < 1e-12 && act.leakage < 1e-12);
            }
        }
        let x = pauli_x::<f64>();
        let c = controlled_power_improved(4, &x).unwrap();
        assert_eq!(c.counts().pcet_class, 6);
        assert_eq!(controlled_power_standard(4, &x).unwrap().counts().toffoli, 6);
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary::<f64, _>(&mut rng);
        let mut c = controlled_power_standard(3, &u).unwrap();
        c.extend(single_qubit_ops(&u, 0).unwrap());
        c.push(Op::NodePhase { chi: 0.25, x: Address::Ancilla(0) });
        let parsed = Circuit::<f64>::parse(&c.to_text()).unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn parse_errors() {
        assert!(Circuit::<f64>::parse("ET(1.0) -> q0.a").is_err());
        assert!(Circuit::<f64>::parse("FOO -> q0.a q0.b").is_err());
        assert!(Circuit::<f64>::parse("ET(1.0) -> q0.a q0.a").is_err());
        assert!(Circuit::<f64>::parse("# qubits 1 ancillas 0\nPCET q0.a -> q1.a q1.b").is_err());
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert!(unitarity_defect(&random_unitary::<f64, _>(&mut rng)) < 1e-14);
        }
    }
}
