//! Scenario files.
//!
//! A scenario is a JSON object. Lines whose first non-blank characters are
//! `#` or `//` are comments (conventionally a header stating units) and are
//! blanked before parsing, so reported line numbers match the file.
//!
//! All frequencies, rates and couplings share one angular-frequency unit and
//! times are in its inverse (ħ = 1). Complex numbers are written `[re, im]`.

use std::fmt;
use std::str::FromStr;

use cqed_core::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    PairEvolution,
    Blockade,
    Transistor,
    EffectiveErrorSweep,
    VerifyGates,
    VerifyCircuits,
}

pub struct Field {
    pub name: &'static str,
    pub required: bool,
    pub help: &'static str,
}

const fn req(name: &'static str, help: &'static str) -> Field {
    Field { name, required: true, help }
}

const fn opt(name: &'static str, help: &'static str) -> Field {
    Field { name, required: false, help }
}

const GRID: Field = req("time_grid", "{\"t_max\": f64, \"points\": int}; uniform grid on [0, t_max]");

const PAIR_FIELDS: &[Field] = &[
    req("atoms", "atoms per node, N"),
    req("omega_sigma", "exchange rate Omega_sigma"),
    req("initial", "{\"alpha1\", \"beta1\", \"alpha2\", \"beta2\"} as [re, im]; product state of the two nodes"),
    GRID,
    opt("tolerance", "fidelity tolerance (default 1e-9)"),
];

const BLOCKADE_FIELDS: &[Field] = &[
    req("omega1", "Lamb-shift rate Omega_1"),
    req("omega2", "Lamb-shift rate Omega_2"),
    req("omega_sigma", "exchange rate Omega_sigma"),
    req("atoms1", "atoms in node 1, N1"),
    req("atoms2", "atoms in node 2, N2"),
    req("photons", "photon number n_k1 of the mediating mode"),
    GRID,
    opt("bare1", "bare frequency of node 1 (default 1); node 2 is tuned to photon-free resonance"),
    opt("complete_transfer", "assert |c3|^2 = 1 at pi / (2 sqrt(N1 N2) Omega_sigma) (default false)"),
    opt("max_transfer_below", "assert max |c3|^2 on the grid stays below this value"),
    opt("tolerance", "residual and agreement tolerance (default 1e-9)"),
];

const TRANSISTOR_FIELDS: &[Field] = &[
    req("control_atoms", "atoms in the control node, N"),
    req("target_atoms", "atoms in each of the two target nodes"),
    req("g21", "control lower-transition coupling (real)"),
    req("delta_control", "control detuning"),
    req("g32", "target upper-transition coupling (real)"),
    req("delta_target", "target detuning"),
    req("alpha", "[re, im] amplitude of target |0,1>"),
    req("beta", "[re, im] amplitude of target |1,0>"),
    GRID,
    opt("tolerance", "fidelity tolerance (default 1e-9)"),
];

const SWEEP_FIELDS: &[Field] = &[
    req("atoms", "atoms per node, N"),
    req("coupling", "|g21|, equal on both nodes"),
    req("detuning_multiples", "increasing list of Delta in units of sqrt(N)|g|"),
    opt("periods", "swap periods simulated per point (default 1)"),
    opt("grid_points", "time points per period window (default 200)"),
    opt("n_max", "photon truncation of the microscopic model (default 2)"),
    opt("threshold_multiple", "row whose infidelity is bounded (default 30)"),
    opt("threshold", "infidelity bound on that row (default 1e-3)"),
    opt("envelope_jitter", "allowed relative rise between successive rows (default 0.1)"),
];

const GATES_FIELDS: &[Field] = &[
    opt("seed", "RNG seed; required when samples > 0"),
    opt("samples", "random unitaries for the synthesis check (default 10)"),
    opt("tolerance", "synthesis tolerance (default 1e-10)"),
];

const CIRCUITS_FIELDS: &[Field] = &[
    req("controls", "list of control counts t >= 2"),
    req("samples", "random payload unitaries per t"),
    req("seed", "RNG seed"),
    opt("tolerance", "equivalence tolerance (default 1e-9)"),
];

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::PairEvolution,
        Kind::Blockade,
        Kind::Transistor,
        Kind::EffectiveErrorSweep,
        Kind::VerifyGates,
        Kind::VerifyCircuits,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::PairEvolution => "pair-evolution",
            Kind::Blockade => "blockade",
            Kind::Transistor => "transistor",
            Kind::EffectiveErrorSweep => "effective-error-sweep",
            Kind::VerifyGates => "verify-gates",
            Kind::VerifyCircuits => "verify-circuits",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Kind::PairEvolution => "excitation swap between two equal N-atom nodes, closed form vs propagation",
            Kind::Blockade => "photon-number-dependent Lamb-shift blockade of the swap",
            Kind::Transistor => "conditional parking of target population on the third level",
            Kind::EffectiveErrorSweep => "effective vs microscopic model infidelity over a detuning sweep",
            Kind::VerifyGates => "logical gate identities and single-qubit synthesis",
            Kind::VerifyCircuits => "C^t(U) constructions against brute-force matrices",
        }
    }

    pub fn fields(self) -> &'static [Field] {
        match self {
            Kind::PairEvolution => PAIR_FIELDS,
            Kind::Blockade => BLOCKADE_FIELDS,
            Kind::Transistor => TRANSISTOR_FIELDS,
            Kind::EffectiveErrorSweep => SWEEP_FIELDS,
            Kind::VerifyGates => GATES_FIELDS,
            Kind::VerifyCircuits => CIRCUITS_FIELDS,
        }
    }

    pub fn describe(self) -> String {
        let mut s = format!("{}: {}\n", self.name(), self.summary());
        for f in self.fields() {
            let tag = if f.required { "required" } else { "optional" };
            s.push_str(&format!("  {:<20} {tag:<9} {}\n", f.name, f.help));
        }
        s
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| CliError::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairInitial {
    pub alpha1: [f64; 2],
    pub beta1: [f64; 2],
    pub alpha2: [f64; 2],
    pub beta2: [f64; 2],
}

/// Every field any kind accepts; which ones are required depends on `kind`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    kind: Option<String>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    time_grid: Option<TimeGrid>,
    atoms: Option<usize>,
    omega_sigma: Option<f64>,
    initial: Option<PairInitial>,
    omega1: Option<f64>,
    omega2: Option<f64>,
    atoms1: Option<usize>,
    atoms2: Option<usize>,
    photons: Option<usize>,
    bare1: Option<f64>,
    complete_transfer: Option<bool>,
    max_transfer_below: Option<f64>,
    control_atoms: Option<usize>,
    target_atoms: Option<usize>,
    g21: Option<f64>,
    delta_control: Option<f64>,
    g32: Option<f64>,
    delta_target: Option<f64>,
    alpha: Option<[f64; 2]>,
    beta: Option<[f64; 2]>,
    coupling: Option<f64>,
    detuning_multiples: Option<Vec<f64>>,
    periods: Option<usize>,
    grid_points: Option<usize>,
    n_max: Option<usize>,
    threshold_multiple: Option<f64>,
    threshold: Option<f64>,
    envelope_jitter: Option<f64>,
    samples: Option<usize>,
    controls: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSpec {
    pub atoms: usize,
    pub omega_sigma: f64,
    pub initial: [Complex64; 4],
    pub grid: TimeGrid,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockadeSpec {
    pub omega: [f64; 2],
    pub omega_sigma: f64,
    pub atoms: [usize; 2],
    pub photons: usize,
    pub bare1: f64,
    pub grid: TimeGrid,
    pub complete_transfer: bool,
    pub max_transfer_below: Option<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransistorSpec {
    pub control_atoms: usize,
    pub target_atoms: usize,
    pub g21: f64,
    pub delta_control: f64,
    pub g32: f64,
    pub delta_target: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub grid: TimeGrid,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub atoms: usize,
    pub coupling: f64,
    pub multiples: Vec<f64>,
    pub periods: usize,
    pub grid_points: usize,
    pub n_max: usize,
    pub threshold_multiple: f64,
    pub threshold: f64,
    pub jitter: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatesSpec {
    pub seed: Option<u64>,
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitsSpec {
    pub controls: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Spec {
    Pair(PairSpec),
    Blockade(BlockadeSpec),
    Transistor(TransistorSpec),
    Sweep(SweepSpec),
    Gates(GatesSpec),
    Circuits(CircuitsSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: Kind,
    pub spec: Spec,
    /// The parsed file, echoed into the report.
    pub echo: Value,
}

/// Blanks comment lines, keeping the line count.
fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| {
            let t = l.trim_start();
            if t.starts_with('#') || t.starts_with("//") {
                ""
            } else {
                l
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// serde_json appends " at line L column C"; the error carries those separately.
fn bare_message(e: &serde_json::Error) -> String {
    let s = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    s.strip_suffix(&suffix).map(str::to_string).unwrap_or(s)
}

fn json_error(e: serde_json::Error, field: Option<String>) -> CliError {
    CliError::Parse { line: e.line(), column: e.column(), field, message: bare_message(&e) }
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    json_error(e.into_inner(), (path != ".").then_some(path))
}

fn missing(field: &str) -> CliError {
    CliError::Validation { field: field.to_string(), message: "is required but missing".into() }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation { field: field.to_string(), message: message.into() }
}

fn need<T>(v: Option<T>, field: &str) -> Result<T, CliError> {
    v.ok_or_else(|| missing(field))
}

fn positive(v: f64, field: &str) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn nonzero(v: f64, field: &str) -> Result<f64, CliError> {
    if v.is_finite() && v != 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be finite and nonzero, got {v}")))
    }
}

fn at_least_one(v: usize, field: &str) -> Result<usize, CliError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(invalid(field, "must be at least 1"))
    }
}

fn grid(g: Option<TimeGrid>) -> Result<TimeGrid, CliError> {
    let g = need(g, "time_grid")?;
    positive(g.t_max, "time_grid.t_max")?;
    if g.points < 2 {
        return Err(invalid("time_grid.points", "must be at least 2"));
    }
    Ok(g)
}

fn complex(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

fn normalized(a: Complex64, b: Complex64, field: &str) -> Result<(), CliError> {
    let n = a.norm_sqr() + b.norm_sqr();
    if (n - 1.0).abs() > 1e-12 {
        return Err(invalid(field, format!("amplitudes must be normalized, |a|^2 + |b|^2 = {n}")));
    }
    Ok(())
}

fn tolerance(v: Option<f64>, default: f64) -> Result<f64, CliError> {
    positive(v.unwrap_or(default), "tolerance")
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let clean = strip_comments(text);
        let echo: Value = serde_json::from_str(&clean).map_err(|e| json_error(e, None))?;
        let mut de = serde_json::Deserializer::from_str(&clean);
        let raw: Raw = serde_path_to_error::deserialize(&mut de).map_err(parse_error)?;

        let kind: Kind = need(raw.kind.clone(), "kind")?.parse()?;
        if let Value::Object(map) = &echo {
            for key in map.keys().filter(|k| *k != "kind") {
                if !kind.fields().iter().any(|f| f.name == key) {
                    return Err(invalid(key, format!("is not used by kind `{kind}`")));
                }
            }
        }
        let spec = Self::validate(kind, raw)?;
        Ok(Scenario { kind, spec, echo })
    }

    fn validate(kind: Kind, r: Raw) -> Result<Spec, CliError> {
        Ok(match kind {
            Kind::PairEvolution => {
                let i = need(r.initial, "initial")?;
                normalized(complex(i.alpha1), complex(i.beta1), "initial.alpha1/beta1")?;
                normalized(complex(i.alpha2), complex(i.beta2), "initial.alpha2/beta2")?;
                Spec::Pair(PairSpec {
                    atoms: at_least_one(need(r.atoms, "atoms")?, "atoms")?,
                    omega_sigma: nonzero(need(r.omega_sigma, "omega_sigma")?, "omega_sigma")?,
                    initial: [complex(i.alpha1), complex(i.beta1), complex(i.alpha2), complex(i.beta2)],
                    grid: grid(r.time_grid)?,
                    tolerance: tolerance(r.tolerance, 1e-9)?,
                })
            }
            Kind::Blockade => Spec::Blockade(BlockadeSpec {
                omega: [need(r.omega1, "omega1")?, need(r.omega2, "omega2")?],
                omega_sigma: nonzero(need(r.omega_sigma, "omega_sigma")?, "omega_sigma")?,
                atoms: [
                    at_least_one(need(r.atoms1, "atoms1")?, "atoms1")?,
                    at_least_one(need(r.atoms2, "atoms2")?, "atoms2")?,
                ],
                photons: need(r.photons, "photons")?,
                bare1: r.bare1.unwrap_or(1.0),
                grid: grid(r.time_grid)?,
                complete_transfer: r.complete_transfer.unwrap_or(false),
                max_transfer_below: r.max_transfer_below,
                tolerance: tolerance(r.tolerance, 1e-9)?,
            }),
            Kind::Transistor => {
                let (alpha, beta) = (complex(need(r.alpha, "alpha")?), complex(need(r.beta, "beta")?));
                normalized(alpha, beta, "alpha/beta")?;
                Spec::Transistor(TransistorSpec {
                control_atoms: at_least_one(need(r.control_atoms, "control_atoms")?, "control_atoms")?,
                target_atoms: at_least_one(need(r.target_atoms, "target_atoms")?, "target_atoms")?,
                g21: nonzero(need(r.g21, "g21")?, "g21")?,
                delta_control: nonzero(need(r.delta_control, "delta_control")?, "delta_control")?,
                g32: nonzero(need(r.g32, "g32")?, "g32")?,
                delta_target: nonzero(need(r.delta_target, "delta_target")?, "delta_target")?,
                alpha,
                beta,
                grid: grid(r.time_grid)?,
                tolerance: tolerance(r.tolerance, 1e-9)?,
            })
            }
            Kind::EffectiveErrorSweep => {
                let multiples = need(r.detuning_multiples, "detuning_multiples")?;
                if multiples.is_empty() {
                    return Err(invalid("detuning_multiples", "must not be empty"));
                }
                for m in &multiples {
                    positive(*m, "detuning_multiples")?;
                }
                if multiples.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid("detuning_multiples", "must be strictly increasing"));
                }
                let threshold_multiple = r.threshold_multiple.unwrap_or(30.0);
                if !multiples.contains(&threshold_multiple) {
                    return Err(invalid("threshold_multiple", format!("{threshold_multiple} is not in detuning_multiples")));
                }
                Spec::Sweep(SweepSpec {
                    atoms: at_least_one(need(r.atoms, "atoms")?, "atoms")?,
                    coupling: positive(need(r.coupling, "coupling")?, "coupling")?,
                    multiples,
                    periods: at_least_one(r.periods.unwrap_or(1), "periods")?,
                    grid_points: at_least_one(r.grid_points.unwrap_or(200), "grid_points")?,
                    n_max: at_least_one(r.n_max.unwrap_or(2), "n_max")?,
                    threshold_multiple,
                    threshold: positive(r.threshold.unwrap_or(1e-3), "threshold")?,
                    jitter: r.envelope_jitter.unwrap_or(0.1),
                })
            }
            Kind::VerifyGates => {
                let samples = r.samples.unwrap_or(10);
                if samples > 0 && r.seed.is_none() {
                    return Err(invalid("seed", "is required when samples > 0"));
                }
                Spec::Gates(GatesSpec { seed: r.seed, samples, tolerance: tolerance(r.tolerance, 1e-10)? })
            }
            Kind::VerifyCircuits => {
                let controls = need(r.controls, "controls")?;
                if controls.is_empty() || controls.iter().any(|&t| t < 2) {
                    return Err(invalid("controls", "must be a non-empty list of integers >= 2"));
                }
                Spec::Circuits(CircuitsSpec {
                    controls,
                    samples: at_least_one(need(r.samples, "samples")?, "samples")?,
                    seed: need(r.seed, "seed")?,
                    tolerance: tolerance(r.tolerance, 1e-9)?,
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_header_keeps_line_numbers() {
        let text = "# units: 1/us\n// hbar = 1\n{\n  \"kind\": \"blockade\",\n  \"omega1\": \"x\"\n}\n";
        match Scenario::parse(text) {
            Err(CliError::Parse { line, field, .. }) => {
                assert_eq!(line, 5);
                assert_eq!(field.as_deref(), Some("omega1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"kind": "blockade", "omega1": 1e-3, "omega2": 1e-3, "atoms1": 1, "atoms2": 1,
            "photons": 0, "time_grid": {"t_max": 10, "points": 5}}"#;
        match Scenario::parse(text) {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "omega_sigma"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn foreign_fields_are_rejected() {
        let err = Scenario::parse(r#"{"kind": "verify-gates", "atoms": 3, "seed": 1}"#).unwrap_err();
        assert!(matches!(err, CliError::Validation { ref field, .. } if field == "atoms"));
    }

    #[test]
    fn seed_is_mandatory_for_random_checks() {
        let err = Scenario::parse(r#"{"kind": "verify-gates", "samples": 3}"#).unwrap_err();
        assert!(matches!(err, CliError::Validation { ref field, .. } if field == "seed"));
        assert!(Scenario::parse(r#"{"kind": "verify-gates", "samples": 0}"#).is_ok());
    }

    #[test]
    fn every_kind_round_trips_its_name() {
        for k in Kind::ALL {
            assert_eq!(k.name().parse::<Kind>().unwrap(), k);
            assert!(k.describe().starts_with(k.name()));
        }
        assert!(matches!("nope".parse::<Kind>(), Err(CliError::UnknownKind(_))));
    }
}
