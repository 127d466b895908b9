//! Circuit intermediate representation, gate set, cost and depth
//! evaluation, and the line-based text format.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The gate kinds admitted by the toolkit.
///
/// `S` and `Sdg` act identically at the symplectic level (sign information
/// is dropped); `Sdg` is kept in the IR for emission fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    S,
    Sdg,
    Cx,
    Cz,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Swap,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::S | GateKind::Sdg => 1,
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
        }
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::Cx => "CX",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
        }
    }

    /// Bit position inside a gate-set bitmask (database file format).
    pub fn mask_bit(self) -> u16 {
        match self {
            GateKind::H => 1 << 0,
            GateKind::S => 1 << 1,
            GateKind::Sdg => 1 << 2,
            GateKind::Cx => 1 << 3,
            GateKind::Cz => 1 << 4,
            GateKind::Swap => 1 << 5,
        }
    }

    pub fn from_mask_bit(bit: usize) -> Option<GateKind> {
        GateKind::ALL.get(bit).copied()
    }
}

/// A single gate on zero-based qubit indices.
///
/// Two-qubit gates carry two distinct indices; for `Cx` the order is
/// `(control, target)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: [usize; 2],
}

impl Gate {
    pub fn h(q: usize) -> Gate {
        Gate { kind: GateKind::H, qubits: [q, q] }
    }
    pub fn s(q: usize) -> Gate {
        Gate { kind: GateKind::S, qubits: [q, q] }
    }
    pub fn sdg(q: usize) -> Gate {
        Gate { kind: GateKind::Sdg, qubits: [q, q] }
    }
    pub fn cx(c: usize, t: usize) -> Gate {
        assert_ne!(c, t, "CX needs distinct qubits");
        Gate { kind: GateKind::Cx, qubits: [c, t] }
    }
    pub fn cz(a: usize, b: usize) -> Gate {
        assert_ne!(a, b, "CZ needs distinct qubits");
        Gate { kind: GateKind::Cz, qubits: [a, b] }
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        assert_ne!(a, b, "SWAP needs distinct qubits");
        Gate { kind: GateKind::Swap, qubits: [a, b] }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    /// The qubits this gate acts on (one or two entries).
    pub fn support(&self) -> &[usize] {
        &self.qubits[..self.arity()]
    }

    pub fn max_qubit(&self) -> usize {
        *self.support().iter().max().unwrap()
    }

    pub fn touches(&self, q: usize) -> bool {
        self.support().contains(&q)
    }

    pub fn shares_qubit(&self, other: &Gate) -> bool {
        self.support().iter().any(|q| other.touches(*q))
    }

    /// The same gate with every index replaced by `perm[index]`.
    pub fn relabeled(&self, perm: &[usize]) -> Gate {
        let mut qubits = self.qubits;
        for q in qubits.iter_mut().take(self.arity()) {
            *q = perm[*q];
        }
        if self.arity() == 1 {
            qubits[1] = qubits[0];
        }
        Gate { kind: self.kind, qubits }
    }

    /// The gate whose symplectic matrix composed with this one gives the
    /// identity. `S` and `Sdg` swap; everything else is self-inverse.
    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            k => k,
        };
        Gate { kind, qubits: self.qubits }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.mnemonic())?;
        for q in self.support() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// An ordered gate list over a declared qubit count.
///
/// The optional relabeling annotation records an output permutation
/// (wire `i` of the listed gates is read out as wire `relabel[i]`); it is
/// produced by independent-renaming reconstructions where trailing SWAP
/// gates are free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
    pub relabel: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new(n: usize) -> Circuit {
        Circuit { n, gates: Vec::new(), relabel: None }
    }

    pub fn with_gates(n: usize, gates: Vec<Gate>) -> Circuit {
        let c = Circuit { n, gates, relabel: None };
        c.check().expect("invalid circuit");
        c
    }

    pub fn check(&self) -> Result<(), CircuitError> {
        for g in &self.gates {
            if g.max_qubit() >= self.n {
                return Err(CircuitError::IndexOutOfRange { line: 0 });
            }
            if g.arity() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(CircuitError::DuplicateIndices { line: 0 });
            }
        }
        if let Some(p) = &self.relabel {
            if !is_permutation(p, self.n) {
                return Err(CircuitError::BadRelabel { line: 0 });
            }
        }
        Ok(())
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.max_qubit() < self.n);
        self.gates.push(g);
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Minimum number of time steps under as-soon-as-possible scheduling,
    /// where gates sharing a qubit cannot share a step.
    pub fn depth(&self) -> usize {
        let mut ready = vec![0usize; self.n];
        let mut depth = 0;
        for g in &self.gates {
            let step = g.support().iter().map(|&q| ready[q]).max().unwrap() + 1;
            for &q in g.support() {
                ready[q] = step;
            }
            depth = depth.max(step);
        }
        depth
    }

    /// Cost of the circuit under a cost model.
    pub fn cost(&self, m: &CostModel) -> Result<u64, CircuitError> {
        match &m.metric {
            Metric::GateCount => Ok(self.gates.len() as u64),
            Metric::Depth => Ok(self.depth() as u64),
            Metric::Weighted => {
                let mut total = 0u64;
                for g in &self.gates {
                    match m.weights[weight_index(g.kind)] {
                        Some(w) => total += w as u64,
                        None => return Err(CircuitError::NoWeight { kind: g.kind }),
                    }
                }
                Ok(total)
            }
        }
    }

    /// The same circuit with qubits renamed by `perm` (gate `i` index `q`
    /// becomes `perm[q]`).
    pub fn relabeled(&self, perm: &[usize]) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates.iter().map(|g| g.relabeled(perm)).collect(),
            relabel: self.relabel.as_ref().map(|r| {
                // wire perm[i] now carries what wire i carried
                let mut out = vec![0; self.n];
                for i in 0..self.n {
                    out[perm[i]] = r[i];
                }
                out
            }),
        }
    }

    /// Gate list of the inverse circuit (reversed order, S <-> Sdg).
    pub fn inverted(&self) -> Circuit {
        Circuit {
            n: self.n,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            relabel: None,
        }
    }
}

pub fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &x in p {
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Which quantity a search or a cost query minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    GateCount,
    Depth,
    Weighted,
}

impl Metric {
    pub fn id(self) -> u8 {
        match self {
            Metric::GateCount => 0,
            Metric::Depth => 1,
            Metric::Weighted => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Metric> {
        match id {
            0 => Some(Metric::GateCount),
            1 => Some(Metric::Depth),
            2 => Some(Metric::Weighted),
            _ => None,
        }
    }
}

pub(crate) fn weight_index(kind: GateKind) -> usize {
    match kind {
        GateKind::H => 0,
        GateKind::S => 1,
        GateKind::Sdg => 2,
        GateKind::Cx => 3,
        GateKind::Cz => 4,
        GateKind::Swap => 5,
    }
}

/// Metric plus the gate set admitted during search.
///
/// `weights` is indexed in `GateKind::ALL` order; `None` marks a kind with
/// no assigned weight (an error to cost in `Weighted` mode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub metric: Metric,
    pub gate_set: Vec<GateKind>,
    pub weights: [Option<u16>; 6],
}

impl CostModel {
    /// Gate count over the default search set `{H, S, CX}`.
    pub fn gate_count() -> CostModel {
        CostModel {
            metric: Metric::GateCount,
            gate_set: vec![GateKind::H, GateKind::S, GateKind::Cx],
            weights: [None; 6],
        }
    }

    pub fn depth() -> CostModel {
        CostModel { metric: Metric::Depth, ..CostModel::gate_count() }
    }

    /// Controlled-Z count: gate set `{H, S, Sdg, CZ}`, weight 1 on CZ and 0
    /// elsewhere.
    pub fn cz_count() -> CostModel {
        let mut weights = [None; 6];
        weights[weight_index(GateKind::H)] = Some(0);
        weights[weight_index(GateKind::S)] = Some(0);
        weights[weight_index(GateKind::Sdg)] = Some(0);
        weights[weight_index(GateKind::Cz)] = Some(1);
        CostModel {
            metric: Metric::Weighted,
            gate_set: vec![GateKind::H, GateKind::S, GateKind::Sdg, GateKind::Cz],
            weights,
        }
    }

    pub fn weighted(gate_set: Vec<GateKind>, weights: [Option<u16>; 6]) -> CostModel {
        CostModel { metric: Metric::Weighted, gate_set, weights }
    }

    pub fn set_weight(&mut self, kind: GateKind, weight: u16) {
        self.weights[weight_index(kind)] = Some(weight);
    }

    pub fn weight_of(&self, kind: GateKind) -> Option<u16> {
        match self.metric {
            Metric::Weighted => self.weights[weight_index(kind)],
            _ => Some(1),
        }
    }

    pub fn gate_set_mask(&self) -> u16 {
        self.gate_set.iter().fold(0, |m, k| m | k.mask_bit())
    }

    pub fn gate_set_from_mask(mask: u16) -> Vec<GateKind> {
        (0..6)
            .filter(|b| mask & (1 << b) != 0)
            .filter_map(GateKind::from_mask_bit)
            .collect()
    }

    pub fn check(&self) -> Result<(), CircuitError> {
        if self.gate_set.is_empty() {
            return Err(CircuitError::EmptyGateSet);
        }
        if self.metric == Metric::Weighted
            && !self
                .gate_set
                .iter()
                .any(|&k| self.weights[weight_index(k)].unwrap_or(0) > 0)
        {
            return Err(CircuitError::AllZeroWeights);
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("malformed header, line {line}")]
    MalformedHeader { line: usize },
    #[error("unknown mnemonic, line {line}")]
    UnknownMnemonic { line: usize },
    #[error("index out of range, line {line}")]
    IndexOutOfRange { line: usize },
    #[error("duplicate indices on a two-qubit gate, line {line}")]
    DuplicateIndices { line: usize },
    #[error("bad argument count, line {line}")]
    BadArity { line: usize },
    #[error("relabel line is not a permutation, line {line}")]
    BadRelabel { line: usize },
    #[error("no weight assigned to gate kind {kind:?}")]
    NoWeight { kind: GateKind },
    #[error("gate set is empty")]
    EmptyGateSet,
    #[error("weighted cost model has no positive weight")]
    AllZeroWeights,
}

/// Parse the circuit text format.
///
/// First non-comment line is `qubits <n>`; then one gate per line (`H q`,
/// `S q`, `Sdg q`, `CX c t`, `CZ a b`, `SWAP a b`); `#` starts a comment;
/// blank lines are ignored; an optional trailing `relabel p0 .. p(n-1)`
/// records an output relabeling.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap();
        match &mut circuit {
            None => {
                if head != "qubits" {
                    return Err(CircuitError::MalformedHeader { line });
                }
                let n: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(CircuitError::MalformedHeader { line })?;
                if toks.next().is_some() || n == 0 {
                    return Err(CircuitError::MalformedHeader { line });
                }
                circuit = Some(Circuit::new(n));
            }
            Some(c) => {
                if head == "relabel" {
                    let perm: Vec<usize> = toks
                        .map(|t| t.parse().map_err(|_| CircuitError::BadRelabel { line }))
                        .collect::<Result<_, _>>()?;
                    if !is_permutation(&perm, c.n) {
                        return Err(CircuitError::BadRelabel { line });
                    }
                    c.relabel = Some(perm);
                    continue;
                }
                let kind = match head.to_ascii_uppercase().as_str() {
                    "H" => GateKind::H,
                    "S" => GateKind::S,
                    "SDG" => GateKind::Sdg,
                    "CX" => GateKind::Cx,
                    "CZ" => GateKind::Cz,
                    "SWAP" => GateKind::Swap,
                    _ => return Err(CircuitError::UnknownMnemonic { line }),
                };
                let args: Vec<usize> = toks
                    .map(|t| t.parse().map_err(|_| CircuitError::BadArity { line }))
                    .collect::<Result<_, _>>()?;
                if args.len() != kind.arity() {
                    return Err(CircuitError::BadArity { line });
                }
                if args.iter().any(|&q| q >= c.n) {
                    return Err(CircuitError::IndexOutOfRange { line });
                }
                if kind.arity() == 2 && args[0] == args[1] {
                    return Err(CircuitError::DuplicateIndices { line });
                }
                let qubits = if kind.arity() == 1 { [args[0], args[0]] } else { [args[0], args[1]] };
                c.gates.push(Gate { kind, qubits });
            }
        }
    }
    circuit.ok_or(CircuitError::MalformedHeader { line: 0 })
}

/// Emit the canonical text form; `parse_circuit(emit_circuit(c))` returns
/// an identical gate list.
pub fn emit_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.n);
    for g in &c.gates {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    if let Some(p) = &c.relabel {
        out.push_str("relabel");
        for x in p {
            out.push_str(&format!(" {x}"));
        }
        out.push('\n');
    }
    out
}
