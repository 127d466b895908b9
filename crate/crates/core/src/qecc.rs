//! Encoding circuits for stabilizer codes, and optimal synthesis of
//! partially specified Clifford unitaries.
//!
//! A stabilizer group on `n` qubits with `r` independent generators fixes
//! only the images of `r` basis Paulis, so an encoder is any Clifford
//! mapping the ancilla `Z` operators onto the generators. Two fast
//! constructions build a disentangler by Pauli-row reduction (staged, with
//! one gate type per stage, and a per-generator sweep) and invert it. For
//! optimal encoders the search runs directly over `r x 2n` Pauli matrices
//! modulo invertible row operations — a change of generating set is free —
//! with reduced-row-echelon form as the class invariant, meeting in the
//! middle from the generators and from the ancilla pattern.

use std::collections::HashMap;

use thiserror::Error;

use crate::circuit::{Circuit, CostModel, Gate, GateKind, Metric};
use crate::database::moves;
use crate::tableau::{apply_gate_to_row, SymplecticTableau};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QeccError {
    #[error("no generators given")]
    Empty,
    #[error("bad Pauli character on line {line}")]
    BadPauli { line: usize },
    #[error("generator length differs from the first on line {line}")]
    LengthMismatch { line: usize },
    #[error("generators {i} and {j} anticommute")]
    NonCommuting { i: usize, j: usize },
    #[error("generators are linearly dependent")]
    Dependent,
    #[error("{r} generators exceed {n} qubits")]
    TooManyGenerators { r: usize, n: usize },
    #[error("stabilizer synthesis requires 2n <= 64 (got n = {0})")]
    TooManyQubits(usize),
    #[error("partial synthesis supports the gate-count and depth metrics")]
    UnsupportedMetric,
    #[error("no circuit within cost {limit} maps the generators to the target")]
    NotFound { limit: usize },
}

/// An independent, pairwise commuting set of Pauli generators (signs
/// dropped). Row bit `q` is the X part on qubit `q`; bit `n + q` the Z
/// part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGroup {
    pub n: usize,
    pub gens: Vec<u64>,
}

fn symp(n: usize, a: u64, b: u64) -> u64 {
    let mask = (1u64 << n) - 1;
    let prod = (a & (b >> n)) ^ ((a >> n) & b);
    (prod & mask).count_ones() as u64 & 1
}

/// Reduced row-echelon form over GF(2), `bits` columns; zero rows dropped.
pub fn rref(rows: &[u64], bits: usize) -> Vec<u64> {
    let mut m: Vec<u64> = rows.to_vec();
    let mut rank = 0;
    for col in 0..bits {
        let Some(pos) = (rank..m.len()).find(|&i| (m[i] >> col) & 1 == 1) else {
            continue;
        };
        m.swap(rank, pos);
        for i in 0..m.len() {
            if i != rank && (m[i] >> col) & 1 == 1 {
                m[i] ^= m[rank];
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

impl StabilizerGroup {
    pub fn new(n: usize, gens: Vec<u64>) -> Result<StabilizerGroup, QeccError> {
        if gens.is_empty() {
            return Err(QeccError::Empty);
        }
        if 2 * n > 64 {
            return Err(QeccError::TooManyQubits(n));
        }
        if gens.len() > n {
            return Err(QeccError::TooManyGenerators { r: gens.len(), n });
        }
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if symp(n, gens[i], gens[j]) == 1 {
                    return Err(QeccError::NonCommuting { i, j });
                }
            }
        }
        if rref(&gens, 2 * n).len() != gens.len() {
            return Err(QeccError::Dependent);
        }
        Ok(StabilizerGroup { n, gens })
    }

    pub fn r(&self) -> usize {
        self.gens.len()
    }

    /// Wires whose `Z` operators the encoder maps onto the generators:
    /// the last `r`.
    pub fn ancilla_wires(&self) -> std::ops::Range<usize> {
        self.n - self.r()..self.n
    }

    /// Row pattern `Z` on each ancilla wire.
    pub fn ancilla_rows(&self) -> Vec<u64> {
        self.ancilla_wires().map(|q| 1u64 << (self.n + q)).collect()
    }
}

/// Parse one generator per line from `I`/`X`/`Y`/`Z` strings; an optional
/// leading sign is accepted and ignored (signs are a Pauli-layer
/// correction outside this representation). `#` starts a comment.
pub fn parse_stabilizers(text: &str) -> Result<StabilizerGroup, QeccError> {
    let mut n = 0usize;
    let mut gens = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.split('#').next().unwrap().trim();
        if s.is_empty() {
            continue;
        }
        let s = s.strip_prefix(['+', '-']).unwrap_or(s);
        if gens.is_empty() {
            n = s.len();
            if n == 0 || 2 * n > 64 {
                return Err(QeccError::TooManyQubits(n));
            }
        } else if s.len() != n {
            return Err(QeccError::LengthMismatch { line });
        }
        let mut row = 0u64;
        for (q, ch) in s.chars().enumerate() {
            match ch {
                'I' | 'i' | '_' => {}
                'X' | 'x' => row |= 1 << q,
                'Z' | 'z' => row |= 1 << (n + q),
                'Y' | 'y' => row |= (1 << q) | (1 << (n + q)),
                _ => return Err(QeccError::BadPauli { line }),
            }
        }
        gens.push(row);
    }
    StabilizerGroup::new(n, gens)
}

/// Disentangler construction shared by both encoders: applies `emit` for
/// every gate, conjugating all rows along.
struct Reducer {
    n: usize,
    rows: Vec<u64>,
    circuit: Circuit,
}

impl Reducer {
    fn new(g: &StabilizerGroup) -> Reducer {
        Reducer { n: g.n, rows: g.gens.clone(), circuit: Circuit::new(g.n) }
    }

    fn apply(&mut self, gate: Gate) {
        for row in &mut self.rows {
            let mut w = [*row];
            apply_gate_to_row(&mut w, self.n, &gate);
            *row = w[0];
        }
        self.circuit.push(gate);
    }

    fn x(&self, i: usize, q: usize) -> bool {
        (self.rows[i] >> q) & 1 == 1
    }

    fn z(&self, i: usize, q: usize) -> bool {
        (self.rows[i] >> (self.n + q)) & 1 == 1
    }
}

/// Rewrite a circuit over the basic {H, S, Sdg, CX} library: CZ becomes
/// a Hadamard-conjugated CNOT and SWAP three CNOTs. Both encoder
/// constructions emit their output through this expansion.
fn expand_to_basis(c: &Circuit) -> Circuit {
    let mut out = Circuit::new(c.n);
    out.relabel = c.relabel.clone();
    for g in &c.gates {
        match g.kind {
            GateKind::Cz => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                out.push(Gate::h(b));
                out.push(Gate::cx(a, b));
                out.push(Gate::h(b));
            }
            GateKind::Swap => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                out.push(Gate::cx(a, b));
                out.push(Gate::cx(b, a));
                out.push(Gate::cx(a, b));
            }
            _ => out.push(*g),
        }
    }
    out
}

/// Encoder built in stages: CNOTs to diagonalize the X parts, CZ/S to
/// cancel the Z parts on the X-pivot rows, Hadamards turning those rows
/// into single `Z`s, CNOTs reducing the pure-Z rows, and SWAPs homing
/// every pivot onto an ancilla wire. The disentangler is inverted at the
/// end.
pub fn encode_staged(g: &StabilizerGroup) -> Circuit {
    let n = g.n;
    let mut red = Reducer::new(g);
    // row-reduce the X block (row operations are a free change of
    // generators); X-pivot rows come first
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for q in 0..n {
        let Some(pos) = (rank..red.rows.len()).find(|&i| (red.rows[i] >> q) & 1 == 1) else {
            continue;
        };
        red.rows.swap(rank, pos);
        for i in 0..red.rows.len() {
            if i != rank && (red.rows[i] >> q) & 1 == 1 {
                red.rows[i] ^= red.rows[rank];
            }
        }
        pivots.push(q);
        rank += 1;
    }
    // CNOT stage: each pivot row keeps X only on its pivot
    for j in 0..rank {
        for q in 0..n {
            if q != pivots[j] && red.x(j, q) {
                red.apply(Gate::cx(pivots[j], q));
            }
        }
    }
    // CZ/S stage: commutation makes pivot-pivot Z entries symmetric, so
    // one CZ clears each pair; S clears a Y on the pivot itself
    for j in 0..rank {
        for l in j + 1..rank {
            if red.z(j, pivots[l]) {
                debug_assert!(red.z(l, pivots[j]));
                red.apply(Gate::cz(pivots[j], pivots[l]));
            }
        }
        for q in 0..n {
            if q != pivots[j] && !pivots.contains(&q) && red.z(j, q) {
                red.apply(Gate::cz(pivots[j], q));
            }
        }
        if red.z(j, pivots[j]) {
            red.apply(Gate::s(pivots[j]));
        }
    }
    // H stage: X_p -> Z_p on every pivot
    for j in 0..rank {
        red.apply(Gate::h(pivots[j]));
    }
    // pure-Z rows: row-reduce their Z block over non-pivot wires, then
    // clear off-pivot entries with CNOTs
    let r = red.rows.len();
    let mut zpivots: Vec<usize> = Vec::new();
    let mut zrank = rank;
    for q in 0..n {
        if pivots.contains(&q) {
            continue;
        }
        let Some(pos) =
            (zrank..r).find(|&i| (red.rows[i] >> (n + q)) & 1 == 1)
        else {
            continue;
        };
        red.rows.swap(zrank, pos);
        for i in rank..r {
            if i != zrank && (red.rows[i] >> (n + q)) & 1 == 1 {
                red.rows[i] ^= red.rows[zrank];
            }
        }
        zpivots.push(q);
        zrank += 1;
    }
    debug_assert_eq!(zrank, r);
    for (idx, &ql) in zpivots.iter().enumerate() {
        let j = rank + idx;
        for q in 0..n {
            if q != ql && red.z(j, q) {
                red.apply(Gate::cx(q, ql));
            }
        }
    }
    // SWAP stage: home every pivot onto an ancilla wire
    let homes: Vec<usize> = g.ancilla_wires().collect();
    let mut location: Vec<usize> = pivots.iter().chain(&zpivots).copied().collect();
    for (i, &h) in homes.iter().enumerate() {
        if location[i] == h {
            continue;
        }
        let from = location[i];
        red.apply(Gate::swap(from, h));
        // another pending pivot may have been sitting on the home wire
        for loc in location.iter_mut() {
            if *loc == h {
                *loc = from;
            }
        }
        location[i] = h;
    }
    debug_assert!(red
        .rows
        .iter()
        .zip(g.ancilla_wires())
        .all(|(&row, q)| row == 1 << (n + q)));
    expand_to_basis(&red.circuit.inverted())
}

/// Encoder built by a per-generator sweep: each generator in turn is
/// reduced to a single `Z` and parked on its ancilla wire before the next
/// one is touched.
pub fn encode_unstaged(g: &StabilizerGroup) -> Circuit {
    let n = g.n;
    let mut red = Reducer::new(g);
    let homes: Vec<usize> = g.ancilla_wires().collect();
    for i in 0..red.rows.len() {
        // generators commuting with already parked Z rows carry no X
        // there, so the pivot never lands on a finished wire
        let home = homes[i];
        let xsup: Vec<usize> = (0..n).filter(|&q| red.x(i, q)).collect();
        let q = if let Some(&q) = xsup.first() {
            for &q2 in &xsup[1..] {
                red.apply(Gate::cx(q, q2));
            }
            for q2 in 0..n {
                if q2 != q && red.z(i, q2) {
                    red.apply(Gate::cz(q, q2));
                }
            }
            if red.z(i, q) {
                red.apply(Gate::s(q));
            }
            red.apply(Gate::h(q));
            q
        } else {
            // a pure-Z row supported only on parked wires would be a
            // product of earlier generators, so an unparked pivot exists
            let q = (0..n)
                .find(|&q| red.z(i, q) && !homes[..i].contains(&q))
                .expect("independent row has unparked Z support");
            for q2 in 0..n {
                if q2 != q && red.z(i, q2) {
                    red.apply(Gate::cx(q2, q));
                }
            }
            q
        };
        debug_assert_eq!(red.rows[i], 1 << (n + q));
        if q != home {
            red.apply(Gate::swap(q, home));
        }
        // earlier parked rows stay untouched: gates above never move a
        // finished home wire except through Z-transparent operations
        for (j, &h) in homes[..i + 1].iter().enumerate() {
            debug_assert_eq!(red.rows[j], 1 << (n + h));
        }
    }
    expand_to_basis(&red.circuit.inverted())
}

/// Check that a circuit encodes the group: the images of the ancilla `Z`
/// operators must span exactly the generator row space.
pub fn verify_encoder(c: &Circuit, g: &StabilizerGroup) -> bool {
    if c.n != g.n {
        return false;
    }
    let Ok(t) = SymplecticTableau::from_circuit(c) else {
        return false;
    };
    let image: Vec<u64> = g.ancilla_wires().map(|q| t.row_u64(g.n + q)).collect();
    rref(&image, 2 * g.n) == rref(&g.gens, 2 * g.n)
}

#[derive(Debug, Clone)]
pub struct PartialSynthResult {
    pub cost: usize,
    pub circuit: Circuit,
}

fn evolve(n: usize, rows: &[u64], mv: &[Gate]) -> Vec<u64> {
    rows.iter()
        .map(|&row| {
            let mut w = [row];
            for g in mv {
                apply_gate_to_row(&mut w, n, g);
            }
            w[0]
        })
        .collect()
}

/// Minimal-cost circuit whose conjugation action maps the row space of
/// `start` onto the row space of `target` (both full rank, equal size).
/// Bidirectional breadth-first search over row-echelon classes; supports
/// the gate-count and depth metrics.
pub fn synth_partial(
    n: usize,
    start: &[u64],
    target: &[u64],
    model: &CostModel,
    max_cost: usize,
) -> Result<PartialSynthResult, QeccError> {
    if 2 * n > 64 {
        return Err(QeccError::TooManyQubits(n));
    }
    if model.metric == Metric::Weighted {
        return Err(QeccError::UnsupportedMetric);
    }
    let all_moves: Vec<Vec<Gate>> = moves(n, model).into_iter().map(|(gs, _)| gs).collect();
    let bits = 2 * n;
    let s0 = rref(start, bits);
    let t0 = rref(target, bits);
    let mut fwd: HashMap<Vec<u64>, usize> = HashMap::from([(s0.clone(), 0)]);
    let mut bwd: HashMap<Vec<u64>, usize> = HashMap::from([(t0.clone(), 0)]);
    let mut fwd_frontier = vec![s0.clone()];
    let mut bwd_frontier = vec![t0.clone()];
    let (mut df, mut db) = (0usize, 0usize);
    let mut best: Option<(usize, Vec<u64>)> = None;
    if s0 == t0 {
        best = Some((0, s0.clone()));
    }
    while best.as_ref().map_or(true, |(b, _)| df + db + 1 < *b) && df + db < max_cost {
        // expand the smaller side
        let expand_fwd = fwd_frontier.len() <= bwd_frontier.len();
        let (map, other, frontier, depth) = if expand_fwd {
            (&mut fwd, &bwd, &mut fwd_frontier, &mut df)
        } else {
            (&mut bwd, &fwd, &mut bwd_frontier, &mut db)
        };
        let mut next = Vec::new();
        for rows in frontier.iter() {
            for mv in &all_moves {
                let k = rref(&evolve(n, rows, mv), bits);
                if map.contains_key(&k) {
                    continue;
                }
                map.insert(k.clone(), *depth + 1);
                if let Some(&d2) = other.get(&k) {
                    let tot = *depth + 1 + d2;
                    if best.as_ref().map_or(true, |(b, _)| tot < *b) {
                        best = Some((tot, k.clone()));
                    }
                }
                next.push(k);
            }
        }
        *frontier = next;
        *depth += 1;
        if fwd_frontier.is_empty() && bwd_frontier.is_empty() {
            break;
        }
    }
    let (cost, meeting) = best.ok_or(QeccError::NotFound { limit: max_cost })?;
    // reconstruct both halves by cost descent from the meeting class
    let descend = |map: &HashMap<Vec<u64>, usize>, from: &Vec<u64>| -> Vec<Vec<Gate>> {
        let mut out = Vec::new();
        let mut cur = from.clone();
        let mut d = map[&cur];
        while d > 0 {
            let mut stepped = false;
            for mv in &all_moves {
                let k = rref(&evolve(n, &cur, mv), bits);
                if map.get(&k) == Some(&(d - 1)) {
                    out.push(mv.clone());
                    cur = k;
                    d -= 1;
                    stepped = true;
                    break;
                }
            }
            assert!(stepped, "breadth-first layers admit descent");
        }
        out
    };
    // start * (reversed fwd path) reaches the meeting; moves are their
    // own inverses (parallel involutions), so reversing the list suffices
    let mut gates: Vec<Gate> = Vec::new();
    for mv in descend(&fwd, &meeting).into_iter().rev() {
        gates.extend(mv);
    }
    for mv in descend(&bwd, &meeting) {
        gates.extend(mv);
    }
    let circuit = Circuit::with_gates(n, gates);
    debug_assert_eq!(
        rref(&evolve(n, start, &circuit.gates), bits),
        rref(target, bits)
    );
    Ok(PartialSynthResult { cost, circuit })
}

/// Minimal-cost encoder: optimal disentangler from the generators to the
/// ancilla `Z` pattern, inverted.
pub fn optimal_encoder(
    g: &StabilizerGroup,
    model: &CostModel,
    max_cost: usize,
) -> Result<PartialSynthResult, QeccError> {
    let res = synth_partial(g.n, &g.gens, &g.ancilla_rows(), model, max_cost)?;
    Ok(PartialSynthResult { cost: res.cost, circuit: res.circuit.inverted() })
}

/// A random stabilizer group: images of the first `r` `Z` operators under
/// a uniformly random Clifford (always independent and commuting).
pub fn random_stabilizer_group(
    rng: &mut impl rand::Rng,
    n: usize,
    r: usize,
) -> StabilizerGroup {
    assert!(r >= 1 && r <= n);
    let t = crate::sample::random_clifford(rng, n);
    let gens = (0..r).map(|i| t.row_u64(n + i)).collect();
    StabilizerGroup::new(n, gens).expect("tableau rows form a valid group")
}
