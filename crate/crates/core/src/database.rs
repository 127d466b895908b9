//! Breadth-first databases of optimal circuit costs.
//!
//! A database covers every unitary (or invertible linear map) whose optimal
//! cost is at most the number of completed layers: layer `c` holds the
//! canonical keys of all classes with optimal cost exactly `c`. Because
//! every generator is an involution on the symplectic group (phases are
//! dropped), neighboring classes differ in cost by at most the move
//! weight, so deduplication while building layer `c` only needs to consult
//! layers `c-1` and `c-2` besides the layer under construction. All layers
//! are retained as database content.
//!
//! Supported cost metrics: gate count, circuit depth (a move is any
//! non-empty set of gates acting on disjoint qubits), and 0/1-weighted
//! gate count (layers grow by weight-1 moves and then saturate under
//! weight-0 moves).

use dashmap::DashSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::canonical::{
    self, canonicalize, canonicalize_linear, canonicalize_linear_with_multiplicity,
    canonicalize_with_multiplicity, decode, decode_linear, encode_linear_exact, key_width,
    CanonicalKey, EquivMode,
};
use crate::circuit::{CostModel, Gate, GateKind, Metric};
use crate::tableau::{LinearMatrix, SymplecticTableau};

#[derive(Debug, Error)]
pub enum DatabaseError {
    #[error("databases require 2n <= 64 (got n = {0})")]
    TooManyQubits(usize),
    #[error("weighted databases support gate weights 0 and 1 only (got {0})")]
    UnsupportedWeight(u16),
    #[error("gate {0} is in the set but has no weight")]
    MissingWeight(&'static str),
    #[error("weighted metric requires at least one weight-1 gate in the set")]
    NoPositiveWeight,
    #[error("linear databases support gate sets within {{CX, SWAP}} and exact or simultaneous equivalence")]
    UnsupportedLinear,
    #[error("memory budget of {budget} bytes exceeded at layer {layer} ({used} bytes)")]
    MemoryBudget {
        budget: usize,
        layer: usize,
        used: usize,
        /// Layers completed before the stop; usable as a truncated
        /// database.
        partial: Box<Database>,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid database file: {0}")]
    Format(String),
}

/// One cost layer: `count` canonical keys of `width` bytes each,
/// concatenated in sorted order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub keys: Vec<u8>,
    pub width: usize,
}

impl Layer {
    pub fn len(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.keys.len() / self.width
        }
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        debug_assert_eq!(key.len(), self.width);
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match self.keys[mid * self.width..(mid + 1) * self.width].cmp(key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.keys.chunks_exact(self.width)
    }

    fn from_set(set: DashSet<Vec<u8>>, width: usize) -> Layer {
        let mut all: Vec<Vec<u8>> = set.into_iter().collect();
        all.par_sort_unstable();
        let mut keys = Vec::with_capacity(all.len() * width);
        for k in &all {
            keys.extend_from_slice(k);
        }
        Layer { keys, width }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Stop after this many completed cost layers (layer 0 excluded from
    /// the count). `None` builds until the space is exhausted.
    pub max_cost: Option<usize>,
    /// Abort with an error if stored keys exceed this many bytes.
    pub max_bytes: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Database {
    pub n: usize,
    pub mode: EquivMode,
    pub linear: bool,
    pub cost_model: CostModel,
    pub layers: Vec<Layer>,
    /// True when the final expansion produced no new classes, i.e. the
    /// whole space is covered.
    pub complete: bool,
}

/// Enumerate the moves for a cost model: single gates for the gate-count
/// and weighted metrics (paired with their weight), and all non-empty
/// disjoint-support gate sets for the depth metric (weight 1 each).
///
/// `Sdg` is dropped when `S` is present since they act identically on a
/// tableau; its weight still participates via the minimum.
pub fn moves(n: usize, cost_model: &CostModel) -> Vec<(Vec<Gate>, u16)> {
    let singles = single_gates(n, cost_model);
    match cost_model.metric {
        Metric::GateCount => singles.into_iter().map(|(g, _)| (vec![g], 1)).collect(),
        Metric::Weighted => singles.into_iter().map(|(g, w)| (vec![g], w)).collect(),
        Metric::Depth => {
            let mut out = Vec::new();
            let mut current = Vec::new();
            depth_moves(n, 0, &singles, &mut current, &mut out);
            out
        }
    }
}

/// All distinct gates from the cost model's set, with effective weights.
fn single_gates(n: usize, cost_model: &CostModel) -> Vec<(Gate, u16)> {
    let set = &cost_model.gate_set;
    let has = |k: GateKind| set.contains(&k);
    let mut out = Vec::new();
    let w = |k: GateKind| cost_model.weight_of(k).unwrap_or(1);
    // S and Sdg coincide on the symplectic matrix; keep one copy at the
    // cheaper weight
    let s_weight = match (has(GateKind::S), has(GateKind::Sdg)) {
        (true, true) => Some(w(GateKind::S).min(w(GateKind::Sdg))),
        (true, false) => Some(w(GateKind::S)),
        (false, true) => Some(w(GateKind::Sdg)),
        (false, false) => None,
    };
    for q in 0..n {
        if has(GateKind::H) {
            out.push((Gate::h(q), w(GateKind::H)));
        }
        if let Some(sw) = s_weight {
            out.push((Gate::s(q), sw));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            if has(GateKind::Cx) {
                out.push((Gate::cx(a, b), w(GateKind::Cx)));
            }
            if a < b {
                if has(GateKind::Cz) {
                    out.push((Gate::cz(a, b), w(GateKind::Cz)));
                }
                if has(GateKind::Swap) {
                    out.push((Gate::swap(a, b), w(GateKind::Swap)));
                }
            }
        }
    }
    out
}

fn depth_moves(
    n: usize,
    q: usize,
    singles: &[(Gate, u16)],
    current: &mut Vec<Gate>,
    out: &mut Vec<(Vec<Gate>, u16)>,
) {
    if q == n {
        if !current.is_empty() {
            out.push((current.clone(), 1));
        }
        return;
    }
    // qubit q idle (or already claimed as the far end of an earlier pair)
    depth_moves(n, q + 1, singles, current, out);
    if current.iter().any(|h| h.touches(q)) {
        return;
    }
    // any gate whose minimal qubit is q and whose partner (if any) is free
    for (g, _) in singles {
        let sup = g.support();
        if *sup.iter().min().unwrap() != q {
            continue;
        }
        if sup.len() == 2 {
            let other = sup[0].max(sup[1]);
            if current.iter().any(|h| h.touches(other)) {
                continue;
            }
        }
        current.push(*g);
        depth_moves(n, q + 1, singles, current, out);
        current.pop();
    }
}

/// Either representation the search can run over.
#[derive(Clone)]
enum Element {
    Full(SymplecticTableau),
    Lin(LinearMatrix),
}

impl Element {
    fn apply(&self, gates: &[Gate]) -> Element {
        match self {
            Element::Full(t) => {
                let mut t = t.clone();
                for g in gates {
                    t.apply_gate_mut(g);
                }
                Element::Full(t)
            }
            Element::Lin(m) => {
                let mut m = m.clone();
                for g in gates {
                    match g.kind {
                        GateKind::Cx => m.apply_cnot_mut(g.qubits[0], g.qubits[1]),
                        GateKind::Swap => m.swap_qubits_mut(g.qubits[0], g.qubits[1]),
                        _ => unreachable!("linear space admits CX and SWAP only"),
                    }
                }
                Element::Lin(m)
            }
        }
    }

    fn key(&self, mode: EquivMode) -> CanonicalKey {
        match self {
            Element::Full(t) => canonicalize(t, mode),
            Element::Lin(m) => match mode {
                EquivMode::Exact => encode_linear_exact(m),
                _ => canonicalize_linear(m),
            },
        }
    }
}

impl Database {
    pub fn key_width(&self) -> usize {
        key_width(self.n, self.linear)
    }

    /// Number of completed positive-cost layers (the maximal cost the
    /// database answers exactly).
    pub fn max_cost(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn total_keys(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::len).collect()
    }

    /// Optimal cost of a stored canonical key, if covered.
    pub fn cost_of_key(&self, key: &[u8]) -> Option<usize> {
        self.layers.iter().position(|l| l.contains(key))
    }

    /// Canonicalize a tableau under the database's mode and look it up.
    pub fn cost_of(&self, t: &SymplecticTableau) -> Option<usize> {
        assert!(!self.linear, "full tableau lookup on a linear database");
        self.cost_of_key(&canonicalize(t, self.mode).bytes)
    }

    pub fn cost_of_linear(&self, m: &LinearMatrix) -> Option<usize> {
        assert!(self.linear);
        let key = match self.mode {
            EquivMode::Exact => encode_linear_exact(m),
            _ => canonicalize_linear(m),
        };
        self.cost_of_key(&key.bytes)
    }

    pub fn decode_key(&self, key: &[u8]) -> CanonicalKey {
        CanonicalKey {
            mode: self.mode,
            n: self.n,
            linear: self.linear,
            bytes: key.to_vec(),
        }
    }

    /// Total number of distinct group elements the database covers, i.e.
    /// stored classes weighted by their orbit sizes.
    pub fn total_elements(&self) -> u128 {
        self.layers
            .par_iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|kb| {
                        let key = self.decode_key(kb);
                        if self.linear {
                            match self.mode {
                                EquivMode::Exact => 1u128,
                                _ => {
                                    let m = decode_linear(&key);
                                    let (_, mult) = canonicalize_linear_with_multiplicity(&m);
                                    (canonical::factorial(self.n) / mult) as u128
                                }
                            }
                        } else {
                            match self.mode {
                                EquivMode::Exact => 1u128,
                                EquivMode::Simultaneous => {
                                    let t = decode(&key);
                                    let (_, mult) = canonicalize_with_multiplicity(&t, self.mode);
                                    (canonical::factorial(self.n) / mult) as u128
                                }
                                EquivMode::Independent => {
                                    let t = decode(&key);
                                    canonical::orbit(&t, self.mode).len() as u128
                                }
                            }
                        }
                    })
                    .sum::<u128>()
            })
            .sum()
    }

    /// Build a database by layered breadth-first search from the identity.
    pub fn build(
        n: usize,
        mode: EquivMode,
        linear: bool,
        cost_model: CostModel,
        opts: BuildOptions,
    ) -> Result<Database, DatabaseError> {
        if 2 * n > 64 {
            return Err(DatabaseError::TooManyQubits(n));
        }
        if linear {
            let ok = cost_model
                .gate_set
                .iter()
                .all(|k| matches!(k, GateKind::Cx | GateKind::Swap))
                && mode != EquivMode::Independent;
            if !ok {
                return Err(DatabaseError::UnsupportedLinear);
            }
        }
        if cost_model.metric == Metric::Weighted {
            for &k in &cost_model.gate_set {
                match cost_model.weight_of(k) {
                    Some(w) if w <= 1 => {}
                    Some(w) => return Err(DatabaseError::UnsupportedWeight(w)),
                    None => return Err(DatabaseError::MissingWeight(k.mnemonic())),
                }
            }
        }
        let all_moves = moves(n, &cost_model);
        let mut unit_moves = Vec::new();
        let mut free_moves = Vec::new();
        for (gs, w) in &all_moves {
            match *w {
                0 => free_moves.push(gs.clone()),
                1 => unit_moves.push(gs.clone()),
                w => return Err(DatabaseError::UnsupportedWeight(w)),
            }
        }
        if unit_moves.is_empty() {
            return Err(DatabaseError::NoPositiveWeight);
        }

        let width = key_width(n, linear);
        let start = if linear {
            Element::Lin(LinearMatrix::identity(n))
        } else {
            Element::Full(SymplecticTableau::identity(n))
        };
        let decode_el = |key: &[u8]| -> Element {
            let key = CanonicalKey { mode, n, linear, bytes: key.to_vec() };
            if linear {
                Element::Lin(decode_linear(&key))
            } else {
                Element::Full(decode(&key))
            }
        };

        // layer 0: identity, saturated under weight-0 moves
        let zero = DashSet::new();
        zero.insert(start.key(mode).bytes);
        let empty = Layer { keys: Vec::new(), width };
        saturate_free(&zero, &free_moves, &empty, &empty, mode, &decode_el);
        let mut layers = vec![Layer::from_set(zero, width)];
        let mut complete = false;

        loop {
            if let Some(maxc) = opts.max_cost {
                if layers.len() > maxc {
                    break;
                }
            }
            let prev = &layers[layers.len() - 1];
            let prev2 = if layers.len() >= 2 { &layers[layers.len() - 2] } else { &empty };
            let next = DashSet::new();
            prev.iter().par_bridge().for_each(|kb| {
                let el = decode_el(kb);
                for mv in &unit_moves {
                    let child = el.apply(mv).key(mode).bytes;
                    if !prev.contains(&child) && !prev2.contains(&child) {
                        next.insert(child);
                    }
                }
            });
            saturate_free(&next, &free_moves, prev, prev2, mode, &decode_el);
            if next.is_empty() {
                complete = true;
                break;
            }
            layers.push(Layer::from_set(next, width));
            if let Some(budget) = opts.max_bytes {
                let used: usize = layers.iter().map(|l| l.keys.len()).sum();
                if used > budget {
                    let layer = layers.len() - 1;
                    let partial =
                        Database { n, mode, linear, cost_model, layers, complete: false };
                    return Err(DatabaseError::MemoryBudget {
                        budget,
                        layer,
                        used,
                        partial: Box::new(partial),
                    });
                }
            }
        }
        Ok(Database { n, mode, linear, cost_model, layers, complete })
    }
}

/// Close a layer under weight-0 moves. Weight-0 moves preserve optimal
/// cost exactly (moves are involutions), so the closure stays inside the
/// layer; the two previous layers are consulted only to discard keys
/// already settled there.
fn saturate_free(
    layer: &DashSet<Vec<u8>>,
    free_moves: &[Vec<Gate>],
    prev: &Layer,
    prev2: &Layer,
    mode: EquivMode,
    decode_el: &(impl Fn(&[u8]) -> Element + Sync),
) {
    if free_moves.is_empty() {
        return;
    }
    // drop anything settled in earlier layers before closing
    let seeded: Vec<Vec<u8>> = layer
        .iter()
        .filter(|k| prev.contains(k.key()) || prev2.contains(k.key()))
        .map(|k| k.key().clone())
        .collect();
    for k in seeded {
        layer.remove(&k);
    }
    let mut frontier: Vec<Vec<u8>> = layer.iter().map(|k| k.key().clone()).collect();
    while !frontier.is_empty() {
        let next: Vec<Vec<u8>> = frontier
            .par_iter()
            .flat_map_iter(|kb| {
                let el = decode_el(kb);
                let mut found = Vec::new();
                for mv in free_moves {
                    let child = el.apply(mv).key(mode).bytes;
                    if !prev.contains(&child)
                        && !prev2.contains(&child)
                        && layer.insert(child.clone())
                    {
                        found.push(child);
                    }
                }
                found
            })
            .collect();
        frontier = next;
    }
}

// --- serialization -------------------------------------------------------

const MAGIC: &[u8; 5] = b"CLDB1";
const LINEAR_FLAG: u8 = 0x80;

/// CRC-64/ECMA-182 (poly 0x42F0E1EBA9EA3693, init 0, not reflected).
pub fn crc64(data: &[u8]) -> u64 {
    const POLY: u64 = 0x42F0_E1EB_A9EA_3693;
    let mut crc = 0u64;
    for &b in data {
        crc ^= (b as u64) << 56;
        for _ in 0..8 {
            crc = if crc & (1 << 63) != 0 { (crc << 1) ^ POLY } else { crc << 1 };
        }
    }
    crc
}

impl Database {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Vec::new();
        payload.push(self.n as u8);
        payload.push(self.mode.id() | if self.linear { LINEAR_FLAG } else { 0 });
        payload.push(self.cost_model.metric.id());
        payload.extend_from_slice(&self.cost_model.gate_set_mask().to_le_bytes());
        for i in 0..6 {
            let w = self.cost_model.weights[i].unwrap_or(u16::MAX);
            payload.extend_from_slice(&w.to_le_bytes());
        }
        payload.push(if self.complete { 1 } else { 0 });
        payload.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        for layer in &self.layers {
            payload.extend_from_slice(&(layer.len() as u64).to_le_bytes());
            payload.extend_from_slice(&layer.keys);
        }
        let mut out = Vec::with_capacity(payload.len() + 13);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&payload);
        out.extend_from_slice(&crc64(&payload).to_le_bytes());
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Database, DatabaseError> {
        let fail = |m: &str| DatabaseError::Format(m.to_string());
        if data.len() < MAGIC.len() + 8 || &data[..MAGIC.len()] != MAGIC {
            return Err(fail("bad magic"));
        }
        let (payload, tail) = data[MAGIC.len()..].split_at(data.len() - MAGIC.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if crc64(payload) != stored {
            return Err(fail("checksum mismatch"));
        }
        let mut pos = 0usize;
        let mut take = |k: usize| -> Result<&[u8], DatabaseError> {
            if pos + k > payload.len() {
                return Err(DatabaseError::Format("truncated payload".into()));
            }
            let s = &payload[pos..pos + k];
            pos += k;
            Ok(s)
        };
        let n = take(1)?[0] as usize;
        let mode_byte = take(1)?[0];
        let linear = mode_byte & LINEAR_FLAG != 0;
        let mode = EquivMode::from_id(mode_byte & !LINEAR_FLAG)
            .ok_or_else(|| fail("bad equivalence mode"))?;
        let metric =
            Metric::from_id(take(1)?[0]).ok_or_else(|| fail("bad metric id"))?;
        let mask = u16::from_le_bytes(take(2)?.try_into().unwrap());
        let mut weights = [None; 6];
        for w in &mut weights {
            let v = u16::from_le_bytes(take(2)?.try_into().unwrap());
            *w = if v == u16::MAX { None } else { Some(v) };
        }
        let complete = take(1)?[0] != 0;
        let layer_count = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let width = key_width(n, linear);
        let mut layers = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
            let keys = take(count * width)?.to_vec();
            layers.push(Layer { keys, width });
        }
        if pos != payload.len() {
            return Err(fail("trailing bytes"));
        }
        let cost_model = CostModel {
            metric,
            gate_set: CostModel::gate_set_from_mask(mask),
            weights,
        };
        Ok(Database { n, mode, linear, cost_model, layers, complete })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), DatabaseError> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: &std::path::Path) -> Result<Database, DatabaseError> {
        Database::from_bytes(&std::fs::read(path)?)
    }
}

/// Brute-force breadth-first distances over exact tableaux; test oracle
/// and cross-check for small spaces.
pub fn exact_bfs_costs(
    n: usize,
    cost_model: &CostModel,
) -> std::collections::HashMap<Vec<u64>, usize> {
    let all_moves = moves(n, cost_model);
    let mut dist = std::collections::HashMap::new();
    let id = SymplecticTableau::identity(n);
    // Dijkstra with 0/1 weights via two-queue BFS
    let mut frontier = vec![id.cols_u64().to_vec()];
    dist.insert(frontier[0].clone(), 0usize);
    let mut cost = 0usize;
    while !frontier.is_empty() {
        // saturate weight-0 edges
        let mut zero_front = frontier.clone();
        while !zero_front.is_empty() {
            let mut nf = Vec::new();
            for cols in &zero_front {
                let t = SymplecticTableau::from_cols_u64(n, cols);
                for (mv, w) in &all_moves {
                    if *w != 0 {
                        continue;
                    }
                    let mut u = t.clone();
                    for g in mv {
                        u.apply_gate_mut(g);
                    }
                    let k = u.cols_u64().to_vec();
                    if !dist.contains_key(&k) {
                        dist.insert(k.clone(), cost);
                        frontier.push(k.clone());
                        nf.push(k);
                    }
                }
            }
            zero_front = nf;
        }
        let mut next = Vec::new();
        for cols in &frontier {
            let t = SymplecticTableau::from_cols_u64(n, cols);
            for (mv, w) in &all_moves {
                if *w != 1 {
                    continue;
                }
                let mut u = t.clone();
                for g in mv {
                    u.apply_gate_mut(g);
                }
                let k = u.cols_u64().to_vec();
                if !dist.contains_key(&k) {
                    dist.insert(k.clone(), cost + 1);
                    next.push(k);
                }
            }
        }
        frontier = next;
        cost += 1;
    }
    dist
}

/// Distinct exact tableaux reachable from the identity with the given
/// gate set (ignoring cost); used by completeness tests.
pub fn reachable_count(n: usize, cost_model: &CostModel) -> usize {
    exact_bfs_costs(n, cost_model).len()
}
