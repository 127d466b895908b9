//! Database-driven peephole optimization of large Clifford circuits.
//!
//! Around each pivot gate the optimizer gathers a subcircuit on a bounded
//! qubit set: a gate joins if it acts inside the set and commutes with
//! every gate it must slide past to reach the pivot. The gathered
//! fragment's tableau is re-synthesized optimally from a database; the
//! replacement is spliced in only when strictly cheaper, so every pass
//! monotonically lowers the circuit cost until a fixed point.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::canonical::EquivMode;
use crate::circuit::{Circuit, CostModel, Gate, GateKind, Metric};
use crate::database::Database;
use crate::synth::{synthesize, SynthError};
use crate::tableau::SymplecticTableau;

#[derive(Debug, Error)]
pub enum PeepholeError {
    #[error("peephole optimization needs a full-tableau database")]
    LinearDatabase,
    #[error("independently renamed databases cannot splice fragments in place")]
    IndependentMode,
    #[error("the depth metric is not local; optimize gate count or a weighted count")]
    DepthMetric,
    #[error("circuit has {circuit} qubits but the database needs {db}")]
    TooFewQubits { circuit: usize, db: usize },
    #[error("circuit costing failed: {0}")]
    Cost(#[from] crate::circuit::CircuitError),
}

/// Whether two gates commute as unitaries (not just up to Paulis).
///
/// The test is sound but deliberately conservative: disjoint supports,
/// equal gates, pairs of Z-diagonal gates (`S`, `Sdg`, `CZ`), `CX` pairs
/// that collide neither control-on-target nor target-on-control, an `S`
/// or `CZ` overlapping a `CX` only on its control, and `SWAP` against a
/// matching symmetric pair.
pub fn gates_commute(a: &Gate, b: &Gate) -> bool {
    if !a.shares_qubit(b) || a == b {
        return true;
    }
    use GateKind::*;
    let diagonal = |g: &Gate| matches!(g.kind, S | Sdg | Cz);
    if diagonal(a) && diagonal(b) {
        return true;
    }
    match (a.kind, b.kind) {
        (Cx, Cx) => a.qubits[1] != b.qubits[0] && b.qubits[1] != a.qubits[0],
        (S | Sdg | Cz, Cx) => !a.touches(b.qubits[1]),
        (Cx, S | Sdg | Cz) => !b.touches(a.qubits[1]),
        _ => false,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeepholeReport {
    pub passes: usize,
    pub replacements: usize,
    pub gates_before: usize,
    pub gates_after: usize,
    pub cost_before: u64,
    pub cost_after: u64,
    pub reduction: f64,
}

/// Indices (sorted, including `pivot`) of the maximal subcircuit on
/// qubit set `q` that can be slid to meet the pivot.
fn gather(gates: &[Gate], pivot: usize, q: &BTreeSet<usize>) -> Vec<usize> {
    let inside = |g: &Gate| g.support().iter().all(|x| q.contains(x));
    let mut picked = vec![pivot];
    // forward: a gate joins if it commutes with every skipped gate
    // between the pivot and itself
    let mut skipped: Vec<usize> = Vec::new();
    for j in pivot + 1..gates.len() {
        if inside(&gates[j]) && skipped.iter().all(|&k| gates_commute(&gates[j], &gates[k])) {
            picked.push(j);
        } else {
            skipped.push(j);
        }
    }
    // backward, symmetrically
    let mut skipped: Vec<usize> = Vec::new();
    for j in (0..pivot).rev() {
        if inside(&gates[j]) && skipped.iter().all(|&k| gates_commute(&gates[j], &gates[k])) {
            picked.push(j);
        } else {
            skipped.push(j);
        }
    }
    picked.sort_unstable();
    picked
}

/// Grow the pivot's qubit set one adjacent gate at a time, up to `m`
/// qubits, yielding each intermediate set.
fn grown_sets(gates: &[Gate], pivot: usize, m: usize) -> Vec<BTreeSet<usize>> {
    let mut q: BTreeSet<usize> = gates[pivot].support().iter().copied().collect();
    if q.len() > m {
        return Vec::new();
    }
    let mut out = vec![q.clone()];
    loop {
        // nearest gate (by distance from the pivot) touching the set and
        // bringing new qubits without exceeding the budget
        let mut grown = false;
        for d in 1..gates.len() {
            let candidates = [pivot.checked_sub(d), pivot.checked_add(d).filter(|&j| j < gates.len())];
            for j in candidates.into_iter().flatten() {
                let sup = gates[j].support();
                let touches = sup.iter().any(|x| q.contains(x));
                let news: Vec<usize> =
                    sup.iter().copied().filter(|x| !q.contains(x)).collect();
                if touches && !news.is_empty() && q.len() + news.len() <= m {
                    q.extend(news);
                    out.push(q.clone());
                    grown = true;
                    break;
                }
            }
            if grown {
                break;
            }
        }
        if !grown || q.len() == m {
            break;
        }
    }
    out
}

/// One replacement attempt at a pivot. Returns the new gate list when a
/// strictly cheaper realization of some gathered fragment exists.
fn try_pivot(
    gates: &[Gate],
    host_n: usize,
    pivot: usize,
    db: &Database,
    model: &CostModel,
    window: usize,
) -> Option<Vec<Gate>> {
    for q in grown_sets(gates, pivot, window) {
        let picked = gather(gates, pivot, &q);
        // map the set onto database wires, padding with unused host wires
        let mut wires: Vec<usize> = q.iter().copied().collect();
        for w in 0..host_n {
            if wires.len() == db.n {
                break;
            }
            if !q.contains(&w) {
                wires.push(w);
            }
        }
        let mut to_db = vec![usize::MAX; host_n];
        for (i, &w) in wires.iter().enumerate() {
            to_db[w] = i;
        }
        let fragment = Circuit::with_gates(
            db.n,
            picked.iter().map(|&j| gates[j].relabeled(&to_db)).collect(),
        );
        let Ok(old_cost) = fragment.cost(model) else { continue };
        if old_cost == 0 {
            continue;
        }
        let tab = SymplecticTableau::from_circuit(&fragment).unwrap();
        let res = match synthesize(db, &tab) {
            Ok(r) => r,
            Err(SynthError::NotCovered { .. }) => continue,
            Err(_) => continue,
        };
        debug_assert!(res.circuit.relabel.is_none());
        if (res.cost as u64) < old_cost {
            let replacement: Vec<Gate> =
                res.circuit.gates.iter().map(|g| g.relabeled(&wires)).collect();
            let picked_set: BTreeSet<usize> = picked.iter().copied().collect();
            let mut out = Vec::with_capacity(gates.len());
            for j in 0..pivot {
                if !picked_set.contains(&j) {
                    out.push(gates[j]);
                }
            }
            out.extend(replacement);
            for j in pivot + 1..gates.len() {
                if !picked_set.contains(&j) {
                    out.push(gates[j]);
                }
            }
            return Some(out);
        }
    }
    None
}

/// Repeatedly re-synthesize gathered fragments until no strictly cheaper
/// replacement exists anywhere.
pub fn optimize(
    c: &Circuit,
    db: &Database,
) -> Result<(Circuit, PeepholeReport), PeepholeError> {
    optimize_windowed(c, db, None)
}

/// [`optimize`] with the gathering window capped below the database size.
pub fn optimize_windowed(
    c: &Circuit,
    db: &Database,
    window: Option<usize>,
) -> Result<(Circuit, PeepholeReport), PeepholeError> {
    if db.linear {
        return Err(PeepholeError::LinearDatabase);
    }
    if db.mode == EquivMode::Independent {
        return Err(PeepholeError::IndependentMode);
    }
    if db.cost_model.metric == Metric::Depth {
        return Err(PeepholeError::DepthMetric);
    }
    if c.n < db.n {
        return Err(PeepholeError::TooFewQubits { circuit: c.n, db: db.n });
    }
    let window = window.unwrap_or(db.n).min(db.n);
    let model = &db.cost_model;
    let cost_before = c.cost(model)?;
    let mut gates = c.gates.clone();
    let mut passes = 0;
    let mut replacements = 0;
    loop {
        passes += 1;
        let mut improved = false;
        let mut i = 0;
        while i < gates.len() {
            if let Some(next) = try_pivot(&gates, c.n, i, db, model, window) {
                gates = next;
                replacements += 1;
                improved = true;
            } else {
                i += 1;
            }
        }
        if !improved {
            break;
        }
    }
    let out = Circuit { n: c.n, gates, relabel: c.relabel.clone() };
    let cost_after = out.cost(model)?;
    let report = PeepholeReport {
        passes,
        replacements,
        gates_before: c.gate_count(),
        gates_after: out.gate_count(),
        cost_before,
        cost_after,
        reduction: if cost_before == 0 {
            0.0
        } else {
            1.0 - cost_after as f64 / cost_before as f64
        },
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::database::BuildOptions;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn commutation_table_is_sound() {
        // every pair the static test accepts must commute as tableaux,
        // exhaustively over all gates on up to four qubits
        let mut gates = Vec::new();
        for a in 0..4usize {
            gates.push(Gate::h(a));
            gates.push(Gate::s(a));
            gates.push(Gate::sdg(a));
            for b in 0..4usize {
                if a != b {
                    gates.push(Gate::cx(a, b));
                    if a < b {
                        gates.push(Gate::cz(a, b));
                        gates.push(Gate::swap(a, b));
                    }
                }
            }
        }
        for g1 in &gates {
            for g2 in &gates {
                if gates_commute(g1, g2) {
                    let ab = SymplecticTableau::identity(4).apply_gate(g1).unwrap();
                    let ab = ab.apply_gate(g2).unwrap();
                    let ba = SymplecticTableau::identity(4).apply_gate(g2).unwrap();
                    let ba = ba.apply_gate(g1).unwrap();
                    assert_eq!(ab, ba, "{g1:?} {g2:?} flagged commuting but do not");
                }
            }
        }
    }

    #[test]
    fn commutation_table_hits_known_pairs() {
        assert!(gates_commute(&Gate::cx(0, 1), &Gate::cx(0, 2)));
        assert!(gates_commute(&Gate::cx(0, 2), &Gate::cx(1, 2)));
        assert!(gates_commute(&Gate::cz(0, 1), &Gate::cz(1, 2)));
        assert!(gates_commute(&Gate::s(0), &Gate::cx(0, 1)));
        assert!(gates_commute(&Gate::cz(0, 1), &Gate::cx(0, 2)));
        assert!(!gates_commute(&Gate::cx(0, 1), &Gate::cx(1, 2)));
        assert!(!gates_commute(&Gate::h(0), &Gate::s(0)));
        assert!(!gates_commute(&Gate::cz(0, 1), &Gate::cx(2, 1)));
    }

    fn db2() -> Database {
        Database::build(
            2,
            EquivMode::Simultaneous,
            false,
            CostModel::gate_count(),
            BuildOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn cancels_adjacent_inverses() {
        let c = parse_circuit("qubits 3\nH 0\nH 0\nCX 1 2\nCX 1 2\nS 1\n").unwrap();
        let (out, report) = optimize(&c, &db2()).unwrap();
        assert_eq!(out.gate_count(), 1);
        assert_eq!(report.cost_after, 1);
        assert_eq!(
            SymplecticTableau::from_circuit(&out).unwrap(),
            SymplecticTableau::from_circuit(&c).unwrap()
        );
    }

    #[test]
    fn gathers_past_blocking_gates() {
        // the two CX 0 1 meet across CX 0 2 (shared control commutes)
        // even though a gate on another wire sits in between
        let c = parse_circuit("qubits 3\nCX 0 1\nCX 0 2\nCX 0 1\n").unwrap();
        let (out, _) = optimize(&c, &db2()).unwrap();
        assert_eq!(out.gate_count(), 1);
        assert_eq!(
            SymplecticTableau::from_circuit(&out).unwrap(),
            SymplecticTableau::from_circuit(&c).unwrap()
        );
    }

    #[test]
    fn preserves_functionality_on_random_circuits() {
        let db = db2();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..25 {
            let n = rng.random_range(2..6usize);
            let mut c = Circuit::new(n);
            for _ in 0..rng.random_range(5..60usize) {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                match rng.random_range(0..3) {
                    0 => c.push(Gate::h(a)),
                    1 => c.push(Gate::s(a)),
                    _ => c.push(Gate::cx(a, b)),
                }
            }
            let before = SymplecticTableau::from_circuit(&c).unwrap();
            let (out, report) = optimize(&c, &db).unwrap();
            assert_eq!(SymplecticTableau::from_circuit(&out).unwrap(), before);
            assert!(report.cost_after <= report.cost_before);
            assert_eq!(out.gate_count() as u64, report.cost_after);
        }
    }

    #[test]
    fn two_qubit_circuits_become_optimal() {
        // with a full 2-qubit database, any 2-qubit circuit collapses to
        // its optimal gate count
        let db = db2();
        let oracle = crate::database::exact_bfs_costs(2, &CostModel::gate_count());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let mut c = Circuit::new(2);
            for _ in 0..rng.random_range(1..40usize) {
                match rng.random_range(0..4) {
                    0 => c.push(Gate::h(rng.random_range(0..2))),
                    1 => c.push(Gate::s(rng.random_range(0..2))),
                    2 => c.push(Gate::cx(0, 1)),
                    _ => c.push(Gate::cx(1, 0)),
                }
            }
            let t = SymplecticTableau::from_circuit(&c).unwrap();
            let (out, _) = optimize(&c, &db).unwrap();
            assert_eq!(out.gate_count(), oracle[&t.cols_u64().to_vec()]);
            assert_eq!(SymplecticTableau::from_circuit(&out).unwrap(), t);
        }
    }

    #[test]
    fn weighted_metric_reduces_cz_count() {
        let db = Database::build(
            2,
            EquivMode::Simultaneous,
            false,
            CostModel::cz_count(),
            BuildOptions::default(),
        )
        .unwrap();
        // CZ 0 1 conjugated by H on 1 is CX 0 1; CX*CX = identity, so the
        // pair of CZs collapses
        let c = parse_circuit("qubits 2\nCZ 0 1\nH 1\nH 1\nCZ 0 1\n").unwrap();
        let (out, report) = optimize(&c, &db).unwrap();
        assert_eq!(report.cost_before, 2);
        assert_eq!(report.cost_after, 0);
        assert_eq!(
            SymplecticTableau::from_circuit(&out).unwrap(),
            SymplecticTableau::from_circuit(&c).unwrap()
        );
    }

    #[test]
    fn rejects_unsupported_configurations() {
        let c = parse_circuit("qubits 1\nH 0\n").unwrap();
        assert!(matches!(
            optimize(&c, &db2()),
            Err(PeepholeError::TooFewQubits { circuit: 1, db: 2 })
        ));
        let depth_db = Database::build(
            2,
            EquivMode::Exact,
            false,
            CostModel::depth(),
            BuildOptions::default(),
        )
        .unwrap();
        let c2 = parse_circuit("qubits 2\nH 0\n").unwrap();
        assert!(matches!(optimize(&c2, &depth_db), Err(PeepholeError::DepthMetric)));
        let indep_db = Database::build(
            2,
            EquivMode::Independent,
            false,
            CostModel::gate_count(),
            BuildOptions::default(),
        )
        .unwrap();
        assert!(matches!(optimize(&c2, &indep_db), Err(PeepholeError::IndependentMode)));
    }
}
