//! Canonical representatives of tableaux under simultaneous or independent
//! renaming of inputs and outputs, and orbit enumeration.
//!
//! The search stores one canonical representative per renaming orbit. A
//! tableau is encoded column-major, each column read as a little-endian
//! `2n`-bit integer, and encodings are compared lexicographically; the
//! orbit minimum is the canonical representative. Permutations are
//! enumerated with Heap's algorithm so each step applies one
//! transposition.

use crate::tableau::{LinearMatrix, SymplecticTableau};

/// Which renaming factors the search space.
///
/// `Simultaneous` applies one permutation to inputs and outputs alike
/// (SWAP gates keep their cost); `Independent` renames inputs and outputs
/// separately (SWAPs become free); `Exact` does not factor at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquivMode {
    Exact,
    Simultaneous,
    Independent,
}

impl EquivMode {
    pub fn id(self) -> u8 {
        match self {
            EquivMode::Exact => 0,
            EquivMode::Simultaneous => 1,
            EquivMode::Independent => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<EquivMode> {
        match id {
            0 => Some(EquivMode::Exact),
            1 => Some(EquivMode::Simultaneous),
            2 => Some(EquivMode::Independent),
            _ => None,
        }
    }
}

/// Fixed-width encoding of the minimal orbit element: `ceil(4n^2/8)` bytes
/// for a full tableau, `ceil(n^2/8)` for a linear matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    pub mode: EquivMode,
    pub n: usize,
    pub linear: bool,
    pub bytes: Vec<u8>,
}

pub fn key_width(n: usize, linear: bool) -> usize {
    if linear {
        (n * n).div_ceil(8)
    } else {
        (4 * n * n).div_ceil(8)
    }
}

/// Pack a sequence of `count` values of `bits` bits each into a byte
/// stream.
fn pack_bits(values: impl Iterator<Item = u128>, count: usize, bits: usize) -> Vec<u8> {
    let total = count * bits;
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0usize;
    for v in values {
        for b in 0..bits {
            if (v >> b) & 1 == 1 {
                let i = pos + b;
                out[i / 8] |= 1 << (i % 8);
            }
        }
        pos += bits;
    }
    out
}

fn unpack_bits(bytes: &[u8], count: usize, bits: usize) -> Vec<u128> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut v = 0u128;
        for b in 0..bits {
            let i = k * bits + b;
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                v |= 1 << b;
            }
        }
        out.push(v);
    }
    out
}

/// Visit all `n!` permutations of `0..n`; each call differs from the
/// previous by the reported transposition (Heap's algorithm). The first
/// visit is the identity with no transposition.
pub fn heap_transpositions(n: usize, mut visit: impl FnMut(Option<(usize, usize)>, &[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(None, &perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            let (a, b) = if i % 2 == 0 { (0, i) } else { (c[i], i) };
            perm.swap(a, b);
            visit(Some((a, b)), &perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    heap_transpositions(n, |_, p| out.push(p.to_vec()));
    out
}

/// Scratch copy of a tableau's columns supporting the transposition moves
/// used during canonicalization. Requires `2n <= 64`.
struct Scratch {
    n: usize,
    cols: Vec<u64>,
}

impl Scratch {
    fn new(t: &SymplecticTableau) -> Scratch {
        Scratch { n: t.n(), cols: t.cols_u64().to_vec() }
    }

    /// Exchange qubits `a` and `b` on inputs and outputs: swap column
    /// pairs and the matching row pairs.
    fn transpose_simultaneous(&mut self, a: usize, b: usize) {
        let n = self.n;
        self.cols.swap(a, b);
        self.cols.swap(n + a, n + b);
        self.swap_rows(a, b);
    }

    /// Exchange row pair `a`/`b` (rows `a`,`b` and `n+a`,`n+b`) in every
    /// column.
    fn swap_rows(&mut self, a: usize, b: usize) {
        let n = self.n;
        for col in &mut self.cols {
            let x = ((*col >> a) ^ (*col >> b)) & 1;
            *col ^= (x << a) | (x << b);
            let z = ((*col >> (n + a)) ^ (*col >> (n + b))) & 1;
            *col ^= (z << (n + a)) | (z << (n + b));
        }
    }
}

/// Canonicalize plus the number of permutations attaining the minimum
/// (the stabilizer order in `Simultaneous` mode, from which the orbit
/// size is `n!/multiplicity`).
pub fn canonicalize_with_multiplicity(
    t: &SymplecticTableau,
    mode: EquivMode,
) -> (CanonicalKey, usize) {
    let n = t.n();
    match mode {
        EquivMode::Exact => {
            let cols: Vec<u128> = t.cols_u64().iter().map(|&c| c as u128).collect();
            (make_key(mode, n, &cols), 1)
        }
        EquivMode::Simultaneous => {
            let mut scratch = Scratch::new(t);
            let mut best: Option<Vec<u64>> = None;
            let mut count = 0usize;
            heap_transpositions(n, |tr, _| {
                if let Some((a, b)) = tr {
                    scratch.transpose_simultaneous(a, b);
                }
                match &best {
                    Some(b) => match scratch.cols.cmp(b) {
                        std::cmp::Ordering::Less => {
                            best = Some(scratch.cols.clone());
                            count = 1;
                        }
                        std::cmp::Ordering::Equal => count += 1,
                        std::cmp::Ordering::Greater => {}
                    },
                    None => {
                        best = Some(scratch.cols.clone());
                        count = 1;
                    }
                }
            });
            let cols: Vec<u128> = best.unwrap().iter().map(|&c| c as u128).collect();
            (make_key(mode, n, &cols), count)
        }
        EquivMode::Independent => {
            // for each row-pair permutation, pack each column pair
            // (k, n+k) into one 4n-bit string, sort ascending, take the
            // minimum over row permutations
            let mut scratch = Scratch::new(t);
            let mut pairs = vec![0u128; n];
            let mut best: Option<Vec<u128>> = None;
            let mut count = 0usize;
            heap_transpositions(n, |tr, _| {
                if let Some((a, b)) = tr {
                    scratch.swap_rows(a, b);
                }
                for k in 0..n {
                    pairs[k] =
                        scratch.cols[k] as u128 | ((scratch.cols[n + k] as u128) << (2 * n));
                }
                pairs.sort_unstable();
                match &best {
                    Some(b) => match pairs.cmp(b) {
                        std::cmp::Ordering::Less => {
                            best = Some(pairs.clone());
                            count = 1;
                        }
                        std::cmp::Ordering::Equal => count += 1,
                        std::cmp::Ordering::Greater => {}
                    },
                    None => {
                        best = Some(pairs.clone());
                        count = 1;
                    }
                }
            });
            let pairs = best.unwrap();
            let bytes = pack_bits(pairs.iter().copied(), n, 4 * n);
            (CanonicalKey { mode, n, linear: false, bytes }, count)
        }
    }
}

fn make_key(mode: EquivMode, n: usize, cols: &[u128]) -> CanonicalKey {
    let bytes = pack_bits(cols.iter().copied(), 2 * n, 2 * n);
    CanonicalKey { mode, n, linear: false, bytes }
}

/// The lexicographically minimal encoding of the tableau's renaming orbit.
pub fn canonicalize(t: &SymplecticTableau, mode: EquivMode) -> CanonicalKey {
    canonicalize_with_multiplicity(t, mode).0
}

/// Rebuild the minimal orbit element a key encodes.
pub fn decode(key: &CanonicalKey) -> SymplecticTableau {
    assert!(!key.linear);
    let n = key.n;
    match key.mode {
        EquivMode::Exact | EquivMode::Simultaneous => {
            let cols = unpack_bits(&key.bytes, 2 * n, 2 * n);
            let cols: Vec<u64> = cols.into_iter().map(|c| c as u64).collect();
            SymplecticTableau::from_cols_u64(n, &cols)
        }
        EquivMode::Independent => {
            let pairs = unpack_bits(&key.bytes, n, 4 * n);
            let mask = (1u128 << (2 * n)) - 1;
            let mut cols = vec![0u64; 2 * n];
            for (k, p) in pairs.iter().enumerate() {
                cols[k] = (p & mask) as u64;
                cols[n + k] = (p >> (2 * n)) as u64;
            }
            SymplecticTableau::from_cols_u64(n, &cols)
        }
    }
}

/// All distinct members of the renaming orbit.
pub fn orbit(t: &SymplecticTableau, mode: EquivMode) -> Vec<SymplecticTableau> {
    orbit_with_perms(t, mode).into_iter().map(|(m, _, _)| m).collect()
}

/// Orbit members with the (row, column) pair permutations producing them:
/// member = `t.rename_rows(sigma).rename_cols(tau)`. In `Simultaneous`
/// mode `sigma == tau`; in `Exact` mode the orbit is `{t}`.
pub fn orbit_with_perms(
    t: &SymplecticTableau,
    mode: EquivMode,
) -> Vec<(SymplecticTableau, Vec<usize>, Vec<usize>)> {
    let n = t.n();
    let idperm: Vec<usize> = (0..n).collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    match mode {
        EquivMode::Exact => {
            out.push((t.clone(), idperm.clone(), idperm));
        }
        EquivMode::Simultaneous => {
            for p in all_permutations(n) {
                let m = t.rename_simultaneous(&p);
                if seen.insert(m.cols_u64().to_vec()) {
                    out.push((m, p.clone(), p));
                }
            }
        }
        EquivMode::Independent => {
            let perms = all_permutations(n);
            for sigma in &perms {
                let rowed = t.rename_rows(sigma);
                for tau in &perms {
                    let m = rowed.rename_cols(tau);
                    if seen.insert(m.cols_u64().to_vec()) {
                        out.push((m, sigma.clone(), tau.clone()));
                    }
                }
            }
        }
    }
    out
}

pub fn orbit_size(t: &SymplecticTableau, mode: EquivMode) -> usize {
    match mode {
        EquivMode::Exact => 1,
        EquivMode::Simultaneous => {
            let n = t.n();
            let (_, mult) = canonicalize_with_multiplicity(t, mode);
            factorial(n) / mult
        }
        EquivMode::Independent => orbit_with_perms(t, mode).len(),
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Canonical key of an `n x n` invertible matrix under simultaneous
/// row+column permutation, with stabilizer multiplicity.
pub fn canonicalize_linear_with_multiplicity(a: &LinearMatrix) -> (CanonicalKey, usize) {
    let n = a.n;
    let mut m = a.clone();
    let mut best: Option<Vec<u64>> = None;
    let mut count = 0usize;
    heap_transpositions(n, |tr, _| {
        if let Some((x, y)) = tr {
            m.swap_qubits_mut(x, y);
        }
        match &best {
            Some(b) => match m.cols.cmp(b) {
                std::cmp::Ordering::Less => {
                    best = Some(m.cols.clone());
                    count = 1;
                }
                std::cmp::Ordering::Equal => count += 1,
                std::cmp::Ordering::Greater => {}
            },
            None => {
                best = Some(m.cols.clone());
                count = 1;
            }
        }
    });
    let cols = best.unwrap();
    let bytes = pack_bits(cols.iter().map(|&c| c as u128), n, n);
    (CanonicalKey { mode: EquivMode::Simultaneous, n, linear: true, bytes }, count)
}

pub fn canonicalize_linear(a: &LinearMatrix) -> CanonicalKey {
    canonicalize_linear_with_multiplicity(a).0
}

/// Exact-mode key of a linear matrix (no renaming factored out).
pub fn encode_linear_exact(a: &LinearMatrix) -> CanonicalKey {
    let bytes = pack_bits(a.cols.iter().map(|&c| c as u128), a.n, a.n);
    CanonicalKey { mode: EquivMode::Exact, n: a.n, linear: true, bytes }
}

pub fn decode_linear(key: &CanonicalKey) -> LinearMatrix {
    assert!(key.linear);
    let cols = unpack_bits(&key.bytes, key.n, key.n);
    LinearMatrix { n: key.n, cols: cols.into_iter().map(|c| c as u64).collect() }
}

pub fn orbit_linear(a: &LinearMatrix) -> Vec<LinearMatrix> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for p in all_permutations(a.n) {
        let m = a.rename_simultaneous(&p);
        if seen.insert(m.cols.clone()) {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_circuit, Gate};
    use crate::tableau::SymplecticTableau;

    fn t_of(text: &str) -> SymplecticTableau {
        SymplecticTableau::from_circuit(&parse_circuit(text).unwrap()).unwrap()
    }

    const MODES: [EquivMode; 3] =
        [EquivMode::Exact, EquivMode::Simultaneous, EquivMode::Independent];

    #[test]
    fn identity_is_its_own_representative() {
        for n in 1..=5 {
            let id = SymplecticTableau::identity(n);
            for mode in MODES {
                let key = canonicalize(&id, mode);
                assert_eq!(decode(&key), id, "n={n} {mode:?}");
            }
        }
    }

    #[test]
    fn hadamards_on_different_qubits_share_simultaneous_key() {
        let a = t_of("qubits 2\nH 0\n");
        let b = t_of("qubits 2\nH 1\n");
        assert_eq!(
            canonicalize(&a, EquivMode::Simultaneous),
            canonicalize(&b, EquivMode::Simultaneous)
        );
        assert_ne!(canonicalize(&a, EquivMode::Exact), canonicalize(&b, EquivMode::Exact));
    }

    #[test]
    fn swap_is_identity_under_independent_renaming_only() {
        let sw = t_of("qubits 2\nSWAP 0 1\n");
        let id = SymplecticTableau::identity(2);
        assert_eq!(
            canonicalize(&sw, EquivMode::Independent),
            canonicalize(&id, EquivMode::Independent)
        );
        assert_ne!(
            canonicalize(&sw, EquivMode::Simultaneous),
            canonicalize(&id, EquivMode::Simultaneous)
        );
    }

    #[test]
    fn orbit_of_identity_is_singleton() {
        let id = SymplecticTableau::identity(3);
        assert_eq!(orbit(&id, EquivMode::Simultaneous), vec![id.clone()]);
        // independently renaming inputs and outputs sweeps identity
        // through every permutation tableau
        assert_eq!(orbit(&id, EquivMode::Independent).len(), factorial(3));
    }

    #[test]
    fn hadamard_orbit_size_three_qubits() {
        let h = t_of("qubits 3\nH 0\n");
        assert_eq!(orbit(&h, EquivMode::Simultaneous).len(), 3);
        assert_eq!(orbit_size(&h, EquivMode::Simultaneous), 3);
    }

    #[test]
    fn orbit_members_share_the_key() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let n = rng.random_range(1..4usize);
            let t = random_tableau(&mut rng, n);
            for mode in MODES {
                let key = canonicalize(&t, mode);
                for m in orbit(&t, mode) {
                    assert_eq!(canonicalize(&m, mode), key, "{mode:?}");
                }
            }
        }
    }

    fn random_tableau(rng: &mut impl rand::Rng, n: usize) -> SymplecticTableau {
        let mut t = SymplecticTableau::identity(n);
        for _ in 0..rng.random_range(0..25usize) {
            let a = rng.random_range(0..n);
            if n == 1 || rng.random_bool(0.4) {
                if rng.random_bool(0.5) {
                    t.apply_gate_mut(&Gate::h(a));
                } else {
                    t.apply_gate_mut(&Gate::s(a));
                }
            } else {
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                match rng.random_range(0..3) {
                    0 => t.apply_gate_mut(&Gate::cx(a, b)),
                    1 => t.apply_gate_mut(&Gate::cz(a, b)),
                    _ => t.apply_gate_mut(&Gate::swap(a, b)),
                }
            }
        }
        t
    }

    #[test]
    fn idempotence_and_permutation_invariance() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..60 {
            let n = rng.random_range(1..6usize);
            let t = random_tableau(&mut rng, n);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for mode in MODES {
                let key = canonicalize(&t, mode);
                assert_eq!(canonicalize(&decode(&key), mode), key, "idempotence {mode:?}");
                if mode != EquivMode::Exact {
                    let renamed = t.rename_simultaneous(&perm);
                    assert_eq!(canonicalize(&renamed, mode), key, "invariance {mode:?}");
                }
                if mode == EquivMode::Independent {
                    let mut perm2: Vec<usize> = (0..n).collect();
                    perm2.shuffle(&mut rng);
                    let renamed = t.rename_rows(&perm).rename_cols(&perm2);
                    assert_eq!(canonicalize(&renamed, mode), key, "independent invariance");
                }
            }
        }
    }

    #[test]
    fn orbit_sizes_divide_group_orders() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let n = rng.random_range(1..5usize);
            let t = random_tableau(&mut rng, n);
            let s = orbit(&t, EquivMode::Simultaneous).len();
            assert_eq!(factorial(n) % s, 0);
            assert_eq!(s, orbit_size(&t, EquivMode::Simultaneous));
            let i = orbit(&t, EquivMode::Independent).len();
            assert_eq!(factorial(n).pow(2) % i, 0);
        }
    }

    #[test]
    fn orbit_perms_reproduce_members() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let n = rng.random_range(2..4usize);
            let t = random_tableau(&mut rng, n);
            for mode in MODES {
                for (m, sigma, tau) in orbit_with_perms(&t, mode) {
                    assert_eq!(t.rename_rows(&sigma).rename_cols(&tau), m);
                }
            }
        }
    }

    #[test]
    fn relabeled_circuit_matches_renamed_tableau() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        for _ in 0..40 {
            let n = rng.random_range(2..5usize);
            let mut c = crate::circuit::Circuit::new(n);
            for _ in 0..rng.random_range(0..12usize) {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                match rng.random_range(0..4) {
                    0 => c.push(Gate::h(a)),
                    1 => c.push(Gate::s(a)),
                    2 => c.push(Gate::cx(a, b)),
                    _ => c.push(Gate::cz(a, b)),
                }
            }
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let lhs = SymplecticTableau::from_circuit(&c.relabeled(&perm)).unwrap();
            let rhs = SymplecticTableau::from_circuit(&c).unwrap().rename_simultaneous(&perm);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn linear_cnot_direction_shares_key() {
        let a = LinearMatrix::identity(2).apply_cnot(0, 1);
        let b = LinearMatrix::identity(2).apply_cnot(1, 0);
        assert_eq!(canonicalize_linear(&a), canonicalize_linear(&b));
        assert_eq!(decode_linear(&canonicalize_linear(&a)).n, 2);
        let id = LinearMatrix::identity(3);
        assert_eq!(decode_linear(&canonicalize_linear(&id)), id);
    }

    #[test]
    fn gl3_orbit_partition() {
        // enumerate GL(3,2): 168 elements; orbit sizes under simultaneous
        // renaming must sum back to 168
        let mut elements = Vec::new();
        for bits in 0u32..512 {
            let cols: Vec<u64> =
                (0..3).map(|c| ((bits >> (3 * c)) & 0b111) as u64).collect();
            let m = LinearMatrix { n: 3, cols };
            if m.is_invertible() {
                elements.push(m);
            }
        }
        assert_eq!(elements.len(), 168);
        let mut by_key: std::collections::HashMap<CanonicalKey, usize> =
            std::collections::HashMap::new();
        for m in &elements {
            *by_key.entry(canonicalize_linear(m)).or_insert(0) += 1;
        }
        let total: usize = by_key.values().sum();
        assert_eq!(total, 168);
        // each orbit size from multiplicity agrees with the class count
        for m in &elements {
            let (key, mult) = canonicalize_linear_with_multiplicity(m);
            assert_eq!(factorial(3) / mult, by_key[&key]);
        }
    }

    #[test]
    fn independent_multiplicity_vs_exhaustive_orbit() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for _ in 0..25 {
            let n = rng.random_range(1..4usize);
            let t = random_tableau(&mut rng, n);
            assert_eq!(
                orbit_size(&t, EquivMode::Independent),
                orbit(&t, EquivMode::Independent).len()
            );
        }
    }
}
