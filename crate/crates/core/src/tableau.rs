//! Bit-packed binary symplectic representation of Clifford unitaries.
//!
//! A Clifford circuit on `n` qubits, with signs dropped, is a `2n x 2n`
//! matrix over GF(2). Row `r < n` of the matrix is the X-component part of
//! the images of the basis Paulis; rows `n..2n` are the Z-components.
//! Column `j < n` encodes the image of `X_j` under conjugation, column
//! `n + j` the image of `Z_j`, with the Pauli encoding
//! `I ~ (0|0)`, `X ~ (1|0)`, `Z ~ (0|1)`, `Y ~ (1|1)`.
//!
//! Appending a gate to a circuit right-multiplies its tableau by the gate
//! matrix; computationally that is one or two column XOR/swap operations.
//! Each column is stored as `ceil(2n/64)` little-endian machine words
//! (bit `r` of a column is matrix row `r`).

use crate::circuit::{Circuit, Gate, GateKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableauError {
    #[error("gate index out of range")]
    IndexOutOfRange,
    #[error("qubit count mismatch")]
    DimensionMismatch,
    #[error("tableau is not block-diagonal linear")]
    NotLinear,
    #[error("malformed tableau text, line {line}")]
    MalformedText { line: usize },
}

/// `2n x 2n` binary symplectic matrix, bit-packed column-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymplecticTableau {
    n: usize,
    stride: usize,
    words: Vec<u64>,
}

impl SymplecticTableau {
    /// The tableau of the empty circuit.
    pub fn identity(n: usize) -> SymplecticTableau {
        assert!(n >= 1);
        let stride = (2 * n).div_ceil(64);
        let mut t = SymplecticTableau { n, stride, words: vec![0; 2 * n * stride] };
        for r in 0..2 * n {
            t.set_bit(r, r, true);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn bit(&self, row: usize, col: usize) -> bool {
        (self.words[col * self.stride + row / 64] >> (row % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, row: usize, col: usize, v: bool) {
        let w = &mut self.words[col * self.stride + row / 64];
        let mask = 1u64 << (row % 64);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Column words, little-endian bit order.
    #[inline]
    pub fn col(&self, c: usize) -> &[u64] {
        &self.words[c * self.stride..(c + 1) * self.stride]
    }

    /// Column as a single word; requires `2n <= 64`.
    #[inline]
    pub fn col_u64(&self, c: usize) -> u64 {
        debug_assert_eq!(self.stride, 1);
        self.words[c]
    }

    /// All columns as single words; requires `2n <= 64`.
    pub fn cols_u64(&self) -> &[u64] {
        assert_eq!(self.stride, 1, "tableau too wide for single-word columns");
        &self.words
    }

    /// Row as a single word (the image of basis Pauli `r`); requires
    /// `2n <= 64`.
    pub fn row_u64(&self, r: usize) -> u64 {
        debug_assert_eq!(self.stride, 1);
        (0..2 * self.n).fold(0, |acc, c| acc | (((self.words[c] >> r) & 1) << c))
    }

    pub fn from_cols_u64(n: usize, cols: &[u64]) -> SymplecticTableau {
        assert!(2 * n <= 64 && cols.len() == 2 * n);
        SymplecticTableau { n, stride: 1, words: cols.to_vec() }
    }

    #[inline]
    fn xor_col(&mut self, dst: usize, src: usize) {
        let (dst, src) = (dst * self.stride, src * self.stride);
        for k in 0..self.stride {
            let v = self.words[src + k];
            self.words[dst + k] ^= v;
        }
    }

    #[inline]
    fn swap_col(&mut self, a: usize, b: usize) {
        let (a, b) = (a * self.stride, b * self.stride);
        for k in 0..self.stride {
            self.words.swap(a + k, b + k);
        }
    }

    /// In-place gate application (right multiplication by the gate matrix).
    pub fn apply_gate_mut(&mut self, g: &Gate) {
        let n = self.n;
        debug_assert!(g.max_qubit() < n, "gate index out of range");
        match g.kind {
            GateKind::S | GateKind::Sdg => {
                let q = g.qubits[0];
                self.xor_col(n + q, q);
            }
            GateKind::H => {
                let q = g.qubits[0];
                self.swap_col(q, n + q);
            }
            GateKind::Cx => {
                let [c, t] = g.qubits;
                self.xor_col(t, c);
                self.xor_col(n + c, n + t);
            }
            GateKind::Cz => {
                let [a, b] = g.qubits;
                self.xor_col(n + a, b);
                self.xor_col(n + b, a);
            }
            GateKind::Swap => {
                let [a, b] = g.qubits;
                self.swap_col(a, b);
                self.swap_col(n + a, n + b);
            }
        }
        debug_assert!(self.is_symplectic());
    }

    pub fn apply_gate(&self, g: &Gate) -> Result<SymplecticTableau, TableauError> {
        if g.max_qubit() >= self.n {
            return Err(TableauError::IndexOutOfRange);
        }
        let mut t = self.clone();
        t.apply_gate_mut(g);
        Ok(t)
    }

    /// The gate's own symplectic matrix.
    pub fn gate_matrix(n: usize, g: &Gate) -> SymplecticTableau {
        let mut t = SymplecticTableau::identity(n);
        t.apply_gate_mut(g);
        t
    }

    /// GF(2) matrix product `self * other`.
    pub fn compose(&self, other: &SymplecticTableau) -> Result<SymplecticTableau, TableauError> {
        if self.n != other.n {
            return Err(TableauError::DimensionMismatch);
        }
        let n2 = 2 * self.n;
        let mut out = SymplecticTableau {
            n: self.n,
            stride: self.stride,
            words: vec![0; self.words.len()],
        };
        for j in 0..n2 {
            for i in 0..n2 {
                if other.bit(i, j) {
                    for k in 0..self.stride {
                        let v = self.words[i * self.stride + k];
                        out.words[j * self.stride + k] ^= v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// GF(2) inverse. Symplectic matrices satisfy `M^-1 = J M^T J` with
    /// `J = [[0, I], [I, 0]]`, which is a transpose plus block swaps.
    pub fn inverse(&self) -> SymplecticTableau {
        let n = self.n;
        let mut out = SymplecticTableau {
            n,
            stride: self.stride,
            words: vec![0; self.words.len()],
        };
        for r in 0..2 * n {
            for c in 0..2 * n {
                if self.bit((c + n) % (2 * n), (r + n) % (2 * n)) {
                    out.set_bit(r, c, true);
                }
            }
        }
        out
    }

    /// Symplectic product of columns `a` and `b`.
    fn col_sp(&self, a: usize, b: usize) -> bool {
        let n = self.n;
        let mut acc = false;
        for r in 0..n {
            acc ^= (self.bit(r, a) & self.bit(n + r, b)) ^ (self.bit(n + r, a) & self.bit(r, b));
        }
        acc
    }

    /// Block conditions `A^T C = C^T A`, `B^T D = D^T B`,
    /// `A^T D - C^T B = I`, expressed as `M^T J M = J` on column pairs.
    pub fn is_symplectic(&self) -> bool {
        let n2 = 2 * self.n;
        for i in 0..n2 {
            for j in i..n2 {
                let expect = j == i + self.n;
                if self.col_sp(i, j) != expect {
                    return false;
                }
            }
        }
        true
    }

    /// Fold of `apply_gate` over the gate list, then the relabeling
    /// annotation as a trailing SWAP network.
    pub fn from_circuit(c: &Circuit) -> Result<SymplecticTableau, TableauError> {
        let mut t = SymplecticTableau::identity(c.n);
        for g in &c.gates {
            if g.max_qubit() >= c.n {
                return Err(TableauError::IndexOutOfRange);
            }
            t.apply_gate_mut(g);
        }
        if let Some(p) = &c.relabel {
            for (a, b) in perm_to_swaps(p) {
                t.apply_gate_mut(&Gate::swap(a, b));
            }
        }
        Ok(t)
    }

    /// Simultaneous renaming: conjugation by the permutation matrix of
    /// `perm` (qubit `q` becomes `perm[q]` on inputs and outputs alike).
    pub fn rename_simultaneous(&self, perm: &[usize]) -> SymplecticTableau {
        let n = self.n;
        let f = |i: usize| if i < n { perm[i] } else { n + perm[i - n] };
        let mut out = SymplecticTableau {
            n,
            stride: self.stride,
            words: vec![0; self.words.len()],
        };
        for c in 0..2 * n {
            for r in 0..2 * n {
                if self.bit(r, c) {
                    out.set_bit(f(r), f(c), true);
                }
            }
        }
        out
    }

    /// Row-pair permutation (left multiplication by a permutation matrix).
    pub fn rename_rows(&self, perm: &[usize]) -> SymplecticTableau {
        let n = self.n;
        let f = |i: usize| if i < n { perm[i] } else { n + perm[i - n] };
        let mut out = SymplecticTableau {
            n,
            stride: self.stride,
            words: vec![0; self.words.len()],
        };
        for c in 0..2 * n {
            for r in 0..2 * n {
                if self.bit(r, c) {
                    out.set_bit(f(r), c, true);
                }
            }
        }
        out
    }

    /// Column-pair permutation (right multiplication by a permutation
    /// matrix).
    pub fn rename_cols(&self, perm: &[usize]) -> SymplecticTableau {
        let n = self.n;
        let mut out = SymplecticTableau {
            n,
            stride: self.stride,
            words: vec![0; self.words.len()],
        };
        for c in 0..2 * n {
            let fc = if c < n { perm[c] } else { n + perm[c - n] };
            for k in 0..self.stride {
                out.words[fc * self.stride + k] = self.words[c * self.stride + k];
            }
        }
        out
    }

    /// True iff the tableau is a (two-sided) qubit permutation matrix.
    ///
    /// Returns the permutation `p` such that the tableau equals
    /// `from_circuit` of an empty circuit with relabel annotation `p`.
    pub fn is_permutation(&self) -> Option<Vec<usize>> {
        let n = self.n;
        let mut perm = vec![usize::MAX; n];
        for q in 0..n {
            // column q must be e_r, column n+q must be e_{n+r}
            let mut src = None;
            for r in 0..2 * n {
                if self.bit(r, q) {
                    if src.is_some() || r >= n {
                        return None;
                    }
                    src = Some(r);
                }
            }
            let r = src?;
            for row in 0..2 * n {
                let expect = row == n + r;
                if self.bit(row, n + q) != expect {
                    return None;
                }
            }
            if perm[r] != usize::MAX {
                return None;
            }
            perm[r] = q;
        }
        Some(perm)
    }

    pub fn is_identity(&self) -> bool {
        let n2 = 2 * self.n;
        (0..n2).all(|c| (0..n2).all(|r| self.bit(r, c) == (r == c)))
    }

    /// Extract the linear block; errors unless `B` and `C` blocks are zero.
    pub fn linear_part(&self) -> Result<LinearMatrix, TableauError> {
        let n = self.n;
        for r in 0..n {
            for c in 0..n {
                if self.bit(n + r, c) || self.bit(r, n + c) {
                    return Err(TableauError::NotLinear);
                }
            }
        }
        let mut a = LinearMatrix::identity(n);
        for c in 0..n {
            let mut col = 0u64;
            for r in 0..n {
                if self.bit(r, c) {
                    col |= 1 << r;
                }
            }
            a.cols[c] = col;
        }
        Ok(a)
    }

    /// Text form: `n <n>` then `2n` rows of `2n` characters.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for r in 0..2 * self.n {
            for c in 0..2 * self.n {
                out.push(if self.bit(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<SymplecticTableau, TableauError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(TableauError::MalformedText { line: 0 })?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("n") {
            return Err(TableauError::MalformedText { line: hline });
        }
        let n: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or(TableauError::MalformedText { line: hline })?;
        let mut t = SymplecticTableau::identity(n);
        t.words.iter_mut().for_each(|w| *w = 0);
        for r in 0..2 * n {
            let (lno, row) = lines.next().ok_or(TableauError::MalformedText { line: 0 })?;
            if row.len() != 2 * n {
                return Err(TableauError::MalformedText { line: lno });
            }
            for (c, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => t.set_bit(r, c, true),
                    _ => return Err(TableauError::MalformedText { line: lno }),
                }
            }
        }
        Ok(t)
    }
}

/// Apply a gate to a Pauli row vector (image under conjugation, i.e. right
/// multiplication of the row by the gate matrix). The row holds `2n` bits:
/// X-components at `0..n`, Z-components at `n..2n`.
pub fn apply_gate_to_row(row: &mut [u64], n: usize, g: &Gate) {
    let get = |row: &[u64], i: usize| (row[i / 64] >> (i % 64)) & 1 == 1;
    let flip = |row: &mut [u64], i: usize| row[i / 64] ^= 1 << (i % 64);
    let swap = |row: &mut [u64], i: usize, j: usize| {
        let (a, b) = (get(row, i), get(row, j));
        if a != b {
            flip(row, i);
            flip(row, j);
        }
    };
    match g.kind {
        GateKind::S | GateKind::Sdg => {
            let q = g.qubits[0];
            if get(row, q) {
                flip(row, n + q);
            }
        }
        GateKind::H => {
            let q = g.qubits[0];
            swap(row, q, n + q);
        }
        GateKind::Cx => {
            let [c, t] = g.qubits;
            if get(row, c) {
                flip(row, t);
            }
            if get(row, n + t) {
                flip(row, n + c);
            }
        }
        GateKind::Cz => {
            let [a, b] = g.qubits;
            if get(row, b) {
                flip(row, n + a);
            }
            if get(row, a) {
                flip(row, n + b);
            }
        }
        GateKind::Swap => {
            let [a, b] = g.qubits;
            swap(row, a, b);
            swap(row, n + a, n + b);
        }
    }
}

/// SWAP gate sequence realizing a wire permutation: applying the returned
/// swaps left to right moves the content of wire `i` to wire `perm[i]`.
pub fn perm_to_swaps(perm: &[usize]) -> Vec<(usize, usize)> {
    let mut pos: Vec<usize> = perm.to_vec(); // pos[i] = where wire i's content currently must go
    let mut swaps = Vec::new();
    // selection: put the right content on wire j for j = 0.. by swapping
    let n = perm.len();
    let mut content: Vec<usize> = (0..n).collect(); // content[w] = original wire index at w
    for target in 0..n {
        // find the wire currently holding the content destined for `target`
        let src = (0..n).find(|&w| pos[content[w]] == target).unwrap();
        if src != target {
            swaps.push((src, target));
            content.swap(src, target);
        }
    }
    let _ = pos.pop();
    swaps
}

/// `n x n` invertible GF(2) matrix, bit-packed columns; the tableau of a
/// CNOT-only circuit restricted to its top-left block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearMatrix {
    pub n: usize,
    pub cols: Vec<u64>,
}

impl LinearMatrix {
    pub fn identity(n: usize) -> LinearMatrix {
        assert!(n >= 1 && n <= 64);
        LinearMatrix { n, cols: (0..n).map(|i| 1u64 << i).collect() }
    }

    #[inline]
    pub fn bit(&self, row: usize, col: usize) -> bool {
        (self.cols[col] >> row) & 1 == 1
    }

    /// CNOT(control `c`, target `t`): column `t` += column `c`.
    pub fn apply_cnot_mut(&mut self, c: usize, t: usize) {
        let v = self.cols[c];
        self.cols[t] ^= v;
    }

    pub fn apply_cnot(&self, c: usize, t: usize) -> LinearMatrix {
        let mut m = self.clone();
        m.apply_cnot_mut(c, t);
        m
    }

    pub fn swap_qubits_mut(&mut self, a: usize, b: usize) {
        self.cols.swap(a, b);
        for col in &mut self.cols {
            let x = ((*col >> a) ^ (*col >> b)) & 1;
            *col ^= (x << a) | (x << b);
        }
    }

    pub fn is_invertible(&self) -> bool {
        let mut cols = self.cols.clone();
        for r in 0..self.n {
            let pivot = (r..self.n).find(|&c| (cols[c] >> r) & 1 == 1);
            let Some(p) = pivot else { return false };
            cols.swap(r, p);
            for c in 0..self.n {
                if c != r && (cols[c] >> r) & 1 == 1 {
                    cols[c] ^= cols[r];
                }
            }
        }
        true
    }

    /// Inverse transpose, i.e. the `B` block of the full tableau
    /// (`A^T B = I` determines `B` given `A`).
    pub fn inverse_transpose(&self) -> LinearMatrix {
        // invert by Gauss-Jordan on columns, then transpose
        let n = self.n;
        let mut a = self.cols.clone();
        let mut inv = LinearMatrix::identity(n).cols;
        for r in 0..n {
            let p = (r..n).find(|&c| (a[c] >> r) & 1 == 1).expect("matrix not invertible");
            a.swap(r, p);
            inv.swap(r, p);
            for c in 0..n {
                if c != r && (a[c] >> r) & 1 == 1 {
                    a[c] ^= a[r];
                    inv[c] ^= inv[r];
                }
            }
        }
        // `inv` holds A^-1 (column-major); B = (A^-1)^T = A^-T
        let mut out = LinearMatrix::identity(n);
        for c in 0..n {
            let mut col = 0u64;
            for r in 0..n {
                if (inv[r] >> c) & 1 == 1 {
                    col |= 1 << r;
                }
            }
            out.cols[c] = col;
        }
        out
    }

    /// Embed as the block-diagonal tableau `diag(A, A^-T)`.
    pub fn to_tableau(&self) -> SymplecticTableau {
        let n = self.n;
        let b = self.inverse_transpose();
        let mut t = SymplecticTableau::identity(n);
        t.words.iter_mut().for_each(|w| *w = 0);
        for c in 0..n {
            for r in 0..n {
                if self.bit(r, c) {
                    t.set_bit(r, c, true);
                }
                if b.bit(r, c) {
                    t.set_bit(n + r, n + c, true);
                }
            }
        }
        t
    }

    pub fn rename_simultaneous(&self, perm: &[usize]) -> LinearMatrix {
        let n = self.n;
        let mut out = LinearMatrix { n, cols: vec![0; n] };
        for c in 0..n {
            for r in 0..n {
                if self.bit(r, c) {
                    out.cols[perm[c]] |= 1 << perm[r];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn t_of(text: &str) -> SymplecticTableau {
        SymplecticTableau::from_circuit(&parse_circuit(text).unwrap()).unwrap()
    }

    #[test]
    fn identity_matrices() {
        let t = SymplecticTableau::identity(1);
        assert_eq!(t.to_text(), "n 1\n10\n01\n");
        let t2 = SymplecticTableau::identity(2);
        assert!(t2.is_identity());
        for n in 1..=6 {
            assert!(SymplecticTableau::identity(n).is_symplectic());
        }
    }

    #[test]
    fn hadamard_rule() {
        // rows read: X -> Z, Z -> X
        let t = t_of("qubits 1\nH 0\n");
        assert_eq!(t.to_text(), "n 1\n01\n10\n");
    }

    #[test]
    fn phase_rule_matches_pxp_dagger() {
        // rows: X -> Y, Z -> Z
        let t = t_of("qubits 1\nS 0\n");
        assert_eq!(t.to_text(), "n 1\n11\n01\n");
        // row 0 = image of X = (1|1) = Y
        assert!(t.bit(0, 0) && t.bit(0, 1));
        // row 1 = image of Z = (0|1) = Z
        assert!(!t.bit(1, 0) && t.bit(1, 1));
    }

    #[test]
    fn cnot_rule() {
        // X ⊗ I -> X ⊗ X and I ⊗ Z -> Z ⊗ Z
        let t = t_of("qubits 2\nCX 0 1\n");
        // columns (0-based): col0 = e0, col1 = e0+e1, col2 = e2+e3, col3 = e3
        let cols: Vec<u64> = (0..4).map(|c| t.col_u64(c)).collect();
        assert_eq!(cols, vec![0b0001, 0b0011, 0b1100, 0b1000]);
        // row 0: X_0 -> X_0 X_1
        assert!(t.bit(0, 0) && t.bit(0, 1) && !t.bit(0, 2) && !t.bit(0, 3));
        // row 3: Z_1 -> Z_0 Z_1
        assert!(t.bit(3, 2) && t.bit(3, 3) && !t.bit(3, 0));
    }

    #[test]
    fn cz_equals_h_cx_h() {
        let a = t_of("qubits 2\nH 1\nCX 0 1\nH 1\n");
        let b = t_of("qubits 2\nCZ 0 1\n");
        assert_eq!(a, b);
        let a = t_of("qubits 3\nH 0\nCX 2 0\nH 0\n");
        let b = t_of("qubits 3\nCZ 0 2\n");
        assert_eq!(a, b);
    }

    #[test]
    fn swap_equals_three_cnots() {
        let a = t_of("qubits 2\nCX 0 1\nCX 1 0\nCX 0 1\n");
        let b = t_of("qubits 2\nSWAP 0 1\n");
        assert_eq!(a, b);
    }

    #[test]
    fn compose_basics() {
        let h = SymplecticTableau::gate_matrix(1, &Gate::h(0));
        let id = SymplecticTableau::identity(1);
        assert_eq!(h.compose(&id).unwrap(), h);
        assert_eq!(h.compose(&h).unwrap(), id);
        // P^2 = Z is a Pauli, dropped: [[1,1],[0,1]]^2 = I over GF(2)
        let p = SymplecticTableau::gate_matrix(1, &Gate::s(0));
        assert_eq!(p.compose(&p).unwrap(), id);
    }

    #[test]
    fn compose_matches_circuit_concatenation() {
        let c1 = parse_circuit("qubits 3\nH 0\nCX 0 1\nS 2\n").unwrap();
        let c2 = parse_circuit("qubits 3\nCZ 1 2\nH 2\nCX 2 0\n").unwrap();
        let t1 = SymplecticTableau::from_circuit(&c1).unwrap();
        let t2 = SymplecticTableau::from_circuit(&c2).unwrap();
        let mut cat = c1.clone();
        cat.gates.extend(c2.gates.iter().cloned());
        let tcat = SymplecticTableau::from_circuit(&cat).unwrap();
        assert_eq!(t1.compose(&t2).unwrap(), tcat);
    }

    #[test]
    fn inverse_basics() {
        assert_eq!(SymplecticTableau::identity(3).inverse(), SymplecticTableau::identity(3));
        let cx = SymplecticTableau::gate_matrix(2, &Gate::cx(0, 1));
        assert_eq!(cx.inverse(), cx); // involution
        let t = t_of("qubits 3\nH 0\nS 1\nCX 0 2\nCZ 1 2\nS 0\n");
        assert!(t.compose(&t.inverse()).unwrap().is_identity());
        assert!(t.inverse().compose(&t).unwrap().is_identity());
    }

    #[test]
    fn hph_tableau() {
        // [H, S, H] on one qubit -> [[1,0],[1,1]] (three column ops by hand)
        let t = t_of("qubits 1\nH 0\nS 0\nH 0\n");
        assert_eq!(t.to_text(), "n 1\n10\n11\n");
    }

    #[test]
    fn gate_matrices_are_involutions() {
        for n in 1..=4usize {
            let mut gates = Vec::new();
            for q in 0..n {
                gates.push(Gate::h(q));
                gates.push(Gate::s(q));
                gates.push(Gate::sdg(q));
            }
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        gates.push(Gate::cx(a, b));
                        if a < b {
                            gates.push(Gate::cz(a, b));
                            gates.push(Gate::swap(a, b));
                        }
                    }
                }
            }
            for g in gates {
                let m = SymplecticTableau::gate_matrix(n, &g);
                assert!(m.compose(&m).unwrap().is_identity(), "{g:?} on {n}");
            }
        }
    }

    #[test]
    fn s_and_sdg_identical() {
        assert_eq!(
            SymplecticTableau::gate_matrix(2, &Gate::s(1)),
            SymplecticTableau::gate_matrix(2, &Gate::sdg(1))
        );
    }

    #[test]
    fn involution_only_circuits_reverse_to_identity() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(1..5usize);
            let mut c = Circuit::new(n);
            for _ in 0..rng.random_range(0..15usize) {
                let a = rng.random_range(0..n);
                if n == 1 || rng.random_bool(0.4) {
                    c.push(Gate::h(a));
                } else {
                    let mut b = rng.random_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    c.push(if rng.random_bool(0.5) { Gate::cx(a, b) } else { Gate::cz(a, b) });
                }
            }
            let mut rev = c.clone();
            rev.gates.reverse();
            let t = SymplecticTableau::from_circuit(&c).unwrap();
            let tr = SymplecticTableau::from_circuit(&rev).unwrap();
            assert!(t.compose(&tr).unwrap().is_identity());
        }
    }

    #[test]
    fn random_sequences_stay_symplectic() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.random_range(1..6usize);
            let mut t = SymplecticTableau::identity(n);
            for _ in 0..rng.random_range(1..40usize) {
                let a = rng.random_range(0..n);
                let g = if n == 1 || rng.random_bool(0.5) {
                    if rng.random_bool(0.5) {
                        Gate::h(a)
                    } else {
                        Gate::s(a)
                    }
                } else {
                    let mut b = rng.random_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    match rng.random_range(0..3) {
                        0 => Gate::cx(a, b),
                        1 => Gate::cz(a, b),
                        _ => Gate::swap(a, b),
                    }
                };
                t.apply_gate_mut(&g);
            }
            assert!(t.is_symplectic());
        }
    }

    #[test]
    fn linear_block_extraction() {
        let id = SymplecticTableau::identity(3);
        assert_eq!(id.linear_part().unwrap(), LinearMatrix::identity(3));
        // CNOT(0->1) on identity: A = [[1,1],[0,1]], row 0 = e0+e1
        let t = t_of("qubits 2\nCX 0 1\n");
        let a = t.linear_part().unwrap();
        assert_eq!(a.cols, vec![0b01, 0b11]);
        // non-linear tableau errors
        assert_eq!(t_of("qubits 2\nH 0\n").linear_part().unwrap_err(), TableauError::NotLinear);
    }

    #[test]
    fn linear_b_block_reconstruction() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.random_range(2..6usize);
            let mut c = Circuit::new(n);
            let mut a = LinearMatrix::identity(n);
            for _ in 0..rng.random_range(0..12usize) {
                let x = rng.random_range(0..n);
                let mut y = rng.random_range(0..n - 1);
                if y >= x {
                    y += 1;
                }
                c.push(Gate::cx(x, y));
                a.apply_cnot_mut(x, y);
            }
            let t = SymplecticTableau::from_circuit(&c).unwrap();
            assert_eq!(t.linear_part().unwrap(), a);
            assert_eq!(a.to_tableau(), t);
            assert!(a.is_invertible());
        }
    }

    #[test]
    fn relabel_annotation_matches_swap_tail() {
        let mut c = parse_circuit("qubits 3\nH 0\nCX 0 1\n").unwrap();
        c.relabel = Some(vec![2, 0, 1]);
        let t = SymplecticTableau::from_circuit(&c).unwrap();
        // explicit SWAP realization of the same permutation
        let mut c2 = parse_circuit("qubits 3\nH 0\nCX 0 1\n").unwrap();
        for (a, b) in perm_to_swaps(&[2, 0, 1]) {
            c2.push(Gate::swap(a, b));
        }
        assert_eq!(t, SymplecticTableau::from_circuit(&c2).unwrap());
        // and the tail is a pure permutation tableau
        let tail = SymplecticTableau::from_circuit(&Circuit {
            n: 3,
            gates: Vec::new(),
            relabel: Some(vec![2, 0, 1]),
        })
        .unwrap();
        assert_eq!(tail.is_permutation(), Some(vec![2, 0, 1]));
    }

    #[test]
    fn perm_to_swaps_moves_content() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.random_range(1..7usize);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut wires: Vec<usize> = (0..n).collect();
            for (a, b) in perm_to_swaps(&perm) {
                wires.swap(a, b);
            }
            for i in 0..n {
                assert_eq!(wires[perm[i]], i);
            }
        }
    }

    #[test]
    fn tableau_text_round_trip() {
        let t = t_of("qubits 3\nH 1\nCX 0 2\nS 2\nCZ 0 1\n");
        let back = SymplecticTableau::parse_text(&t.to_text()).unwrap();
        assert_eq!(t, back);
        assert!(SymplecticTableau::parse_text("n 1\n10\n0\n").is_err());
        assert!(SymplecticTableau::parse_text("m 1\n").is_err());
    }

    #[test]
    fn row_application_matches_matrix_action() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(1..6usize);
            let a = rng.random_range(0..n);
            let g = if n == 1 || rng.random_bool(0.4) {
                match rng.random_range(0..2) {
                    0 => Gate::h(a),
                    _ => Gate::s(a),
                }
            } else {
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                match rng.random_range(0..3) {
                    0 => Gate::cx(a, b),
                    1 => Gate::cz(a, b),
                    _ => Gate::swap(a, b),
                }
            };
            let m = SymplecticTableau::gate_matrix(n, &g);
            let mut row = vec![0u64; (2 * n).div_ceil(64)];
            for i in 0..2 * n {
                if rng.random_bool(0.5) {
                    row[i / 64] |= 1 << (i % 64);
                }
            }
            // reference: v * M by explicit bit arithmetic
            let mut expect = vec![0u64; row.len()];
            for j in 0..2 * n {
                let mut acc = false;
                for i in 0..2 * n {
                    if (row[i / 64] >> (i % 64)) & 1 == 1 && m.bit(i, j) {
                        acc = !acc;
                    }
                }
                if acc {
                    expect[j / 64] |= 1 << (j % 64);
                }
            }
            apply_gate_to_row(&mut row, n, &g);
            assert_eq!(row, expect, "{g:?} n={n}");
        }
    }

    #[test]
    fn pauli_conjugation_oracle_small_n() {
        // Brute-force oracle: conjugate explicit 2^n x 2^n complex Pauli
        // matrices by the circuit unitary and re-encode, for n <= 2.
        use rand::prelude::*;

        type C = (f64, f64);
        fn cmul(a: C, b: C) -> C {
            (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
        }
        fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
            let d = a.len();
            let mut out = vec![vec![(0.0, 0.0); d]; d];
            for i in 0..d {
                for k in 0..d {
                    for j in 0..d {
                        let p = cmul(a[i][k], b[k][j]);
                        out[i][j].0 += p.0;
                        out[i][j].1 += p.1;
                    }
                }
            }
            out
        }
        fn dagger(a: &[Vec<C>]) -> Vec<Vec<C>> {
            let d = a.len();
            let mut out = vec![vec![(0.0, 0.0); d]; d];
            for i in 0..d {
                for j in 0..d {
                    out[i][j] = (a[j][i].0, -a[j][i].1);
                }
            }
            out
        }
        fn kron(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
            let (da, db) = (a.len(), b.len());
            let d = da * db;
            let mut out = vec![vec![(0.0, 0.0); d]; d];
            for i in 0..d {
                for j in 0..d {
                    out[i][j] = cmul(a[i / db][j / db], b[i % db][j % db]);
                }
            }
            out
        }
        fn single(kind: char) -> Vec<Vec<C>> {
            let z = (0.0, 0.0);
            let o = (1.0, 0.0);
            match kind {
                'I' => vec![vec![o, z], vec![z, o]],
                'X' => vec![vec![z, o], vec![o, z]],
                'Y' => vec![vec![z, (0.0, -1.0)], vec![(0.0, 1.0), z]],
                'Z' => vec![vec![o, z], vec![z, (-1.0, 0.0)]],
                'H' => {
                    let s = 1.0 / 2.0f64.sqrt();
                    vec![vec![(s, 0.0), (s, 0.0)], vec![(s, 0.0), (-s, 0.0)]]
                }
                'S' => vec![vec![o, z], vec![z, (0.0, 1.0)]],
                _ => unreachable!(),
            }
        }
        fn pauli_matrix(n: usize, xz: &[bool]) -> Vec<Vec<C>> {
            // xz: x bits 0..n, z bits n..2n; phase ignored via XZ product
            let mut m = vec![vec![(1.0, 0.0)]];
            for q in 0..n {
                let f = match (xz[q], xz[n + q]) {
                    (false, false) => single('I'),
                    (true, false) => single('X'),
                    (false, true) => single('Z'),
                    (true, true) => matmul(&single('X'), &single('Z')), // Y up to phase
                };
                m = kron(&m, &f);
            }
            m
        }
        fn gate_unitary(n: usize, g: &Gate) -> Vec<Vec<C>> {
            let d = 1 << n;
            let z = (0.0, 0.0);
            let o = (1.0, 0.0);
            match g.kind {
                GateKind::H | GateKind::S | GateKind::Sdg => {
                    let u1 = if g.kind == GateKind::H {
                        single('H')
                    } else if g.kind == GateKind::S {
                        single('S')
                    } else {
                        dagger(&single('S'))
                    };
                    let mut m = vec![vec![o]];
                    let eye = single('I');
                    for q in 0..n {
                        m = kron(&m, if q == g.qubits[0] { &u1 } else { &eye });
                    }
                    m
                }
                _ => {
                    // build by action on computational basis states
                    let mut m = vec![vec![z; d]; d];
                    for b in 0..d {
                        // bit of qubit q: (b >> (n-1-q)) & 1 with our kron order
                        let bit = |q: usize| (b >> (n - 1 - q)) & 1;
                        match g.kind {
                            GateKind::Cx => {
                                let [c, t] = g.qubits;
                                let nb = if bit(c) == 1 { b ^ (1 << (n - 1 - t)) } else { b };
                                m[nb][b] = o;
                            }
                            GateKind::Cz => {
                                let [x, y] = g.qubits;
                                let sign = if bit(x) == 1 && bit(y) == 1 { (-1.0, 0.0) } else { o };
                                m[b][b] = sign;
                            }
                            GateKind::Swap => {
                                let [x, y] = g.qubits;
                                let (bx, by) = (bit(x), bit(y));
                                let mut nb = b & !(1 << (n - 1 - x)) & !(1 << (n - 1 - y));
                                nb |= by << (n - 1 - x);
                                nb |= bx << (n - 1 - y);
                                m[nb][b] = o;
                            }
                            _ => unreachable!(),
                        }
                    }
                    m
                }
            }
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let n = rng.random_range(1..3usize);
            let mut c = Circuit::new(n);
            for _ in 0..rng.random_range(0..8usize) {
                let a = rng.random_range(0..n);
                if n == 1 || rng.random_bool(0.5) {
                    match rng.random_range(0..3) {
                        0 => c.push(Gate::h(a)),
                        1 => c.push(Gate::s(a)),
                        _ => c.push(Gate::sdg(a)),
                    }
                } else {
                    let b = (a + 1) % n;
                    match rng.random_range(0..3) {
                        0 => c.push(Gate::cx(a, b)),
                        1 => c.push(Gate::cz(a, b)),
                        _ => c.push(Gate::swap(a, b)),
                    }
                }
            }
            let t = SymplecticTableau::from_circuit(&c).unwrap();
            // unitary of the whole circuit
            let d = 1 << n;
            let mut u = vec![vec![(0.0, 0.0); d]; d];
            for (i, row) in u.iter_mut().enumerate() {
                row[i] = (1.0, 0.0);
            }
            for g in &c.gates {
                u = matmul(&gate_unitary(n, g), &u);
            }
            // each basis Pauli: conjugate and compare support pattern
            for basis in 0..2 * n {
                let mut xz = vec![false; 2 * n];
                xz[basis] = true;
                let p = pauli_matrix(n, &xz);
                let conj = matmul(&matmul(&u, &p), &dagger(&u));
                // expected image from tableau row `basis`
                let mut exz = vec![false; 2 * n];
                for c in 0..2 * n {
                    exz[c] = t.bit(basis, c);
                }
                let expect = pauli_matrix(n, &exz);
                // compare up to a global phase
                let mut phase: Option<C> = None;
                let mut ok = true;
                for i in 0..d {
                    for j in 0..d {
                        let (a, b) = (conj[i][j], expect[i][j]);
                        let an = (a.0 * a.0 + a.1 * a.1).sqrt();
                        let bn = (b.0 * b.0 + b.1 * b.1).sqrt();
                        if (an - bn).abs() > 1e-9 {
                            ok = false;
                        } else if bn > 1e-9 {
                            // a / b
                            let ratio = cmul(a, (b.0 / (bn * bn), -b.1 / (bn * bn)));
                            match phase {
                                None => phase = Some(ratio),
                                Some(ph) => {
                                    if (ph.0 - ratio.0).abs() > 1e-9
                                        || (ph.1 - ratio.1).abs() > 1e-9
                                    {
                                        ok = false;
                                    }
                                }
                            }
                        }
                    }
                }
                assert!(ok, "circuit {c:?} basis {basis}");
            }
        }
    }
}
