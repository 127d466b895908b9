//! Uniform sampling of random symplectic (Clifford) tableaux.
//!
//! Sampling goes through an explicit bijection between `0..|Sp(2n, 2)|`
//! and group elements, built recursively from symplectic transvections
//! `Z_h(x) = x + <x, h> h`: an index selects the image of the first basis
//! pair, and the remainder selects a symplectic on one fewer qubit. Each
//! vector is a `2n`-bit word with qubit `q`'s X part at bit `2q` and Z
//! part at bit `2q + 1`.

use rand::Rng;

use crate::database::Database;
use crate::tableau::SymplecticTableau;

/// `|Sp(2n, 2)| = prod_{j=1..n} (4^j - 1) * 2^(2j-1)`; the group of
/// Clifford unitaries modulo the Pauli subgroup and global phase.
pub fn group_order(n: usize) -> u128 {
    (1..=n as u32).map(|j| ((1u128 << (2 * j)) - 1) << (2 * j - 1)).product()
}

/// Symplectic inner product of interleaved vectors.
fn inner(a: u64, b: u64) -> u64 {
    const X_MASK: u64 = 0x5555_5555_5555_5555;
    let swapped = ((b & X_MASK) << 1) | ((b >> 1) & X_MASK);
    (a & swapped).count_ones() as u64 & 1
}

/// Transvection `Z_h` applied to `x`.
fn transvection(h: u64, x: u64) -> u64 {
    if inner(x, h) == 1 {
        x ^ h
    } else {
        x
    }
}

/// Vectors `(h1, h2)` with `y = Z_h1(Z_h2(x))` for nonzero `x`, `y`.
fn find_transvection(nn: usize, x: u64, y: u64) -> (u64, u64) {
    if x == y {
        return (0, 0);
    }
    if inner(x, y) == 1 {
        return (x ^ y, 0);
    }
    let qubit = |v: u64, i: usize| (v >> (2 * i)) & 3;
    // a qubit where both are supported
    for i in 0..nn / 2 {
        let (xb, yb) = (qubit(x, i), qubit(y, i));
        if xb != 0 && yb != 0 {
            let mut z = xb ^ yb;
            if z == 0 {
                // same local content: pick z anticommuting with it
                z = 2;
                if xb & 1 != (xb >> 1) & 1 {
                    z |= 1;
                }
            }
            let zv = z << (2 * i);
            return (y ^ zv, x ^ zv);
        }
    }
    // otherwise one qubit supporting only x and one supporting only y
    let mut z = 0u64;
    for i in 0..nn / 2 {
        let (xb, yb) = (qubit(x, i), qubit(y, i));
        if xb != 0 && yb == 0 {
            let local = if xb & 1 == (xb >> 1) & 1 {
                2
            } else {
                ((xb & 1) << 1) | ((xb >> 1) & 1)
            };
            z |= local << (2 * i);
            break;
        }
    }
    for i in 0..nn / 2 {
        let (xb, yb) = (qubit(x, i), qubit(y, i));
        if xb == 0 && yb != 0 {
            let local = if yb & 1 == (yb >> 1) & 1 {
                2
            } else {
                ((yb & 1) << 1) | ((yb >> 1) & 1)
            };
            z |= local << (2 * i);
            break;
        }
    }
    (y ^ z, x ^ z)
}

/// Source of the per-level selection components: either digits of a fixed
/// index, or fresh randomness.
trait Selector {
    /// A value in `0..bound`.
    fn draw(&mut self, bound: u128) -> u128;
}

struct IndexSelector(u128);

impl Selector for IndexSelector {
    fn draw(&mut self, bound: u128) -> u128 {
        let v = self.0 % bound;
        self.0 /= bound;
        v
    }
}

struct RngSelector<'a, R: Rng>(&'a mut R);

impl<R: Rng> Selector for RngSelector<'_, R> {
    fn draw(&mut self, bound: u128) -> u128 {
        self.0.random_range(0..bound)
    }
}

/// Rows (interleaved convention) of the selected symplectic matrix on
/// `m` qubits.
fn build_rows(sel: &mut impl Selector, m: usize) -> Vec<u64> {
    let nn = 2 * m;
    // image of e1: any nonzero vector
    let f1 = sel.draw((1u128 << nn) - 1) as u64 + 1;
    let e1 = 1u64;
    let (t0, t1) = find_transvection(nn, e1, f1);
    let bits = sel.draw(1u128 << (nn - 1)) as u64;
    // e' = e1 plus the chosen bits on positions 2..nn
    let eprime = e1 | ((bits >> 1) << 2);
    let h0 = transvection(t0, transvection(t1, eprime));
    // when the leading bit is set, the image of e2 is h0 itself and the
    // final transvection is skipped
    let f1_step = if bits & 1 == 1 { 0 } else { f1 };
    let mut rows = vec![0u64; nn];
    rows[0] = 1;
    rows[1] = 2;
    if m > 1 {
        let sub = build_rows(sel, m - 1);
        for (j, r) in sub.into_iter().enumerate() {
            rows[j + 2] = r << 2;
        }
    }
    for r in &mut rows {
        let mut v = transvection(t0, *r);
        v = transvection(t1, v);
        v = transvection(h0, v);
        *r = transvection(f1_step, v);
    }
    rows
}

fn rows_to_tableau(n: usize, rows: &[u64]) -> SymplecticTableau {
    // interleaved bit 2q is our index q, bit 2q+1 is our index n+q, for
    // rows and columns alike
    let mut t = SymplecticTableau::identity(n);
    for r in 0..2 * n {
        for c in 0..2 * n {
            let ir = if r < n { 2 * r } else { 2 * (r - n) + 1 };
            let ic = if c < n { 2 * c } else { 2 * (c - n) + 1 };
            t.set_bit(r, c, (rows[ir] >> ic) & 1 == 1);
        }
    }
    debug_assert!(t.is_symplectic());
    t
}

/// The `i`-th element of `Sp(2n, 2)`; a bijection on `0..group_order(n)`.
pub fn symplectic_from_index(n: usize, i: u128) -> SymplecticTableau {
    assert!(n >= 1 && 2 * n <= 64);
    assert!(i < group_order(n));
    let mut sel = IndexSelector(i);
    let rows = build_rows(&mut sel, n);
    rows_to_tableau(n, &rows)
}

/// A uniformly random symplectic tableau.
pub fn random_clifford(rng: &mut impl Rng, n: usize) -> SymplecticTableau {
    assert!(n >= 1 && 2 * n <= 64);
    let mut sel = RngSelector(rng);
    let rows = build_rows(&mut sel, n);
    rows_to_tableau(n, &rows)
}

/// Empirical distribution of optimal costs over uniform random tableaux.
#[derive(Debug, Clone)]
pub struct CostHistogram {
    /// `counts[c]` tableaux had database cost `c`.
    pub counts: Vec<u64>,
    /// Samples falling outside the database's covered range.
    pub uncovered: u64,
    pub samples: u64,
}

impl CostHistogram {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.samples as f64).collect()
    }
}

/// Sample `samples` uniform tableaux and tally their optimal costs.
pub fn cost_histogram(db: &Database, rng: &mut impl Rng, samples: u64) -> CostHistogram {
    assert!(!db.linear);
    let mut counts = vec![0u64; db.max_cost() + 1];
    let mut uncovered = 0;
    for _ in 0..samples {
        let t = random_clifford(rng, db.n);
        match db.cost_of(&t) {
            Some(c) => counts[c] += 1,
            None => uncovered += 1,
        }
    }
    CostHistogram { counts, uncovered, samples }
}

/// Two-sided Hoeffding half-width: each empirical frequency is within
/// `epsilon` of the true probability with confidence `1 - alpha`.
pub fn hoeffding_epsilon(samples: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}
