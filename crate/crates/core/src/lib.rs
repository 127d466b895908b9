//! Optimal synthesis of Clifford circuits by canonical-class breadth-first
//! search, meet-in-the-middle extension, database-driven peephole
//! optimization, and stabilizer-code encoder synthesis.
//!
//! The crate is organized around a small set of ideas:
//!
//! - a Clifford unitary, up to a Pauli layer, is a `2n x 2n` binary
//!   symplectic matrix ([`tableau::SymplecticTableau`]);
//! - unitaries related by renaming of qubits share circuit cost, so search
//!   runs over canonical representatives of renaming orbits
//!   ([`canonical`]);
//! - breadth-first layers of canonical keys form a database mapping every
//!   covered unitary to its optimal cost ([`database`]);
//! - a database of cost `<= c` finds optimal circuits of cost `<= 2c` via
//!   meet in the middle ([`synth`]);
//! - the databases drive peephole optimization of large circuits
//!   ([`peephole`]) and optimal synthesis of partially specified targets
//!   such as stabilizer-code encoders ([`qecc`]).

pub mod canonical;
pub mod circuit;
pub mod database;
pub mod peephole;
pub mod qecc;
pub mod sample;
pub mod synth;
pub mod tableau;

pub use circuit::{Circuit, CostModel, Gate, GateKind, Metric};
pub use tableau::{LinearMatrix, SymplecticTableau};
