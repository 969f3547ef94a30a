//! Finite-stage lattice representations and priority-tree constructions.
//!
//! The library builds staged colored-graph representations of finite
//! lattices, extracts lattice tables from them, verifies the structural
//! conditions those representations rely on, implements the interpolation
//! lemmas used by splitting-tree strategies, and runs a bounded-stage,
//! fully deterministic simulation of the priority-tree construction that
//! realizes a lattice as an initial segment of the Turing degrees below 0'.
//!
//! Start with the runnable examples (`cargo run --example two_chain_table`)
//! or the `initseg` binary (`initseg catalog`, `initseg table show ...`).

pub mod catalog;
pub mod lattice;
pub mod partition;
pub mod interp;
pub mod io;
pub mod limits;
pub mod pudlak;
pub mod sim;
pub mod splitting;
pub mod tree;
pub mod util;
pub mod verify;

pub use lattice::{FiniteLattice, GaloisAdjoint, LatticeError, UslHomomorphism};
pub use partition::{LatticeTable, Partition, UnaryAlgebra};
