//! Exterior calculus and Cartan equivalence for fourth-order linear
//! differential operators on the line.
//!
//! The crate is layered bottom-up:
//!
//! * [`expr`]: exact canonical expressions with quarter-power radicals;
//! * [`parse`]: the text grammar, pretty-printer and input file formats;
//! * [`exterior`]: differential forms, wedge, `d`, and coframe re-expression;
//! * [`jet`]: operators, fiber-preserving maps, prolongation and the base invariant;
//! * [`cartan`]: lifted coframes, torsion normalization and the derived invariants;
//! * [`verify`]: seeded property suites shared by the tests and `selftest`;
//! * [`cli`]: the `cartan-forge` command implementations.

pub mod expr;
pub mod parse;
pub mod exterior;
pub mod jet;
pub mod cartan;
pub mod verify;
pub mod cli;
