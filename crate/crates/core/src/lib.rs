//! Toolchain for a modal logic of hybrid games: two players (Angel and Demon)
//! alternate over discrete assignments, tests, differential equations, choice,
//! sequencing, repetition, and the duality operator.
//!
//! The crate is organized around the pipeline
//!
//! * [`syntax`] — concrete and abstract syntax, binding analysis, admissible
//!   substitution and uniform substitution,
//! * [`kernel`] — a Hilbert-style proof checker for the game-logic
//!   axiomatization with modus ponens, monotonicity, fixpoint, uniform
//!   substitution and quantifier generalization rules,
//! * [`arith`] — a decision procedure for linear real arithmetic and a
//!   randomized falsifier for oracle obligations,
//! * [`regions`] — exact set algebra of finite unions of axis-aligned boxes
//!   over the rationals,
//! * [`semantics`] — executable winning-region semantics over a region backend
//!   and an exact finite-state backend, with ordinal-tracked transfinite
//!   fixpoint iteration,
//! * [`operational`] — finite game trees, strategies and backward induction,
//! * [`transforms`] — evolution-domain elimination, dual normal form,
//!   mu-calculus translation and the advance-notice encoding.

pub mod arith;
pub mod kernel;
pub mod operational;
pub mod poly;
pub mod rat;
pub mod regions;
pub mod semantics;
pub mod syntax;
pub mod transforms;
