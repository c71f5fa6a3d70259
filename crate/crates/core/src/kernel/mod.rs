//! Hilbert-style proof checker for the game-logic axiomatization, with
//! derived-rule macros and the symbolic polynomial ODE solver.

pub mod axioms;
pub mod macros;
pub mod ode;
pub mod proof;
pub mod script;
pub mod taut;

pub use axioms::{check_axiom_instance, AxiomId, KernelOptions, SchemaError};
pub use macros::{macro_expand, MacroError, MacroName};
pub use ode::{solve_polynomial_ode, OdeSolution, Unsolvable};
pub use proof::{check_proof, ProofScript, ProofStep, Rule, Status, Verdict};
pub use script::{parse_script, ScriptError};
