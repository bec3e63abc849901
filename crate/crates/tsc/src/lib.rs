//! The Turing–Schmerl calculus.

pub mod calculus;
pub mod decision;
pub mod normalform;
pub mod ordinal;
pub mod syntax;

pub use calculus::{
    check_derivation, derive_witness, match_axiom, normalize_traced, saturate, Derivation,
    StepKind, Trace,
};
pub use decision::{decide, equiv_level, equivalent, pi_fragment, Verdict};
pub use normalform::{normalize, normalize_to_inf, Inf, Mnf, Monomial};
pub use ordinal::Ordinal;
pub use syntax::{Formula, Sequent, Worm};
