//! Sequence-heap separation logic: a logic over stacks, sequence
//! assignments, and heaps whose cells store whole value sequences.
//!
//! The crate provides:
//!
//! - the formula language with parser, printer, structural analyses, and a
//!   derived-predicate library ([`formula`], [`parser`], [`macros`],
//!   [`mod@classify`]);
//! - models and their algebra ([`model`]);
//! - an exact model checker for the propositional fragment with bounded
//!   checking for quantified formulas ([`semantics`]);
//! - word equations: solver, brute-force oracle, and the single-equation
//!   transformation ([`wordeq`]);
//! - the satisfiability decision pipeline for the propositional fragment
//!   ([`mod@reduce`]);
//! - two-counter machines and the run-encoding lab ([`minsky`]).

pub mod classify;
pub mod formula;
pub mod macros;
pub mod minsky;
pub mod model;
pub mod parser;
pub mod reduce;
pub mod semantics;
pub mod term;
pub mod value;
pub mod wordeq;

pub use classify::{classify, FragmentClass, Shape};
pub use formula::{
    ensure_pseqsl, formula_size, free_program_vars, free_seq_vars, seq_terms, Formula,
};
pub use macros::expand_macros;
pub use model::{
    disjoint_union, heap_splits, parse_model, print_model, GroundHeap, Model, SeqAssignment,
    Stack, SymbolicHeap,
};
pub use parser::parse_formula;
pub use reduce::{
    decide_given_stack, decide_given_stack_heap, decide_pi1_validity, decide_sat, reduce,
    DecideConfig, SatVerdict, ValidityVerdict,
};
pub use semantics::{check, check_closed, check_derived, CheckConfig, Universe, Verdict3};
pub use term::{IndTerm, ProgVar, SeqTerm, SeqVar};
pub use value::{Sequence, Value};
