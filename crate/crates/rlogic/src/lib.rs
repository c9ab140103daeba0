//! A workbench for randomised logics over finite relational structures.
//!
//! The crate provides:
//!
//! - [`structure`]: finite structures, vocabularies, renamings, and the
//!   canonical arithmetic structures with built-in `leq`/`plus`/`times`;
//! - [`logic`]: a formula language (first-order logic plus counting
//!   quantifiers, monadic set quantifiers and the Rescher cardinality
//!   quantifier) with a parser, printer and guard-aware evaluator;
//! - [`randsem`]: uniform random expansions of a structure by fresh
//!   relation symbols, exact and Monte Carlo satisfaction probabilities,
//!   gap classification and probability amplification;
//! - [`generators`]: structure families used by the probability
//!   experiments (CFI graphs over 3-regular bases, Boolean-algebra
//!   augmentations, matched orders, sparse additive sets);
//! - [`corpus`]: programmatic builders for the formulas those experiments
//!   evaluate;
//! - [`derand`]: partial designs from low-degree polynomial graphs, the
//!   parity-based pseudorandom generator they feed, relation packing, and
//!   XOR-translate cover search;
//! - [`experiments`]: named, seeded, machine-checkable reproduction runs.

pub mod bits;
pub mod corpus;
pub mod derand;
pub mod experiments;
pub mod generators;
pub mod logic;
pub mod randsem;
pub mod structure;

pub use logic::{Assignment, Formula};
pub use structure::{Builtin, RelationSymbol, Renaming, Structure, Vocabulary};
