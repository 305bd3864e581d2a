//! Deterministic length-reducing string rewriting for group word problems.
//!
//! The engine ([`engine`]) implements the incremental and non-incremental
//! rewriting algorithms. Around it sit constructions on rule sets, finite-state
//! Dehn machines, group oracles, generators for systems coming from expanding
//! endomorphisms, and the history-diagram machinery used to falsify candidate
//! systems.

pub mod acceptance;
pub mod constructions;
pub mod engine;
pub mod error;
pub mod expanding;
pub mod groups;
pub mod history;
pub mod letter;
pub mod machines;
pub mod random;
pub mod system;

pub use engine::{
    reduce, reduce_traced, Match, Matcher, ReductionHistory, RuleSource, Step, TieBreak,
};
pub use error::{Error, Result};
pub use letter::{format_word, parse_word, write_out, Letter, Word};
pub use system::{Flavor, Potential, RewritingSystem, Rule, Violation};
