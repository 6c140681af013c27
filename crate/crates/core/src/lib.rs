//! Generalized LR parsing for context-free grammars extended with a
//! shuffle (interleaving) operator.
//!
//! The pipeline is [`grammar`] → [`automaton`] → [`table`], after which a
//! string can be recognized by the reference cactus-stack parser in
//! [`cactus`] or the shared-structure engine in [`gss`]. The [`rewrite`]
//! module executes the grammar's rewriting semantics directly and serves as
//! the ground truth both parsers are tested against.

pub mod automaton;
pub mod cactus;
pub mod cli;
pub mod diff;
mod error;
pub mod grammar;
pub mod gss;
pub mod rewrite;
pub mod table;

pub use error::Error;

use automaton::{Dfa, Nfa};
use grammar::Grammar;
use table::ActionTable;

/// Everything built from one grammar: the augmented grammar, both
/// automata and the action table.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub source: Grammar,
    pub grammar: Grammar,
    pub nfa: Nfa,
    pub dfa: Dfa,
    pub table: ActionTable,
}

impl Compiled {
    pub fn new(source: &Grammar) -> Result<Compiled, Error> {
        let grammar = source.lift_terminal_operands().augment()?;
        let nfa = automaton::build_nfa(&grammar);
        let dfa = automaton::subset_construct(&nfa, &grammar);
        let table = table::build_tables(&dfa, &grammar);
        Ok(Compiled {
            source: source.clone(),
            grammar,
            nfa,
            dfa,
            table,
        })
    }
}
