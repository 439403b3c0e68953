//! Compile LTLf/LDLf reward formulas into minimal DFAs, build the equivalent
//! Markovian MDP over a probabilistic domain, solve it, and colour automaton
//! states for runtime monitoring.
//!
//! ```
//! use nmrdp::{compile::compile_dfa, logic::parse, semantics::Trace};
//!
//! let f = parse("F a")?;
//! let dfa = compile_dfa(&f, &f.props())?;
//! assert!(dfa.accepts(&Trace::from_names(&[&[], &["a"]]))?);
//! # Ok::<(), nmrdp::Error>(())
//! ```

pub mod automata;
pub mod compile;
pub mod corpus;
pub mod logic;
pub mod monitor;
pub mod rewards;
pub mod semantics;
pub mod solve;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Logic(#[from] logic::LogicError),
    #[error(transparent)]
    Semantics(#[from] semantics::SemanticsError),
    #[error(transparent)]
    Compile(#[from] compile::CompileError),
    #[error(transparent)]
    Automata(#[from] automata::AutomataError),
    #[error(transparent)]
    Rewards(#[from] rewards::RewardsError),
    #[error(transparent)]
    Solve(#[from] solve::SolveError),
    #[error(transparent)]
    Monitor(#[from] monitor::MonitorError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/automata.md")]
    mod automata {}
    #[doc = include_str!("../../../book/src/rewards.md")]
    mod rewards {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/monitoring.md")]
    mod monitoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
