//! From formulas to automata.
//!
//! The construction follows the alternating-automaton route: a δ function
//! maps a quoted formula and a letter to a positive boolean combination of
//! quoted formulas, and the NFA is obtained by a forward fixpoint over
//! macro-states (conjunctive sets of quoted formulas), taking minimal models
//! of the conjoined δ at every letter. The reserved `last` proposition marks
//! the final letter during construction and is removed by [`eliminate_last`].

mod arena;
mod delta;
mod posbool;

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::automata::{self, determinize_capped, minimize, AutomataError, Dfa, Nfa, MAX_ALPHABET};
use crate::logic::{expand_sugar, is_nnf, to_nnf, Formula, Prop};

pub use arena::{Arena, Node, NodeId, PathId, PathNode};
pub use delta::{Delta, Letter};
pub use posbool::{minimal_models, PosBool};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("formula is not in negation normal form: {0}")]
    NotNnf(String),
    #[error("proposition `{0}` is not in the alphabet")]
    Undeclared(Prop),
    #[error("alphabet has {size} propositions, the cap is {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },
    #[error("construction exceeds the state cap of {0}")]
    StateCap(usize),
    #[error("automaton alphabet does not end with `last`")]
    MissingLast,
    #[error(transparent)]
    Automata(#[from] AutomataError),
}

/// Resource bounds for the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_alphabet: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: automata::DEFAULT_STATE_CAP,
            max_alphabet: MAX_ALPHABET,
        }
    }
}

/// Result of the forward fixpoint.
#[derive(Clone, Debug)]
pub struct Construction {
    /// NFA over `alphabet ++ [last]`.
    pub nfa: Nfa,
    /// The macro-state behind each NFA state, as formulas. The extra final
    /// copy of the initial state (present when the empty trace is accepted)
    /// repeats the initial macro-state.
    pub macrostates: Vec<BTreeSet<Formula>>,
    /// Number of macro-states found by the fixpoint.
    pub fixpoint_states: usize,
    /// Size of the syntactic closure of the root formula.
    pub closure_size: usize,
    /// Whether every quoted atom of every macro-state lies in the closure.
    pub atoms_in_closure: bool,
}

fn checked_alphabet(
    f: &Formula,
    alphabet: &BTreeSet<Prop>,
    limits: Limits,
) -> Result<Vec<Prop>, CompileError> {
    if alphabet.len() > limits.max_alphabet {
        return Err(CompileError::AlphabetTooLarge {
            size: alphabet.len(),
            cap: limits.max_alphabet,
        });
    }
    if let Some(p) = f.props().into_iter().find(|p| !alphabet.contains(p)) {
        return Err(CompileError::Undeclared(p));
    }
    Ok(alphabet.iter().cloned().collect())
}

/// `δ(⌜f⌝, Π)` for an NNF formula; `last` says whether `Π` carries `last`.
pub fn delta(
    f: &Formula,
    interp: &BTreeSet<Prop>,
    last: bool,
) -> Result<PosBool<Formula>, CompileError> {
    if !is_nnf(f) {
        return Err(CompileError::NotNnf(f.to_string()));
    }
    let alphabet: Vec<Prop> = f.props().union(interp).cloned().collect();
    let mask = alphabet
        .iter()
        .enumerate()
        .filter(|(_, p)| interp.contains(p))
        .fold(0u64, |m, (k, _)| m | 1 << k);
    let mut arena = Arena::new();
    let root = arena.intern(f)?;
    let mut d = Delta::new(arena, alphabet);
    let pb = d.delta(root, Letter { mask, last });
    Ok(pb.map(&|id| d.arena.to_formula(*id)))
}

/// `δ(f, ε)`: truth of an NNF formula once the trace is over, as a constant.
pub fn delta_epsilon(f: &Formula) -> Result<PosBool<Formula>, CompileError> {
    if !is_nnf(f) {
        return Err(CompileError::NotNnf(f.to_string()));
    }
    let mut arena = Arena::new();
    let root = arena.intern(f)?;
    let mut d = Delta::new(arena, f.props().into_iter().collect());
    Ok(PosBool::constant(d.epsilon(root)))
}

/// NFA of an LTLf/LDLf formula through the LDLf core: the formula is
/// sugar-expanded and put in NNF first.
pub fn ldlf_to_nfa(f: &Formula, alphabet: &BTreeSet<Prop>) -> Result<Construction, CompileError> {
    ldlf_to_nfa_with(f, alphabet, Limits::default())
}

pub fn ldlf_to_nfa_with(
    f: &Formula,
    alphabet: &BTreeSet<Prop>,
    limits: Limits,
) -> Result<Construction, CompileError> {
    build(&to_nnf(&expand_sugar(f)), alphabet, limits)
}

/// NFA built with the LTLf rows of δ directly, without expanding into the
/// LDLf core. Path modalities, if any, still use the LDLf rows.
pub fn ltlf_to_nfa(f: &Formula, alphabet: &BTreeSet<Prop>) -> Result<Construction, CompileError> {
    build(&to_nnf(f), alphabet, Limits::default())
}

fn build(
    nnf: &Formula,
    alphabet: &BTreeSet<Prop>,
    limits: Limits,
) -> Result<Construction, CompileError> {
    let props = checked_alphabet(nnf, alphabet, limits)?;
    let n = props.len();
    let mut arena = Arena::new();
    let root = arena.intern(nnf)?;
    let closure = arena.closure(root);
    let mut d = Delta::new(arena, props.clone());

    let mut states: Vec<BTreeSet<NodeId>> = vec![BTreeSet::from([root]), BTreeSet::new()];
    let mut index: HashMap<BTreeSet<NodeId>, usize> = states
        .iter()
        .cloned()
        .enumerate()
        .map(|(k, s)| (s, k))
        .collect();
    let mut transitions = Vec::new();
    let letters = 1u64 << (n + 1);
    let mut k = 0;
    while k < states.len() {
        let q = states[k].clone();
        for l in 0..letters {
            let letter = Letter {
                mask: l & ((1 << n) - 1),
                last: l >> n & 1 == 1,
            };
            let mut pb = PosBool::True;
            for &psi in &q {
                pb = pb.and(d.delta(psi, letter));
                if pb == PosBool::False {
                    break;
                }
            }
            for model in minimal_models(&pb) {
                let target = match index.get(&model) {
                    Some(&t) => t,
                    None => {
                        if states.len() >= limits.max_states {
                            return Err(CompileError::StateCap(limits.max_states));
                        }
                        states.push(model.clone());
                        index.insert(model, states.len() - 1);
                        states.len() - 1
                    }
                };
                transitions.push((k, l, target));
            }
        }
        k += 1;
    }

    let fixpoint_states = states.len();
    let atoms_in_closure = states.iter().flatten().all(|a| closure.contains(a));
    let mut macrostates: Vec<BTreeSet<Formula>> = states
        .iter()
        .map(|s| s.iter().map(|&a| d.arena.to_formula(a)).collect())
        .collect();
    let mut initial = BTreeSet::from([0]);
    // The empty trace is accepted iff the root holds at the end. That cannot
    // be expressed by making the initial state final (runs may return to
    // it), so a final copy of it becomes the initial state instead.
    if d.epsilon(root) {
        let copy = states.len();
        let extra: Vec<_> = transitions
            .iter()
            .filter(|&&(s, _, _)| s == 0)
            .map(|&(_, l, t)| (copy, l, t))
            .collect();
        transitions.extend(extra);
        macrostates.push(macrostates[0].clone());
        initial = BTreeSet::from([copy]);
    }
    let mut finals = BTreeSet::from([1]);
    if initial.contains(&fixpoint_states) {
        finals.insert(fixpoint_states);
    }
    let mut alphabet_last = props;
    alphabet_last.push(Prop::last());
    let nfa = Nfa::new(
        alphabet_last,
        macrostates.len(),
        initial,
        finals,
        transitions,
    )?;
    Ok(Construction {
        nfa,
        macrostates,
        fixpoint_states,
        closure_size: closure.len(),
        atoms_in_closure,
    })
}

/// Drops the `last` proposition: a letter `Π ∪ {last}` leading to an
/// accepting state becomes a `Π`-edge into a fresh accepting `ended` state,
/// and every other `last`-edge disappears.
///
/// Only `ended` (and an accepting initial state, for the empty trace) stays
/// accepting. Keeping the old accepting states would accept traces whose
/// final letter was read as if more letters followed: `X tt` reaches the
/// all-true state after one non-`last` letter, yet fails on a one-letter trace.
pub fn eliminate_last(nfa: &Nfa) -> Result<Nfa, CompileError> {
    let alphabet = nfa.alphabet();
    if !alphabet.last().is_some_and(Prop::is_last) {
        return Err(CompileError::MissingLast);
    }
    let n = alphabet.len() - 1;
    let last_bit = 1u64 << n;
    let ended = nfa.num_states();
    let transitions: Vec<_> = nfa
        .transitions()
        .filter_map(|(s, l, t)| {
            if l & last_bit == 0 {
                Some((s, l, t))
            } else if nfa.finals().contains(&t) {
                Some((s, l & !last_bit, ended))
            } else {
                None
            }
        })
        .collect();
    let mut finals: BTreeSet<usize> = nfa.finals().intersection(nfa.initial()).copied().collect();
    finals.insert(ended);
    Ok(Nfa::new(
        alphabet[..n].to_vec(),
        ended + 1,
        nfa.initial().clone(),
        finals,
        transitions,
    )?)
}

/// Every stage of the pipeline for one formula.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub construction: Construction,
    pub nfa: Nfa,
    pub dfa: Dfa,
    pub minimal: Dfa,
}

pub fn compile(f: &Formula, alphabet: &BTreeSet<Prop>) -> Result<Compiled, CompileError> {
    compile_with(f, alphabet, Limits::default())
}

pub fn compile_with(
    f: &Formula,
    alphabet: &BTreeSet<Prop>,
    limits: Limits,
) -> Result<Compiled, CompileError> {
    let construction = ldlf_to_nfa_with(f, alphabet, limits)?;
    let nfa = eliminate_last(&construction.nfa)?;
    let dfa = determinize_capped(&nfa, limits.max_states)?;
    let minimal = minimize(&dfa);
    Ok(Compiled {
        construction,
        nfa,
        dfa,
        minimal,
    })
}

/// Minimal `last`-free DFA of `f` over `alphabet`.
pub fn compile_dfa(f: &Formula, alphabet: &BTreeSet<Prop>) -> Result<Dfa, CompileError> {
    Ok(compile(f, alphabet)?.minimal)
}

/// Minimal DFA over `alphabet ++ [last]`, read on traces whose final letter
/// (and only that one) carries `last`.
pub fn compile_dfa_with_last(f: &Formula, alphabet: &BTreeSet<Prop>) -> Result<Dfa, CompileError> {
    let c = ldlf_to_nfa(f, alphabet)?;
    Ok(minimize(&determinize_capped(
        &c.nfa,
        Limits::default().max_states,
    )?))
}
