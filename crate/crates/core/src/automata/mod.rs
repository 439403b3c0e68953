//! Explicit automata over the alphabet `2^P`.
//!
//! Letters are bitmasks over an ordered proposition list: bit `k` is set when
//! `alphabet[k]` holds. Alphabets are small (see [`MAX_ALPHABET`]), so every
//! DFA stores a dense `states × 2^|P|` transition table.

mod dot;
mod minimize;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Prop;
use crate::semantics::Trace;

pub use dot::{to_dot, Dot};
pub use minimize::{minimize, refine_partition};

/// Largest alphabet for which `2^P` is enumerated explicitly.
pub const MAX_ALPHABET: usize = 12;
/// Default bound on constructed automaton states.
pub const DEFAULT_STATE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("automaton exceeds the state cap of {0}")]
    StateCap(usize),
    #[error("alphabet has {0} propositions, the cap is {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("alphabets differ: {0:?} vs {1:?}")]
    AlphabetMismatch(Vec<String>, Vec<String>),
    #[error("proposition `{0}` is not in the automaton alphabet")]
    Undeclared(Prop),
    #[error("malformed automaton: {0}")]
    Malformed(String),
}

/// Number of letters over `n` propositions.
pub fn letter_count(n: usize) -> u64 {
    1u64 << n
}

/// Renders a letter as `{a,b}`.
pub fn letter_name(alphabet: &[Prop], letter: u64) -> String {
    let names: Vec<&str> = alphabet
        .iter()
        .enumerate()
        .filter(|(k, _)| letter >> k & 1 == 1)
        .map(|(_, p)| p.as_str())
        .collect();
    format!("{{{}}}", names.join(","))
}

fn check_alphabet(alphabet: &[Prop]) -> Result<(), AutomataError> {
    // The `last` marker rides along on top of the user alphabet.
    let user = alphabet.iter().filter(|p| !p.is_last()).count();
    if user > MAX_ALPHABET {
        return Err(AutomataError::AlphabetTooLarge(user));
    }
    let distinct: BTreeSet<_> = alphabet.iter().collect();
    if distinct.len() != alphabet.len() {
        return Err(AutomataError::Malformed("repeated proposition".into()));
    }
    Ok(())
}

/// Nondeterministic automaton with a set of initial states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    alphabet: Vec<Prop>,
    initial: BTreeSet<usize>,
    finals: BTreeSet<usize>,
    /// Sorted, deduplicated `(letter, target)` lists per source state.
    edges: Vec<Vec<(u64, usize)>>,
}

impl Nfa {
    pub fn new(
        alphabet: Vec<Prop>,
        num_states: usize,
        initial: BTreeSet<usize>,
        finals: BTreeSet<usize>,
        transitions: impl IntoIterator<Item = (usize, u64, usize)>,
    ) -> Result<Nfa, AutomataError> {
        check_alphabet(&alphabet)?;
        let letters = letter_count(alphabet.len());
        if initial.iter().chain(&finals).any(|&q| q >= num_states) {
            return Err(AutomataError::Malformed(
                "initial/final state out of range".into(),
            ));
        }
        let mut edges = vec![Vec::new(); num_states];
        for (s, l, t) in transitions {
            if s >= num_states || t >= num_states {
                return Err(AutomataError::Malformed(format!(
                    "transition {s}->{t} out of range"
                )));
            }
            if l >= letters {
                return Err(AutomataError::Malformed(format!(
                    "letter {l} outside the alphabet"
                )));
            }
            edges[s].push((l, t));
        }
        for e in &mut edges {
            e.sort_unstable();
            e.dedup();
        }
        Ok(Nfa {
            alphabet,
            initial,
            finals,
            edges,
        })
    }

    pub fn alphabet(&self) -> &[Prop] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// All `(source, letter, target)` triples in sorted order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, u64, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(s, es)| es.iter().map(move |&(l, t)| (s, l, t)))
    }

    /// Targets of `state` under `letter`.
    pub fn successors(&self, state: usize, letter: u64) -> impl Iterator<Item = usize> + '_ {
        let es = &self.edges[state];
        let start = es.partition_point(|&(l, _)| l < letter);
        es[start..]
            .iter()
            .take_while(move |&&(l, _)| l == letter)
            .map(|&(_, t)| t)
    }

    pub fn accepts_masks(&self, word: &[u64]) -> bool {
        let mut current: BTreeSet<usize> = self.initial.clone();
        for &l in word {
            current = current
                .iter()
                .flat_map(|&q| self.successors(q, l))
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|q| self.finals.contains(q))
    }

    pub fn accepts(&self, trace: &Trace) -> Result<bool, AutomataError> {
        Ok(self.accepts_masks(&encode(&self.alphabet, trace)?))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(NfaDump {
            alphabet: self.alphabet.iter().map(|p| p.to_string()).collect(),
            states: self.num_states(),
            initial: self.initial.iter().copied().collect(),
            finals: self.finals.iter().copied().collect(),
            transitions: self.transitions().map(|(s, l, t)| (s, l, t)).collect(),
        })
        .expect("serialisable")
    }
}

/// Encodes a trace as letters over `alphabet`.
pub fn encode(alphabet: &[Prop], trace: &Trace) -> Result<Vec<u64>, AutomataError> {
    trace.masks(alphabet).map_err(|e| match e {
        crate::semantics::SemanticsError::Undeclared(p) => AutomataError::Undeclared(p),
        other => AutomataError::Malformed(other.to_string()),
    })
}

/// Deterministic, total automaton.
///
/// Products carry `labels`: the set of component indices whose automaton
/// accepts in that state, and `components`: the component state tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub(crate) alphabet: Vec<Prop>,
    pub(crate) initial: usize,
    pub(crate) finals: Vec<bool>,
    /// `delta[q * letters + l]`.
    pub(crate) delta: Vec<usize>,
    pub(crate) labels: Option<Vec<BTreeSet<usize>>>,
    pub(crate) components: Option<Vec<Vec<usize>>>,
}

impl Dfa {
    /// `delta[q]` lists the target for every letter `0..2^|alphabet|`.
    pub fn new(
        alphabet: Vec<Prop>,
        initial: usize,
        finals: Vec<bool>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Dfa, AutomataError> {
        check_alphabet(&alphabet)?;
        let letters = letter_count(alphabet.len()) as usize;
        let n = finals.len();
        if delta.len() != n || initial >= n {
            return Err(AutomataError::Malformed("state count mismatch".into()));
        }
        let mut flat = Vec::with_capacity(n * letters);
        for (q, row) in delta.into_iter().enumerate() {
            if row.len() != letters {
                return Err(AutomataError::Malformed(format!("state {q} is not total")));
            }
            if row.iter().any(|&t| t >= n) {
                return Err(AutomataError::Malformed(format!(
                    "state {q} has a dangling edge"
                )));
            }
            flat.extend(row);
        }
        Ok(Dfa {
            alphabet,
            initial,
            finals,
            delta: flat,
            labels: None,
            components: None,
        })
    }

    pub fn alphabet(&self) -> &[Prop] {
        &self.alphabet
    }

    pub fn num_letters(&self) -> usize {
        letter_count(self.alphabet.len()) as usize
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn finals(&self) -> BTreeSet<usize> {
        (0..self.num_states()).filter(|&q| self.finals[q]).collect()
    }

    pub fn next(&self, q: usize, letter: u64) -> usize {
        self.delta[q * self.num_letters() + letter as usize]
    }

    /// Component indices accepting in `q`, for labeled products.
    pub fn labels(&self, q: usize) -> Option<&BTreeSet<usize>> {
        self.labels.as_ref().map(|l| &l[q])
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    /// Component states of a product state.
    pub fn components(&self, q: usize) -> Option<&[usize]> {
        self.components.as_ref().map(|c| c[q].as_slice())
    }

    pub fn run_masks(&self, word: &[u64]) -> usize {
        word.iter().fold(self.initial, |q, &l| self.next(q, l))
    }

    pub fn accepts_masks(&self, word: &[u64]) -> bool {
        self.finals[self.run_masks(word)]
    }

    pub fn run(&self, trace: &Trace) -> Result<usize, AutomataError> {
        Ok(self.run_masks(&encode(&self.alphabet, trace)?))
    }

    /// Accepting iff the run ends in a final state; the empty trace is
    /// accepted iff the initial state is final.
    pub fn accepts(&self, trace: &Trace) -> Result<bool, AutomataError> {
        Ok(self.finals[self.run(trace)?])
    }

    /// Same automaton read over a larger alphabet that contains this one; the
    /// extra propositions are ignored.
    pub fn lift(&self, alphabet: &[Prop]) -> Result<Dfa, AutomataError> {
        check_alphabet(alphabet)?;
        let mut positions = Vec::with_capacity(self.alphabet.len());
        for p in &self.alphabet {
            match alphabet.iter().position(|q| q == p) {
                Some(k) => positions.push(k),
                None => return Err(AutomataError::Undeclared(p.clone())),
            }
        }
        let letters = letter_count(alphabet.len());
        let project = |big: u64| -> u64 {
            positions
                .iter()
                .enumerate()
                .filter(|(_, &k)| big >> k & 1 == 1)
                .fold(0, |m, (i, _)| m | 1 << i)
        };
        let delta = (0..self.num_states())
            .map(|q| (0..letters).map(|l| self.next(q, project(l))).collect())
            .collect();
        let mut out = Dfa::new(alphabet.to_vec(), self.initial, self.finals.clone(), delta)?;
        out.labels = self.labels.clone();
        out.components = self.components.clone();
        Ok(out)
    }

    /// The complement over the same alphabet.
    pub fn complement(&self) -> Dfa {
        let mut out = self.clone();
        out.finals.iter_mut().for_each(|f| *f = !*f);
        out.labels = None;
        out.components = None;
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let letters = self.num_letters() as u64;
        let transitions = (0..self.num_states())
            .flat_map(|q| (0..letters).map(move |l| (q, l, self.next(q, l))))
            .collect();
        let labels = self
            .labels
            .as_ref()
            .map(|ls| {
                ls.iter()
                    .enumerate()
                    .map(|(q, l)| (q, l.iter().copied().collect()))
                    .collect()
            })
            .unwrap_or_default();
        serde_json::to_value(DfaDump {
            alphabet: self.alphabet.iter().map(|p| p.to_string()).collect(),
            states: self.num_states(),
            initial: self.initial,
            finals: self.finals().into_iter().collect(),
            transitions,
            labels,
        })
        .expect("serialisable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Dfa, AutomataError> {
        let dump: DfaDump = serde_json::from_value(value.clone())
            .map_err(|e| AutomataError::Malformed(e.to_string()))?;
        let alphabet = dump
            .alphabet
            .iter()
            .map(|n| Prop::new(n.clone()).map_err(|e| AutomataError::Malformed(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        check_alphabet(&alphabet)?;
        let letters = letter_count(alphabet.len()) as usize;
        let mut delta = vec![vec![usize::MAX; letters]; dump.states];
        for (s, l, t) in dump.transitions {
            if s >= dump.states || l as usize >= letters {
                return Err(AutomataError::Malformed(format!(
                    "bad transition {s},{l},{t}"
                )));
            }
            delta[s][l as usize] = t;
        }
        let mut finals = vec![false; dump.states];
        for q in dump.finals {
            *finals
                .get_mut(q)
                .ok_or_else(|| AutomataError::Malformed(format!("final {q} out of range")))? = true;
        }
        let mut dfa = Dfa::new(alphabet, dump.initial, finals, delta)?;
        if !dump.labels.is_empty() {
            let mut labels = vec![BTreeSet::new(); dump.states];
            for (q, l) in dump.labels {
                if q >= dump.states {
                    return Err(AutomataError::Malformed(format!(
                        "label for missing state {q}"
                    )));
                }
                labels[q] = l.into_iter().collect();
            }
            dfa.labels = Some(labels);
        }
        Ok(dfa)
    }
}

/// JSON shape of a DFA dump.
#[derive(Serialize, Deserialize)]
struct DfaDump {
    alphabet: Vec<String>,
    states: usize,
    initial: usize,
    finals: Vec<usize>,
    transitions: Vec<(usize, u64, usize)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<usize, Vec<usize>>,
}

#[derive(Serialize)]
struct NfaDump {
    alphabet: Vec<String>,
    states: usize,
    initial: Vec<usize>,
    finals: Vec<usize>,
    transitions: Vec<(usize, u64, usize)>,
}

/// Subset construction. The empty subset, when reached, is the sink.
pub fn determinize(nfa: &Nfa) -> Result<Dfa, AutomataError> {
    determinize_capped(nfa, DEFAULT_STATE_CAP)
}

pub fn determinize_capped(nfa: &Nfa, cap: usize) -> Result<Dfa, AutomataError> {
    let letters = letter_count(nfa.alphabet.len());
    let start: Vec<usize> = nfa.initial.iter().copied().collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut subsets = vec![start.clone()];
    index.insert(start, 0);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < subsets.len() {
        let mut row = Vec::with_capacity(letters as usize);
        for l in 0..letters {
            let mut next: Vec<usize> = subsets[k]
                .iter()
                .flat_map(|&q| nfa.successors(q, l))
                .collect();
            next.sort_unstable();
            next.dedup();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= cap {
                        return Err(AutomataError::StateCap(cap));
                    }
                    subsets.push(next.clone());
                    index.insert(next, subsets.len() - 1);
                    subsets.len() - 1
                }
            };
            row.push(id);
        }
        delta.push(row);
        k += 1;
    }
    let finals = subsets
        .iter()
        .map(|s| s.iter().any(|q| nfa.finals.contains(q)))
        .collect();
    Dfa::new(nfa.alphabet.clone(), 0, finals, delta)
}

/// Reverses every edge and swaps initial and final states, so the result
/// accepts exactly the reversals of the input's words. Linear time.
pub fn reverse_nfa(nfa: &Nfa) -> Nfa {
    let mut edges = vec![Vec::new(); nfa.num_states()];
    for (s, l, t) in nfa.transitions() {
        edges[t].push((l, s));
    }
    for e in &mut edges {
        e.sort_unstable();
    }
    Nfa {
        alphabet: nfa.alphabet.clone(),
        initial: nfa.finals.clone(),
        finals: nfa.initial.clone(),
        edges,
    }
}

/// A DFA viewed as an NFA.
pub fn dfa_to_nfa(dfa: &Dfa) -> Nfa {
    let letters = dfa.num_letters() as u64;
    let edges = (0..dfa.num_states())
        .map(|q| (0..letters).map(|l| (l, dfa.next(q, l))).collect())
        .collect();
    Nfa {
        alphabet: dfa.alphabet.clone(),
        initial: BTreeSet::from([dfa.initial]),
        finals: dfa.finals(),
        edges,
    }
}

/// Synchronous product of DFAs over a shared alphabet, restricted to states
/// reachable from the joint initial state.
///
/// Each product state is labeled with the indices of the components that
/// accept in it; the product accepts when at least one component does.
pub fn labeled_product(dfas: &[Dfa]) -> Result<Dfa, AutomataError> {
    labeled_product_capped(dfas, DEFAULT_STATE_CAP)
}

pub fn labeled_product_capped(dfas: &[Dfa], cap: usize) -> Result<Dfa, AutomataError> {
    let Some(first) = dfas.first() else {
        return Err(AutomataError::Malformed("empty product".into()));
    };
    for d in &dfas[1..] {
        if d.alphabet != first.alphabet {
            return Err(AutomataError::AlphabetMismatch(
                first.alphabet.iter().map(|p| p.to_string()).collect(),
                d.alphabet.iter().map(|p| p.to_string()).collect(),
            ));
        }
    }
    let letters = first.num_letters() as u64;
    let start: Vec<usize> = dfas.iter().map(|d| d.initial).collect();
    let mut index = HashMap::from([(start.clone(), 0usize)]);
    let mut tuples = vec![start];
    let mut delta = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let mut row = Vec::with_capacity(letters as usize);
        for l in 0..letters {
            let next: Vec<usize> = tuples[k]
                .iter()
                .zip(dfas)
                .map(|(&q, d)| d.next(q, l))
                .collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if tuples.len() >= cap {
                        return Err(AutomataError::StateCap(cap));
                    }
                    tuples.push(next.clone());
                    index.insert(next, tuples.len() - 1);
                    queue.push_back(tuples.len() - 1);
                    tuples.len() - 1
                }
            };
            row.push(id);
        }
        delta.push((k, row));
    }
    delta.sort_by_key(|(k, _)| *k);
    let labels: Vec<BTreeSet<usize>> = tuples
        .iter()
        .map(|t| (0..dfas.len()).filter(|&i| dfas[i].finals[t[i]]).collect())
        .collect();
    let finals = labels.iter().map(|l| !l.is_empty()).collect();
    let mut out = Dfa::new(
        first.alphabet.clone(),
        0,
        finals,
        delta.into_iter().map(|(_, r)| r).collect(),
    )?;
    out.labels = Some(labels);
    out.components = Some(tuples);
    Ok(out)
}

/// States reachable from `from` in zero or more steps.
pub fn reach(dfa: &Dfa, from: usize) -> BTreeSet<usize> {
    let letters = dfa.num_letters() as u64;
    let mut seen = BTreeSet::from([from]);
    let mut stack = vec![from];
    while let Some(q) = stack.pop() {
        for l in 0..letters {
            let t = dfa.next(q, l);
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen
}

/// Whether two DFAs over the same alphabet accept the same language.
pub fn equivalent(a: &Dfa, b: &Dfa) -> Result<bool, AutomataError> {
    if a.alphabet != b.alphabet {
        return Err(AutomataError::AlphabetMismatch(
            a.alphabet.iter().map(|p| p.to_string()).collect(),
            b.alphabet.iter().map(|p| p.to_string()).collect(),
        ));
    }
    let letters = a.num_letters() as u64;
    let mut seen = BTreeSet::from([(a.initial, b.initial)]);
    let mut stack = vec![(a.initial, b.initial)];
    while let Some((p, q)) = stack.pop() {
        if a.finals[p] != b.finals[q] {
            return Ok(false);
        }
        for l in 0..letters {
            let pair = (a.next(p, l), b.next(q, l));
            if seen.insert(pair) {
                stack.push(pair);
            }
        }
    }
    Ok(true)
}
