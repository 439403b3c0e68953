//! Finite-trace semantics by direct recursion on the inductive definitions.
//!
//! This is deliberately naive: it is the oracle every automaton is checked
//! against, so it shares no code with the compiler.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Formula, PathExpr, Prop};

/// Traces enumerated by [`enumerate_traces`] before it refuses.
pub const DEFAULT_TRACE_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("proposition `{0}` is not declared in the alphabet")]
    Undeclared(Prop),
    #[error("{count} traces requested, cap is {cap}")]
    TooManyTraces { count: u64, cap: u64 },
}

/// A finite sequence of interpretations. May be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    pub steps: Vec<BTreeSet<Prop>>,
}

impl Trace {
    pub fn new(steps: Vec<BTreeSet<Prop>>) -> Trace {
        Trace { steps }
    }

    pub fn empty() -> Trace {
        Trace::default()
    }

    /// Builds a trace from string slices, e.g. `Trace::from_names(&[&["a"], &[]])`.
    ///
    /// Panics on invalid names; meant for tests and examples.
    pub fn from_names(steps: &[&[&str]]) -> Trace {
        Trace {
            steps: steps
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|n| Prop::new(*n).expect("valid name"))
                        .collect()
                })
                .collect(),
        }
    }

    /// Decodes bitmask letters over an ordered alphabet (bit k is `alphabet[k]`).
    pub fn from_masks(alphabet: &[Prop], masks: &[u64]) -> Trace {
        Trace {
            steps: masks
                .iter()
                .map(|m| {
                    alphabet
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| m >> k & 1 == 1)
                        .map(|(_, p)| p.clone())
                        .collect()
                })
                .collect(),
        }
    }

    /// Encodes the trace as bitmasks over `alphabet`.
    pub fn masks(&self, alphabet: &[Prop]) -> Result<Vec<u64>, SemanticsError> {
        self.steps
            .iter()
            .map(|step| {
                let mut m = 0u64;
                for p in step {
                    match alphabet.iter().position(|q| q == p) {
                        Some(k) => m |= 1 << k,
                        None => return Err(SemanticsError::Undeclared(p.clone())),
                    }
                }
                Ok(m)
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reversed(&self) -> Trace {
        Trace {
            steps: self.steps.iter().rev().cloned().collect(),
        }
    }

    pub fn prefix(&self, n: usize) -> Trace {
        Trace {
            steps: self.steps[..n].to_vec(),
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("ε");
        }
        for step in &self.steps {
            f.write_str("{")?;
            for (k, p) in step.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// `π ⊨ f`, i.e. `f` holds at position 0.
///
/// Every connective is evaluated directly, so LTLf formulas do not need to be
/// expanded first. Positions range over `0..=len`; at `len` the trace is over,
/// where atoms are false, `<p>f` can only follow tests, and `[p]f` holds
/// unless a test-only path reaches a failing `f`.
pub fn satisfies(trace: &Trace, f: &Formula) -> bool {
    Evaluator::new(trace).holds(f, 0)
}

/// Like [`satisfies`], but first checks that `f` only mentions declared propositions.
pub fn satisfies_over(
    alphabet: &BTreeSet<Prop>,
    trace: &Trace,
    f: &Formula,
) -> Result<bool, SemanticsError> {
    if let Some(p) = f.props().into_iter().find(|p| !alphabet.contains(p)) {
        return Err(SemanticsError::Undeclared(p));
    }
    Ok(satisfies(trace, f))
}

/// `π(i, j) ∈ L(ρ)`.
pub fn path_matches(trace: &Trace, i: usize, j: usize, rho: &PathExpr) -> bool {
    Evaluator::new(trace).matches(rho, i, j)
}

struct Evaluator<'t> {
    trace: &'t Trace,
    star_memo: HashMap<(usize, usize, *const PathExpr), bool>,
}

impl<'t> Evaluator<'t> {
    fn new(trace: &'t Trace) -> Self {
        Evaluator {
            trace,
            star_memo: HashMap::new(),
        }
    }

    fn len(&self) -> usize {
        self.trace.steps.len()
    }

    fn letter_has(&self, i: usize, p: &Prop) -> bool {
        i < self.len() && self.trace.steps[i].contains(p)
    }

    fn holds(&mut self, f: &Formula, i: usize) -> bool {
        let n = self.len();
        match f {
            Formula::Tt => true,
            Formula::Ff => false,
            Formula::Atom(p) => self.letter_has(i, p),
            Formula::NotProp(p) => !self.letter_has(i, p),
            Formula::Bool(b) => *b && i < n,
            Formula::Not(a) => !self.holds(a, i),
            Formula::And(a, b) => self.holds(a, i) && self.holds(b, i),
            Formula::Or(a, b) => self.holds(a, i) || self.holds(b, i),
            Formula::Next(a) => i + 1 < n && self.holds(a, i + 1),
            Formula::WeakNext(a) => i + 1 >= n || self.holds(a, i + 1),
            Formula::Until(a, b) => {
                for j in i..n {
                    if self.holds(b, j) {
                        return true;
                    }
                    if !self.holds(a, j) {
                        return false;
                    }
                }
                false
            }
            Formula::Release(a, b) => {
                for j in i..n {
                    if !self.holds(b, j) {
                        return false;
                    }
                    if self.holds(a, j) {
                        return true;
                    }
                }
                true
            }
            Formula::Eventually(a) => (i..n).any(|j| self.holds(a, j)),
            Formula::Always(a) => (i..n).all(|j| self.holds(a, j)),
            Formula::Diamond(rho, a) => {
                (i..=n.max(i)).any(|j| self.matches(rho, i, j) && self.holds(a, j))
            }
            Formula::BoxOp(rho, a) => {
                (i..=n.max(i)).all(|j| !self.matches(rho, i, j) || self.holds(a, j))
            }
            Formula::Last => i + 1 == n,
            Formula::End => i >= n,
        }
    }

    fn matches(&mut self, rho: &PathExpr, i: usize, j: usize) -> bool {
        if j < i {
            return false;
        }
        match rho {
            PathExpr::PropTest(g) => {
                j == i + 1 && i < self.len() && g.eval(&|p| self.trace.steps[i].contains(p))
            }
            PathExpr::Check(f) => j == i && self.holds(f, i),
            PathExpr::Union(a, b) => self.matches(a, i, j) || self.matches(b, i, j),
            PathExpr::Concat(a, b) => {
                (i..=j).any(|k| self.matches(a, i, k) && self.matches(b, k, j))
            }
            PathExpr::Star(body) => {
                if i == j {
                    return true;
                }
                let key = (i, j, rho as *const PathExpr);
                if let Some(&v) = self.star_memo.get(&key) {
                    return v;
                }
                // A body iteration that stays at `i` adds nothing to the least
                // fixpoint, so only strictly advancing splits are tried.
                let v = (i + 1..=j).any(|k| self.matches(body, i, k) && self.matches(rho, k, j));
                self.star_memo.insert(key, v);
                v
            }
        }
    }
}

/// Every trace of length `0..=max_len` over `2^alphabet`, shortest first and
/// lexicographic (by bitmask letter) within a length.
pub fn enumerate_traces(
    alphabet: &BTreeSet<Prop>,
    max_len: usize,
) -> Result<Traces, SemanticsError> {
    enumerate_traces_capped(alphabet, max_len, DEFAULT_TRACE_CAP)
}

pub fn enumerate_traces_capped(
    alphabet: &BTreeSet<Prop>,
    max_len: usize,
    cap: u64,
) -> Result<Traces, SemanticsError> {
    let letters = 1u64.checked_shl(alphabet.len() as u32).unwrap_or(u64::MAX);
    let mut count: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..=max_len {
        count = count.saturating_add(layer);
        layer = layer.saturating_mul(letters);
    }
    if count > cap {
        return Err(SemanticsError::TooManyTraces { count, cap });
    }
    Ok(Traces {
        alphabet: alphabet.iter().cloned().collect(),
        letters,
        max_len,
        current: Some(Vec::new()),
    })
}

/// Iterator returned by [`enumerate_traces`].
pub struct Traces {
    alphabet: Vec<Prop>,
    letters: u64,
    max_len: usize,
    current: Option<Vec<u64>>,
}

impl Iterator for Traces {
    type Item = Trace;

    fn next(&mut self) -> Option<Trace> {
        let cur = self.current.take()?;
        let out = Trace::from_masks(&self.alphabet, &cur);
        let mut next = cur;
        // Odometer increment; overflow moves to the next length.
        let mut k = next.len();
        loop {
            if k == 0 {
                if next.len() == self.max_len {
                    return Some(out);
                }
                next = vec![0; next.len() + 1];
                break;
            }
            k -= 1;
            next[k] += 1;
            if next[k] < self.letters {
                break;
            }
            next[k] = 0;
        }
        self.current = Some(next);
        Some(out)
    }
}
