//! The δ function of the implicit alternating automaton, and its value at
//! the end of the trace.

use std::collections::HashMap;

use crate::logic::{Prop, PropFormula};

use super::arena::{Arena, Node, NodeId, PathId, PathNode};
use super::posbool::PosBool;

/// Letter over `alphabet ∪ {last}`: bit `k` for `alphabet[k]`, bit
/// `alphabet.len()` for `last`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub mask: u64,
    pub last: bool,
}

/// δ and δ(·, ε) over a shared arena, memoised per node and letter.
#[derive(Debug)]
pub struct Delta {
    pub arena: Arena,
    alphabet: Vec<Prop>,
    memo: HashMap<(NodeId, Letter), PosBool<NodeId>>,
    eps_memo: HashMap<NodeId, bool>,
}

impl Delta {
    pub fn new(arena: Arena, alphabet: Vec<Prop>) -> Delta {
        Delta {
            arena,
            alphabet,
            memo: HashMap::new(),
            eps_memo: HashMap::new(),
        }
    }

    pub fn alphabet(&self) -> &[Prop] {
        &self.alphabet
    }

    fn holds(&self, g: &PropFormula, letter: Letter) -> bool {
        g.eval(&|p| {
            self.alphabet
                .iter()
                .position(|q| q == p)
                .is_some_and(|k| letter.mask >> k & 1 == 1)
        })
    }

    /// Quotes a marker-free node: boolean structure becomes PosBool
    /// structure, `tt`/`ff` become constants, everything else an atom.
    pub fn quote(&self, id: NodeId) -> PosBool<NodeId> {
        match self.arena.node(id) {
            Node::Tt => PosBool::True,
            Node::Ff => PosBool::False,
            Node::And(a, b) => self.quote(*a).and(self.quote(*b)),
            Node::Or(a, b) => self.quote(*a).or(self.quote(*b)),
            _ => PosBool::Atom(id),
        }
    }

    pub fn delta(&mut self, id: NodeId, letter: Letter) -> PosBool<NodeId> {
        if let Some(done) = self.memo.get(&(id, letter)) {
            return done.clone();
        }
        let out = match self.arena.node(id).clone() {
            Node::Tt | Node::TMark(_) => PosBool::True,
            Node::Ff | Node::FMark(_) => PosBool::False,
            Node::Prop(g) => PosBool::constant(self.holds(&g, letter)),
            Node::And(a, b) => self.delta(a, letter).and(self.delta(b, letter)),
            Node::Or(a, b) => self.delta(a, letter).or(self.delta(b, letter)),
            Node::Diamond(p, body) => self.delta_diamond(p, body, letter),
            Node::Box(p, body) => self.delta_box(p, body, letter),
            Node::Next(a) => {
                if letter.last {
                    PosBool::False
                } else {
                    self.quote(a)
                }
            }
            Node::WeakNext(a) => {
                if letter.last {
                    PosBool::True
                } else {
                    self.quote(a)
                }
            }
            Node::Eventually(a) => {
                let later = if letter.last {
                    PosBool::False
                } else {
                    PosBool::Atom(id)
                };
                self.delta(a, letter).or(later)
            }
            Node::Always(a) => {
                let later = if letter.last {
                    PosBool::True
                } else {
                    PosBool::Atom(id)
                };
                self.delta(a, letter).and(later)
            }
            Node::Until(a, b) => {
                let later = if letter.last {
                    PosBool::False
                } else {
                    PosBool::Atom(id)
                };
                let hold = self.delta(a, letter).and(later);
                self.delta(b, letter).or(hold)
            }
            Node::Release(a, b) => {
                let later = if letter.last {
                    PosBool::True
                } else {
                    PosBool::Atom(id)
                };
                let release = self.delta(a, letter).or(later);
                self.delta(b, letter).and(release)
            }
            Node::Last => PosBool::constant(letter.last),
            Node::End => PosBool::False,
        };
        self.memo.insert((id, letter), out.clone());
        out
    }

    fn delta_diamond(&mut self, p: PathId, body: NodeId, letter: Letter) -> PosBool<NodeId> {
        match self.arena.path(p).clone() {
            PathNode::Guard(g) => {
                if !self.holds(&g, letter) {
                    PosBool::False
                } else {
                    let e = self.arena.e_expand(body);
                    if letter.last {
                        PosBool::constant(self.epsilon(e))
                    } else {
                        self.quote(e)
                    }
                }
            }
            PathNode::Test(t) => self.delta(t, letter).and(self.delta(body, letter)),
            PathNode::Union(a, b) => {
                let x = self.delta_diamond(a, body, letter);
                x.or(self.delta_diamond(b, body, letter))
            }
            PathNode::Concat(a, b) => {
                let inner = self.arena.mk(Node::Diamond(b, body));
                self.delta_diamond(a, inner, letter)
            }
            PathNode::Star(a) => {
                let star = self.arena.mk(Node::Diamond(p, body));
                let mark = self.arena.f_mark(star);
                let stop = self.delta(body, letter);
                stop.or(self.delta_diamond(a, mark, letter))
            }
        }
    }

    fn delta_box(&mut self, p: PathId, body: NodeId, letter: Letter) -> PosBool<NodeId> {
        match self.arena.path(p).clone() {
            PathNode::Guard(g) => {
                if !self.holds(&g, letter) {
                    PosBool::True
                } else {
                    // E(·) is applied on both branches: a `T_ψ` quoted as is
                    // would discharge the obligation for good.
                    let e = self.arena.e_expand(body);
                    if letter.last {
                        PosBool::constant(self.epsilon(e))
                    } else {
                        self.quote(e)
                    }
                }
            }
            PathNode::Test(t) => {
                let nt = self.arena.negate(t);
                self.delta(nt, letter).or(self.delta(body, letter))
            }
            PathNode::Union(a, b) => {
                let x = self.delta_box(a, body, letter);
                x.and(self.delta_box(b, body, letter))
            }
            PathNode::Concat(a, b) => {
                let inner = self.arena.mk(Node::Box(b, body));
                self.delta_box(a, inner, letter)
            }
            PathNode::Star(a) => {
                let star = self.arena.mk(Node::Box(p, body));
                let mark = self.arena.t_mark(star);
                let stop = self.delta(body, letter);
                stop.and(self.delta_box(a, mark, letter))
            }
        }
    }

    /// Truth of a node once the trace is over.
    ///
    /// Path modalities are evaluated exactly rather than as constants:
    /// `<ψ?>φ` can hold past the end, and `[ψ?]φ` can fail there.
    pub fn epsilon(&mut self, id: NodeId) -> bool {
        if let Some(&v) = self.eps_memo.get(&id) {
            return v;
        }
        let v = match self.arena.node(id).clone() {
            Node::Tt | Node::TMark(_) => true,
            Node::Ff | Node::FMark(_) | Node::Prop(_) => false,
            Node::And(a, b) => self.epsilon(a) && self.epsilon(b),
            Node::Or(a, b) => self.epsilon(a) || self.epsilon(b),
            Node::Diamond(p, body) => self.eps_diamond(p, body),
            Node::Box(p, body) => self.eps_box(p, body),
            Node::Next(_) | Node::Eventually(_) | Node::Until(..) | Node::Last => false,
            Node::WeakNext(_) | Node::Always(_) | Node::Release(..) | Node::End => true,
        };
        self.eps_memo.insert(id, v);
        v
    }

    fn eps_diamond(&mut self, p: PathId, body: NodeId) -> bool {
        match self.arena.path(p).clone() {
            PathNode::Guard(_) => false,
            PathNode::Test(t) => self.epsilon(t) && self.epsilon(body),
            PathNode::Union(a, b) => self.eps_diamond(a, body) || self.eps_diamond(b, body),
            PathNode::Concat(a, b) => {
                let inner = self.arena.mk(Node::Diamond(b, body));
                self.eps_diamond(a, inner)
            }
            PathNode::Star(a) => {
                let star = self.arena.mk(Node::Diamond(p, body));
                let mark = self.arena.f_mark(star);
                self.epsilon(body) || self.eps_diamond(a, mark)
            }
        }
    }

    fn eps_box(&mut self, p: PathId, body: NodeId) -> bool {
        match self.arena.path(p).clone() {
            PathNode::Guard(_) => true,
            PathNode::Test(t) => {
                let nt = self.arena.negate(t);
                self.epsilon(nt) || self.epsilon(body)
            }
            PathNode::Union(a, b) => self.eps_box(a, body) && self.eps_box(b, body),
            PathNode::Concat(a, b) => {
                let inner = self.arena.mk(Node::Box(b, body));
                self.eps_box(a, inner)
            }
            PathNode::Star(a) => {
                let star = self.arena.mk(Node::Box(p, body));
                let mark = self.arena.t_mark(star);
                self.epsilon(body) && self.eps_box(a, mark)
            }
        }
    }
}
