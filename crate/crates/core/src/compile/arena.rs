//! Hash-consed formula nodes. Structurally equal formulas share an id, so
//! macro-states can be plain sets of ids.

use std::collections::{BTreeSet, HashMap};

use crate::logic::{Formula, PathExpr, Prop, PropFormula};

use super::CompileError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathId(pub(crate) u32);

/// A formula node in negation normal form. Atoms `a` are stored as the
/// guard `<a>tt`; negated atoms as `[a]ff`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Tt,
    Ff,
    /// `<g>tt`: the current letter satisfies `g`.
    Prop(PropFormula),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Diamond(PathId, NodeId),
    Box(PathId, NodeId),
    /// `T_ψ`: true in one step, replaced by `ψ` when quoted.
    TMark(NodeId),
    /// `F_ψ`: false in one step, replaced by `ψ` when quoted.
    FMark(NodeId),
    Next(NodeId),
    WeakNext(NodeId),
    Until(NodeId, NodeId),
    Release(NodeId, NodeId),
    Eventually(NodeId),
    Always(NodeId),
    Last,
    End,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathNode {
    Guard(PropFormula),
    Test(NodeId),
    Union(PathId, PathId),
    Concat(PathId, PathId),
    Star(PathId),
}

/// Interning table for nodes and paths.
#[derive(Default, Debug)]
pub struct Arena {
    nodes: Vec<Node>,
    node_ids: HashMap<Node, NodeId>,
    paths: Vec<PathNode>,
    path_ids: HashMap<PathNode, PathId>,
    expanded: HashMap<NodeId, NodeId>,
    negated: HashMap<NodeId, NodeId>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena::default()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn path(&self, id: PathId) -> &PathNode {
        &self.paths[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mk(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.node_ids.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.node_ids.insert(node, id);
        id
    }

    pub fn mk_path(&mut self, path: PathNode) -> PathId {
        if let Some(&id) = self.path_ids.get(&path) {
            return id;
        }
        let id = PathId(self.paths.len() as u32);
        self.paths.push(path.clone());
        self.path_ids.insert(path, id);
        id
    }

    pub fn tt(&mut self) -> NodeId {
        self.mk(Node::Tt)
    }

    pub fn ff(&mut self) -> NodeId {
        self.mk(Node::Ff)
    }

    pub fn t_mark(&mut self, target: NodeId) -> NodeId {
        self.mk(Node::TMark(target))
    }

    pub fn f_mark(&mut self, target: NodeId) -> NodeId {
        self.mk(Node::FMark(target))
    }

    /// Interns an NNF formula. Any `Not` is rejected.
    pub fn intern(&mut self, f: &Formula) -> Result<NodeId, CompileError> {
        Ok(match f {
            Formula::Tt => self.tt(),
            Formula::Ff => self.ff(),
            Formula::Atom(p) => self.mk(Node::Prop(PropFormula::Var(p.clone()))),
            Formula::NotProp(p) => {
                let g = self.mk_path(PathNode::Guard(PropFormula::Var(p.clone())));
                let ff = self.ff();
                self.mk(Node::Box(g, ff))
            }
            Formula::Bool(b) => self.mk(Node::Prop(PropFormula::Const(*b))),
            Formula::Not(_) => return Err(CompileError::NotNnf(f.to_string())),
            Formula::And(a, b) => {
                let (a, b) = (self.intern(a)?, self.intern(b)?);
                self.mk(Node::And(a, b))
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.intern(a)?, self.intern(b)?);
                self.mk(Node::Or(a, b))
            }
            Formula::Next(a) => {
                let a = self.intern(a)?;
                self.mk(Node::Next(a))
            }
            Formula::WeakNext(a) => {
                let a = self.intern(a)?;
                self.mk(Node::WeakNext(a))
            }
            Formula::Until(a, b) => {
                let (a, b) = (self.intern(a)?, self.intern(b)?);
                self.mk(Node::Until(a, b))
            }
            Formula::Release(a, b) => {
                let (a, b) = (self.intern(a)?, self.intern(b)?);
                self.mk(Node::Release(a, b))
            }
            Formula::Eventually(a) => {
                let a = self.intern(a)?;
                self.mk(Node::Eventually(a))
            }
            Formula::Always(a) => {
                let a = self.intern(a)?;
                self.mk(Node::Always(a))
            }
            Formula::Diamond(p, a) => {
                let (p, a) = (self.intern_path(p)?, self.intern(a)?);
                self.mk(Node::Diamond(p, a))
            }
            Formula::BoxOp(p, a) => {
                let (p, a) = (self.intern_path(p)?, self.intern(a)?);
                self.mk(Node::Box(p, a))
            }
            Formula::Last => self.mk(Node::Last),
            Formula::End => self.mk(Node::End),
        })
    }

    fn intern_path(&mut self, p: &PathExpr) -> Result<PathId, CompileError> {
        Ok(match p {
            PathExpr::PropTest(g) => self.mk_path(PathNode::Guard(g.clone())),
            PathExpr::Check(f) => {
                let f = self.intern(f)?;
                self.mk_path(PathNode::Test(f))
            }
            PathExpr::Union(a, b) => {
                let (a, b) = (self.intern_path(a)?, self.intern_path(b)?);
                self.mk_path(PathNode::Union(a, b))
            }
            PathExpr::Concat(a, b) => {
                let (a, b) = (self.intern_path(a)?, self.intern_path(b)?);
                self.mk_path(PathNode::Concat(a, b))
            }
            PathExpr::Star(a) => {
                let a = self.intern_path(a)?;
                self.mk_path(PathNode::Star(a))
            }
        })
    }

    /// `E(ψ)`: replaces every `T_φ` / `F_φ` by `E(φ)`.
    pub fn e_expand(&mut self, id: NodeId) -> NodeId {
        if let Some(&done) = self.expanded.get(&id) {
            return done;
        }
        let out = match self.node(id).clone() {
            Node::TMark(t) | Node::FMark(t) => self.e_expand(t),
            Node::And(a, b) => {
                let (a, b) = (self.e_expand(a), self.e_expand(b));
                self.mk(Node::And(a, b))
            }
            Node::Or(a, b) => {
                let (a, b) = (self.e_expand(a), self.e_expand(b));
                self.mk(Node::Or(a, b))
            }
            Node::Diamond(p, a) => {
                let a = self.e_expand(a);
                self.mk(Node::Diamond(p, a))
            }
            Node::Box(p, a) => {
                let a = self.e_expand(a);
                self.mk(Node::Box(p, a))
            }
            // Markers are only ever placed under path modalities, and LTL
            // nodes never contain path modalities built by the compiler.
            _ => id,
        };
        self.expanded.insert(id, out);
        out
    }

    /// `nnf(¬ψ)` on nodes. Markers cannot be negated.
    pub fn negate(&mut self, id: NodeId) -> NodeId {
        if let Some(&done) = self.negated.get(&id) {
            return done;
        }
        let out = match self.node(id).clone() {
            Node::Tt => self.ff(),
            Node::Ff => self.tt(),
            Node::Prop(g) => {
                let g = self.mk_path(PathNode::Guard(g));
                let ff = self.ff();
                self.mk(Node::Box(g, ff))
            }
            Node::And(a, b) => {
                let (a, b) = (self.negate(a), self.negate(b));
                self.mk(Node::Or(a, b))
            }
            Node::Or(a, b) => {
                let (a, b) = (self.negate(a), self.negate(b));
                self.mk(Node::And(a, b))
            }
            Node::Diamond(p, a) => {
                let a = self.negate(a);
                self.mk(Node::Box(p, a))
            }
            Node::Box(p, a) => {
                let a = self.negate(a);
                self.mk(Node::Diamond(p, a))
            }
            Node::TMark(_) | Node::FMark(_) => panic!("markers never occur inside tests"),
            Node::Next(a) => {
                let a = self.negate(a);
                self.mk(Node::WeakNext(a))
            }
            Node::WeakNext(a) => {
                let a = self.negate(a);
                self.mk(Node::Next(a))
            }
            Node::Until(a, b) => {
                let (a, b) = (self.negate(a), self.negate(b));
                self.mk(Node::Release(a, b))
            }
            Node::Release(a, b) => {
                let (a, b) = (self.negate(a), self.negate(b));
                self.mk(Node::Until(a, b))
            }
            Node::Eventually(a) => {
                let a = self.negate(a);
                self.mk(Node::Always(a))
            }
            Node::Always(a) => {
                let a = self.negate(a);
                self.mk(Node::Eventually(a))
            }
            Node::Last => {
                let end = self.mk(Node::End);
                let tt = self.tt();
                let next = self.mk(Node::Next(tt));
                self.mk(Node::Or(end, next))
            }
            Node::End => self.mk(Node::Prop(PropFormula::Const(true))),
        };
        self.negated.insert(id, out);
        out
    }

    /// The formula a marker-free node stands for. Markers are rendered as
    /// their expansion.
    pub fn to_formula(&self, id: NodeId) -> Formula {
        match self.node(id) {
            Node::Tt => Formula::Tt,
            Node::Ff => Formula::Ff,
            Node::Prop(PropFormula::Var(p)) => Formula::Atom(p.clone()),
            Node::Prop(PropFormula::Const(b)) => Formula::Bool(*b),
            Node::Prop(g) => Formula::diamond(PathExpr::PropTest(g.clone()), Formula::Tt),
            Node::And(a, b) => Formula::and(self.to_formula(*a), self.to_formula(*b)),
            Node::Or(a, b) => Formula::or(self.to_formula(*a), self.to_formula(*b)),
            Node::Box(p, a)
                if matches!(self.path(*p), PathNode::Guard(PropFormula::Var(_)))
                    && *self.node(*a) == Node::Ff =>
            {
                let PathNode::Guard(PropFormula::Var(v)) = self.path(*p) else {
                    unreachable!()
                };
                Formula::NotProp(v.clone())
            }
            Node::Diamond(p, a) => Formula::diamond(self.path_expr(*p), self.to_formula(*a)),
            Node::Box(p, a) => Formula::box_op(self.path_expr(*p), self.to_formula(*a)),
            Node::TMark(t) | Node::FMark(t) => self.to_formula(*t),
            Node::Next(a) => Formula::next(self.to_formula(*a)),
            Node::WeakNext(a) => Formula::weak_next(self.to_formula(*a)),
            Node::Until(a, b) => Formula::until(self.to_formula(*a), self.to_formula(*b)),
            Node::Release(a, b) => Formula::release(self.to_formula(*a), self.to_formula(*b)),
            Node::Eventually(a) => Formula::eventually(self.to_formula(*a)),
            Node::Always(a) => Formula::always(self.to_formula(*a)),
            Node::Last => Formula::Last,
            Node::End => Formula::End,
        }
    }

    fn path_expr(&self, id: PathId) -> PathExpr {
        match self.path(id) {
            PathNode::Guard(g) => PathExpr::PropTest(g.clone()),
            PathNode::Test(f) => PathExpr::check(self.to_formula(*f)),
            PathNode::Union(a, b) => PathExpr::union(self.path_expr(*a), self.path_expr(*b)),
            PathNode::Concat(a, b) => PathExpr::concat(self.path_expr(*a), self.path_expr(*b)),
            PathNode::Star(a) => PathExpr::star(self.path_expr(*a)),
        }
    }

    /// Propositions used by a node.
    pub fn props(&self, id: NodeId) -> BTreeSet<Prop> {
        self.to_formula(id).props()
    }

    /// Fischer–Ladner style closure: every marker-free formula that the
    /// construction can quote when starting from `root`.
    pub fn closure(&mut self, root: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut work = vec![root];
        while let Some(id) = work.pop() {
            if !seen.insert(id) {
                continue;
            }
            match self.node(id).clone() {
                Node::Tt | Node::Ff | Node::Prop(_) | Node::Last | Node::End => {}
                Node::TMark(t) | Node::FMark(t) => work.push(t),
                Node::And(a, b) | Node::Or(a, b) | Node::Until(a, b) | Node::Release(a, b) => {
                    work.push(a);
                    work.push(b);
                }
                Node::Next(a) | Node::WeakNext(a) | Node::Eventually(a) | Node::Always(a) => {
                    work.push(a)
                }
                Node::Diamond(p, a) => self.unfold_path(p, a, true, &mut work),
                Node::Box(p, a) => self.unfold_path(p, a, false, &mut work),
            }
        }
        seen
    }

    fn unfold_path(&mut self, p: PathId, body: NodeId, diamond: bool, work: &mut Vec<NodeId>) {
        let wrap = |arena: &mut Arena, p: PathId, body: NodeId| {
            arena.mk(if diamond {
                Node::Diamond(p, body)
            } else {
                Node::Box(p, body)
            })
        };
        match self.path(p).clone() {
            PathNode::Guard(_) => work.push(body),
            PathNode::Test(t) => {
                work.push(body);
                work.push(if diamond { t } else { self.negate(t) });
            }
            PathNode::Union(a, b) => {
                let (x, y) = (wrap(self, a, body), wrap(self, b, body));
                work.push(x);
                work.push(y);
            }
            PathNode::Concat(a, b) => {
                let inner = wrap(self, b, body);
                let outer = wrap(self, a, inner);
                work.push(outer);
            }
            PathNode::Star(a) => {
                let star = wrap(self, p, body);
                let unrolled = wrap(self, a, star);
                work.push(body);
                work.push(unrolled);
            }
        }
    }
}
