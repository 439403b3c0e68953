//! Formulas of LTLf and LDLf over finite traces.
//!
//! A single [`Formula`] type covers both logics: the LTLf connectives
//! (`X`, `WX`, `U`, `R`, `F`, `G`, `last`, `end`) live next to the LDLf
//! modalities `<path>f` and `[path]f`. [`expand_sugar`] rewrites everything
//! into the LDLf core and [`to_nnf`] pushes negations down to atoms.

mod parser;
mod pretty;
mod transform;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::parse;
pub use transform::{expand_sugar, is_core, is_nnf, to_nnf};

/// Words that can never be used as proposition names.
pub const RESERVED: &[&str] = &[
    "last", "true", "false", "tt", "ff", "end", "if", "then", "else", "while", "do", "U", "R",
];

/// Name of the internal pseudo-proposition marking the final letter of a trace.
pub(crate) const LAST: &str = "last";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("`{0}` is a reserved word and cannot name a proposition")]
    Reserved(String),
    #[error("`{0}` is not a valid proposition name")]
    InvalidName(String),
}

/// A propositional symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Prop(String);

impl Prop {
    pub fn new(name: impl Into<String>) -> Result<Prop, LogicError> {
        let name = name.into();
        if RESERVED.contains(&name.as_str()) {
            return Err(LogicError::Reserved(name));
        }
        if !is_identifier(&name) {
            return Err(LogicError::InvalidName(name));
        }
        Ok(Prop(name))
    }

    /// The reserved `last` marker. Only automata construction uses it.
    pub(crate) fn last() -> Prop {
        Prop(LAST.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_last(&self) -> bool {
        self.0 == LAST
    }
}

impl TryFrom<String> for Prop {
    type Error = LogicError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Prop::new(value)
    }
}

impl From<Prop> for String {
    fn from(p: Prop) -> String {
        p.0
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Boolean combination of propositions. Used as single-step path guards.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    Const(bool),
    Var(Prop),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
}

impl PropFormula {
    pub fn var(name: &str) -> PropFormula {
        PropFormula::Var(Prop::new(name).expect("valid proposition name"))
    }

    pub fn not(p: PropFormula) -> PropFormula {
        PropFormula::Not(Box::new(p))
    }

    pub fn and(a: PropFormula, b: PropFormula) -> PropFormula {
        PropFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PropFormula, b: PropFormula) -> PropFormula {
        PropFormula::Or(Box::new(a), Box::new(b))
    }

    /// Evaluates the guard with `holds` deciding each proposition.
    pub fn eval(&self, holds: &impl Fn(&Prop) -> bool) -> bool {
        match self {
            PropFormula::Const(b) => *b,
            PropFormula::Var(p) => holds(p),
            PropFormula::Not(p) => !p.eval(holds),
            PropFormula::And(a, b) => a.eval(holds) && b.eval(holds),
            PropFormula::Or(a, b) => a.eval(holds) || b.eval(holds),
        }
    }

    pub fn props_into(&self, out: &mut BTreeSet<Prop>) {
        match self {
            PropFormula::Const(_) => {}
            PropFormula::Var(p) => {
                out.insert(p.clone());
            }
            PropFormula::Not(p) => p.props_into(out),
            PropFormula::And(a, b) | PropFormula::Or(a, b) => {
                a.props_into(out);
                b.props_into(out);
            }
        }
    }

    /// The same boolean combination read as an LTLf/LDLf formula.
    pub fn to_formula(&self) -> Formula {
        match self {
            PropFormula::Const(b) => Formula::Bool(*b),
            PropFormula::Var(p) => Formula::Atom(p.clone()),
            PropFormula::Not(p) => Formula::not(p.to_formula()),
            PropFormula::And(a, b) => Formula::and(a.to_formula(), b.to_formula()),
            PropFormula::Or(a, b) => Formula::or(a.to_formula(), b.to_formula()),
        }
    }
}

/// Regular path expressions over propositional guards and formula tests.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathExpr {
    /// One step whose letter satisfies the guard.
    PropTest(PropFormula),
    /// `f?`: stay in place if `f` holds.
    Check(Box<Formula>),
    Union(Box<PathExpr>, Box<PathExpr>),
    Concat(Box<PathExpr>, Box<PathExpr>),
    Star(Box<PathExpr>),
}

impl PathExpr {
    pub fn guard(p: PropFormula) -> PathExpr {
        PathExpr::PropTest(p)
    }

    pub fn check(f: Formula) -> PathExpr {
        PathExpr::Check(Box::new(f))
    }

    pub fn union(a: PathExpr, b: PathExpr) -> PathExpr {
        PathExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn concat(a: PathExpr, b: PathExpr) -> PathExpr {
        PathExpr::Concat(Box::new(a), Box::new(b))
    }

    pub fn star(a: PathExpr) -> PathExpr {
        PathExpr::Star(Box::new(a))
    }

    fn props_into(&self, out: &mut BTreeSet<Prop>) {
        match self {
            PathExpr::PropTest(p) => p.props_into(out),
            PathExpr::Check(f) => f.props_into(out),
            PathExpr::Union(a, b) | PathExpr::Concat(a, b) => {
                a.props_into(out);
                b.props_into(out);
            }
            PathExpr::Star(a) => a.props_into(out),
        }
    }

    fn size(&self) -> usize {
        match self {
            PathExpr::PropTest(_) => 1,
            PathExpr::Check(f) => 1 + f.size(),
            PathExpr::Union(a, b) | PathExpr::Concat(a, b) => 1 + a.size() + b.size(),
            PathExpr::Star(a) => 1 + a.size(),
        }
    }
}

/// An LTLf or LDLf formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Tt,
    Ff,
    Atom(Prop),
    /// Negated atom. Produced by [`to_nnf`] only.
    NotProp(Prop),
    /// The propositional constants `true` / `false` (a step exists / never).
    Bool(bool),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Diamond(PathExpr, Box<Formula>),
    BoxOp(PathExpr, Box<Formula>),
    Last,
    End,
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Prop::new(name).expect("valid proposition name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Formula {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn diamond(p: PathExpr, f: Formula) -> Formula {
        Formula::Diamond(p, Box::new(f))
    }

    pub fn box_op(p: PathExpr, f: Formula) -> Formula {
        Formula::BoxOp(p, Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// Every proposition mentioned anywhere in the formula.
    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.props_into(&mut out);
        out
    }

    fn props_into(&self, out: &mut BTreeSet<Prop>) {
        match self {
            Formula::Tt | Formula::Ff | Formula::Bool(_) | Formula::Last | Formula::End => {}
            Formula::Atom(p) | Formula::NotProp(p) => {
                out.insert(p.clone());
            }
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Always(f) => f.props_into(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.props_into(out);
                b.props_into(out);
            }
            Formula::Diamond(p, f) | Formula::BoxOp(p, f) => {
                p.props_into(out);
                f.props_into(out);
            }
        }
    }

    /// Number of AST nodes, path nodes included.
    pub fn size(&self) -> usize {
        match self {
            Formula::Tt
            | Formula::Ff
            | Formula::Bool(_)
            | Formula::Last
            | Formula::End
            | Formula::Atom(_)
            | Formula::NotProp(_) => 1,
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Always(f) => 1 + f.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => 1 + a.size() + b.size(),
            Formula::Diamond(p, f) | Formula::BoxOp(p, f) => 1 + p.size() + f.size(),
        }
    }

    /// True when no path modality occurs, i.e. the formula is plain LTLf.
    pub fn is_ltlf(&self) -> bool {
        match self {
            Formula::Diamond(..) | Formula::BoxOp(..) => false,
            Formula::Tt
            | Formula::Ff
            | Formula::Bool(_)
            | Formula::Last
            | Formula::End
            | Formula::Atom(_)
            | Formula::NotProp(_) => true,
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Always(f) => f.is_ltlf(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => a.is_ltlf() && b.is_ltlf(),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
