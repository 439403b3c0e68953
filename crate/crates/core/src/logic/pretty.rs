//! Canonical ASCII rendering. Binary connectives are always parenthesised so
//! the output parses back to the same tree.

use std::fmt;

use super::{Formula, PathExpr, PropFormula};

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropFormula::Const(true) => f.write_str("true"),
            PropFormula::Const(false) => f.write_str("false"),
            PropFormula::Var(p) => write!(f, "{p}"),
            PropFormula::Not(p) => write!(f, "!{p}"),
            PropFormula::And(a, b) => write!(f, "({a} && {b})"),
            PropFormula::Or(a, b) => write!(f, "({a} || {b})"),
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathExpr::PropTest(g @ (PropFormula::Var(_) | PropFormula::Const(_))) => {
                write!(f, "{g}")
            }
            PathExpr::PropTest(g) => write!(f, "({g})"),
            PathExpr::Check(body) => write!(f, "({body})?"),
            PathExpr::Union(a, b) => write!(f, "({a} + {b})"),
            PathExpr::Concat(a, b) => write!(f, "({a} ; {b})"),
            PathExpr::Star(a) => write!(f, "{a}*"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Tt => f.write_str("tt"),
            Formula::Ff => f.write_str("ff"),
            Formula::Bool(true) => f.write_str("true"),
            Formula::Bool(false) => f.write_str("false"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::NotProp(p) => write!(f, "!{p}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(a, b) => write!(f, "({a} && {b})"),
            Formula::Or(a, b) => write!(f, "({a} || {b})"),
            Formula::Next(a) => write!(f, "X {a}"),
            Formula::WeakNext(a) => write!(f, "WX {a}"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
            Formula::Release(a, b) => write!(f, "({a} R {b})"),
            Formula::Eventually(a) => write!(f, "F {a}"),
            Formula::Always(a) => write!(f, "G {a}"),
            Formula::Diamond(p, a) => write!(f, "<{p}> {a}"),
            Formula::BoxOp(p, a) => write!(f, "[{p}] {a}"),
            Formula::Last => f.write_str("last"),
            Formula::End => f.write_str("end"),
        }
    }
}
