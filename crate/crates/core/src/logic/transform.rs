use super::{Formula, PathExpr, PropFormula};

fn step() -> PathExpr {
    PathExpr::guard(PropFormula::Const(true))
}

/// `<true>tt`: the current position is inside the trace.
fn not_end() -> Formula {
    Formula::diamond(step(), Formula::Tt)
}

/// Rewrites every LTLf connective, `last`, `end` and the propositional
/// constants into the LDLf core (`tt`, `ff`, atoms, `!`, `&&`, `||`,
/// `<path>`, `[path]`).
///
/// `X f` becomes `<true>f` and `a U b` becomes `<(a?; true)*>b`. When the
/// body can hold at the position just past the last letter (for example
/// `!a`), it is conjoined with `<true>tt` so that strong next and until keep
/// their LTLf meaning. `end` is `[true?]ff` and `last` is `<true>end`.
pub fn expand_sugar(f: &Formula) -> Formula {
    match f {
        Formula::Tt | Formula::Ff | Formula::Atom(_) => f.clone(),
        Formula::NotProp(p) => Formula::not(Formula::Atom(p.clone())),
        Formula::Bool(true) => not_end(),
        Formula::Bool(false) => Formula::Ff,
        Formula::Not(a) => Formula::not(expand_sugar(a)),
        Formula::And(a, b) => Formula::and(expand_sugar(a), expand_sugar(b)),
        Formula::Or(a, b) => Formula::or(expand_sugar(a), expand_sugar(b)),
        Formula::Next(a) => Formula::diamond(step(), inside_trace(expand_sugar(a))),
        Formula::WeakNext(a) => {
            Formula::not(expand_sugar(&Formula::next(Formula::not((**a).clone()))))
        }
        Formula::Until(a, b) => Formula::diamond(
            PathExpr::star(PathExpr::concat(PathExpr::check(expand_sugar(a)), step())),
            inside_trace(expand_sugar(b)),
        ),
        Formula::Release(a, b) => Formula::not(expand_sugar(&Formula::until(
            Formula::not((**a).clone()),
            Formula::not((**b).clone()),
        ))),
        Formula::Eventually(a) => expand_sugar(&Formula::until(Formula::Bool(true), (**a).clone())),
        Formula::Always(a) => Formula::not(expand_sugar(&Formula::eventually(Formula::not(
            (**a).clone(),
        )))),
        Formula::Diamond(p, a) => Formula::diamond(expand_path(p), expand_sugar(a)),
        Formula::BoxOp(p, a) => Formula::box_op(expand_path(p), expand_sugar(a)),
        Formula::Last => Formula::diamond(step(), expand_sugar(&Formula::End)),
        Formula::End => Formula::box_op(PathExpr::check(not_end()), Formula::Ff),
    }
}

fn expand_path(p: &PathExpr) -> PathExpr {
    match p {
        PathExpr::PropTest(_) => p.clone(),
        PathExpr::Check(f) => PathExpr::check(expand_sugar(f)),
        PathExpr::Union(a, b) => PathExpr::union(expand_path(a), expand_path(b)),
        PathExpr::Concat(a, b) => PathExpr::concat(expand_path(a), expand_path(b)),
        PathExpr::Star(a) => PathExpr::star(expand_path(a)),
    }
}

fn inside_trace(f: Formula) -> Formula {
    if false_at_end(&f) {
        f
    } else {
        Formula::and(f, not_end())
    }
}

/// Can the path match without consuming a letter? Over-approximates.
fn nullable(p: &PathExpr) -> bool {
    match p {
        PathExpr::PropTest(_) => false,
        PathExpr::Check(_) | PathExpr::Star(_) => true,
        PathExpr::Union(a, b) => nullable(a) || nullable(b),
        PathExpr::Concat(a, b) => nullable(a) && nullable(b),
    }
}

/// Sound syntactic check that a core formula is false once the trace is over.
fn false_at_end(f: &Formula) -> bool {
    match f {
        Formula::Ff | Formula::Atom(_) => true,
        Formula::Not(a) => true_at_end(a),
        Formula::And(a, b) => false_at_end(a) || false_at_end(b),
        Formula::Or(a, b) => false_at_end(a) && false_at_end(b),
        Formula::Diamond(p, a) => !nullable(p) || false_at_end(a),
        _ => false,
    }
}

fn true_at_end(f: &Formula) -> bool {
    match f {
        Formula::Tt => true,
        Formula::Not(a) => false_at_end(a),
        Formula::And(a, b) => true_at_end(a) && true_at_end(b),
        Formula::Or(a, b) => true_at_end(a) || true_at_end(b),
        Formula::BoxOp(p, a) => !nullable(p) || true_at_end(a),
        _ => false,
    }
}

/// Pushes negation down to atoms.
///
/// Works on LTLf and LDLf alike: `!X f` becomes `WX !f`, `!(a U b)` becomes
/// `!a R !b`, `!<p>f` becomes `[p]!f`. Tests inside paths are normalised
/// too; propositional guards are left untouched.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::Tt
        | Formula::Ff
        | Formula::Atom(_)
        | Formula::NotProp(_)
        | Formula::Bool(_)
        | Formula::Last
        | Formula::End => f.clone(),
        Formula::Not(a) => negate(a),
        Formula::And(a, b) => Formula::and(to_nnf(a), to_nnf(b)),
        Formula::Or(a, b) => Formula::or(to_nnf(a), to_nnf(b)),
        Formula::Next(a) => Formula::next(to_nnf(a)),
        Formula::WeakNext(a) => Formula::weak_next(to_nnf(a)),
        Formula::Until(a, b) => Formula::until(to_nnf(a), to_nnf(b)),
        Formula::Release(a, b) => Formula::release(to_nnf(a), to_nnf(b)),
        Formula::Eventually(a) => Formula::eventually(to_nnf(a)),
        Formula::Always(a) => Formula::always(to_nnf(a)),
        Formula::Diamond(p, a) => Formula::diamond(nnf_path(p), to_nnf(a)),
        Formula::BoxOp(p, a) => Formula::box_op(nnf_path(p), to_nnf(a)),
    }
}

fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Tt => Formula::Ff,
        Formula::Ff => Formula::Tt,
        Formula::Atom(p) => Formula::NotProp(p.clone()),
        Formula::NotProp(p) => Formula::Atom(p.clone()),
        // `true` fails only past the end of the trace; `false` never holds.
        Formula::Bool(true) => Formula::End,
        Formula::Bool(false) => Formula::Tt,
        Formula::Not(a) => to_nnf(a),
        Formula::And(a, b) => Formula::or(negate(a), negate(b)),
        Formula::Or(a, b) => Formula::and(negate(a), negate(b)),
        Formula::Next(a) => Formula::weak_next(negate(a)),
        Formula::WeakNext(a) => Formula::next(negate(a)),
        Formula::Until(a, b) => Formula::release(negate(a), negate(b)),
        Formula::Release(a, b) => Formula::until(negate(a), negate(b)),
        Formula::Eventually(a) => Formula::always(negate(a)),
        Formula::Always(a) => Formula::eventually(negate(a)),
        Formula::Diamond(p, a) => Formula::box_op(nnf_path(p), negate(a)),
        Formula::BoxOp(p, a) => Formula::diamond(nnf_path(p), negate(a)),
        Formula::Last => Formula::or(Formula::End, Formula::next(Formula::Tt)),
        Formula::End => Formula::Bool(true),
    }
}

fn nnf_path(p: &PathExpr) -> PathExpr {
    match p {
        PathExpr::PropTest(_) => p.clone(),
        PathExpr::Check(f) => PathExpr::check(to_nnf(f)),
        PathExpr::Union(a, b) => PathExpr::union(nnf_path(a), nnf_path(b)),
        PathExpr::Concat(a, b) => PathExpr::concat(nnf_path(a), nnf_path(b)),
        PathExpr::Star(a) => PathExpr::star(nnf_path(a)),
    }
}

/// True when only LDLf core constructs occur (the image of [`expand_sugar`]).
pub fn is_core(f: &Formula) -> bool {
    match f {
        Formula::Tt | Formula::Ff | Formula::Atom(_) => true,
        Formula::Not(a) => is_core(a),
        Formula::And(a, b) | Formula::Or(a, b) => is_core(a) && is_core(b),
        Formula::Diamond(p, a) | Formula::BoxOp(p, a) => path_is(p, &is_core) && is_core(a),
        _ => false,
    }
}

/// True when `Not` never occurs; negation survives only as `NotProp`.
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::Not(_) => false,
        Formula::Tt
        | Formula::Ff
        | Formula::Atom(_)
        | Formula::NotProp(_)
        | Formula::Bool(_)
        | Formula::Last
        | Formula::End => true,
        Formula::Next(a) | Formula::WeakNext(a) | Formula::Eventually(a) | Formula::Always(a) => {
            is_nnf(a)
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
            is_nnf(a) && is_nnf(b)
        }
        Formula::Diamond(p, a) | Formula::BoxOp(p, a) => path_is(p, &is_nnf) && is_nnf(a),
    }
}

fn path_is(p: &PathExpr, pred: &impl Fn(&Formula) -> bool) -> bool {
    match p {
        PathExpr::PropTest(_) => true,
        PathExpr::Check(f) => pred(f),
        PathExpr::Union(a, b) | PathExpr::Concat(a, b) => path_is(a, pred) && path_is(b, pred),
        PathExpr::Star(a) => path_is(a, pred),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;

    fn a() -> Formula {
        Formula::atom("a")
    }

    #[test]
    fn next_of_atom() {
        let f = expand_sugar(&Formula::next(a()));
        assert_eq!(f, Formula::diamond(step(), a()));
    }

    #[test]
    fn tt_is_fixed() {
        assert_eq!(expand_sugar(&Formula::Tt), Formula::Tt);
    }

    #[test]
    fn until_of_atoms() {
        let f = expand_sugar(&Formula::until(a(), Formula::atom("b")));
        let expected = Formula::diamond(
            PathExpr::star(PathExpr::concat(PathExpr::check(a()), step())),
            Formula::atom("b"),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn next_of_negation_stays_inside_trace() {
        let f = expand_sugar(&Formula::next(Formula::not(a())));
        assert_eq!(
            f,
            Formula::diamond(step(), Formula::and(Formula::not(a()), not_end()))
        );
    }

    #[test]
    fn end_and_last() {
        assert_eq!(
            expand_sugar(&Formula::End),
            parse("[(<true> tt)?] ff").unwrap()
        );
        assert_eq!(
            expand_sugar(&Formula::Last),
            parse("<true> [(<true> tt)?] ff").unwrap()
        );
    }

    #[test]
    fn expansion_is_core_and_idempotent() {
        for text in [
            "G (a -> F b)",
            "a R (b U last)",
            "WX end",
            "<(a U b)?; true*> !c",
            "false",
        ] {
            let once = expand_sugar(&parse(text).unwrap());
            assert!(is_core(&once), "{text}");
            assert_eq!(expand_sugar(&once), once, "{text}");
        }
    }

    #[test]
    fn nnf_duals() {
        let b = PathExpr::guard(PropFormula::var("b"));
        let f = to_nnf(&Formula::not(Formula::and(
            a(),
            Formula::diamond(b.clone(), Formula::Tt),
        )));
        let expected = Formula::or(
            Formula::NotProp(crate::logic::Prop::new("a").unwrap()),
            Formula::box_op(b, Formula::Ff),
        );
        assert_eq!(f, expected);
        assert_eq!(to_nnf(&Formula::not(Formula::not(a()))), a());
        let f = to_nnf(&parse("!<a*>(b && X c)").unwrap());
        assert_eq!(f, to_nnf(&parse("[a*](!b || WX !c)").unwrap()));
    }

    #[test]
    fn nnf_removes_not() {
        for text in [
            "!(a U !b)",
            "!G F !a",
            "!last",
            "!end",
            "!true",
            "![a?]<b*>!c",
        ] {
            let f = to_nnf(&parse(text).unwrap());
            assert!(is_nnf(&f), "{text} -> {f}");
        }
    }
}
