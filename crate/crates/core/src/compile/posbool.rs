use std::collections::BTreeSet;
use std::fmt;

/// Positive boolean formula: no negation anywhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PosBool<A> {
    True,
    False,
    Atom(A),
    And(Vec<PosBool<A>>),
    Or(Vec<PosBool<A>>),
}

impl<A: Clone + Ord> PosBool<A> {
    pub fn constant(b: bool) -> Self {
        if b {
            PosBool::True
        } else {
            PosBool::False
        }
    }

    /// Conjunction with constant folding.
    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (PosBool::False, _) | (_, PosBool::False) => PosBool::False,
            (PosBool::True, x) | (x, PosBool::True) => x,
            (PosBool::And(mut a), PosBool::And(b)) => {
                a.extend(b);
                PosBool::And(a)
            }
            (PosBool::And(mut a), x) | (x, PosBool::And(mut a)) => {
                a.push(x);
                PosBool::And(a)
            }
            (a, b) => PosBool::And(vec![a, b]),
        }
    }

    /// Disjunction with constant folding.
    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (PosBool::True, _) | (_, PosBool::True) => PosBool::True,
            (PosBool::False, x) | (x, PosBool::False) => x,
            (PosBool::Or(mut a), PosBool::Or(b)) => {
                a.extend(b);
                PosBool::Or(a)
            }
            (PosBool::Or(mut a), x) | (x, PosBool::Or(mut a)) => {
                a.push(x);
                PosBool::Or(a)
            }
            (a, b) => PosBool::Or(vec![a, b]),
        }
    }

    /// Truth value under the assignment "exactly the atoms in `model` hold".
    pub fn eval(&self, model: &BTreeSet<A>) -> bool {
        match self {
            PosBool::True => true,
            PosBool::False => false,
            PosBool::Atom(a) => model.contains(a),
            PosBool::And(xs) => xs.iter().all(|x| x.eval(model)),
            PosBool::Or(xs) => xs.iter().any(|x| x.eval(model)),
        }
    }

    pub fn atoms(&self) -> BTreeSet<A> {
        let mut out = BTreeSet::new();
        self.atoms_into(&mut out);
        out
    }

    fn atoms_into(&self, out: &mut BTreeSet<A>) {
        match self {
            PosBool::True | PosBool::False => {}
            PosBool::Atom(a) => {
                out.insert(a.clone());
            }
            PosBool::And(xs) | PosBool::Or(xs) => xs.iter().for_each(|x| x.atoms_into(out)),
        }
    }

    pub fn map<B: Clone + Ord>(&self, f: &impl Fn(&A) -> B) -> PosBool<B> {
        match self {
            PosBool::True => PosBool::True,
            PosBool::False => PosBool::False,
            PosBool::Atom(a) => PosBool::Atom(f(a)),
            PosBool::And(xs) => PosBool::And(xs.iter().map(|x| x.map(f)).collect()),
            PosBool::Or(xs) => PosBool::Or(xs.iter().map(|x| x.map(f)).collect()),
        }
    }
}

impl<A: fmt::Display> fmt::Display for PosBool<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[PosBool<A>], op: &str| {
            f.write_str("(")?;
            for (k, x) in xs.iter().enumerate() {
                if k > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            PosBool::True => f.write_str("true"),
            PosBool::False => f.write_str("false"),
            PosBool::Atom(a) => write!(f, "⌜{a}⌝"),
            PosBool::And(xs) => join(f, xs, "∧"),
            PosBool::Or(xs) => join(f, xs, "∨"),
        }
    }
}

/// The subset-minimal sets of atoms satisfying `pb`.
///
/// `True` has the single model ∅; `False` has none. Computed by distributing
/// into DNF and discarding supersets along the way.
pub fn minimal_models<A: Clone + Ord>(pb: &PosBool<A>) -> BTreeSet<BTreeSet<A>> {
    match pb {
        PosBool::True => BTreeSet::from([BTreeSet::new()]),
        PosBool::False => BTreeSet::new(),
        PosBool::Atom(a) => BTreeSet::from([BTreeSet::from([a.clone()])]),
        PosBool::Or(xs) => antichain(xs.iter().flat_map(minimal_models).collect()),
        PosBool::And(xs) => {
            let mut acc = BTreeSet::from([BTreeSet::new()]);
            for x in xs {
                let models = minimal_models(x);
                let mut next = BTreeSet::new();
                for m in &acc {
                    for n in &models {
                        next.insert(m.union(n).cloned().collect::<BTreeSet<A>>());
                    }
                }
                acc = antichain(next);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    }
}

fn antichain<A: Clone + Ord>(sets: BTreeSet<BTreeSet<A>>) -> BTreeSet<BTreeSet<A>> {
    let mut by_size: Vec<BTreeSet<A>> = sets.into_iter().collect();
    by_size.sort_by_key(BTreeSet::len);
    let mut kept: Vec<BTreeSet<A>> = Vec::new();
    for s in by_size {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(c: char) -> PosBool<char> {
        PosBool::Atom(c)
    }

    #[test]
    fn constants() {
        assert_eq!(
            minimal_models::<char>(&PosBool::True),
            BTreeSet::from([BTreeSet::new()])
        );
        assert!(minimal_models::<char>(&PosBool::False).is_empty());
    }

    #[test]
    fn disjunction_gives_singletons() {
        let m = minimal_models(&at('a').or(at('b')));
        assert_eq!(
            m,
            BTreeSet::from([BTreeSet::from(['a']), BTreeSet::from(['b'])])
        );
    }

    #[test]
    fn absorption() {
        let m = minimal_models(&at('a').and(at('a').or(at('b'))));
        assert_eq!(m, BTreeSet::from([BTreeSet::from(['a'])]));
    }

    #[test]
    fn folding() {
        assert_eq!(PosBool::False.or(at('a')), at('a'));
        assert_eq!(PosBool::True.and(at('a')).and(PosBool::True), at('a'));
        assert_eq!(at('a').and(PosBool::False), PosBool::False);
    }
}
