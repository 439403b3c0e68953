//! Reusable formula collections: the twelve reward patterns with both an
//! LTLf and an LDLf rendering, and a seeded random formula generator.

use rand::Rng;

use crate::logic::{parse, Formula, PathExpr, Prop, PropFormula};

/// One reward pattern written in both logics.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub number: usize,
    pub description: &'static str,
    pub ltlf: String,
    pub ldlf: String,
}

impl Pattern {
    pub fn ltlf_formula(&self) -> Formula {
        parse(&self.ltlf).expect("corpus formulas parse")
    }

    pub fn ldlf_formula(&self) -> Formula {
        parse(&self.ldlf).expect("corpus formulas parse")
    }

    /// Propositions of both renderings.
    pub fn props(&self) -> std::collections::BTreeSet<Prop> {
        let mut p = self.ltlf_formula().props();
        p.extend(self.ldlf_formula().props());
        p
    }
}

fn repeat(item: &str, sep: &str, n: usize) -> String {
    vec![item; n].join(sep)
}

/// `X^n f`.
fn nexts(n: usize, f: &str) -> String {
    format!("{}{f}", "X ".repeat(n))
}

/// `(a + a;a + ... + a;...;a)` with `k` alternatives.
fn up_to(atom: &str, k: usize) -> String {
    let alts: Vec<String> = (1..=k)
        .map(|i| format!("({})", repeat(atom, "; ", i)))
        .collect();
    format!("({})", alts.join(" + "))
}

/// `X^1 f && ... && X^k f`.
fn box_k(k: usize, f: &str) -> String {
    let parts: Vec<String> = (1..=k).map(|j| nexts(j, &format!("({f})"))).collect();
    format!("({})", parts.join(" && "))
}

/// The twelve patterns, instantiated with window size `k ≥ 1`.
///
/// The texts are transcribed as written. Where a path expression mixes `;`
/// and `+` without parentheses, the alternatives are grouped after the
/// leading `true*; C;` (resp. `true*; !G;`) prefix, which is the only reading
/// under which the pattern describes the stated reward.
pub fn patterns(k: usize) -> Vec<Pattern> {
    assert!(k >= 1, "window size must be positive");
    let conj_not_g: Vec<String> = (0..k).map(|j| nexts(j, "!G")).collect();
    let disj_c: Vec<String> = (0..=k).map(|_| nexts(k, "C")).collect();
    let raw: [(&str, String, String); 12] = [
        (
            "reward only the first state where G holds",
            "!G U (G && last)".into(),
            "<!G*; G> end".into(),
        ),
        (
            "reward every state from the first G on",
            "F G".into(),
            "<true*; G; true*> end".into(),
        ),
        (
            "reward G at most once every k steps",
            format!(
                "F ({}) && {}",
                nexts(k, "(G && last)"),
                conj_not_g.join(" && ")
            ),
            format!("<!G*; G; ({}; !G*; G)*> end", repeat("!G", "; ", k)),
        ),
        (
            "reward G within k steps of a state with !G",
            format!("F (!G && {})", box_k(k, "last -> G")),
            format!("<true*; !G; (G + ({}; G))> end", up_to("!G", k)),
        ),
        (
            "reward G followed immediately by H and then I",
            "F (G && X H && X X (I && last))".into(),
            "<true*; G; H; I> end".into(),
        ),
        (
            "reward G whenever it follows C",
            "F (C && X F (G && last))".into(),
            "<true*; C; true*; G> end".into(),
        ),
        (
            "reward only the first G after C",
            "F (C && !G U (G && last))".into(),
            "<true*; C; !G; !G*; G> end".into(),
        ),
        (
            "reward G immediately after C",
            "F (C && X (G && last))".into(),
            "<true*; C; G> end".into(),
        ),
        (
            "reward G within k steps of C",
            format!("F (G && last && ({}))", disj_c.join(" || ")),
            format!("<true*; C; (G + ({}; G))> end", up_to("true", k)),
        ),
        (
            "reward only the first G within k steps of C",
            format!("F (C && {})", box_k(k, "last <-> G")),
            format!("<true*; C; (G + ({}; G))> end", up_to("!G", k)),
        ),
        (
            "reward if G has always held",
            "G G".into(),
            "<G*> end".into(),
        ),
        (
            "reward C holding until G",
            "C U (G && last)".into(),
            "<C*; G> end".into(),
        ),
    ];
    raw.into_iter()
        .enumerate()
        .map(|(i, (description, ltlf, ldlf))| Pattern {
            number: i + 1,
            description,
            ltlf,
            ldlf,
        })
        .collect()
}

/// A random formula of at most `depth` nested connectives over `props`,
/// mixing LTLf operators and path modalities.
pub fn random_formula(rng: &mut impl Rng, depth: usize, props: &[Prop]) -> Formula {
    let atom = |rng: &mut dyn rand::RngCore| -> Formula {
        match rng.gen_range(0..10) {
            0 => Formula::Tt,
            1 => Formula::Ff,
            2 => Formula::Last,
            3 => Formula::End,
            4 => Formula::Bool(true),
            _ => Formula::Atom(props[rng.gen_range(0..props.len())].clone()),
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    let sub = |rng: &mut _| random_formula(rng, depth - 1, props);
    match rng.gen_range(0..15) {
        0 => atom(rng),
        1 => Formula::not(sub(rng)),
        2 => Formula::and(sub(rng), sub(rng)),
        3 => Formula::or(sub(rng), sub(rng)),
        4 => Formula::next(sub(rng)),
        5 => Formula::weak_next(sub(rng)),
        6 => Formula::until(sub(rng), sub(rng)),
        7 => Formula::release(sub(rng), sub(rng)),
        8 => Formula::eventually(sub(rng)),
        9 => Formula::always(sub(rng)),
        10 | 11 => Formula::diamond(random_path(rng, depth - 1, props), sub(rng)),
        _ => Formula::box_op(random_path(rng, depth - 1, props), sub(rng)),
    }
}

fn random_guard(rng: &mut impl Rng, props: &[Prop]) -> PropFormula {
    let var = PropFormula::Var(props[rng.gen_range(0..props.len())].clone());
    match rng.gen_range(0..5) {
        0 => PropFormula::Const(true),
        1 => PropFormula::not(var),
        2 => PropFormula::or(
            var,
            PropFormula::Var(props[rng.gen_range(0..props.len())].clone()),
        ),
        _ => var,
    }
}

fn random_path(rng: &mut impl Rng, depth: usize, props: &[Prop]) -> PathExpr {
    if depth == 0 {
        return PathExpr::guard(random_guard(rng, props));
    }
    match rng.gen_range(0..7) {
        0 | 1 => PathExpr::guard(random_guard(rng, props)),
        2 => PathExpr::check(random_formula(rng, depth - 1, props)),
        3 => PathExpr::union(
            random_path(rng, depth - 1, props),
            random_path(rng, depth - 1, props),
        ),
        4 | 5 => PathExpr::concat(
            random_path(rng, depth - 1, props),
            random_path(rng, depth - 1, props),
        ),
        _ => PathExpr::star(random_path(rng, depth - 1, props)),
    }
}
