use std::fmt::Write;

use super::{letter_name, Dfa, Nfa};

/// GraphViz rendering.
pub trait Dot {
    fn to_dot(&self) -> String;
}

/// Renders any automaton as GraphViz DOT. Output is a pure function of the
/// automaton, so equal automata give byte-identical text.
pub fn to_dot(aut: &impl Dot) -> String {
    aut.to_dot()
}

impl Dot for Nfa {
    fn to_dot(&self) -> String {
        let mut out = String::from("digraph nfa {\n  rankdir=LR;\n  node [shape=circle];\n");
        for q in 0..self.num_states() {
            let shape = if self.finals().contains(&q) {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  {q} [shape={shape}];");
        }
        for &q in self.initial() {
            let _ = writeln!(out, "  __start{q} [shape=point];\n  __start{q} -> {q};");
        }
        for (s, l, t) in self.transitions() {
            let _ = writeln!(
                out,
                "  {s} -> {t} [label=\"{}\"];",
                letter_name(self.alphabet(), l)
            );
        }
        out.push_str("}\n");
        out
    }
}

impl Dot for Dfa {
    fn to_dot(&self) -> String {
        self.to_dot_with(|_| None)
    }
}

impl Dfa {
    /// DOT with extra node attributes (e.g. `style=filled, fillcolor=...`).
    pub fn to_dot_with(&self, extra: impl Fn(usize) -> Option<String>) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  node [shape=circle];\n");
        for q in 0..self.num_states() {
            let shape = if self.is_final(q) {
                "doublecircle"
            } else {
                "circle"
            };
            let label = match self.labels(q) {
                Some(ls) => {
                    let ls: Vec<String> = ls.iter().map(|i| i.to_string()).collect();
                    format!("{q}\\n{{{}}}", ls.join(","))
                }
                None => q.to_string(),
            };
            let extra = extra(q).map(|e| format!(", {e}")).unwrap_or_default();
            let _ = writeln!(out, "  {q} [shape={shape}, label=\"{label}\"{extra}];");
        }
        let _ = writeln!(
            out,
            "  __start [shape=point];\n  __start -> {};",
            self.initial()
        );
        for q in 0..self.num_states() {
            for l in 0..self.num_letters() as u64 {
                let t = self.next(q, l);
                let _ = writeln!(
                    out,
                    "  {q} -> {t} [label=\"{}\"];",
                    letter_name(self.alphabet(), l)
                );
            }
        }
        out.push_str("}\n");
        out
    }
}
