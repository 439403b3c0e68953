//! Runtime-verification colouring of DFA states and reward shaping that pays
//! formula rewards as soon as the verdict is settled.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{reach, Dfa};
use crate::rewards::{self, ExtendedMdp, Mode, RewardsError, Shaper, Step};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("negative-transform shaping needs complete-trace mode")]
    NeedsComplete,
    #[error("{colorings} colourings given for {formulas} formulas")]
    Arity { colorings: usize, formulas: usize },
    #[error("the MDP is already shaped")]
    AlreadyShaped,
    #[error(transparent)]
    Rewards(#[from] RewardsError),
}

/// Monitoring verdict of a DFA state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MonitorColor {
    /// Accepted now and on every extension.
    True,
    /// Rejected now and on every extension.
    False,
    /// Every long enough extension reaches [`MonitorColor::True`].
    WillTrue,
    /// Every long enough extension reaches [`MonitorColor::False`].
    WillFalse,
    /// Rejected now, but every long enough extension passes an accepting state.
    WillTempTrue,
    /// Accepted now, may be rejected later.
    TempTrue,
    /// Rejected now, may be accepted later.
    TempFalse,
}

impl MonitorColor {
    pub const ALL: [MonitorColor; 7] = [
        MonitorColor::True,
        MonitorColor::False,
        MonitorColor::WillTrue,
        MonitorColor::WillFalse,
        MonitorColor::WillTempTrue,
        MonitorColor::TempTrue,
        MonitorColor::TempFalse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MonitorColor::True => "TRUE",
            MonitorColor::False => "FALSE",
            MonitorColor::WillTrue => "WILL_TRUE",
            MonitorColor::WillFalse => "WILL_FALSE",
            MonitorColor::WillTempTrue => "WILL_TEMP_TRUE",
            MonitorColor::TempTrue => "TEMP_TRUE",
            MonitorColor::TempFalse => "TEMP_FALSE",
        }
    }

    /// GraphViz fill colour.
    pub fn fill(self) -> &'static str {
        match self {
            MonitorColor::True => "green3",
            MonitorColor::False => "firebrick1",
            MonitorColor::WillTrue => "palegreen",
            MonitorColor::WillFalse => "lightpink",
            MonitorColor::WillTempTrue => "lightcyan",
            MonitorColor::TempTrue => "khaki",
            MonitorColor::TempFalse => "lightgray",
        }
    }

    fn is_good(self) -> bool {
        matches!(
            self,
            MonitorColor::True | MonitorColor::WillTrue | MonitorColor::WillTempTrue
        )
    }

    fn is_bad(self) -> bool {
        matches!(self, MonitorColor::False | MonitorColor::WillFalse)
    }
}

impl fmt::Display for MonitorColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One colour per DFA state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct MonitorColoring {
    colors: Vec<MonitorColor>,
}

impl MonitorColoring {
    pub fn get(&self, q: usize) -> MonitorColor {
        self.colors[q]
    }

    pub fn colors(&self) -> &[MonitorColor] {
        &self.colors
    }

    /// `{state: colour}`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<_, _> = self
            .colors
            .iter()
            .enumerate()
            .map(|(q, c)| (q.to_string(), c.name().into()))
            .collect();
        map.into()
    }

    /// The DFA with every state filled by its colour.
    pub fn to_dot(&self, dfa: &Dfa) -> String {
        dfa.to_dot_with(|q| {
            let c = self.colors[q];
            Some(format!(
                "style=filled, fillcolor={}, xlabel=\"{}\"",
                c.fill(),
                c.name()
            ))
        })
    }
}

fn successors(dfa: &Dfa) -> Vec<BTreeSet<usize>> {
    (0..dfa.num_states())
        .map(|q| {
            (0..dfa.num_letters() as u64)
                .map(|l| dfa.next(q, l))
                .collect()
        })
        .collect()
}

/// States (outside `avoid`) from which a cycle lying entirely outside
/// `avoid` can be reached without entering `avoid`.
fn cycle_reachable(succ: &[BTreeSet<usize>], avoid: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let inside = |q: usize| !avoid[q];
    let reach_within = |from: usize| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = succ[from].iter().copied().filter(|&t| inside(t)).collect();
        while let Some(q) = stack.pop() {
            if !seen[q] {
                seen[q] = true;
                stack.extend(succ[q].iter().copied().filter(|&t| inside(t) && !seen[t]));
            }
        }
        seen
    };
    let on_cycle: Vec<bool> = (0..n).map(|q| inside(q) && reach_within(q)[q]).collect();
    (0..n)
        .map(|q| {
            if !inside(q) {
                return false;
            }
            on_cycle[q]
                || reach_within(q)
                    .iter()
                    .enumerate()
                    .any(|(t, &r)| r && on_cycle[t])
        })
        .collect()
}

/// Colours every state of a total DFA. `Reach(q)` includes `q`. With
/// `T* = {q ∈ F : Reach(q) ⊆ F}` and `F* = {q ∉ F : Reach(q) ∩ F = ∅}`, the
/// first matching rule wins:
///
/// 1. `TRUE`: `q ∈ T*`; `FALSE`: `q ∈ F*`.
/// 2. `WILL_TRUE`: no cycle avoiding `T*` is reachable from `q` outside `T*`.
/// 3. `WILL_FALSE`: likewise for `F*`.
/// 4. `WILL_TEMP_TRUE`: `q ∉ F` and no cycle avoiding `F` is reachable.
/// 5. `TEMP_TRUE`: `q ∈ F`; otherwise `TEMP_FALSE`.
pub fn color_states(dfa: &Dfa) -> MonitorColoring {
    let n = dfa.num_states();
    let reaches: Vec<BTreeSet<usize>> = (0..n).map(|q| reach(dfa, q)).collect();
    let true_star: Vec<bool> = (0..n)
        .map(|q| reaches[q].iter().all(|&t| dfa.is_final(t)))
        .collect();
    let false_star: Vec<bool> = (0..n)
        .map(|q| reaches[q].iter().all(|&t| !dfa.is_final(t)))
        .collect();
    let finals: Vec<bool> = (0..n).map(|q| dfa.is_final(q)).collect();
    let succ = successors(dfa);
    let escape_true = cycle_reachable(&succ, &true_star);
    let escape_false = cycle_reachable(&succ, &false_star);
    let escape_final = cycle_reachable(&succ, &finals);
    let colors = (0..n)
        .map(|q| {
            if true_star[q] {
                MonitorColor::True
            } else if false_star[q] {
                MonitorColor::False
            } else if !escape_true[q] {
                MonitorColor::WillTrue
            } else if !escape_false[q] {
                MonitorColor::WillFalse
            } else if !finals[q] && !escape_final[q] {
                MonitorColor::WillTempTrue
            } else if finals[q] {
                MonitorColor::TempTrue
            } else {
                MonitorColor::TempFalse
            }
        })
        .collect();
    MonitorColoring { colors }
}

/// How formula rewards are moved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapingMode {
    /// An extra `r` the first time the formula's automaton enters a
    /// `TRUE`, `WILL_TRUE` or `WILL_TEMP_TRUE` state.
    EarlyPositive,
    /// `−r` the first time the verdict becomes `FALSE` or `WILL_FALSE`, `0`
    /// when the formula holds, `−r` at `stop` if it fails and was never
    /// flagged. Complete-trace mode only.
    NegativeTransform,
}

struct MonitorShaper<'a> {
    colorings: &'a [MonitorColoring],
    mode: ShapingMode,
}

impl Shaper for MonitorShaper<'_> {
    fn shape(&self, step: Step) -> (f64, bool) {
        let color = self.colorings[step.formula].get(step.next);
        match self.mode {
            ShapingMode::EarlyPositive => {
                if !step.flag && color.is_good() {
                    (step.base + step.reward, true)
                } else {
                    (step.base, step.flag)
                }
            }
            ShapingMode::NegativeTransform if step.stop => match (step.accepted, step.flag) {
                // A flagged trace that still ends accepted gets its −r back.
                (true, true) => (step.reward, true),
                (true, false) => (0.0, false),
                (false, true) => (0.0, true),
                (false, false) => (-step.reward, true),
            },
            ShapingMode::NegativeTransform => {
                if !step.flag && color.is_bad() {
                    (-step.reward, true)
                } else {
                    (0.0, step.flag)
                }
            }
        }
    }
}

/// A shaped MDP plus caveats to show the user.
#[derive(Clone, Debug)]
pub struct Shaped {
    pub mdp: ExtendedMdp,
    pub warnings: Vec<String>,
}

/// Colourings of the automata inside `mdp`, one per formula.
pub fn color_mdp(mdp: &ExtendedMdp) -> Vec<MonitorColoring> {
    mdp.dfas().iter().map(color_states).collect()
}

pub fn shape_rewards(
    mdp: &ExtendedMdp,
    colorings: &[MonitorColoring],
    mode: ShapingMode,
) -> Result<Shaped, MonitorError> {
    if mdp.is_shaped() {
        return Err(MonitorError::AlreadyShaped);
    }
    if colorings.len() != mdp.dfas().len() {
        return Err(MonitorError::Arity {
            colorings: colorings.len(),
            formulas: mdp.dfas().len(),
        });
    }
    if mode == ShapingMode::NegativeTransform && mdp.mode() != Mode::Complete {
        return Err(MonitorError::NeedsComplete);
    }
    let shaper = MonitorShaper { colorings, mode };
    let shaped = rewards::rebuild_shaped(mdp, &shaper, crate::automata::DEFAULT_STATE_CAP)?;
    let mut warnings = vec![
        "first-trigger bits enlarge the state; minimality does not carry over to the shaped MDP"
            .to_string(),
    ];
    if mdp.discount() < 1.0 {
        warnings.push(format!(
            "discount {} < 1: earlier rewards are more valuable, so shaping may change the optimal policy",
            mdp.discount()
        ));
    }
    Ok(Shaped {
        mdp: shaped,
        warnings,
    })
}

/// Undiscounted reward differences between `shaped` and `original` over
/// every complete trace (ended by `stop`) of at most `max_len` letters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub traces: usize,
    pub min_delta: f64,
    pub max_delta: f64,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        self.traces > 0 && self.min_delta == self.max_delta
    }
}

/// Compares total rewards of corresponding complete traces. Both MDPs must
/// come from the same domain in complete-trace mode.
pub fn shaping_invariance(
    original: &ExtendedMdp,
    shaped: &ExtendedMdp,
    max_len: usize,
) -> InvarianceReport {
    let mut report = InvarianceReport {
        traces: 0,
        min_delta: f64::INFINITY,
        max_delta: f64::NEG_INFINITY,
    };
    let domain = original.domain();
    let Some(stop) = original.stop_action() else {
        return report;
    };
    // (original state, shaped state, domain state, letters read, sums)
    let mut stack = vec![(
        original.initial(),
        shaped.initial(),
        domain.initial(),
        1usize,
        0.0,
        0.0,
    )];
    while let Some((o, s, t, len, sum_o, sum_s)) = stack.pop() {
        for a in domain.applicable(t) {
            if len == max_len && a != stop {
                continue;
            }
            let (Some(co), Some(cs)) = (original.choice(o, a), shaped.choice(s, a)) else {
                continue;
            };
            let (sum_o, sum_s) = (sum_o + co.reward, sum_s + cs.reward);
            if a == stop {
                let delta = sum_s - sum_o;
                report.traces += 1;
                report.min_delta = report.min_delta.min(delta);
                report.max_delta = report.max_delta.max(delta);
                continue;
            }
            for &(next, p) in domain.successors(t, a) {
                if p <= 0.0 {
                    continue;
                }
                let find = |mdp: &ExtendedMdp, choice: &rewards::Choice| {
                    choice
                        .successors
                        .iter()
                        .map(|&(k, _)| k)
                        .find(|&k| mdp.project(k) == Some(next))
                };
                if let (Some(no), Some(ns)) = (find(original, co), find(shaped, cs)) {
                    stack.push((no, ns, next, len + 1, sum_o, sum_s));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_dfa;
    use crate::logic::parse;
    use crate::rewards::build_extended_mdp;
    use crate::rewards::tests::{p, spec, two_state};

    fn colors(text: &str) -> (Dfa, MonitorColoring) {
        let f = parse(text).unwrap();
        let mut props = f.props();
        if props.is_empty() {
            props.insert(p("a"));
        }
        let dfa = compile_dfa(&f, &props).unwrap();
        let c = color_states(&dfa);
        (dfa, c)
    }

    #[test]
    fn tt_is_true() {
        let (dfa, c) = colors("tt");
        assert_eq!(dfa.num_states(), 1);
        assert_eq!(c.colors(), &[MonitorColor::True]);
    }

    #[test]
    fn eventually_and_always() {
        let (dfa, c) = colors("F a");
        assert_eq!(c.get(dfa.initial()), MonitorColor::TempFalse);
        assert_eq!(c.get(dfa.next(dfa.initial(), 1)), MonitorColor::True);
        let (dfa, c) = colors("G a");
        assert_eq!(c.get(dfa.initial()), MonitorColor::TempTrue);
        assert_eq!(c.get(dfa.next(dfa.initial(), 0)), MonitorColor::False);
    }

    #[test]
    fn will_colours() {
        // After one letter the formula holds for good at the next step.
        let (dfa, c) = colors("X tt");
        assert_eq!(c.get(dfa.initial()), MonitorColor::WillTrue);
        let (dfa, c) = colors("!(X tt)");
        assert_eq!(c.get(dfa.initial()), MonitorColor::WillFalse);
        // Even lengths: rejected now, accepted again within one step.
        let (dfa, c) = colors("<(true;true)*> end");
        let odd = dfa.next(dfa.initial(), 0);
        assert_eq!(c.get(odd), MonitorColor::WillTempTrue);
        assert_eq!(c.get(dfa.initial()), MonitorColor::TempTrue);
    }

    #[test]
    fn json_and_dot() {
        let (dfa, c) = colors("F a");
        let json = c.to_json();
        assert_eq!(json[dfa.initial().to_string()], "TEMP_FALSE");
        assert!(c.to_dot(&dfa).contains("fillcolor=green3"));
    }

    #[test]
    fn shaping_requires_matching_setting() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 1.0, Mode::Prefix)).unwrap();
        let colorings = color_mdp(&mdp);
        assert!(matches!(
            shape_rewards(&mdp, &colorings, ShapingMode::NegativeTransform),
            Err(MonitorError::NeedsComplete)
        ));
        assert!(matches!(
            shape_rewards(&mdp, &[], ShapingMode::EarlyPositive),
            Err(MonitorError::Arity { .. })
        ));
        let shaped = shape_rewards(&mdp, &colorings, ShapingMode::EarlyPositive).unwrap();
        assert_eq!(shaped.warnings.len(), 1);
        assert!(shaped.mdp.key(0).contains('#'));
    }

    #[test]
    fn ff_is_never_shaped() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("ff", 1.0)], 0.9, Mode::Prefix)).unwrap();
        let shaped = shape_rewards(&mdp, &color_mdp(&mdp), ShapingMode::EarlyPositive).unwrap();
        for k in 0..shaped.mdp.num_states() {
            assert!(shaped.mdp.choices(k).iter().all(|c| c.reward == 0.0));
        }
        assert_eq!(shaped.warnings.len(), 2);
    }

    #[test]
    fn negative_transform_shifts_by_constant() {
        let s = spec(&[("F g", 2.0), ("G !g", 1.0)], 1.0, Mode::Complete);
        let mdp = build_extended_mdp(&two_state(), &s).unwrap();
        let shaped = shape_rewards(&mdp, &color_mdp(&mdp), ShapingMode::NegativeTransform).unwrap();
        let report = shaping_invariance(&mdp, &shaped.mdp, 5);
        assert!(report.holds(), "{report:?}");
        assert_eq!(report.min_delta, -3.0);
    }
}
