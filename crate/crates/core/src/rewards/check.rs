//! Mechanical checks of the correspondence between a domain with
//! non-Markovian rewards and its extended MDP.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{reward_of_prefix, ExtState, ExtendedMdp, Mode};
use crate::logic::Prop;
use crate::semantics::Trace;

/// Outcome of [`verify_equivalence`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// The initial extended state is the injection of the domain's initial
    /// state, and every product state projects onto a domain state.
    pub injection: bool,
    /// Every domain transition has exactly one extended counterpart with the
    /// same probability, and nothing else.
    pub transitions: bool,
    /// Rewards along every feasible trajectory equal the oracle rewards of the
    /// corresponding prefixes.
    pub rewards: bool,
    pub max_prob_error: f64,
    pub trajectories: usize,
    pub reward_mismatches: usize,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.injection && self.transitions && self.rewards
    }
}

/// Checks the three equivalence conditions, the third on every feasible
/// trajectory with at most `max_len` actions. Rewards come from the logic
/// semantics, not from the automata. Intended for unshaped MDPs.
pub fn verify_equivalence(mdp: &ExtendedMdp, max_len: usize) -> EquivalenceReport {
    let domain = mdp.domain();
    let mut report = EquivalenceReport {
        injection: mdp.state(mdp.initial()) == &mdp.inject(domain.initial()),
        transitions: true,
        rewards: true,
        ..EquivalenceReport::default()
    };
    for k in 0..mdp.num_states() {
        let ExtState::Product { domain: s, .. } = *mdp.state(k) else {
            continue;
        };
        if s >= domain.num_states() {
            report.injection = false;
            continue;
        }
        let applicable: Vec<usize> = domain.applicable(s).collect();
        let offered: Vec<usize> = mdp.choices(k).iter().map(|c| c.action).collect();
        if applicable != offered {
            report.transitions = false;
        }
        for c in mdp.choices(k) {
            if Some(c.action) == mdp.stop_action() {
                let ok = matches!(c.successors.as_slice(), [(t, p)] if *mdp.state(*t) == ExtState::Terminal && *p == 1.0);
                report.transitions &= ok;
                continue;
            }
            let expected = domain.successors(s, c.action);
            if expected.len() != c.successors.len() {
                report.transitions = false;
            }
            for &(t, p) in expected {
                let matching: Vec<f64> = c
                    .successors
                    .iter()
                    .filter(|&&(e, _)| mdp.project(e) == Some(t))
                    .map(|&(_, q)| q)
                    .collect();
                match matching.as_slice() {
                    [q] => report.max_prob_error = report.max_prob_error.max((p - q).abs()),
                    _ => report.transitions = false,
                }
            }
        }
    }
    report.transitions &= report.max_prob_error <= 1e-12;
    let mut letters = Vec::new();
    walk(
        mdp,
        mdp.initial(),
        domain.initial(),
        &mut letters,
        max_len,
        &mut report,
    );
    report.rewards = report.reward_mismatches == 0;
    report
}

fn walk(
    mdp: &ExtendedMdp,
    e: usize,
    s: usize,
    letters: &mut Vec<BTreeSet<Prop>>,
    budget: usize,
    report: &mut EquivalenceReport,
) {
    let applicable: Vec<usize> = mdp.domain().applicable(s).collect();
    if budget == 0 || applicable.is_empty() {
        report.trajectories += 1;
        return;
    }
    for a in applicable {
        let Some(choice) = mdp.choice(e, a) else {
            report.reward_mismatches += 1;
            continue;
        };
        letters.push(mdp.letter_set(s, a));
        let stop = Some(a) == mdp.stop_action();
        let expected = match mdp.mode() {
            Mode::Prefix => reward_of_prefix(mdp.spec(), &Trace::new(letters.clone())),
            Mode::Complete if stop => reward_of_prefix(mdp.spec(), &Trace::new(letters.clone())),
            Mode::Complete => 0.0,
        };
        if expected != choice.reward {
            report.reward_mismatches += 1;
        }
        if stop {
            report.trajectories += 1;
        } else {
            for &(t, p) in mdp.domain().successors(s, a) {
                if p <= 0.0 {
                    continue;
                }
                match choice
                    .successors
                    .iter()
                    .find(|&&(k, _)| mdp.project(k) == Some(t))
                {
                    Some(&(k, _)) => walk(mdp, k, t, letters, budget - 1, report),
                    None => report.reward_mismatches += 1,
                }
            }
        }
        letters.pop();
    }
}

/// Forward search over positive-probability edges from the initial state;
/// true iff it visits every state of `mdp`.
pub fn audit_reachability(mdp: &ExtendedMdp) -> bool {
    let mut seen = vec![false; mdp.num_states()];
    let mut stack = vec![mdp.initial()];
    seen[mdp.initial()] = true;
    while let Some(k) = stack.pop() {
        for c in mdp.choices(k) {
            for &(t, p) in &c.successors {
                if p > 0.0 && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
    }
    seen.into_iter().all(|v| v)
}
