//! Non-Markovian rewards: reward specifications over a probabilistic domain
//! and the equivalent extended MDP whose states track one DFA per formula.

mod check;
mod domain;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{self, determinize_capped, minimize, reverse_nfa, AutomataError, Dfa};
use crate::compile::{self, CompileError};
use crate::logic::{self, Formula, LogicError, Prop};
use crate::semantics::{satisfies, Trace};
use crate::solve::Policy;

pub use check::{audit_reachability, verify_equivalence, EquivalenceReport};
pub use domain::{DomainModel, Edge, STOP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardsError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid reward specification: {0}")]
    Spec(String),
    #[error("probabilities of `{action}` in state {state} sum to {sum}")]
    ProbabilitySum {
        state: usize,
        action: String,
        sum: f64,
    },
    #[error("proposition `{0}` is not declared by the domain")]
    UnknownProp(String),
    #[error("action name `{0}` is reserved")]
    ReservedAction(String),
    #[error("action `{0}` cannot double as a proposition")]
    ActionProp(String),
    #[error("extended MDP exceeds the state cap of {0}")]
    StateCap(usize),
    #[error("history leaves the model at step {step}")]
    HistoryLeaves { step: usize },
    #[error("malformed JSON: {0}")]
    Json(String),
}

/// When formula rewards are collected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every prefix is rewarded as it is produced.
    #[default]
    Prefix,
    /// Only the trace ended by `stop` is rewarded.
    Complete,
}

/// Default discount when the specification does not give one.
pub const DEFAULT_DISCOUNT: f64 = 0.95;

/// Ordered `(formula, reward)` pairs plus discount and mode. Formula indices
/// are stable and key automaton labels.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardSpec {
    pub pairs: Vec<(Formula, f64)>,
    pub discount: f64,
    pub mode: Mode,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    #[serde(default = "default_discount")]
    discount: f64,
    #[serde(default)]
    mode: Mode,
    rewards: Vec<SpecEntry>,
}

#[derive(Serialize, Deserialize)]
struct SpecEntry {
    formula: String,
    value: f64,
}

fn default_discount() -> f64 {
    DEFAULT_DISCOUNT
}

impl RewardSpec {
    pub fn new(
        pairs: Vec<(Formula, f64)>,
        discount: f64,
        mode: Mode,
    ) -> Result<RewardSpec, RewardsError> {
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(RewardsError::Spec(format!(
                "discount {discount} is outside (0,1]"
            )));
        }
        if let Some((_, r)) = pairs.iter().find(|(_, r)| !r.is_finite()) {
            return Err(RewardsError::Spec(format!("reward {r} is not finite")));
        }
        Ok(RewardSpec {
            pairs,
            discount,
            mode,
        })
    }

    pub fn from_json(text: &str) -> Result<RewardSpec, RewardsError> {
        let file: SpecFile =
            serde_json::from_str(text).map_err(|e| RewardsError::Json(e.to_string()))?;
        let pairs = file
            .rewards
            .iter()
            .map(|e| Ok((logic::parse(&e.formula)?, e.value)))
            .collect::<Result<Vec<_>, RewardsError>>()?;
        RewardSpec::new(pairs, file.discount, file.mode)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpecFile {
            discount: self.discount,
            mode: self.mode,
            rewards: self
                .pairs
                .iter()
                .map(|(f, r)| SpecEntry {
                    formula: f.to_string(),
                    value: *r,
                })
                .collect(),
        })
        .expect("serialisable")
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        self.pairs.iter().flat_map(|(f, _)| f.props()).collect()
    }
}

/// Reward earned at the end of `prefix`: the sum of `r` over satisfied pairs.
pub fn reward_of_prefix(spec: &RewardSpec, prefix: &Trace) -> f64 {
    spec.pairs
        .iter()
        .filter(|(f, _)| satisfies(prefix, f))
        .map(|(_, r)| r)
        .sum()
}

/// Discounted value of a whole trace plus which formulas it satisfies.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceValue {
    pub value: f64,
    pub satisfied: Vec<bool>,
}

/// Value of `trace` under `spec`. In prefix mode every non-empty prefix is
/// rewarded; in complete mode only the whole trace is, when `stop` is taken
/// at its final state.
pub fn trace_value(spec: &RewardSpec, trace: &Trace) -> TraceValue {
    let satisfied = spec
        .pairs
        .iter()
        .map(|(f, _)| satisfies(trace, f))
        .collect();
    let value = match spec.mode {
        Mode::Prefix => (1..=trace.len())
            .map(|n| spec.discount.powi(n as i32 - 1) * reward_of_prefix(spec, &trace.prefix(n)))
            .sum(),
        Mode::Complete if trace.is_empty() => 0.0,
        Mode::Complete => {
            spec.discount.powi(trace.len() as i32 - 1) * reward_of_prefix(spec, trace)
        }
    };
    TraceValue { value, satisfied }
}

/// Construction switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Add one proposition per action, true in the letter read when the
    /// action is taken.
    pub action_props: bool,
    pub max_states: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            action_props: false,
            max_states: automata::DEFAULT_STATE_CAP,
        }
    }
}

/// A state of the extended MDP.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtState {
    Product {
        /// One DFA state per formula.
        automata: Vec<usize>,
        /// Index into the domain's states.
        domain: usize,
        /// First-trigger bits, one per formula; zero unless shaped.
        flags: u64,
    },
    /// Absorbing state entered by `stop`.
    Terminal,
}

/// One applicable action with its reward and successor distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub action: usize,
    pub reward: f64,
    pub successors: Vec<(usize, f64)>,
    /// Formulas whose automaton accepts after this step (in complete mode:
    /// only on `stop`).
    pub satisfied: u64,
}

/// What a reward shaper sees for one formula on one step.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub formula: usize,
    pub reward: f64,
    pub flag: bool,
    /// Automaton state after the step.
    pub next: usize,
    pub accepted: bool,
    pub stop: bool,
    /// Unshaped contribution of this formula.
    pub base: f64,
}

/// Rewrites per-formula rewards, keeping one bit of memory per formula.
pub trait Shaper {
    /// Returns the contribution and the new flag.
    fn shape(&self, step: Step) -> (f64, bool);
}

/// Synchronous product of a domain with one DFA per reward formula.
#[derive(Clone, Debug)]
pub struct ExtendedMdp {
    domain: DomainModel,
    spec: RewardSpec,
    letters: Vec<Prop>,
    dfas: Vec<Dfa>,
    action_props: bool,
    shaped: bool,
    states: Vec<ExtState>,
    choices: Vec<Vec<Choice>>,
    index: HashMap<ExtState, usize>,
}

pub fn build_extended_mdp(
    domain: &DomainModel,
    spec: &RewardSpec,
) -> Result<ExtendedMdp, RewardsError> {
    build_extended_mdp_with(domain, spec, BuildOptions::default())
}

pub fn build_extended_mdp_with(
    domain: &DomainModel,
    spec: &RewardSpec,
    options: BuildOptions,
) -> Result<ExtendedMdp, RewardsError> {
    let (domain, letters) = prepare(domain, spec, options)?;
    let dfas = compile_formulas(spec, &letters)?;
    build_product(domain, spec.clone(), letters, dfas, options, None)
}

/// Rebuilds `mdp` with `shaper` deciding each formula's contribution. The
/// first-trigger bits become part of the state.
pub fn rebuild_shaped(
    mdp: &ExtendedMdp,
    shaper: &dyn Shaper,
    max_states: usize,
) -> Result<ExtendedMdp, RewardsError> {
    let options = BuildOptions {
        action_props: mdp.action_props,
        max_states,
    };
    build_product(
        mdp.domain.clone(),
        mdp.spec.clone(),
        mdp.letters.clone(),
        mdp.dfas.clone(),
        options,
        Some(shaper),
    )
}

fn prepare(
    domain: &DomainModel,
    spec: &RewardSpec,
    options: BuildOptions,
) -> Result<(DomainModel, Vec<Prop>), RewardsError> {
    let domain = match spec.mode {
        Mode::Prefix => domain.clone(),
        Mode::Complete => domain.with_stop()?,
    };
    let mut letters = domain.props().to_vec();
    if options.action_props {
        for a in domain.actions() {
            let p = Prop::new(a.clone()).map_err(|_| RewardsError::ActionProp(a.clone()))?;
            if letters.contains(&p) {
                return Err(RewardsError::ActionProp(a.clone()));
            }
            letters.push(p);
        }
    }
    for p in spec.props() {
        if !letters.contains(&p) {
            return Err(RewardsError::UnknownProp(p.to_string()));
        }
    }
    if letters.len() > automata::MAX_ALPHABET {
        return Err(CompileError::AlphabetTooLarge {
            size: letters.len(),
            cap: automata::MAX_ALPHABET,
        }
        .into());
    }
    if spec.mode == Mode::Complete {
        letters.push(Prop::last());
    }
    Ok((domain, letters))
}

/// Minimal `last`-free DFA per formula, compiled over the formula's own
/// propositions and lifted to `letters`. In complete mode the lifted DFA
/// ignores `last`, so reading `t ∪ {last}` on `stop` accepts exactly when the
/// `last`-augmented automaton would.
fn compile_formulas(spec: &RewardSpec, letters: &[Prop]) -> Result<Vec<Dfa>, RewardsError> {
    spec.pairs
        .iter()
        .map(|(f, _)| Ok(compile::compile_dfa(f, &f.props())?.lift(letters)?))
        .collect()
}

fn build_product(
    domain: DomainModel,
    spec: RewardSpec,
    letters: Vec<Prop>,
    dfas: Vec<Dfa>,
    options: BuildOptions,
    shaper: Option<&dyn Shaper>,
) -> Result<ExtendedMdp, RewardsError> {
    if dfas.len() > 64 {
        return Err(RewardsError::Spec(
            "at most 64 reward formulas are supported".into(),
        ));
    }
    let mut mdp = ExtendedMdp {
        domain,
        spec,
        letters,
        dfas,
        action_props: options.action_props,
        shaped: shaper.is_some(),
        states: Vec::new(),
        choices: Vec::new(),
        index: HashMap::new(),
    };
    let initial = ExtState::Product {
        automata: mdp.dfas.iter().map(Dfa::initial).collect(),
        domain: mdp.domain.initial(),
        flags: 0,
    };
    mdp.intern(initial, options.max_states)?;
    let mut queue = VecDeque::from([0]);
    while let Some(e) = queue.pop_front() {
        let (automata, s, flags) = match &mdp.states[e] {
            ExtState::Terminal => {
                let stop = mdp
                    .stop_action()
                    .expect("terminal only exists in complete mode");
                mdp.choices[e] = vec![Choice {
                    action: stop,
                    reward: 0.0,
                    successors: vec![(e, 1.0)],
                    satisfied: 0,
                }];
                continue;
            }
            ExtState::Product {
                automata,
                domain,
                flags,
            } => (automata.clone(), *domain, *flags),
        };
        let mut choices = Vec::new();
        for a in mdp.domain.applicable(s).collect::<Vec<_>>() {
            let stop = Some(a) == mdp.stop_action();
            let letter = mdp.letter(s, a, stop);
            let next: Vec<usize> = mdp
                .dfas
                .iter()
                .zip(&automata)
                .map(|(d, &q)| d.next(q, letter))
                .collect();
            let mut reward = 0.0;
            let mut satisfied = 0u64;
            let mut new_flags = flags;
            for (i, (_, r)) in mdp.spec.pairs.iter().enumerate() {
                let accepted = mdp.dfas[i].is_final(next[i]);
                let counts = accepted && (mdp.spec.mode == Mode::Prefix || stop);
                if counts {
                    satisfied |= 1 << i;
                }
                let base = if counts { *r } else { 0.0 };
                let contribution = match shaper {
                    None => base,
                    Some(sh) => {
                        let (c, flag) = sh.shape(Step {
                            formula: i,
                            reward: *r,
                            flag: flags >> i & 1 == 1,
                            next: next[i],
                            accepted,
                            stop,
                            base,
                        });
                        if flag {
                            new_flags |= 1 << i;
                        } else {
                            new_flags &= !(1 << i);
                        }
                        c
                    }
                };
                reward += contribution;
            }
            let targets: Vec<(ExtState, f64)> = if stop {
                vec![(ExtState::Terminal, 1.0)]
            } else {
                mdp.domain
                    .successors(s, a)
                    .iter()
                    .map(|&(t, p)| {
                        (
                            ExtState::Product {
                                automata: next.clone(),
                                domain: t,
                                flags: new_flags,
                            },
                            p,
                        )
                    })
                    .collect()
            };
            let mut successors = Vec::with_capacity(targets.len());
            for (state, p) in targets {
                let (k, fresh) = mdp.intern(state, options.max_states)?;
                if fresh {
                    queue.push_back(k);
                }
                successors.push((k, p));
            }
            choices.push(Choice {
                action: a,
                reward,
                successors,
                satisfied,
            });
        }
        mdp.choices[e] = choices;
    }
    Ok(mdp)
}

impl ExtendedMdp {
    fn intern(&mut self, state: ExtState, cap: usize) -> Result<(usize, bool), RewardsError> {
        if let Some(&k) = self.index.get(&state) {
            return Ok((k, false));
        }
        if self.states.len() >= cap {
            return Err(RewardsError::StateCap(cap));
        }
        self.states.push(state.clone());
        self.choices.push(Vec::new());
        self.index.insert(state, self.states.len() - 1);
        Ok((self.states.len() - 1, true))
    }

    /// Letter read by the automata when `action` is taken in domain state `s`.
    pub fn letter(&self, s: usize, action: usize, stop: bool) -> u64 {
        let mut mask = self.domain.state_mask(s);
        let p = self.domain.props().len();
        if self.action_props {
            mask |= 1 << (p + action);
        }
        if stop {
            mask |= 1 << (self.letters.len() - 1);
        }
        mask
    }

    /// The letter as a set of propositions (`last` omitted), for the oracle.
    pub fn letter_set(&self, s: usize, action: usize) -> BTreeSet<Prop> {
        let mut out = self.domain.states()[s].clone();
        if self.action_props {
            out.insert(Prop::new(self.domain.actions()[action].clone()).expect("validated"));
        }
        out
    }

    pub fn domain(&self) -> &DomainModel {
        &self.domain
    }

    pub fn spec(&self) -> &RewardSpec {
        &self.spec
    }

    pub fn mode(&self) -> Mode {
        self.spec.mode
    }

    pub fn discount(&self) -> f64 {
        self.spec.discount
    }

    /// Alphabet of the automata: domain propositions, then action
    /// propositions, then `last` in complete mode.
    pub fn letters(&self) -> &[Prop] {
        &self.letters
    }

    pub fn dfas(&self) -> &[Dfa] {
        &self.dfas
    }

    pub fn action_props(&self) -> bool {
        self.action_props
    }

    pub fn is_shaped(&self) -> bool {
        self.shaped
    }

    pub fn actions(&self) -> &[String] {
        self.domain.actions()
    }

    pub fn stop_action(&self) -> Option<usize> {
        match self.spec.mode {
            Mode::Prefix => None,
            Mode::Complete => self.domain.action_index(STOP),
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn state(&self, k: usize) -> &ExtState {
        &self.states[k]
    }

    pub fn states(&self) -> &[ExtState] {
        &self.states
    }

    pub fn index_of(&self, state: &ExtState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn choices(&self, k: usize) -> &[Choice] {
        &self.choices[k]
    }

    pub fn choice(&self, k: usize, action: usize) -> Option<&Choice> {
        self.choices[k].iter().find(|c| c.action == action)
    }

    /// Domain component, `None` for the terminal state.
    pub fn project(&self, k: usize) -> Option<usize> {
        match &self.states[k] {
            ExtState::Product { domain, .. } => Some(*domain),
            ExtState::Terminal => None,
        }
    }

    /// The extended state `(q₁₀,…,qₘ₀, t)` standing for domain state `t`.
    pub fn inject(&self, t: usize) -> ExtState {
        ExtState::Product {
            automata: self.dfas.iter().map(Dfa::initial).collect(),
            domain: t,
            flags: 0,
        }
    }

    pub fn num_transitions(&self) -> usize {
        self.choices
            .iter()
            .flatten()
            .map(|c| c.successors.len())
            .sum()
    }

    /// Largest absolute one-step reward.
    pub fn max_abs_reward(&self) -> f64 {
        self.choices
            .iter()
            .flatten()
            .map(|c| c.reward.abs())
            .fold(0.0, f64::max)
    }

    /// Canonical text key: `(q1,…,qm|bits)` with one bit per domain
    /// proposition, `#flags` appended when shaped, or `terminal`.
    pub fn key(&self, k: usize) -> String {
        match &self.states[k] {
            ExtState::Terminal => "terminal".into(),
            ExtState::Product {
                automata,
                domain,
                flags,
            } => {
                let mut out = String::from("(");
                for (i, q) in automata.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write!(out, "{q}").unwrap();
                }
                out.push('|');
                let mask = self.domain.state_mask(*domain);
                for b in 0..self.domain.props().len() {
                    out.push(if mask >> b & 1 == 1 { '1' } else { '0' });
                }
                if self.shaped {
                    out.push('#');
                    for i in 0..self.dfas.len() {
                        out.push(if flags >> i & 1 == 1 { '1' } else { '0' });
                    }
                }
                out.push(')');
                out
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<_> = (0..self.num_states())
            .map(|k| {
                let choices: Vec<_> = self.choices[k]
                    .iter()
                    .map(|c| {
                        serde_json::json!({
                            "action": self.actions()[c.action],
                            "reward": c.reward,
                            "successors": c.successors.iter().map(|&(t, p)| serde_json::json!([self.key(t), p])).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                serde_json::json!({ "state": self.key(k), "choices": choices })
            })
            .collect();
        serde_json::json!({
            "mode": self.spec.mode,
            "discount": self.spec.discount,
            "initial": self.key(0),
            "states": states,
        })
    }
}

/// A history-dependent domain policy obtained from a stationary policy on
/// the extended MDP.
#[derive(Clone, Copy, Debug)]
pub struct LiftedPolicy<'a> {
    mdp: &'a ExtendedMdp,
    policy: &'a Policy,
}

pub fn lift_policy<'a>(mdp: &'a ExtendedMdp, policy: &'a Policy) -> LiftedPolicy<'a> {
    LiftedPolicy { mdp, policy }
}

impl LiftedPolicy<'_> {
    /// Extended state reached by a domain history `s₀ a₁ s₁ … aₙ sₙ`, given as
    /// `states` (n+1 entries) and `actions` (n entries). The automata run on
    /// the letters produced along the history.
    pub fn track(&self, states: &[usize], actions: &[usize]) -> Result<usize, RewardsError> {
        let mdp = self.mdp;
        if states.len() != actions.len() + 1 || states[0] != mdp.domain.initial() {
            return Err(RewardsError::HistoryLeaves { step: 0 });
        }
        let mut e = mdp.initial();
        for (step, (&a, &t)) in actions.iter().zip(&states[1..]).enumerate() {
            let choice = mdp
                .choice(e, a)
                .ok_or(RewardsError::HistoryLeaves { step })?;
            e = choice
                .successors
                .iter()
                .map(|&(k, _)| k)
                .find(|&k| mdp.project(k) == Some(t))
                .ok_or(RewardsError::HistoryLeaves { step: step + 1 })?;
        }
        Ok(e)
    }

    /// Action prescribed after the history; `None` where nothing applies.
    pub fn action(
        &self,
        states: &[usize],
        actions: &[usize],
    ) -> Result<Option<usize>, RewardsError> {
        Ok(self.policy.action(self.track(states, actions)?))
    }
}

/// DFA that, read forwards over a prefix, accepts iff the reversed prefix
/// satisfies `f`. Lets past-time rewards run without reversing traces.
pub fn pltl_reward_dfa(f: &Formula, alphabet: &BTreeSet<Prop>) -> Result<Dfa, CompileError> {
    let compiled = compile::compile(f, alphabet)?;
    let reversed = reverse_nfa(&compiled.nfa);
    Ok(minimize(&determinize_capped(
        &reversed,
        automata::DEFAULT_STATE_CAP,
    )?))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::logic::parse;
    use crate::semantics::enumerate_traces;

    pub(crate) fn p(name: &str) -> Prop {
        Prop::new(name).unwrap()
    }

    fn interp(names: &[&str]) -> BTreeSet<Prop> {
        names.iter().map(|n| p(n)).collect()
    }

    /// Two states {} and {g}; `go` reaches {g} with probability 0.8, `wait`
    /// stays put.
    pub(crate) fn two_state() -> DomainModel {
        DomainModel::new(
            vec![p("g")],
            vec![interp(&[]), interp(&["g"])],
            vec!["wait".into(), "go".into()],
            0,
            vec![
                Edge {
                    from: 0,
                    action: 0,
                    to: 0,
                    p: 1.0,
                },
                Edge {
                    from: 0,
                    action: 1,
                    to: 1,
                    p: 0.8,
                },
                Edge {
                    from: 0,
                    action: 1,
                    to: 0,
                    p: 0.2,
                },
                Edge {
                    from: 1,
                    action: 0,
                    to: 1,
                    p: 1.0,
                },
                Edge {
                    from: 1,
                    action: 1,
                    to: 0,
                    p: 1.0,
                },
            ],
        )
        .unwrap()
    }

    pub(crate) fn spec(pairs: &[(&str, f64)], discount: f64, mode: Mode) -> RewardSpec {
        RewardSpec::new(
            pairs.iter().map(|(f, r)| (parse(f).unwrap(), *r)).collect(),
            discount,
            mode,
        )
        .unwrap()
    }

    #[test]
    fn reward_of_prefix_sums_satisfied_pairs() {
        let s = spec(&[("tt", 5.0)], 0.9, Mode::Prefix);
        assert_eq!(
            reward_of_prefix(&s, &Trace::from_names(&[&[], &["a"]])),
            5.0
        );
        let s = spec(&[("F a", 1.0)], 0.9, Mode::Prefix);
        assert_eq!(reward_of_prefix(&s, &Trace::from_names(&[&[], &[]])), 0.0);
        assert_eq!(
            reward_of_prefix(&s, &Trace::from_names(&[&[], &["a"]])),
            1.0
        );
        let s = spec(&[("F a", 1.0), ("tt", 2.5)], 0.9, Mode::Prefix);
        assert_eq!(reward_of_prefix(&s, &Trace::from_names(&[&["a"]])), 3.5);
    }

    #[test]
    fn trace_value_discounts_prefixes() {
        let s = spec(&[("tt", 1.0)], 0.5, Mode::Prefix);
        let v = trace_value(&s, &Trace::from_names(&[&[], &[], &[]]));
        assert!((v.value - 1.75).abs() < 1e-12);
        let s = spec(&[("F a", 2.0)], 0.5, Mode::Complete);
        let v = trace_value(&s, &Trace::from_names(&[&[], &[], &["a"]]));
        assert!((v.value - 0.5).abs() < 1e-12);
        assert_eq!(v.satisfied, vec![true]);
    }

    #[test]
    fn domain_validation() {
        let bad = DomainModel::new(
            vec![p("g")],
            vec![interp(&[])],
            vec!["a".into()],
            0,
            vec![Edge {
                from: 0,
                action: 0,
                to: 0,
                p: 0.7,
            }],
        );
        assert!(matches!(bad, Err(RewardsError::ProbabilitySum { .. })));
        let json = r#"{"props":["g"],"actions":["go"],"initial":[],
            "transitions":[{"from":[],"action":"go","to":["g"],"p":1.0},
                           {"from":["g"],"action":"go","to":["g"],"p":1.0}]}"#;
        let d = DomainModel::from_json(json).unwrap();
        assert_eq!(d.num_states(), 2);
        assert_eq!(DomainModel::from_json(&d.to_json().to_string()).unwrap(), d);
        let undeclared = r#"{"props":["g"],"actions":["go"],"initial":["h"],"transitions":[]}"#;
        assert!(matches!(
            DomainModel::from_json(undeclared),
            Err(RewardsError::UnknownProp(_))
        ));
        let reserved = r#"{"props":["g"],"actions":["stop"],"initial":[],"transitions":[]}"#;
        assert!(DomainModel::from_json(reserved)
            .unwrap()
            .with_stop()
            .is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let text =
            r#"{"discount":0.9,"mode":"complete","rewards":[{"formula":"F g","value":1.5}]}"#;
        let s = RewardSpec::from_json(text).unwrap();
        assert_eq!(s.mode, Mode::Complete);
        assert_eq!(RewardSpec::from_json(&s.to_json().to_string()).unwrap(), s);
        let defaulted = RewardSpec::from_json(r#"{"rewards":[]}"#).unwrap();
        assert_eq!(
            (defaulted.discount, defaulted.mode),
            (DEFAULT_DISCOUNT, Mode::Prefix)
        );
        assert!(RewardSpec::from_json(r#"{"discount":0,"rewards":[]}"#).is_err());
    }

    #[test]
    fn tt_rewards_every_choice() {
        let d = DomainModel::new(
            vec![p("g")],
            vec![interp(&[])],
            vec!["a".into()],
            0,
            vec![Edge {
                from: 0,
                action: 0,
                to: 0,
                p: 1.0,
            }],
        )
        .unwrap();
        let mdp = build_extended_mdp(&d, &spec(&[("tt", 1.0)], 0.9, Mode::Prefix)).unwrap();
        assert_eq!(mdp.num_states(), 1);
        assert_eq!(mdp.choices(0)[0].reward, 1.0);
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("ff", 3.0)], 0.9, Mode::Prefix)).unwrap();
        assert!(mdp.choices.iter().flatten().all(|c| c.reward == 0.0));
    }

    #[test]
    fn product_tracks_eventually() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Prefix)).unwrap();
        // (q0,{}), (q0,{g}), (q1,{}), (q1,{g})
        assert_eq!(mdp.num_states(), 4);
        assert_eq!(mdp.key(0), "(0|0)");
        for k in 0..mdp.num_states() {
            for c in mdp.choices(k) {
                let total: f64 = c.successors.iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
        assert!(audit_reachability(&mdp));
    }

    #[test]
    fn unknown_formula_props_are_rejected() {
        let err = build_extended_mdp(&two_state(), &spec(&[("F h", 1.0)], 0.9, Mode::Prefix))
            .unwrap_err();
        assert!(matches!(err, RewardsError::UnknownProp(_)));
    }

    #[test]
    fn action_props_reach_the_letters() {
        let s = spec(&[("F (go && g)", 1.0)], 0.9, Mode::Prefix);
        assert!(build_extended_mdp(&two_state(), &s).is_err());
        let options = BuildOptions {
            action_props: true,
            ..BuildOptions::default()
        };
        let mdp = build_extended_mdp_with(&two_state(), &s, options).unwrap();
        let report = verify_equivalence(&mdp, 4);
        assert!(report.holds(), "{report:?}");
        // Rewarded exactly when `go` is taken from {g}.
        let rewarded: Vec<_> = (0..mdp.num_states())
            .flat_map(|k| mdp.choices(k).iter().map(move |c| (k, c)))
            .filter(|(_, c)| c.reward > 0.0)
            .map(|(k, c)| (mdp.project(k), c.action))
            .collect();
        assert!(rewarded.contains(&(Some(1), 1)));
    }

    #[test]
    fn complete_mode_rewards_only_stop() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Complete)).unwrap();
        let stop = mdp.stop_action().unwrap();
        for k in 0..mdp.num_states() {
            for c in mdp.choices(k) {
                if c.reward != 0.0 {
                    assert_eq!(c.action, stop);
                }
            }
        }
        let terminal = mdp.index_of(&ExtState::Terminal).unwrap();
        assert_eq!(mdp.choices(terminal)[0].successors, vec![(terminal, 1.0)]);
        assert!(verify_equivalence(&mdp, 4).holds());
    }

    #[test]
    fn last_augmented_stop_matches_last_free_acceptance() {
        // δ(q, t ∪ {last}) ∈ F on the augmented DFA agrees with the last-free
        // DFA having accepted the same prefix.
        let alphabet = interp(&["a", "b"]);
        for text in [
            "F a",
            "a U b",
            "G (a -> X b)",
            "WX ff",
            "<(a;b)*> end",
            "F (a && last)",
        ] {
            let f = parse(text).unwrap();
            let with_last = compile::compile_dfa_with_last(&f, &alphabet).unwrap();
            let plain = compile::compile_dfa(&f, &alphabet).unwrap();
            let order: Vec<Prop> = alphabet.iter().cloned().collect();
            for trace in enumerate_traces(&alphabet, 4).unwrap() {
                if trace.is_empty() {
                    continue;
                }
                let masks = trace.masks(&order).unwrap();
                let (init, last) = masks.split_at(masks.len() - 1);
                let q = with_last.run_masks(init);
                let stop = with_last.next(q, last[0] | 1 << order.len());
                assert_eq!(
                    with_last.is_final(stop),
                    plain.accepts_masks(&masks),
                    "{text} on {trace}"
                );
            }
        }
    }

    #[test]
    fn prefix_and_complete_agree_on_last_anchored_formulas() {
        // Forcing stop after exactly two steps: a `last`-anchored formula
        // rewarded per prefix only fires at the stopping point too.
        let s_prefix = spec(&[("F (g && last)", 1.0)], 1.0, Mode::Prefix);
        let s_complete = spec(&[("F (g && last)", 1.0)], 1.0, Mode::Complete);
        for trace in enumerate_traces(&interp(&["g"]), 3).unwrap() {
            if trace.is_empty() {
                continue;
            }
            let prefix = reward_of_prefix(&s_prefix, &trace);
            let complete = trace_value(&s_complete, &trace).value;
            assert_eq!(prefix, complete, "{trace}");
        }
    }

    #[test]
    fn lifted_policy_follows_history() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Prefix)).unwrap();
        let policy = Policy::new((0..mdp.num_states()).map(|k| Some(k % 2)).collect());
        let lifted = lift_policy(&mdp, &policy);
        assert_eq!(lifted.action(&[0], &[]).unwrap(), policy.action(0));
        let e = lifted.track(&[0, 1], &[1]).unwrap();
        let q1 = mdp.dfas()[0].next(mdp.dfas()[0].initial(), 0);
        assert_eq!(
            mdp.state(e),
            &ExtState::Product {
                automata: vec![q1],
                domain: 1,
                flags: 0
            }
        );
        assert!(lifted.track(&[0, 1], &[0]).is_err());
        assert!(lifted.track(&[1], &[]).is_err());
    }

    #[test]
    fn pltl_dfa_reads_reversed_prefixes() {
        let alphabet = interp(&["G"]);
        let f = parse("!G U (G && last)").unwrap();
        let dfa = pltl_reward_dfa(&f, &alphabet).unwrap();
        let order: Vec<Prop> = alphabet.iter().cloned().collect();
        for trace in enumerate_traces(&alphabet, 5).unwrap() {
            let masks = trace.masks(&order).unwrap();
            // First element has G and no later one does.
            let expected = !masks.is_empty() && masks[0] == 1 && masks[1..].iter().all(|&m| m == 0);
            assert_eq!(dfa.accepts_masks(&masks), expected, "{trace}");
        }
        let f = parse("F a").unwrap();
        let alphabet = interp(&["a"]);
        let forward = compile::compile_dfa(&f, &alphabet).unwrap();
        assert!(automata::equivalent(&pltl_reward_dfa(&f, &alphabet).unwrap(), &forward).unwrap());
    }
}
