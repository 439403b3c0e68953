use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::logic::Prop;

use super::RewardsError;

/// Name of the action that ends a trace in complete-trace mode.
pub const STOP: &str = "stop";

const PROB_TOLERANCE: f64 = 1e-9;

/// A probabilistic planning domain whose states are interpretations of
/// `props`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainModel {
    props: Vec<Prop>,
    states: Vec<BTreeSet<Prop>>,
    actions: Vec<String>,
    initial: usize,
    /// `trans[s][a]`: successor distribution; empty when `a` is not applicable.
    trans: Vec<Vec<Vec<(usize, f64)>>>,
}

/// One probabilistic edge, by state index.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub action: usize,
    pub to: usize,
    pub p: f64,
}

impl DomainModel {
    pub fn new(
        props: Vec<Prop>,
        states: Vec<BTreeSet<Prop>>,
        actions: Vec<String>,
        initial: usize,
        edges: Vec<Edge>,
    ) -> Result<DomainModel, RewardsError> {
        let declared: BTreeSet<&Prop> = props.iter().collect();
        if declared.len() != props.len() {
            return Err(RewardsError::Domain("repeated proposition".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if let Some(p) = s.iter().find(|p| !declared.contains(p)) {
                return Err(RewardsError::Domain(format!(
                    "state mentions undeclared `{p}`"
                )));
            }
            if !seen.insert(s) {
                return Err(RewardsError::Domain("repeated state".into()));
            }
        }
        let distinct: BTreeSet<&String> = actions.iter().collect();
        if distinct.len() != actions.len() || actions.is_empty() {
            return Err(RewardsError::Domain(
                "actions must be distinct and non-empty".into(),
            ));
        }
        if initial >= states.len() {
            return Err(RewardsError::Domain("initial state out of range".into()));
        }
        let mut trans = vec![vec![Vec::new(); actions.len()]; states.len()];
        for e in edges {
            if e.from >= states.len() || e.to >= states.len() || e.action >= actions.len() {
                return Err(RewardsError::Domain("transition out of range".into()));
            }
            if !(0.0..=1.0).contains(&e.p) || e.p.is_nan() {
                return Err(RewardsError::Domain(format!(
                    "probability {} outside [0,1]",
                    e.p
                )));
            }
            let row: &mut Vec<(usize, f64)> = &mut trans[e.from][e.action];
            match row.iter_mut().find(|(t, _)| *t == e.to) {
                Some((_, p)) => *p += e.p,
                None => row.push((e.to, e.p)),
            }
        }
        for (s, rows) in trans.iter_mut().enumerate() {
            for (a, row) in rows.iter_mut().enumerate() {
                row.retain(|&(_, p)| p > 0.0);
                row.sort_by_key(|&(t, _)| t);
                if row.is_empty() {
                    continue;
                }
                let sum: f64 = row.iter().map(|(_, p)| p).sum();
                if (sum - 1.0).abs() > PROB_TOLERANCE {
                    return Err(RewardsError::ProbabilitySum {
                        state: s,
                        action: actions[a].clone(),
                        sum,
                    });
                }
            }
        }
        Ok(DomainModel {
            props,
            states,
            actions,
            initial,
            trans,
        })
    }

    pub fn props(&self) -> &[Prop] {
        &self.props
    }

    pub fn states(&self) -> &[BTreeSet<Prop>] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Successor distribution of `action` in `state`; empty if not applicable.
    pub fn successors(&self, state: usize, action: usize) -> &[(usize, f64)] {
        &self.trans[state][action]
    }

    pub fn applicable(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.actions.len()).filter(move |&a| !self.trans[state][a].is_empty())
    }

    /// Bitmask of the state's propositions in `props` order.
    pub fn state_mask(&self, state: usize) -> u64 {
        self.props
            .iter()
            .enumerate()
            .filter(|(_, p)| self.states[state].contains(p))
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// The same domain with the `stop` action appended: applicable
    /// everywhere, deterministic, no effect.
    pub fn with_stop(&self) -> Result<DomainModel, RewardsError> {
        if self.actions.iter().any(|a| a == STOP) {
            return Err(RewardsError::ReservedAction(STOP.into()));
        }
        let mut out = self.clone();
        out.actions.push(STOP.into());
        for (s, rows) in out.trans.iter_mut().enumerate() {
            rows.push(vec![(s, 1.0)]);
        }
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<DomainModel, RewardsError> {
        let file: DomainFile =
            serde_json::from_str(text).map_err(|e| RewardsError::Json(e.to_string()))?;
        file.into_model()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = |s: &BTreeSet<Prop>| s.iter().map(|p| p.to_string()).collect::<Vec<_>>();
        let mut transitions = Vec::new();
        for (s, rows) in self.trans.iter().enumerate() {
            for (a, row) in rows.iter().enumerate() {
                for &(t, p) in row {
                    transitions.push(TransitionFile {
                        from: names(&self.states[s]),
                        action: self.actions[a].clone(),
                        to: names(&self.states[t]),
                        p,
                    });
                }
            }
        }
        serde_json::to_value(DomainFile {
            props: self.props.iter().map(|p| p.to_string()).collect(),
            states: Some(self.states.iter().map(names).collect()),
            actions: self.actions.clone(),
            initial: names(&self.states[self.initial]),
            transitions,
        })
        .expect("serialisable")
    }
}

#[derive(Serialize, Deserialize)]
struct DomainFile {
    props: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<Vec<String>>>,
    actions: Vec<String>,
    initial: Vec<String>,
    transitions: Vec<TransitionFile>,
}

#[derive(Serialize, Deserialize)]
struct TransitionFile {
    from: Vec<String>,
    action: String,
    to: Vec<String>,
    p: f64,
}

impl DomainFile {
    fn into_model(self) -> Result<DomainModel, RewardsError> {
        let props = self
            .props
            .iter()
            .map(|n| Prop::new(n.clone()).map_err(RewardsError::Logic))
            .collect::<Result<Vec<_>, _>>()?;
        let declared: BTreeSet<&Prop> = props.iter().collect();
        let interp = |names: &[String]| -> Result<BTreeSet<Prop>, RewardsError> {
            names
                .iter()
                .map(|n| {
                    let p = Prop::new(n.clone()).map_err(RewardsError::Logic)?;
                    if declared.contains(&p) {
                        Ok(p)
                    } else {
                        Err(RewardsError::UnknownProp(n.clone()))
                    }
                })
                .collect()
        };
        // Without an explicit list, states are the interpretations mentioned,
        // in order of first appearance (initial first).
        let mut states: Vec<BTreeSet<Prop>> = Vec::new();
        let mut index: HashMap<BTreeSet<Prop>, usize> = HashMap::new();
        let explicit = self.states.is_some();
        if let Some(list) = &self.states {
            for s in list {
                let s = interp(s)?;
                if index.contains_key(&s) {
                    return Err(RewardsError::Domain("repeated state".into()));
                }
                states.push(s.clone());
                index.insert(s, states.len() - 1);
            }
        }
        let mut add =
            |s: BTreeSet<Prop>, states: &mut Vec<BTreeSet<Prop>>| -> Result<usize, RewardsError> {
                if let Some(&k) = index.get(&s) {
                    return Ok(k);
                }
                if explicit {
                    return Err(RewardsError::Domain(format!(
                        "state {:?} is not declared",
                        names_of(&s)
                    )));
                }
                states.push(s.clone());
                index.insert(s, states.len() - 1);
                Ok(states.len() - 1)
            };
        let initial = add(interp(&self.initial)?, &mut states)?;
        let mut edges = Vec::new();
        for t in &self.transitions {
            let from = add(interp(&t.from)?, &mut states)?;
            let to = add(interp(&t.to)?, &mut states)?;
            let action = self
                .actions
                .iter()
                .position(|a| *a == t.action)
                .ok_or_else(|| RewardsError::Domain(format!("unknown action `{}`", t.action)))?;
            edges.push(Edge {
                from,
                action,
                to,
                p: t.p,
            });
        }
        DomainModel::new(props, states, self.actions, initial, edges)
    }
}

fn names_of(s: &BTreeSet<Prop>) -> Vec<String> {
    s.iter().map(|p| p.to_string()).collect()
}
