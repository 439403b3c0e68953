//! Discounted value iteration on an extended MDP, a finite-horizon
//! backward-induction oracle, and seeded Monte-Carlo rollouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rewards::ExtendedMdp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("discount {0} must lie in (0,1) for infinite-horizon value iteration")]
    Discount(f64),
    #[error("epsilon {0} must be positive")]
    Epsilon(f64),
    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("brute force needs {work} backups, the cap is {cap}")]
    Cap { work: usize, cap: usize },
}

pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;
/// Bound on `horizon × transitions` for [`brute_force_value`].
pub const BRUTE_FORCE_CAP: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl SolverConfig {
    pub fn new(gamma: f64) -> SolverConfig {
        SolverConfig {
            gamma,
            epsilon: DEFAULT_EPSILON,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    /// Residual below which iteration stops; guarantees an ε-optimal value.
    pub fn threshold(&self) -> f64 {
        self.epsilon * (1.0 - self.gamma) / (2.0 * self.gamma)
    }
}

/// Value per extended state, by index.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValueFunction {
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(values: Vec<f64>) -> ValueFunction {
        ValueFunction { values }
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_diff(&self, other: &ValueFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `{state key: value}`.
    pub fn to_json(&self, mdp: &ExtendedMdp) -> serde_json::Value {
        let map: serde_json::Map<_, _> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| (mdp.key(k), serde_json::json!(v)))
            .collect();
        map.into()
    }
}

/// Stationary deterministic policy: an action index per extended state,
/// `None` where no action applies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Policy {
    actions: Vec<Option<usize>>,
}

impl Policy {
    pub fn new(actions: Vec<Option<usize>>) -> Policy {
        Policy { actions }
    }

    pub fn action(&self, k: usize) -> Option<usize> {
        self.actions.get(k).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// `{state key: action name}`.
    pub fn to_json(&self, mdp: &ExtendedMdp) -> serde_json::Value {
        let map: serde_json::Map<_, _> = self
            .actions
            .iter()
            .enumerate()
            .map(|(k, a)| {
                (
                    mdp.key(k),
                    a.map_or(serde_json::Value::Null, |a| mdp.actions()[a].clone().into()),
                )
            })
            .collect();
        map.into()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub values: ValueFunction,
    pub policy: Policy,
    pub iterations: usize,
    pub residual: f64,
}

impl Solution {
    pub fn to_json(&self, mdp: &ExtendedMdp) -> serde_json::Value {
        serde_json::json!({
            "initial": mdp.key(mdp.initial()),
            "value": self.values.get(mdp.initial()),
            "iterations": self.iterations,
            "residual": self.residual,
            "values": self.values.to_json(mdp),
            "policy": self.policy.to_json(mdp),
        })
    }
}

fn q_value(mdp: &ExtendedMdp, k: usize, c: usize, gamma: f64, v: &[f64]) -> f64 {
    let c = &mdp.choices(k)[c];
    c.reward + gamma * c.successors.iter().map(|&(t, p)| p * v[t]).sum::<f64>()
}

fn backup(mdp: &ExtendedMdp, gamma: f64, v: &[f64]) -> Vec<f64> {
    (0..mdp.num_states())
        .map(|k| {
            (0..mdp.choices(k).len())
                .map(|c| q_value(mdp, k, c, gamma, v))
                .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.max(q))))
                .unwrap_or(0.0)
        })
        .collect()
}

/// Greedy policy for `v`; among near-equal maxima the earliest declared
/// action wins.
pub fn greedy(mdp: &ExtendedMdp, gamma: f64, v: &ValueFunction) -> Policy {
    let actions = (0..mdp.num_states())
        .map(|k| {
            let qs: Vec<f64> = (0..mdp.choices(k).len())
                .map(|c| q_value(mdp, k, c, gamma, &v.values))
                .collect();
            let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tolerance = 1e-12 * best.abs().max(1.0);
            qs.iter()
                .position(|&q| q >= best - tolerance)
                .map(|c| mdp.choices(k)[c].action)
        })
        .collect();
    Policy { actions }
}

/// Bellman sweeps from `V₀ = 0` until the max-norm residual drops below
/// `ε(1−γ)/(2γ)`.
pub fn value_iterate(mdp: &ExtendedMdp, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    if !(cfg.gamma > 0.0 && cfg.gamma < 1.0) {
        return Err(SolveError::Discount(cfg.gamma));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(SolveError::Epsilon(cfg.epsilon));
    }
    let threshold = cfg.threshold();
    let mut v = vec![0.0; mdp.num_states()];
    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.max_iters {
        let next = backup(mdp, cfg.gamma, &v);
        residual = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if residual < threshold {
            let values = ValueFunction { values: v };
            return Ok(Solution {
                policy: greedy(mdp, cfg.gamma, &values),
                values,
                iterations: iteration,
                residual,
            });
        }
    }
    Err(SolveError::NotConverged {
        iterations: cfg.max_iters,
        residual,
    })
}

/// Exact `horizon`-step optimal value by backward induction, discounting
/// with the specification's factor.
pub fn brute_force_value(mdp: &ExtendedMdp, horizon: usize) -> Result<ValueFunction, SolveError> {
    let work = horizon.saturating_mul(mdp.num_transitions().max(1));
    if work > BRUTE_FORCE_CAP {
        return Err(SolveError::Cap {
            work,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let mut v = vec![0.0; mdp.num_states()];
    for _ in 0..horizon {
        v = backup(mdp, mdp.discount(), &v);
    }
    Ok(ValueFunction { values: v })
}

/// One rollout.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    /// Extended states visited, starting at the initial one.
    pub states: Vec<usize>,
    /// Actions taken; one fewer than `states` unless the episode ended on a
    /// state without a prescribed action.
    pub actions: Vec<usize>,
    pub value: f64,
    /// Formulas satisfied at some step.
    pub satisfied: u64,
}

/// Follows `policy` for at most `horizon` steps, stopping early in the
/// terminal state or where the policy prescribes nothing.
pub fn rollout(mdp: &ExtendedMdp, policy: &Policy, horizon: usize, rng: &mut impl Rng) -> Episode {
    let mut episode = Episode {
        states: vec![mdp.initial()],
        actions: Vec::new(),
        value: 0.0,
        satisfied: 0,
    };
    let mut k = mdp.initial();
    let mut discount = 1.0;
    for _ in 0..horizon {
        if Some(k) == mdp.index_of(&crate::rewards::ExtState::Terminal) {
            break;
        }
        let Some(a) = policy.action(k) else { break };
        let Some(choice) = mdp.choice(k, a) else {
            break;
        };
        episode.value += discount * choice.reward;
        episode.satisfied |= choice.satisfied;
        discount *= mdp.discount();
        let x: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = choice
            .successors
            .last()
            .expect("distribution is non-empty")
            .0;
        for &(t, p) in &choice.successors {
            acc += p;
            if x < acc {
                next = t;
                break;
            }
        }
        episode.actions.push(a);
        episode.states.push(next);
        k = next;
    }
    episode
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationStats {
    pub episodes: usize,
    pub horizon: usize,
    pub mean: f64,
    /// Sample standard deviation of the episode values.
    pub stdev: f64,
    /// Per formula, the fraction of episodes in which it was satisfied.
    pub satisfaction: Vec<f64>,
}

impl SimulationStats {
    pub fn std_error(&self) -> f64 {
        self.stdev / (self.episodes as f64).sqrt()
    }
}

/// Seeded rollouts; identical seeds give identical statistics.
pub fn simulate(
    mdp: &ExtendedMdp,
    policy: &Policy,
    episodes: usize,
    horizon: usize,
    seed: u64,
) -> SimulationStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let formulas = mdp.spec().pairs.len();
    let mut values = Vec::with_capacity(episodes);
    let mut hits = vec![0usize; formulas];
    for _ in 0..episodes {
        let e = rollout(mdp, policy, horizon, &mut rng);
        for (i, h) in hits.iter_mut().enumerate() {
            if e.satisfied >> i & 1 == 1 {
                *h += 1;
            }
        }
        values.push(e.value);
    }
    let n = episodes.max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stdev = if episodes > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    SimulationStats {
        episodes,
        horizon,
        mean,
        stdev,
        satisfaction: hits.iter().map(|&h| h as f64 / n).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewards::tests::{p, spec, two_state};
    use crate::rewards::{build_extended_mdp, DomainModel, Edge, Mode};

    fn single(reward: &str, gamma: f64) -> ExtendedMdp {
        let d = DomainModel::new(
            vec![p("g")],
            vec![Default::default()],
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
        build_extended_mdp(&d, &spec(&[(reward, 1.0)], gamma, Mode::Prefix)).unwrap()
    }

    #[test]
    fn geometric_series() {
        for gamma in [0.5, 0.9, 0.99] {
            let mdp = single("tt", gamma);
            let sol = value_iterate(&mdp, &SolverConfig::new(gamma)).unwrap();
            assert!((sol.values.get(0) - 1.0 / (1.0 - gamma)).abs() < 1e-6);
        }
        let mdp = single("ff", 0.9);
        assert_eq!(
            value_iterate(&mdp, &SolverConfig::new(0.9))
                .unwrap()
                .values
                .get(0),
            0.0
        );
    }

    #[test]
    fn myopic_limit() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("g", 1.0)], 1e-9, Mode::Prefix)).unwrap();
        let sol = value_iterate(&mdp, &SolverConfig::new(1e-9)).unwrap();
        for k in 0..mdp.num_states() {
            let best = mdp
                .choices(k)
                .iter()
                .map(|c| c.reward)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((sol.values.get(k) - best).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let mdp = single("tt", 0.9);
        assert!(matches!(
            value_iterate(&mdp, &SolverConfig::new(1.0)),
            Err(SolveError::Discount(_))
        ));
        let cfg = SolverConfig {
            max_iters: 3,
            ..SolverConfig::new(0.99)
        };
        assert!(matches!(
            value_iterate(&mdp, &cfg),
            Err(SolveError::NotConverged { .. })
        ));
    }

    #[test]
    fn brute_force_edges() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Prefix)).unwrap();
        assert!(brute_force_value(&mdp, 0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let one = brute_force_value(&mdp, 1).unwrap();
        for k in 0..mdp.num_states() {
            let best = mdp
                .choices(k)
                .iter()
                .map(|c| c.reward)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(one.get(k), best);
        }
        let sol = value_iterate(&mdp, &SolverConfig::new(0.9)).unwrap();
        let h30 = brute_force_value(&mdp, 30).unwrap();
        assert!(sol.values.max_diff(&h30) <= 0.9f64.powi(30) / 0.1 + 1e-6);
    }

    #[test]
    fn policy_reaches_goal() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Prefix)).unwrap();
        let sol = value_iterate(&mdp, &SolverConfig::new(0.9)).unwrap();
        assert_eq!(sol.policy.action(0), Some(1));
    }

    #[test]
    fn simulation_is_reproducible() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Prefix)).unwrap();
        let sol = value_iterate(&mdp, &SolverConfig::new(0.9)).unwrap();
        let a = simulate(&mdp, &sol.policy, 200, 50, 3);
        assert_eq!(a, simulate(&mdp, &sol.policy, 200, 50, 3));
        assert!(a.satisfaction[0] > 0.9);
        let mdp = single("tt", 0.9);
        let sol = value_iterate(&mdp, &SolverConfig::new(0.9)).unwrap();
        let s = simulate(&mdp, &sol.policy, 10, 200, 1);
        assert!(s.stdev < 1e-12);
        assert!((s.mean - 10.0).abs() < 1e-3);
    }

    #[test]
    fn json_is_keyed_by_state() {
        let mdp =
            build_extended_mdp(&two_state(), &spec(&[("F g", 1.0)], 0.9, Mode::Prefix)).unwrap();
        let sol = value_iterate(&mdp, &SolverConfig::new(0.9)).unwrap();
        let json = sol.to_json(&mdp);
        assert_eq!(json["policy"]["(0|0)"], "go");
        assert!(json["values"]["(0|0)"].as_f64().unwrap() > 0.0);
    }
}
