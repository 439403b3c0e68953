#![allow(dead_code)]

use std::collections::BTreeSet;

use nmrdp::automata::Dfa;
use nmrdp::logic::{Formula, Prop};
use nmrdp::rewards::{DomainModel, Edge, Mode, RewardSpec};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn prop(name: &str) -> Prop {
    Prop::new(name).unwrap()
}

pub fn props(names: &[&str]) -> Vec<Prop> {
    names.iter().map(|n| prop(n)).collect()
}

pub fn set(names: &[&str]) -> BTreeSet<Prop> {
    props(names).into_iter().collect()
}

/// Every interpretation of `props`, by bitmask.
pub fn interpretations(props: &[Prop]) -> Vec<BTreeSet<Prop>> {
    (0..1u64 << props.len())
        .map(|m| {
            props
                .iter()
                .enumerate()
                .filter(|(k, _)| m >> k & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect()
        })
        .collect()
}

/// `n` random weights summing to one.
pub fn distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// A random domain over `props` with `states` distinct states and
/// `actions` actions; every state has at least one applicable action.
pub fn random_domain(
    rng: &mut impl Rng,
    props: &[Prop],
    states: usize,
    actions: usize,
) -> DomainModel {
    let mut all = interpretations(props);
    all.shuffle(rng);
    all.truncate(states);
    let names: Vec<String> = (0..actions).map(|a| format!("act{a}")).collect();
    let mut edges = Vec::new();
    for s in 0..states {
        let forced = rng.gen_range(0..actions);
        for a in 0..actions {
            if a != forced && rng.gen_bool(0.3) {
                continue;
            }
            let fanout = rng.gen_range(1..=states.min(3));
            let mut targets: Vec<usize> = (0..states).collect();
            targets.shuffle(rng);
            for (&to, p) in targets[..fanout].iter().zip(distribution(rng, fanout)) {
                edges.push(Edge {
                    from: s,
                    action: a,
                    to,
                    p,
                });
            }
        }
    }
    DomainModel::new(props.to_vec(), all, names, 0, edges).unwrap()
}

/// Rewards drawn from a small dyadic set so sums are exact in floating point.
pub fn random_reward(rng: &mut impl Rng) -> f64 {
    [0.5, 1.0, 1.5, 2.0, 3.0, 4.0][rng.gen_range(0..6)]
}

pub fn random_spec(
    rng: &mut impl Rng,
    formulas: usize,
    props: &[Prop],
    discount: f64,
    mode: Mode,
) -> RewardSpec {
    let pairs: Vec<(Formula, f64)> = (0..formulas)
        .map(|_| {
            (
                nmrdp::corpus::random_formula(rng, 3, props),
                random_reward(rng),
            )
        })
        .collect();
    RewardSpec::new(pairs, discount, mode).unwrap()
}

/// Pairs of reachable states that are bisimilar: same acceptance, same label
/// set, and related successors on every letter. Computed as a greatest
/// fixpoint over state pairs, independently of the minimiser.
pub fn bisimilar_pairs(dfa: &Dfa) -> Vec<(usize, usize)> {
    let reachable: Vec<usize> = nmrdp::automata::reach(dfa, dfa.initial())
        .into_iter()
        .collect();
    let n = dfa.num_states();
    let same_label =
        |p: usize, q: usize| dfa.is_final(p) == dfa.is_final(q) && dfa.labels(p) == dfa.labels(q);
    let mut related = vec![vec![false; n]; n];
    for &p in &reachable {
        for &q in &reachable {
            related[p][q] = same_label(p, q);
        }
    }
    loop {
        let mut changed = false;
        for &p in &reachable {
            for &q in &reachable {
                if related[p][q]
                    && (0..dfa.num_letters() as u64)
                        .any(|l| !related[dfa.next(p, l)][dfa.next(q, l)])
                {
                    related[p][q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = Vec::new();
    for &p in &reachable {
        for &q in &reachable {
            if p < q && related[p][q] {
                out.push((p, q));
            }
        }
    }
    out
}
