use std::collections::{BTreeSet, HashMap, VecDeque};

use super::Dfa;

/// Moore partition refinement.
///
/// The initial partition separates accepting from rejecting states and, on
/// labeled DFAs, states with different label sets. Returns the block of every
/// state; blocks are numbered in order of first appearance.
pub fn refine_partition(dfa: &Dfa) -> Vec<usize> {
    let n = dfa.num_states();
    let letters = dfa.num_letters() as u64;
    let mut block = number(
        &(0..n)
            .map(|q| (dfa.finals[q], dfa.labels(q).cloned().unwrap_or_default()))
            .collect::<Vec<_>>(),
    );
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|q| {
                (
                    block[q],
                    (0..letters).map(|l| block[dfa.next(q, l)]).collect(),
                )
            })
            .collect();
        let refined = number(&signatures);
        let before = block.iter().max().map_or(0, |m| m + 1);
        let after = refined.iter().max().map_or(0, |m| m + 1);
        block = refined;
        if before == after {
            return block;
        }
    }
}

fn number<K: Clone + Eq + std::hash::Hash>(keys: &[K]) -> Vec<usize> {
    let mut ids = HashMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// Minimal equivalent DFA, canonically numbered.
///
/// Unreachable states are dropped, equivalent states merged (never across
/// different label sets), and the result is renumbered in breadth-first order
/// from the initial state with letters visited in increasing order, so equal
/// languages give structurally equal automata.
pub fn minimize(dfa: &Dfa) -> Dfa {
    let reachable = canonical(dfa);
    let block = refine_partition(&reachable);
    let nblocks = block.iter().max().map_or(0, |m| m + 1);
    let letters = reachable.num_letters();
    let mut delta = vec![0; nblocks * letters];
    let mut finals = vec![false; nblocks];
    let mut labels = reachable
        .labels
        .as_ref()
        .map(|_| vec![BTreeSet::new(); nblocks]);
    for q in 0..reachable.num_states() {
        let b = block[q];
        finals[b] = reachable.finals[q];
        if let Some(ls) = labels.as_mut() {
            ls[b] = reachable.labels(q).cloned().unwrap_or_default();
        }
        for l in 0..letters {
            delta[b * letters + l] = block[reachable.next(q, l as u64)];
        }
    }
    let quotient = Dfa {
        alphabet: reachable.alphabet.clone(),
        initial: block[reachable.initial],
        finals,
        delta,
        labels,
        components: None,
    };
    canonical(&quotient)
}

/// Reachable part, renumbered breadth-first from the initial state.
pub(crate) fn canonical(dfa: &Dfa) -> Dfa {
    let letters = dfa.num_letters();
    let mut id = vec![usize::MAX; dfa.num_states()];
    let mut order = vec![dfa.initial];
    id[dfa.initial] = 0;
    let mut queue = VecDeque::from([dfa.initial]);
    while let Some(q) = queue.pop_front() {
        for l in 0..letters {
            let t = dfa.next(q, l as u64);
            if id[t] == usize::MAX {
                id[t] = order.len();
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    let delta = order
        .iter()
        .flat_map(|&q| (0..letters).map(move |l| (q, l)))
        .map(|(q, l)| id[dfa.next(q, l as u64)])
        .collect();
    Dfa {
        alphabet: dfa.alphabet.clone(),
        initial: 0,
        finals: order.iter().map(|&q| dfa.finals[q]).collect(),
        delta,
        labels: dfa
            .labels
            .as_ref()
            .map(|ls| order.iter().map(|&q| ls[q].clone()).collect()),
        components: dfa
            .components
            .as_ref()
            .map(|cs| order.iter().map(|&q| cs[q].clone()).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::tests::{ab, parity};
    use crate::automata::{equivalent, labeled_product};

    #[test]
    fn minimal_parity_is_a_fixpoint() {
        assert_eq!(minimize(&parity()), parity());
    }

    #[test]
    fn duplicated_state_is_merged() {
        // Parity with the odd state split in two copies, plus an unreachable state.
        let dup = Dfa::new(
            ab(),
            0,
            vec![true, false, false, true],
            vec![vec![1, 2], vec![0, 0], vec![0, 0], vec![3, 3]],
        )
        .unwrap();
        let m = minimize(&dup);
        assert_eq!(m.num_states(), 2);
        assert!(equivalent(&m, &parity()).unwrap());
        assert_eq!(minimize(&m), m);
    }

    #[test]
    fn labels_are_never_merged() {
        // Both components accept the same language, but the label sets differ
        // only in which component accepts, so merging is still allowed per vector.
        let p = labeled_product(&[parity(), parity()]).unwrap();
        let m = minimize(&p);
        assert_eq!(m.num_states(), 2);
        assert_eq!(m.labels(0), Some(&BTreeSet::from([0, 1])));
        let tt = Dfa::new(ab(), 0, vec![true], vec![vec![0, 0]]).unwrap();
        let p = labeled_product(&[parity(), tt]).unwrap();
        // Finals agree on every state (some component accepts), labels do not.
        assert_eq!(minimize(&p).num_states(), 2);
    }
}
