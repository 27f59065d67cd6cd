//! Sign-pattern diagnostics on `R`.
//!
//! The direct relation has an arc `i → j` whenever `R[i][j]` is not positive
//! (observation `i` could afford bundle `j`). `R` is cyclically consistent
//! when no cycle of such arcs contains a strictly negative step, which is the
//! same as saying no strict arc joins two nodes of one strongly connected
//! component.

use std::collections::VecDeque;

use crate::assignment::perfect_matching;
use crate::model::{Allocation, RMatrix, Sign, SignTolerance};

/// Closed walk `i₁ → i₂ → … → i_p → i₁` over distinct indices (zero-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle(Vec<usize>);

impl Cycle {
    pub fn new(indices: Vec<usize>) -> Self {
        debug_assert!(!indices.is_empty());
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// Consecutive steps `(i_k, i_{k+1})`, closing back to the first index.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.0.len();
        (0..p).map(move |k| (self.0[k], self.0[(k + 1) % p]))
    }

    /// True when every step is nonpositive and at least one is negative.
    pub fn is_violation(&self, r: &RMatrix, tol: SignTolerance) -> bool {
        let mut strict = false;
        for (a, b) in self.steps() {
            match tol.classify(r[(a, b)]) {
                Sign::Positive => return false,
                Sign::Negative => strict = true,
                Sign::Zero => {}
            }
        }
        strict
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsistencyVerdict {
    Consistent,
    Violation(Cycle),
}

impl ConsistencyVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, ConsistencyVerdict::Consistent)
    }
}

fn weak_arcs(r: &RMatrix, tol: SignTolerance) -> Vec<Vec<usize>> {
    let n = r.size();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && tol.classify(r[(i, j)]) != Sign::Positive)
                .collect()
        })
        .collect()
}

/// Tarjan's algorithm, iterative. Returns the component id of every node.
pub(crate) fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, position in its adjacency list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            if let Some(&w) = adj[v].get(pos) {
                call.last_mut().expect("nonempty").1 += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Shortest path `from → … → to` along arcs that stay inside `component`.
fn path_within(adj: &[Vec<usize>], comp: &[usize], from: usize, to: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX && comp[w] == comp[from] {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

pub fn check_cyclical_consistency(r: &RMatrix, tol: SignTolerance) -> ConsistencyVerdict {
    let n = r.size();
    let adj = weak_arcs(r, tol);
    let comp = strongly_connected_components(&adj);
    for i in 0..n {
        for j in 0..n {
            if i == j || comp[i] != comp[j] || tol.classify(r[(i, j)]) != Sign::Negative {
                continue;
            }
            // strict arc i → j closed by a weak path j → … → i
            let path = path_within(&adj, &comp, j, i).expect("nodes share a component");
            let mut cycle = Vec::with_capacity(path.len());
            cycle.push(i);
            cycle.extend_from_slice(&path[..path.len() - 1]);
            return ConsistencyVerdict::Violation(Cycle::new(cycle));
        }
    }
    ConsistencyVerdict::Consistent
}

/// `members` is closed under strict arcs: `i ∈ I` and `R[i][j] < 0` imply `j ∈ I`.
pub fn is_coherent(r: &RMatrix, members: &[usize], tol: SignTolerance) -> bool {
    let n = r.size();
    let mut inside = vec![false; n];
    for &i in members {
        inside[i] = true;
    }
    members.iter().all(|&i| {
        (0..n).all(|j| inside[j] || tol.classify(r[(i, j)]) != Sign::Negative)
    })
}

/// Smallest coherent superset of `seed`, sorted ascending.
pub fn coherent_closure(r: &RMatrix, seed: &[usize], tol: SignTolerance) -> Vec<usize> {
    let n = r.size();
    let mut inside = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &i in seed {
        if !inside[i] {
            inside[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !inside[j] && tol.classify(r[(i, j)]) == Sign::Negative {
                inside[j] = true;
                queue.push_back(j);
            }
        }
    }
    (0..n).filter(|&i| inside[i]).collect()
}

/// A permutation whose every step is strictly negative, i.e. a partition of
/// all observations into increasing cycles, if one exists.
pub fn increasing_cycle_partition(r: &RMatrix, tol: SignTolerance) -> Option<Allocation> {
    perfect_matching(r.size(), |i, j| tol.classify(r[(i, j)]) == Sign::Negative)
}

/// No two distinct observations are tied: every off-diagonal entry is nonzero.
pub fn check_assumption_a(r: &RMatrix, tol: SignTolerance) -> bool {
    let n = r.size();
    (0..n).all(|i| (0..n).all(|j| i == j || tol.classify(r[(i, j)]) != Sign::Zero))
}
