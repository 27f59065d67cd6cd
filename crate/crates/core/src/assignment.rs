//! Square assignment problems: minimum total cost with dual potentials,
//! minimum bottleneck, and bipartite perfect matching.

use crate::error::{input, Result};
use crate::model::{Allocation, SignTolerance};

/// Optimal assignment together with a dual certificate `(u, v)`:
/// `u[i] + v[j] ≤ K[i][j]` everywhere, with equality on the assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentResult {
    pub allocation: Allocation,
    pub value: f64,
    pub row_duals: Vec<f64>,
    pub col_duals: Vec<f64>,
}

impl AssignmentResult {
    pub fn dual_value(&self) -> f64 {
        self.row_duals.iter().sum::<f64>() + self.col_duals.iter().sum::<f64>()
    }
}

fn check_square(k: &[Vec<f64>]) -> Result<usize> {
    let n = k.len();
    if n == 0 {
        return input("assignment matrix is empty");
    }
    for (i, row) in k.iter().enumerate() {
        if row.len() != n {
            return input(format!("assignment matrix row {} has {} entries, expected {n}", i + 1, row.len()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return input(format!("assignment matrix row {} has a non-finite entry", i + 1));
        }
    }
    Ok(n)
}

/// Hungarian method with row and column potentials, O(n³).
pub fn min_cost_assignment(k: &[Vec<f64>]) -> Result<AssignmentResult> {
    let n = check_square(k)?;
    // 1-based arrays; column 0 is the virtual source of each augmentation
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = k[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        }
    }

    let mut houses = vec![0; n];
    for j in 1..=n {
        houses[owner[j] - 1] = j - 1;
    }
    let value = houses.iter().enumerate().map(|(i, &j)| k[i][j]).sum();
    Ok(AssignmentResult {
        allocation: Allocation::new(houses).expect("hungarian output is a permutation"),
        value,
        row_duals: u[1..].to_vec(),
        col_duals: v[1..].to_vec(),
    })
}

/// Perfect matching of `n` rows onto `n` columns using only the pairs for
/// which `allowed(row, col)` holds (augmenting paths, O(n³)).
pub fn perfect_matching(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Option<Allocation> {
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| allowed(i, j)).collect()).collect();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];

    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if col_owner[j].is_none_or(|o| augment(o, adj, seen, col_owner)) {
                col_owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, &adj, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut houses = vec![0; n];
    for (j, owner) in col_owner.iter().enumerate() {
        houses[owner.expect("matching is perfect")] = j;
    }
    Some(Allocation::new(houses).expect("matching is a permutation"))
}

/// `min over σ of max_i R[i][σ(i)]`, by binary search over the distinct
/// entries with a perfect-matching feasibility test at each threshold.
pub fn bottleneck_assignment(r: &[Vec<f64>]) -> Result<(Allocation, f64)> {
    let n = check_square(r)?;
    let mut levels: Vec<f64> = r.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let feasible = |t: f64| perfect_matching(n, |i, j| r[i][j] <= t);
    // the largest entry always admits the full bipartite graph
    let (mut lo, mut hi) = (0, levels.len() - 1);
    let mut best = feasible(levels[hi]).expect("complete bipartite graph has a perfect matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible(levels[mid]) {
            Some(sigma) => {
                best = sigma;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    Ok((best, levels[lo]))
}

/// Every cycle has nonnegative total `Σ M[i_k][i_{k+1}] − M[i_k][i_k]`,
/// i.e. the identity solves the assignment problem for `M`.
pub fn is_cyclically_monotone(m: &[Vec<f64>], tol: SignTolerance) -> Result<bool> {
    let n = check_square(m)?;
    let relative: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[i][j] - m[i][i]).collect()).collect();
    Ok(min_cost_assignment(&relative)?.value >= -tol.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_min(k: &[Vec<f64>]) -> f64 {
        permutations(k.len())
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| k[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    fn brute_bottleneck(k: &[Vec<f64>]) -> f64 {
        permutations(k.len())
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| k[i][j]).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    fn three_cycle() -> Vec<Vec<f64>> {
        vec![vec![0.0, -1.0, 2.0], vec![2.0, 0.0, -1.0], vec![-1.0, 2.0, 0.0]]
    }

    #[test]
    fn frozen_oracle_values() {
        // values computed by brute_min / brute_bottleneck over all permutations
        assert_eq!(brute_min(&[vec![1.0, 2.0], vec![2.0, 1.0]]), 2.0);
        assert_eq!(brute_min(&[vec![0.0, -1.0], vec![-1.0, 0.0]]), -2.0);
        assert_eq!(brute_min(&three_cycle()), -3.0);
        assert_eq!(brute_bottleneck(&[vec![0.0, -1.0], vec![-1.0, 0.0]]), -1.0);
        assert_eq!(brute_bottleneck(&[vec![0.0, 1.0], vec![1.0, 0.0]]), 0.0);
        assert_eq!(brute_bottleneck(&three_cycle()), -1.0);
    }

    #[test]
    fn min_cost_examples() {
        let res = min_cost_assignment(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(res.allocation.is_identity());
        assert_eq!(res.value, 2.0);

        let res = min_cost_assignment(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(res.allocation.to_one_based(), vec![2, 1]);
        assert_eq!(res.value, -2.0);

        let res = min_cost_assignment(&three_cycle()).unwrap();
        assert_eq!(res.allocation.to_one_based(), vec![2, 3, 1]);
        assert_eq!(res.value, -3.0);
        assert!((res.dual_value() - res.value).abs() < 1e-12);
    }

    #[test]
    fn bottleneck_examples() {
        let (s, v) = bottleneck_assignment(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!((s.to_one_based(), v), (vec![2, 1], -1.0));
        let (s, v) = bottleneck_assignment(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!((s.to_one_based(), v), (vec![1, 2], 0.0));
        let (s, v) = bottleneck_assignment(&three_cycle()).unwrap();
        assert_eq!((s.to_one_based(), v), (vec![2, 3, 1], -1.0));
    }

    #[test]
    fn cyclic_monotonicity_examples() {
        let tol = SignTolerance::default();
        assert!(is_cyclically_monotone(&[vec![0.0, 1.0], vec![1.0, 0.0]], tol).unwrap());
        assert!(!is_cyclically_monotone(&[vec![0.0, -1.0], vec![-1.0, 0.0]], tol).unwrap());
        assert!(is_cyclically_monotone(&[vec![3.0, 3.0, 3.0], vec![-1.0, -1.0, -1.0], vec![0.5, 0.5, 0.5]], tol).unwrap());
    }

    #[test]
    fn rejects_ragged_input() {
        assert!(min_cost_assignment(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(bottleneck_assignment(&[]).is_err());
        assert!(min_cost_assignment(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn matching_respects_allowed_pairs() {
        assert!(perfect_matching(3, |i, j| j == 0 || i == j && i > 0).is_some());
        assert!(perfect_matching(3, |_, j| j == 0).is_none());
        assert_eq!(perfect_matching(0, |_, _| true).map(|a| a.len()), Some(0));
    }

    fn square(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1..=max_n).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, n), n))
    }

    proptest! {
        #[test]
        fn hungarian_matches_enumeration(k in square(7)) {
            let res = min_cost_assignment(&k).unwrap();
            prop_assert!((res.value - brute_min(&k)).abs() < 1e-7);
            prop_assert!((res.dual_value() - res.value).abs() < 1e-7);
            for i in 0..k.len() {
                for j in 0..k.len() {
                    prop_assert!(res.row_duals[i] + res.col_duals[j] <= k[i][j] + 1e-7);
                }
                let j = res.allocation.house(i);
                prop_assert!((res.row_duals[i] + res.col_duals[j] - k[i][j]).abs() < 1e-7);
            }
        }

        #[test]
        fn bottleneck_matches_enumeration(k in square(7)) {
            let (sigma, value) = bottleneck_assignment(&k).unwrap();
            prop_assert_eq!(value, brute_bottleneck(&k));
            prop_assert!(k.iter().flatten().any(|&e| e == value));
            let achieved = (0..k.len()).map(|i| k[i][sigma.house(i)]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(achieved, value);
        }
    }
}
