//! Definition-level brute-force oracles: permutation and subset enumeration,
//! direct substitution. Deliberately independent of the graph, matching and
//! compact-LP code paths in the library.

#![allow(dead_code)]

use afriat::lp::{LinearProgram, LpOutcome};

pub type Matrix = Vec<Vec<f64>>;

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
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

/// Every simple cycle of length ≥ 2 in the complete digraph on `members`,
/// listed once, starting at its smallest vertex.
pub fn simple_cycles(members: &[usize]) -> Vec<Vec<usize>> {
    fn extend(path: &mut Vec<usize>, members: &[usize], out: &mut Vec<Vec<usize>>) {
        if path.len() >= 2 {
            out.push(path.clone());
        }
        for &m in members {
            if m > path[0] && !path.contains(&m) {
                path.push(m);
                extend(path, members, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for &s in members {
        extend(&mut vec![s], members, &mut out);
    }
    out
}

fn steps(cycle: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..cycle.len()).map(move |k| (cycle[k], cycle[(k + 1) % cycle.len()]))
}

/// All steps weakly negative and one strictly negative.
pub fn is_bad_cycle(r: &Matrix, cycle: &[usize], tau: f64) -> bool {
    steps(cycle).all(|(a, b)| r[a][b] <= tau) && steps(cycle).any(|(a, b)| r[a][b] < -tau)
}

/// Cyclical consistency restricted to `members`, by enumerating simple
/// cycles (a bad closed walk always contains a bad simple cycle).
pub fn consistent_on(r: &Matrix, members: &[usize], tau: f64) -> bool {
    simple_cycles(members).iter().all(|c| !is_bad_cycle(r, c, tau))
}

pub fn consistent(r: &Matrix, tau: f64) -> bool {
    consistent_on(r, &(0..r.len()).collect::<Vec<_>>(), tau)
}

/// Closed under strict arcs: `i ∈ I`, `R_ij < 0` imply `j ∈ I`.
pub fn coherent(r: &Matrix, set: &[usize], tau: f64) -> bool {
    set.iter().all(|&i| (0..r.len()).all(|j| r[i][j] >= -tau || set.contains(&j)))
}

pub fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// A nonempty coherent subset on which `R` is cyclically consistent.
pub fn consistent_coherent_subset(r: &Matrix, tau: f64) -> Option<Vec<usize>> {
    subsets(r.len()).find(|s| !s.is_empty() && coherent(r, s, tau) && consistent_on(r, s, tau))
}

pub fn score(k: &Matrix, sigma: &[usize]) -> f64 {
    sigma.iter().enumerate().map(|(i, &j)| k[i][j]).sum()
}

pub fn min_assignment(k: &Matrix) -> (Vec<usize>, f64) {
    permutations(k.len())
        .into_iter()
        .map(|p| {
            let s = score(k, &p);
            (p, s)
        })
        .fold((vec![], f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

pub fn bottleneck(k: &Matrix) -> (Vec<usize>, f64) {
    permutations(k.len())
        .into_iter()
        .map(|p| {
            let m = p.iter().enumerate().map(|(i, &j)| k[i][j]).fold(f64::NEG_INFINITY, f64::max);
            (p, m)
        })
        .fold((vec![], f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Some permutation takes every individual along a strictly negative entry.
pub fn all_negative_permutation(r: &Matrix, tau: f64) -> Option<Vec<usize>> {
    permutations(r.len())
        .into_iter()
        .find(|p| p.iter().enumerate().all(|(i, &j)| r[i][j] < -tau))
}

pub fn is_single_cycle_or_identity(p: &[usize]) -> bool {
    let moved: Vec<usize> = (0..p.len()).filter(|&i| p[i] != i).collect();
    let Some(&start) = moved.first() else {
        return true;
    };
    let mut len = 1;
    let mut cur = p[start];
    while cur != start {
        cur = p[cur];
        len += 1;
    }
    len == moved.len()
}

/// Value of the matrix game `max_{λ∈Δ, λ ≥ floor} min_σ Σ λ_i R_{iσ(i)}` with
/// one explicit constraint per pure strategy `σ` among `strategies`.
pub fn game_value(r: &Matrix, strategies: &[Vec<usize>], floor: f64) -> f64 {
    let n = r.len();
    // variables: λ_1..λ_n, t (free)
    let mut lp = LinearProgram::new(n + 1);
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    lp.maximize(obj);
    lp.free(n);
    for i in 0..n {
        lp.lower_bound(i, Some(floor));
    }
    let mut simplex = vec![1.0; n + 1];
    simplex[n] = 0.0;
    lp.equal(simplex, 1.0);
    for p in strategies {
        let mut row: Vec<f64> = (0..n).map(|i| r[i][p[i]]).collect();
        row.push(-1.0);
        lp.ge(row, 0.0);
    }
    match lp.solve().expect("game LP is well formed") {
        LpOutcome::Optimal { value, .. } => value,
        other => panic!("game LP has a finite value, got {other:?}"),
    }
}

pub fn index_a(r: &Matrix) -> f64 {
    game_value(r, &permutations(r.len()), 0.0)
}

pub fn index_g(r: &Matrix) -> f64 {
    let cyc: Vec<Vec<usize>> = permutations(r.len()).into_iter().filter(|p| is_single_cycle_or_identity(p)).collect();
    game_value(r, &cyc, 0.0)
}

/// Afriat inequalities and sign implications by direct substitution.
pub fn certificate_holds(r: &Matrix, v: &[f64], lambda: &[f64], tau: f64) -> bool {
    let n = r.len();
    lambda.iter().all(|&l| l > 0.0)
        && (0..n).all(|i| {
            (0..n).all(|j| {
                let diff = v[j] - v[i];
                diff <= lambda[i] * r[i][j] + 1e-7
                    && (r[i][j] >= -tau || diff < 0.0)
                    && (r[i][j] > tau || diff <= tau)
            })
        })
}

/// `R_ij = p_i·x_j − p_i·x_i`.
pub fn r_from_demand(prices: &Matrix, bundles: &Matrix) -> Matrix {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let n = prices.len();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { dot(&prices[i], &bundles[j]) - dot(&prices[i], &bundles[i]) }).collect())
        .collect()
}

pub fn r_from_costs(c: &Matrix) -> Matrix {
    (0..c.len()).map(|i| (0..c.len()).map(|j| c[i][j] - c[i][i]).collect()).collect()
}

/// A permutation nobody dislikes and somebody strictly prefers to `sigma`.
pub fn weak_improvement(c: &Matrix, sigma: &[usize]) -> Option<Vec<usize>> {
    permutations(c.len()).into_iter().find(|p| {
        (0..c.len()).all(|i| c[i][p[i]] <= c[i][sigma[i]]) && (0..c.len()).any(|i| c[i][p[i]] < c[i][sigma[i]])
    })
}

/// A coalition that, trading only its own endowed houses, makes every member
/// strictly better off than under `sigma`.
pub fn blocking_coalition(c: &Matrix, sigma: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
    for s in subsets(c.len()).filter(|s| !s.is_empty()) {
        for p in permutations(s.len()) {
            if (0..s.len()).all(|k| c[s[k]][s[p[k]]] < c[s[k]][sigma[s[k]]]) {
                return Some((s.clone(), p.iter().map(|&k| s[k]).collect()));
            }
        }
    }
    None
}

/// No-trade equilibrium by definition: whatever individual `i` can afford
/// (`π_j ≤ π_i`) costs it at least its own house, and strictly cheaper
/// houses cost strictly more.
pub fn supports_no_trade(c: &Matrix, prices: &[f64], tau: f64) -> bool {
    let n = c.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            i == j
                || ((prices[j] > prices[i] + tau || c[i][j] >= c[i][i] - tau)
                    && (prices[j] >= prices[i] - tau || c[i][j] > c[i][i] + tau))
        })
    })
}

/// `R_ij + (1 − e) b_i` off the diagonal.
pub fn perturbed(r: &Matrix, b: &[f64], e: f64) -> Matrix {
    let n = r.len();
    (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { r[i][j] + (1.0 - e) * b[i] }).collect()).collect()
}

/// `Σ λ_i c_ii − min_σ Σ λ_i c_{iσ(i)}` over all permutations.
pub fn welfare_gap(c: &Matrix, lambda: &[f64]) -> f64 {
    let k: Matrix = (0..c.len()).map(|i| c[i].iter().map(|v| lambda[i] * v).collect()).collect();
    let identity: Vec<usize> = (0..c.len()).collect();
    score(&k, &identity) - min_assignment(&k).1
}
