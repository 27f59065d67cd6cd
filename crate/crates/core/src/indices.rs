//! Rationalizability indices.
//!
//! With `Δ` the simplex of welfare weights and `S` the permutations of the
//! observations:
//!
//! * `A  = max_{λ∈Δ} min_{σ∈S} Σ λ_i R_{iσ(i)}`
//! * `A* = ` the same maximum over `Δ_ε = {λ ∈ Δ : λ_i ≥ ε}`
//! * `B  = min_{σ∈S} max_i R_{iσ(i)}`
//! * `G  = max_{λ∈Δ} min_{σ∈C} Σ λ_i R_{iσ(i)}`, `C` the single-cycle
//!   permutations plus the identity
//!
//! and always `A* ≤ A ≤ B ≤ 0`, `A ≤ G ≤ 0`.
//!
//! `A` and `A*` are one LP each: the inner minimum over permutations is an
//! assignment problem, so it is replaced by its dual `max Σu + Σw` subject to
//! `u_i + w_j ≤ λ_i R_ij`. `G` has no such compact form and is solved by
//! constraint generation.

use crate::assignment::{bottleneck_assignment, min_cost_assignment};
use crate::consistency::Cycle;
use crate::error::{input, Error, Result};
use crate::lp::{LinearProgram, LpOutcome, LpTolerances};
use crate::model::{Allocation, CostMatrix, RMatrix, Sign, SignTolerance};
use crate::rationalize::{find_certificate, Certificate, CertificateOutcome};

/// Nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let feas = LpTolerances::DEFAULT_FEAS;
        if weights.is_empty() {
            return input("weights must be nonempty");
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -feas) {
            return input("weights must be nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > feas * weights.len() as f64 {
            return input(format!("weights sum to {total}, expected 1"));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn from_lp(raw: &[f64]) -> Self {
        let clipped: Vec<f64> = raw.iter().map(|w| w.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        Self(clipped.into_iter().map(|w| w / total).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexValue {
    pub value: f64,
    pub weights: SimplexWeights,
}

/// `G` together with the single-cycle permutation attaining the inner
/// minimum at the optimal weights.
#[derive(Clone, Debug, PartialEq)]
pub struct GeanakoplosIndex {
    pub value: f64,
    pub weights: SimplexWeights,
    pub minimizer: Allocation,
    /// Cutting-plane rounds used.
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexReport {
    pub a_star: f64,
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub epsilon: f64,
    pub a_star_weights: SimplexWeights,
    pub a_weights: SimplexWeights,
    pub b_allocation: Allocation,
    pub g_allocation: Allocation,
    pub g_weights: SimplexWeights,
}

fn max_min_lp(r: &RMatrix, floor: f64) -> Result<IndexValue> {
    let n = r.size();
    // variables: λ (n, ≥ floor), u (n, free), w (n, free)
    let vars = 3 * n;
    let mut lp = LinearProgram::new(vars);
    let mut objective = vec![0.0; vars];
    for i in 0..n {
        lp.lower_bound(i, Some(floor));
        lp.free(n + i).free(2 * n + i);
        objective[n + i] = 1.0;
        objective[2 * n + i] = 1.0;
    }
    lp.maximize(objective);
    let mut simplex = vec![0.0; vars];
    simplex[..n].fill(1.0);
    lp.equal(simplex, 1.0);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0.0; vars];
            row[n + i] = 1.0;
            row[2 * n + j] = 1.0;
            row[i] = -r[(i, j)];
            lp.le(row, 0.0);
        }
    }
    match lp.solve()? {
        LpOutcome::Optimal { solution, value } => Ok(IndexValue {
            value,
            weights: SimplexWeights::from_lp(&solution[..n]),
        }),
        other => Err(Error::Internal(format!("max-min LP returned {other:?}"))),
    }
}

pub fn index_a(r: &RMatrix) -> Result<IndexValue> {
    max_min_lp(r, 0.0)
}

fn check_epsilon(eps: f64, n: usize) -> Result<()> {
    let cap = 1.0 / n as f64;
    if !(eps > 0.0) || eps > cap * (1.0 + 1e-12) {
        return input(format!("epsilon must lie in (0, 1/{n}], got {eps}"));
    }
    Ok(())
}

pub fn index_a_star(r: &RMatrix, eps: f64) -> Result<IndexValue> {
    check_epsilon(eps, r.size())?;
    max_min_lp(r, eps.min(1.0 / r.size() as f64))
}

/// `min_i λ_i / Σ_k λ_k` for a certificate's multipliers.
pub fn epsilon_from_certificate(cert: &Certificate) -> f64 {
    let total: f64 = cert.lambda.iter().sum();
    cert.lambda.iter().copied().fold(f64::INFINITY, f64::min) / total
}

pub fn index_b(r: &RMatrix) -> Result<(f64, Allocation)> {
    let (sigma, value) = bottleneck_assignment(&r.rows())?;
    Ok((value, sigma))
}

/// Largest matrix dimension accepted by the exact cycle oracle behind `G`.
pub const MAX_G_SIZE: usize = 16;

/// Minimum total weight over simple cycles of length ≥ 2 in the complete
/// digraph with arc weights `w[i][j]`, by dynamic programming over subsets:
/// each cycle is rooted at its smallest node.
fn min_weight_cycle(w: &[Vec<f64>]) -> Option<(f64, Vec<usize>)> {
    let n = w.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for start in 0..n {
        let rest: Vec<usize> = (start + 1..n).collect();
        let k = rest.len();
        if k == 0 {
            continue;
        }
        let states = 1usize << k;
        // dist[mask][t]: cheapest path start → … → rest[t] visiting exactly mask
        let mut dist = vec![f64::INFINITY; states * k];
        let mut parent = vec![usize::MAX; states * k];
        for t in 0..k {
            dist[(1 << t) * k + t] = w[start][rest[t]];
        }
        for mask in 1..states {
            for t in 0..k {
                let d = dist[mask * k + t];
                if mask >> t & 1 == 0 || d == f64::INFINITY {
                    continue;
                }
                for s in 0..k {
                    if mask >> s & 1 == 1 {
                        continue;
                    }
                    let next = mask | 1 << s;
                    let cand = d + w[rest[t]][rest[s]];
                    if cand < dist[next * k + s] {
                        dist[next * k + s] = cand;
                        parent[next * k + s] = t;
                    }
                }
            }
        }
        for mask in 1..states {
            for t in 0..k {
                let d = dist[mask * k + t];
                if mask >> t & 1 == 0 || d == f64::INFINITY {
                    continue;
                }
                let total = d + w[rest[t]][start];
                if best.as_ref().is_none_or(|(b, _)| total < *b) {
                    let mut path = Vec::new();
                    let (mut m, mut cur) = (mask, t);
                    while cur != usize::MAX {
                        path.push(rest[cur]);
                        let p = parent[m * k + cur];
                        m &= !(1 << cur);
                        cur = p;
                    }
                    path.push(start);
                    path.reverse();
                    best = Some((total, path));
                }
            }
        }
    }
    best
}

fn cycle_permutation(n: usize, cycle: &[usize]) -> Allocation {
    let mut houses: Vec<usize> = (0..n).collect();
    let c = Cycle::new(cycle.to_vec());
    for (a, b) in c.steps() {
        houses[a] = b;
    }
    Allocation::new(houses).expect("single cycle is a permutation")
}

/// Geanakoplos' index by cutting planes: the master LP maximizes `t` over
/// `λ ∈ Δ` subject to `Σ_k λ_{i_k} R_{i_k i_{k+1}} ≥ t` for the cycles found
/// so far; the exact cycle oracle adds the most violated cycle each round.
pub fn index_g(r: &RMatrix) -> Result<GeanakoplosIndex> {
    let n = r.size();
    if n > MAX_G_SIZE {
        return input(format!("index G is limited to n ≤ {MAX_G_SIZE}, got {n}"));
    }
    let opt = LpTolerances::DEFAULT_OPT;
    let max_rounds = 10 * n * n;
    // variables: λ (n, ≥ 0), t (free); identity contributes t ≤ 0
    let mut master = LinearProgram::new(n + 1);
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    master.maximize(objective).free(n);
    let mut simplex = vec![1.0; n + 1];
    simplex[n] = 0.0;
    master.equal(simplex, 1.0);
    let mut identity_row = vec![0.0; n + 1];
    identity_row[n] = 1.0;
    master.le(identity_row, 0.0);

    for round in 1..=max_rounds {
        let (lambda, t) = match master.solve()? {
            LpOutcome::Optimal { solution, .. } => (solution[..n].to_vec(), solution[n]),
            other => return Err(Error::Internal(format!("index G master LP returned {other:?}"))),
        };
        let weights: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| lambda[i] * r[(i, j)]).collect())
            .collect();
        let cut = min_weight_cycle(&weights);
        match cut {
            Some((value, cycle)) if value < t - opt => {
                let mut row = vec![0.0; n + 1];
                row[n] = 1.0;
                for (a, b) in Cycle::new(cycle).steps() {
                    row[a] -= r[(a, b)];
                }
                master.le(row, 0.0);
            }
            _ => {
                let minimizer = match cut {
                    Some((value, cycle)) if value < 0.0 => cycle_permutation(n, &cycle),
                    _ => Allocation::identity(n),
                };
                return Ok(GeanakoplosIndex {
                    value: t,
                    weights: SimplexWeights::from_lp(&lambda),
                    minimizer,
                    rounds: round,
                });
            }
        }
    }
    Err(Error::Convergence(format!(
        "index G cutting planes did not converge in {max_rounds} rounds"
    )))
}

/// `W(λ) = min_σ Σ λ_i c_{iσ(i)}`, the support function of the polytope
/// spanned by the assignment vectors `(c_{iσ(i)})_i`.
pub fn support_function(c: &CostMatrix, weights: &SimplexWeights) -> Result<f64> {
    let n = c.size();
    if weights.len() != n {
        return Err(Error::Dimension { expected: n, got: weights.len() });
    }
    let lam = weights.as_slice();
    let k: Vec<Vec<f64>> = (0..n).map(|i| c.row(i).iter().map(|v| lam[i] * v).collect()).collect();
    Ok(min_cost_assignment(&k)?.value)
}

/// Whether the identity's cost vector is an extreme point of that polytope
/// with a normal vector bounded below by `eps`, i.e. `A*(ε) = 0`.
pub fn extreme_point_test(c: &CostMatrix, eps: f64) -> Result<bool> {
    let value = index_a_star(&c.r_matrix(), eps)?.value;
    Ok(value >= -LpTolerances::DEFAULT_FEAS)
}

/// `ε` used when the caller supplies none: the certificate's normalized
/// smallest multiplier when one exists, otherwise `1 / (2n·M)` with
/// `M = 1 + max|R| / min{|R_ij| : R_ij < 0}`.
pub fn default_epsilon(r: &RMatrix, tol: SignTolerance) -> Result<f64> {
    let n = r.size();
    if let CertificateOutcome::Found(cert) = find_certificate(r, tol)? {
        return Ok(epsilon_from_certificate(&cert));
    }
    let smallest_strict = r
        .rows()
        .iter()
        .flatten()
        .filter(|&&v| tol.classify(v) == Sign::Negative)
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    let denom = if smallest_strict.is_finite() { smallest_strict } else { 1.0 };
    let m = 1.0 + r.max_abs() / denom;
    Ok(1.0 / (2.0 * n as f64 * m))
}

pub fn full_report(r: &RMatrix, eps: Option<f64>, tol: SignTolerance) -> Result<IndexReport> {
    let epsilon = match eps {
        Some(e) => {
            check_epsilon(e, r.size())?;
            e
        }
        None => default_epsilon(r, tol)?,
    };
    let a_star = index_a_star(r, epsilon)?;
    let a = index_a(r)?;
    let (b, b_allocation) = index_b(r)?;
    let g = index_g(r)?;

    let feas = LpTolerances::DEFAULT_FEAS;
    let chain = [
        (a_star.value, a.value, "A* ≤ A"),
        (a.value, b, "A ≤ B"),
        (b, 0.0, "B ≤ 0"),
        (a.value, g.value, "A ≤ G"),
        (g.value, 0.0, "G ≤ 0"),
    ];
    for (lo, hi, what) in chain {
        if lo > hi + feas {
            return Err(Error::Internal(format!("index chain violated: {what} ({lo} > {hi})")));
        }
    }

    Ok(IndexReport {
        a_star: a_star.value,
        a: a.value,
        b,
        g: g.value,
        epsilon,
        a_star_weights: a_star.weights,
        a_weights: a.weights,
        b_allocation,
        g_allocation: g.minimizer,
        g_weights: g.weights,
    })
}
