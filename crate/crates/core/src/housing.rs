//! The housing market: `n` individuals, `n` houses, individual `i` initially
//! owns house `i`, and `c[i][j]` is what house `j` costs individual `i`.
//!
//! An allocation is Pareto efficient (weak domination: nobody worse off,
//! somebody strictly better) exactly when the relative-cost matrix
//! `c[i][j] − c[i][i]` is cyclically consistent, and the Afriat levels of that
//! matrix, negated, are no-trade equilibrium prices.

use crate::assignment::min_cost_assignment;
use crate::consistency::{check_cyclical_consistency, ConsistencyVerdict, Cycle};
use crate::error::{Error, Result};
use crate::indices::SimplexWeights;
use crate::model::{Allocation, CostMatrix, RMatrix, Sign, SignTolerance};
use crate::rationalize::{find_certificate, CertificateOutcome};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParetoVerdict {
    Efficient,
    /// Individuals who gain by trading around the cycle: member `k` takes the
    /// house currently held by member `k + 1`.
    Blocked(Cycle),
}

impl ParetoVerdict {
    pub fn is_efficient(&self) -> bool {
        matches!(self, ParetoVerdict::Efficient)
    }
}

/// House prices, one per house.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceSystem(pub Vec<f64>);

impl PriceSystem {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn is_pareto(c: &CostMatrix, sigma: &Allocation, tol: SignTolerance) -> Result<ParetoVerdict> {
    // relabel houses by their holders so that σ becomes the identity
    let relabeled = c.relabel(sigma)?;
    Ok(match check_cyclical_consistency(&relabeled.r_matrix(), tol) {
        ConsistencyVerdict::Consistent => ParetoVerdict::Efficient,
        ConsistencyVerdict::Violation(cycle) => ParetoVerdict::Blocked(cycle),
    })
}

/// Checks that the identity allocation is a no-trade equilibrium at `prices`:
/// `R_ij < 0 ⇒ π_j > π_i` and `R_ij ≤ 0 ⇒ π_j ≥ π_i`.
pub fn verify_equilibrium(r: &RMatrix, prices: &PriceSystem, tol: SignTolerance) -> bool {
    let n = r.size();
    if prices.0.len() != n {
        return false;
    }
    let p = &prices.0;
    (0..n).all(|i| {
        (0..n).all(|j| {
            i == j
                || match tol.classify(r[(i, j)]) {
                    Sign::Negative => p[j] > p[i],
                    Sign::Zero => p[j] >= p[i] - tol.value(),
                    Sign::Positive => true,
                }
        })
    })
}

/// Prices supporting the initial allocation as a no-trade equilibrium, or
/// `None` when the initial allocation is not Pareto efficient.
pub fn no_trade_prices(c: &CostMatrix, tol: SignTolerance) -> Result<Option<PriceSystem>> {
    let r = c.r_matrix();
    match find_certificate(&r, tol)? {
        CertificateOutcome::Infeasible(_) => Ok(None),
        CertificateOutcome::Found(cert) => {
            let prices = PriceSystem(cert.v.iter().map(|v| if *v == 0.0 { 0.0 } else { -v }).collect());
            if !verify_equilibrium(&r, &prices, tol) {
                return Err(Error::Internal("certificate levels do not support an equilibrium".into()));
            }
            Ok(Some(prices))
        }
    }
}

/// Houses affordable to individual `i`: `{ j : π_j ≤ π_i }` (zero-based).
pub fn budget_set(prices: &PriceSystem, i: usize, tol: SignTolerance) -> Vec<usize> {
    let p = &prices.0;
    (0..p.len()).filter(|&j| p[j] <= p[i] + tol.value()).collect()
}

/// Gale's top trading cycles from the initial endowment (house `i` to
/// individual `i`). Each round every remaining individual points at the
/// owner of its cheapest remaining house, ties going to the smallest house
/// index; every cycle of the pointing graph trades and leaves.
pub fn top_trading_cycles(c: &CostMatrix, tol: SignTolerance) -> Allocation {
    let n = c.size();
    let mut remaining = vec![true; n];
    let mut houses = vec![usize::MAX; n];
    let mut left = n;
    while left > 0 {
        let mut points = vec![usize::MAX; n];
        for i in (0..n).filter(|&i| remaining[i]) {
            let row = c.row(i);
            let best = (0..n)
                .filter(|&j| remaining[j])
                .map(|j| row[j])
                .fold(f64::INFINITY, f64::min);
            points[i] = (0..n)
                .find(|&j| remaining[j] && row[j] <= best + tol.value())
                .expect("some house remains");
        }
        // each walk in the functional graph ends in a cycle
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on current walk, 2 done
        let mut cleared = Vec::new();
        for s in (0..n).filter(|&i| remaining[i]) {
            let mut walk = Vec::new();
            let mut cur = s;
            while state[cur] == 0 {
                state[cur] = 1;
                walk.push(cur);
                cur = points[cur];
            }
            if state[cur] == 1 {
                let at = walk.iter().position(|&x| x == cur).expect("cycle start on walk");
                cleared.extend_from_slice(&walk[at..]);
            }
            for &w in &walk {
                state[w] = 2;
            }
        }
        for &i in &cleared {
            houses[i] = points[i];
        }
        for &i in &cleared {
            remaining[i] = false;
        }
        left -= cleared.len();
    }
    Allocation::new(houses).expect("top trading cycles assigns every house once")
}

/// `Σ λ_i c_ii − min_σ Σ λ_i c_{iσ(i)}`: the weighted welfare lost by staying
/// at the initial allocation. Uniform weights when `weights` is `None`.
pub fn welfare_gap(c: &CostMatrix, weights: Option<&SimplexWeights>) -> Result<f64> {
    let n = c.size();
    let uniform = SimplexWeights::uniform(n);
    let lam = weights.unwrap_or(&uniform);
    if lam.len() != n {
        return Err(Error::Dimension { expected: n, got: lam.len() });
    }
    let lam = lam.as_slice();
    let k: Vec<Vec<f64>> = (0..n).map(|i| c.row(i).iter().map(|v| lam[i] * v).collect()).collect();
    let status_quo: f64 = (0..n).map(|i| k[i][i]).sum();
    Ok(status_quo - min_cost_assignment(&k)?.value)
}
