//! Domain types shared by every analysis: demand data, cost and `R` matrices,
//! allocations, and sign classification under a tolerance.

use std::fmt;
use std::ops::Index;

use crate::error::{input, Error, Result};

/// Observed prices and chosen bundles, one row per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandDataset {
    prices: Vec<Vec<f64>>,
    bundles: Vec<Vec<f64>>,
}

impl DemandDataset {
    pub fn new(prices: Vec<Vec<f64>>, bundles: Vec<Vec<f64>>) -> Result<Self> {
        if prices.is_empty() {
            return input("no observations");
        }
        if prices.len() != bundles.len() {
            return Err(Error::Dimension {
                expected: prices.len(),
                got: bundles.len(),
            });
        }
        let goods = prices[0].len();
        if goods == 0 {
            return input("no goods");
        }
        for (i, (p, x)) in prices.iter().zip(&bundles).enumerate() {
            if p.len() != goods {
                return Err(Error::Dimension {
                    expected: goods,
                    got: p.len(),
                });
            }
            if x.len() != goods {
                return Err(Error::Dimension {
                    expected: goods,
                    got: x.len(),
                });
            }
            for (k, &pk) in p.iter().enumerate() {
                if !pk.is_finite() || pk <= 0.0 {
                    return input(format!("observation {}: price {} must be positive", i + 1, k + 1));
                }
            }
            for (k, &xk) in x.iter().enumerate() {
                if !xk.is_finite() || xk < 0.0 {
                    return input(format!(
                        "observation {}: quantity {} must be nonnegative",
                        i + 1,
                        k + 1
                    ));
                }
            }
        }
        Ok(Self { prices, bundles })
    }

    pub fn observations(&self) -> usize {
        self.prices.len()
    }

    pub fn goods(&self) -> usize {
        self.prices[0].len()
    }

    pub fn price(&self, i: usize) -> &[f64] {
        &self.prices[i]
    }

    pub fn bundle(&self, i: usize) -> &[f64] {
        &self.bundles[i]
    }

    /// Expenditure `p_i·x_i` of observation `i`.
    pub fn expenditure(&self, i: usize) -> f64 {
        dot(&self.prices[i], &self.bundles[i])
    }

    /// `R[i][j] = p_i·x_j − p_i·x_i`, diagonal stored as exact zero.
    pub fn r_matrix(&self) -> RMatrix {
        let n = self.observations();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let own = self.expenditure(i);
            for j in 0..n {
                if i != j {
                    data[i * n + j] = dot(&self.prices[i], &self.bundles[j]) - own;
                }
            }
        }
        RMatrix { n, data }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return input("matrix must have at least one row");
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return input(format!("row {} has {} entries, expected {}", i + 1, row.len(), n));
        }
        if let Some(k) = row.iter().position(|v| !v.is_finite()) {
            return input(format!("entry ({}, {}) is not finite", i + 1, k + 1));
        }
    }
    Ok(n)
}

/// Square matrix of costs `c[i][j]` (individual `i`, house `j`), or budget
/// evaluations in the demand reading.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&rows)?;
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// `R[i][j] = c[i][j] − c[i][i]`.
    pub fn r_matrix(&self) -> RMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    data[i * n + j] = self[(i, j)] - self[(i, i)];
                }
            }
        }
        RMatrix { n, data }
    }

    /// Houses relabelled by their current holders under `sigma`:
    /// entry `(i, j)` becomes `c[i][sigma(j)]`.
    pub fn relabel(&self, sigma: &Allocation) -> Result<CostMatrix> {
        if sigma.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: sigma.len(),
            });
        }
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = self[(i, sigma.house(j))];
            }
        }
        Ok(CostMatrix { n, data })
    }
}

impl Index<(usize, usize)> for CostMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

/// Square matrix with an exactly zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RMatrix {
    /// Validates the rows; the diagonal must already be exactly zero.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&rows)?;
        for (i, row) in rows.iter().enumerate() {
            if row[i] != 0.0 {
                return input(format!("diagonal entry ({}, {}) is not zero", i + 1, i + 1));
            }
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Accepts diagonal entries within `tol` of zero and snaps them to zero.
    pub fn from_rows_snapped(mut rows: Vec<Vec<f64>>, tol: SignTolerance) -> Result<Self> {
        check_square(&rows)?;
        for (i, row) in rows.iter_mut().enumerate() {
            if row[i].abs() > tol.value() {
                return input(format!(
                    "diagonal entry ({}, {}) = {} is not within tolerance of zero",
                    i + 1,
                    i + 1,
                    row[i]
                ));
            }
            row[i] = 0.0;
        }
        Self::from_rows(rows)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Principal submatrix on `members` (in the given order).
    pub fn restrict(&self, members: &[usize]) -> RMatrix {
        let k = members.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in members {
            for &j in members {
                data.push(self[(i, j)]);
            }
        }
        RMatrix { n: k, data }
    }

    /// Copy with every entry classified `Zero` replaced by exact zero.
    pub fn snapped(&self, tol: SignTolerance) -> RMatrix {
        let data = self
            .data
            .iter()
            .map(|&v| if tol.classify(v) == Sign::Zero { 0.0 } else { v })
            .collect();
        RMatrix { n: self.n, data }
    }

    /// `R[i][j] + shift[i]` off the diagonal.
    pub(crate) fn shift_rows(&self, shift: &[f64]) -> RMatrix {
        let n = self.n;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    data[i * n + j] += shift[i];
                }
            }
        }
        RMatrix { n, data }
    }
}

impl Index<(usize, usize)> for RMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// Band `[-τ, τ]` inside which a value counts as zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignTolerance(f64);

impl SignTolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return input(format!("tolerance must be a nonnegative number, got {tau}"));
        }
        Ok(Self(tau))
    }

    pub fn exact() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn classify(self, x: f64) -> Sign {
        if x < -self.0 {
            Sign::Negative
        } else if x > self.0 {
            Sign::Positive
        } else {
            Sign::Zero
        }
    }
}

impl Default for SignTolerance {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

pub fn classify(x: f64, tol: SignTolerance) -> Sign {
    tol.classify(x)
}

/// A permutation: individual `i` holds house `sigma[i]` (zero-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation(Vec<usize>);

impl Allocation {
    pub fn new(houses: Vec<usize>) -> Result<Self> {
        let n = houses.len();
        let mut seen = vec![false; n];
        for &h in &houses {
            if h >= n || seen[h] {
                return input(format!("{houses:?} is not a permutation of 0..{n}"));
            }
            seen[h] = true;
        }
        Ok(Self(houses))
    }

    pub fn from_one_based(houses: &[usize]) -> Result<Self> {
        if houses.contains(&0) {
            return input("allocation entries are 1-based");
        }
        Self::new(houses.iter().map(|h| h - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn house(&self, individual: usize) -> usize {
        self.0[individual]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|h| h + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &h)| i == h)
    }

    /// Cycle decomposition, each cycle starting at its smallest member,
    /// fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.0[i];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_one_based())
    }
}
