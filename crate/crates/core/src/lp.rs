//! Dense two-phase primal simplex. Entering columns follow Bland's rule; the
//! leaving row comes from a two-pass (Harris) ratio test that prefers large
//! pivot elements, with a switch to Bland's leaving rule after a long run of
//! degenerate pivots.
//!
//! Problems are stated as
//!
//! ```text
//! maximize  c·z
//! subject to  A_ub z ≤ b_ub,  A_eq z = b_eq,  z_k ≥ l_k (or z_k free)
//! ```
//!
//! Every variable defaults to `z_k ≥ 0`. Sizes here are a few hundred rows at
//! most, so the whole tableau is kept in memory and pivoted in place.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpTolerances {
    /// Allowed constraint violation of a returned point.
    pub feas: f64,
    /// Reduced-cost threshold for optimality.
    pub opt: f64,
}

impl LpTolerances {
    pub const DEFAULT_FEAS: f64 = 1e-7;
    pub const DEFAULT_OPT: f64 = 1e-7;
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            feas: Self::DEFAULT_FEAS,
            opt: Self::DEFAULT_OPT,
        }
    }
}

// Entries below this magnitude are never pivoted on.
const PIVOT_EPS: f64 = 1e-10;
const MAX_PIVOTS: usize = 200_000;
// Primal slack allowed by the first pass of the ratio test.
const HARRIS_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    le_rows: Vec<(Vec<f64>, f64)>,
    eq_rows: Vec<(Vec<f64>, f64)>,
    lower: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { solution: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    /// `num_vars` variables, all `≥ 0`, zero objective, no constraints.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            le_rows: Vec::new(),
            eq_rows: Vec::new(),
            lower: vec![Some(0.0); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn maximize(&mut self, objective: Vec<f64>) -> &mut Self {
        self.objective = objective;
        self
    }

    /// `row·z ≤ rhs`
    pub fn le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le_rows.push((row, rhs));
        self
    }

    /// `row·z ≥ rhs`
    pub fn ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.le_rows.push((row.into_iter().map(|v| -v).collect(), -rhs));
        self
    }

    /// `row·z = rhs`
    pub fn equal(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push((row, rhs));
        self
    }

    /// Lower bound on variable `k`; `None` makes it free.
    pub fn lower_bound(&mut self, k: usize, bound: Option<f64>) -> &mut Self {
        self.lower[k] = bound;
        self
    }

    pub fn free(&mut self, k: usize) -> &mut Self {
        self.lower_bound(k, None)
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        let dim = |len: usize| -> Result<()> {
            if len == n {
                Ok(())
            } else {
                Err(Error::Dimension { expected: n, got: len })
            }
        };
        dim(self.objective.len())?;
        dim(self.lower.len())?;
        for (row, rhs) in self.le_rows.iter().chain(&self.eq_rows) {
            dim(row.len())?;
            if !rhs.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("non-finite constraint coefficient".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite objective coefficient".into()));
        }
        if self.lower.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite lower bound".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `z`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        let le = self.le_rows.iter().map(|(row, rhs)| dot(row) - rhs);
        let eq = self.eq_rows.iter().map(|(row, rhs)| (dot(row) - rhs).abs());
        let bounds = self
            .lower
            .iter()
            .zip(z)
            .filter_map(|(l, v)| l.map(|l| l - v));
        le.chain(eq).chain(bounds).fold(0.0, f64::max)
    }

    pub fn objective_at(&self, z: &[f64]) -> f64 {
        self.objective.iter().zip(z).map(|(a, b)| a * b).sum()
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        self.solve_with(LpTolerances::default())
    }

    pub fn solve_with(&self, tol: LpTolerances) -> Result<LpOutcome> {
        self.validate()?;
        Tableau::build(self).run(self, tol)
    }

    /// A point satisfying every constraint, ignoring the objective.
    pub fn feasible(&self) -> Result<Option<Vec<f64>>> {
        let mut lp = self.clone();
        lp.objective = vec![0.0; self.num_vars];
        match lp.solve()? {
            LpOutcome::Optimal { solution, .. } => Ok(Some(solution)),
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        }
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows + 1` rows of `cols + 1` entries; the last row is the reduced
    /// profit row, the last column the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
    first_artificial: usize,
    vars: Vec<VarMap>,
    structural: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let mut vars = Vec::with_capacity(lp.num_vars);
        let mut structural = 0;
        for bound in &lp.lower {
            match bound {
                Some(l) => {
                    vars.push(VarMap::Shifted { col: structural, lower: *l });
                    structural += 1;
                }
                None => {
                    vars.push(VarMap::Split { pos: structural, neg: structural + 1 });
                    structural += 2;
                }
            }
        }

        let n_le = lp.le_rows.len();
        let rows = n_le + lp.eq_rows.len();

        // constraint rows over structural columns, rhs shifted by lower bounds
        let mut dense: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows);
        for (row, rhs) in lp.le_rows.iter().chain(&lp.eq_rows) {
            let mut out = vec![0.0; structural];
            let mut b = *rhs;
            for (k, &coef) in row.iter().enumerate() {
                match vars[k] {
                    VarMap::Shifted { col, lower } => {
                        out[col] = coef;
                        b -= coef * lower;
                    }
                    VarMap::Split { pos, neg } => {
                        out[pos] = coef;
                        out[neg] = -coef;
                    }
                }
            }
            dense.push((out, b));
        }

        // slack columns follow the structural ones; artificials come last
        let first_slack = structural;
        let mut needs_artificial = Vec::with_capacity(rows);
        for (r, (_, b)) in dense.iter().enumerate() {
            needs_artificial.push(r >= n_le || *b < 0.0);
        }
        let n_art = needs_artificial.iter().filter(|&&x| x).count();
        let first_artificial = first_slack + n_le;
        let cols = first_artificial + n_art;
        let width = cols + 1;

        let mut a = vec![0.0; (rows + 1) * width];
        let mut basis = vec![0; rows];
        let mut next_art = first_artificial;
        for (r, (row, b)) in dense.into_iter().enumerate() {
            let flip = if b < 0.0 { -1.0 } else { 1.0 };
            let line = &mut a[r * width..(r + 1) * width];
            for (c, v) in row.into_iter().enumerate() {
                line[c] = flip * v;
            }
            if r < n_le {
                line[first_slack + r] = flip;
            }
            line[cols] = flip * b;
            if needs_artificial[r] {
                line[next_art] = 1.0;
                basis[r] = next_art;
                next_art += 1;
            } else {
                basis[r] = first_slack + r;
            }
        }

        Self {
            rows,
            cols,
            a,
            basis,
            first_artificial,
            vars,
            structural,
        }
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    /// Installs reduced profits `d = c − c_B B⁻¹A` for column profits `profit`.
    fn set_objective(&mut self, profit: &[f64]) {
        let w = self.width();
        let obj = self.rows * w;
        for c in 0..=self.cols {
            self.a[obj + c] = if c < self.cols { profit[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = profit[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=self.cols {
                    self.a[obj + c] -= cb * self.a[r * w + c];
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.a[pr * w + pc];
        for c in 0..w {
            self.a[pr * w + c] /= p;
        }
        self.a[pr * w + pc] = 1.0;
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.a[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let delta = f * self.a[pr * w + c];
                let v = self.a[r * w + c] - delta;
                self.a[r * w + c] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            self.a[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Leaving row for `enter`, or `None` when the column is unbounded.
    fn leaving_row(&self, enter: usize, bland: bool) -> Option<usize> {
        let rows = (0..self.rows).filter(|&r| self.at(r, enter) > PIVOT_EPS);
        if bland {
            let ratio = |r: usize| self.rhs(r).max(0.0) / self.at(r, enter);
            let best = rows.clone().map(ratio).fold(f64::INFINITY, f64::min);
            return rows
                .filter(|&r| ratio(r) <= best + 1e-12 * (1.0 + best))
                .min_by_key(|&r| self.basis[r]);
        }
        // pass 1: step length allowing basic variables a tiny negative excursion
        let theta = rows
            .clone()
            .map(|r| (self.rhs(r).max(0.0) + HARRIS_SLACK) / self.at(r, enter))
            .fold(f64::INFINITY, f64::min);
        // pass 2: the largest pivot element among rows blocking within that step
        rows.filter(|&r| self.rhs(r).max(0.0) / self.at(r, enter) <= theta).max_by(|&p, &q| {
            self.at(p, enter)
                .total_cmp(&self.at(q, enter))
                .then(self.basis[q].cmp(&self.basis[p]))
        })
    }

    /// Simplex iterations; `Ok(false)` signals an unbounded ray.
    fn optimize(&mut self, enterable: usize, opt: f64) -> Result<bool> {
        let stall_limit = 50 * (self.rows + self.cols);
        let mut degenerate_run = 0;
        for _ in 0..MAX_PIVOTS {
            let obj = self.rows;
            let Some(enter) = (0..enterable).find(|&c| self.at(obj, c) > opt) else {
                return Ok(true);
            };
            let Some(r) = self.leaving_row(enter, degenerate_run > stall_limit) else {
                return Ok(false);
            };
            let before = self.at(obj, self.cols);
            self.pivot(r, enter);
            if self.at(obj, self.cols) < before - 1e-12 {
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
        }
        Err(Error::Convergence(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }

    fn run(mut self, lp: &LinearProgram, tol: LpTolerances) -> Result<LpOutcome> {
        // phase 1: maximize −Σ artificials
        if self.first_artificial < self.cols {
            let mut profit = vec![0.0; self.cols];
            for p in profit.iter_mut().skip(self.first_artificial) {
                *p = -1.0;
            }
            self.set_objective(&profit);
            self.optimize(self.cols, tol.opt)?;
            let infeasibility = self.at(self.rows, self.cols);
            if infeasibility > tol.feas {
                return Ok(LpOutcome::Infeasible);
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..self.rows {
                if self.basis[r] >= self.first_artificial {
                    if let Some(c) = (0..self.first_artificial).find(|&c| self.at(r, c).abs() > PIVOT_EPS) {
                        self.pivot(r, c);
                    }
                }
            }
        }

        // phase 2
        let mut profit = vec![0.0; self.cols];
        for (k, map) in self.vars.iter().enumerate() {
            match *map {
                VarMap::Shifted { col, .. } => profit[col] = lp.objective[k],
                VarMap::Split { pos, neg } => {
                    profit[pos] = lp.objective[k];
                    profit[neg] = -lp.objective[k];
                }
            }
        }
        self.set_objective(&profit);
        if !self.optimize(self.first_artificial, tol.opt)? {
            return Ok(LpOutcome::Unbounded);
        }

        let mut col_value = vec![0.0; self.structural];
        for r in 0..self.rows {
            let c = self.basis[r];
            if c < self.structural {
                col_value[c] = self.rhs(r).max(0.0);
            }
        }
        let solution: Vec<f64> = self
            .vars
            .iter()
            .map(|map| match *map {
                VarMap::Shifted { col, lower } => lower + col_value[col],
                VarMap::Split { pos, neg } => col_value[pos] - col_value[neg],
            })
            .collect();
        let scale = lp.le_rows.iter().chain(&lp.eq_rows).map(|(_, b)| b.abs()).fold(1.0, f64::max);
        let violation = lp.max_violation(&solution);
        if violation > 10.0 * tol.feas * scale {
            return Err(Error::Convergence(format!("simplex lost feasibility (violation {violation:.3e})")));
        }
        let value = lp.objective_at(&solution);
        Ok(LpOutcome::Optimal { solution, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn optimal(outcome: LpOutcome) -> (Vec<f64>, f64) {
        match outcome {
            LpOutcome::Optimal { solution, value } => (solution, value),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn single_variable_cases() {
        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]).le(vec![1.0], 3.0);
        let (z, v) = optimal(lp.solve().unwrap());
        assert!((z[0] - 3.0).abs() < 1e-9 && (v - 3.0).abs() < 1e-9);

        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]).le(vec![1.0], -1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn feasibility_cases() {
        let mut lp = LinearProgram::new(1);
        lp.le(vec![1.0], 3.0).ge(vec![1.0], 1.0);
        let z = lp.feasible().unwrap().unwrap();
        assert!(z[0] >= 1.0 - 1e-9 && z[0] <= 3.0 + 1e-9);

        let mut lp = LinearProgram::new(1);
        lp.le(vec![1.0], 0.0).ge(vec![1.0], 1.0);
        assert_eq!(lp.feasible().unwrap(), None);

        let lp = LinearProgram::new(1);
        assert!(lp.feasible().unwrap().unwrap()[0] >= 0.0);
    }

    #[test]
    fn malformed_dimensions() {
        let mut lp = LinearProgram::new(2);
        lp.le(vec![1.0], 1.0);
        assert!(matches!(lp.solve(), Err(Error::Dimension { .. })));
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 2.0, 3.0]);
        assert!(lp.solve().is_err());
    }

    #[test]
    fn free_variables_and_equalities() {
        // maximize −x − y with x free, y ≥ −2, x + y = 1, x ≥ 3: value −1
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![-1.0, -1.0])
            .free(0)
            .lower_bound(1, Some(-2.0))
            .equal(vec![1.0, 1.0], 1.0)
            .ge(vec![1.0, 0.0], 3.0);
        let (z, v) = optimal(lp.solve().unwrap());
        assert!((v + 1.0).abs() < 1e-9);
        assert!(lp.max_violation(&z) < 1e-9);

        // min |x| style: maximize −t, t ≥ x, t ≥ −x, x = −5 with x free
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![0.0, -1.0])
            .free(0)
            .le(vec![1.0, -1.0], 0.0)
            .le(vec![-1.0, -1.0], 0.0)
            .equal(vec![1.0, 0.0], -5.0);
        let (z, v) = optimal(lp.solve().unwrap());
        assert!((z[0] + 5.0).abs() < 1e-9 && (v + 5.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 0.0])
            .equal(vec![1.0, 1.0], 1.0)
            .equal(vec![2.0, 2.0], 2.0);
        let (z, v) = optimal(lp.solve().unwrap());
        assert!((v - 1.0).abs() < 1e-9);
        assert!(lp.max_violation(&z) < 1e-9);
    }

    #[test]
    fn degenerate_beale_instance_terminates() {
        // Beale's example cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.maximize(vec![0.75, -150.0, 0.02, -6.0])
            .le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let (z, v) = optimal(lp.solve().unwrap());
        assert!((v - 0.05).abs() < 1e-9, "value {v}");
        assert!(lp.max_violation(&z) < 1e-9);
    }

    #[test]
    fn highly_degenerate_game_stays_feasible() {
        // one row per permutation of a 5×5 game; ties at ratio zero once led
        // the leaving rule onto a 3e-10 pivot and an infeasible "optimum"
        let m = [
            [0.0, 0.5366668239699388, 0.7128305572390046, -0.6078663053196264, 0.7142641162156678],
            [-0.678940093554921, 0.0, 0.07339875311043298, 0.2136467437983185, 0.8288673433523086],
            [0.26886606770055255, -0.7533390463946814, 0.0, 0.8590942141215256, 0.798480350853509],
            [0.0469750807122995, 0.3486118799423419, -0.5043135171546481, 0.0, 0.6216555455546557],
            [0.9042427138807736, 0.0012840582291280267, 0.6521764601948123, -0.08877915916447843, 0.0],
        ];
        let mut perms = vec![vec![]];
        for k in 0..5 {
            perms = perms
                .into_iter()
                .flat_map(|p: Vec<usize>| {
                    (0..=p.len()).map(move |pos| {
                        let mut q = p.clone();
                        q.insert(pos, k);
                        q
                    })
                })
                .collect();
        }
        let mut lp = LinearProgram::new(6);
        lp.maximize(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
            .free(5)
            .equal(vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.0], 1.0);
        for p in &perms {
            let mut row: Vec<f64> = (0..5).map(|i| m[i][p[i]]).collect();
            row.push(-1.0);
            lp.ge(row, 0.0);
        }
        let (z, v) = optimal(lp.solve().unwrap());
        assert!(lp.max_violation(&z) < 1e-9);
        assert!((v + 0.07559739542236597).abs() < 1e-9, "value {v}");
    }

    proptest! {
        #[test]
        fn box_constrained_optimum(
            boxes in proptest::collection::vec((-5.0f64..5.0, -3.0f64..3.0, 0.1f64..4.0), 1..6)
        ) {
            // maximize Σ c_k z_k over l_k ≤ z_k ≤ l_k + w_k: optimum picks the
            // upper end for positive c_k and the lower end otherwise
            let n = boxes.len();
            let mut lp = LinearProgram::new(n);
            lp.maximize(boxes.iter().map(|s| s.0).collect());
            for (k, &(_, l, w)) in boxes.iter().enumerate() {
                lp.lower_bound(k, Some(l));
                let mut row = vec![0.0; n];
                row[k] = 1.0;
                lp.le(row, l + w);
            }
            let analytic: f64 = boxes.iter().map(|&(c, l, w)| if c > 0.0 { c * (l + w) } else { c * l }).sum();
            let (z, v) = optimal(lp.solve().unwrap());
            prop_assert!((v - analytic).abs() < 1e-7);
            prop_assert!(lp.max_violation(&z) < 1e-7);
        }

        #[test]
        fn returned_points_are_feasible(
            rows in proptest::collection::vec(proptest::collection::vec(-3i32..=3, 3), 1..6),
            rhs in proptest::collection::vec(-2i32..=6, 6),
            obj in proptest::collection::vec(-3i32..=3, 3),
        ) {
            let mut lp = LinearProgram::new(3);
            lp.maximize(obj.iter().map(|&v| v as f64).collect());
            for (k, row) in rows.iter().enumerate() {
                lp.le(row.iter().map(|&v| v as f64).collect(), rhs[k] as f64);
            }
            lp.le(vec![1.0, 1.0, 1.0], 10.0);
            match lp.solve().unwrap() {
                LpOutcome::Optimal { solution, .. } => prop_assert!(lp.max_violation(&solution) < 1e-7),
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => prop_assert!(false, "sum bound makes the region compact"),
            }
        }
    }
}
