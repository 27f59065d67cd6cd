//! Afriat certificates, the Afriat utility function, and the Afriat
//! efficiency index.

use crate::consistency::{check_cyclical_consistency, ConsistencyVerdict, Cycle};
use crate::error::{input, Error, Result};
use crate::lp::{LinearProgram, LpOutcome, LpTolerances};
use crate::model::{dot, DemandDataset, RMatrix, Sign, SignTolerance};

/// Utility levels `v` and multipliers `λ > 0` with `v_j − v_i ≤ λ_i R_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub v: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl Certificate {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// `(t·v, t·λ)`; certificates are homogeneous of degree one.
    pub fn scaled(&self, t: f64) -> Certificate {
        Certificate {
            v: self.v.iter().map(|x| x * t).collect(),
            lambda: self.lambda.iter().map(|x| x * t).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateOutcome {
    Found(Certificate),
    /// Not rationalizable; the cycle is the consistency witness.
    Infeasible(Cycle),
}

/// Solves the Afriat inequalities with `λ_i ≥ 1`, minimizing `Σ λ_i`.
///
/// Entries inside the tolerance band are treated as exact zeros, matching the
/// graph test. The returned levels are shifted so that `max v = 0`.
pub fn find_certificate(r: &RMatrix, tol: SignTolerance) -> Result<CertificateOutcome> {
    if let ConsistencyVerdict::Violation(cycle) = check_cyclical_consistency(r, tol) {
        return Ok(CertificateOutcome::Infeasible(cycle));
    }
    let n = r.size();
    let snapped = r.snapped(tol);
    // variables: v_0..v_{n-1} (free), λ_0..λ_{n-1} (≥ 1)
    let mut lp = LinearProgram::new(2 * n);
    let mut objective = vec![0.0; 2 * n];
    for i in 0..n {
        lp.free(i);
        lp.lower_bound(n + i, Some(1.0));
        objective[n + i] = -1.0;
    }
    lp.maximize(objective);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut row = vec![0.0; 2 * n];
            row[j] += 1.0;
            row[i] -= 1.0;
            row[n + i] = -snapped[(i, j)];
            lp.le(row, 0.0);
        }
    }
    let solution = match lp.solve()? {
        LpOutcome::Optimal { solution, .. } => solution,
        other => {
            return Err(Error::Internal(format!(
                "consistent matrix but certificate LP returned {other:?}"
            )))
        }
    };
    let top = solution[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cert = Certificate {
        v: solution[..n].iter().map(|x| x - top).collect(),
        lambda: solution[n..].to_vec(),
    };
    if !verify_certificate(r, &cert, tol) {
        return Err(Error::Internal("certificate LP solution failed verification".into()));
    }
    Ok(CertificateOutcome::Found(cert))
}

/// Checks `v_j − v_i ≤ λ_i R_ij` (within the LP feasibility tolerance) and
/// the sign implications `R_ij ≤ 0 ⇒ v_j ≤ v_i` and `R_ij < 0 ⇒ v_j < v_i`.
pub fn verify_certificate(r: &RMatrix, cert: &Certificate, tol: SignTolerance) -> bool {
    let n = r.size();
    if cert.v.len() != n || cert.lambda.len() != n {
        return false;
    }
    if cert.lambda.iter().any(|&l| !(l > 0.0)) || cert.v.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let feas = LpTolerances::DEFAULT_FEAS;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let diff = cert.v[j] - cert.v[i];
            if diff > cert.lambda[i] * r[(i, j)] + feas {
                return false;
            }
            match tol.classify(r[(i, j)]) {
                Sign::Negative if diff >= 0.0 => return false,
                Sign::Zero if diff > tol.value() => return false,
                _ => {}
            }
        }
    }
    true
}

/// `v(x) = min_i { v_i + λ_i p_i·(x − x_i) }`, concave, monotone, and equal to
/// `v_j` at every observed bundle when the certificate is valid.
pub fn afriat_utility(ds: &DemandDataset, cert: &Certificate, x: &[f64]) -> Result<f64> {
    let n = ds.observations();
    if cert.len() != n || cert.lambda.len() != n {
        return Err(Error::Dimension { expected: n, got: cert.len() });
    }
    if x.len() != ds.goods() {
        return Err(Error::Dimension { expected: ds.goods(), got: x.len() });
    }
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return input("bundle must be finite and nonnegative");
    }
    Ok((0..n)
        .map(|i| cert.v[i] + cert.lambda[i] * (dot(ds.price(i), x) - ds.expenditure(i)))
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyIndexResult {
    pub e: f64,
    /// Pair `(i, j)` whose perturbed entry reaches zero at `e`.
    pub breakpoint: Option<(usize, usize)>,
    /// Whether the perturbed matrix is consistent at `e` itself. When it is
    /// not, consistency holds on `[0, e)` and `e` is a supremum.
    pub attained: bool,
}

/// Supremum of the `e ∈ [0, 1]` for which `R_ij + (1 − e) b_i` is cyclically
/// consistent. Consistency only fails more as `e` grows and the sign pattern
/// changes only at the breakpoints `1 + R_ij / b_i`, so it suffices to probe
/// every breakpoint and one point strictly between each neighbouring pair.
pub fn afriat_efficiency_index(r: &RMatrix, b: &[f64], tol: SignTolerance) -> Result<EfficiencyIndexResult> {
    let n = r.size();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len() });
    }
    if let Some(i) = b.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        return input(format!("b[{}] must be positive", i + 1));
    }

    let mut candidates: Vec<(f64, Option<(usize, usize)>)> = vec![(0.0, None), (1.0, None)];
    for i in 0..n {
        for j in 0..n {
            let e = 1.0 + r[(i, j)] / b[i];
            if i != j && (0.0..=1.0).contains(&e) {
                candidates.push((e, Some((i, j))));
            }
        }
    }
    // pairs sort ahead of the plain endpoints at equal e
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.is_some().cmp(&a.1.is_some())));
    candidates.dedup_by(|later, earlier| later.0 == earlier.0);

    // even positions are breakpoints, odd positions midpoints between them
    let probe = |k: usize| {
        if k.is_multiple_of(2) {
            candidates[k / 2].0
        } else {
            0.5 * (candidates[k / 2].0 + candidates[k / 2 + 1].0)
        }
    };
    let consistent = |e: f64| {
        let shift: Vec<f64> = b.iter().map(|bi| (1.0 - e) * bi).collect();
        check_cyclical_consistency(&r.shift_rows(&shift), tol).is_consistent()
    };

    let last = 2 * (candidates.len() - 1);
    if consistent(1.0) {
        return Ok(EfficiencyIndexResult { e: 1.0, breakpoint: None, attained: true });
    }
    if !consistent(0.0) {
        return input("R + b is not cyclically consistent, no efficiency level in [0, 1]");
    }
    // invariant: probe(lo) consistent, probe(hi) not
    let (mut lo, mut hi) = (0, last);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if consistent(probe(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let attained = lo % 2 == 0;
    let (e, breakpoint) = if attained { candidates[lo / 2] } else { candidates[hi / 2] };
    Ok(EfficiencyIndexResult { e, breakpoint, attained })
}

/// Afriat's original normalization `b_i = p_i·x_i`.
pub fn demand_efficiency_index(ds: &DemandDataset, tol: SignTolerance) -> Result<EfficiencyIndexResult> {
    let b: Vec<f64> = (0..ds.observations()).map(|i| ds.expenditure(i)).collect();
    afriat_efficiency_index(&ds.r_matrix(), &b, tol)
}

pub fn rationalizable(r: &RMatrix, tol: SignTolerance) -> bool {
    check_cyclical_consistency(r, tol).is_consistent()
}
