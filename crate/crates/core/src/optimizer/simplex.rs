//! Dense two-phase simplex for the weight problem
//!
//!   min  sum_j phi_j p_j
//!   s.t. sum_j p_j         = 1
//!        sum_j u_j p_j     <= 0
//!        sum_j f_i(u_j) p_j <= budget_i   (i = 1..k)
//!        p >= 0
//!
//! Rows are scaled to unit max magnitude before pivoting; duals are
//! recovered from the optimal basis by solving B^T y = c_B and verified
//! against every column, so the reported duality gap is a certificate.

use crate::constraints::ConstraintSet;

const PIVOT_TOL: f64 = 1e-11;
const RC_TOL: f64 = 1e-10;
const MAX_ITER: usize = 20_000;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub weights: Vec<f64>,
    pub value: f64,
    /// multiplier of the mean row, >= 0
    pub dual_mean: f64,
    /// multipliers of the budget rows, >= 0
    pub dual_items: Vec<f64>,
    /// |primal - dual| objective mismatch
    pub dual_gap: f64,
    /// worst dual-feasibility violation across columns
    pub dual_violation: f64,
}

/// Solves the weight LP. `None` means the constraints admit no weight
/// vector on the given atoms.
pub(crate) fn solve_weight_lp(
    phi: &[f64],
    atoms: &[f64],
    cs: &ConstraintSet,
) -> Option<LpSolution> {
    let m = atoms.len();
    assert_eq!(phi.len(), m);
    assert!(m >= 1);
    let k = cs.k();
    let n_ub = k + 1;
    let n_rows = n_ub + 1; // ub rows then the simplex equality row

    // Constraint rows and per-row scale factors.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_ub);
    let mut rhs: Vec<f64> = Vec::with_capacity(n_ub);
    let mut scales: Vec<f64> = Vec::with_capacity(n_ub);
    {
        let mean_row: Vec<f64> = atoms.to_vec();
        rows.push(mean_row);
        rhs.push(0.0);
    }
    for (f, budget) in cs.items() {
        rows.push(atoms.iter().map(|&u| f.evaluate(u)).collect());
        rhs.push(*budget);
    }
    for (row, b) in rows.iter_mut().zip(rhs.iter_mut()) {
        let s = row
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(b.abs())
            .max(1e-30);
        for v in row.iter_mut() {
            *v /= s;
        }
        *b /= s;
        scales.push(s);
    }

    // Columns: m weights, n_ub slacks, 1 artificial (equality row).
    let n_cols = m + n_ub + 1;
    let art_col = m + n_ub;
    // Tableau: n_rows x (n_cols + 1), last column is the rhs.
    let mut t = vec![vec![0.0f64; n_cols + 1]; n_rows];
    for r in 0..n_ub {
        for j in 0..m {
            t[r][j] = rows[r][j];
        }
        t[r][m + r] = 1.0;
        t[r][n_cols] = rhs[r];
    }
    for j in 0..m {
        t[n_ub][j] = 1.0;
    }
    t[n_ub][art_col] = 1.0;
    t[n_ub][n_cols] = 1.0;

    let mut basis: Vec<usize> = (0..n_ub).map(|r| m + r).collect();
    basis.push(art_col);

    // Phase 1: drive the artificial out.
    let mut cost1 = vec![0.0f64; n_cols];
    cost1[art_col] = 1.0;
    let mut z = price_out(&t, &basis, &cost1);
    if !run_simplex(&mut t, &mut z, &mut basis, n_cols, None) {
        return None;
    }
    let phase1_obj = -z[n_cols];
    if phase1_obj > 1e-9 {
        return None; // equality row unreachable: infeasible
    }
    if let Some(r) = basis.iter().position(|&b| b == art_col) {
        // Degenerate: artificial basic at zero level; pivot it out on any
        // eligible column so phase 2 can forbid it.
        let mut pivoted = false;
        for j in 0..m + n_ub {
            if t[r][j].abs() > PIVOT_TOL {
                pivot_full(&mut t, &mut z, &mut basis, r, j, n_cols);
                pivoted = true;
                break;
            }
        }
        if !pivoted {
            // Whole row is zero: the equality row became redundant, which
            // cannot happen with the all-ones row. Treat as infeasible.
            return None;
        }
    }

    // Phase 2 with the real objective; the artificial may not re-enter.
    let mut cost2 = vec![0.0f64; n_cols];
    cost2[..m].copy_from_slice(phi);
    let mut z = price_out(&t, &basis, &cost2);
    if !run_simplex(&mut t, &mut z, &mut basis, n_cols, Some(art_col)) {
        return None;
    }

    let mut weights = vec![0.0f64; m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            weights[b] = t[r][n_cols].max(0.0);
        }
    }
    let value: f64 = weights.iter().zip(phi).map(|(w, c)| w * c).sum();

    // Duals: solve B^T y = c_B on the scaled system.
    let (dual_mean, dual_items, dual_obj, dual_violation) =
        match basis_duals(&basis, &cost2, atoms, cs, &scales, m, n_ub) {
            Some(v) => v,
            None => (0.0, vec![0.0; k], f64::NEG_INFINITY, f64::INFINITY),
        };
    let dual_gap = if dual_obj.is_finite() {
        (value - dual_obj).abs()
    } else {
        f64::INFINITY
    };

    Some(LpSolution {
        weights,
        value,
        dual_mean,
        dual_items,
        dual_gap,
        dual_violation,
    })
}

/// Reduced-cost row for the given basis and cost vector.
fn price_out(t: &[Vec<f64>], basis: &[usize], cost: &[f64]) -> Vec<f64> {
    let n_cols = cost.len();
    let mut z = vec![0.0f64; n_cols + 1];
    z[..n_cols].copy_from_slice(cost);
    for (r, &b) in basis.iter().enumerate() {
        let cb = cost[b];
        if cb != 0.0 {
            for j in 0..=n_cols {
                z[j] -= cb * t[r][j];
            }
        }
    }
    z
}

/// Dantzig pricing with a permanent switch to Bland's rule after a run of
/// degenerate pivots; returns false only on iteration exhaustion or
/// unboundedness (which cannot occur on the simplex-constrained feasible
/// set, so it is treated as failure).
fn run_simplex(
    t: &mut [Vec<f64>],
    z: &mut [f64],
    basis: &mut [usize],
    n_cols: usize,
    forbidden: Option<usize>,
) -> bool {
    let n_rows = t.len();
    let mut degenerate_streak = 0usize;
    let mut bland = false;
    for _ in 0..MAX_ITER {
        // entering column
        let mut enter = None;
        if bland {
            for j in 0..n_cols {
                if Some(j) == forbidden {
                    continue;
                }
                if z[j] < -RC_TOL {
                    enter = Some(j);
                    break;
                }
            }
        } else {
            let mut best = -RC_TOL;
            for j in 0..n_cols {
                if Some(j) == forbidden {
                    continue;
                }
                if z[j] < best {
                    best = z[j];
                    enter = Some(j);
                }
            }
        }
        let Some(jc) = enter else {
            return true; // optimal
        };
        // leaving row: min ratio, Bland tie-break on basis index
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n_rows {
            let a = t[r][jc];
            if a > PIVOT_TOL {
                let ratio = t[r][n_cols] / a;
                match leave {
                    None => leave = Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-12
                            || ((ratio - lratio).abs() <= 1e-12 && basis[r] < basis[lr])
                        {
                            leave = Some((r, ratio));
                        }
                    }
                }
            }
        }
        let Some((rr, ratio)) = leave else {
            return false; // unbounded; impossible on the simplex
        };
        if ratio.abs() <= 1e-13 {
            degenerate_streak += 1;
            if degenerate_streak > 64 {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
        }
        pivot_full(t, z, basis, rr, jc, n_cols);
    }
    false
}

fn pivot_full(
    t: &mut [Vec<f64>],
    z: &mut [f64],
    basis: &mut [usize],
    r: usize,
    jc: usize,
    n_cols: usize,
) {
    let piv = t[r][jc];
    for v in t[r].iter_mut() {
        *v /= piv;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let factor = row[jc];
            if factor != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
    }
    let zf = z[jc];
    if zf != 0.0 {
        for (v, p) in z.iter_mut().zip(&pivot_row).take(n_cols + 1) {
            *v -= zf * p;
        }
    }
    basis[r] = jc;
}

/// Solves B^T y = c_B on the scaled system, unscales the row multipliers,
/// and returns (lambda_mean, lambda_items, dual objective, worst violation).
#[allow(clippy::too_many_arguments)]
fn basis_duals(
    basis: &[usize],
    cost: &[f64],
    atoms: &[f64],
    cs: &ConstraintSet,
    scales: &[f64],
    m: usize,
    n_ub: usize,
) -> Option<(f64, Vec<f64>, f64, f64)> {
    let n_rows = n_ub + 1;
    // Rebuild the scaled constraint columns of the basis.
    let column = |j: usize| -> Vec<f64> {
        let mut col = vec![0.0f64; n_rows];
        if j < m {
            col[0] = atoms[j] / scales[0];
            for (i, (f, _)) in cs.items().iter().enumerate() {
                col[i + 1] = f.evaluate(atoms[j]) / scales[i + 1];
            }
            col[n_ub] = 1.0;
        } else if j < m + n_ub {
            col[j - m] = 1.0;
        } else {
            col[n_ub] = 1.0;
        }
        col
    };
    // Dense B^T with Gaussian elimination (n_rows <= k+2, tiny).
    let mut a = vec![vec![0.0f64; n_rows + 1]; n_rows];
    for (idx, &b) in basis.iter().enumerate() {
        let col = column(b);
        for r in 0..n_rows {
            a[idx][r] = col[r];
        }
        a[idx][n_rows] = cost[b];
    }
    for p in 0..n_rows {
        let (mut best, mut bestv) = (p, a[p][p].abs());
        for r in p + 1..n_rows {
            if a[r][p].abs() > bestv {
                best = r;
                bestv = a[r][p].abs();
            }
        }
        if bestv < 1e-13 {
            return None;
        }
        a.swap(p, best);
        for r in 0..n_rows {
            if r != p && a[r][p] != 0.0 {
                let f = a[r][p] / a[p][p];
                for c in p..=n_rows {
                    a[r][c] -= f * a[p][c];
                }
            }
        }
    }
    let y: Vec<f64> = (0..n_rows).map(|r| a[r][n_rows] / a[r][r]).collect();

    // Dual objective: y_eq * 1 + sum_r y_r * rhs_r on the scaled system
    // (the mean row has zero rhs).
    let mut dual_obj = y[n_ub];
    for (i, (_, budget)) in cs.items().iter().enumerate() {
        dual_obj += y[i + 1] * (budget / scales[i + 1]);
    }
    // Dual feasibility check across every real column (the artificial is
    // not part of the problem; the equality dual is free).
    let mut violation = 0.0f64;
    for j in 0..m + n_ub {
        let col = column(j);
        let ya: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
        violation = violation.max(ya - cost[j]);
    }
    // Unscaled multipliers; slack duals are <= 0, so negate.
    let lambda_mean = (-y[0] / scales[0]).max(0.0);
    let lambda_items: Vec<f64> = (0..cs.k()).map(|i| (-y[i + 1] / scales[i + 1]).max(0.0)).collect();
    Some((lambda_mean, lambda_items, dual_obj, violation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintFunction;

    fn square_set(budget: f64) -> ConstraintSet {
        ConstraintSet::new(1.0, vec![(ConstraintFunction::Square, budget)]).unwrap()
    }

    #[test]
    fn single_feasible_atom() {
        let cs = square_set(1.0);
        let sol = solve_weight_lp(&[0.42], &[0.0], &cs).unwrap();
        assert!((sol.weights[0] - 1.0).abs() < 1e-12);
        assert!((sol.value - 0.42).abs() < 1e-12);
        assert!(sol.dual_gap < 1e-9);
    }

    #[test]
    fn mean_constraint_pushes_mass_left() {
        // atoms {-1, 1}, phi increasing: all weight must sit at -1.
        let cs = ConstraintSet::new(1.0, vec![(ConstraintFunction::PositivePart, 0.0)]).unwrap();
        let sol = solve_weight_lp(&[0.2, 0.8], &[-1.0, 1.0], &cs).unwrap();
        assert!((sol.weights[0] - 1.0).abs() < 1e-12);
        assert!(sol.weights[1].abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        // single atom at +1 with a mean row <= 0: no weights work.
        let cs = square_set(1.0);
        assert!(solve_weight_lp(&[0.5], &[1.0], &cs).is_none());
    }

    #[test]
    fn matches_vertex_enumeration_three_atoms() {
        // atoms {-2, 0, 3}, Square budget 1: brute-force all basic feasible
        // solutions of the 3-variable LP and compare.
        let cs = square_set(1.0);
        let atoms = [-2.0, 0.0, 3.0];
        let phi = [0.9, 0.5, 0.1];
        let sol = solve_weight_lp(&phi, &atoms, &cs).unwrap();

        // Vertices: intersect subsets of active constraints on the simplex.
        let mut best = f64::INFINITY;
        let n = 200_000;
        // dense rational scan over the 2-simplex is a blunt but independent
        // oracle at this size
        let steps = 700;
        let mut checked = 0usize;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let p = [
                    i as f64 / steps as f64,
                    j as f64 / steps as f64,
                    (steps - i - j) as f64 / steps as f64,
                ];
                let mean: f64 = p.iter().zip(&atoms).map(|(w, a)| w * a).sum();
                let sq: f64 = p.iter().zip(&atoms).map(|(w, a)| w * a * a).sum();
                if mean <= 1e-9 && sq <= 1.0 + 1e-9 {
                    let v: f64 = p.iter().zip(&phi).map(|(w, c)| w * c).sum();
                    best = best.min(v);
                    checked += 1;
                }
            }
        }
        let _ = n;
        assert!(checked > 0);
        assert!(sol.value <= best + 1e-3, "lp {} scan {}", sol.value, best);
        assert!(sol.value >= best - 2e-3);
        assert!(sol.dual_gap < 1e-9);
        assert!(sol.dual_violation < 1e-9);
    }

    #[test]
    fn duals_certify_lagrangian_bound() {
        let cs = square_set(2.0);
        let atoms: Vec<f64> = (-20..=20).map(|i| 0.25 * i as f64).collect();
        let phi: Vec<f64> = atoms.iter().map(|u| 1.0 / (1.0 + (-u).exp())).collect();
        let sol = solve_weight_lp(&phi, &atoms, &cs).unwrap();
        assert!(sol.dual_gap < 1e-9);
        assert!(sol.dual_violation < 1e-9);
        // Lagrangian h(u) = phi + l0 u + l1 u^2 must clear
        // value + sum_i lambda_i budget_i at every atom.
        let floor = sol.value + sol.dual_items[0] * 2.0 - 1e-8;
        for (u, p) in atoms.iter().zip(&phi) {
            let h = p + sol.dual_mean * u + sol.dual_items[0] * u * u;
            assert!(h >= floor, "h({u}) = {h} < {floor}");
        }
    }

    #[test]
    fn zero_budget_forces_support() {
        // PositivePart with zero budget: weight only on atoms <= 0.
        let cs = ConstraintSet::new(1.0, vec![(ConstraintFunction::PositivePart, 0.0)]).unwrap();
        let atoms = [-3.0, -1.0, 0.5, 2.0];
        let phi = [0.8, 0.6, 0.3, 0.1];
        let sol = solve_weight_lp(&phi, &atoms, &cs).unwrap();
        assert!(sol.weights[2] < 1e-12 && sol.weights[3] < 1e-12);
        // best feasible: mass at -1 (phi 0.6) vs -3 (0.8): choose -1
        assert!((sol.weights[1] - 1.0).abs() < 1e-10);
    }
}
