//! Extreme-point minimization over moment-constrained discrete
//! distributions: exact inner LP over weights on a fixed support, outer
//! multistart coordinate descent on atom locations, seeded from a dense
//! grid LP whose duals also supply a Lagrangian lower-bound proxy.

mod simplex;

use rand::RngCore;
use rayon::prelude::*;

use crate::channel::{phi_n_gamma, ChannelSpec};
use crate::constraints::{
    check_membership_s, check_membership_u, negative_support_bound, support_bound,
    ConstraintFunction, ConstraintSet, DiscreteDistribution,
};
use crate::error::{Error, Result};
use crate::specfn::{std_normal_cdf, RngStream};
use simplex::solve_weight_lp;

/// Pointwise objective phi: R -> [0, 1] evaluated on atom locations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    /// phi(u) = Phi(shift - kappa2 u); the rate offset is pre-folded into
    /// `shift`.
    Asymptotic { shift: f64, kappa2: f64 },
    /// phi(u) = phi_{n, gamma}(Gamma + u / sqrt(n)), the finite-n converse
    /// kernel re-parametrized to deviation space (u >= -Gamma sqrt(n)).
    FiniteN {
        ch: ChannelSpec,
        n: u64,
        gamma_thresh: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec {
    kind: ObjectiveKind,
}

impl ObjectiveSpec {
    /// Theorem-style objective Phi(r/sqrt(V) - C' u / sqrt(V)).
    pub fn asymptotic(ch: &ChannelSpec, r: f64) -> Self {
        let v = ch.dispersion();
        Self {
            kind: ObjectiveKind::Asymptotic {
                shift: r / v.sqrt(),
                kappa2: ch.capacity_derivative() / v.sqrt(),
            },
        }
    }

    /// Raw shift/slope form, used e.g. by the reparametrized cross-check
    /// where the slope is -1.
    pub fn asymptotic_raw(shift: f64, kappa2: f64) -> Self {
        Self {
            kind: ObjectiveKind::Asymptotic { shift, kappa2 },
        }
    }

    pub fn finite_n(ch: &ChannelSpec, n: u64, gamma_thresh: f64) -> Result<Self> {
        if !(gamma_thresh > 0.0) {
            return Err(Error::param("gamma_thresh", gamma_thresh, "gamma > 0"));
        }
        if n < 1 {
            return Err(Error::param("n", n as f64, "n >= 1"));
        }
        Ok(Self {
            kind: ObjectiveKind::FiniteN {
                ch: *ch,
                n,
                gamma_thresh,
            },
        })
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    /// phi(u), always in [0, 1].
    pub fn phi(&self, u: f64) -> f64 {
        match self.kind {
            ObjectiveKind::Asymptotic { shift, kappa2 } => std_normal_cdf(shift - kappa2 * u),
            ObjectiveKind::FiniteN {
                ref ch,
                n,
                gamma_thresh,
            } => {
                let s = (ch.cost_threshold() + u / (n as f64).sqrt()).max(0.0);
                phi_n_gamma(ch, n, gamma_thresh, s)
            }
        }
    }

    /// Hard lower bound on atoms (cost nonnegativity for the finite-n
    /// kernel), if any.
    fn hard_lower_bound(&self) -> f64 {
        match self.kind {
            ObjectiveKind::Asymptotic { .. } => f64::NEG_INFINITY,
            ObjectiveKind::FiniteN { ref ch, n, .. } => -ch.cost_threshold() * (n as f64).sqrt(),
        }
    }
}

/// Outer-search knobs. Defaults reproduce every documented result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// seeded restarts of the atom polish (restart 0 is the grid seed)
    pub restarts: usize,
    /// outer convergence threshold on the value improvement per sweep
    pub value_tol: f64,
    /// weight below which an atom is considered absent when bounding support
    pub weight_floor: f64,
    /// points in the dense center grid
    pub grid_points: usize,
    /// coordinate-descent sweeps per restart
    pub max_sweeps: usize,
    /// default magnitude of the lower truncation when no two-sided budget
    /// bounds it (mass parked there only buys mean leverage)
    pub leverage_bound: f64,
    /// seed for restart perturbations
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            value_tol: 1e-11,
            weight_floor: 1e-6,
            grid_points: 1201,
            max_sweeps: 24,
            leverage_bound: 1e4,
            seed: 0x5eed_cafe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerStatus {
    Converged,
    IterationCap,
    Infeasible,
}

/// Outcome of a distribution minimization.
#[derive(Debug, Clone)]
pub struct OptimizerResult {
    /// minimizing distribution (U-space for asymptotic runs, S-space for
    /// finite-n converse runs)
    pub distribution: DiscreteDistribution,
    /// certified upper bound on the infimum, in [0, 1]
    pub value: f64,
    pub status: OptimizerStatus,
    pub restarts_used: usize,
    /// value minus the grid-dual Lagrangian lower-bound proxy
    pub certificate_gap: f64,
    /// best value found by each restart, in restart order
    pub restart_values: Vec<f64>,
}

/// Exact solve of the fixed-support weight problem.
///
/// Minimizes sum_j p_j phi_j over the simplex subject to the mean and
/// budget rows; the LP duality gap of the returned solution is certified
/// below 1e-9.
pub fn inner_weight_lp(
    atoms: &[f64],
    cs: &ConstraintSet,
    phi_values: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if atoms.is_empty() || atoms.len() != phi_values.len() {
        return Err(Error::param(
            "atoms",
            atoms.len() as f64,
            "non-empty atoms matching phi_values",
        ));
    }
    for (i, a) in atoms.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::param("atom", *a, "finite"));
        }
        if atoms[..i].contains(a) {
            return Err(Error::param("atom", *a, "distinct atoms"));
        }
    }
    match solve_weight_lp(phi_values, atoms, cs) {
        Some(sol) => {
            debug_assert!(sol.dual_gap < 1e-9, "duality gap {}", sol.dual_gap);
            Ok((sol.weights, sol.value))
        }
        None => Err(Error::Infeasible(
            "no weight vector satisfies the moment rows on this support".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// grid construction
// ---------------------------------------------------------------------------

fn push_clipped(points: &mut Vec<f64>, u: f64, lo: f64, hi: f64) {
    if u.is_finite() && u >= lo && u <= hi {
        points.push(u);
    }
}

/// Probe ladder resolving all magnitudes in [lo, hi] on both sides of zero.
fn probe_points(lo: f64, hi: f64) -> Vec<f64> {
    let span = lo.abs().max(hi.abs()).max(1.0);
    let mut pts = Vec::with_capacity(1100);
    pts.push(0.0);
    pts.push(lo);
    pts.push(hi);
    let steps = 520;
    for i in 0..=steps {
        let mag = span * 10f64.powf(-8.0 + 8.0 * i as f64 / steps as f64);
        push_clipped(&mut pts, mag, lo, hi);
        push_clipped(&mut pts, -mag, lo, hi);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// [a, b] outside of which phi is flat to 1e-12, padded by 15%.
fn active_window(obj: &ObjectiveSpec, lo: f64, hi: f64) -> (f64, f64) {
    let probes = probe_points(lo, hi);
    let phis: Vec<f64> = probes.iter().map(|&u| obj.phi(u)).collect();
    let first = phis[0];
    let last = *phis.last().unwrap();
    let mut a = lo;
    let mut b = hi;
    if let Some(i) = phis.iter().position(|p| (p - first).abs() > 1e-12) {
        a = probes[i.saturating_sub(1)];
    }
    if let Some(i) = phis.iter().rposition(|p| (p - last).abs() > 1e-12) {
        b = probes[(i + 1).min(probes.len() - 1)];
    }
    if !(a < b) {
        return (lo, hi);
    }
    let w = b - a;
    ((a - 0.15 * w).max(lo), (b + 0.15 * w).min(hi))
}

/// Geometric ramp from `from` toward `to`, dense near `from`.
fn tail_points(points: &mut Vec<f64>, from: f64, to: f64, n: usize) {
    if (to - from).abs() < 1e-300 {
        return;
    }
    let r: f64 = 1.16;
    let denom = r.powi(n as i32) - 1.0;
    for i in 1..=n {
        points.push(from + (to - from) * (r.powi(i as i32) - 1.0) / denom);
    }
}

fn build_grid(
    obj: &ObjectiveSpec,
    cs: &ConstraintSet,
    lo: f64,
    hi: f64,
    center_points: usize,
    tails: usize,
) -> Vec<f64> {
    let (a, b) = active_window(obj, lo, hi);
    let mut pts = Vec::with_capacity(center_points + 2 * tails + 16);
    for i in 0..center_points {
        pts.push(a + (b - a) * i as f64 / (center_points - 1).max(1) as f64);
    }
    tail_points(&mut pts, b, hi, tails);
    tail_points(&mut pts, a, lo, tails);
    push_clipped(&mut pts, 0.0, lo, hi);
    pts.push(lo);
    pts.push(hi);
    for (f, _) in cs.items() {
        match *f {
            ConstraintFunction::StepIndicator { threshold } => {
                push_clipped(&mut pts, threshold, lo, hi);
                push_clipped(&mut pts, threshold + 1e-9, lo, hi);
            }
            ConstraintFunction::SmoothedStep { threshold, slope } => {
                push_clipped(&mut pts, threshold, lo, hi);
                push_clipped(&mut pts, threshold + 1e-9, lo, hi);
                // natural atom scale of the near-step optimum
                push_clipped(&mut pts, threshold + 1.0 / slope.sqrt(), lo, hi);
            }
            _ => {}
        }
    }
    pts.sort_by(f64::total_cmp);
    let min_gap = (hi - lo).abs() * 1e-14 + 1e-300;
    pts.dedup_by(|x, y| (*x - *y).abs() < min_gap);
    pts
}

// ---------------------------------------------------------------------------
// polish
// ---------------------------------------------------------------------------

struct Polished {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    value: f64,
    converged: bool,
}

fn dedup_atoms(atoms: &[f64], scale: f64) -> Vec<f64> {
    let mut sorted = atoms.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup_by(|x, y| (*x - *y).abs() < 1e-13 * scale + 1e-300);
    sorted
}

fn eval_support(
    atoms: &[f64],
    obj: &ObjectiveSpec,
    cs: &ConstraintSet,
    scale: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let support = dedup_atoms(atoms, scale);
    let phis: Vec<f64> = support.iter().map(|&u| obj.phi(u)).collect();
    let sol = solve_weight_lp(&phis, &support, cs)?;
    Some((support, sol.weights, sol.value))
}

/// Golden-section descent of one coordinate with expanding brackets.
#[allow(clippy::too_many_arguments)]
fn line_search(
    atoms: &mut [f64],
    idx: usize,
    obj: &ObjectiveSpec,
    cs: &ConstraintSet,
    lo: f64,
    hi: f64,
    scale: f64,
    current: f64,
) -> Option<f64> {
    let x0 = atoms[idx];
    let eval1 = |x: f64, atoms: &mut [f64]| -> f64 {
        atoms[idx] = x;
        let v = eval_support(atoms, obj, cs, scale)
            .map(|(_, _, v)| v)
            .unwrap_or(f64::INFINITY);
        v
    };
    let mut step = (hi - lo).min(scale) / 24.0;
    let mut best = (x0, current);
    for _expansion in 0..14 {
        let a = (best.0 - step).max(lo);
        let b = (best.0 + step).min(hi);
        // golden section on [a, b]
        const GOLD: f64 = 0.618_033_988_749_894_9;
        let (mut ga, mut gb) = (a, b);
        let mut x1 = gb - GOLD * (gb - ga);
        let mut x2 = ga + GOLD * (gb - ga);
        let mut f1 = eval1(x1, atoms);
        let mut f2 = eval1(x2, atoms);
        for _ in 0..48 {
            if gb - ga < 1e-13 * scale {
                break;
            }
            if f1 <= f2 {
                gb = x2;
                x2 = x1;
                f2 = f1;
                x1 = gb - GOLD * (gb - ga);
                f1 = eval1(x1, atoms);
            } else {
                ga = x1;
                x1 = x2;
                f1 = f2;
                x2 = ga + GOLD * (gb - ga);
                f2 = eval1(x2, atoms);
            }
        }
        let (cand_x, cand_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        let edge_a = eval1(a, atoms);
        let edge_b = eval1(b, atoms);
        let mut local = best;
        for (x, f) in [(cand_x, cand_f), (a, edge_a), (b, edge_b)] {
            if f < local.1 {
                local = (x, f);
            }
        }
        let at_edge = (local.0 - a).abs() < 1e-13 * scale || (local.0 - b).abs() < 1e-13 * scale;
        if local.1 < best.1 - 1e-15 {
            best = local;
        }
        if at_edge && (a > lo || b < hi) {
            step *= 4.0;
        } else {
            break;
        }
    }
    atoms[idx] = best.0;
    if best.1 < current - 1e-15 {
        Some(best.1)
    } else {
        atoms[idx] = x0;
        None
    }
}

/// Pads the support with zero-weight helper atoms. Coordinate moves on a
/// bare k+2-atom support die when every moment row is tight (the weight
/// polytope degenerates to a point and any single-atom move is infeasible);
/// spare atoms keep slack mass available so the LP can rebalance.
fn pad_support(atoms: &mut Vec<f64>, target: usize, window: (f64, f64), lo: f64, hi: f64) {
    let mut cands = vec![
        0.0f64.clamp(lo, hi),
        window.0,
        window.1,
        0.5 * (window.0 + window.1),
        0.25 * window.0 + 0.75 * window.1,
        0.75 * window.0 + 0.25 * window.1,
        lo,
        hi,
    ];
    cands.retain(|c| c.is_finite());
    let gap = (hi - lo).abs() * 1e-12 + 1e-300;
    for c in cands {
        if atoms.len() >= target {
            break;
        }
        if atoms.iter().all(|a| (a - c).abs() > gap) {
            atoms.push(c);
        }
    }
}

fn polish(
    seed_atoms: Vec<f64>,
    obj: &ObjectiveSpec,
    cs: &ConstraintSet,
    lo: f64,
    hi: f64,
    opts: &SearchOptions,
) -> Option<Polished> {
    let scale = (hi - lo).abs().max(1.0);
    let coarse = build_grid(obj, cs, lo, hi, 161, 16);
    let window = active_window(obj, lo, hi);
    let target = cs.atom_cap() + 2;
    let mut padded = seed_atoms;
    let pad_target = target.max(padded.len());
    pad_support(&mut padded, pad_target, window, lo, hi);
    let (mut atoms, mut weights, mut value) = eval_support(&padded, obj, cs, scale)?;
    let mut converged = false;
    for global_pass in 0..4 {
        for _sweep in 0..opts.max_sweeps {
            let before = value;
            let start_atoms = atoms.clone();
            for idx in 0..atoms.len() {
                let mut work = atoms.clone();
                if let Some(v) = line_search(&mut work, idx, obj, cs, lo, hi, scale, value) {
                    if let Some((a, w, v2)) = eval_support(&work, obj, cs, scale) {
                        debug_assert!(v2 <= v + 1e-12);
                        atoms = a;
                        weights = w;
                        value = v2;
                    }
                }
            }
            // Pattern move along the sweep displacement; breaks the zigzag
            // stall of pure coordinate descent in curved valleys.
            if atoms.len() == start_atoms.len() {
                let delta: Vec<f64> = atoms
                    .iter()
                    .zip(&start_atoms)
                    .map(|(a, s)| a - s)
                    .collect();
                if delta.iter().any(|d| d.abs() > 1e-14 * scale) {
                    for _ in 0..24 {
                        let mut improved = false;
                        for c in [0.5, 1.0, 2.0, 4.0] {
                            let cand: Vec<f64> = atoms
                                .iter()
                                .zip(&delta)
                                .map(|(a, d)| (a + c * d).clamp(lo, hi))
                                .collect();
                            if let Some((a, w, v)) = eval_support(&cand, obj, cs, scale) {
                                if v < value - 1e-14 {
                                    atoms = a;
                                    weights = w;
                                    value = v;
                                    improved = true;
                                    break;
                                }
                            }
                        }
                        if !improved {
                            break;
                        }
                    }
                }
            }
            // keep the support padded; only shed genuine excess
            if atoms.len() > target {
                let kept: Vec<f64> = atoms
                    .iter()
                    .zip(&weights)
                    .filter(|(_, &w)| w > 1e-12)
                    .map(|(&a, _)| a)
                    .collect();
                if kept.len() < atoms.len() && !kept.is_empty() {
                    if let Some((a, w, v)) = eval_support(&kept, obj, cs, scale) {
                        if v <= value + 1e-12 {
                            atoms = a;
                            weights = w;
                            value = v;
                        }
                    }
                }
            }
            if atoms.len() < target {
                pad_support(&mut atoms, target, window, lo, hi);
                if let Some((a, w, v)) = eval_support(&atoms, obj, cs, scale) {
                    atoms = a;
                    weights = w;
                    value = v;
                }
            }
            if before - value < opts.value_tol {
                converged = true;
                break;
            }
        }
        // Basin escape: offer each atom every coarse grid location; resume
        // descent only if that finds something strictly better.
        let mut jumped = false;
        for idx in 0..atoms.len() {
            let mut best_cand: Option<(f64, f64)> = None;
            for &cand in &coarse {
                let mut work = atoms.clone();
                work[idx] = cand;
                if let Some((_, _, v)) = eval_support(&work, obj, cs, scale) {
                    if v < value - opts.value_tol.max(1e-12)
                        && best_cand.map(|(_, bv)| v < bv).unwrap_or(true)
                    {
                        best_cand = Some((cand, v));
                    }
                }
            }
            if let Some((cand, _)) = best_cand {
                atoms[idx] = cand;
                if let Some((a, w, v)) = eval_support(&atoms, obj, cs, scale) {
                    atoms = a;
                    weights = w;
                    value = v;
                    jumped = true;
                }
            }
        }
        if !jumped {
            break;
        }
        converged = global_pass < 3;
    }
    Some(Polished {
        atoms,
        weights,
        value,
        converged,
    })
}

// ---------------------------------------------------------------------------
// top-level search
// ---------------------------------------------------------------------------

fn truncation_interval(
    obj: &ObjectiveSpec,
    cs: &ConstraintSet,
    opts: &SearchOptions,
) -> Result<(f64, f64)> {
    if !cs.condition2_holds() {
        return Err(Error::UnboundedSupport {
            hint: cs
                .items()
                .iter()
                .any(|(f, _)| matches!(f, ConstraintFunction::StepIndicator { .. })),
        });
    }
    let hi = support_bound(cs, opts.weight_floor)?;
    let neg = negative_support_bound(cs, opts.weight_floor);
    let mut lo = -neg.min(opts.leverage_bound.max(4.0 * (hi.abs() + 1.0)));
    lo = lo.max(obj.hard_lower_bound());
    if !(lo <= hi) {
        return Err(Error::Infeasible(format!(
            "empty truncated support interval [{lo}, {hi}]"
        )));
    }
    Ok((lo, hi))
}

/// Minimizes E_P[phi(U)] over feasible distributions with at most k + 2
/// atoms inside the truncated interval.
///
/// The returned value is a certified upper bound on the infimum (the
/// distribution is feasible and exactly priced); `certificate_gap` measures
/// it against the Lagrangian lower bound induced by the dense-grid LP
/// duals, which is exact for the interval-truncated problem and a proxy for
/// the untruncated one.
pub fn minimize_over_distributions(
    obj: &ObjectiveSpec,
    cs: &ConstraintSet,
    opts: &SearchOptions,
) -> Result<OptimizerResult> {
    let (lo, hi) = truncation_interval(obj, cs, opts)?;
    let scale = (hi - lo).abs().max(1.0);

    let grid = build_grid(obj, cs, lo, hi, opts.grid_points, 90);
    let phis: Vec<f64> = grid.iter().map(|&u| obj.phi(u)).collect();
    let grid_sol = solve_weight_lp(&phis, &grid, cs)
        .ok_or_else(|| Error::Infeasible("dense grid LP admits no feasible weights".into()))?;

    // Lagrangian lower bound from the grid duals on a finer evaluation grid.
    if grid_sol.dual_violation > 1e-6 || grid_sol.dual_gap > 1e-6 {
        log::warn!(
            "grid LP duals look unreliable (violation {:.2e}, gap {:.2e}); lower-bound proxy may be loose",
            grid_sol.dual_violation,
            grid_sol.dual_gap
        );
    }
    let lambda_mean = grid_sol.dual_mean;
    let lambda_items = grid_sol.dual_items.clone();
    let fine = build_grid(obj, cs, lo, hi, 4 * opts.grid_points, 240);
    let mut h_min = f64::INFINITY;
    for &u in &fine {
        let mut h = obj.phi(u) + lambda_mean * u;
        for ((f, _), l) in cs.items().iter().zip(&lambda_items) {
            h += l * f.evaluate(u);
        }
        h_min = h_min.min(h);
    }
    let budget_term: f64 = cs
        .items()
        .iter()
        .zip(&lambda_items)
        .map(|((_, b), l)| l * b)
        .sum();
    let lower_proxy = h_min - budget_term;

    // Seeds: active atoms of the grid solution.
    let mut seed: Vec<f64> = grid
        .iter()
        .zip(&grid_sol.weights)
        .filter(|(_, &w)| w > 1e-10)
        .map(|(&u, _)| u)
        .collect();
    if seed.is_empty() {
        seed.push(0.0f64.clamp(lo, hi));
    }

    let cap = cs.atom_cap();
    let window = active_window(obj, lo, hi);
    let coarse = build_grid(obj, cs, lo, hi, 41, 12);
    let restarts = opts.restarts.max(1);
    let candidates: Vec<Option<Polished>> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            // Every start keeps the (feasible) grid seed; extra atoms only
            // widen the support the inner LP may use.
            let mut atoms = seed.clone();
            match i {
                0 => {}
                _ if i == restarts - 1 && restarts > 2 => {
                    for j in 0..cap {
                        atoms
                            .push(window.0 + (window.1 - window.0) * (j as f64 + 0.5) / cap as f64);
                    }
                }
                _ => {
                    let mut rng = RngStream::new(opts.seed, i as u64);
                    let sigma =
                        (window.1 - window.0).abs().max(1e-6) / (40.0 * (1 + i % 4) as f64);
                    for u in atoms.iter_mut() {
                        *u = (*u + sigma * rng.standard_normal()).clamp(lo, hi);
                    }
                    for _ in 0..3 {
                        let pick = (rng.next_u64() % coarse.len() as u64) as usize;
                        atoms.push(coarse[pick]);
                    }
                }
            }
            polish(atoms, obj, cs, lo, hi, opts)
        })
        .collect();

    let restart_values: Vec<f64> = candidates
        .iter()
        .map(|c| c.as_ref().map(|p| p.value).unwrap_or(f64::INFINITY))
        .collect();
    if std::env::var_os("MPC_OPT_TRACE").is_some() {
        for (i, c) in candidates.iter().enumerate() {
            match c {
                Some(p) => eprintln!(
                    "restart {i}: value {:.12} atoms {:?} weights {:?}",
                    p.value, p.atoms, p.weights
                ),
                None => eprintln!("restart {i}: infeasible"),
            }
        }
    }
    let mut best: Option<&Polished> = None;
    for cand in candidates.iter().flatten() {
        best = match best {
            None => Some(cand),
            Some(b) => {
                let better = cand.value < b.value - 1e-12
                    || ((cand.value - b.value).abs() <= 1e-12
                        && (cand.atoms.len() < b.atoms.len()
                            || (cand.atoms.len() == b.atoms.len()
                                && cand.atoms.as_slice() < b.atoms.as_slice())));
                if better {
                    Some(cand)
                } else {
                    Some(b)
                }
            }
        };
    }
    let best = best.ok_or_else(|| Error::Infeasible("all restarts failed".into()))?;

    // Trim empty atoms, merge near-coincident ones, renormalize exactly.
    let window_width = (window.1 - window.0).abs().max(1e-12);
    let mut atoms: Vec<f64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for (&a, &w) in best.atoms.iter().zip(&best.weights) {
        if w <= 1e-12 {
            continue;
        }
        match atoms.last() {
            Some(&prev) if (a - prev).abs() < 1e-6 * window_width => {
                let last = atoms.len() - 1;
                let wt = weights[last] + w;
                atoms[last] = (atoms[last] * weights[last] + a * w) / wt;
                weights[last] = wt;
            }
            _ => {
                atoms.push(a);
                weights.push(w);
            }
        }
    }
    if atoms.is_empty() {
        atoms.push(best.atoms[0]);
        weights.push(1.0);
    }
    let mut value = best.value;
    if atoms.len() < best.atoms.len() {
        // merged support: re-price exactly, fall back when merging broke a
        // tight moment row
        match eval_support(&atoms, obj, cs, scale) {
            Some((a, w, v)) if v <= best.value + 1e-9 => {
                atoms = a;
                weights = w;
                value = v;
            }
            _ => {
                atoms = best.atoms.clone();
                weights = best.weights.clone();
            }
        }
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    debug_assert!(atoms.len() <= cap, "{} atoms exceed cap {cap}", atoms.len());
    let distribution = DiscreteDistribution::new(atoms, weights)
        .map_err(|e| Error::InvalidDistribution(format!("optimizer output: {e}")))?;
    if !check_membership_u(&distribution, cs, 1e-8) {
        log::warn!("optimizer output fails membership at 1e-8; reporting anyway");
    }
    let value = value.clamp(0.0, 1.0);
    let _ = scale;

    Ok(OptimizerResult {
        distribution,
        value,
        status: if best.converged {
            OptimizerStatus::Converged
        } else {
            OptimizerStatus::IterationCap
        },
        restarts_used: restarts,
        certificate_gap: (value - lower_proxy).max(0.0),
        restart_values,
    })
}

/// The Theorem-style limit: minimizes E[Phi(r/sqrt(V) - C' U/sqrt(V))] over
/// the scalar feasible set.
pub fn asymptotic_limit(
    ch: &ChannelSpec,
    cs: &ConstraintSet,
    r: f64,
    opts: &SearchOptions,
) -> Result<OptimizerResult> {
    let obj = ObjectiveSpec::asymptotic(ch, r);
    minimize_over_distributions(&obj, cs, opts)
}

/// Finite-n converse kernel minimized over cost distributions: atoms are
/// returned in S-space (per-symbol cost, all >= 0).
pub fn finite_n_converse_value(
    ch: &ChannelSpec,
    cs: &ConstraintSet,
    n: u64,
    gamma_thresh: f64,
    opts: &SearchOptions,
) -> Result<OptimizerResult> {
    let obj = ObjectiveSpec::finite_n(ch, n, gamma_thresh)?;
    let mut result = minimize_over_distributions(&obj, cs, opts)?;
    let root = (n as f64).sqrt();
    let s_atoms: Vec<f64> = result
        .distribution
        .atoms()
        .iter()
        .map(|&u| (ch.cost_threshold() + u / root).max(0.0))
        .collect();
    let dist = DiscreteDistribution::new(s_atoms, result.distribution.weights().to_vec())
        .map_err(|e| Error::InvalidDistribution(format!("cost-space mapping: {e}")))?;
    if !check_membership_s(&dist, cs, n, 1e-8) {
        log::warn!("finite-n output fails cost-space membership at 1e-8");
    }
    result.distribution = dist;
    Ok(result)
}

/// Max adjacent difference quotient of the limit value along `r_grid`.
pub fn lipschitz_audit(
    ch: &ChannelSpec,
    cs: &ConstraintSet,
    r_grid: &[f64],
    opts: &SearchOptions,
) -> Result<f64> {
    if r_grid.len() < 2 {
        return Err(Error::param("r_grid", r_grid.len() as f64, ">= 2 points"));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("r_grid", 0.0, "strictly increasing grid"));
    }
    let values: Vec<f64> = r_grid
        .iter()
        .map(|&r| asymptotic_limit(ch, cs, r, opts).map(|res| res.value))
        .collect::<Result<_>>()?;
    Ok(values
        .windows(2)
        .zip(r_grid.windows(2))
        .map(|(v, r)| ((v[1] - v[0]) / (r[1] - r[0])).abs())
        .fold(0.0f64, f64::max))
}

/// E_P[phi(U)] for a given mixture under the Theorem-style objective;
/// useful for evaluating candidate distributions without optimizing.
pub fn objective_expectation(obj: &ObjectiveSpec, p: &DiscreteDistribution) -> f64 {
    p.expectation(|u| obj.phi(u))
}
