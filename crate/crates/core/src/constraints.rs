//! The multifaceted cost model: enumerated cost-moment functions with
//! budgets, feasibility checks for scalar distributions, and the support
//! truncation used by the optimizer.
//!
//! Functions are a closed enumeration rather than user code: nonnegativity
//! and lower semicontinuity hold per kind by construction, and the
//! eventually-divergent flag is a stored fact instead of something to prove.

use crate::error::{Error, Result};

/// One cost-moment function u -> [0, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintFunction {
    /// max(u, 0); with a zero budget this encodes the maximal (almost-sure)
    /// cost constraint.
    PositivePart,
    /// u^2; with budget V this is the mean-and-variance cost model.
    Square,
    /// u^2 on u >= 0, zero below; penalizes only upward cost deviations.
    OneSidedSquare,
    /// 1 for u > threshold, 0 otherwise (excess-cost probability). Bounded,
    /// so it does not count toward the divergence condition.
    StepIndicator { threshold: f64 },
    /// 0 for u <= threshold, 1 + slope (u - threshold) above it: the
    /// divergent smoothing of the step indicator.
    SmoothedStep { threshold: f64, slope: f64 },
    /// |u|^p for p >= 1.
    PowerLaw { exponent: f64 },
}

impl ConstraintFunction {
    /// Validates kind parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConstraintFunction::SmoothedStep { slope, threshold } => {
                if !(slope > 0.0 && slope.is_finite()) {
                    return Err(Error::param("slope", slope, "alpha > 0"));
                }
                if !threshold.is_finite() {
                    return Err(Error::param("threshold", threshold, "finite threshold"));
                }
            }
            ConstraintFunction::StepIndicator { threshold } => {
                if !threshold.is_finite() {
                    return Err(Error::param("threshold", threshold, "finite threshold"));
                }
            }
            ConstraintFunction::PowerLaw { exponent } => {
                if !(exponent >= 1.0 && exponent.is_finite()) {
                    return Err(Error::param("exponent", exponent, "p >= 1"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// f(u).
    pub fn evaluate(&self, u: f64) -> f64 {
        match *self {
            ConstraintFunction::PositivePart => u.max(0.0),
            ConstraintFunction::Square => u * u,
            ConstraintFunction::OneSidedSquare => {
                if u >= 0.0 {
                    u * u
                } else {
                    0.0
                }
            }
            ConstraintFunction::StepIndicator { threshold } => {
                if u > threshold {
                    1.0
                } else {
                    0.0
                }
            }
            ConstraintFunction::SmoothedStep { threshold, slope } => {
                if u > threshold {
                    1.0 + slope * (u - threshold)
                } else {
                    0.0
                }
            }
            ConstraintFunction::PowerLaw { exponent } => u.abs().powf(exponent),
        }
    }

    /// Whether this kind is eventually nondecreasing with limit infinity.
    pub fn eventually_divergent(&self) -> bool {
        !matches!(self, ConstraintFunction::StepIndicator { .. })
    }

    /// Whether large negative arguments are also penalized (two-sided
    /// growth); used when bounding the search interval from below.
    pub fn two_sided(&self) -> bool {
        matches!(
            self,
            ConstraintFunction::Square | ConstraintFunction::PowerLaw { .. }
        )
    }

    /// Smallest point beyond which f(u) * weight exceeds the budget, for
    /// eventually-divergent kinds. `None` for the bounded step indicator.
    fn upper_violation_point(&self, budget: f64, weight: f64) -> Option<f64> {
        let ratio = budget / weight;
        match *self {
            ConstraintFunction::PositivePart => Some(ratio),
            ConstraintFunction::Square | ConstraintFunction::OneSidedSquare => Some(ratio.sqrt()),
            ConstraintFunction::SmoothedStep { threshold, slope } => {
                Some(threshold + ((ratio - 1.0) / slope).max(0.0))
            }
            ConstraintFunction::PowerLaw { exponent } => Some(ratio.powf(1.0 / exponent)),
            ConstraintFunction::StepIndicator { .. } => None,
        }
    }
}

/// Cost budgets: the mean threshold Gamma plus one budget per function.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    gamma: f64,
    items: Vec<(ConstraintFunction, f64)>,
}

impl ConstraintSet {
    pub fn new(gamma: f64, items: Vec<(ConstraintFunction, f64)>) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", gamma, "Gamma > 0"));
        }
        for (f, budget) in &items {
            f.validate()?;
            if !(*budget >= 0.0 && budget.is_finite()) {
                return Err(Error::param("budget", *budget, "Gamma_i >= 0"));
            }
        }
        Ok(Self { gamma, items })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn items(&self) -> &[(ConstraintFunction, f64)] {
        &self.items
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }

    /// Maximum atom count of extreme-point optima: k + 2.
    pub fn atom_cap(&self) -> usize {
        self.items.len() + 2
    }

    /// True when at least one item is eventually nondecreasing and diverges.
    pub fn condition2_holds(&self) -> bool {
        self.items.iter().any(|(f, _)| f.eventually_divergent())
    }

    /// Replaces one budget, keeping everything else; used by budget
    /// monotonicity checks and sweeps.
    pub fn with_budget(&self, index: usize, budget: f64) -> Result<Self> {
        let mut items = self.items.clone();
        items[index].1 = budget;
        ConstraintSet::new(self.gamma, items)
    }
}

/// Finitely supported distribution (atoms of U or of S).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms vs {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite atom".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms, weights })
    }

    pub fn point_mass(atom: f64) -> Self {
        Self {
            atoms: vec![atom],
            weights: vec![1.0],
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// E[g(X)] under this distribution.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| w * g(a))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|u| u)
    }
}

/// Default absolute feasibility tolerance. Budgets near zero are compared
/// absolutely, never relatively.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Membership in the scalar feasible set: E[U] <= tol and
/// E[f_i(U)] <= Gamma_i + tol for every item.
pub fn check_membership_u(p: &DiscreteDistribution, cs: &ConstraintSet, tol: f64) -> bool {
    if p.mean() > tol {
        return false;
    }
    cs.items
        .iter()
        .all(|(f, budget)| p.expectation(|u| f.evaluate(u)) <= budget + tol)
}

/// Membership in the blocklength-n cost set: atoms >= 0, E[S] <= Gamma + tol,
/// and E[f_i(sqrt(n)(S - Gamma))] <= Gamma_i + tol.
pub fn check_membership_s(
    p: &DiscreteDistribution,
    cs: &ConstraintSet,
    n: u64,
    tol: f64,
) -> bool {
    if p.atoms.iter().any(|&s| s < 0.0) {
        return false;
    }
    if p.mean() > cs.gamma + tol {
        return false;
    }
    let scale = (n as f64).sqrt();
    cs.items.iter().all(|(f, budget)| {
        p.expectation(|s| f.evaluate(scale * (s - cs.gamma))) <= budget + tol
    })
}

/// Upper atom bound: any atom above the returned point carrying weight at
/// least `weight_floor` violates some eventually-divergent budget.
pub fn support_bound(cs: &ConstraintSet, weight_floor: f64) -> Result<f64> {
    assert!(weight_floor > 0.0, "weight floor must be positive");
    if !cs.condition2_holds() {
        return Err(Error::UnboundedSupport { hint: true });
    }
    let bound = cs
        .items
        .iter()
        .filter_map(|(f, budget)| f.upper_violation_point(*budget, weight_floor))
        .fold(f64::INFINITY, f64::min);
    Ok(bound)
}

/// Magnitude beyond which *negative* atoms with weight >= `weight_floor`
/// violate some two-sided budget; infinite when only one-sided items are
/// present.
pub fn negative_support_bound(cs: &ConstraintSet, weight_floor: f64) -> f64 {
    cs.items
        .iter()
        .filter(|(f, _)| f.two_sided())
        .filter_map(|(f, budget)| f.upper_violation_point(*budget, weight_floor))
        .fold(f64::INFINITY, f64::min)
}
