//! Jammer with full knowledge (maximum error criterion).
//!
//! The max-error capacity is positive iff some pair of inputs has disjoint
//! output hulls `I(W,x) = conv{W(·|x,s) : s ∈ S}`. A DoS attack is possible
//! iff every pair of hulls intersects.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::channel::{Avc, Distribution};
use crate::linear::{lp_feasible, lp_optimize, FeasibilityResult, LinearSystem, Sense};
use crate::rational::{dot, max_abs, RVector, Rational};
use crate::symmetrize::input_pairs;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HullError {
    #[error("input symbol {index} out of range for |X| = {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("hull test needs two distinct inputs, got {0} twice")]
    SameSymbol(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullIntersection {
    /// `Σ_s W(·|x,s) q_x(s) = Σ_s W(·|x̂,s) q_xhat(s) = common_point`.
    Intersect {
        q_x: Distribution,
        q_xhat: Distribution,
        common_point: Distribution,
    },
    /// For every state s, s':
    /// `separator · W(·|x,s) ≤ threshold − gap` and
    /// `separator · W(·|x̂,s') ≥ threshold`, with `max |separator_y| = 1`.
    Disjoint {
        separator: RVector,
        threshold: Rational,
        gap: Rational,
    },
}

impl HullIntersection {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, HullIntersection::Disjoint { .. })
    }
}

/// Mixing LP over `(q1, q2) ∈ P(S)²`: ny output equalities, two simplex
/// rows, nonnegativity.
fn mixing_system(w: &Avc, x: usize, xh: usize) -> LinearSystem {
    let d = w.dims();
    let ns = d.ns;
    let mut sys = LinearSystem::new(2 * ns);
    for y in 0..d.ny {
        let mut row = vec![Rational::zero(); 2 * ns];
        for s in 0..ns {
            row[s] = w.w(y, x, s).clone();
            row[ns + s] = -w.w(y, xh, s).clone();
        }
        sys.add_eq(row, Rational::zero());
    }
    for half in 0..2 {
        let mut row = vec![Rational::zero(); 2 * ns];
        row[half * ns..(half + 1) * ns].fill(Rational::one());
        sys.add_eq(row, Rational::one());
    }
    sys.all_nonneg();
    sys
}

fn check_pair(w: &Avc, x: usize, xh: usize) -> Result<(), HullError> {
    let nx = w.dims().nx;
    for i in [x, xh] {
        if i >= nx {
            return Err(HullError::IndexOutOfRange { index: i, size: nx });
        }
    }
    if x == xh {
        return Err(HullError::SameSymbol(x));
    }
    Ok(())
}

/// Decides whether `I(W,x)` and `I(W,x̂)` intersect.
///
/// An intersection witness is the most interior pair of mixtures (it
/// maximizes the smallest mixing weight), which makes the reported point
/// canonical. A disjointness verdict carries a separating functional read
/// off the Farkas certificate of the mixing LP.
pub fn hulls_intersect(w: &Avc, x: usize, xh: usize) -> Result<HullIntersection, HullError> {
    check_pair(w, x, xh)?;
    let sys = mixing_system(w, x, xh);
    let ns = w.dims().ns;
    match lp_feasible(&sys).expect("mixing system is well formed") {
        FeasibilityResult::Feasible { .. } => Ok(centered_intersection(w, x, &sys, ns)),
        FeasibilityResult::Infeasible { farkas } => {
            let farkas = farkas.expect("simplex certifies infeasibility");
            let ny = w.dims().ny;
            // Multipliers of the output equalities give λ with
            // λ·W(·|x,s) ≥ −α > β ≥ λ·W(·|x̂,s'); separate with −λ.
            let lambda: RVector = farkas[..ny].iter().map(|v| -v.clone()).collect();
            Ok(separator_from(w, x, xh, lambda))
        }
    }
}

fn centered_intersection(w: &Avc, x: usize, sys: &LinearSystem, ns: usize) -> HullIntersection {
    // maximize τ subject to q(s) ≥ τ on every mixing weight
    let mut centered = sys.clone();
    let n = 2 * ns;
    centered.num_vars = n + 1;
    for r in &mut centered.equalities {
        r.coeffs.push(Rational::zero());
    }
    for i in 0..n {
        let mut row = vec![Rational::zero(); n + 1];
        row[i] = -Rational::one();
        row[n] = Rational::one();
        centered.add_le(row, Rational::zero());
    }
    centered.set_nonneg(n);
    let mut objective = vec![Rational::zero(); n];
    objective.push(Rational::one());
    let res = lp_optimize(&centered, &objective, Sense::Maximize).expect("well formed");
    let point = res.point().expect("feasible and bounded");
    let q1 = point[..ns].to_vec();
    let q2 = point[ns..n].to_vec();
    let d = w.dims();
    let common: RVector = (0..d.ny)
        .map(|y| (0..ns).fold(Rational::zero(), |a, s| a + w.w(y, x, s) * &q1[s]))
        .collect();
    HullIntersection::Intersect {
        q_x: Distribution::new(q1).expect("simplex row"),
        q_xhat: Distribution::new(q2).expect("simplex row"),
        common_point: Distribution::new(common).expect("mixture of distributions"),
    }
}

fn separator_from(w: &Avc, x: usize, xh: usize, lambda: RVector) -> HullIntersection {
    let scale = max_abs(&lambda);
    debug_assert!(!scale.is_zero());
    let separator: RVector = lambda.iter().map(|v| v / &scale).collect();
    let ns = w.dims().ns;
    let upper = (0..ns)
        .map(|s| dot(&separator, w.row(x, s)))
        .max()
        .expect("ns ≥ 1");
    let threshold = (0..ns)
        .map(|s| dot(&separator, w.row(xh, s)))
        .min()
        .expect("ns ≥ 1");
    let gap = &threshold - upper;
    debug_assert!(gap.is_positive());
    HullIntersection::Disjoint {
        separator,
        threshold,
        gap,
    }
}

/// Exact re-check of a hull verdict's witness.
pub fn verify_hull_result(w: &Avc, x: usize, xh: usize, res: &HullIntersection) -> bool {
    if check_pair(w, x, xh).is_err() {
        return false;
    }
    let d = w.dims();
    match res {
        HullIntersection::Intersect {
            q_x,
            q_xhat,
            common_point,
        } => {
            if q_x.support_size() != d.ns
                || q_xhat.support_size() != d.ns
                || common_point.support_size() != d.ny
            {
                return false;
            }
            (0..d.ny).all(|y| {
                let a = (0..d.ns).fold(Rational::zero(), |acc, s| acc + w.w(y, x, s) * &q_x[s]);
                let b = (0..d.ns).fold(Rational::zero(), |acc, s| acc + w.w(y, xh, s) * &q_xhat[s]);
                a == common_point[y] && b == common_point[y]
            })
        }
        HullIntersection::Disjoint {
            separator,
            threshold,
            gap,
        } => {
            separator.len() == d.ny
                && gap.is_positive()
                && (0..d.ns).all(|s| dot(separator, w.row(x, s)) <= threshold - gap)
                && (0..d.ns).all(|s| dot(separator, w.row(xh, s)) >= *threshold)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairReport {
    pub x: usize,
    pub xhat: usize,
    pub result: HullIntersection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullKnowledgeReport {
    /// True iff every pair of hulls intersects (max-error capacity zero).
    pub dos_possible: bool,
    /// Pairs examined, in lexicographic order. Without `full_report` the
    /// scan stops at the first disjoint pair.
    pub pairs: Vec<PairReport>,
}

impl FullKnowledgeReport {
    pub fn first_disjoint(&self) -> Option<&PairReport> {
        self.pairs.iter().find(|p| p.result.is_disjoint())
    }
}

pub fn is_dos_full_knowledge(w: &Avc, full_report: bool) -> FullKnowledgeReport {
    let mut pairs = Vec::new();
    let mut dos_possible = true;
    for (x, xh) in input_pairs(w.dims().nx) {
        let result = hulls_intersect(w, x, xh).expect("pair indices are valid");
        let disjoint = result.is_disjoint();
        pairs.push(PairReport {
            x,
            xhat: xh,
            result,
        });
        if disjoint {
            dos_possible = false;
            if !full_report {
                break;
            }
        }
    }
    FullKnowledgeReport {
        dos_possible,
        pairs,
    }
}
