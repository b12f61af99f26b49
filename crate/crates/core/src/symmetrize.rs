//! Jammer with partial knowledge: symmetrizability of an AVC.
//!
//! `W` is symmetrizable iff there is a stochastic `U: X → P(S)` with
//! `Σ_s W(y|x,s) U(s|x̂) = Σ_s W(y|x̂,s) U(s|x)` for all `x, x̂, y`. This set
//! of channels is exactly the set where a DoS attack succeeds under the
//! average error criterion (capacity zero).
//!
//! The symmetrizer variables are the vector u with `u[x·ns + s] = U(s|x)`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{Avc, Dims, StochMatrix};
use crate::linear::{lp_feasible, lp_optimize, FeasibilityResult, LinearSystem, Sense};
use crate::rational::{RVector, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetrizeError {
    #[error("symmetrizer has shape {rows}x{cols}, expected {nx}x{ns}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        nx: usize,
        ns: usize,
    },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymVerdict {
    Symmetrizable,
    NonSymmetrizable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetrizabilityDecision {
    Symmetrizable { witness_u: StochMatrix },
    NonSymmetrizable { certificate: RVector },
}

impl SymmetrizabilityDecision {
    pub fn verdict(&self) -> SymVerdict {
        match self {
            Self::Symmetrizable { .. } => SymVerdict::Symmetrizable,
            Self::NonSymmetrizable { .. } => SymVerdict::NonSymmetrizable,
        }
    }

    pub fn is_symmetrizable(&self) -> bool {
        matches!(self, Self::Symmetrizable { .. })
    }

    pub fn witness(&self) -> Option<&StochMatrix> {
        match self {
            Self::Symmetrizable { witness_u } => Some(witness_u),
            Self::NonSymmetrizable { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&RVector> {
        match self {
            Self::NonSymmetrizable { certificate } => Some(certificate),
            Self::Symmetrizable { .. } => None,
        }
    }
}

/// Unordered input pairs `x < x̂` in lexicographic order.
pub fn input_pairs(nx: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..nx).flat_map(move |x| (x + 1..nx).map(move |xh| (x, xh)))
}

/// Coefficients over u of `Σ_s W(y|x,s)u(s|x̂) − Σ_s W(y|x̂,s)u(s|x)`.
pub fn defect_row(w: &Avc, x: usize, xh: usize, y: usize) -> RVector {
    let d = w.dims();
    let mut row = vec![Rational::zero(); d.symmetrizer_len()];
    for s in 0..d.ns {
        row[d.u_index(xh, s)] += w.w(y, x, s);
        row[d.u_index(x, s)] -= w.w(y, xh, s);
    }
    row
}

/// Pair equalities (pairs `x < x̂` in order, `y` innermost), then one
/// row-sum equality per input, all variables nonnegative.
pub fn build_symmetrizing_system(w: &Avc) -> LinearSystem {
    let d = w.dims();
    let mut sys = LinearSystem::new(d.symmetrizer_len());
    for (x, xh) in input_pairs(d.nx) {
        for y in 0..d.ny {
            sys.add_eq(defect_row(w, x, xh, y), Rational::zero());
        }
    }
    append_stochastic_rows(&mut sys, d, 0);
    sys.all_nonneg();
    sys
}

/// Adds `Σ_s u(s|x) = 1` for each x, with u starting at column `offset`.
pub(crate) fn append_stochastic_rows(sys: &mut LinearSystem, d: Dims, offset: usize) {
    for x in 0..d.nx {
        let mut row = vec![Rational::zero(); sys.num_vars];
        for s in 0..d.ns {
            row[offset + d.u_index(x, s)] = Rational::one();
        }
        sys.add_eq(row, Rational::one());
    }
}

pub fn is_symmetrizable(w: &Avc) -> SymmetrizabilityDecision {
    let sys = build_symmetrizing_system(w);
    let d = w.dims();
    match lp_feasible(&sys).expect("symmetrizing system is well formed") {
        FeasibilityResult::Feasible { witness } => SymmetrizabilityDecision::Symmetrizable {
            witness_u: StochMatrix::from_flat(&witness, d.nx, d.ns)
                .expect("feasible point is stochastic"),
        },
        FeasibilityResult::Infeasible { farkas } => SymmetrizabilityDecision::NonSymmetrizable {
            certificate: farkas.expect("simplex always certifies infeasibility"),
        },
    }
}

/// Exact check of every symmetrization equality.
pub fn verify_symmetrizer(w: &Avc, u: &StochMatrix) -> Result<bool, SymmetrizeError> {
    let d = w.dims();
    if u.rows() != d.nx || u.cols() != d.ns {
        return Err(SymmetrizeError::ShapeMismatch {
            rows: u.rows(),
            cols: u.cols(),
            nx: d.nx,
            ns: d.ns,
        });
    }
    for x in 0..d.nx {
        for xh in 0..d.nx {
            for y in 0..d.ny {
                let lhs =
                    (0..d.ns).fold(Rational::zero(), |a, s| a + w.w(y, x, s) * u.entry(xh, s));
                let rhs =
                    (0..d.ns).fold(Rational::zero(), |a, s| a + w.w(y, xh, s) * u.entry(x, s));
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The sum-of-squares defect
/// `P(t,u) = Σ_{k1,k2} Σ_r [Σ_l t_{k1,l}(r) u_{k2}(l) − Σ_l t_{k2,l}(r) u_{k1}(l)]²`
/// over ordered pairs, evaluated exactly.
pub fn evaluate_defect_polynomial(
    t: &[Rational],
    u: &[Rational],
    dims: Dims,
) -> Result<Rational, SymmetrizeError> {
    if t.len() != dims.channel_len() {
        return Err(SymmetrizeError::LengthMismatch {
            expected: dims.channel_len(),
            actual: t.len(),
        });
    }
    if u.len() != dims.symmetrizer_len() {
        return Err(SymmetrizeError::LengthMismatch {
            expected: dims.symmetrizer_len(),
            actual: u.len(),
        });
    }
    let mut total = Rational::zero();
    for k1 in 0..dims.nx {
        for k2 in 0..dims.nx {
            for r in 0..dims.ny {
                let mut diff = Rational::zero();
                for l in 0..dims.ns {
                    diff += &t[dims.t_index(k1, l, r)] * &u[dims.u_index(k2, l)];
                    diff -= &t[dims.t_index(k2, l, r)] * &u[dims.u_index(k1, l)];
                }
                total += &diff * &diff;
            }
        }
    }
    Ok(total)
}

/// `min_U max_{x<x̂, y} |defect|` over stochastic U, solved as one LP.
/// Zero exactly when the channel is symmetrizable.
pub fn symmetrizability_margin(w: &Avc) -> Rational {
    symmetrizability_margin_with_point(w).0
}

/// Margin together with a minimizing U.
pub fn symmetrizability_margin_with_point(w: &Avc) -> (Rational, StochMatrix) {
    let d = w.dims();
    let nu = d.symmetrizer_len();
    // variables: u (nu entries), then the bound δ
    let mut sys = LinearSystem::new(nu + 1);
    for (x, xh) in input_pairs(d.nx) {
        for y in 0..d.ny {
            let row = defect_row(w, x, xh, y);
            let mut up = row.clone();
            up.push(-Rational::one());
            sys.add_le(up, Rational::zero());
            let mut down: RVector = row.into_iter().map(|c| -c).collect();
            down.push(-Rational::one());
            sys.add_le(down, Rational::zero());
        }
    }
    append_stochastic_rows(&mut sys, d, 0);
    sys.all_nonneg();
    let mut objective = vec![Rational::zero(); nu];
    objective.push(Rational::one());
    let res = lp_optimize(&sys, &objective, Sense::Minimize).expect("margin LP is well formed");
    let argmin = res.point().expect("margin LP is feasible and bounded");
    let u = StochMatrix::from_flat(&argmin[..nu], d.nx, d.ns).expect("stochastic");
    debug_assert!(!argmin[nu].is_negative());
    (res.value().cloned().unwrap_or_else(Rational::zero), u)
}
