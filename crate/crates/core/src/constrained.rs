//! DoS analysis under a jammer state-cost budget `Λ` and a transmitter
//! input-cost budget `Γ`.
//!
//! The central quantity is the cheapest symmetrization
//! `Λ(P,W) = min_{U ∈ U(W)} Σ_x Σ_s P(x) U(s|x) l(s)`, taken as `+∞` when no
//! symmetrizer exists.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{Avc, ChannelError, CostFn, Distribution, StochMatrix};
use crate::linear::{lp_optimize, LinearSystem, OptimizationResult, Sense};
use crate::rational::{dot, format_rational, ExtRational, RVector, Rational};
use crate::symmetrize::build_symmetrizing_system;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstrainedError {
    #[error("{what}: expected alphabet size {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{what} must be > 0, got {}", format_rational(.value))]
    NonPositiveBudget { what: &'static str, value: Rational },
    #[error("input budget must be >= 0, got {}", format_rational(.0))]
    NegativeBudget(Rational),
    #[error("input cost function required")]
    MissingInputCost,
    #[error("input budget required")]
    MissingGamma,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Cost functions and budgets. `l` prices jammer states, `g` prices inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub state_cost: CostFn,
    pub input_cost: Option<CostFn>,
    pub lambda: Rational,
    pub gamma: Option<Rational>,
}

impl ConstraintSpec {
    pub fn state_only(state_cost: CostFn, lambda: Rational) -> Result<Self, ConstrainedError> {
        let spec = Self {
            state_cost,
            input_cost: None,
            lambda,
            gamma: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_input(
        state_cost: CostFn,
        input_cost: CostFn,
        lambda: Rational,
        gamma: Rational,
    ) -> Result<Self, ConstrainedError> {
        let spec = Self {
            state_cost,
            input_cost: Some(input_cost),
            lambda,
            gamma: Some(gamma),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConstrainedError> {
        self.state_cost.require_normalized()?;
        if !self.lambda.is_positive() {
            return Err(ConstrainedError::NonPositiveBudget {
                what: "state budget",
                value: self.lambda.clone(),
            });
        }
        if let Some(g) = &self.input_cost {
            g.require_normalized()?;
        }
        if let Some(gamma) = &self.gamma {
            if !gamma.is_positive() {
                return Err(ConstrainedError::NonPositiveBudget {
                    what: "input budget",
                    value: gamma.clone(),
                });
            }
        }
        Ok(())
    }
}

fn check_size(what: &'static str, expected: usize, actual: usize) -> Result<(), ConstrainedError> {
    if expected != actual {
        return Err(ConstrainedError::DimensionMismatch {
            what,
            expected,
            actual,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lambda0 {
    pub value: ExtRational,
    /// A cheapest symmetrizer, when one exists.
    pub argmin: Option<StochMatrix>,
}

/// Cheapest symmetrization cost for input distribution `p`.
pub fn lambda0(w: &Avc, p: &Distribution, l: &CostFn) -> Result<Lambda0, ConstrainedError> {
    let d = w.dims();
    check_size("input distribution", d.nx, p.support_size())?;
    check_size("state cost", d.ns, l.alphabet_size())?;
    l.require_normalized()?;
    let sys = build_symmetrizing_system(w);
    let mut objective = vec![Rational::zero(); d.symmetrizer_len()];
    for x in 0..d.nx {
        for s in 0..d.ns {
            objective[d.u_index(x, s)] = &p[x] * &l.costs()[s];
        }
    }
    Ok(
        match lp_optimize(&sys, &objective, Sense::Minimize).expect("well formed") {
            OptimizationResult::Optimal { value, argmin } => Lambda0 {
                value: ExtRational::Finite(value),
                argmin: Some(StochMatrix::from_flat(&argmin, d.nx, d.ns).expect("stochastic")),
            },
            OptimizationResult::Infeasible { .. } => Lambda0 {
                value: ExtRational::PosInfinity,
                argmin: None,
            },
            OptimizationResult::Unbounded => unreachable!("objective is nonnegative on a polytope"),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateClassification {
    /// `Λ₀(P) < Λ`: the jammer can afford a symmetrizer.
    DoSPossible,
    /// `Λ₀(P) > Λ`: every symmetrizer is too expensive.
    NoDoS,
    /// `Λ₀(P) = Λ`: undecided by the symmetrization criterion.
    Boundary,
    /// No symmetrizer exists at all.
    NotSymmetrizable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateConstrainedVerdict {
    pub lambda0: ExtRational,
    pub classification: StateClassification,
    /// Present for `DoSPossible` and `Boundary`.
    pub witness_u: Option<StochMatrix>,
}

pub fn classify_state_constrained(
    w: &Avc,
    p: &Distribution,
    spec: &ConstraintSpec,
) -> Result<StateConstrainedVerdict, ConstrainedError> {
    spec.validate()?;
    let res = lambda0(w, p, &spec.state_cost)?;
    let classification = match res.value.finite() {
        None => StateClassification::NotSymmetrizable,
        Some(v) => match v.cmp(&spec.lambda) {
            std::cmp::Ordering::Less => StateClassification::DoSPossible,
            std::cmp::Ordering::Equal => StateClassification::Boundary,
            std::cmp::Ordering::Greater => StateClassification::NoDoS,
        },
    };
    let witness_u = match classification {
        StateClassification::DoSPossible | StateClassification::Boundary => res.argmin,
        _ => None,
    };
    Ok(StateConstrainedVerdict {
        lambda0: res.value,
        classification,
        witness_u,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxMin {
    pub value: ExtRational,
    /// A maximizing input distribution (absent when no symmetrizer exists).
    pub optimal_p: Option<Distribution>,
    /// Dual point for `optimal_p`: see [`dual_lower_bound`].
    pub dual_y: Option<RVector>,
}

/// `max { Λ(P,W) : P ∈ P(X), Σ_x P(x) g(x) ≤ Γ }`.
///
/// The inner minimum is replaced by its LP dual
/// `max { bᵀy : Aᵀy ≤ c(P) }`, where `Au = b, u ≥ 0` is the symmetrizing
/// system and `c(P)_{x,s} = P(x) l(s)`. The dual objective does not depend
/// on P and the constraints are linear in `(P, y)`, so the max-min is a
/// single LP over `(P, y)`.
pub fn max_min_lambda(
    w: &Avc,
    l: &CostFn,
    g: &CostFn,
    gamma: &Rational,
) -> Result<MaxMin, ConstrainedError> {
    let d = w.dims();
    check_size("state cost", d.ns, l.alphabet_size())?;
    check_size("input cost", d.nx, g.alphabet_size())?;
    l.require_normalized()?;
    g.require_normalized()?;
    if gamma.is_negative() {
        return Err(ConstrainedError::NegativeBudget(gamma.clone()));
    }
    let sym = build_symmetrizing_system(w);
    if !crate::linear::lp_feasible(&sym)
        .expect("well formed")
        .is_feasible()
    {
        return Ok(MaxMin {
            value: ExtRational::PosInfinity,
            optimal_p: None,
            dual_y: None,
        });
    }

    let nx = d.nx;
    let m = sym.equalities.len();
    // variables: P (nx, nonnegative) then y (m, free)
    let mut joint = LinearSystem::new(nx + m);
    let mut row = vec![Rational::zero(); nx + m];
    row[..nx].fill(Rational::one());
    joint.add_eq(row, Rational::one());
    let mut row = vec![Rational::zero(); nx + m];
    row[..nx].clone_from_slice(g.costs());
    joint.add_le(row, gamma.clone());
    for x in 0..nx {
        for s in 0..d.ns {
            let j = d.u_index(x, s);
            let mut row = vec![Rational::zero(); nx + m];
            row[x] = -l.costs()[s].clone();
            for (r, eq) in sym.equalities.iter().enumerate() {
                row[nx + r] = eq.coeffs[j].clone();
            }
            joint.add_le(row, Rational::zero());
        }
    }
    for x in 0..nx {
        joint.set_nonneg(x);
    }
    let mut objective = vec![Rational::zero(); nx];
    objective.extend(sym.equalities.iter().map(|eq| eq.rhs.clone()));

    match lp_optimize(&joint, &objective, Sense::Maximize).expect("well formed") {
        OptimizationResult::Optimal { value, argmin } => Ok(MaxMin {
            value: ExtRational::Finite(value),
            optimal_p: Some(Distribution::new(argmin[..nx].to_vec()).expect("simplex point")),
            dual_y: Some(argmin[nx..].to_vec()),
        }),
        // g is normalized and Γ ≥ 0, so a point mass on a zero-cost input is
        // always admissible; with U(W) nonempty the inner minimum is finite
        // and bounded by max l.
        other => unreachable!("joint LP must be optimal, got {other:?}"),
    }
}

/// `c(P)_{x,s} = P(x) l(s)` in symmetrizer layout.
fn cost_vector(w: &Avc, p: &Distribution, l: &CostFn) -> RVector {
    let d = w.dims();
    let mut c = vec![Rational::zero(); d.symmetrizer_len()];
    for x in 0..d.nx {
        for s in 0..d.ns {
            c[d.u_index(x, s)] = &p[x] * &l.costs()[s];
        }
    }
    c
}

/// Optimal dual point of the `Λ₀(P)` LP, one entry per equality of the
/// symmetrizing system. `None` when no symmetrizer exists.
pub fn lambda0_dual(
    w: &Avc,
    p: &Distribution,
    l: &CostFn,
) -> Result<Option<RVector>, ConstrainedError> {
    let d = w.dims();
    check_size("input distribution", d.nx, p.support_size())?;
    check_size("state cost", d.ns, l.alphabet_size())?;
    l.require_normalized()?;
    let sym = build_symmetrizing_system(w);
    let c = cost_vector(w, p, l);
    let m = sym.equalities.len();
    // max bᵀy  s.t.  Aᵀy ≤ c, y free
    let mut dual = LinearSystem::new(m);
    for (j, cj) in c.iter().enumerate() {
        dual.add_le(
            sym.equalities
                .iter()
                .map(|eq| eq.coeffs[j].clone())
                .collect(),
            cj.clone(),
        );
    }
    let b: RVector = sym.equalities.iter().map(|eq| eq.rhs.clone()).collect();
    Ok(
        match lp_optimize(&dual, &b, Sense::Maximize).expect("well formed") {
            OptimizationResult::Optimal { argmin, .. } => Some(argmin),
            // the dual is always feasible (y = 0); unbounded iff the primal is empty
            _ => None,
        },
    )
}

/// `bᵀy` when `Aᵀy ≤ c(P)`, which by weak duality bounds `Λ₀(P)` from below.
pub fn dual_lower_bound(w: &Avc, p: &Distribution, l: &CostFn, y: &[Rational]) -> Option<Rational> {
    let d = w.dims();
    if p.support_size() != d.nx || l.alphabet_size() != d.ns {
        return None;
    }
    let sym = build_symmetrizing_system(w);
    if y.len() != sym.equalities.len() {
        return None;
    }
    let c = cost_vector(w, p, l);
    for (j, cj) in c.iter().enumerate() {
        let aty: Rational = sym
            .equalities
            .iter()
            .zip(y)
            .map(|(eq, yr)| &eq.coeffs[j] * yr)
            .sum();
        if aty > *cj {
            return None;
        }
    }
    Some(
        sym.equalities
            .iter()
            .zip(y)
            .map(|(eq, yr)| &eq.rhs * yr)
            .sum(),
    )
}

/// Upper bound on `max_P Λ(P,W)` over `{g·P ≤ Γ}`: for a symmetrizer U
/// and `ν ≥ 0`, every admissible P has
/// `Λ(P,W) ≤ Σ_x P(x) c_U(x) ≤ max_x (c_U(x) − ν g(x)) + ν Γ`
/// with `c_U(x) = Σ_s U(s|x) l(s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxMinUpperCertificate {
    pub u: StochMatrix,
    pub nu: Rational,
}

/// The tightest such certificate, found by LP (its bound equals the
/// max-min value). `None` when no symmetrizer exists.
pub fn max_min_upper_certificate(
    w: &Avc,
    l: &CostFn,
    g: &CostFn,
    gamma: &Rational,
) -> Result<Option<MaxMinUpperCertificate>, ConstrainedError> {
    let d = w.dims();
    check_size("state cost", d.ns, l.alphabet_size())?;
    check_size("input cost", d.nx, g.alphabet_size())?;
    if gamma.is_negative() {
        return Err(ConstrainedError::NegativeBudget(gamma.clone()));
    }
    let sym = build_symmetrizing_system(w);
    let nu_len = d.symmetrizer_len();
    // variables: u, then ν ≥ 0, then μ free
    let mut sys = LinearSystem::new(nu_len + 2);
    for eq in &sym.equalities {
        let mut row = eq.coeffs.clone();
        row.extend([Rational::zero(), Rational::zero()]);
        sys.add_eq(row, eq.rhs.clone());
    }
    for x in 0..d.nx {
        let mut row = vec![Rational::zero(); nu_len + 2];
        for s in 0..d.ns {
            row[d.u_index(x, s)] = l.costs()[s].clone();
        }
        row[nu_len] = -g.costs()[x].clone();
        row[nu_len + 1] = -Rational::one();
        sys.add_le(row, Rational::zero());
    }
    for j in 0..=nu_len {
        sys.set_nonneg(j);
    }
    let mut objective = vec![Rational::zero(); nu_len + 2];
    objective[nu_len] = gamma.clone();
    objective[nu_len + 1] = Rational::one();
    Ok(
        match lp_optimize(&sys, &objective, Sense::Minimize).expect("well formed") {
            OptimizationResult::Optimal { argmin, .. } => Some(MaxMinUpperCertificate {
                u: StochMatrix::from_flat(&argmin[..nu_len], d.nx, d.ns).expect("stochastic"),
                nu: argmin[nu_len].clone(),
            }),
            _ => None,
        },
    )
}

/// The bound certified by `cert`, or `None` if U is not a symmetrizer or
/// `ν < 0`.
pub fn upper_certificate_bound(
    w: &Avc,
    l: &CostFn,
    g: &CostFn,
    gamma: &Rational,
    cert: &MaxMinUpperCertificate,
) -> Option<Rational> {
    let d = w.dims();
    if cert.nu.is_negative() || l.alphabet_size() != d.ns || g.alphabet_size() != d.nx {
        return None;
    }
    if !crate::symmetrize::verify_symmetrizer(w, &cert.u).ok()? {
        return None;
    }
    (0..d.nx)
        .map(|x| dot(cert.u.row(x), l.costs()) - &cert.nu * &g.costs()[x])
        .max()
        .map(|m| m + &cert.nu * gamma)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedDos {
    /// Membership in the constrained DoS set (strict `<`).
    pub in_dos: bool,
    pub max_value: ExtRational,
    pub optimal_p: Option<Distribution>,
}

pub fn in_dos_constrained(
    w: &Avc,
    spec: &ConstraintSpec,
) -> Result<ConstrainedDos, ConstrainedError> {
    spec.validate()?;
    let g = spec
        .input_cost
        .as_ref()
        .ok_or(ConstrainedError::MissingInputCost)?;
    let gamma = spec.gamma.as_ref().ok_or(ConstrainedError::MissingGamma)?;
    let mm = max_min_lambda(w, &spec.state_cost, g, gamma)?;
    let in_dos = match mm.value.finite() {
        Some(v) => *v < spec.lambda,
        None => false,
    };
    Ok(ConstrainedDos {
        in_dos,
        max_value: mm.value,
        optimal_p: mm.optimal_p,
    })
}
