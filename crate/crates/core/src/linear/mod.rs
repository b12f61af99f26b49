//! Exact rational linear decision procedures.
//!
//! * [`lp_feasible`] / [`lp_optimize`]: two-phase simplex with Bland's rule;
//!   infeasibility always comes with a Farkas certificate taken from the
//!   terminal phase-1 tableau.
//! * [`fourier_motzkin_eliminate`]: exact projection of one variable.
//! * [`enumerate_basic_feasible`]: brute-force enumeration of basic
//!   solutions, kept independent of the simplex code as a test oracle.

mod enumerate;
mod farkas;
mod fm;
mod simplex;
mod system;

pub use enumerate::{enumerate_basic_feasible, enumerate_vertices, ORACLE_MAX_VARS};
pub use farkas::verify_farkas;
pub use fm::{
    fm_decide, fourier_motzkin_eliminate, fourier_motzkin_eliminate_with_cap, DEFAULT_FM_CAP,
};
pub use simplex::{lp_feasible, lp_optimize};
pub use system::{LinearSystem, Row};

use thiserror::Error;

use crate::rational::{RVector, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearError {
    #[error("malformed system: {0}")]
    MalformedSystem(String),
    #[error("Fourier-Motzkin constraint count {count} exceeds cap {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("system too large for enumeration: {0}")]
    TooLarge(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult {
    Feasible {
        witness: RVector,
    },
    /// `farkas` is always present when produced by [`lp_feasible`]; the
    /// enumeration oracle reports the verdict only.
    Infeasible {
        farkas: Option<RVector>,
    },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&RVector> {
        match self {
            FeasibilityResult::Feasible { witness } => Some(witness),
            FeasibilityResult::Infeasible { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&RVector> {
        match self {
            FeasibilityResult::Infeasible { farkas } => farkas.as_ref(),
            FeasibilityResult::Feasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptimizationResult {
    Optimal { value: Rational, argmin: RVector },
    Infeasible { farkas: RVector },
    Unbounded,
}

impl OptimizationResult {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            OptimizationResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<&RVector> {
        match self {
            OptimizationResult::Optimal { argmin, .. } => Some(argmin),
            _ => None,
        }
    }
}
