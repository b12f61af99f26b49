use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use super::LinearError;
use crate::rational::{dot, format_rational, RVector, Rational};

/// `coeffs · x = rhs` or `coeffs · x ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: RVector,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: RVector, rhs: Rational) -> Self {
        Self { coeffs, rhs }
    }
}

/// A system of linear equalities, `≤` inequalities and sign constraints.
///
/// Constraints are numbered for Farkas certificates in this order:
/// equalities, then inequalities, then one `−x_j ≤ 0` row per nonnegative
/// variable in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub equalities: Vec<Row>,
    pub inequalities: Vec<Row>,
    pub nonneg_vars: BTreeSet<usize>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Self::default()
        }
    }

    pub fn add_eq(&mut self, coeffs: RVector, rhs: Rational) -> &mut Self {
        self.equalities.push(Row::new(coeffs, rhs));
        self
    }

    /// `coeffs · x ≤ rhs`
    pub fn add_le(&mut self, coeffs: RVector, rhs: Rational) -> &mut Self {
        self.inequalities.push(Row::new(coeffs, rhs));
        self
    }

    /// `coeffs · x ≥ rhs`, stored negated.
    pub fn add_ge(&mut self, coeffs: RVector, rhs: Rational) -> &mut Self {
        self.inequalities
            .push(Row::new(coeffs.into_iter().map(|c| -c).collect(), -rhs));
        self
    }

    pub fn set_nonneg(&mut self, var: usize) -> &mut Self {
        self.nonneg_vars.insert(var);
        self
    }

    pub fn all_nonneg(&mut self) -> &mut Self {
        self.nonneg_vars = (0..self.num_vars).collect();
        self
    }

    pub fn num_constraints(&self) -> usize {
        self.equalities.len() + self.inequalities.len() + self.nonneg_vars.len()
    }

    pub fn validate(&self) -> Result<(), LinearError> {
        for (i, r) in self.equalities.iter().chain(&self.inequalities).enumerate() {
            if r.coeffs.len() != self.num_vars {
                return Err(LinearError::MalformedSystem(format!(
                    "row {i} has {} coefficients, expected {}",
                    r.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        if let Some(&v) = self.nonneg_vars.iter().find(|&&v| v >= self.num_vars) {
            return Err(LinearError::MalformedSystem(format!(
                "nonnegativity on variable {v} but only {} variables",
                self.num_vars
            )));
        }
        Ok(())
    }

    /// Exact check that `x` satisfies every constraint.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.equalities.iter().all(|r| dot(&r.coeffs, x) == r.rhs)
            && self.inequalities.iter().all(|r| dot(&r.coeffs, x) <= r.rhs)
            && self.nonneg_vars.iter().all(|&j| !x[j].is_negative())
    }

    /// Largest absolute defect over all constraints (zero iff satisfied).
    pub fn max_violation(&self, x: &[Rational]) -> Rational {
        let mut worst = Rational::zero();
        for r in &self.equalities {
            worst = worst.max((dot(&r.coeffs, x) - &r.rhs).abs());
        }
        for r in &self.inequalities {
            worst = worst.max(dot(&r.coeffs, x) - &r.rhs);
        }
        for &j in &self.nonneg_vars {
            worst = worst.max(-x[j].clone());
        }
        worst
    }

    /// Returns a copy with the rows listed in a different order.
    pub fn permuted(&self, eq_order: &[usize], ineq_order: &[usize]) -> Self {
        Self {
            num_vars: self.num_vars,
            equalities: eq_order
                .iter()
                .map(|&i| self.equalities[i].clone())
                .collect(),
            inequalities: ineq_order
                .iter()
                .map(|&i| self.inequalities[i].clone())
                .collect(),
            nonneg_vars: self.nonneg_vars.clone(),
        }
    }
}

/// Plain-text dump for bug reports:
///
/// ```text
/// vars 2
/// E 1 1 | 1
/// I 1 -1 | 0
/// N 0 1
/// ```
impl fmt::Display for LinearSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.num_vars)?;
        let row = |f: &mut fmt::Formatter<'_>, tag: &str, r: &Row| -> fmt::Result {
            let cs: Vec<String> = r.coeffs.iter().map(format_rational).collect();
            writeln!(f, "{tag} {} | {}", cs.join(" "), format_rational(&r.rhs))
        };
        for r in &self.equalities {
            row(f, "E", r)?;
        }
        for r in &self.inequalities {
            row(f, "I", r)?;
        }
        let nn: Vec<String> = self.nonneg_vars.iter().map(|v| v.to_string()).collect();
        writeln!(f, "N {}", nn.join(" "))
    }
}
