//! Dense two-phase simplex over exact rationals.
//!
//! Free variables are split into a positive and a negative part, every
//! inequality gets a slack column, and rows are sign-flipped so the
//! right-hand side is nonnegative. Phase 1 runs on artificial columns that
//! are kept in the tableau until the end so the phase-1 duals can be read off
//! the reduced-cost row.

use num_traits::{One, Signed, Zero};

use super::{FeasibilityResult, LinearError, LinearSystem, OptimizationResult, Sense};
use crate::rational::{RVector, Rational};

/// Where a standard-form column comes from.
#[derive(Debug, Clone, Copy)]
enum Column {
    /// `+x_j` (nonnegative variable or positive part of a free one).
    Pos(usize),
    /// Negative part of a free variable.
    Neg(usize),
    Slack,
}

struct StandardForm {
    columns: Vec<Column>,
    /// `a[i]` over structural columns, already multiplied by `sign[i]`.
    a: Vec<RVector>,
    b: RVector,
    sign: Vec<bool>,
}

fn standard_form(sys: &LinearSystem) -> StandardForm {
    let mut columns = Vec::new();
    for j in 0..sys.num_vars {
        columns.push(Column::Pos(j));
        if !sys.nonneg_vars.contains(&j) {
            columns.push(Column::Neg(j));
        }
    }
    let n_struct = columns.len();
    let n_ineq = sys.inequalities.len();
    columns.extend(std::iter::repeat_n(Column::Slack, n_ineq));

    let rows = sys.equalities.iter().chain(&sys.inequalities);
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut sign = Vec::new();
    for (i, row) in rows.enumerate() {
        let mut coeffs = Vec::with_capacity(columns.len());
        for col in &columns[..n_struct] {
            coeffs.push(match *col {
                Column::Pos(j) => row.coeffs[j].clone(),
                Column::Neg(j) => -row.coeffs[j].clone(),
                Column::Slack => unreachable!(),
            });
        }
        for k in 0..n_ineq {
            let is_own = i >= sys.equalities.len() && i - sys.equalities.len() == k;
            coeffs.push(if is_own {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        let flip = row.rhs.is_negative();
        if flip {
            coeffs.iter_mut().for_each(|c| *c = -c.clone());
        }
        a.push(coeffs);
        b.push(if flip {
            -row.rhs.clone()
        } else {
            row.rhs.clone()
        });
        sign.push(!flip);
    }
    StandardForm {
        columns,
        a,
        b,
        sign,
    }
}

struct Tableau {
    t: Vec<RVector>,
    rhs: RVector,
    basis: Vec<usize>,
    /// Reduced costs, one per column.
    d: RVector,
    /// Columns at index ≥ `n_struct` are artificial.
    n_struct: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[r][c].clone();
        if !piv.is_one() {
            self.t[r].iter_mut().for_each(|v| *v /= &piv);
            self.rhs[r] /= &piv;
        }
        let pivot_row = self.t[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (v, p) in self.t[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.d[c].is_zero() {
            let f = self.d[c].clone();
            for (v, p) in self.d.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, cost: &[Rational]) {
        let mut d: RVector = cost.to_vec();
        for (i, &bcol) in self.basis.iter().enumerate() {
            let cb = &cost[bcol];
            if cb.is_zero() {
                continue;
            }
            for (dj, tij) in d.iter_mut().zip(&self.t[i]) {
                if !tij.is_zero() {
                    *dj -= cb * tij;
                }
            }
        }
        self.d = d;
    }

    /// Runs Bland's rule on columns `< allowed`. Returns false if unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.d[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn values(&self) -> RVector {
        let mut x = vec![Rational::zero(); self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }
}

enum PhaseOne {
    Feasible(Tableau),
    Infeasible(RVector),
}

fn phase_one(sys: &LinearSystem, sf: &StandardForm) -> PhaseOne {
    let m = sf.a.len();
    let n = sf.columns.len();
    let t: Vec<RVector> =
        sf.a.iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..m).map(|k| {
                    if k == i {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }));
                r
            })
            .collect();
    let mut tab = Tableau {
        t,
        rhs: sf.b.clone(),
        basis: (n..n + m).collect(),
        d: Vec::new(),
        n_struct: n,
    };
    let mut cost = vec![Rational::zero(); n];
    cost.extend(std::iter::repeat_n(Rational::one(), m));
    tab.set_costs(&cost);
    let bounded = tab.run(n + m);
    debug_assert!(bounded, "phase 1 is bounded below by 0");

    let value = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(&b, _)| b >= n)
        .fold(Rational::zero(), |acc, (_, v)| acc + v);
    if value.is_zero() {
        return PhaseOne::Feasible(tab);
    }

    // Dual of phase 1: y_i = 1 − d_{artificial i}. Map back to the original
    // rows, undoing the sign normalization, then append the implied
    // multipliers of the nonnegativity rows.
    let mu: RVector = (0..m)
        .map(|i| {
            let y = Rational::one() - &tab.d[n + i];
            if sf.sign[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    let mut cert = mu.clone();
    let rows: Vec<_> = sys.equalities.iter().chain(&sys.inequalities).collect();
    for &j in &sys.nonneg_vars {
        let nu = rows
            .iter()
            .zip(&mu)
            .fold(Rational::zero(), |acc, (r, m)| acc + m * &r.coeffs[j]);
        cert.push(nu);
    }
    PhaseOne::Infeasible(cert)
}

/// Removes artificial columns from the basis after a successful phase 1,
/// dropping rows that turn out to be linearly dependent.
fn drive_out_artificials(tab: &mut Tableau) {
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= tab.n_struct {
            match (0..tab.n_struct).find(|&j| !tab.t[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
}

fn recover(sys: &LinearSystem, sf: &StandardForm, xs: &[Rational]) -> RVector {
    let mut x = vec![Rational::zero(); sys.num_vars];
    for (col, v) in sf.columns.iter().zip(xs) {
        match *col {
            Column::Pos(j) => x[j] += v,
            Column::Neg(j) => x[j] -= v,
            Column::Slack => {}
        }
    }
    x
}

/// Exact feasibility with a witness or a Farkas certificate.
pub fn lp_feasible(sys: &LinearSystem) -> Result<FeasibilityResult, LinearError> {
    sys.validate()?;
    let sf = standard_form(sys);
    Ok(match phase_one(sys, &sf) {
        PhaseOne::Feasible(tab) => FeasibilityResult::Feasible {
            witness: recover(sys, &sf, &tab.values()),
        },
        PhaseOne::Infeasible(cert) => FeasibilityResult::Infeasible { farkas: Some(cert) },
    })
}

/// Exact optimum of `objective · x` over the system.
pub fn lp_optimize(
    sys: &LinearSystem,
    objective: &[Rational],
    sense: Sense,
) -> Result<OptimizationResult, LinearError> {
    sys.validate()?;
    if objective.len() != sys.num_vars {
        return Err(LinearError::MalformedSystem(format!(
            "objective has {} entries, expected {}",
            objective.len(),
            sys.num_vars
        )));
    }
    let sf = standard_form(sys);
    let mut tab = match phase_one(sys, &sf) {
        PhaseOne::Feasible(tab) => tab,
        PhaseOne::Infeasible(farkas) => return Ok(OptimizationResult::Infeasible { farkas }),
    };
    drive_out_artificials(&mut tab);

    let n = tab.n_struct;
    let mut cost: RVector = sf
        .columns
        .iter()
        .map(|col| {
            let c = match *col {
                Column::Pos(j) => objective[j].clone(),
                Column::Neg(j) => -objective[j].clone(),
                Column::Slack => Rational::zero(),
            };
            match sense {
                Sense::Minimize => c,
                Sense::Maximize => -c,
            }
        })
        .collect();
    cost.extend(std::iter::repeat_n(Rational::zero(), sf.a.len()));
    tab.set_costs(&cost);
    if !tab.run(n) {
        return Ok(OptimizationResult::Unbounded);
    }
    let x = recover(sys, &sf, &tab.values());
    let value = crate::rational::dot(objective, &x);
    Ok(OptimizationResult::Optimal { value, argmin: x })
}
