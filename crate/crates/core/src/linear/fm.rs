//! Fourier–Motzkin projection over exact rationals.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};

use super::{LinearError, LinearSystem, Row};
use crate::rational::{max_abs, Rational};

pub const DEFAULT_FM_CAP: usize = 10_000;

/// Projects `var` out of `sys`. The result has `num_vars − 1` variables
/// (indices above `var` shift down by one) and is satisfiable iff `sys` is.
pub fn fourier_motzkin_eliminate(
    sys: &LinearSystem,
    var: usize,
) -> Result<LinearSystem, LinearError> {
    fourier_motzkin_eliminate_with_cap(sys, var, DEFAULT_FM_CAP)
}

pub fn fourier_motzkin_eliminate_with_cap(
    sys: &LinearSystem,
    var: usize,
    cap: usize,
) -> Result<LinearSystem, LinearError> {
    sys.validate()?;
    if var >= sys.num_vars {
        return Err(LinearError::MalformedSystem(format!(
            "cannot eliminate variable {var} of {}",
            sys.num_vars
        )));
    }

    let mut inequalities: Vec<Row> = sys.inequalities.clone();
    if sys.nonneg_vars.contains(&var) {
        inequalities.push(unit_lower_bound(sys.num_vars, var));
    }

    let pivot = sys.equalities.iter().position(|r| !r.coeffs[var].is_zero());
    let (equalities, inequalities) = match pivot {
        Some(p) => {
            // Pivot the equality out: x_var = (rhs − Σ others) / c.
            let c = sys.equalities[p].coeffs[var].clone();
            let e = scale(&sys.equalities[p], &(Rational::one() / c));
            let eqs = sys
                .equalities
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != p)
                .map(|(_, r)| substitute(r, &e, var))
                .collect();
            let ineqs = inequalities
                .iter()
                .map(|r| substitute(r, &e, var))
                .collect();
            (eqs, ineqs)
        }
        None => {
            let mut kept = Vec::new();
            let mut upper = Vec::new();
            let mut lower = Vec::new();
            for r in inequalities {
                if r.coeffs[var].is_positive() {
                    upper.push(r);
                } else if r.coeffs[var].is_negative() {
                    lower.push(r);
                } else {
                    kept.push(r);
                }
            }
            let total = kept.len() + upper.len() * lower.len();
            if total > cap {
                return Err(LinearError::CapExceeded { count: total, cap });
            }
            for u in &upper {
                for l in &lower {
                    kept.push(combine(u, l, var));
                }
            }
            (sys.equalities.clone(), kept)
        }
    };

    let drop_col = |r: Row| -> Row {
        let mut coeffs = r.coeffs;
        coeffs.remove(var);
        Row::new(coeffs, r.rhs)
    };
    let out = LinearSystem {
        num_vars: sys.num_vars - 1,
        equalities: prune_equalities(equalities.into_iter().map(drop_col).collect()),
        inequalities: prune_inequalities(inequalities.into_iter().map(drop_col).collect()),
        nonneg_vars: sys
            .nonneg_vars
            .iter()
            .filter(|&&j| j != var)
            .map(|&j| if j > var { j - 1 } else { j })
            .collect(),
    };
    if out.inequalities.len() > cap {
        return Err(LinearError::CapExceeded {
            count: out.inequalities.len(),
            cap,
        });
    }
    Ok(out)
}

/// Eliminates every variable and reads off the verdict from the remaining
/// constant constraints.
pub fn fm_decide(sys: &LinearSystem, cap: usize) -> Result<bool, LinearError> {
    let mut cur = sys.clone();
    cur.validate()?;
    while cur.num_vars > 0 {
        cur = fourier_motzkin_eliminate_with_cap(&cur, 0, cap)?;
    }
    Ok(cur.equalities.iter().all(|r| r.rhs.is_zero())
        && cur.inequalities.iter().all(|r| !r.rhs.is_negative()))
}

fn unit_lower_bound(n: usize, var: usize) -> Row {
    let mut coeffs = vec![Rational::zero(); n];
    coeffs[var] = -Rational::one();
    Row::new(coeffs, Rational::zero())
}

fn scale(r: &Row, f: &Rational) -> Row {
    Row::new(r.coeffs.iter().map(|c| c * f).collect(), &r.rhs * f)
}

/// `r − r[var] · e`, where `e[var] = 1`.
fn substitute(r: &Row, e: &Row, var: usize) -> Row {
    let d = &r.coeffs[var];
    if d.is_zero() {
        return r.clone();
    }
    Row::new(
        r.coeffs
            .iter()
            .zip(&e.coeffs)
            .map(|(a, b)| a - d * b)
            .collect(),
        &r.rhs - d * &e.rhs,
    )
}

/// Positive combination cancelling `var` between an upper and a lower bound.
fn combine(upper: &Row, lower: &Row, var: usize) -> Row {
    let fu = -lower.coeffs[var].clone();
    let fl = upper.coeffs[var].clone();
    Row::new(
        upper
            .coeffs
            .iter()
            .zip(&lower.coeffs)
            .map(|(a, b)| a * &fu + b * &fl)
            .collect(),
        &upper.rhs * &fu + &lower.rhs * &fl,
    )
}

/// Scales to max |coeff| = 1 (positive factor), drops `0 ≤ nonneg` rows and
/// keeps only the tightest row among those with identical coefficients.
fn prune_inequalities(rows: Vec<Row>) -> Vec<Row> {
    let mut best: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut out: Vec<Row> = Vec::new();
    let mut contradiction = false;
    for r in rows {
        let m = max_abs(&r.coeffs);
        if m.is_zero() {
            if r.rhs.is_negative() && !contradiction {
                contradiction = true;
                out.push(Row::new(r.coeffs, -Rational::one()));
            }
            continue;
        }
        let r = scale(&r, &(Rational::one() / m));
        match best.get(&r.coeffs) {
            Some(&i) => {
                if r.rhs < out[i].rhs {
                    out[i].rhs = r.rhs;
                }
            }
            None => {
                best.insert(r.coeffs.clone(), out.len());
                out.push(r);
            }
        }
    }
    out
}

fn prune_equalities(rows: Vec<Row>) -> Vec<Row> {
    let mut out: Vec<Row> = Vec::new();
    for r in rows {
        if r.coeffs.iter().all(Zero::is_zero) && r.rhs.is_zero() {
            continue;
        }
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}
