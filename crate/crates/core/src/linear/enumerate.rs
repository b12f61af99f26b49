//! Brute-force basic-solution enumeration.
//!
//! Shares nothing with the simplex code beyond [`LinearSystem`]: it builds
//! its own standard form, reduces the equality rows to full rank and then
//! tries every column subset of that size as a basis. A nonempty polyhedron
//! in standard form always has a basic feasible solution, so the verdict is
//! exact.

use num_traits::{Signed, Zero};

use super::{FeasibilityResult, LinearError, LinearSystem};
use crate::rational::{RVector, Rational};

pub const ORACLE_MAX_VARS: usize = 12;
const MAX_SUBSETS: u128 = 2_000_000;

struct Standard {
    /// For each column: (original variable, sign) or None for a slack.
    origin: Vec<Option<(usize, bool)>>,
    a: Vec<RVector>,
    b: RVector,
}

fn to_standard(sys: &LinearSystem) -> Standard {
    let mut origin = Vec::new();
    for j in 0..sys.num_vars {
        origin.push(Some((j, true)));
        if !sys.nonneg_vars.contains(&j) {
            origin.push(Some((j, false)));
        }
    }
    let n_slack = sys.inequalities.len();
    origin.extend(std::iter::repeat_n(None, n_slack));
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, row) in sys.equalities.iter().chain(&sys.inequalities).enumerate() {
        let mut r = Vec::with_capacity(origin.len());
        for o in &origin {
            r.push(match o {
                Some((j, true)) => row.coeffs[*j].clone(),
                Some((j, false)) => -row.coeffs[*j].clone(),
                None => Rational::zero(),
            });
        }
        if i >= sys.equalities.len() {
            let k = i - sys.equalities.len();
            let col = origin.len() - n_slack + k;
            r[col] = Rational::from_integer(1.into());
        }
        a.push(r);
        b.push(row.rhs.clone());
    }
    Standard { origin, a, b }
}

/// Row-reduces `[a | b]`; returns the independent rows or `None` when the
/// rows are inconsistent.
fn independent_rows(a: &[RVector], b: &[Rational]) -> Option<(Vec<RVector>, RVector)> {
    let mut m: Vec<RVector> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let piv = m[rank][col].clone();
        m[rank].iter_mut().for_each(|v| *v /= &piv);
        let prow = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let f = row[col].clone();
                row.iter_mut().zip(&prow).for_each(|(v, p)| *v -= &f * p);
            }
        }
        rank += 1;
    }
    if m[rank..].iter().any(|r| !r[ncols].is_zero()) {
        return None;
    }
    m.truncate(rank);
    let rhs = m.iter_mut().map(|r| r.pop().unwrap()).collect();
    Some((m, rhs))
}

/// Solves the square system `a x = b`; `None` if singular.
fn solve_square(mut a: Vec<RVector>, mut b: RVector) -> Option<RVector> {
    let n = a.len();
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        let piv = a[col][col].clone();
        a[col].iter_mut().for_each(|v| *v /= &piv);
        b[col] /= &piv;
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                let prow = a[col].clone();
                a[i].iter_mut().zip(&prow).for_each(|(v, p)| *v -= &f * p);
                let bc = b[col].clone();
                b[i] -= &f * bc;
            }
        }
    }
    Some(b)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Visits every basic feasible solution (mapped back to the original
/// variables) until `visit` returns false.
fn for_each_bfs(
    sys: &LinearSystem,
    mut visit: impl FnMut(RVector) -> bool,
) -> Result<(), LinearError> {
    sys.validate()?;
    if sys.num_vars > ORACLE_MAX_VARS {
        return Err(LinearError::TooLarge(format!(
            "{} variables (limit {ORACLE_MAX_VARS})",
            sys.num_vars
        )));
    }
    let st = to_standard(sys);
    let n = st.origin.len();
    let Some((a, b)) = independent_rows(&st.a, &st.b) else {
        return Ok(());
    };
    let r = a.len();
    let subsets = binomial(n, r);
    if subsets > MAX_SUBSETS {
        return Err(LinearError::TooLarge(format!("{subsets} candidate bases")));
    }
    let map_back = |cols: &[usize], vals: &[Rational]| -> RVector {
        let mut x = vec![Rational::zero(); sys.num_vars];
        for (&c, v) in cols.iter().zip(vals) {
            match st.origin[c] {
                Some((j, true)) => x[j] += v,
                Some((j, false)) => x[j] -= v,
                None => {}
            }
        }
        x
    };
    if r == 0 {
        visit(vec![Rational::zero(); sys.num_vars]);
        return Ok(());
    }
    let mut cols: Vec<usize> = (0..r).collect();
    loop {
        let sub: Vec<RVector> = a
            .iter()
            .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        if let Some(xb) = solve_square(sub, b.clone()) {
            if xb.iter().all(|v| !v.is_negative()) && !visit(map_back(&cols, &xb)) {
                return Ok(());
            }
        }
        if !next_combination(&mut cols, n) {
            return Ok(());
        }
    }
}

/// Feasibility by exhaustive basis enumeration (independent test oracle).
pub fn enumerate_basic_feasible(sys: &LinearSystem) -> Result<FeasibilityResult, LinearError> {
    let mut found = None;
    for_each_bfs(sys, |x| {
        found = Some(x);
        false
    })?;
    Ok(match found {
        Some(witness) => FeasibilityResult::Feasible { witness },
        None => FeasibilityResult::Infeasible { farkas: None },
    })
}

/// All distinct vertices of the polyhedron, in enumeration order.
pub fn enumerate_vertices(sys: &LinearSystem) -> Result<Vec<RVector>, LinearError> {
    let mut out: Vec<RVector> = Vec::new();
    for_each_bfs(sys, |x| {
        if !out.contains(&x) {
            out.push(x);
        }
        true
    })?;
    Ok(out)
}
