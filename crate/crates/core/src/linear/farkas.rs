use num_traits::{Signed, Zero};

use super::LinearSystem;
use crate::rational::Rational;

/// Checks a Farkas certificate against `sys`.
///
/// `cert` holds one multiplier per constraint in the system's canonical
/// order (equalities, inequalities, nonnegativity rows). Equality
/// multipliers are unrestricted, the rest must be `≥ 0`. The certificate is
/// valid iff the weighted sum of all rows has zero coefficients and a
/// negative right-hand side, i.e. it derives `0 ≤ negative`.
pub fn verify_farkas(sys: &LinearSystem, cert: &[Rational]) -> bool {
    if sys.validate().is_err() || cert.len() != sys.num_constraints() {
        return false;
    }
    let n_eq = sys.equalities.len();
    let n_in = sys.inequalities.len();
    if cert[n_eq..].iter().any(|m| m.is_negative()) {
        return false;
    }

    let mut combined = vec![Rational::zero(); sys.num_vars];
    let mut rhs = Rational::zero();
    let rows = sys.equalities.iter().chain(&sys.inequalities);
    for (row, m) in rows.zip(cert) {
        if m.is_zero() {
            continue;
        }
        for (acc, c) in combined.iter_mut().zip(&row.coeffs) {
            *acc += m * c;
        }
        rhs += m * &row.rhs;
    }
    for (&j, m) in sys.nonneg_vars.iter().zip(&cert[n_eq + n_in..]) {
        combined[j] -= m;
    }
    combined.iter().all(Zero::is_zero) && rhs.is_negative()
}
