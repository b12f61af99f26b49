//! Numerical estimates of the average-error AVC capacity.
//!
//! The capacity is zero exactly when the channel is symmetrizable, and that
//! branch is decided exactly. Otherwise it equals `min_q C(W_q)` over state
//! distributions `q`, estimated here in `f64` with explicit brackets. This is
//! the only module in the crate that uses floating point; nothing in it feeds
//! back into a decision.

use num_traits::ToPrimitive;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::Avc;
use crate::symmetrize::is_symmetrizable;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

const ROW_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("not a stochastic table: {0}")]
    NonStochastic(String),
    #[error("tolerance must be finite and > 0, got {0}")]
    InvalidTolerance(f64),
    #[error("iteration limit reached with bracket [{}, {}]", .best.lower, .best.upper)]
    MaxIterExceeded { best: BaResult },
    #[error(
        "tolerance not reached: bracket [{}, {}]",
        .best.lower_bound,
        .best.upper_bound
    )]
    ToleranceNotReached { best: CapacityEstimate },
}

/// Result of Blahut–Arimoto on a single DMC.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaResult {
    /// Midpoint of the final bracket.
    pub capacity: f64,
    /// Capacity-achieving input distribution estimate.
    pub p: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub argmin_q: Vec<f64>,
    pub opt_input_p: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CapacityOutcome {
    ExactZero,
    Estimate(CapacityEstimate),
}

fn check_tol(tol: f64) -> Result<(), CapacityError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CapacityError::InvalidTolerance(tol))
    }
}

fn check_stochastic(w: &[Vec<f64>]) -> Result<usize, CapacityError> {
    let ny = w.first().map(Vec::len).unwrap_or(0);
    if ny == 0 {
        return Err(CapacityError::NonStochastic("empty table".into()));
    }
    for (x, row) in w.iter().enumerate() {
        if row.len() != ny {
            return Err(CapacityError::NonStochastic(format!(
                "row {x} has length {}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CapacityError::NonStochastic(format!(
                "row {x} has a negative or non-finite entry"
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_SLACK {
            return Err(CapacityError::NonStochastic(format!("row {x} sums to {s}")));
        }
    }
    Ok(ny)
}

fn output_dist(w: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; w[0].len()];
    for (row, px) in w.iter().zip(p) {
        for (ry, wy) in r.iter_mut().zip(row) {
            *ry += px * wy;
        }
    }
    r
}

/// `D(W(·|x) ‖ r)` in bits for every input; `0·log 0 = 0`.
fn divergences(w: &[Vec<f64>], r: &[f64]) -> Vec<f64> {
    w.iter()
        .map(|row| {
            row.iter()
                .zip(r)
                .filter(|(wy, _)| **wy > 0.0)
                .map(|(wy, ry)| wy * (wy / ry).log2())
                .sum()
        })
        .collect()
}

fn max_divergence(w: &[Vec<f64>], r: &[f64]) -> f64 {
    w.iter().fold(f64::NEG_INFINITY, |m, row| {
        let d: f64 = row
            .iter()
            .zip(r)
            .filter(|(wy, _)| **wy > 0.0)
            .map(|(wy, ry)| wy * (wy / ry).log2())
            .sum();
        m.max(d)
    })
}

/// `I(p; W)` in bits.
pub fn mutual_information(w: &[Vec<f64>], p: &[f64]) -> f64 {
    let r = output_dist(w, p);
    divergences(w, &r).iter().zip(p).map(|(d, px)| px * d).sum()
}

/// Blahut–Arimoto for the capacity of the DMC `w` (rows are inputs).
pub fn blahut_arimoto(
    w: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<BaResult, CapacityError> {
    blahut_arimoto_with_observer(w, tol, max_iter, |_, _, _| {})
}

/// As [`blahut_arimoto`], calling `observe(iteration, lower, upper)` after
/// every iteration.
pub fn blahut_arimoto_with_observer(
    w: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
    observe: impl FnMut(usize, f64, f64),
) -> Result<BaResult, CapacityError> {
    check_tol(tol)?;
    check_stochastic(w)?;
    let uniform = vec![1.0 / w.len() as f64; w.len()];
    run_ba(w, uniform, tol, max_iter, observe)
}

fn run_ba(
    w: &[Vec<f64>],
    mut p: Vec<f64>,
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(usize, f64, f64),
) -> Result<BaResult, CapacityError> {
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    let mut best_p = p.clone();
    for it in 1..=max_iter.max(1) {
        let r = output_dist(w, &p);
        let d = divergences(w, &r);
        // log2 Σ p 2^D ≤ C ≤ max D
        let dmax = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = p
            .iter()
            .zip(&d)
            .map(|(px, dx)| px * (dx - dmax).exp2())
            .collect();
        let z: f64 = weights.iter().sum();
        let il = dmax + z.log2();
        if il > lower {
            lower = il;
            best_p = p.clone();
        }
        upper = upper.min(dmax);
        lower = lower.min(upper);
        observe(it, lower, upper);
        if upper - lower <= tol {
            return Ok(BaResult {
                capacity: 0.5 * (lower + upper),
                p: best_p,
                lower,
                upper,
                iterations: it,
            });
        }
        p = weights.into_iter().map(|v| v / z).collect();
    }
    Err(CapacityError::MaxIterExceeded {
        best: BaResult {
            capacity: 0.5 * (lower + upper),
            p: best_p,
            lower,
            upper,
            iterations: max_iter,
        },
    })
}

/// Capacity of the averaged channel, tolerating an iteration cutoff (its
/// bounds remain valid).
fn ba_bounds(w: &[Vec<f64>], p0: Vec<f64>, tol: f64, max_iter: usize) -> BaResult {
    match run_ba(w, p0, tol, max_iter, |_, _, _| {}) {
        Ok(r) => r,
        Err(CapacityError::MaxIterExceeded { best }) => best,
        Err(e) => unreachable!("validated input: {e}"),
    }
}

/// Per-state table `w[s][x][y]` in `f64`.
fn state_tables(w: &Avc) -> Vec<Vec<Vec<f64>>> {
    let d = w.dims();
    (0..d.ns)
        .map(|s| {
            (0..d.nx)
                .map(|x| {
                    w.row(x, s)
                        .iter()
                        .map(|v| v.to_f64().expect("finite rational"))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn average(tables: &[Vec<Vec<f64>>], q: &[f64]) -> Vec<Vec<f64>> {
    let nx = tables[0].len();
    let ny = tables[0][0].len();
    let mut out = vec![vec![0.0; ny]; nx];
    for (t, qs) in tables.iter().zip(q) {
        for (orow, trow) in out.iter_mut().zip(t) {
            for (o, v) in orow.iter_mut().zip(trow) {
                *o += qs * v;
            }
        }
    }
    out
}

/// Gradient in `q` of `I(p; W_q)`:
/// `g_s = Σ_x p(x) Σ_y W(y|x,s) log2(W_q(y|x) / (pW_q)(y))`.
///
/// Outputs with `(pW_q)(y) = 0` are skipped. Along any feasible direction
/// their contribution is a nonnegative perspective term, so the result is
/// still a valid linear under-estimator at boundary points.
fn info_gradient(tables: &[Vec<Vec<f64>>], wq: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let r = output_dist(wq, p);
    tables
        .iter()
        .map(|t| {
            let mut g = 0.0;
            for ((trow, qrow), px) in t.iter().zip(wq).zip(p) {
                if *px == 0.0 {
                    continue;
                }
                for ((wy, qy), ry) in trow.iter().zip(qrow).zip(&r) {
                    if *wy > 0.0 && *ry > 0.0 {
                        if *qy == 0.0 {
                            return f64::NEG_INFINITY;
                        }
                        g += px * wy * (qy / ry).log2();
                    }
                }
            }
            g
        })
        .collect()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let out: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let s: f64 = out.iter().sum();
    out.into_iter().map(|x| x / s).collect()
}

/// Golden-section search for the minimum of a convex function on `[lo, hi]`.
fn golden_min(mut lo: f64, mut hi: f64, iters: usize, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    let ends = [(lo, f(lo)), (hi, f(hi)), (a, fa), (b, fb)];
    ends.into_iter().fold((f64::NAN, f64::INFINITY), |best, c| {
        if c.1 < best.1 {
            c
        } else {
            best
        }
    })
}

/// Minimizes a convex `f` over the simplex on `n` coordinates.
///
/// Writes points as `(a, (1 − a)·v)` with `v` in the smaller simplex. The
/// partial minimum over `v` is convex in `a`, so nested golden-section
/// searches are exact up to resolution. The first coordinate is bracketed
/// by a parallel grid at resolution 1/8 when `top` is set.
fn simplex_min(
    n: usize,
    iters: usize,
    top: bool,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> (Vec<f64>, f64) {
    if n == 1 {
        return (vec![1.0], f(&[1.0]));
    }
    let embed = |a: f64, v: &[f64]| {
        let mut q = Vec::with_capacity(n);
        q.push(a);
        q.extend(v.iter().map(|x| (1.0 - a) * x));
        q
    };
    let inner = |a: f64| simplex_min(n - 1, iters, false, &|v: &[f64]| f(&embed(a, v)));
    let (lo, hi, iters_here) = if top {
        const GRID: usize = 8;
        let vals: Vec<f64> = (0..=GRID)
            .into_par_iter()
            .map(|k| inner(k as f64 / GRID as f64).1)
            .collect();
        let k = (0..=GRID).fold(0, |b, k| if vals[k] < vals[b] { k } else { b });
        let lo = k.saturating_sub(1) as f64 / GRID as f64;
        let hi = (k + 1).min(GRID) as f64 / GRID as f64;
        (lo, hi, iters.saturating_sub(3))
    } else {
        (0.0, 1.0, iters)
    };
    let (a, _) = golden_min(lo, hi, iters_here, &|a| inner(a).1);
    let (v, val) = inner(a);
    (embed(a, &v), val)
}

/// Golden-section iterations per nesting level for a target accuracy.
fn level_iters(tol: f64) -> usize {
    // bracket shrinks by 0.618 per iteration
    ((tol / 16.0).ln() / 0.618_033_988_749_894_9f64.ln())
        .ceil()
        .clamp(8.0, 48.0) as usize
}

/// Largest alphabet searched directly by nested golden section; larger
/// ones fall back to iterative inner solvers.
const NESTED_MAX: usize = 3;

/// Valid upper bound on `C(W_q)`: `max_x D(W_q(·|x) ‖ r)` for the best
/// output distribution `r` found.
fn upper_at(
    tables: &[Vec<Vec<f64>>],
    q: &[f64],
    tol: f64,
    iters: usize,
    max_iter: usize,
    work: &AtomicUsize,
) -> f64 {
    let wq = average(tables, q);
    let ny = wq[0].len();
    if ny <= NESTED_MAX {
        let (_, v) = simplex_min(ny, iters, false, &|r: &[f64]| {
            work.fetch_add(1, Ordering::Relaxed);
            max_divergence(&wq, r)
        });
        v
    } else {
        let r = ba_bounds(&wq, vec![1.0 / wq.len() as f64; wq.len()], tol, max_iter);
        work.fetch_add(r.iterations, Ordering::Relaxed);
        r.upper
    }
}

/// Certified lower bound on `min_q I(p; W_q)`, by convexity in q:
/// `min_q I(p; W_q) ≥ I(p; W_q̂) + min_s g_s − g·q̂` at any `q̂`.
fn certify_at(tables: &[Vec<Vec<f64>>], p: &[f64], q: &[f64]) -> Option<f64> {
    let wq = average(tables, q);
    let grad = info_gradient(tables, &wq, p);
    if !grad.iter().all(|g| g.is_finite()) {
        return None;
    }
    let gq: f64 = grad.iter().zip(q).map(|(g, qs)| g * qs).sum();
    let gmin = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    Some(mutual_information(&wq, p) + gmin - gq)
}

fn lower_at(
    tables: &[Vec<Vec<f64>>],
    p: &[f64],
    tol: f64,
    iters: usize,
    work: &AtomicUsize,
) -> f64 {
    let ns = tables.len();
    if ns <= NESTED_MAX {
        let (q, v) = simplex_min(ns, iters, false, &|q: &[f64]| {
            work.fetch_add(1, Ordering::Relaxed);
            mutual_information(&average(tables, q), p)
        });
        // A minimizer on the boundary certifies poorly (outputs it never
        // produces drop out of the gradient), so also certify at a point
        // pulled slightly into the interior.
        let inner: Vec<f64> = q
            .iter()
            .map(|x| (1.0 - 1e-10) * x + 1e-10 / ns as f64)
            .collect();
        let best = [certify_at(tables, p, &q), certify_at(tables, p, &inner)]
            .into_iter()
            .flatten()
            .fold(f64::NEG_INFINITY, f64::max);
        if best.is_finite() {
            return best.min(v).max(0.0);
        }
    }
    min_info_lower(tables, p, tol, work).max(0.0)
}

/// Projected gradient descent on `q ↦ I(p; W_q)`, keeping the best
/// certificate seen.
fn min_info_lower(tables: &[Vec<Vec<f64>>], p: &[f64], tol: f64, work: &AtomicUsize) -> f64 {
    let ns = tables.len();
    let info = |q: &[f64]| {
        work.fetch_add(1, Ordering::Relaxed);
        mutual_information(&average(tables, q), p)
    };
    let mut q = vec![1.0 / ns as f64; ns];
    let mut val = info(&q);
    let mut cert = 0.0f64;
    let mut step = 1.0;
    for _ in 0..2_000 {
        if let Some(c) = certify_at(tables, p, &q) {
            cert = cert.max(c);
        }
        if val - cert <= tol {
            break;
        }
        let grad = info_gradient(tables, &average(tables, &q), p);
        let dir: Vec<f64> = grad.iter().map(|g| g.clamp(-1e3, 1e3)).collect();
        loop {
            let cand = project_simplex(
                &q.iter()
                    .zip(&dir)
                    .map(|(a, g)| a - step * g)
                    .collect::<Vec<_>>(),
            );
            let v = info(&cand);
            if v < val {
                q = cand;
                val = v;
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return cert.min(val);
            }
        }
    }
    cert.min(val)
}

/// Average-error capacity estimate with the default iteration limit.
pub fn avc_capacity_avg(w: &Avc, tol: f64) -> Result<CapacityOutcome, CapacityError> {
    avc_capacity_avg_with(w, tol, DEFAULT_MAX_ITER)
}

/// `0` exactly when `w` is symmetrizable, else `min_q C(W_q)` bracketed
/// within `tol`.
///
/// The capacity is the saddle value of `I(p; W_q)`, concave in p and convex
/// in q. The upper bound minimizes an upper bound of `C(W_q)` over q; the
/// lower bound maximizes a certified lower bound of `min_q I(p; W_q)` over
/// p. Both outer searches are grid-seeded nested golden-section searches.
/// `max_iter` bounds the Blahut–Arimoto fallback used for large output
/// alphabets.
pub fn avc_capacity_avg_with(
    w: &Avc,
    tol: f64,
    max_iter: usize,
) -> Result<CapacityOutcome, CapacityError> {
    check_tol(tol)?;
    if is_symmetrizable(w).is_symmetrizable() {
        return Ok(CapacityOutcome::ExactZero);
    }
    let tables = state_tables(w);
    let (nx, ns) = (tables[0].len(), tables.len());
    let inner_tol = tol / 8.0;
    let iters = level_iters(tol);
    let work = AtomicUsize::new(0);

    let (argmin_q, upper) = simplex_min(ns, iters, true, &|q: &[f64]| {
        upper_at(&tables, q, inner_tol, iters, max_iter, &work)
    });
    let (opt_input_p, neg_lower) = simplex_min(nx, iters, true, &|p: &[f64]| {
        -lower_at(&tables, p, inner_tol, iters, &work)
    });
    let lower = (-neg_lower).clamp(0.0, upper);
    let est = CapacityEstimate {
        value: 0.5 * (lower + upper),
        lower_bound: lower,
        upper_bound: upper,
        argmin_q,
        opt_input_p,
        iterations: work.into_inner(),
    };
    if upper - lower <= tol {
        Ok(CapacityOutcome::Estimate(est))
    } else {
        Err(CapacityError::ToleranceNotReached { best: est })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::catalog;
    use crate::rational::rat;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn bsc(p: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
    }

    #[test]
    fn ba_trivial_channels() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = blahut_arimoto(&id, 1e-9, 1000).unwrap();
        assert!((r.capacity - 1.0).abs() < 1e-9);
        let flat = vec![vec![0.3, 0.7], vec![0.3, 0.7], vec![0.3, 0.7]];
        let r = blahut_arimoto(&flat, 1e-9, 1000).unwrap();
        assert!(r.capacity.abs() < 1e-9);
    }

    #[test]
    fn ba_bsc_closed_form() {
        for p in [0.1, 0.25] {
            let r = blahut_arimoto(&bsc(p), 1e-9, 10_000).unwrap();
            assert!((r.capacity - (1.0 - h2(p))).abs() < 1e-6);
            assert!(r.lower <= 1.0 - h2(p) + 1e-12 && 1.0 - h2(p) <= r.upper + 1e-12);
        }
    }

    #[test]
    fn ba_rejects_bad_tables() {
        assert!(matches!(
            blahut_arimoto(&[vec![0.5, 0.6]], 1e-6, 10),
            Err(CapacityError::NonStochastic(_))
        ));
        assert!(matches!(
            blahut_arimoto(&[vec![1.0], vec![1.0, 0.0]], 1e-6, 10),
            Err(CapacityError::NonStochastic(_))
        ));
        assert!(matches!(
            blahut_arimoto(&bsc(0.1), 0.0, 10),
            Err(CapacityError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn ba_iteration_limit_keeps_bracket() {
        let w = vec![
            vec![0.6, 0.3, 0.1],
            vec![0.1, 0.5, 0.4],
            vec![0.2, 0.2, 0.6],
        ];
        match blahut_arimoto(&w, 1e-15, 2) {
            Err(CapacityError::MaxIterExceeded { best }) => {
                assert!(best.lower <= best.upper);
                assert_eq!(best.iterations, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projection_and_nested_search() {
        let p = project_simplex(&[0.8, 0.8, -0.5]);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12 && p[2] == 0.0);
        let (q, v) = simplex_min(3, level_iters(1e-9), true, &|q: &[f64]| {
            (q[0] - 0.2).powi(2) + (q[1] - 0.3).powi(2) + (q[2] - 0.5).powi(2)
        });
        assert!(v < 1e-12 && (q[0] - 0.2).abs() < 1e-6 && (q[1] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn avc_examples() {
        assert_eq!(
            avc_capacity_avg(&catalog::xor(), 1e-6).unwrap(),
            CapacityOutcome::ExactZero
        );
        let cases = [
            (catalog::bsc(&rat(1, 10)), 1.0 - h2(0.1)),
            (catalog::bsc_states(&rat(1, 4), 2), 1.0 - h2(0.25)),
        ];
        for (w, expected) in cases {
            match avc_capacity_avg(&w, 1e-6).unwrap() {
                CapacityOutcome::Estimate(e) => {
                    assert!(
                        (e.value - expected).abs() < 1e-6,
                        "{} vs {expected}",
                        e.value
                    );
                    assert!(e.upper_bound - e.lower_bound <= 1e-6);
                }
                CapacityOutcome::ExactZero => panic!("not symmetrizable"),
            }
        }
    }
}
