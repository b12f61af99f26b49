//! Compiles symmetrizability at fixed dimensions into a BSS program.
//!
//! The program reads `t = vectorize(W)` and runs an unrolled
//! Fourier–Motzkin elimination of the symmetrizer variables. Coefficients
//! that depend on `t` have unknown sign at compile time, so each one gets a
//! small branch diamond that stores its sign `σ ∈ {−1, 0, 1}` in a cell and
//! rejoins. Every candidate pair of rows is then combined arithmetically,
//! multiplied by the indicator `[σ_i σ_j = −1] = ρ(ρ − 1)/2` with
//! `ρ = σ_i σ_j`, so the program shape does not depend on the input. Rows
//! that become constant are checked on the spot; any negative right-hand
//! side rejects.
//!
//! Only ring operations are used. Values known at compile time are folded,
//! and the stochastic constraints (constant coefficients) are pivoted out
//! before elimination starts. Pairs whose combined history exceeds `k + 1`
//! original rows after `k` eliminations are skipped (Chernikov's rule).

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::program::{BinOp, BssNode, BssProgram, Expr, NodeKind};
use crate::channel::Dims;
use crate::rational::{int, rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileCaps {
    /// Largest allowed `nx·ns·ny`.
    pub max_product: usize,
    /// Largest number of rows alive after any elimination step.
    pub max_rows: usize,
    pub max_nodes: usize,
}

impl Default for CompileCaps {
    fn default() -> Self {
        Self {
            max_product: 24,
            max_rows: 20_000,
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompileMode {
    /// Always halts; outputs 1 or 0.
    Decide,
    /// Halts with output 1 when the answer is positive and loops otherwise.
    SemiDecide,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("dimensions ({}, {}, {}) exceed the compile cap: {reason}", .dims.nx, .dims.ns, .dims.ny)]
    CapExceeded { dims: Dims, reason: String },
}

/// Cell index holding the answer (the head never moves).
const OUT_CELL: i64 = -1;
const REJECT: usize = 1;
const BODY: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Val {
    Const(Rational),
    Cell(i64),
}

impl Val {
    fn zero() -> Self {
        Val::Const(Rational::zero())
    }

    fn is_zero(&self) -> bool {
        matches!(self, Val::Const(c) if c.is_zero())
    }
}

/// Signs a value can take, as known at compile time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Class {
    neg: bool,
    zero: bool,
    pos: bool,
}

impl Class {
    const ANY: Class = Class {
        neg: true,
        zero: true,
        pos: true,
    };
    const NONNEG: Class = Class {
        neg: false,
        zero: true,
        pos: true,
    };

    fn of(c: &Rational) -> Class {
        Class {
            neg: c.is_negative(),
            zero: c.is_zero(),
            pos: c.is_positive(),
        }
    }

    fn times(self, o: Class) -> Class {
        Class {
            neg: (self.neg && o.pos) || (self.pos && o.neg),
            zero: self.zero || o.zero,
            pos: (self.pos && o.pos) || (self.neg && o.neg),
        }
    }

    fn plus(self, o: Class) -> Class {
        let neg = self.neg || o.neg;
        let pos = self.pos || o.pos;
        Class {
            neg,
            pos,
            zero: (self.zero && o.zero) || (neg && pos),
        }
    }

    /// The single sign this class allows, if any.
    fn definite(self) -> Option<i64> {
        match (self.neg, self.zero, self.pos) {
            (true, false, false) => Some(-1),
            (false, true, false) => Some(0),
            (false, false, true) => Some(1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Row {
    /// `Σ coeffs[k] v_k ≤ rhs`
    coeffs: Vec<Val>,
    rhs: Val,
    history: u128,
    /// Rows split from the same equality, `(equality, orientation)`, as long
    /// as they have not been combined with anything.
    twin: Option<(usize, bool)>,
}

struct Emitter {
    dims: Dims,
    caps: CompileCaps,
    nodes: Vec<NodeKind>,
    next_cell: i64,
    signs: HashMap<i64, Val>,
    classes: HashMap<i64, Class>,
    always_rejects: bool,
}

impl Emitter {
    fn new(dims: Dims, caps: CompileCaps, mode: CompileMode) -> Self {
        let reject = match mode {
            CompileMode::Decide => NodeKind::Computation {
                target: OUT_CELL,
                expr: Expr::Lit(Rational::zero()),
                next: usize::MAX,
            },
            CompileMode::SemiDecide => NodeKind::Branch {
                expr: Expr::Lit(Rational::zero()),
                if_nonneg: REJECT,
                if_neg: REJECT,
            },
        };
        Self {
            dims,
            caps,
            nodes: vec![NodeKind::Input { next: BODY }, reject],
            next_cell: dims.channel_len() as i64,
            signs: HashMap::new(),
            // the inputs are channel entries in [0, 1]
            classes: (0..dims.channel_len() as i64)
                .map(|i| (i, Class::NONNEG))
                .collect(),
            always_rejects: false,
        }
    }

    fn cap(&self, reason: String) -> CompileError {
        CompileError::CapExceeded {
            dims: self.dims,
            reason,
        }
    }

    fn push(&mut self, kind: NodeKind) -> Result<(), CompileError> {
        if self.nodes.len() >= self.caps.max_nodes {
            return Err(self.cap(format!("more than {} nodes", self.caps.max_nodes)));
        }
        self.nodes.push(kind);
        Ok(())
    }

    fn here(&self) -> usize {
        self.nodes.len()
    }

    fn class(&self, v: &Val) -> Class {
        match v {
            Val::Const(c) => Class::of(c),
            Val::Cell(i) => self.classes.get(i).copied().unwrap_or(Class::ANY),
        }
    }

    /// Narrows the class of `v` with facts the class arithmetic cannot see
    /// (squares, `σ(a)·a`).
    fn assume(&mut self, v: &Val, known: Class) {
        if let Val::Cell(i) = v {
            let c = self.class(v);
            self.classes.insert(
                *i,
                Class {
                    neg: c.neg && known.neg,
                    zero: c.zero && known.zero,
                    pos: c.pos && known.pos,
                },
            );
        }
    }

    fn fresh(&mut self) -> i64 {
        self.next_cell += 1;
        self.next_cell - 1
    }

    /// `Σ coef · a · b` as a single value, folding constants.
    fn sum_of_products(&mut self, terms: &[(Rational, &Val, &Val)]) -> Result<Val, CompileError> {
        let mut constant = Rational::zero();
        let mut parts: Vec<(Rational, Vec<i64>)> = Vec::new();
        for (coef, a, b) in terms {
            let mut c = coef.clone();
            let mut cells = Vec::new();
            for v in [a, b] {
                match v {
                    Val::Const(k) => c *= k,
                    Val::Cell(i) => cells.push(*i),
                }
            }
            if c.is_zero() {
                continue;
            }
            if cells.is_empty() {
                constant += c;
            } else {
                cells.sort_unstable();
                match parts.iter_mut().find(|(_, cs)| *cs == cells) {
                    Some((k, _)) => *k += c,
                    None => parts.push((c, cells)),
                }
            }
        }
        parts.retain(|(c, _)| !c.is_zero());
        let mut class = Class::of(&constant);
        for (c, cells) in &parts {
            let term = match cells.as_slice() {
                [a, b] if a == b => {
                    let k = self.class(&Val::Cell(*a));
                    Class {
                        neg: false,
                        zero: k.zero,
                        pos: k.neg || k.pos,
                    }
                }
                _ => cells.iter().fold(Class::of(&int(1)), |k, i| {
                    k.times(self.class(&Val::Cell(*i)))
                }),
            };
            class = class.plus(term.times(Class::of(c)));
        }
        if parts.is_empty() {
            return Ok(Val::Const(constant));
        }
        if constant.is_zero() && parts.len() == 1 && parts[0].0.is_one() && parts[0].1.len() == 1 {
            return Ok(Val::Cell(parts[0].1[0]));
        }
        let term_expr = |c: &Rational, cells: &[i64]| -> (bool, Expr) {
            let mut e = cells
                .iter()
                .map(|&i| Expr::Cell(i))
                .reduce(|a, b| Expr::bin(BinOp::Mul, a, b))
                .expect("nonempty");
            let mag = c.abs();
            if !mag.is_one() {
                e = Expr::bin(BinOp::Mul, Expr::Lit(mag), e);
            }
            (c.is_negative(), e)
        };
        let (neg0, first) = term_expr(&parts[0].0, &parts[0].1);
        let mut expr = if neg0 { Expr::negated(first) } else { first };
        for (c, cells) in &parts[1..] {
            let (neg, e) = term_expr(c, cells);
            expr = Expr::bin(if neg { BinOp::Sub } else { BinOp::Add }, expr, e);
        }
        if !constant.is_zero() {
            let op = if constant.is_negative() {
                BinOp::Sub
            } else {
                BinOp::Add
            };
            expr = Expr::bin(op, expr, Expr::Lit(constant.abs()));
        }
        let target = self.fresh();
        self.classes.insert(target, class);
        let next = self.here() + 1;
        self.push(NodeKind::Computation { target, expr, next })?;
        Ok(Val::Cell(target))
    }

    fn product(&mut self, a: &Val, b: &Val) -> Result<Val, CompileError> {
        self.sum_of_products(&[(Rational::one(), a, b)])
    }

    /// `σ(v) ∈ {−1, 0, 1}`, through a branch diamond for runtime values.
    fn sign(&mut self, v: &Val) -> Result<Val, CompileError> {
        let cell = match v {
            Val::Const(c) => {
                return Ok(Val::Const(if c.is_zero() {
                    Rational::zero()
                } else if c.is_positive() {
                    Rational::one()
                } else {
                    -Rational::one()
                }))
            }
            Val::Cell(i) => *i,
        };
        if let Some(k) = self.class(v).definite() {
            return Ok(Val::Const(int(k)));
        }
        if let Some(s) = self.signs.get(&cell) {
            return Ok(s.clone());
        }
        let s = self.fresh();
        let i0 = self.here();
        let join = i0 + 5;
        self.push(NodeKind::Branch {
            expr: Expr::Cell(cell),
            if_nonneg: i0 + 1,
            if_neg: i0 + 2,
        })?;
        self.push(NodeKind::Branch {
            expr: Expr::negated(Expr::Cell(cell)),
            if_nonneg: i0 + 3,
            if_neg: i0 + 4,
        })?;
        for value in [-1, 0, 1] {
            self.push(NodeKind::Computation {
                target: s,
                expr: Expr::Lit(int(value)),
                next: join,
            })?;
        }
        self.signs.insert(cell, Val::Cell(s));
        let c = self.class(v);
        self.classes.insert(s, c);
        Ok(Val::Cell(s))
    }

    /// Rejects unless `v ≥ 0`.
    fn require_nonneg(&mut self, v: &Val) -> Result<(), CompileError> {
        match v {
            Val::Const(c) if !c.is_negative() => Ok(()),
            Val::Const(_) => {
                self.always_rejects = true;
                let next = self.here() + 1;
                self.push(NodeKind::Branch {
                    expr: Expr::Lit(-Rational::one()),
                    if_nonneg: next,
                    if_neg: REJECT,
                })
            }
            Val::Cell(i) => {
                let next = self.here() + 1;
                self.push(NodeKind::Branch {
                    expr: Expr::Cell(*i),
                    if_nonneg: next,
                    if_neg: REJECT,
                })
            }
        }
    }

    /// Checks and drops constant rows, merges duplicates, enforces the cap.
    fn settle(&mut self, rows: Vec<Row>) -> Result<Vec<Row>, CompileError> {
        let mut out: Vec<Row> = Vec::new();
        let mut seen: HashMap<(Vec<Val>, Val), usize> = HashMap::new();
        for r in rows {
            if r.coeffs.iter().all(Val::is_zero) {
                self.require_nonneg(&r.rhs)?;
                continue;
            }
            match seen.get(&(r.coeffs.clone(), r.rhs.clone())) {
                Some(&i) => {
                    if r.history.count_ones() < out[i].history.count_ones() {
                        out[i].history = r.history;
                    }
                    out[i].twin = None;
                }
                None => {
                    seen.insert((r.coeffs.clone(), r.rhs.clone()), out.len());
                    out.push(r);
                }
            }
        }
        if out.len() > self.caps.max_rows {
            return Err(self.cap(format!(
                "{} rows exceed the row cap {}",
                out.len(),
                self.caps.max_rows
            )));
        }
        Ok(out)
    }

    /// One Fourier–Motzkin step on variable 0; `k` counts eliminations
    /// including this one.
    fn eliminate(&mut self, rows: Vec<Row>, k: u32) -> Result<Vec<Row>, CompileError> {
        let mut sigma = Vec::with_capacity(rows.len());
        for r in &rows {
            sigma.push(self.sign(&r.coeffs[0])?);
        }
        let class: Vec<Class> = rows.iter().map(|r| self.class(&r.coeffs[0])).collect();
        let mut out = Vec::new();
        let one = Val::Const(Rational::one());
        for ((r, s), cls) in rows.iter().zip(&sigma).zip(&class) {
            let z = match s {
                Val::Const(c) if c.is_zero() => one.clone(),
                Val::Const(_) => continue,
                Val::Cell(_) if !cls.zero => continue,
                Val::Cell(_) => {
                    let z = self.sum_of_products(&[
                        (Rational::one(), &one, &one),
                        (-Rational::one(), s, s),
                    ])?;
                    self.assume(
                        &z,
                        Class {
                            neg: false,
                            zero: true,
                            pos: true,
                        },
                    );
                    z
                }
            };
            let mut coeffs = Vec::with_capacity(r.coeffs.len() - 1);
            for c in &r.coeffs[1..] {
                coeffs.push(self.product(&z, c)?);
            }
            let rhs = self.product(&z, &r.rhs)?;
            out.push(Row {
                coeffs,
                rhs,
                history: r.history,
                twin: r.twin,
            });
        }
        let mut abs = Vec::with_capacity(rows.len());
        for ((r, s), cls) in rows.iter().zip(&sigma).zip(&class) {
            let a = self.product(s, &r.coeffs[0])?;
            self.assume(
                &a,
                Class {
                    neg: false,
                    zero: cls.zero,
                    pos: true,
                },
            );
            abs.push(a);
        }
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let (ri, rj) = (&rows[i], &rows[j]);
                if let (Some((e1, o1)), Some((e2, o2))) = (ri.twin, rj.twin) {
                    if e1 == e2 && o1 != o2 {
                        continue;
                    }
                }
                let (ci, cj) = (class[i], class[j]);
                if !((ci.pos && cj.neg) || (ci.neg && cj.pos)) {
                    continue;
                }
                let history = ri.history | rj.history;
                if history.count_ones() > k + 1 {
                    continue;
                }
                let indicator = match (&sigma[i], &sigma[j]) {
                    (Val::Const(a), _) | (_, Val::Const(a)) if a.is_zero() => continue,
                    (Val::Const(a), Val::Const(b)) => {
                        if a == b {
                            continue;
                        }
                        one.clone()
                    }
                    (a, b) => {
                        let rho = self.product(a, b)?;
                        let c = self.sum_of_products(&[
                            (rat(1, 2), &rho, &rho),
                            (rat(-1, 2), &rho, &one),
                        ])?;
                        self.assume(&c, Class::NONNEG);
                        c
                    }
                };
                let wi = self.product(&indicator, &abs[j])?;
                let wj = self.product(&indicator, &abs[i])?;
                let mut coeffs = Vec::with_capacity(ri.coeffs.len() - 1);
                for c in 1..ri.coeffs.len() {
                    coeffs.push(self.sum_of_products(&[
                        (Rational::one(), &wi, &ri.coeffs[c]),
                        (Rational::one(), &wj, &rj.coeffs[c]),
                    ])?);
                }
                let rhs = self.sum_of_products(&[
                    (Rational::one(), &wi, &ri.rhs),
                    (Rational::one(), &wj, &rj.rhs),
                ])?;
                out.push(Row {
                    coeffs,
                    rhs,
                    history,
                    twin: None,
                });
                if out.len() > self.caps.max_rows {
                    return Err(self.cap(format!("more than {} rows", self.caps.max_rows)));
                }
            }
        }
        self.settle(out)
    }

    fn run_fm(&mut self, rows: Vec<Row>) -> Result<(), CompileError> {
        if rows.len() > 128 {
            return Err(self.cap(format!("{} initial rows (history limit 128)", rows.len())));
        }
        let mut rows = self.settle(rows)?;
        let nvars = rows.first().map_or(0, |r| r.coeffs.len());
        for k in 1..=nvars as u32 {
            if self.always_rejects || rows.is_empty() {
                break;
            }
            rows = self.eliminate(rows, k)?;
        }
        debug_assert!(self.always_rejects || rows.is_empty());
        Ok(())
    }

    fn finish(mut self) -> Result<BssProgram, CompileError> {
        let accept = self.here();
        self.push(NodeKind::Computation {
            target: OUT_CELL,
            expr: Expr::Lit(Rational::one()),
            next: accept + 1,
        })?;
        let halt = self.here();
        self.push(NodeKind::Output {
            first: OUT_CELL,
            last: OUT_CELL,
        })?;
        if let NodeKind::Computation { next, .. } = &mut self.nodes[REJECT] {
            *next = halt;
        }
        let nodes = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, kind)| BssNode {
                id: match i {
                    0 => "start".to_string(),
                    REJECT => "reject".to_string(),
                    _ if i == accept => "accept".to_string(),
                    _ if i == halt => "halt".to_string(),
                    _ => format!("n{i}"),
                },
                kind,
            })
            .collect();
        Ok(BssProgram::new(nodes).expect("compiler emits well-formed programs"))
    }
}

fn check_dims(dims: Dims, caps: &CompileCaps) -> Result<(), CompileError> {
    let product = dims.nx * dims.ns * dims.ny;
    if product > caps.max_product {
        return Err(CompileError::CapExceeded {
            dims,
            reason: format!("nx·ns·ny = {product} > {}", caps.max_product),
        });
    }
    Ok(())
}

fn t_cell(d: Dims, x: usize, s: usize, y: usize) -> Val {
    Val::Cell(d.t_index(x, s, y) as i64)
}

/// Pair equalities that are kept: all `y` but the last, which is implied by
/// the others and the stochastic constraints when `W` is a channel.
fn kept_pairs(d: Dims) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for x in 0..d.nx {
        for xh in x + 1..d.nx {
            for y in 0..d.ny.saturating_sub(1) {
                out.push((x, xh, y));
            }
        }
    }
    out
}

/// Decision program: outputs 1 iff the channel `t` (a valid channel of
/// dimensions `dims`) is symmetrizable.
pub fn compile_symmetrizability(
    dims: Dims,
    caps: &CompileCaps,
) -> Result<BssProgram, CompileError> {
    compile_symmetrizability_with(dims, caps, CompileMode::Decide)
}

pub fn compile_symmetrizability_with(
    dims: Dims,
    caps: &CompileCaps,
    mode: CompileMode,
) -> Result<BssProgram, CompileError> {
    check_dims(dims, caps)?;
    let d = dims;
    let mut em = Emitter::new(d, *caps, mode);
    // variables U(s|x) for s < ns − 1; the last state of each row is pivoted out
    let per_x = d.ns - 1;
    let nvars = d.nx * per_x;
    let var = |x: usize, s: usize| x * per_x + s;
    let one = Val::Const(Rational::one());
    let mut rows = Vec::new();
    let mut push = |coeffs: Vec<Val>, rhs: Val, twin| {
        let history = 1u128.checked_shl(rows.len() as u32).unwrap_or(0);
        rows.push(Row {
            coeffs,
            rhs,
            history,
            twin,
        })
    };
    for x in 0..d.nx {
        for s in 0..per_x {
            let mut c = vec![Val::zero(); nvars];
            c[var(x, s)] = Val::Const(-Rational::one());
            push(c, Val::zero(), None);
        }
        if per_x > 0 {
            let mut c = vec![Val::zero(); nvars];
            for s in 0..per_x {
                c[var(x, s)] = one.clone();
            }
            push(c, one.clone(), None);
        }
    }
    let last = d.ns - 1;
    for (e, (x, xh, y)) in kept_pairs(d).into_iter().enumerate() {
        // Σ_s W(y|x,s) U(s|x̂) − W(y|x̂,s) U(s|x) = 0 after substituting
        // U(last|·) = 1 − Σ_{s<last} U(s|·)
        let mut pos = vec![Val::zero(); nvars];
        let mut neg = vec![Val::zero(); nvars];
        for s in 0..per_x {
            let a = t_cell(d, x, s, y);
            let al = t_cell(d, x, last, y);
            let b = t_cell(d, xh, s, y);
            let bl = t_cell(d, xh, last, y);
            pos[var(xh, s)] = em.sum_of_products(&[(int(1), &a, &one), (int(-1), &al, &one)])?;
            neg[var(xh, s)] = em.sum_of_products(&[(int(-1), &a, &one), (int(1), &al, &one)])?;
            pos[var(x, s)] = em.sum_of_products(&[(int(-1), &b, &one), (int(1), &bl, &one)])?;
            neg[var(x, s)] = em.sum_of_products(&[(int(1), &b, &one), (int(-1), &bl, &one)])?;
        }
        let al = t_cell(d, x, last, y);
        let bl = t_cell(d, xh, last, y);
        let rhs = em.sum_of_products(&[(int(1), &bl, &one), (int(-1), &al, &one)])?;
        let nrhs = em.sum_of_products(&[(int(-1), &bl, &one), (int(1), &al, &one)])?;
        push(pos, rhs, Some((e, true)));
        push(neg, nrhs, Some((e, false)));
    }
    em.run_fm(rows)?;
    em.finish()
}

/// Farkas-dual program: outputs 1 iff the symmetrizing system has an
/// infeasibility certificate, i.e. iff the channel is not symmetrizable.
///
/// Searches for `y` with `Aᵀy ≥ 0` and `bᵀy = −1`, where `Au = b, u ≥ 0`
/// is the symmetrizing system (pair equalities as in the primal, then one
/// row-sum equality per input).
pub fn compile_farkas_dual(
    dims: Dims,
    caps: &CompileCaps,
    mode: CompileMode,
) -> Result<BssProgram, CompileError> {
    check_dims(dims, caps)?;
    let d = dims;
    let mut em = Emitter::new(d, *caps, mode);
    let pairs = kept_pairs(d);
    // variables: z_x for x < nx − 1 (z_{nx−1} = −1 − Σ z_x), then one per pair row
    let nz = d.nx - 1;
    let nvars = nz + pairs.len();
    let one = Val::Const(Rational::one());
    let mut rows = Vec::new();
    for x in 0..d.nx {
        for s in 0..d.ns {
            // −Σ_p A_{p,(x,s)} y_p − z_x ≤ 0
            let mut coeffs = vec![Val::zero(); nvars];
            let mut rhs = Val::zero();
            if x < nz {
                coeffs[x] = Val::Const(-Rational::one());
            } else {
                for c in coeffs.iter_mut().take(nz) {
                    *c = one.clone();
                }
                rhs = Val::Const(-Rational::one());
            }
            for (p, &(a, b, y)) in pairs.iter().enumerate() {
                if x == b {
                    coeffs[nz + p] = em.sum_of_products(&[(int(-1), &t_cell(d, a, s, y), &one)])?;
                } else if x == a {
                    coeffs[nz + p] = t_cell(d, b, s, y);
                }
            }
            let history = 1u128.checked_shl(rows.len() as u32).unwrap_or(0);
            rows.push(Row {
                coeffs,
                rhs,
                history,
                twin: None,
            });
        }
    }
    em.run_fm(rows)?;
    em.finish()
}
