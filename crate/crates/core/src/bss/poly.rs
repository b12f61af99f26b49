//! Sign-condition trees: the quantifier-free form of a decision program.
//!
//! Running a program symbolically on `t = (t_0, …, t_{n−1})` turns every
//! cell into a polynomial with rational coefficients. Each branch whose
//! polynomial is not constant becomes a test node; constant ones are
//! resolved on the spot. Along a path, every polynomial seen so far
//! (normalized to a monic leading term) carries the set of signs still
//! possible, so repeated or complementary tests do not split again.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::program::{BinOp, BssProgram, Direction, Expr, NodeIdx, NodeKind};
use crate::rational::{format_rational, Rational};

/// Sparse exponent vector: `(variable, exponent)` pairs sorted by variable.
type Monomial = Vec<(u32, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(i: u32) -> Self {
        let mut p = Self::zero();
        p.terms.insert(vec![(i, 1)], Rational::one());
        p
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(mul_monomials(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        let slot = self.terms.entry(m).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn eval(&self, t: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for &(v, e) in m {
                let x = t.get(v as usize).cloned().unwrap_or_else(Rational::zero);
                for _ in 0..e {
                    term *= &x;
                }
            }
            total += term;
        }
        total
    }

    /// `(self / |lc|·sign, sign)` with a leading coefficient of 1, where
    /// `lc` is the coefficient of the largest monomial.
    fn normalized(&self) -> (Poly, i8) {
        let (_, lc) = self.terms.iter().next_back().expect("nonconstant");
        let sign = if lc.is_negative() { -1 } else { 1 };
        (self.scale(&(Rational::one() / lc)), sign)
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest total degree first, then by variable index
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(m, _)| std::cmp::Reverse(m.iter().map(|&(_, e)| e).sum::<u32>()));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let mag = c.abs();
            match (k, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut first = true;
            if !mag.is_one() || m.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
                first = false;
            }
            for &(v, e) in m {
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                write!(f, "t{v}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignConditionTree {
    Leaf(bool),
    /// Goes to `nonneg` when `poly(t) ≥ 0`.
    Test {
        poly: Poly,
        nonneg: Box<SignConditionTree>,
        neg: Box<SignConditionTree>,
    },
}

impl SignConditionTree {
    pub fn decide(&self, t: &[Rational]) -> bool {
        let mut node = self;
        loop {
            match node {
                SignConditionTree::Leaf(v) => return *v,
                SignConditionTree::Test { poly, nonneg, neg } => {
                    node = if poly.eval(t).is_negative() {
                        neg
                    } else {
                        nonneg
                    };
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SignConditionTree::Leaf(_) => 1,
            SignConditionTree::Test { nonneg, neg, .. } => 1 + nonneg.size() + neg.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SignConditionTree::Leaf(_) => 0,
            SignConditionTree::Test { nonneg, neg, .. } => 1 + nonneg.depth().max(neg.depth()),
        }
    }

    /// Every root-to-leaf path as its sign conditions (`true` for `≥ 0`)
    /// and the verdict at the leaf.
    pub fn paths(&self) -> Vec<(Vec<(Poly, bool)>, bool)> {
        fn walk(
            n: &SignConditionTree,
            prefix: &mut Vec<(Poly, bool)>,
            out: &mut Vec<(Vec<(Poly, bool)>, bool)>,
        ) {
            match n {
                SignConditionTree::Leaf(v) => out.push((prefix.clone(), *v)),
                SignConditionTree::Test { poly, nonneg, neg } => {
                    prefix.push((poly.clone(), true));
                    walk(nonneg, prefix, out);
                    prefix.pop();
                    prefix.push((poly.clone(), false));
                    walk(neg, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {node:?} divides by a non-constant polynomial")]
    NonPolynomial { node: String },
    #[error("node {node:?} divides by zero")]
    DivisionByZero { node: String },
    #[error("node {node:?} outputs something other than a single constant 0 or 1")]
    NonBinaryOutput { node: String },
    #[error("tree exceeds {0} nodes")]
    TooLarge(usize),
    #[error("a path runs longer than {0} steps")]
    Diverged(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct TreeLimits {
    pub max_nodes: usize,
    pub max_path_steps: u64,
}

impl Default for TreeLimits {
    fn default() -> Self {
        Self {
            max_nodes: 200_000,
            max_path_steps: 1_000_000,
        }
    }
}

/// Possible signs of a normalized polynomial: bit 0 negative, bit 1 zero,
/// bit 2 positive.
type SignSet = u8;
const NEG: SignSet = 1;
const ZERO: SignSet = 2;
const POS: SignSet = 4;

#[derive(Clone)]
struct State {
    tape: HashMap<i64, Poly>,
    head: i64,
    at: NodeIdx,
    steps: u64,
    known: HashMap<Poly, SignSet>,
}

struct Builder<'p> {
    prog: &'p BssProgram,
    limits: TreeLimits,
    made: usize,
}

impl Builder<'_> {
    fn eval(&self, st: &State, e: &Expr) -> Result<Poly, TreeError> {
        Ok(match e {
            Expr::Lit(v) => Poly::constant(v.clone()),
            Expr::Cell(k) => st.tape.get(&(st.head + k)).cloned().unwrap_or_default(),
            Expr::Neg(a) => self.eval(st, a)?.neg(),
            Expr::Bin(op, a, b) => {
                let (a, b) = (self.eval(st, a)?, self.eval(st, b)?);
                match op {
                    BinOp::Add => a.add(&b),
                    BinOp::Sub => a.sub(&b),
                    BinOp::Mul => a.mul(&b),
                    BinOp::Div => {
                        let node = self.prog.node(st.at).id.clone();
                        match b.as_constant() {
                            None => return Err(TreeError::NonPolynomial { node }),
                            Some(c) if c.is_zero() => {
                                return Err(TreeError::DivisionByZero { node })
                            }
                            Some(c) => a.scale(&(Rational::one() / c)),
                        }
                    }
                }
            }
        })
    }

    fn count(&mut self) -> Result<(), TreeError> {
        self.made += 1;
        if self.made > self.limits.max_nodes {
            return Err(TreeError::TooLarge(self.limits.max_nodes));
        }
        Ok(())
    }

    fn explore(&mut self, mut st: State) -> Result<SignConditionTree, TreeError> {
        loop {
            st.steps += 1;
            if st.steps > self.limits.max_path_steps {
                return Err(TreeError::Diverged(self.limits.max_path_steps));
            }
            let node = self.prog.node(st.at);
            match &node.kind {
                NodeKind::Input { next } => st.at = *next,
                NodeKind::Computation { target, expr, next } => {
                    let v = self.eval(&st, expr)?;
                    st.tape.insert(st.head + target, v);
                    st.at = *next;
                }
                NodeKind::Shift { dir, next } => {
                    st.head += if *dir == Direction::Left { -1 } else { 1 };
                    st.at = *next;
                }
                NodeKind::Output { first, last } => {
                    let out: Vec<Option<Rational>> = (*first..=*last)
                        .map(|k| {
                            st.tape
                                .get(&(st.head + k))
                                .cloned()
                                .unwrap_or_default()
                                .as_constant()
                        })
                        .collect();
                    self.count()?;
                    return match out.as_slice() {
                        [Some(v)] if v.is_zero() => Ok(SignConditionTree::Leaf(false)),
                        [Some(v)] if v.is_one() => Ok(SignConditionTree::Leaf(true)),
                        _ => Err(TreeError::NonBinaryOutput {
                            node: node.id.clone(),
                        }),
                    };
                }
                NodeKind::Branch {
                    expr,
                    if_nonneg,
                    if_neg,
                } => {
                    let p = self.eval(&st, expr)?;
                    if let Some(c) = p.as_constant() {
                        st.at = if c.is_negative() { *if_neg } else { *if_nonneg };
                        continue;
                    }
                    let (key, sign) = p.normalized();
                    let possible = st.known.get(&key).copied().unwrap_or(NEG | ZERO | POS);
                    // signs of `key` under which `p ≥ 0`
                    let nonneg_set = if sign > 0 { ZERO | POS } else { ZERO | NEG };
                    let yes = possible & nonneg_set;
                    let no = possible & !nonneg_set;
                    if no == 0 {
                        st.at = *if_nonneg;
                        continue;
                    }
                    if yes == 0 {
                        st.at = *if_neg;
                        continue;
                    }
                    self.count()?;
                    let mut a = st.clone();
                    a.known.insert(key.clone(), yes);
                    a.at = *if_nonneg;
                    let mut b = st;
                    b.known.insert(key, no);
                    b.at = *if_neg;
                    return Ok(SignConditionTree::Test {
                        poly: p,
                        nonneg: Box::new(self.explore(a)?),
                        neg: Box::new(self.explore(b)?),
                    });
                }
            }
        }
    }
}

/// Symbolically executes `prog` on `n_inputs` indeterminates. The program
/// must be loop-free along every path within the limits, use division only
/// by constants, and output a single constant 0 or 1.
pub fn sign_condition_tree(
    prog: &BssProgram,
    n_inputs: usize,
    limits: TreeLimits,
) -> Result<SignConditionTree, TreeError> {
    let tape = (0..n_inputs)
        .map(|i| (i as i64, Poly::var(i as u32)))
        .collect();
    let st = State {
        tape,
        head: 0,
        at: prog.entry(),
        steps: 0,
        known: HashMap::new(),
    };
    Builder {
        prog,
        limits,
        made: 0,
    }
    .explore(st)
}
