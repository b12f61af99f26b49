//! BSS programs: finite directed graphs of input, computation, branch,
//! shift and output nodes over the rationals.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub type NodeIdx = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Rational-function expression over tape cells (relative to the head).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Rational),
    Cell(i64),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Negation, folded into literals so that `-3/2` parses and prints
    /// as a single literal.
    pub fn negated(e: Expr) -> Expr {
        match e {
            Expr::Lit(v) => Expr::Lit(-v),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn cells(&self, out: &mut BTreeSet<i64>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Cell(k) => {
                out.insert(*k);
            }
            Expr::Neg(e) => e.cells(out),
            Expr::Bin(_, a, b) => {
                a.cells(out);
                b.cells(out);
            }
        }
    }

    fn literals(&self, out: &mut Vec<Rational>) {
        match self {
            Expr::Lit(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Cell(_) => {}
            Expr::Neg(e) => e.literals(out),
            Expr::Bin(_, a, b) => {
                a.literals(out);
                b.literals(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => f.write_str(&format_rational(v)),
            Expr::Cell(k) => write!(f, "c[{k}]"),
            Expr::Neg(e) => match **e {
                Expr::Bin(..) => write!(f, "-({e})"),
                _ => write!(f, "-{e}"),
            },
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                match &**a {
                    Expr::Bin(o, ..) if o.precedence() < p => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " {} ", op.symbol())?;
                match &**b {
                    Expr::Bin(o, ..) if o.precedence() <= p => write!(f, "({b})"),
                    Expr::Lit(v) if v.is_negative() => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// Writes the input vector to cells `0..n` relative to the head.
    Input {
        next: NodeIdx,
    },
    Computation {
        target: i64,
        expr: Expr,
        next: NodeIdx,
    },
    /// Continues at `if_nonneg` when `expr ≥ 0`, else at `if_neg`.
    Branch {
        expr: Expr,
        if_nonneg: NodeIdx,
        if_neg: NodeIdx,
    },
    Shift {
        dir: Direction,
        next: NodeIdx,
    },
    /// Halts with the cells `first..=last` relative to the head.
    Output {
        first: i64,
        last: i64,
    },
}

impl NodeKind {
    pub fn successors(&self) -> Vec<NodeIdx> {
        match self {
            NodeKind::Input { next }
            | NodeKind::Computation { next, .. }
            | NodeKind::Shift { next, .. } => {
                vec![*next]
            }
            NodeKind::Branch {
                if_nonneg, if_neg, ..
            } => vec![*if_nonneg, *if_neg],
            NodeKind::Output { .. } => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BssNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("program has no nodes")]
    Empty,
    #[error("node id {0:?} is not of the form [A-Za-z0-9_]+")]
    BadId(String),
    #[error("duplicate node id {0:?}")]
    DuplicateId(String),
    #[error("node {node:?} refers to missing node index {target}")]
    DanglingSuccessor { node: String, target: NodeIdx },
    #[error("program needs exactly one input node, found {0}")]
    MultipleInputs(usize),
    #[error("program has no input node")]
    MissingInput,
    #[error("output node {0:?} has an empty cell range")]
    EmptyOutputRange(String),
    #[error("no output node is reachable from the input node")]
    NoReachableOutput,
}

/// A well-formed BSS program. The entry is its unique input node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BssProgram {
    nodes: Vec<BssNode>,
    entry: NodeIdx,
    constants: Vec<Rational>,
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl BssProgram {
    pub fn new(nodes: Vec<BssNode>) -> Result<Self, ProgramError> {
        if nodes.is_empty() {
            return Err(ProgramError::Empty);
        }
        let mut seen = HashSet::new();
        for n in &nodes {
            if !valid_id(&n.id) {
                return Err(ProgramError::BadId(n.id.clone()));
            }
            if !seen.insert(n.id.as_str()) {
                return Err(ProgramError::DuplicateId(n.id.clone()));
            }
            if let Some(&target) = n.kind.successors().iter().find(|&&s| s >= nodes.len()) {
                return Err(ProgramError::DanglingSuccessor {
                    node: n.id.clone(),
                    target,
                });
            }
            if let NodeKind::Output { first, last } = n.kind {
                if first > last {
                    return Err(ProgramError::EmptyOutputRange(n.id.clone()));
                }
            }
        }
        let inputs: Vec<NodeIdx> = (0..nodes.len())
            .filter(|&i| matches!(nodes[i].kind, NodeKind::Input { .. }))
            .collect();
        let entry = match inputs.len() {
            0 => return Err(ProgramError::MissingInput),
            1 => inputs[0],
            k => return Err(ProgramError::MultipleInputs(k)),
        };
        let mut reached = vec![false; nodes.len()];
        let mut stack = vec![entry];
        let mut output_reachable = false;
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut reached[i], true) {
                continue;
            }
            output_reachable |= matches!(nodes[i].kind, NodeKind::Output { .. });
            stack.extend(nodes[i].kind.successors());
        }
        if !output_reachable {
            return Err(ProgramError::NoReachableOutput);
        }
        let mut constants = Vec::new();
        for n in &nodes {
            match &n.kind {
                NodeKind::Computation { expr, .. } | NodeKind::Branch { expr, .. } => {
                    expr.literals(&mut constants)
                }
                _ => {}
            }
        }
        Ok(Self {
            nodes,
            entry,
            constants,
        })
    }

    pub fn nodes(&self) -> &[BssNode] {
        &self.nodes
    }

    pub fn node(&self, i: NodeIdx) -> &BssNode {
        &self.nodes[i]
    }

    pub fn entry(&self) -> NodeIdx {
        self.entry
    }

    /// Distinct machine constants (literals) in order of appearance.
    pub fn constants(&self) -> &[Rational] {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<NodeIdx> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Canonical source text; parsing it yields an equal program.
    pub fn to_source(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BssProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = |i: NodeIdx| &self.nodes[i].id;
        for (i, n) in self.nodes.iter().enumerate() {
            write!(f, "{}: ", n.id)?;
            match &n.kind {
                NodeKind::Input { next } => {
                    f.write_str("input")?;
                    if *next != i + 1 {
                        write!(f, " -> {}", id(*next))?;
                    }
                }
                NodeKind::Computation { target, expr, next } => {
                    write!(f, "c[{target}] := {expr} -> {}", id(*next))?
                }
                NodeKind::Branch {
                    expr,
                    if_nonneg,
                    if_neg,
                } => write!(
                    f,
                    "if {expr} >= 0 -> {} else {}",
                    id(*if_nonneg),
                    id(*if_neg)
                )?,
                NodeKind::Shift { dir, next } => {
                    let d = match dir {
                        Direction::Left => "left",
                        Direction::Right => "right",
                    };
                    write!(f, "shift {d} -> {}", id(*next))?
                }
                NodeKind::Output { first, last } if first == last => {
                    write!(f, "output c[{first}]")?
                }
                NodeKind::Output { first, last } => write!(f, "output c[{first}..{last}]")?,
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Assembles programs node by node with symbolic successor names.
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    nodes: Vec<(String, PendingKind)>,
}

#[derive(Debug)]
enum PendingKind {
    Input(String),
    Computation(i64, Expr, String),
    Branch(Expr, String, String),
    Shift(Direction, String),
    Output(i64, i64),
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, id: &str, next: &str) -> &mut Self {
        self.nodes
            .push((id.into(), PendingKind::Input(next.into())));
        self
    }

    pub fn compute(&mut self, id: &str, target: i64, expr: Expr, next: &str) -> &mut Self {
        self.nodes.push((
            id.into(),
            PendingKind::Computation(target, expr, next.into()),
        ));
        self
    }

    pub fn branch(&mut self, id: &str, expr: Expr, if_nonneg: &str, if_neg: &str) -> &mut Self {
        self.nodes.push((
            id.into(),
            PendingKind::Branch(expr, if_nonneg.into(), if_neg.into()),
        ));
        self
    }

    pub fn shift(&mut self, id: &str, dir: Direction, next: &str) -> &mut Self {
        self.nodes
            .push((id.into(), PendingKind::Shift(dir, next.into())));
        self
    }

    pub fn output(&mut self, id: &str, first: i64, last: i64) -> &mut Self {
        self.nodes
            .push((id.into(), PendingKind::Output(first, last)));
        self
    }

    pub fn build(self) -> Result<BssProgram, BuildError> {
        let index: HashMap<&str, NodeIdx> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, (id, _))| (id.as_str(), i))
            .collect();
        let resolve = |from: &str, to: &str| {
            index.get(to).copied().ok_or_else(|| BuildError::UnknownId {
                node: from.to_string(),
                target: to.to_string(),
            })
        };
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, k) in &self.nodes {
            let kind = match k {
                PendingKind::Input(n) => NodeKind::Input {
                    next: resolve(id, n)?,
                },
                PendingKind::Computation(t, e, n) => NodeKind::Computation {
                    target: *t,
                    expr: e.clone(),
                    next: resolve(id, n)?,
                },
                PendingKind::Branch(e, a, b) => NodeKind::Branch {
                    expr: e.clone(),
                    if_nonneg: resolve(id, a)?,
                    if_neg: resolve(id, b)?,
                },
                PendingKind::Shift(d, n) => NodeKind::Shift {
                    dir: *d,
                    next: resolve(id, n)?,
                },
                PendingKind::Output(a, b) => NodeKind::Output {
                    first: *a,
                    last: *b,
                },
            };
            nodes.push(BssNode {
                id: id.clone(),
                kind,
            });
        }
        Ok(BssProgram::new(nodes)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("node {node:?} refers to unknown node {target:?}")]
    UnknownId { node: String, target: String },
    #[error(transparent)]
    Program(#[from] ProgramError),
}
