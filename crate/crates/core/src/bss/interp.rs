//! Exact interpreter for BSS programs.
//!
//! The tape is an unbounded array of rational cells, zero where never
//! written, with a head moved by shift nodes. Cell references in programs
//! are relative to the head. The input node writes the input vector to
//! cells `0..n` and every node visit counts as one step.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::program::{BinOp, BssProgram, Direction, Expr, NodeIdx, NodeKind};
use super::trace::{FieldOp, Trace, TraceStep, TraceSummary};
use crate::rational::{RVector, Rational};

pub const DEFAULT_STEP_CAP: u64 = 1_000_000;
/// Records kept in full before a trace is summarized.
pub const TRACE_RETAIN: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("division by zero at node {node:?}, step {step}")]
    DivisionByZero { node: String, step: u64 },
    #[error("no output after {step_cap} steps")]
    Diverged { step_cap: u64 },
    #[error("step cap must be at least 1")]
    InvalidStepCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub step_cap: u64,
    /// Keep every trace record instead of summarizing past
    /// [`TRACE_RETAIN`].
    pub full_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            step_cap: DEFAULT_STEP_CAP,
            full_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Running,
    Halted(RVector),
}

struct Recorder {
    trace: Trace,
    full: bool,
}

impl Recorder {
    fn push(&mut self, step: TraceStep) {
        let keep = self.full
            || self.trace.steps.len() < TRACE_RETAIN
            || matches!(step, TraceStep::Halt(_));
        if keep {
            self.trace.steps.push(step);
            return;
        }
        let s = self
            .trace
            .summarized
            .get_or_insert_with(TraceSummary::default);
        match step {
            TraceStep::FieldOp { .. } => s.field_ops += 1,
            TraceStep::SignTest { .. } => s.sign_tests += 1,
            TraceStep::Shift(_) => s.shifts += 1,
            TraceStep::Halt(_) => unreachable!(),
        }
    }
}

/// A single run in progress, advanced one node at a time.
pub struct Machine<'p> {
    prog: &'p BssProgram,
    tape: HashMap<i64, Rational>,
    head: i64,
    at: NodeIdx,
    input: RVector,
    steps: u64,
    recorder: Option<Recorder>,
    halted: bool,
}

impl<'p> Machine<'p> {
    pub fn new(prog: &'p BssProgram, input: &[Rational]) -> Self {
        Self {
            prog,
            tape: HashMap::new(),
            head: 0,
            at: prog.entry(),
            input: input.to_vec(),
            steps: 0,
            recorder: None,
            halted: false,
        }
    }

    pub fn with_trace(mut self, full: bool) -> Self {
        self.recorder = Some(Recorder {
            trace: Trace::default(),
            full,
        });
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn into_trace(self) -> Option<Trace> {
        self.recorder.map(|r| r.trace)
    }

    fn read(&self, rel: i64) -> Rational {
        self.tape
            .get(&(self.head + rel))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    fn record(&mut self, step: TraceStep) {
        if let Some(r) = &mut self.recorder {
            r.push(step);
        }
    }

    fn field(&mut self, op: FieldOp, a: Rational, b: Rational) -> Result<Rational, RunError> {
        let Some(result) = op.apply(&a, &b) else {
            return Err(RunError::DivisionByZero {
                node: self.prog.node(self.at).id.clone(),
                step: self.steps,
            });
        };
        if self.recorder.is_some() {
            self.record(TraceStep::FieldOp {
                op,
                a,
                b,
                result: result.clone(),
            });
        }
        Ok(result)
    }

    fn eval(&mut self, e: &Expr) -> Result<Rational, RunError> {
        Ok(match e {
            Expr::Lit(v) => v.clone(),
            Expr::Cell(k) => self.read(*k),
            Expr::Neg(inner) => {
                let v = self.eval(inner)?;
                self.field(FieldOp::Sub, Rational::zero(), v)?
            }
            Expr::Bin(op, a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                let op = match op {
                    BinOp::Add => FieldOp::Add,
                    BinOp::Sub => FieldOp::Sub,
                    BinOp::Mul => FieldOp::Mul,
                    BinOp::Div => FieldOp::Div,
                };
                self.field(op, a, b)?
            }
        })
    }

    /// Executes the current node.
    pub fn step(&mut self) -> Result<StepOutcome, RunError> {
        assert!(!self.halted, "machine already halted");
        self.steps += 1;
        let prog = self.prog;
        match &prog.node(self.at).kind {
            NodeKind::Input { next } => {
                for (i, v) in std::mem::take(&mut self.input).into_iter().enumerate() {
                    self.tape.insert(self.head + i as i64, v);
                }
                self.at = *next;
            }
            NodeKind::Computation { target, expr, next } => {
                let v = self.eval(expr)?;
                self.tape.insert(self.head + target, v);
                self.at = *next;
            }
            NodeKind::Branch {
                expr,
                if_nonneg,
                if_neg,
            } => {
                let v = self.eval(expr)?;
                let nonneg = !v.is_negative();
                self.record(TraceStep::SignTest { value: v, nonneg });
                self.at = if nonneg { *if_nonneg } else { *if_neg };
            }
            NodeKind::Shift { dir, next } => {
                self.head += match dir {
                    Direction::Left => -1,
                    Direction::Right => 1,
                };
                self.record(TraceStep::Shift(*dir));
                self.at = *next;
            }
            NodeKind::Output { first, last } => {
                let out: RVector = (*first..=*last).map(|k| self.read(k)).collect();
                self.record(TraceStep::Halt(out.clone()));
                self.halted = true;
                return Ok(StepOutcome::Halted(out));
            }
        }
        Ok(StepOutcome::Running)
    }

    /// Runs until halt or until `step_cap` total steps.
    pub fn run(&mut self, step_cap: u64) -> Result<RVector, RunError> {
        if step_cap == 0 {
            return Err(RunError::InvalidStepCap);
        }
        while self.steps < step_cap {
            if let StepOutcome::Halted(out) = self.step()? {
                return Ok(out);
            }
        }
        Err(RunError::Diverged { step_cap })
    }
}

pub fn run_program(
    prog: &BssProgram,
    input: &[Rational],
    step_cap: u64,
) -> Result<RVector, RunError> {
    Machine::new(prog, input).run(step_cap)
}

pub fn trace_program(
    prog: &BssProgram,
    input: &[Rational],
    step_cap: u64,
) -> Result<(RVector, Trace), RunError> {
    trace_program_with(
        prog,
        input,
        RunOptions {
            step_cap,
            full_trace: false,
        },
    )
}

pub fn trace_program_with(
    prog: &BssProgram,
    input: &[Rational],
    opts: RunOptions,
) -> Result<(RVector, Trace), RunError> {
    let mut m = Machine::new(prog, input).with_trace(opts.full_trace);
    let out = m.run(opts.step_cap)?;
    Ok((out, m.into_trace().expect("recording")))
}
