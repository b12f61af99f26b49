//! Execution traces: the field operations, sign tests and head moves a run
//! performed, in order, replayable without the program.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::program::Direction;
use crate::rational::{format_fraction, parse_rational, RVector, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldOp {
    pub fn symbol(self) -> char {
        match self {
            FieldOp::Add => '+',
            FieldOp::Sub => '-',
            FieldOp::Mul => '*',
            FieldOp::Div => '/',
        }
    }

    fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "+" => FieldOp::Add,
            "-" => FieldOp::Sub,
            "*" => FieldOp::Mul,
            "/" => FieldOp::Div,
            _ => return None,
        })
    }

    /// `None` on division by zero.
    pub fn apply(self, a: &Rational, b: &Rational) -> Option<Rational> {
        Some(match self {
            FieldOp::Add => a + b,
            FieldOp::Sub => a - b,
            FieldOp::Mul => a * b,
            FieldOp::Div => {
                if b.is_zero() {
                    return None;
                }
                a / b
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    FieldOp {
        op: FieldOp,
        a: Rational,
        b: Rational,
        result: Rational,
    },
    SignTest {
        value: Rational,
        nonneg: bool,
    },
    Shift(Direction),
    Halt(RVector),
}

/// Per-kind counts of records dropped from a long trace.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceSummary {
    pub field_ops: u64,
    pub sign_tests: u64,
    pub shifts: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Set when records past the retention limit were only counted.
    pub summarized: Option<TraceSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("record {0}: arithmetic does not replay")]
    BadArithmetic(usize),
    #[error("record {0}: sign test outcome is wrong")]
    BadSignTest(usize),
    #[error("record {0}: records after halt")]
    AfterHalt(usize),
    #[error("trace does not end in a halt")]
    NoHalt,
    #[error("trace is summarized and cannot be replayed")]
    Summarized,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceDecodeError {
    pub line: usize,
    pub message: String,
}

impl Trace {
    /// Re-checks every record and returns the halting output.
    pub fn replay(&self) -> Result<RVector, ReplayError> {
        if self.summarized.is_some() {
            return Err(ReplayError::Summarized);
        }
        let mut output = None;
        for (i, step) in self.steps.iter().enumerate() {
            if output.is_some() {
                return Err(ReplayError::AfterHalt(i));
            }
            match step {
                TraceStep::FieldOp { op, a, b, result } => {
                    if op.apply(a, b).as_ref() != Some(result) {
                        return Err(ReplayError::BadArithmetic(i));
                    }
                }
                TraceStep::SignTest { value, nonneg } => {
                    if !value.is_negative() != *nonneg {
                        return Err(ReplayError::BadSignTest(i));
                    }
                }
                TraceStep::Shift(_) => {}
                TraceStep::Halt(v) => output = Some(v.clone()),
            }
        }
        output.ok_or(ReplayError::NoHalt)
    }

    /// One record per line: `OP + a b -> c`, `TEST v >=0|<0`, `SHIFT L|R`,
    /// `HALT v1 v2 ...`, values as `num/den`. Summarized traces carry a
    /// `SUMMARY` line with the dropped counts.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Trace, TraceDecodeError> {
        let mut trace = Trace::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |m: &str| TraceDecodeError {
                line,
                message: m.to_string(),
            };
            let words: Vec<&str> = raw.split_whitespace().collect();
            let Some((&head, rest)) = words.split_first() else {
                continue;
            };
            let num =
                |s: &str| parse_rational(s).map_err(|e| err(&format!("bad value {s:?}: {e}")));
            let step = match (head, rest) {
                ("OP", [op, a, b, "->", c]) => TraceStep::FieldOp {
                    op: FieldOp::from_symbol(op).ok_or_else(|| err("unknown operation"))?,
                    a: num(a)?,
                    b: num(b)?,
                    result: num(c)?,
                },
                ("TEST", [v, outcome]) => TraceStep::SignTest {
                    value: num(v)?,
                    nonneg: match *outcome {
                        ">=0" => true,
                        "<0" => false,
                        _ => return Err(err("expected >=0 or <0")),
                    },
                },
                ("SHIFT", ["L"]) => TraceStep::Shift(Direction::Left),
                ("SHIFT", ["R"]) => TraceStep::Shift(Direction::Right),
                ("HALT", vals) => {
                    TraceStep::Halt(vals.iter().map(|v| num(v)).collect::<Result<_, _>>()?)
                }
                ("SUMMARY", [ops, tests, shifts]) => {
                    let count = |s: &str, key: &str| {
                        s.strip_prefix(key)
                            .and_then(|v| v.parse::<u64>().ok())
                            .ok_or_else(|| err("malformed summary"))
                    };
                    trace.summarized = Some(TraceSummary {
                        field_ops: count(ops, "ops=")?,
                        sign_tests: count(tests, "tests=")?,
                        shifts: count(shifts, "shifts=")?,
                    });
                    continue;
                }
                _ => return Err(err("unknown or malformed record")),
            };
            trace.steps.push(step);
        }
        Ok(trace)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            match step {
                TraceStep::FieldOp { op, a, b, result } => writeln!(
                    f,
                    "OP {} {} {} -> {}",
                    op.symbol(),
                    format_fraction(a),
                    format_fraction(b),
                    format_fraction(result)
                )?,
                TraceStep::SignTest { value, nonneg } => writeln!(
                    f,
                    "TEST {} {}",
                    format_fraction(value),
                    if *nonneg { ">=0" } else { "<0" }
                )?,
                TraceStep::Shift(Direction::Left) => writeln!(f, "SHIFT L")?,
                TraceStep::Shift(Direction::Right) => writeln!(f, "SHIFT R")?,
                TraceStep::Halt(vals) => {
                    f.write_str("HALT")?;
                    for v in vals {
                        write!(f, " {}", format_fraction(v))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        if let Some(s) = &self.summarized {
            writeln!(
                f,
                "SUMMARY ops={} tests={} shifts={}",
                s.field_ops, s.sign_tests, s.shifts
            )?;
        }
        Ok(())
    }
}

/// True iff every record is an admissible step whose arithmetic and sign
/// outcomes replay exactly, ending in a single halt.
pub fn verify_trace(trace: &Trace) -> bool {
    trace.replay().is_ok()
}

/// Decodes and verifies serialized trace text; undecodable text is false.
pub fn verify_trace_text(text: &str) -> bool {
    Trace::from_text(text).is_ok_and(|t| verify_trace(&t))
}
