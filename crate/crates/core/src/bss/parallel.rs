//! Deciding by running two semi-deciders side by side: one halts on
//! symmetrizable channels, the other on non-symmetrizable ones. Steps
//! alternate, so whichever halts first settles the question.

use serde::Serialize;

use super::compile::{
    compile_farkas_dual, compile_symmetrizability_with, CompileCaps, CompileError, CompileMode,
};
use super::interp::{Machine, RunError, StepOutcome};
use super::program::BssProgram;
use crate::channel::Dims;
use crate::rational::Rational;
use crate::symmetrize::SymVerdict;

/// The accept program (halts iff symmetrizable) and the reject program
/// (halts iff a Farkas certificate exists), both in semi-decision mode.
#[derive(Debug, Clone)]
pub struct MachinePair {
    pub accept: BssProgram,
    pub reject: BssProgram,
}

pub fn compile_machine_pair(dims: Dims, caps: &CompileCaps) -> Result<MachinePair, CompileError> {
    Ok(MachinePair {
        accept: compile_symmetrizability_with(dims, caps, CompileMode::SemiDecide)?,
        reject: compile_farkas_dual(dims, caps, CompileMode::SemiDecide)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Halted {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterleavedRun {
    pub verdict: SymVerdict,
    pub halted: Halted,
    /// Steps taken by the accept and reject machines.
    pub steps: [u64; 2],
}

/// Alternates single steps of both machines until one halts or both have
/// used `step_cap` steps. An output of 1 from the accept machine, or of 0
/// from the reject machine, means symmetrizable.
pub fn run_interleaved(
    accept: &BssProgram,
    reject: &BssProgram,
    input: &[Rational],
    step_cap: u64,
) -> Result<InterleavedRun, RunError> {
    if step_cap == 0 {
        return Err(RunError::InvalidStepCap);
    }
    let mut machines = [Machine::new(accept, input), Machine::new(reject, input)];
    for _ in 0..step_cap {
        for (k, m) in machines.iter_mut().enumerate() {
            if let StepOutcome::Halted(out) = m.step()? {
                let says_one = out.len() == 1 && out[0] == Rational::from_integer(1.into());
                let symmetrizable = (k == 0) == says_one;
                return Ok(InterleavedRun {
                    verdict: if symmetrizable {
                        SymVerdict::Symmetrizable
                    } else {
                        SymVerdict::NonSymmetrizable
                    },
                    halted: if k == 0 {
                        Halted::Accept
                    } else {
                        Halted::Reject
                    },
                    steps: [machines[0].steps(), machines[1].steps()],
                });
            }
        }
    }
    Err(RunError::Diverged { step_cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{catalog, vectorize};

    #[test]
    fn settles_both_ways() {
        let caps = CompileCaps::default();
        let pair = compile_machine_pair(Dims::new(2, 2, 2).unwrap(), &caps).unwrap();
        let run = run_interleaved(
            &pair.accept,
            &pair.reject,
            &vectorize(&catalog::xor()),
            100_000,
        )
        .unwrap();
        assert_eq!(
            (run.verdict, run.halted),
            (SymVerdict::Symmetrizable, Halted::Accept)
        );

        let pair = compile_machine_pair(Dims::new(2, 1, 2).unwrap(), &caps).unwrap();
        let run = run_interleaved(
            &pair.accept,
            &pair.reject,
            &vectorize(&catalog::identity_dmc(2)),
            100_000,
        )
        .unwrap();
        assert_eq!(
            (run.verdict, run.halted),
            (SymVerdict::NonSymmetrizable, Halted::Reject)
        );
    }
}
