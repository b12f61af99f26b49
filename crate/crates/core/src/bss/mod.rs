//! Blum–Shub–Smale machines over the rationals: program text, an exact
//! interpreter with replayable traces, and compiled deciders for
//! symmetrizability.

pub mod compile;
pub mod interp;
pub mod parallel;
pub mod parse;
pub mod poly;
pub mod program;
pub mod trace;
