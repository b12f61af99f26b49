//! Exact decision procedures for denial-of-service (jamming) detectability on
//! finite arbitrarily varying channels (AVCs).
//!
//! Everything on a decision path is computed over exact rationals. The only
//! floating-point code lives in [`capacity`].

pub mod bss;
pub mod capacity;
pub mod channel;
pub mod constrained;
pub mod hull;
pub mod io;
pub mod linear;
pub mod rational;
pub mod symmetrize;
