//! Arbitrarily varying channels, distributions, cost functions and the
//! vectorization between channels and Euclidean coordinates.
//!
//! Vector layout (used by every downstream linear system and by compiled BSS
//! programs): x-major, then state s, then output y. Entry
//! `(x * ns + s) * ny + y` holds `W(y | x, s)`.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_rational, sum, RVector, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("negative entry W({y}|{x},{s})")]
    NegativeEntry { x: usize, s: usize, y: usize },
    #[error("row W(.|{x},{s}) sums to {} instead of 1", format_rational(.actual_sum))]
    RowSumMismatch {
        x: usize,
        s: usize,
        actual_sum: Rational,
    },
    #[error("ragged channel table")]
    RaggedTable,
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("negative probability at index {0}")]
    NegativeProbability(usize),
    #[error("probabilities sum to {} instead of 1", format_rational(.0))]
    NotNormalized(Rational),
    #[error("negative cost at symbol {0}")]
    NegativeCost(usize),
    #[error("cost function minimum is {} but must be 0", format_rational(.0))]
    CostNotNormalized(Rational),
    #[error("empty sequence")]
    EmptySequence,
}

/// Alphabet sizes |X|, |S|, |Y|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dims {
    pub nx: usize,
    pub ns: usize,
    pub ny: usize,
}

impl Dims {
    pub fn new(nx: usize, ns: usize, ny: usize) -> Result<Self, ChannelError> {
        if nx == 0 || ns == 0 || ny == 0 {
            return Err(ChannelError::EmptyAlphabet);
        }
        Ok(Self { nx, ns, ny })
    }

    /// Length of the channel vector t.
    pub fn channel_len(&self) -> usize {
        self.nx * self.ns * self.ny
    }

    /// Length of the symmetrizer vector u.
    pub fn symmetrizer_len(&self) -> usize {
        self.nx * self.ns
    }

    #[inline]
    pub fn t_index(&self, x: usize, s: usize, y: usize) -> usize {
        (x * self.ns + s) * self.ny + y
    }

    /// Position of `U(s|x)` inside the vector u.
    #[inline]
    pub fn u_index(&self, x: usize, s: usize) -> usize {
        x * self.ns + s
    }
}

/// Probability vector with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    p: RVector,
}

impl Distribution {
    pub fn new(p: RVector) -> Result<Self, ChannelError> {
        if p.is_empty() {
            return Err(ChannelError::EmptyAlphabet);
        }
        if let Some(i) = p.iter().position(|v| v.is_negative()) {
            return Err(ChannelError::NegativeProbability(i));
        }
        let total = sum(&p);
        if total != Rational::from_integer(1.into()) {
            return Err(ChannelError::NotNormalized(total));
        }
        Ok(Self { p })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self, ChannelError> {
        if at >= size {
            return Err(ChannelError::IndexOutOfRange { index: at, size });
        }
        let mut p = vec![Rational::zero(); size];
        p[at] = Rational::from_integer(1.into());
        Self::new(p)
    }

    pub fn uniform(size: usize) -> Result<Self, ChannelError> {
        if size == 0 {
            return Err(ChannelError::EmptyAlphabet);
        }
        let v = Rational::new(1.into(), (size as u64).into());
        Self::new(vec![v; size])
    }

    pub fn support_size(&self) -> usize {
        self.p.len()
    }

    pub fn probs(&self) -> &[Rational] {
        &self.p
    }

    pub fn into_probs(self) -> RVector {
        self.p
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.p[i]
    }
}

/// Row-stochastic matrix; row `i` is a distribution over `cols` symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StochMatrix {
    rows: usize,
    cols: usize,
    u: Vec<RVector>,
}

impl StochMatrix {
    pub fn new(u: Vec<RVector>) -> Result<Self, ChannelError> {
        let rows = u.len();
        if rows == 0 {
            return Err(ChannelError::EmptyAlphabet);
        }
        let cols = u[0].len();
        if u.iter().any(|r| r.len() != cols) {
            return Err(ChannelError::RaggedTable);
        }
        for row in &u {
            Distribution::new(row.clone())?;
        }
        Ok(Self { rows, cols, u })
    }

    /// Builds the `nx × ns` matrix `U(s|x)` from the flat vector u.
    pub fn from_flat(values: &[Rational], rows: usize, cols: usize) -> Result<Self, ChannelError> {
        if values.len() != rows * cols {
            return Err(ChannelError::LengthMismatch {
                expected: rows * cols,
                actual: values.len(),
            });
        }
        Self::new(values.chunks(cols).map(|c| c.to_vec()).collect())
    }

    pub fn identity(n: usize) -> Result<Self, ChannelError> {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Rational::from_integer(((i == j) as i64).into()))
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, from: usize, to: usize) -> &Rational {
        &self.u[from][to]
    }

    pub fn row(&self, from: usize) -> &[Rational] {
        &self.u[from]
    }

    pub fn as_rows(&self) -> &[RVector] {
        &self.u
    }

    /// Row-major flattening; for a symmetrizer this is the vector u.
    pub fn flatten(&self) -> RVector {
        self.u.iter().flatten().cloned().collect()
    }
}

/// Per-symbol cost. Analyses require the minimum cost to be exactly 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CostFn {
    costs: RVector,
}

impl CostFn {
    pub fn new(costs: RVector) -> Result<Self, ChannelError> {
        let c = Self::new_unnormalized(costs)?;
        c.require_normalized()?;
        Ok(c)
    }

    /// Skips the `min = 0` check; analysis entry points re-check it.
    pub fn new_unnormalized(costs: RVector) -> Result<Self, ChannelError> {
        if costs.is_empty() {
            return Err(ChannelError::EmptyAlphabet);
        }
        if let Some(i) = costs.iter().position(|c| c.is_negative()) {
            return Err(ChannelError::NegativeCost(i));
        }
        Ok(Self { costs })
    }

    pub fn require_normalized(&self) -> Result<(), ChannelError> {
        let min = self
            .costs
            .iter()
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero);
        if min.is_zero() {
            Ok(())
        } else {
            Err(ChannelError::CostNotNormalized(min))
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn max_cost(&self) -> Rational {
        self.costs
            .iter()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Expected cost `Σ_a p(a) c(a)`.
    pub fn expected(&self, p: &Distribution) -> Result<Rational, ChannelError> {
        if p.support_size() != self.alphabet_size() {
            return Err(ChannelError::DimensionMismatch {
                expected: self.alphabet_size(),
                actual: p.support_size(),
            });
        }
        Ok(crate::rational::dot(p.probs(), &self.costs))
    }
}

/// Finite sequence over `{0, …, alphabet_size − 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence {
    alphabet_size: usize,
    symbols: Vec<usize>,
}

impl Sequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self, ChannelError> {
        if symbols.is_empty() {
            return Err(ChannelError::EmptySequence);
        }
        if let Some(&bad) = symbols.iter().find(|&&a| a >= alphabet_size) {
            return Err(ChannelError::IndexOutOfRange {
                index: bad,
                size: alphabet_size,
            });
        }
        Ok(Self {
            alphabet_size,
            symbols,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }
}

/// A validated AVC `W(y | x, s)`, stored flat in vector layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Avc {
    dims: Dims,
    t: RVector,
}

impl Avc {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn w(&self, y: usize, x: usize, s: usize) -> &Rational {
        &self.t[self.dims.t_index(x, s, y)]
    }

    /// The output distribution `W(· | x, s)`.
    pub fn row(&self, x: usize, s: usize) -> &[Rational] {
        let start = self.dims.t_index(x, s, 0);
        &self.t[start..start + self.dims.ny]
    }

    /// Nested `[x][s][y]` table.
    pub fn to_table(&self) -> Vec<Vec<RVector>> {
        (0..self.dims.nx)
            .map(|x| (0..self.dims.ns).map(|s| self.row(x, s).to_vec()).collect())
            .collect()
    }

    fn check_symbol(&self, x: usize) -> Result<(), ChannelError> {
        if x >= self.dims.nx {
            return Err(ChannelError::IndexOutOfRange {
                index: x,
                size: self.dims.nx,
            });
        }
        Ok(())
    }
}

fn validate_flat(dims: Dims, t: &[Rational]) -> Result<(), ChannelError> {
    let one = Rational::from_integer(1.into());
    for x in 0..dims.nx {
        for s in 0..dims.ns {
            let start = dims.t_index(x, s, 0);
            let row = &t[start..start + dims.ny];
            if let Some(y) = row.iter().position(|v| v.is_negative()) {
                return Err(ChannelError::NegativeEntry { x, s, y });
            }
            let total = sum(row);
            if total != one {
                return Err(ChannelError::RowSumMismatch {
                    x,
                    s,
                    actual_sum: total,
                });
            }
        }
    }
    Ok(())
}

/// Validates a raw `[x][s][y]` table: rectangular, nonnegative, rows summing
/// exactly to one.
pub fn validate_avc(table: &[Vec<RVector>]) -> Result<Avc, ChannelError> {
    let nx = table.len();
    let ns = table.first().map_or(0, |r| r.len());
    let ny = table.first().and_then(|r| r.first()).map_or(0, |r| r.len());
    if table
        .iter()
        .any(|r| r.len() != ns || r.iter().any(|row| row.len() != ny))
    {
        return Err(ChannelError::RaggedTable);
    }
    let dims = Dims::new(nx, ns, ny)?;
    let t: RVector = table.iter().flatten().flatten().cloned().collect();
    validate_flat(dims, &t)?;
    Ok(Avc { dims, t })
}

/// The channel vector t.
pub fn vectorize(w: &Avc) -> RVector {
    w.t.clone()
}

pub fn devectorize(t: &[Rational], dims: Dims) -> Result<Avc, ChannelError> {
    let dims = Dims::new(dims.nx, dims.ns, dims.ny)?;
    if t.len() != dims.channel_len() {
        return Err(ChannelError::LengthMismatch {
            expected: dims.channel_len(),
            actual: t.len(),
        });
    }
    validate_flat(dims, t)?;
    Ok(Avc {
        dims,
        t: t.to_vec(),
    })
}

/// `W_q(y|x) = Σ_s W(y|x,s) q(s)` as an `nx × ny` stochastic matrix.
pub fn averaged_channel(w: &Avc, q: &Distribution) -> Result<StochMatrix, ChannelError> {
    let d = w.dims;
    if q.support_size() != d.ns {
        return Err(ChannelError::DimensionMismatch {
            expected: d.ns,
            actual: q.support_size(),
        });
    }
    let rows = (0..d.nx)
        .map(|x| {
            (0..d.ny)
                .map(|y| (0..d.ns).fold(Rational::zero(), |acc, s| acc + w.w(y, x, s) * &q[s]))
                .collect()
        })
        .collect();
    StochMatrix::new(rows)
}

/// The `ns` output distributions `W(·|x,s)` whose convex hull is the set of
/// outputs the jammer can induce on input `x`.
pub fn hull_generators(w: &Avc, x: usize) -> Result<Vec<Distribution>, ChannelError> {
    w.check_symbol(x)?;
    (0..w.dims.ns)
        .map(|s| Distribution::new(w.row(x, s).to_vec()))
        .collect()
}

/// `p(a) = N(a | seq) / n`.
pub fn empirical_type(seq: &Sequence, alphabet_size: usize) -> Result<Distribution, ChannelError> {
    if alphabet_size != seq.alphabet_size() {
        return Err(ChannelError::DimensionMismatch {
            expected: seq.alphabet_size(),
            actual: alphabet_size,
        });
    }
    let mut counts = vec![0u64; alphabet_size];
    for &a in seq.symbols() {
        counts[a] += 1;
    }
    let n = seq.len() as u64;
    Distribution::new(
        counts
            .into_iter()
            .map(|c| Rational::new(c.into(), n.into()))
            .collect(),
    )
}

/// Average per-letter cost `(1/n) Σ c(s_i)`.
pub fn sequence_cost(seq: &Sequence, cost: &CostFn) -> Result<Rational, ChannelError> {
    if seq.alphabet_size() != cost.alphabet_size() {
        return Err(ChannelError::DimensionMismatch {
            expected: cost.alphabet_size(),
            actual: seq.alphabet_size(),
        });
    }
    let total = seq
        .symbols()
        .iter()
        .fold(Rational::zero(), |acc, &a| acc + &cost.costs()[a]);
    Ok(total / Rational::from_integer((seq.len() as u64).into()))
}

/// Reference channels used across tests, examples and the CLI docs.
pub mod catalog {
    use super::*;
    use crate::rational::{int, rat};

    fn build(nx: usize, ns: usize, ny: usize, f: impl Fn(usize, usize, usize) -> Rational) -> Avc {
        let table: Vec<Vec<RVector>> = (0..nx)
            .map(|x| {
                (0..ns)
                    .map(|s| (0..ny).map(|y| f(x, s, y)).collect())
                    .collect()
            })
            .collect();
        validate_avc(&table).expect("catalog channel is stochastic")
    }

    /// Binary additive channel `y = x ⊕ s`.
    pub fn xor() -> Avc {
        build(2, 2, 2, |x, s, y| int(((x ^ s) == y) as i64))
    }

    /// Noiseless channel `y = x` with a single (useless) state.
    pub fn identity_dmc(n: usize) -> Avc {
        build(n, 1, n, |x, _, y| int((x == y) as i64))
    }

    /// Binary symmetric channel with crossover `p`, one state.
    pub fn bsc(p: &Rational) -> Avc {
        let q = int(1) - p;
        build(
            2,
            1,
            2,
            |x, _, y| if x == y { q.clone() } else { p.clone() },
        )
    }

    /// `ns` identical copies of BSC(p).
    pub fn bsc_states(p: &Rational, ns: usize) -> Avc {
        let q = int(1) - p;
        build(
            2,
            ns,
            2,
            |x, _, y| if x == y { q.clone() } else { p.clone() },
        )
    }

    /// Channel whose output ignores the input: `W(y|x,s) = V(y|s)`.
    pub fn input_independent(v: &[RVector], nx: usize) -> Result<Avc, ChannelError> {
        let table: Vec<Vec<RVector>> = (0..nx).map(|_| v.to_vec()).collect();
        validate_avc(&table)
    }

    /// State-independent channel `W(y|x,s) = V(y|x)` with `ns` states.
    pub fn state_independent(v: &[RVector], ns: usize) -> Result<Avc, ChannelError> {
        let table: Vec<Vec<RVector>> = v.iter().map(|row| vec![row.clone(); ns]).collect();
        validate_avc(&table)
    }

    /// BSC(1/4) helper.
    pub fn bsc_quarter() -> Avc {
        bsc(&rat(1, 4))
    }
}
