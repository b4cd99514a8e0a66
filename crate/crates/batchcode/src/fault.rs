//! Fault tolerance: systematic MDS parities from Vandermonde codes, the
//! batch/MDS composition, erasure recovery and exact minimum distance.
//!
//! Composition appends the MDS parities after the batch parities. Puncturing
//! the result back to the batch coordinates recovers the batch code, so
//! scheduling is untouched, while the minimum distance is at least that of
//! the MDS part.

use crate::code::{CodeError, SystematicCode};
use crate::gf::{Field, FieldElement, GfError};
use itertools::Itertools;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FaultError {
    #[error("field size {p} too small: needs more than n + p = {needed} elements")]
    FieldTooSmall { p: u64, needed: u64 },
    #[error("message lengths differ: batch n = {batch}, MDS n = {mds}")]
    MessageLengthMismatch { batch: usize, mds: usize },
    #[error("codeword has {got} coordinates, expected {expected}")]
    CodewordLength { expected: usize, got: usize },
    #[error("surviving coordinates have rank {rank} < {n}; erasures unrecoverable")]
    RankDeficient { rank: usize, n: usize },
    #[error("surviving coordinates are inconsistent with any codeword")]
    Inconsistent,
    #[error("distance search exceeded its budget of {0} rank checks")]
    BudgetExceeded(u64),
    #[error("invalid composed-code JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Gf(#[from] GfError),
}

// ---------------------------------------------------------------------------
// Dense matrices over a field (desk scale)
// ---------------------------------------------------------------------------

/// Row-major generator matrix of a linear code: n rows, N columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
    field: Field,
}

impl GeneratorMatrix {
    pub fn new(rows: usize, cols: usize, field: Field) -> GeneratorMatrix {
        GeneratorMatrix {
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
            field,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    /// Rank of the submatrix restricted to the given columns.
    pub fn column_rank(&self, columns: &[usize]) -> usize {
        let mut work: Vec<Vec<FieldElement>> = (0..self.rows)
            .map(|r| columns.iter().map(|&c| self.at(r, c)).collect())
            .collect();
        gauss_rank(&mut work, self.field)
    }

    /// Encode a message (row vector times the matrix).
    pub fn encode(&self, message: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(message.len(), self.rows);
        (0..self.cols)
            .map(|c| {
                (0..self.rows).fold(self.field.zero(), |acc, r| acc + message[r] * self.at(r, c))
            })
            .collect()
    }
}

/// Scale a row in place: row[from..] *= factor.
fn row_scale(row: &mut [FieldElement], factor: FieldElement, from: usize) {
    for x in &mut row[from..] {
        *x = *x * factor;
    }
}

/// Eliminate: dst[from..] -= factor * src[from..].
fn row_eliminate(
    dst: &mut [FieldElement],
    src: &[FieldElement],
    factor: FieldElement,
    from: usize,
) {
    for (d, s) in dst[from..].iter_mut().zip(&src[from..]) {
        *d = *d - factor * *s;
    }
}

/// Row-echelon rank over the field; destroys `work`.
fn gauss_rank(work: &mut [Vec<FieldElement>], _field: Field) -> usize {
    let rows = work.len();
    if rows == 0 {
        return 0;
    }
    let cols = work[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !work[r][col].is_zero()) else {
            continue;
        };
        work.swap(rank, pivot);
        let inv = work[rank][col].inv().expect("pivot nonzero");
        row_scale(&mut work[rank], inv, col);
        let pivot_row = work[rank].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = row[col];
                row_eliminate(row, &pivot_row, factor, col);
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Solve `x · A = b` for the row vector `x`, where A is given by its columns
/// (each of length n). Requires the columns to span rank n; checks
/// consistency of the remaining equations.
fn solve_row_system(
    columns: &[Vec<FieldElement>],
    b: &[FieldElement],
    n: usize,
    field: Field,
) -> Result<Vec<FieldElement>, FaultError> {
    // Augmented transpose: one equation per column, unknowns x_0..x_{n-1}.
    let mut work: Vec<Vec<FieldElement>> = columns
        .iter()
        .zip(b)
        .map(|(col, &rhs)| {
            let mut row = col.clone();
            row.push(rhs);
            row
        })
        .collect();
    let rows = work.len();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows).find(|&r| !work[r][col].is_zero()) else {
            continue;
        };
        work.swap(rank, p);
        let inv = work[rank][col].inv().expect("pivot nonzero");
        row_scale(&mut work[rank], inv, 0);
        let pivot_row = work[rank].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = row[col];
                row_eliminate(row, &pivot_row, factor, 0);
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.min(n) {
            break;
        }
    }
    if rank < n {
        return Err(FaultError::RankDeficient { rank, n });
    }
    // Rows beyond the rank must have reduced to 0 = 0.
    for row in work.iter().skip(rank) {
        if !row[n].is_zero() {
            return Err(FaultError::Inconsistent);
        }
    }
    let mut x = vec![field.zero(); n];
    for (r, &col) in pivot_cols.iter().enumerate() {
        x[col] = work[r][n];
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Systematic MDS codes
// ---------------------------------------------------------------------------

/// An [n, n+p] systematic MDS code over a prime field GF(P), P > n + p.
/// Every n columns of the generator are linearly independent, so the
/// distance is p + 1 and any p erasures are recoverable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsCode {
    n: usize,
    p: usize,
    field: Field,
    /// n rows of p parity coefficients.
    parity: Vec<Vec<FieldElement>>,
}

/// Systematize an (n+p)-column Vandermonde code over GF(prime): evaluation
/// points 0..n+p, generator `A⁻¹·V = [I | E]`.
pub fn rs_systematic(n: usize, p: usize, prime: u64) -> Result<MdsCode, FaultError> {
    let field = Field::new(prime, false)?;
    let total = (n + p) as u64;
    if prime <= total {
        return Err(FaultError::FieldTooSmall {
            p: prime,
            needed: total,
        });
    }
    // V[r][c] = c^r; A = first n columns.
    let vandermonde = |r: usize, c: usize| field.elem(c as u64).pow(r as u64);
    // Invert A by Gauss-Jordan on [A | I].
    let mut work: Vec<Vec<FieldElement>> = (0..n)
        .map(|r| {
            let mut row: Vec<FieldElement> = (0..n).map(|c| vandermonde(r, c)).collect();
            row.extend((0..n).map(|c| if c == r { field.one() } else { field.zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !work[r][col].is_zero())
            .expect("Vandermonde block is invertible");
        work.swap(col, pivot);
        let inv = work[col][col].inv().expect("pivot nonzero");
        row_scale(&mut work[col], inv, 0);
        let pivot_row = work[col].clone();
        for (r, row) in work.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let factor = row[col];
                row_eliminate(row, &pivot_row, factor, 0);
            }
        }
    }
    // E = A⁻¹ · V[:, n..n+p].
    let parity: Vec<Vec<FieldElement>> = (0..n)
        .map(|r| {
            (0..p)
                .map(|j| {
                    (0..n).fold(field.zero(), |acc, t| {
                        acc + work[r][n + t] * vandermonde(t, n + j)
                    })
                })
                .collect()
        })
        .collect();
    Ok(MdsCode {
        n,
        p,
        field,
        parity,
    })
}

impl MdsCode {
    pub fn message_len(&self) -> usize {
        self.n
    }

    pub fn parity_count(&self) -> usize {
        self.p
    }

    pub fn total_len(&self) -> usize {
        self.n + self.p
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Minimum distance of an MDS code: p + 1.
    pub fn distance(&self) -> usize {
        self.p + 1
    }

    pub fn parity_coefficient(&self, row: usize, col: usize) -> FieldElement {
        self.parity[row][col]
    }

    /// Systematic encoding (x, x·E).
    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>, FaultError> {
        if message.len() != self.n {
            return Err(FaultError::CodewordLength {
                expected: self.n,
                got: message.len(),
            });
        }
        let mut cw = message.to_vec();
        for j in 0..self.p {
            let sum = (0..self.n).fold(self.field.zero(), |acc, i| {
                acc + message[i] * self.parity[i][j]
            });
            cw.push(sum);
        }
        Ok(cw)
    }

    pub fn generator(&self) -> GeneratorMatrix {
        let mut g = GeneratorMatrix::new(self.n, self.total_len(), self.field);
        for r in 0..self.n {
            g.set(r, r, self.field.one());
            for j in 0..self.p {
                g.set(r, self.n + j, self.parity[r][j]);
            }
        }
        g
    }
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Batch code and MDS code over one message, codewords
/// (x, batch parities, MDS parities). The batch scheduler only ever touches
/// the first N_B coordinates; the MDS parities live in fresh buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedCode {
    batch: SystematicCode,
    mds: MdsCode,
}

/// Compose a graph-backed batch code with MDS parities. The batch part is
/// lifted into the MDS field: all-ones parities stay valid over any field.
pub fn compose(batch: &SystematicCode, mds: &MdsCode) -> Result<ComposedCode, FaultError> {
    if batch.message_len() != mds.message_len() {
        return Err(FaultError::MessageLengthMismatch {
            batch: batch.message_len(),
            mds: mds.message_len(),
        });
    }
    let lifted = SystematicCode::from_graph(batch.graph().clone(), mds.field());
    Ok(ComposedCode {
        batch: lifted,
        mds: mds.clone(),
    })
}

impl ComposedCode {
    pub fn message_len(&self) -> usize {
        self.batch.message_len()
    }

    /// N = N_B + p.
    pub fn total_len(&self) -> usize {
        self.batch.total_len() + self.mds.parity_count()
    }

    pub fn field(&self) -> Field {
        self.mds.field()
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.message_len() as u64, self.total_len() as u64)
    }

    /// The batch part, lifted into the MDS field; scheduling runs on this.
    pub fn batch_part(&self) -> &SystematicCode {
        &self.batch
    }

    pub fn mds_part(&self) -> &MdsCode {
        &self.mds
    }

    /// Distance guaranteed by composition: the MDS part's p + 1.
    pub fn distance_lower_bound(&self) -> usize {
        self.mds.distance()
    }

    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>, FaultError> {
        let mut cw = self.batch.encode(message)?;
        cw.extend(self.mds.encode(message)?.split_off(self.message_len()));
        Ok(cw)
    }

    pub fn generator(&self) -> GeneratorMatrix {
        let n = self.message_len();
        let field = self.field();
        let mut g = GeneratorMatrix::new(n, self.total_len(), field);
        for r in 0..n {
            g.set(r, r, field.one());
        }
        let graph = self.batch.graph();
        for j in 0..graph.n2() {
            for &i in graph.right_neighbors(j) {
                g.set(i, n + j, field.one());
            }
        }
        let offset = self.batch.total_len();
        for r in 0..n {
            for j in 0..self.mds.parity_count() {
                g.set(r, offset + j, self.mds.parity_coefficient(r, j));
            }
        }
        g
    }

    /// JSON: `{"batch": <code json>, "mds": {"n","p","field_p","parity"}}`.
    pub fn to_json(&self) -> Result<String, FaultError> {
        let batch: serde_json::Value =
            serde_json::from_str(&self.batch.to_json()?).expect("code json is valid");
        let parity: Vec<Vec<u64>> = self
            .mds
            .parity
            .iter()
            .map(|row| row.iter().map(|x| x.base_coord()).collect())
            .collect();
        Ok(serde_json::to_string(&ComposedJson {
            batch,
            mds: MdsJson {
                n: self.mds.n,
                p: self.mds.p,
                field_p: self.mds.field.characteristic(),
                parity,
            },
        })
        .expect("composed serialization cannot fail"))
    }

    pub fn from_json(text: &str) -> Result<ComposedCode, FaultError> {
        let raw: ComposedJson =
            serde_json::from_str(text).map_err(|e| FaultError::Json(e.to_string()))?;
        let batch = SystematicCode::from_json(&raw.batch.to_string())?;
        let field = Field::new(raw.mds.field_p, false)?;
        if raw.mds.parity.len() != raw.mds.n || raw.mds.parity.iter().any(|r| r.len() != raw.mds.p)
        {
            return Err(FaultError::Json("parity matrix shape mismatch".to_string()));
        }
        let mds = MdsCode {
            n: raw.mds.n,
            p: raw.mds.p,
            field,
            parity: raw
                .mds
                .parity
                .iter()
                .map(|row| row.iter().map(|&v| field.elem(v)).collect())
                .collect(),
        };
        compose(&batch, &mds)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdsJson {
    n: usize,
    p: usize,
    field_p: u64,
    parity: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposedJson {
    batch: serde_json::Value,
    mds: MdsJson,
}

// ---------------------------------------------------------------------------
// Erasure recovery and minimum distance
// ---------------------------------------------------------------------------

/// Recover the message from a codeword with known erasures (None entries).
/// Solves the linear system over the surviving generator columns; succeeds
/// exactly when they have full rank n.
pub fn erasure_recover(
    gen: &GeneratorMatrix,
    codeword: &[Option<FieldElement>],
) -> Result<Vec<FieldElement>, FaultError> {
    if codeword.len() != gen.cols() {
        return Err(FaultError::CodewordLength {
            expected: gen.cols(),
            got: codeword.len(),
        });
    }
    let mut columns = Vec::new();
    let mut values = Vec::new();
    for (c, slot) in codeword.iter().enumerate() {
        if let Some(v) = slot {
            columns.push((0..gen.rows()).map(|r| gen.at(r, c)).collect());
            values.push(*v);
        }
    }
    solve_row_system(&columns, &values, gen.rows(), field_of(gen))
}

fn field_of(gen: &GeneratorMatrix) -> Field {
    gen.field
}

/// Check that every erasure pattern of the given size is recoverable,
/// i.e. all complements have full column rank. Returns the first failing
/// pattern otherwise.
pub fn verify_erasure_tolerance(gen: &GeneratorMatrix, erasures: usize) -> Result<(), Vec<usize>> {
    let cols: Vec<usize> = (0..gen.cols()).collect();
    for pattern in cols.iter().copied().combinations(erasures) {
        let survivors: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|c| !pattern.contains(c))
            .collect();
        if gen.column_rank(&survivors) < gen.rows() {
            return Err(pattern);
        }
    }
    Ok(())
}

/// Exact minimum distance by maximal-erasure search: the distance is the
/// smallest erasure count whose complement can lose rank. The budget caps
/// the number of rank checks. Expects a full-rank generator with at least
/// as many columns as rows.
pub fn min_distance(gen: &GeneratorMatrix, budget: u64) -> Result<usize, FaultError> {
    let n = gen.rows();
    assert!(
        n >= 1 && gen.cols() >= n,
        "generator must be n x N with N >= n >= 1"
    );
    let cols: Vec<usize> = (0..gen.cols()).collect();
    let mut checks = 0u64;
    for e in 1..=gen.cols().saturating_sub(n) + 1 {
        for pattern in cols.iter().copied().combinations(e) {
            checks += 1;
            if checks > budget {
                return Err(FaultError::BudgetExceeded(budget));
            }
            let survivors: Vec<usize> = cols
                .iter()
                .copied()
                .filter(|c| !pattern.contains(c))
                .collect();
            if gen.column_rank(&survivors) < n {
                return Ok(e);
            }
        }
    }
    // Full-rank generator: some pattern of size N - n + 1 always fails.
    unreachable!("distance search is bounded by the Singleton bound")
}

/// Generator of a graph-backed systematic code (all-ones parities).
pub fn generator_of_code(code: &SystematicCode) -> GeneratorMatrix {
    let n = code.message_len();
    let field = code.field();
    let mut g = GeneratorMatrix::new(n, code.total_len(), field);
    for r in 0..n {
        g.set(r, r, field.one());
    }
    let graph = code.graph();
    for j in 0..graph.n2() {
        for &i in graph.right_neighbors(j) {
            g.set(i, n + j, field.one());
        }
    }
    g
}
