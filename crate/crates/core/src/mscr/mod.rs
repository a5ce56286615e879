//! The exact-repair cooperative code with `d = k`.
//!
//! A stripe of `k*r` symbols is laid out row-major as an `r x k` message
//! matrix `M`. The generator `G` is the `k x n` Vandermonde matrix over the
//! evaluation points, and node `j` stores column `j` of `M G`, i.e. the `r`
//! symbols `m_i^T g_j`. Any `k` columns determine `M` because every `k x k`
//! submatrix of `G` is invertible.

mod share_file;

pub use share_file::{read_share, write_share, SHARE_MAGIC, SHARE_VERSION};

use crate::galois::{smallest_prime_power_geq, Field, FieldSpec, GaloisError};
use crate::matrix::{Matrix, MatrixError};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum MscrError {
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("byte group at offset {offset} is not an element of the field (strict mapping)")]
    SymbolOutOfRange { offset: usize },
    #[error("need {needed} shares, got {got}")]
    TooFewShares { needed: usize, got: usize },
    #[error("node {0} appears more than once")]
    DuplicateNode(usize),
    #[error("node index {0} is outside 1..=n")]
    NodeOutOfRange(usize),
    #[error("inconsistent shares: {0}")]
    InconsistentShares(String),
    #[error("not a share file (bad magic)")]
    BadMagic,
    #[error("unsupported share format version {0}")]
    UnsupportedVersion(u8),
    #[error("share file is truncated")]
    Truncated,
    #[error("share checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("share header cannot represent {0}")]
    HeaderRange(String),
}

/// How the code field is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldMode {
    /// Smallest prime power `q >= n`.
    #[default]
    Auto,
    Gf256,
    Gf65536,
}

impl FromStr for FieldMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(FieldMode::Auto),
            "gf256" => Ok(FieldMode::Gf256),
            "gf65536" => Ok(FieldMode::Gf65536),
            other => Err(format!("unknown field mode `{other}`")),
        }
    }
}

impl fmt::Display for FieldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldMode::Auto => "auto",
            FieldMode::Gf256 => "gf256",
            FieldMode::Gf65536 => "gf65536",
        })
    }
}

impl FieldMode {
    pub fn field_for(self, n: usize) -> Result<Field, MscrError> {
        let spec = match self {
            FieldMode::Auto => smallest_prime_power_geq(n as u64)?,
            FieldMode::Gf256 => FieldSpec::with_default_modulus(2, 8)?,
            FieldMode::Gf65536 => FieldSpec::with_default_modulus(2, 16)?,
        };
        Ok(Field::new(spec))
    }
}

/// Byte-to-symbol policy for fields whose order is not a power of 256.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymbolMapping {
    /// Reject byte groups that do not encode a field element.
    #[default]
    Strict,
    /// Reduce byte groups modulo `q`. Not invertible; simulation payloads only.
    Lossy,
}

#[derive(Debug, Clone)]
pub struct CodeParams {
    n: usize,
    k: usize,
    r: usize,
    field: Field,
    points: Vec<u64>,
    generator: Matrix,
}

impl PartialEq for CodeParams {
    fn eq(&self, other: &Self) -> bool {
        (self.n, self.k, self.r) == (other.n, other.k, other.r)
            && self.field == other.field
            && self.points == other.points
    }
}

impl Eq for CodeParams {}

impl CodeParams {
    pub fn new(n: usize, k: usize, r: usize, mode: FieldMode) -> Result<Self, MscrError> {
        Self::check_dims(n, k, r)?;
        let field = mode.field_for(n)?;
        Self::with_field(n, k, r, field)
    }

    /// Uses the first `n` field elements as evaluation points.
    pub fn with_field(n: usize, k: usize, r: usize, field: Field) -> Result<Self, MscrError> {
        Self::check_dims(n, k, r)?;
        if (field.order() as u128) < n as u128 {
            return Err(MscrError::InvalidParams(format!(
                "field of order {} is smaller than n = {n}",
                field.order()
            )));
        }
        let points = field.first_elements(n);
        Self::with_points(n, k, r, field, points)
    }

    pub fn with_points(
        n: usize,
        k: usize,
        r: usize,
        field: Field,
        points: Vec<u64>,
    ) -> Result<Self, MscrError> {
        Self::check_dims(n, k, r)?;
        if points.len() != n {
            return Err(MscrError::InvalidParams(format!(
                "{} evaluation points for n = {n}",
                points.len()
            )));
        }
        let generator = Matrix::vandermonde(&field, k, &points)?;
        Ok(CodeParams {
            n,
            k,
            r,
            field,
            points,
            generator,
        })
    }

    fn check_dims(n: usize, k: usize, r: usize) -> Result<(), MscrError> {
        if k == 0 || r == 0 {
            return Err(MscrError::InvalidParams(
                "k and r must be at least 1".into(),
            ));
        }
        if k + r > n {
            return Err(MscrError::InvalidParams(format!(
                "need k <= n - r, got n = {n}, k = {k}, r = {r}"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Helpers per newcomer; this construction fixes `d = k`.
    pub fn d(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// Column `g_j` of the generator for 1-based node `j`.
    pub fn generator_column(&self, node: usize) -> Vec<u64> {
        self.generator.column(node - 1)
    }

    /// Generator columns for the given 1-based nodes.
    pub fn generator_columns(&self, nodes: &[usize]) -> Matrix {
        let cols: Vec<usize> = nodes.iter().map(|&j| j - 1).collect();
        self.generator.select_columns(&cols)
    }

    pub fn symbols_per_stripe(&self) -> usize {
        self.k * self.r
    }

    pub fn check_node(&self, node: usize) -> Result<(), MscrError> {
        if node == 0 || node > self.n {
            Err(MscrError::NodeOutOfRange(node))
        } else {
            Ok(())
        }
    }
}

/// One stripe laid out as an `r x k` matrix; row `i` is `m_i^T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageMatrix(Matrix);

impl MessageMatrix {
    pub fn new(params: &CodeParams, matrix: Matrix) -> Result<Self, MscrError> {
        if (matrix.rows(), matrix.cols()) != (params.r, params.k) {
            return Err(MscrError::Matrix(MatrixError::Dimension(format!(
                "message matrix must be {}x{}, got {}x{}",
                params.r,
                params.k,
                matrix.rows(),
                matrix.cols()
            ))));
        }
        if matrix.field() != params.field() {
            return Err(MscrError::Matrix(MatrixError::MixedFields));
        }
        Ok(MessageMatrix(matrix))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Row `i` (1-based), the vector `m_i^T`.
    pub fn row(&self, i: usize) -> &[u64] {
        self.0.row(i - 1)
    }
}

/// A payload split into stripes, zero padded to whole stripes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripedFile {
    stripes: Vec<MessageMatrix>,
    original_length: u64,
    padding: usize,
}

impl StripedFile {
    /// Lays out already-mapped symbols; `original_length` is the byte length they decode to.
    pub fn from_symbols(
        params: &CodeParams,
        mut symbols: Vec<u64>,
        original_length: u64,
    ) -> Result<Self, MscrError> {
        for &s in &symbols {
            params.field.check(s)?;
        }
        let per = params.symbols_per_stripe();
        let padding = (per - symbols.len() % per) % per;
        symbols.resize(symbols.len() + padding, 0);
        let stripes = symbols
            .chunks(per)
            .map(|chunk| {
                let m = Matrix::from_vec(&params.field, params.r, params.k, chunk.to_vec())?;
                Ok(MessageMatrix(m))
            })
            .collect::<Result<Vec<_>, MscrError>>()?;
        Ok(StripedFile {
            stripes,
            original_length,
            padding,
        })
    }

    pub fn stripes(&self) -> &[MessageMatrix] {
        &self.stripes
    }

    pub fn stripe_count(&self) -> usize {
        self.stripes.len()
    }

    pub fn original_length(&self) -> u64 {
        self.original_length
    }

    /// Zero symbols appended to fill the last stripe.
    pub fn padding(&self) -> usize {
        self.padding
    }

    /// All symbols, padding included, stripe-major and row-major within a stripe.
    pub fn symbols(&self) -> Vec<u64> {
        self.stripes
            .iter()
            .flat_map(|m| m.0.as_slice().iter().copied())
            .collect()
    }

    /// Serializes the symbols and truncates to the original byte length.
    pub fn to_bytes(&self, field: &Field) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.symbols().len() * field.symbol_width());
        for s in self.symbols() {
            field.write_symbol(s, &mut out);
        }
        out.truncate(self.original_length as usize);
        out
    }
}

/// Maps bytes to symbols in fixed-width big-endian groups and lays them out in stripes.
pub fn stripe(
    payload: &[u8],
    params: &CodeParams,
    mapping: SymbolMapping,
) -> Result<StripedFile, MscrError> {
    let field = &params.field;
    let width = field.symbol_width();
    let mut symbols = Vec::with_capacity(payload.len().div_ceil(width));
    let mut group = vec![0u8; width];
    for (i, chunk) in payload.chunks(width).enumerate() {
        group.fill(0);
        group[..chunk.len()].copy_from_slice(chunk);
        let sym = match mapping {
            SymbolMapping::Strict => field
                .read_symbol(&group)
                .map_err(|_| MscrError::SymbolOutOfRange { offset: i * width })?,
            SymbolMapping::Lossy => {
                let v = group.iter().fold(0u128, |acc, &b| (acc << 8) | b as u128);
                (v % field.order() as u128) as u64
            }
        };
        symbols.push(sym);
    }
    StripedFile::from_symbols(params, symbols, payload.len() as u64)
}

/// The data one node keeps: per stripe, the `r` symbols of its column of `M G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShare {
    node_index: usize,
    r: usize,
    stripe_count: usize,
    original_length: u64,
    symbols: Vec<u64>,
}

impl NodeShare {
    /// `symbols` is stripe-major with `r` symbols per stripe.
    pub fn new(
        node_index: usize,
        r: usize,
        original_length: u64,
        symbols: Vec<u64>,
    ) -> Result<Self, MscrError> {
        if r == 0 || symbols.len() % r != 0 {
            return Err(MscrError::InconsistentShares(format!(
                "{} symbols do not divide into columns of {r}",
                symbols.len()
            )));
        }
        Ok(NodeShare {
            node_index,
            r,
            stripe_count: symbols.len() / r,
            original_length,
            symbols,
        })
    }

    pub fn node_index(&self) -> usize {
        self.node_index
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn stripe_count(&self) -> usize {
        self.stripe_count
    }

    pub fn original_length(&self) -> u64 {
        self.original_length
    }

    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }

    /// The stored column for one stripe: `(m_1^T g_j, ..., m_r^T g_j)`.
    pub fn column(&self, stripe: usize) -> &[u64] {
        &self.symbols[stripe * self.r..(stripe + 1) * self.r]
    }

    /// Stored symbol `m_row^T g_j` (1-based row) of one stripe.
    pub fn symbol(&self, stripe: usize, row: usize) -> u64 {
        self.symbols[stripe * self.r + row - 1]
    }

    pub fn symbols_mut(&mut self) -> &mut [u64] {
        &mut self.symbols
    }
}

/// Encodes every stripe into the `n` node shares.
pub fn encode(file: &StripedFile, params: &CodeParams) -> Result<Vec<NodeShare>, MscrError> {
    let n = params.n;
    let r = params.r;
    let mut columns = vec![Vec::with_capacity(file.stripe_count() * r); n];
    for stripe in &file.stripes {
        if stripe.0.field() != params.field() || stripe.0.rows() != r || stripe.0.cols() != params.k
        {
            return Err(MscrError::InconsistentShares(
                "stripe does not match code parameters".into(),
            ));
        }
        let coded = stripe.0.mul(&params.generator)?;
        for (j, col) in columns.iter_mut().enumerate() {
            col.extend((0..r).map(|i| coded.get(i, j)));
        }
    }
    columns
        .into_iter()
        .enumerate()
        .map(|(j, symbols)| NodeShare::new(j + 1, r, file.original_length, symbols))
        .collect()
}

/// Checks that the shares come from distinct nodes of the same encoding.
pub(crate) fn check_consistent(
    params: &CodeParams,
    shares: &[&NodeShare],
) -> Result<(), MscrError> {
    let mut seen = BTreeSet::new();
    let first = shares.first();
    for s in shares {
        params.check_node(s.node_index)?;
        if !seen.insert(s.node_index) {
            return Err(MscrError::DuplicateNode(s.node_index));
        }
        if s.r != params.r {
            return Err(MscrError::InconsistentShares(format!(
                "node {} stores {} symbols per stripe, expected {}",
                s.node_index, s.r, params.r
            )));
        }
        if let Some(f) = first {
            if s.stripe_count != f.stripe_count || s.original_length != f.original_length {
                return Err(MscrError::InconsistentShares(format!(
                    "node {} disagrees with node {} on stripe count or length",
                    s.node_index, f.node_index
                )));
            }
        }
    }
    Ok(())
}

/// Recovers the striped file from any `k` shares (extra shares are ignored).
pub fn reconstruct(shares: &[NodeShare], params: &CodeParams) -> Result<StripedFile, MscrError> {
    let k = params.k;
    if shares.len() < k {
        return Err(MscrError::TooFewShares {
            needed: k,
            got: shares.len(),
        });
    }
    let used: Vec<&NodeShare> = shares.iter().take(k).collect();
    check_consistent(params, &used)?;
    let nodes: Vec<usize> = used.iter().map(|s| s.node_index).collect();
    let inverse = params.generator_columns(&nodes).invert()?;
    let r = params.r;
    let stripe_count = used[0].stripe_count;
    let mut symbols = Vec::with_capacity(stripe_count * k * r);
    for stripe in 0..stripe_count {
        // received (i, j) = m_i^T g_{c_j}
        let mut received = Matrix::zeros(params.field(), r, k);
        for (j, s) in used.iter().enumerate() {
            for i in 0..r {
                received.set(i, j, s.column(stripe)[i]);
            }
        }
        symbols.extend(received.mul(&inverse)?.into_vec());
    }
    let original_length = used[0].original_length;
    let width = params.field.symbol_width() as u64;
    let payload_symbols = original_length.div_ceil(width) as usize;
    if payload_symbols > symbols.len() {
        return Err(MscrError::InconsistentShares(
            "original length exceeds the stored stripes".into(),
        ));
    }
    let padding = symbols.len() - payload_symbols;
    let per = params.symbols_per_stripe();
    let stripes = symbols
        .chunks(per)
        .map(|c| {
            Ok(MessageMatrix(Matrix::from_vec(
                params.field(),
                r,
                k,
                c.to_vec(),
            )?))
        })
        .collect::<Result<Vec<_>, MscrError>>()?;
    Ok(StripedFile {
        stripes,
        original_length,
        padding,
    })
}

/// Convenience: reconstruct and unpad to the original bytes.
pub fn decode_payload(shares: &[NodeShare], params: &CodeParams) -> Result<Vec<u8>, MscrError> {
    Ok(reconstruct(shares, params)?.to_bytes(params.field()))
}
