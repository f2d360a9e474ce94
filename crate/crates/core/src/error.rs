//! Crate-wide error type.  Every fallible operation returns [`Result`];
//! variants carry enough context to name the offending matrix, row, or
//! vertex in CLI diagnostics.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix {name:?} has {rows} rows but row {row} has {cols} columns; expected square")]
    NonSquare {
        name: String,
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("matrix {name:?} entry ({row},{col}) = {value} is not finite")]
    NonFinite {
        name: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("matrix {name:?} entry ({row},{col}) = {value} is negative beyond the zero tolerance {zero_tol}")]
    NegativeEntry {
        name: String,
        row: usize,
        col: usize,
        value: f64,
        zero_tol: f64,
    },

    #[error("matrix {name:?} row {row} sums to {sum}, farther than {row_sum_tol} from 1")]
    RowSumViolation {
        name: String,
        row: usize,
        sum: f64,
        row_sum_tol: f64,
    },

    #[error("tolerance {name} = {value} out of range; tolerances must be finite, non-negative and below {max}")]
    ToleranceOutOfRange {
        name: &'static str,
        value: f64,
        max: f64,
    },

    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },

    #[error("cluster {cluster} lists vertex {vertex}, but the system has {n} vertices")]
    IndexOutOfRange {
        cluster: usize,
        vertex: usize,
        n: usize,
    },

    #[error("vertex {vertex} appears in clusters {first} and {second}")]
    Overlap {
        vertex: usize,
        first: usize,
        second: usize,
    },

    #[error("vertex {vertex} is not covered by any cluster")]
    NotCovering { vertex: usize },

    #[error("matrix set is empty")]
    EmptySet,

    #[error("duplicate matrix name {name:?}")]
    DuplicateMatrixName { name: String },

    #[error("dimension mismatch: {left} vs {right} ({context})")]
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    #[error("dimension {n} exceeds the cap {cap} for {context}")]
    DimensionTooLarge {
        n: usize,
        cap: usize,
        context: &'static str,
    },

    #[error("index {index} out of range for {context} of length {len}")]
    SequenceIndexOutOfRange {
        index: usize,
        len: usize,
        context: &'static str,
    },

    #[error("empty sequence given for {context}")]
    EmptySequence { context: &'static str },

    #[error("state budget {budget} exceeded after exploring {explored} pair states")]
    StateBudgetExceeded { budget: usize, explored: usize },

    #[error("unknown matrix name {name:?}")]
    UnknownMatrixName { name: String },

    #[error("common influence violated: {detail}")]
    CommonInfluenceViolated { detail: String },

    #[error("support mismatch at step {step}: numeric support {numeric} vs combinatorial support {combinatorial}")]
    SupportMismatch {
        step: usize,
        numeric: String,
        combinatorial: String,
    },

    #[error("switching policy error: {detail}")]
    Policy { detail: String },

    #[error("internal inconsistency: {detail}")]
    InternalInconsistency { detail: String },

    #[error("could not parse {context}: {detail}")]
    Parse { context: String, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the CLI: operational failures are 1; verdicts
    /// and disagreements carry their own codes at the call sites.
    pub fn exit_code(&self) -> i32 {
        1
    }
}
