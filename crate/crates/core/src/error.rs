use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("NotHermitian: max|m - m^dagger| = {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("NotUnitTrace: |tr - 1| = {residual:.3e}")]
    NotUnitTrace { residual: f64 },
    #[error("NotPositive: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("NotIdempotent: max|P^2 - P| = {residual:.3e}")]
    NotIdempotent { residual: f64 },
    #[error("NonIntegerRank: tr(P) = {trace}")]
    NonIntegerRank { trace: f64 },
    #[error("NotOrthogonal: projectors {first} and {second} overlap by {residual:.3e}")]
    NotOrthogonal { first: usize, second: usize, residual: f64 },
    #[error("Incomplete: max|sum P_i - 1| = {residual:.3e}")]
    Incomplete { residual: f64 },
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("NonCommuting: max commutator norm {max_commutator:.3e}")]
    NonCommuting { max_commutator: f64 },
    #[error("MissingTensorStructure: {0}")]
    MissingTensorStructure(String),
    #[error("NotNormalized: state norm {norm}")]
    NotNormalized { norm: f64 },
    #[error("NotTracePreserving: max|sum K^dagger K - 1| = {residual:.3e}")]
    NotTracePreserving { residual: f64 },
    #[error("NotLocallyTracePreserving: subsystem {subsystem}, residual {residual:.3e}")]
    NotLocallyTracePreserving { subsystem: usize, residual: f64 },
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("NotNormalizedChi: cell {cell} has sum |chi_i|^2 = {sum}")]
    NotNormalizedChi { cell: usize, sum: f64 },
    #[error("InvalidDensity: {0}")]
    InvalidDensity(String),
    #[error("IncompatibleGrid: {0}")]
    IncompatibleGrid(String),
    #[error("NonProductGrid: {0}")]
    NonProductGrid(String),
    #[error("NonPositiveBinWidth: {0}")]
    NonPositiveBinWidth(f64),
    #[error("EmptyWindow: no eigenvalue in [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("MissingBlocks: {0}")]
    MissingBlocks(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
