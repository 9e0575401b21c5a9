use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("index {index} out of range 0..={max} in {op}")]
    IndexOutOfRange {
        op: &'static str,
        index: usize,
        max: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Two states or observables built on different spaces (or phases).
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("numeric failure in {op}: {detail}")]
    NumericFailure { op: &'static str, detail: String },

    /// Two routes that must agree did not.
    #[error("internal consistency failure in {op}: {lhs} vs {rhs} (|diff| = {diff:e})")]
    Consistency {
        op: &'static str,
        lhs: f64,
        rhs: f64,
        diff: f64,
    },

    #[error("unknown molecule preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },

    #[error("preset file line {line}: {detail}")]
    PresetParse { line: usize, detail: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub fn numeric(op: &'static str, detail: impl Into<String>) -> Self {
        Error::NumericFailure {
            op,
            detail: detail.into(),
        }
    }

    /// Checks `|lhs - rhs| <= tol * max(1, |lhs|, |rhs|)`.
    pub(crate) fn check_agree(op: &'static str, lhs: f64, rhs: f64, tol: f64) -> Result<()> {
        let diff = (lhs - rhs).abs();
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        if diff <= tol * scale {
            Ok(())
        } else {
            Err(Error::Consistency { op, lhs, rhs, diff })
        }
    }
}
