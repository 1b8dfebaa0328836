//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants carry enough data
//! for the CLI to map them onto machine-readable error codes.

use num_complex::Complex64;
use thiserror::Error;

/// Stage labels for pipeline errors raised by the interpolation solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStage {
    BuildSymmData,
    Kernels,
    Feasibility,
    Lurking,
    Symmetrize,
    ToGamma,
    Diagnostics,
}

impl std::fmt::Display for SolveStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SolveStage::BuildSymmData => "build-symm-data",
            SolveStage::Kernels => "kernels",
            SolveStage::Feasibility => "feasibility",
            SolveStage::Lurking => "lurking",
            SolveStage::Symmetrize => "symmetrize",
            SolveStage::ToGamma => "to-gamma",
            SolveStage::Diagnostics => "diagnostics",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not positive semidefinite (min eigenvalue {eig_min:e})")]
    NotPsd { eig_min: f64 },

    #[error("matrix is not a contraction (operator norm {norm})")]
    NotContraction { norm: f64 },

    #[error("linear system numerically singular")]
    SingularSystem,

    #[error("evaluation singularity at ({}, {})", fmt_cx(.at.0), fmt_cx(.at.1))]
    EvalSingular { at: (Complex64, Complex64) },

    #[error("point ({}, {}) outside the open domain (pass allow_boundary for closure points)", fmt_cx(.at.0), fmt_cx(.at.1))]
    OutsideDomain { at: (Complex64, Complex64) },

    #[error("wrong polynomial coordinates: expected {expected}, got {got}")]
    WrongCoords {
        expected: &'static str,
        got: &'static str,
    },

    #[error("polynomial is not symmetric (max coefficient asymmetry {max_asym:e})")]
    NotSymmetric { max_asym: f64 },

    #[error("scale factor must exceed 1, got {0}")]
    BadScale(f64),

    #[error("grid must have at least {min} points per axis, got {got}")]
    BadGrid { min: usize, got: usize },

    #[error("conflicting values at merged node ({}, {}): {} vs {}", fmt_cx(.node.0), fmt_cx(.node.1), fmt_cx(*.first), fmt_cx(*.second))]
    ConflictingNode {
        node: (Complex64, Complex64),
        first: Complex64,
        second: Complex64,
    },

    #[error("certificate residual {residual:e} exceeds lurking threshold {threshold:e}")]
    CertificateResidual { residual: f64, threshold: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: SolveStage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: SolveStage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

fn fmt_cx(c: Complex64) -> String {
    format!("{}{:+}i", c.re, c.im)
}
