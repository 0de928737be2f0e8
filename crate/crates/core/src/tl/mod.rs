//! Temperley–Lieb planar calculus with symbolic loop parameter δ.

mod biprojection;
mod diagram;
mod element;
mod expr;

pub use biprojection::{is_biprojection, BiprojectionReport};
pub use diagram::PlanarDiagram;
pub use element::{jones_wenzl, jones_wenzl_at, TLElement};
pub use expr::{tl_eval, tl_eval_at, DeltaValue, TlValue};

use thiserror::Error;

use crate::scalars::ScalarError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TlError {
    #[error("box size mismatch: {0}")]
    BoxSize(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("degenerate specialization: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}
