pub mod field;
pub mod inclusions;
pub mod linalg;
pub mod metrics;
pub mod scalars;
pub mod spectral;
pub mod tl;

pub use num_complex::Complex64;
