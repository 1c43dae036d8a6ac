//! Statistical and econometric tests.

pub mod adf;
pub mod breaks;
pub mod correlation;
mod linalg;
pub mod mann_whitney;
pub mod ols;

pub use adf::{adf_test, AdfResult, Deterministic, Significance};
pub use breaks::{detect_breaks, BreakModelConfig, BreakResult, SegmentFit};
pub use correlation::{pearson, pearson_pairwise};
pub use linalg::Matrix;
pub use mann_whitney::{mann_whitney_u, TestResult};
pub use ols::{ols, OlsFit};
