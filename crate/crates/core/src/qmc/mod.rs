//! Low-discrepancy points and the random variables built from them.

pub mod draws;
pub mod normal;
pub mod sobol;

pub use draws::{draws_for, dims_per_path, DrawBlock, DrawMode, Source};
pub use normal::{inv_normal_cdf, norm_cdf, norm_pdf};
pub use sobol::{sobol_points, PointSet, SobolSequence};
