//! Exemplar-based inpainting with a z-curve multi-index.
//!
//! The dictionary of fully known patches is indexed eight times, once per
//! subset of patch pixels. Each index projects its subset onto the leading
//! principal components, quantizes to bytes, and sorts along a z-curve. A
//! target patch is answered by an exact knn query on the best-covering index
//! followed by a full cost evaluation on the candidates.

pub mod dictionary;
pub mod error;
pub mod image;
pub mod inpaint;
pub mod zcurve;

pub use error::{Error, Result};
