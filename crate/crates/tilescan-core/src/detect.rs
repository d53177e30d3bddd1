//! Reference-comparison defect detection.
//!
//! A test tile is compared to a known-good reference of the same product
//! line by counting marked pixels in both binarized images: strictly more
//! marked pixels in the test matrix means a defect is present.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMatrix;

/// Outcome of comparing a test matrix against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Marked-pixel count of the test matrix.
    pub n1: usize,
    /// Marked-pixel count of the reference matrix.
    pub n2: usize,
    pub defective: bool,
}

/// Number of cells equal to 1.
pub fn count_marked(bin: &BinaryMatrix) -> usize {
    bin.as_cells().iter().filter(|&&c| c == 1).count()
}

/// Strict comparison rule: defective iff n1 > n2.
pub fn detect_defect(test: &BinaryMatrix, reference: &BinaryMatrix) -> Result<DetectionResult> {
    detect_defect_with_margin(test, reference, 0)
}

/// Comparison with a tolerance margin for noisy corpora: defective iff
/// n1 > n2 + margin. Margin 0 reproduces the strict rule.
pub fn detect_defect_with_margin(
    test: &BinaryMatrix,
    reference: &BinaryMatrix,
    margin: usize,
) -> Result<DetectionResult> {
    if !test.same_shape(reference) {
        return Err(Error::DimensionMismatch(format!(
            "test is {}x{}, reference is {}x{}",
            test.rows(),
            test.cols(),
            reference.rows(),
            reference.cols()
        )));
    }
    let n1 = count_marked(test);
    let n2 = count_marked(reference);
    Ok(DetectionResult {
        n1,
        n2,
        defective: n1 > n2 + margin,
    })
}
