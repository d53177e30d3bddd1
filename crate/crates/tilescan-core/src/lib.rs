//! Surface-defect detection and classification for ceramic tile images.
//!
//! The pipeline turns a tile photograph into a binary edge matrix
//! (grayscale, contrast stretch, median filter, Sobel, relative threshold),
//! compares it against a known-good reference to decide defective/clean,
//! relabels it morphologically, and classifies defects into six classes:
//! pinhole, crack, blob, spot, edge and corner.
//!
//! The [`synth`] module generates deterministic synthetic tile corpora with
//! injected defects; [`harness`] batch-evaluates a corpus and reports
//! detection efficiency, per-class rates and timing.

pub mod classify;
pub mod config;
pub mod detect;
pub mod error;
pub mod harness;
pub mod label;
pub mod preprocess;
pub mod raster;
pub mod synth;

pub use classify::{classify_all, DefectReport};
pub use config::ClassifierConfig;
pub use detect::{count_marked, detect_defect, DetectionResult};
pub use error::{Error, Result};
pub use label::{build_label_matrix, LabelMatrix, TileMode};
pub use preprocess::preprocess_pipeline;
pub use raster::{load_image, to_gray, trim, BinaryMatrix, GrayImage, RasterImage};
pub use synth::{generate_corpus, generate_tile, inject_defect, DefectKind};
