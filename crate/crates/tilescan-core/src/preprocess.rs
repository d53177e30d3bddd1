//! Enhancement, noise reduction, edge detection and binarization.
//!
//! The tile pipeline composes these in order: grayscale conversion, contrast
//! stretch, median filter, Sobel gradient, relative threshold. Every step is
//! a pure function; borders are handled with replicate padding throughout so
//! the image edge itself never produces a gradient response.

use serde::{Deserialize, Serialize};

use crate::config::ClassifierConfig;
use crate::error::{Error, Result};
use crate::raster::{to_gray, BinaryMatrix, GrayImage, RasterImage};

/// Smallest increment constant used by the sigmoid stretch: 2^-52.
pub const EPS: f64 = f64::EPSILON;

/// Which contrast stretch feeds the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StretchVariant {
    Linear,
    Sigmoid,
}

/// Parameters of the two contrast-stretch transforms.
///
/// `midpoint` is the sigmoid midpoint M on the normalized [0, 1] scale. When
/// unset it defaults to the mean of the 3x3-median-filtered normalized image.
/// `exponent` is the sigmoid slope E. `n_levels` and `initial_level` are the
/// intensity-level count and offset of the linear stretch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchParams {
    pub midpoint: Option<f64>,
    pub exponent: f64,
    pub n_levels: u32,
    pub initial_level: u32,
}

impl Default for StretchParams {
    fn default() -> Self {
        StretchParams {
            midpoint: None,
            exponent: 4.0,
            n_levels: 256,
            initial_level: 0,
        }
    }
}

impl StretchParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.midpoint {
            if !(m > 0.0 && m <= 1.0) {
                return Err(Error::Param(format!(
                    "stretch midpoint must lie in (0, 1], got {m}"
                )));
            }
        }
        if !(self.exponent > 0.0) {
            return Err(Error::Param(format!(
                "stretch exponent must be positive, got {}",
                self.exponent
            )));
        }
        // The 8-bit gray image cannot represent more than 256 levels.
        if self.n_levels < 2 || self.n_levels > 256 {
            return Err(Error::Param(format!(
                "n_levels must lie in [2, 256], got {}",
                self.n_levels
            )));
        }
        if self.initial_level > self.n_levels - 1 {
            return Err(Error::Param(format!(
                "initial_level {} exceeds n_levels - 1 = {}",
                self.initial_level,
                self.n_levels - 1
            )));
        }
        Ok(())
    }
}

/// Non-negative per-pixel gradient magnitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientImage {
    rows: usize,
    cols: usize,
    magnitude: Vec<u32>,
}

impl GradientImage {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.magnitude[row * self.cols + col]
    }

    pub fn as_magnitudes(&self) -> &[u32] {
        &self.magnitude
    }
}

/// Two-pass range stretch: pass one finds min/max, pass two maps each pixel
/// by (v - min) * (n_levels - 1) / (max - min) + initial_level, rounded half
/// up and clamped to the level range. A constant image is returned unchanged.
pub fn stretch_linear(gray: &GrayImage, params: &StretchParams) -> GrayImage {
    let lo = *gray.as_raw().iter().min().expect("image is non-empty");
    let hi = *gray.as_raw().iter().max().expect("image is non-empty");
    if lo == hi {
        return gray.clone();
    }
    let scale = (params.n_levels - 1) as f64 / (hi - lo) as f64;
    let top = (params.n_levels - 1) as f64;
    let offset = params.initial_level as f64;
    let data = gray
        .as_raw()
        .iter()
        .map(|&v| ((v - lo) as f64 * scale + offset).round().min(top) as u8)
        .collect();
    GrayImage::from_raw(gray.width(), gray.height(), data).expect("shape preserved")
}

/// Sigmoid stretch: g = 1 / (1 + (M / (f + eps))^E) on the normalized image,
/// rescaled back to [0, 255]. Monotone non-decreasing in input intensity.
pub fn stretch_sigmoid(gray: &GrayImage, params: &StretchParams) -> GrayImage {
    let m = params.midpoint.unwrap_or_else(|| default_midpoint(gray));
    let e = params.exponent;
    let data = gray
        .as_raw()
        .iter()
        .map(|&v| {
            let f = v as f64 / 255.0;
            let g = 1.0 / (1.0 + (m / (f + EPS)).powf(e));
            (g * 255.0).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::from_raw(gray.width(), gray.height(), data).expect("shape preserved")
}

/// Default sigmoid midpoint: mean of the 3x3-median-filtered image on the
/// normalized scale.
pub fn default_midpoint(gray: &GrayImage) -> f64 {
    let filtered = median_filter(gray, 3).expect("window 3 is always valid");
    let sum: u64 = filtered.as_raw().iter().map(|&v| v as u64).sum();
    sum as f64 / filtered.as_raw().len() as f64 / 255.0
}

/// Replace each pixel with the median of its window x window neighborhood,
/// replicate-padded at the borders. The window must be odd and at least 3.
pub fn median_filter(gray: &GrayImage, window: usize) -> Result<GrayImage> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::Param(format!(
            "median window must be odd and >= 3, got {window}"
        )));
    }
    let half = (window / 2) as isize;
    let mut neighborhood = vec![0u8; window * window];
    let mut data = Vec::with_capacity(gray.width() * gray.height());
    for r in 0..gray.height() as isize {
        for c in 0..gray.width() as isize {
            let mut n = 0;
            for dr in -half..=half {
                for dc in -half..=half {
                    neighborhood[n] = gray.get_clamped(r + dr, c + dc);
                    n += 1;
                }
            }
            let mid = neighborhood.len() / 2;
            let (_, median, _) = neighborhood.select_nth_unstable(mid);
            data.push(*median);
        }
    }
    GrayImage::from_raw(gray.width(), gray.height(), data)
}

const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
const SOBEL_Y: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

/// 3x3 Sobel response with replicate padding; magnitude is |Gx| + |Gy|.
pub fn sobel_edges(gray: &GrayImage) -> GradientImage {
    let mut magnitude = Vec::with_capacity(gray.width() * gray.height());
    for r in 0..gray.height() as isize {
        for c in 0..gray.width() as isize {
            let mut gx = 0i32;
            let mut gy = 0i32;
            for dr in -1..=1isize {
                for dc in -1..=1isize {
                    let v = gray.get_clamped(r + dr, c + dc) as i32;
                    gx += SOBEL_X[(dr + 1) as usize][(dc + 1) as usize] * v;
                    gy += SOBEL_Y[(dr + 1) as usize][(dc + 1) as usize] * v;
                }
            }
            magnitude.push((gx.abs() + gy.abs()) as u32);
        }
    }
    GradientImage {
        rows: gray.height(),
        cols: gray.width(),
        magnitude,
    }
}

/// Threshold at tau times the maximum magnitude. A cell is 1 iff its
/// magnitude reaches the threshold and the image has any response at all;
/// an all-zero gradient yields an all-zero matrix.
pub fn binarize(grad: &GradientImage, tau: f64) -> Result<BinaryMatrix> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Param(format!("tau must lie in (0, 1], got {tau}")));
    }
    let max = *grad.as_magnitudes().iter().max().expect("non-empty");
    let mut out = BinaryMatrix::zeros(grad.rows(), grad.cols())?;
    if max == 0 {
        return Ok(out);
    }
    let threshold = tau * max as f64;
    for r in 0..grad.rows() {
        for c in 0..grad.cols() {
            if grad.get(r, c) as f64 >= threshold {
                out.set(r, c, 1);
            }
        }
    }
    Ok(out)
}

/// Full preprocessing chain: gray, stretch, median, Sobel, binarize.
pub fn preprocess_pipeline(img: &RasterImage, cfg: &ClassifierConfig) -> Result<BinaryMatrix> {
    let gray = to_gray(img);
    let stretched = match cfg.stretch_variant {
        StretchVariant::Linear => stretch_linear(&gray, &cfg.stretch),
        StretchVariant::Sigmoid => stretch_sigmoid(&gray, &cfg.stretch),
    };
    let filtered = median_filter(&stretched, cfg.median_window)?;
    let grad = sobel_edges(&filtered);
    binarize(&grad, cfg.tau)
}
