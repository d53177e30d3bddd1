//! Raster data types and the ingestion layer: image decoding, trimming and
//! grayscale conversion.
//!
//! All pixel grids are row-major. `RasterImage` is always 3-channel RGB;
//! grayscale sources are expanded to three identical channels on load.

use std::path::Path;

use crate::error::{Error, Result};

/// Decoded 8-bit RGB image, row-major, 3 interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RasterImage {
    /// Build an image from raw interleaved RGB bytes.
    ///
    /// Fails if either dimension is zero or `data` is not exactly
    /// `width * height * 3` bytes long.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height * 3 {
            return Err(Error::Dimension(format!(
                "pixel buffer holds {} bytes, expected {}",
                data.len(),
                width * height * 3
            )));
        }
        Ok(RasterImage {
            width,
            height,
            data,
        })
    }

    /// Uniform-color image.
    pub fn filled(width: usize, height: usize, rgb: (u8, u8, u8)) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&[rgb.0, rgb.1, rgb.2]);
        }
        Self::from_raw(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, row: usize, col: usize) -> (u8, u8, u8) {
        let i = (row * self.width + col) * 3;
        (self.data[i], self.data[i + 1], self.data[i + 2])
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, rgb: (u8, u8, u8)) {
        let i = (row * self.width + col) * 3;
        self.data[i] = rgb.0;
        self.data[i + 1] = rgb.1;
        self.data[i + 2] = rgb.2;
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }
}

/// Single-channel 8-bit image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "pixel buffer holds {} bytes, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::from_raw(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    /// Value at (row, col) with replicate padding outside the image.
    pub fn get_clamped(&self, row: isize, col: isize) -> u8 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.get(r, c)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }
}

/// 0/1 grid; 1 marks a defect-candidate pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl BinaryMatrix {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be at least 1x1, got {rows}x{cols}"
            )));
        }
        Ok(BinaryMatrix {
            rows,
            cols,
            cells: vec![0; rows * cols],
        })
    }

    /// Build from explicit cells; every cell must be 0 or 1.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "cell buffer holds {} entries, expected {rows}x{cols}",
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&v| v > 1) {
            return Err(Error::Param(format!(
                "binary matrix cell must be 0 or 1, got {bad}"
            )));
        }
        Ok(BinaryMatrix { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        debug_assert!(value <= 1);
        self.cells[row * self.cols + col] = value;
    }

    pub fn as_cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn same_shape(&self, other: &BinaryMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

/// Decode a PNG or BMP file into an RGB raster.
///
/// Grayscale sources are expanded to three identical channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    let decoded = image::load_from_memory(&bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rgb = decoded.to_rgb8();
    RasterImage::from_raw(rgb.width() as usize, rgb.height() as usize, rgb.into_raw())
}

/// Centered m-by-n crop (m = width, n = height).
///
/// The crop offset is floor((width - m) / 2), floor((height - n) / 2).
pub fn trim(img: &RasterImage, m: usize, n: usize) -> Result<RasterImage> {
    if m == 0 || n == 0 || m > img.width() || n > img.height() {
        return Err(Error::Dimension(format!(
            "cannot trim {}x{} image to {m}x{n}",
            img.width(),
            img.height()
        )));
    }
    let col0 = (img.width() - m) / 2;
    let row0 = (img.height() - n) / 2;
    let mut data = Vec::with_capacity(m * n * 3);
    for r in row0..row0 + n {
        let start = (r * img.width() + col0) * 3;
        data.extend_from_slice(&img.as_raw()[start..start + m * 3]);
    }
    RasterImage::from_raw(m, n, data)
}

/// RGB to gray via BT.601 luma: round(0.299 R + 0.587 G + 0.114 B).
pub fn to_gray(img: &RasterImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.width() * img.height());
    for chunk in img.as_raw().chunks_exact(3) {
        let y = 0.299 * chunk[0] as f64 + 0.587 * chunk[1] as f64 + 0.114 * chunk[2] as f64;
        data.push(y.round().clamp(0.0, 255.0) as u8);
    }
    GrayImage::from_raw(img.width(), img.height(), data).expect("source image is non-empty")
}
