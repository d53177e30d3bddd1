//! Morphological labeling: turn a binary edge matrix into the 0/1/2(/3)
//! label matrix the classifiers read, plus the matrix text-file format.
//!
//! Labels: 0 background, 1 thin edge pixel, 2 solid-region pixel (survivor
//! of hole filling plus erosion), 3 crack-claimed pixel (written later by
//! the crack classifier, never by this module).

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMatrix;

/// Plane tiles have an (almost) empty reference edge map; printed tiles
/// carry a pattern whose reference edges are subtracted before classifying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileMode {
    Plane,
    Printed,
}

impl std::fmt::Display for TileMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TileMode::Plane => write!(f, "plane"),
            TileMode::Printed => write!(f, "printed"),
        }
    }
}

impl std::str::FromStr for TileMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plane" => Ok(TileMode::Plane),
            "printed" => Ok(TileMode::Printed),
            other => Err(Error::Parse(format!("unknown tile mode `{other}`"))),
        }
    }
}

/// 0/1/2/3 grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl LabelMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix dimensions must be at least 1x1, got {rows}x{cols}"
            )));
        }
        Ok(LabelMatrix {
            rows,
            cols,
            cells: vec![0; rows * cols],
        })
    }

    /// Build from explicit cells; every cell must be in {0, 1, 2, 3}.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "cell buffer holds {} entries, expected {rows}x{cols}",
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&v| v > 3) {
            return Err(Error::Param(format!(
                "label cell must be in 0..=3, got {bad}"
            )));
        }
        Ok(LabelMatrix { rows, cols, cells })
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
        debug_assert!(value <= 3);
        self.cells[row * self.cols + col] = value;
    }

    pub fn as_cells(&self) -> &[u8] {
        &self.cells
    }
}

impl From<&BinaryMatrix> for LabelMatrix {
    fn from(bin: &BinaryMatrix) -> Self {
        LabelMatrix {
            rows: bin.rows(),
            cols: bin.cols(),
            cells: bin.as_cells().to_vec(),
        }
    }
}

/// Fill enclosed background regions.
///
/// A 4-connected 0-region fills when it touches no border at all. With
/// `framed` set, regions bounded jointly by a contour and the physical
/// image border also fill: a region whose border contact stays within one
/// side, or two sides sharing a corner, is a break region (chipped corner
/// or edge), not open background. Open background always touches opposite
/// sides of the image and is never filled.
pub fn fill_holes(bin: &BinaryMatrix, framed: bool) -> BinaryMatrix {
    let (rows, cols) = (bin.rows(), bin.cols());
    let mut out = bin.clone();
    let mut visited = vec![false; rows * cols];
    let mut region = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..rows * cols {
        if visited[start] || bin.as_cells()[start] != 0 {
            continue;
        }
        // Flood one 0-region, tracking which image sides it touches.
        region.clear();
        queue.push_back(start);
        visited[start] = true;
        let (mut top, mut bottom, mut left, mut right) = (false, false, false, false);
        while let Some(idx) = queue.pop_front() {
            region.push(idx);
            let (r, c) = (idx / cols, idx % cols);
            top |= r == 0;
            bottom |= r == rows - 1;
            left |= c == 0;
            right |= c == cols - 1;
            let mut push = |nr: usize, nc: usize| {
                let nidx = nr * cols + nc;
                if !visited[nidx] && bin.as_cells()[nidx] == 0 {
                    visited[nidx] = true;
                    queue.push_back(nidx);
                }
            };
            if r > 0 {
                push(r - 1, c);
            }
            if r + 1 < rows {
                push(r + 1, c);
            }
            if c > 0 {
                push(r, c - 1);
            }
            if c + 1 < cols {
                push(r, c + 1);
            }
        }
        let touches_border = top || bottom || left || right;
        let spans_image = (top && bottom) || (left && right);
        let is_hole = !touches_border || (framed && !spans_image);
        if is_hole {
            for &idx in &region {
                let (r, c) = (idx / cols, idx % cols);
                out.set(r, c, 1);
            }
        }
    }
    out
}

fn erode_with(bin: &BinaryMatrix, outside: u8) -> BinaryMatrix {
    let (rows, cols) = (bin.rows() as isize, bin.cols() as isize);
    let mut out = BinaryMatrix::zeros(bin.rows(), bin.cols()).expect("non-empty");
    for r in 0..rows {
        for c in 0..cols {
            let mut keep = true;
            'probe: for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    let v = if nr < 0 || nr >= rows || nc < 0 || nc >= cols {
                        outside
                    } else {
                        bin.get(nr as usize, nc as usize)
                    };
                    if v == 0 {
                        keep = false;
                        break 'probe;
                    }
                }
            }
            if keep {
                out.set(r as usize, c as usize, 1);
            }
        }
    }
    out
}

/// Binary erosion with a 3x3 square structuring element; out-of-image cells
/// count as 0, so image-border pixels always erode away.
pub fn erode(bin: &BinaryMatrix) -> BinaryMatrix {
    erode_with(bin, 0)
}

/// Erosion variant that treats out-of-image cells as foreground, matching
/// the virtual frame assumed by framed hole filling. Regions flush against
/// the image border keep their border pixels; everything else erodes as in
/// [`erode`].
pub fn erode_framed(bin: &BinaryMatrix) -> BinaryMatrix {
    erode_with(bin, 1)
}

/// Binary dilation with a 3x3 square structuring element.
pub fn dilate(bin: &BinaryMatrix) -> BinaryMatrix {
    let (rows, cols) = (bin.rows() as isize, bin.cols() as isize);
    let mut out = BinaryMatrix::zeros(bin.rows(), bin.cols()).expect("non-empty");
    for r in 0..rows {
        for c in 0..cols {
            let mut hit = false;
            'probe: for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    let inside = nr >= 0 && nr < rows && nc >= 0 && nc < cols;
                    if inside && bin.get(nr as usize, nc as usize) == 1 {
                        hit = true;
                        break 'probe;
                    }
                }
            }
            if hit {
                out.set(r as usize, c as usize, 1);
            }
        }
    }
    out
}

/// Build the label matrix the classifiers consume.
///
/// The result starts as a copy of `test_bin`; every coordinate where the
/// morphology survivor mask (framed fill, then frame-aware erosion) is 1 is
/// relabeled 2, whatever the binary cell held. In printed mode the reference
/// edge coordinates (optionally dilated `ref_dilate` times to absorb print
/// registration jitter) are then forced to 0 so only anomalies remain.
pub fn build_label_matrix(
    test_bin: &BinaryMatrix,
    mode: TileMode,
    ref_bin: Option<&BinaryMatrix>,
    ref_dilate: usize,
) -> Result<LabelMatrix> {
    let morph = erode_framed(&fill_holes(test_bin, true));
    let mut label = LabelMatrix::from(test_bin);
    for r in 0..label.rows() {
        for c in 0..label.cols() {
            if morph.get(r, c) == 1 {
                label.set(r, c, 2);
            }
        }
    }
    if mode == TileMode::Printed {
        let reference = ref_bin
            .ok_or_else(|| Error::Mode("printed mode requires a reference matrix".to_string()))?;
        if !test_bin.same_shape(reference) {
            return Err(Error::DimensionMismatch(format!(
                "test is {}x{}, reference is {}x{}",
                test_bin.rows(),
                test_bin.cols(),
                reference.rows(),
                reference.cols()
            )));
        }
        let mut mask = reference.clone();
        for _ in 0..ref_dilate {
            mask = dilate(&mask);
        }
        for r in 0..label.rows() {
            for c in 0..label.cols() {
                if mask.get(r, c) == 1 {
                    label.set(r, c, 0);
                }
            }
        }
    }
    Ok(label)
}

/// Serialize a label matrix to its text form.
///
/// Line 1 is `<rows> <cols>`; then `rows` lines of `cols` space-separated
/// tokens from {0,1,2,3}; every line ends with `\n`; no trailing whitespace.
pub fn matrix_to_string(label: &LabelMatrix) -> String {
    let mut out = String::with_capacity((label.cols() * 2 + 1) * (label.rows() + 1));
    out.push_str(&format!("{} {}\n", label.rows(), label.cols()));
    for r in 0..label.rows() {
        for c in 0..label.cols() {
            if c > 0 {
                out.push(' ');
            }
            out.push((b'0' + label.get(r, c)) as char);
        }
        out.push('\n');
    }
    out
}

/// Write the matrix text file, bit-exact per the format definition.
pub fn save_matrix(label: &LabelMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, matrix_to_string(label)).map_err(|e| Error::io(path, e))
}

/// Parse the text form; exact inverse of [`matrix_to_string`].
pub fn matrix_from_str(text: &str) -> Result<LabelMatrix> {
    let mut lines = text.split_inclusive('\n');
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".to_string()))?;
    let header = header
        .strip_suffix('\n')
        .ok_or_else(|| Error::Parse("header line is not newline-terminated".to_string()))?;
    let mut parts = header.split(' ');
    let rows: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
    let cols: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
    if parts.next().is_some() {
        return Err(Error::Parse(format!("bad header `{header}`")));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Parse(format!("degenerate shape {rows}x{cols}")));
    }

    let mut cells = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing row {r}")))?;
        let line = line
            .strip_suffix('\n')
            .ok_or_else(|| Error::Parse(format!("row {r} is not newline-terminated")))?;
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens.len() != cols {
            return Err(Error::Parse(format!(
                "row {r} holds {} tokens, expected {cols}",
                tokens.len()
            )));
        }
        for token in tokens {
            let value = match token {
                "0" => 0,
                "1" => 1,
                "2" => 2,
                "3" => 3,
                other => {
                    return Err(Error::Parse(format!(
                        "token `{other}` in row {r} is outside 0..=3"
                    )))
                }
            };
            cells.push(value);
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing content after last row".to_string()));
    }
    LabelMatrix::from_cells(rows, cols, cells)
}

/// Read a matrix text file.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<LabelMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    matrix_from_str(&text)
}
