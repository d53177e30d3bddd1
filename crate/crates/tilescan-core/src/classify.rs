//! The six rule-based defect classifiers over a label matrix.
//!
//! All classifiers are pure. `classify_all` runs the crack pass first: crack
//! components are relabeled 3 so their pixels cannot masquerade as pinhole
//! ring pixels in the later passes. The remaining classifiers read the
//! crack-claimed matrix.
//!
//! Index conventions follow the matrix text format: row 0 is the top border
//! band, column 0 the left one. Corner zones are the four c_range x c_range
//! squares flush against the matrix corners.

use serde::{Deserialize, Serialize};

use crate::config::ClassifierConfig;
use crate::detect::DetectionResult;
use crate::error::{Error, Result};
use crate::label::LabelMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinholeFinding {
    pub found: bool,
    pub p_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrackFinding {
    pub found: bool,
    /// Size in pixels of the largest 8-connected component of 1-cells.
    pub c_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFinding {
    pub found: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFinding {
    pub found: bool,
    /// 0 or 1: the border scan stops at the first hit.
    pub e_count: usize,
}

/// One of the four corner zones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CornerId {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl std::fmt::Display for CornerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self {
            CornerId::TopLeft => "TL",
            CornerId::TopRight => "TR",
            CornerId::BottomLeft => "BL",
            CornerId::BottomRight => "BR",
        };
        write!(f, "{tag}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerFinding {
    pub found: bool,
    pub corner_ids: Vec<CornerId>,
}

/// Combined per-tile outcome of detection plus all six classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub pinhole: PinholeFinding,
    pub crack: CrackFinding,
    pub blob: RegionFinding,
    pub spot: RegionFinding,
    pub edge: EdgeFinding,
    pub corner: CornerFinding,
    pub detection: DetectionResult,
}

impl DefectReport {
    /// Report with every classifier silent, for tiles that were not
    /// detected as defective.
    pub fn all_clear(detection: DetectionResult) -> Self {
        DefectReport {
            pinhole: PinholeFinding {
                found: false,
                p_count: 0,
            },
            crack: CrackFinding {
                found: false,
                c_count: 0,
            },
            blob: RegionFinding { found: false },
            spot: RegionFinding { found: false },
            edge: EdgeFinding {
                found: false,
                e_count: 0,
            },
            corner: CornerFinding {
                found: false,
                corner_ids: Vec::new(),
            },
            detection,
        }
    }

    /// Found flags in the canonical order pinhole, crack, blob, spot, edge,
    /// corner.
    pub fn found_flags(&self) -> [bool; 6] {
        [
            self.pinhole.found,
            self.crack.found,
            self.blob.found,
            self.spot.found,
            self.edge.found,
            self.corner.found,
        ]
    }
}

impl std::fmt::Display for DefectReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn verdict(found: bool) -> &'static str {
            if found {
                "found"
            } else {
                "not found"
            }
        }
        writeln!(
            f,
            "detection: n1={} n2={} defective={}",
            self.detection.n1, self.detection.n2, self.detection.defective
        )?;
        writeln!(
            f,
            "pinhole: {} (p_count={})",
            verdict(self.pinhole.found),
            self.pinhole.p_count
        )?;
        writeln!(
            f,
            "crack: {} (c_count={})",
            verdict(self.crack.found),
            self.crack.c_count
        )?;
        writeln!(f, "blob: {}", verdict(self.blob.found))?;
        writeln!(f, "spot: {}", verdict(self.spot.found))?;
        writeln!(
            f,
            "edge: {} (e_count={})",
            verdict(self.edge.found),
            self.edge.e_count
        )?;
        let ids = self
            .corner
            .corner_ids
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(
            f,
            "corner: {}{}",
            verdict(self.corner.found),
            if ids.is_empty() {
                String::new()
            } else {
                format!(" ({ids})")
            }
        )
    }
}

/// True when (row, col) lies in one of the four corner zones.
fn in_corner_zone(row: usize, col: usize, rows: usize, cols: usize, c_range: usize) -> bool {
    (row < c_range || row >= rows - c_range) && (col < c_range || col >= cols - c_range)
}

/// Scan the interior search region for the pinhole signature: a 0-valued
/// cell whose four 4-neighbors are all 1 and whose diagonal neighbors are
/// all 0. The region excludes an e_range-wide band along every border and
/// the four corner zones. Crack-claimed cells (3) never count as ring
/// pixels.
pub fn classify_pinhole(label: &LabelMatrix, cfg: &ClassifierConfig) -> Result<PinholeFinding> {
    let (rows, cols) = (label.rows(), label.cols());
    let e = cfg.e_range;
    if rows < 2 * e + 1 || cols < 2 * e + 1 {
        return Err(Error::Config(format!(
            "pinhole search region is empty on a {rows}x{cols} matrix with e_range {e}"
        )));
    }
    let mut p_count = 0;
    let mut scanned = 0usize;
    for r in e..rows - e {
        for c in e..cols - e {
            if in_corner_zone(r, c, rows, cols, cfg.c_range) {
                continue;
            }
            scanned += 1;
            if label.get(r, c) != 0 {
                continue;
            }
            let arms = label.get(r, c - 1) == 1
                && label.get(r, c + 1) == 1
                && label.get(r - 1, c) == 1
                && label.get(r + 1, c) == 1;
            let diagonals_clear = label.get(r - 1, c - 1) == 0
                && label.get(r - 1, c + 1) == 0
                && label.get(r + 1, c - 1) == 0
                && label.get(r + 1, c + 1) == 0;
            if arms && diagonals_clear {
                p_count += 1;
            }
        }
    }
    if scanned == 0 {
        return Err(Error::Config(format!(
            "pinhole search region is empty on a {rows}x{cols} matrix"
        )));
    }
    Ok(PinholeFinding {
        found: p_count > 0,
        p_count,
    })
}

/// 8-connected components of cells holding `value`.
fn components_of(label: &LabelMatrix, value: u8) -> Vec<Vec<usize>> {
    let (rows, cols) = (label.rows(), label.cols());
    let cells = label.as_cells();
    let mut seen = vec![false; rows * cols];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..rows * cols {
        if seen[start] || cells[start] != value {
            continue;
        }
        let mut component = Vec::new();
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            component.push(idx);
            let (r, c) = (idx / cols, idx % cols);
            let r0 = r.saturating_sub(1);
            let c0 = c.saturating_sub(1);
            for nr in r0..=(r + 1).min(rows - 1) {
                for nc in c0..=(c + 1).min(cols - 1) {
                    let nidx = nr * cols + nc;
                    if !seen[nidx] && cells[nidx] == value {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                }
            }
        }
        components.push(component);
    }
    components
}

/// Crack pass: trace every 8-connected component of 1-cells and measure it
/// in pixels. `c_count` is the largest component size; a crack is present
/// when it exceeds `c_length`. Every component larger than the threshold is
/// relabeled 3 in the returned matrix so later classifiers ignore it.
pub fn classify_crack(label: &LabelMatrix, cfg: &ClassifierConfig) -> (CrackFinding, LabelMatrix) {
    let components = components_of(label, 1);
    let c_count = components.iter().map(Vec::len).max().unwrap_or(0);
    let mut claimed = label.clone();
    for component in &components {
        if component.len() > cfg.c_length {
            for &idx in component {
                let (r, c) = (idx / label.cols(), idx % label.cols());
                claimed.set(r, c, 3);
            }
        }
    }
    (
        CrackFinding {
            found: c_count > cfg.c_length,
            c_count,
        },
        claimed,
    )
}

/// Every center whose k x k window holds nothing but 2-cells.
///
/// Valid centers keep the whole window inside the matrix; they are returned
/// in row-major order.
pub fn find_square_blocks(label: &LabelMatrix, k: usize) -> Result<Vec<(usize, usize)>> {
    let (rows, cols) = (label.rows(), label.cols());
    if k < 3 || k % 2 == 0 || k > rows.min(cols) {
        return Err(Error::Param(format!(
            "block window must be odd, >= 3 and fit a {rows}x{cols} matrix, got {k}"
        )));
    }
    // Summed-area table of the 2-cell indicator.
    let mut sat = vec![0u32; (rows + 1) * (cols + 1)];
    for r in 0..rows {
        for c in 0..cols {
            let two = (label.get(r, c) == 2) as u32;
            sat[(r + 1) * (cols + 1) + c + 1] =
                two + sat[r * (cols + 1) + c + 1] + sat[(r + 1) * (cols + 1) + c]
                    - sat[r * (cols + 1) + c];
        }
    }
    let window_sum = |r0: usize, c0: usize, r1: usize, c1: usize| {
        sat[r1 * (cols + 1) + c1] + sat[r0 * (cols + 1) + c0]
            - sat[r0 * (cols + 1) + c1]
            - sat[r1 * (cols + 1) + c0]
    };
    let half = k / 2;
    let full = (k * k) as u32;
    let mut centers = Vec::new();
    for r in half..rows - half {
        for c in half..cols - half {
            if window_sum(r - half, c - half, r + half + 1, c + half + 1) == full {
                centers.push((r, c));
            }
        }
    }
    Ok(centers)
}

/// Blob: some blob_matx x blob_matx window is solid 2s.
pub fn classify_blob(label: &LabelMatrix, cfg: &ClassifierConfig) -> Result<RegionFinding> {
    let centers = find_square_blocks(label, cfg.blob_matx)?;
    Ok(RegionFinding {
        found: !centers.is_empty(),
    })
}

/// Spot: an 8-connected 2-region that carries a spot_matx block but no
/// blob_matx block. Regions large enough to host a blob window are
/// blob-class and never count as spots, so on any single region blob and
/// spot are mutually exclusive.
pub fn classify_spot(label: &LabelMatrix, cfg: &ClassifierConfig) -> Result<RegionFinding> {
    let spot_centers = find_square_blocks(label, cfg.spot_matx)?;
    if spot_centers.is_empty() {
        return Ok(RegionFinding { found: false });
    }
    let blob_centers = find_square_blocks(label, cfg.blob_matx)?;

    let cols = label.cols();
    let components = components_of(label, 2);
    let mut component_id = vec![usize::MAX; label.rows() * cols];
    for (id, component) in components.iter().enumerate() {
        for &idx in component {
            component_id[idx] = id;
        }
    }
    let mut has_spot = vec![false; components.len()];
    let mut has_blob = vec![false; components.len()];
    for (r, c) in spot_centers {
        has_spot[component_id[r * cols + c]] = true;
    }
    for (r, c) in blob_centers {
        has_blob[component_id[r * cols + c]] = true;
    }
    let found = has_spot
        .iter()
        .zip(&has_blob)
        .any(|(&spot, &blob)| spot && !blob);
    Ok(RegionFinding { found })
}

/// Edge: scan the four one-pixel border bands outside the corner zones for
/// any cell valued 1, 2 or 3 (crack-claimed cells were border-touching 1s).
/// The scan stops at the first hit, so e_count is 0 or 1.
pub fn classify_edge(label: &LabelMatrix, cfg: &ClassifierConfig) -> EdgeFinding {
    let (rows, cols) = (label.rows(), label.cols());
    let hit = |v: u8| v == 1 || v == 2 || v == 3;
    let c = cfg.c_range;

    // Band ranges translate the stated bounds c_range+1 ..= len-c_range+1
    // from 1-indexed coordinates; the upper end deliberately reaches one
    // cell further into the trailing corner zone than the leading one.
    let col_range = c..=(cols - c).min(cols - 1);
    let row_range = c..=(rows - c).min(rows - 1);

    for col in col_range.clone() {
        if hit(label.get(0, col)) || hit(label.get(rows - 1, col)) {
            return EdgeFinding {
                found: true,
                e_count: 1,
            };
        }
    }
    for row in row_range {
        if hit(label.get(row, 0)) || hit(label.get(row, cols - 1)) {
            return EdgeFinding {
                found: true,
                e_count: 1,
            };
        }
    }
    EdgeFinding {
        found: false,
        e_count: 0,
    }
}

/// Corner: a corner zone is defective only when every one of its
/// c_range x c_range cells is 2 — the count equals the total corner area.
pub fn classify_corner(label: &LabelMatrix, cfg: &ClassifierConfig) -> CornerFinding {
    let (rows, cols) = (label.rows(), label.cols());
    let c = cfg.c_range;
    let zones = [
        (CornerId::TopLeft, 0, 0),
        (CornerId::TopRight, 0, cols - c),
        (CornerId::BottomLeft, rows - c, 0),
        (CornerId::BottomRight, rows - c, cols - c),
    ];
    let mut corner_ids = Vec::new();
    for (id, r0, c0) in zones {
        let mut count = 0;
        for r in r0..r0 + c {
            for col in c0..c0 + c {
                if label.get(r, col) == 2 {
                    count += 1;
                }
            }
        }
        if count == c * c {
            corner_ids.push(id);
        }
    }
    CornerFinding {
        found: !corner_ids.is_empty(),
        corner_ids,
    }
}

/// Run the full classifier battery.
///
/// Tiles that were not detected as defective skip classification entirely
/// and report every class as not found. Otherwise the crack pass runs
/// first and the other five classifiers read its crack-claimed matrix.
pub fn classify_all(
    label: &LabelMatrix,
    detection: DetectionResult,
    cfg: &ClassifierConfig,
) -> Result<DefectReport> {
    cfg.validate_for_shape(label.rows(), label.cols())?;
    if !detection.defective {
        return Ok(DefectReport::all_clear(detection));
    }
    let (crack, claimed) = classify_crack(label, cfg);
    Ok(DefectReport {
        pinhole: classify_pinhole(&claimed, cfg)?,
        crack,
        blob: classify_blob(&claimed, cfg)?,
        spot: classify_spot(&claimed, cfg)?,
        edge: classify_edge(&claimed, cfg),
        corner: classify_corner(&claimed, cfg),
        detection,
    })
}
