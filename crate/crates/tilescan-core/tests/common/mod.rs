//! Independent reference implementations used to cross-check the library.
//!
//! Everything here is deliberately written along a different route than the
//! library code: full-matrix pattern scans, union-find instead of BFS,
//! naive window sums instead of prefix tables, and a from-scratch
//! fill-then-erode compositor.

#![allow(dead_code)]

use tilescan_core::config::ClassifierConfig;
use tilescan_core::label::LabelMatrix;
use tilescan_core::raster::BinaryMatrix;

/// Brute-force pinhole count: test the 8-neighbor pattern at every cell of
/// the whole matrix, intersected with the search region.
pub fn oracle_pinhole_count(label: &LabelMatrix, cfg: &ClassifierConfig) -> usize {
    let (rows, cols) = (label.rows(), label.cols());
    let mut count = 0;
    for r in 0..rows {
        for c in 0..cols {
            // Region membership, restated from scratch in 1-indexed form:
            // e_range < i <= rows - e_range (same for columns), minus the
            // four c_range corner squares.
            let (i, j) = (r + 1, c + 1);
            let in_band = i > cfg.e_range
                && i <= rows - cfg.e_range
                && j > cfg.e_range
                && j <= cols - cfg.e_range;
            let near_top_or_bottom = i <= cfg.c_range || i > rows - cfg.c_range;
            let near_left_or_right = j <= cfg.c_range || j > cols - cfg.c_range;
            if !in_band || (near_top_or_bottom && near_left_or_right) {
                continue;
            }
            if r == 0 || c == 0 || r == rows - 1 || c == cols - 1 {
                continue;
            }
            let ring = [
                label.get(r, c - 1),
                label.get(r, c + 1),
                label.get(r - 1, c),
                label.get(r + 1, c),
                label.get(r - 1, c - 1),
                label.get(r - 1, c + 1),
                label.get(r + 1, c - 1),
                label.get(r + 1, c + 1),
            ];
            if label.get(r, c) == 0 && ring == [1, 1, 1, 1, 0, 0, 0, 0] {
                count += 1;
            }
        }
    }
    count
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Largest 8-connected component of cells holding `value`, sized by
/// union-find.
pub fn oracle_largest_component(label: &LabelMatrix, value: u8) -> usize {
    let (rows, cols) = (label.rows(), label.cols());
    let mut sets = DisjointSet::new(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if label.get(r, c) != value {
                continue;
            }
            for (dr, dc) in [(0, 1), (1, 0), (1, 1), (1, -1i32)] {
                let nr = r as i32 + dr;
                let nc = c as i32 + dc;
                if nr >= 0
                    && (nr as usize) < rows
                    && nc >= 0
                    && (nc as usize) < cols
                    && label.get(nr as usize, nc as usize) == value
                {
                    sets.union(r * cols + c, nr as usize * cols + nc as usize);
                }
            }
        }
    }
    let mut sizes = vec![0usize; rows * cols];
    let mut best = 0;
    for r in 0..rows {
        for c in 0..cols {
            if label.get(r, c) == value {
                let root = sets.find(r * cols + c);
                sizes[root] += 1;
                best = best.max(sizes[root]);
            }
        }
    }
    best
}

/// Naive sliding-window block finder: O(rows * cols * k^2).
pub fn oracle_square_blocks(label: &LabelMatrix, k: usize) -> Vec<(usize, usize)> {
    let (rows, cols) = (label.rows(), label.cols());
    let half = k / 2;
    let mut centers = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if r < half || c < half || r + half >= rows || c + half >= cols {
                continue;
            }
            let mut solid = true;
            'window: for wr in r - half..=r + half {
                for wc in c - half..=c + half {
                    if label.get(wr, wc) != 2 {
                        solid = false;
                        break 'window;
                    }
                }
            }
            if solid {
                centers.push((r, c));
            }
        }
    }
    centers
}

/// From-scratch framed fill-then-erode survivor mask: recursive-style flood
/// over 0-regions with the border-side rule, then an explicit 3x3 erosion
/// that treats out-of-image as foreground.
pub fn oracle_fill_erode_survivors(bin: &BinaryMatrix) -> BinaryMatrix {
    let (rows, cols) = (bin.rows(), bin.cols());

    // Flood each 0-region, collecting touched sides.
    let mut region_of = vec![usize::MAX; rows * cols];
    let mut regions: Vec<(Vec<usize>, [bool; 4])> = Vec::new();
    for start in 0..rows * cols {
        if region_of[start] != usize::MAX || bin.as_cells()[start] != 0 {
            continue;
        }
        let id = regions.len();
        let mut members = Vec::new();
        let mut sides = [false; 4];
        let mut stack = vec![start];
        region_of[start] = id;
        while let Some(idx) = stack.pop() {
            members.push(idx);
            let (r, c) = (idx / cols, idx % cols);
            sides[0] |= r == 0;
            sides[1] |= r == rows - 1;
            sides[2] |= c == 0;
            sides[3] |= c == cols - 1;
            for (dr, dc) in [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (r as i32 + dr, c as i32 + dc);
                if nr < 0 || nc < 0 || nr as usize >= rows || nc as usize >= cols {
                    continue;
                }
                let nidx = nr as usize * cols + nc as usize;
                if region_of[nidx] == usize::MAX && bin.as_cells()[nidx] == 0 {
                    region_of[nidx] = id;
                    stack.push(nidx);
                }
            }
        }
        regions.push((members, sides));
    }

    let mut filled = bin.clone();
    for (members, [top, bottom, left, right]) in &regions {
        let spans = (*top && *bottom) || (*left && *right);
        if !spans {
            for &idx in members {
                filled.set(idx / cols, idx % cols, 1);
            }
        }
    }

    let mut survivors = BinaryMatrix::zeros(rows, cols).unwrap();
    for r in 0..rows as i32 {
        for c in 0..cols as i32 {
            let mut keep = true;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    let v = if nr < 0 || nc < 0 || nr as usize >= rows || nc as usize >= cols {
                        1
                    } else {
                        filled.get(nr as usize, nc as usize)
                    };
                    keep &= v == 1;
                }
            }
            if keep {
                survivors.set(r as usize, c as usize, 1);
            }
        }
    }
    survivors
}
