//! Synthetic tile corpus: deterministic tile images with injected defects
//! and recorded ground truth.
//!
//! Everything here is a pure function of its arguments including the seed.
//! Seeding uses splitmix64 (Steele/Lea/Flood 64-bit mixing): each tile of a
//! corpus derives its own stream from `seed ^ tile_index`, so corpora are
//! reproducible across runs and machines.
//!
//! Tiles carry sparse impulse noise (isolated single-pixel deviations of
//! +/- `NOISE_AMPLITUDE`). Isolation is enforced so a 3x3 median filter
//! removes every impulse completely; noise exercises the filter without
//! ever reaching the binarized image.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::TileMode;
use crate::preprocess::{stretch_sigmoid, StretchParams};
use crate::raster::{GrayImage, RasterImage};

/// Base intensity of every generated tile.
pub const BASE_LEVEL: u8 = 180;
/// Printed-pattern line intensity offset below the base.
pub const PATTERN_DEPTH: u8 = 100;
/// Default impulse-noise amplitude, intensity units.
pub const NOISE_AMPLITUDE: u8 = 2;
/// Canonical intensity offset of solid dark defects.
pub const DEEP_DELTA: i32 = -130;

/// splitmix64 step: advances the state and returns the next mixed value.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Small deterministic stream over splitmix64.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed)
    }

    fn next(&mut self) -> u64 {
        splitmix64(&mut self.0)
    }

    /// Uniform value in [lo, hi] (inclusive).
    fn range(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(hi >= lo);
        lo + (self.next() % (hi - lo + 1) as u64) as usize
    }
}

/// The six defect classes the toolkit recognizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Pinhole,
    Crack,
    Blob,
    Spot,
    Edge,
    Corner,
}

impl DefectKind {
    pub const ALL: [DefectKind; 6] = [
        DefectKind::Pinhole,
        DefectKind::Crack,
        DefectKind::Blob,
        DefectKind::Spot,
        DefectKind::Edge,
        DefectKind::Corner,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DefectKind::Pinhole => "pinhole",
            DefectKind::Crack => "crack",
            DefectKind::Blob => "blob",
            DefectKind::Spot => "spot",
            DefectKind::Edge => "edge",
            DefectKind::Corner => "corner",
        }
    }
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DefectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DefectKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown defect kind `{s}`")))
    }
}

/// One injected defect: kind, anchor position, characteristic size and
/// intensity offset. The full geometry is derived deterministically from
/// these fields alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub kind: DefectKind,
    /// (row, col) anchor: center for pinhole/blob/spot, polyline start for
    /// crack, border anchor for edge, corner vertex for corner.
    pub position: (usize, usize),
    /// Crack length, blob/spot radius, edge chip depth, corner chip leg.
    pub size: usize,
    /// Signed intensity offset applied to the defect body.
    pub intensity_delta: i32,
}

/// Oracle labels for one generated tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub tile_id: String,
    pub defective: bool,
    pub defects: Vec<DefectSpec>,
    pub mode: TileMode,
}

impl GroundTruth {
    pub fn has_kind(&self, kind: DefectKind) -> bool {
        self.defects.iter().any(|d| d.kind == kind)
    }
}

/// Deterministic clean tile. Plane tiles are the uniform base plus impulse
/// noise; printed tiles add a grid pattern of period size/8 first. The
/// pattern itself is seed-independent.
pub fn generate_tile(mode: TileMode, size: usize, seed: u64) -> Result<(RasterImage, GroundTruth)> {
    generate_tile_with_noise(mode, size, seed, NOISE_AMPLITUDE)
}

/// [`generate_tile`] with an explicit impulse amplitude (0 disables noise).
pub fn generate_tile_with_noise(
    mode: TileMode,
    size: usize,
    seed: u64,
    amplitude: u8,
) -> Result<(RasterImage, GroundTruth)> {
    if size < 64 {
        return Err(Error::Param(format!(
            "tile size must be at least 64, got {size}"
        )));
    }
    if amplitude > 3 {
        return Err(Error::Param(format!(
            "noise amplitude must stay within 3 intensity units, got {amplitude}"
        )));
    }
    let mut img = RasterImage::filled(size, size, gray_rgb(BASE_LEVEL))?;
    if mode == TileMode::Printed {
        paint_pattern(&mut img);
    }
    if amplitude > 0 {
        sprinkle_impulses(&mut img, seed, amplitude);
    }
    let truth = GroundTruth {
        tile_id: format!("tile-{seed:016x}"),
        defective: false,
        defects: Vec::new(),
        mode,
    };
    Ok((img, truth))
}

fn gray_rgb(v: u8) -> (u8, u8, u8) {
    (v, v, v)
}

/// Width of an injected edge chip along the border.
fn edge_chip_width(size: usize) -> usize {
    if size >= 96 {
        30
    } else {
        24
    }
}

/// Grid line positions of the printed pattern for a given tile size.
///
/// Lines are two pixels wide: wide enough to survive the median filter,
/// narrow enough that the Sobel band covers the whole line with no interior
/// gap, so reference subtraction removes the pattern edges completely.
pub fn pattern_lines(size: usize) -> (Vec<usize>, usize) {
    let period = size / 8;
    let width = 2;
    // Largest line count whose span keeps a comfortable inset from every
    // border; the block is centered.
    let mut count = 2;
    while (count) * period + width <= size - 2 * (period / 2) {
        count += 1;
    }
    count -= 1;
    let span = (count - 1) * period + width;
    let offset = (size - span) / 2;
    ((0..count).map(|k| offset + k * period).collect(), width)
}

fn paint_pattern(img: &mut RasterImage) {
    let size = img.width();
    let (lines, width) = pattern_lines(size);
    let first = lines[0];
    let last = lines[lines.len() - 1] + width;
    let value = gray_rgb(BASE_LEVEL - PATTERN_DEPTH);
    for &line in &lines {
        for d in 0..width {
            for other in first..last {
                img.set_pixel(line + d, other, value);
                img.set_pixel(other, line + d, value);
            }
        }
    }
}

/// Sparse isolated impulses on a jittered coarse grid. The stride/jitter
/// split keeps any two impulses at least 4 pixels apart, so every 3x3
/// median window sees at most one.
fn sprinkle_impulses(img: &mut RasterImage, seed: u64, amplitude: u8) {
    const STRIDE: usize = 8;
    let size = img.width();
    let mut rng = Rng::new(seed ^ 0x6e6f_6973_655f_7631);
    for cell_r in 0..size / STRIDE {
        for cell_c in 0..size / STRIDE {
            let bits = rng.next();
            if bits & 1 == 0 {
                continue;
            }
            let r = cell_r * STRIDE + ((bits >> 1) % 4) as usize;
            let c = cell_c * STRIDE + ((bits >> 3) % 4) as usize;
            let (v, _, _) = img.pixel(r, c);
            let noisy = if bits & (1 << 5) != 0 {
                v.saturating_add(amplitude)
            } else {
                v.saturating_sub(amplitude)
            };
            img.set_pixel(r, c, gray_rgb(noisy));
        }
    }
}

/// Post-stretch value of every input level for a tile with the given base
/// intensity, matching the pipeline's sigmoid with an explicit midpoint.
fn sigmoid_levels(base: u8) -> Vec<u8> {
    let strip = GrayImage::from_raw(256, 1, (0..=255u8).collect()).expect("256-entry strip");
    let params = StretchParams {
        midpoint: Some(base as f64 / 255.0),
        ..StretchParams::default()
    };
    stretch_sigmoid(&strip, &params).as_raw().to_vec()
}

/// Pinhole contrast calibration.
///
/// The injected pinhole is a two-level stamp: a dark X (center plus
/// diagonals) whose median-filtered footprint is a single dark pixel
/// flanked by four slightly bright arm pixels, plus a deep companion block
/// that pins the image's maximum gradient response. The bright arm level is
/// chosen so that after the relative threshold only the four arm responses
/// survive around the center: the diagonal responses cancel and the
/// knight/tip responses stay under threshold. Returns the dark and bright
/// pixel values.
fn pinhole_levels(base: u8) -> Result<(u8, u8)> {
    let lut = sigmoid_levels(base);
    let mid = lut[base as usize] as f64;
    let companion = lut[(base as i32 + DEEP_DELTA).clamp(0, 255) as usize] as f64;
    let c_big = mid - companion;
    // The companion block's strongest response sits diagonally off its
    // corners at 6x its contrast; the global threshold follows from it.
    let threshold = 6.0 * c_big * 0.25;

    let mut best: Option<(f64, u8, u8)> = None;
    for dark in (1..=base).rev() {
        let c = mid - lut[(base - dark) as usize] as f64;
        for bright in 1..=(255 - base) {
            let a = lut[(base + bright) as usize] as f64 - mid;
            if a < 1.0 {
                continue;
            }
            let arm = 2.0 * (c - a);
            let diagonal = 2.0 * (c - 2.0 * a).abs();
            let knight = 2.0 * a;
            let margin = (arm - threshold)
                .min(threshold - diagonal)
                .min(threshold - knight);
            if margin > best.map(|(m, _, _)| m).unwrap_or(f64::MIN) {
                best = Some((margin, base - dark, base + bright));
            }
        }
    }
    match best {
        Some((margin, dark, bright)) if margin >= 4.0 => Ok((dark, bright)),
        _ => Err(Error::Geometry(format!(
            "no workable pinhole contrast for base level {base}"
        ))),
    }
}

/// Stamp geometry of one defect, as absolute (row, col, value) triples.
fn defect_stamp(img: &RasterImage, spec: &DefectSpec) -> Result<Vec<(usize, usize, u8)>> {
    let size_r = img.height() as isize;
    let size_c = img.width() as isize;
    let (pr, pc) = (spec.position.0 as isize, spec.position.1 as isize);
    let base = BASE_LEVEL;
    let body = (base as i32 + spec.intensity_delta).clamp(0, 255) as u8;
    let mut cells: Vec<(isize, isize, u8)> = Vec::new();

    match spec.kind {
        DefectKind::Pinhole => {
            let (dark, bright) = pinhole_levels(base)?;
            // Dark X: median-stable core.
            for (dr, dc) in [(0, 0), (-1, -1), (-1, 1), (1, -1), (1, 1)] {
                cells.push((pr + dr, pc + dc, dark));
            }
            // Bright arms and knights shape the median footprint.
            for (dr, dc) in [
                (0, 1),
                (0, -1),
                (1, 0),
                (-1, 0),
                (1, 2),
                (1, -2),
                (-1, 2),
                (-1, -2),
                (2, 1),
                (2, -1),
                (-2, 1),
                (-2, -1),
            ] {
                cells.push((pr + dr, pc + dc, bright));
            }
            // Deep companion block pinning the global response maximum.
            let deep = (base as i32 + DEEP_DELTA).clamp(0, 255) as u8;
            for dr in 7..=9 {
                for dc in -1..=1 {
                    cells.push((pr + dr, pc + dc, deep));
                }
            }
        }
        DefectKind::Crack => {
            if spec.size < 8 {
                return Err(Error::Geometry(
                    "crack length must be at least 8 pixels".to_string(),
                ));
            }
            // Axis-aligned zigzag, two pixels thick: east, south, east.
            let l1 = spec.size * 2 / 5;
            let l2 = spec.size * 3 / 10;
            let l3 = spec.size - l1 - l2;
            let mut segments: Vec<(isize, isize)> = Vec::new();
            for d in 0..l1 as isize {
                segments.push((pr, pc + d));
                segments.push((pr + 1, pc + d));
            }
            for d in 0..l2 as isize {
                segments.push((pr + d, pc + l1 as isize));
                segments.push((pr + d, pc + l1 as isize + 1));
            }
            for d in 0..l3 as isize {
                segments.push((pr + l2 as isize, pc + l1 as isize + d));
                segments.push((pr + l2 as isize + 1, pc + l1 as isize + d));
            }
            for (r, c) in segments {
                cells.push((r, c, body));
            }
        }
        DefectKind::Blob | DefectKind::Spot => {
            if spec.size < 1 {
                return Err(Error::Geometry("disk radius must be positive".to_string()));
            }
            let radius = spec.size as isize;
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    if dr * dr + dc * dc <= radius * radius {
                        cells.push((pr + dr, pc + dc, body));
                    }
                }
            }
        }
        DefectKind::Edge => {
            // Rectangle flush against the border named by the anchor.
            let depth = spec.size as isize;
            let width = edge_chip_width(img.width()) as isize;
            if depth < 1 {
                return Err(Error::Geometry("edge depth must be positive".to_string()));
            }
            let (rows, cols): (Vec<isize>, Vec<isize>) = if pr == 0 {
                ((0..depth).collect(), (pc..pc + width).collect())
            } else if pc == 0 {
                ((pr..pr + width).collect(), (0..depth).collect())
            } else if pr == size_r - 1 {
                (
                    (size_r - depth..size_r).collect(),
                    (pc..pc + width).collect(),
                )
            } else if pc == size_c - 1 {
                (
                    (pr..pr + width).collect(),
                    (size_c - depth..size_c).collect(),
                )
            } else {
                return Err(Error::Geometry(
                    "edge anchor must sit on an image border".to_string(),
                ));
            };
            for &r in &rows {
                for &c in &cols {
                    cells.push((r, c, body));
                }
            }
        }
        DefectKind::Corner => {
            // Right triangle with both legs on the borders of one corner.
            let leg = spec.size as isize;
            let (r0, c0, dr, dc) = match (pr, pc) {
                (0, 0) => (0, 0, 1, 1),
                (0, _) if pc == size_c - 1 => (0, size_c - 1, 1, -1),
                (_, 0) if pr == size_r - 1 => (size_r - 1, 0, -1, 1),
                _ if pr == size_r - 1 && pc == size_c - 1 => (size_r - 1, size_c - 1, -1, -1),
                _ => {
                    return Err(Error::Geometry(
                        "corner anchor must be an image corner".to_string(),
                    ))
                }
            };
            for i in 0..leg {
                for j in 0..leg - i {
                    cells.push((r0 + dr * i, c0 + dc * j, body));
                }
            }
        }
    }

    let mut stamp = Vec::with_capacity(cells.len());
    for (r, c, v) in cells {
        if r < 0 || r >= size_r || c < 0 || c >= size_c {
            return Err(Error::Geometry(format!(
                "{} at ({}, {}) with size {} exceeds the {}x{} tile",
                spec.kind, spec.position.0, spec.position.1, spec.size, size_r, size_c
            )));
        }
        stamp.push((r as usize, c as usize, v));
    }
    Ok(stamp)
}

/// Paint one defect onto a tile.
///
/// A margin around the defect is first repainted with the clean base (or
/// pattern) so stray noise impulses cannot distort the defect's median
/// footprint.
pub fn inject_defect(img: &RasterImage, spec: &DefectSpec) -> Result<RasterImage> {
    let stamp = defect_stamp(img, spec)?;
    let mut out = img.clone();

    let (mut r0, mut c0, mut r1, mut c1) = (usize::MAX, usize::MAX, 0usize, 0usize);
    for &(r, c, _) in &stamp {
        r0 = r0.min(r);
        c0 = c0.min(c);
        r1 = r1.max(r);
        c1 = c1.max(c);
    }
    let margin = 4;
    let clean = clean_tile_value(img);
    for r in r0.saturating_sub(margin)..=(r1 + margin).min(img.height() - 1) {
        for c in c0.saturating_sub(margin)..=(c1 + margin).min(img.width() - 1) {
            out.set_pixel(r, c, gray_rgb(clean(r, c)));
        }
    }
    for (r, c, v) in stamp {
        out.set_pixel(r, c, gray_rgb(v));
    }
    Ok(out)
}

/// Noise-free value of a tile cell: base color, or the pattern line level
/// on printed tiles. Whether the tile carries the pattern is read off a
/// known line cell, which noise can perturb by at most `NOISE_AMPLITUDE`.
fn clean_tile_value(img: &RasterImage) -> impl Fn(usize, usize) -> u8 {
    let (lines, width) = pattern_lines(img.width());
    let first = lines.first().copied().unwrap_or(0);
    let last = lines.last().copied().unwrap_or(0) + width;
    let probe = img.pixel(first, img.width() / 2).0;
    let printed = probe < BASE_LEVEL - PATTERN_DEPTH / 2;
    move |r, c| {
        let on = |x: usize| lines.iter().any(|&l| x >= l && x < l + width);
        let in_span = |x: usize| x >= first && x < last;
        if printed && ((on(r) && in_span(c)) || (on(c) && in_span(r))) {
            BASE_LEVEL - PATTERN_DEPTH
        } else {
            BASE_LEVEL
        }
    }
}

/// Which corpus tiles are generated in which mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusMode {
    PlaneOnly,
    PrintedOnly,
    Alternate,
}

/// Corpus generation parameters.
#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub n: usize,
    /// Fraction of defective tiles, 0..=1.
    pub mix: f64,
    pub seed: u64,
    pub size: usize,
    pub mode: CorpusMode,
    /// Restrict injected defects to one kind; kinds cycle otherwise.
    pub kind: Option<DefectKind>,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            n: 50,
            mix: 0.5,
            seed: 1,
            size: 256,
            mode: CorpusMode::Alternate,
            kind: None,
        }
    }
}

/// Draw a defect of the given kind with randomized position and size.
fn draw_defect(kind: DefectKind, size: usize, rng: &mut Rng) -> DefectSpec {
    match kind {
        DefectKind::Pinhole => DefectSpec {
            kind,
            position: (rng.range(24, size - 36), rng.range(24, size - 24)),
            size: 1,
            intensity_delta: DEEP_DELTA,
        },
        DefectKind::Crack => {
            // Zigzag bounding box is l2+2 rows by max(l1+l3, l1+2) cols;
            // keep lengths feasible for the tile size with a 12 px margin.
            let max_len = (((size - 26) * 10) / 7).min(56);
            let length = rng.range(40.min(max_len), max_len);
            let l1 = length * 2 / 5;
            let l2 = length * 3 / 10;
            let l3 = length - l1 - l2;
            let bbox_r = l2 + 2;
            let bbox_c = (l1 + l3).max(l1 + 2);
            DefectSpec {
                kind,
                position: (
                    rng.range(12, size - 12 - bbox_r),
                    rng.range(12, size - 12 - bbox_c),
                ),
                size: length,
                intensity_delta: DEEP_DELTA,
            }
        }
        DefectKind::Blob => DefectSpec {
            kind,
            position: (rng.range(30, size - 30), rng.range(30, size - 30)),
            size: rng.range(5, 6),
            intensity_delta: DEEP_DELTA,
        },
        DefectKind::Spot => DefectSpec {
            kind,
            position: (rng.range(30, size - 30), rng.range(30, size - 30)),
            size: 2,
            intensity_delta: DEEP_DELTA,
        },
        DefectKind::Edge => {
            let depth = rng.range(3, 5);
            let width = edge_chip_width(size);
            let along = rng.range(18, size - 18 - width);
            let side = rng.range(0, 3);
            let position = match side {
                0 => (0, along),
                1 => (size - 1, along),
                2 => (along, 0),
                _ => (along, size - 1),
            };
            DefectSpec {
                kind,
                position,
                size: depth,
                intensity_delta: DEEP_DELTA,
            }
        }
        DefectKind::Corner => {
            let corner = rng.range(0, 3);
            let position = match corner {
                0 => (0, 0),
                1 => (0, size - 1),
                2 => (size - 1, 0),
                _ => (size - 1, size - 1),
            };
            // The chip must cover the corner zone after morphology but its
            // hypotenuse contour must stay shorter than any crack.
            DefectSpec {
                kind,
                position,
                size: rng.range(26, 28),
                intensity_delta: DEEP_DELTA,
            }
        }
    }
}

/// Generate a tile corpus under `out_dir` and return the manifest path.
///
/// Layout: `tiles/tile_NNNN.png`, one reference image per mode present, and
/// `manifest.tsv` binding each tile to its ground truth. Deterministic for
/// fixed options.
pub fn generate_corpus(opts: &CorpusOptions, out_dir: impl AsRef<Path>) -> Result<PathBuf> {
    if opts.n < 1 {
        return Err(Error::Param("corpus needs at least one tile".to_string()));
    }
    if !(0.0..=1.0).contains(&opts.mix) {
        return Err(Error::Param(format!(
            "defective fraction must lie in [0, 1], got {}",
            opts.mix
        )));
    }
    let out_dir = out_dir.as_ref();
    let tile_dir = out_dir.join("tiles");
    std::fs::create_dir_all(&tile_dir).map_err(|e| Error::io(&tile_dir, e))?;

    let modes: &[TileMode] = match opts.mode {
        CorpusMode::PlaneOnly => &[TileMode::Plane],
        CorpusMode::PrintedOnly => &[TileMode::Printed],
        CorpusMode::Alternate => &[TileMode::Plane, TileMode::Printed],
    };
    let mut ref_names = Vec::new();
    for mode in modes {
        let name = format!("reference_{mode}.png");
        let (img, _) = generate_tile(*mode, opts.size, opts.seed ^ 0x7265_6600)?;
        write_png(&img, out_dir.join(&name))?;
        ref_names.push((*mode, name));
    }

    let n_defective = (opts.n as f64 * opts.mix).round() as usize;
    let mut manifest =
        String::from("# tile_id\timage_path\treference_path\tmode\tdefective\tkinds_csv\n");
    let mut kind_cursor = 0usize;
    for i in 0..opts.n {
        let tile_seed = opts.seed ^ i as u64;
        let mode = modes[i % modes.len()];
        let (mut img, mut truth) = generate_tile(mode, opts.size, tile_seed)?;
        truth.tile_id = format!("tile_{i:04}");
        if i < n_defective {
            let kind = opts.kind.unwrap_or_else(|| {
                let k = DefectKind::ALL[kind_cursor % 6];
                kind_cursor += 1;
                k
            });
            let mut rng = Rng::new(tile_seed ^ 0x6465_6665_6374);
            let spec = draw_defect(kind, opts.size, &mut rng);
            img = inject_defect(&img, &spec)?;
            truth.defects.push(spec);
            truth.defective = true;
        }
        let file = format!("tiles/tile_{i:04}.png");
        write_png(&img, out_dir.join(&file))?;
        let reference = &ref_names
            .iter()
            .find(|(m, _)| *m == mode)
            .expect("reference generated for every mode")
            .1;
        let kinds = if truth.defects.is_empty() {
            "-".to_string()
        } else {
            truth
                .defects
                .iter()
                .map(|d| d.kind.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        manifest.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            truth.tile_id, file, reference, mode, truth.defective, kinds
        ));
    }
    let manifest_path = out_dir.join("manifest.tsv");
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

/// Encode a raster as PNG.
pub fn write_png(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buffer: image::RgbImage = image::ImageBuffer::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.as_raw().to_vec(),
    )
    .expect("raster invariant guarantees buffer size");
    buffer
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))
}
