//! End-to-end pipeline fixtures and property tests.

mod common;

use proptest::prelude::*;

use tilescan_core::classify::{classify_crack, classify_pinhole, find_square_blocks};
use tilescan_core::config::ClassifierConfig;
use tilescan_core::detect::detect_defect;
use tilescan_core::label::{
    build_label_matrix, erode, erode_framed, fill_holes, matrix_from_str, matrix_to_string,
    LabelMatrix, TileMode,
};
use tilescan_core::preprocess::{
    binarize, preprocess_pipeline, sobel_edges, stretch_sigmoid, StretchParams,
};
use tilescan_core::raster::{BinaryMatrix, GrayImage, RasterImage};
use tilescan_core::synth::{generate_tile, inject_defect, DefectKind, DefectSpec, DEEP_DELTA};

fn golden(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    std::fs::read_to_string(path).expect("golden file present")
}

#[test]
fn dark_disk_binarizes_to_a_boundary_ring() {
    // 32x32 uniform tile with one dark disk of radius 6 in the middle.
    let mut img = RasterImage::filled(32, 32, (180, 180, 180)).unwrap();
    for r in 0..32i32 {
        for c in 0..32i32 {
            if (r - 16).pow(2) + (c - 16).pow(2) <= 36 {
                img.set_pixel(r as usize, c as usize, (60, 60, 60));
            }
        }
    }
    let bin = preprocess_pipeline(&img, &ClassifierConfig::default()).unwrap();
    assert_eq!(
        matrix_to_string(&LabelMatrix::from(&bin)),
        golden("disk_ring.txt")
    );

    // The ring encloses the disk: filling the result closes the interior.
    let filled = fill_holes(&bin, false);
    assert_eq!(filled.get(16, 16), 1);
    assert_eq!(bin.get(16, 16), 0);
}

#[test]
fn blob_tile_label_matches_golden_and_hosts_a_block() {
    let (tile, _) = generate_tile(TileMode::Plane, 64, 400).unwrap();
    let spec = DefectSpec {
        kind: DefectKind::Blob,
        position: (32, 32),
        size: 5,
        intensity_delta: DEEP_DELTA,
    };
    let tile = inject_defect(&tile, &spec).unwrap();
    let bin = preprocess_pipeline(&tile, &ClassifierConfig::default()).unwrap();
    let label = build_label_matrix(&bin, TileMode::Plane, None, 0).unwrap();
    assert_eq!(matrix_to_string(&label), golden("blob_label.txt"));

    let centers = find_square_blocks(&label, 7).unwrap();
    assert!(!centers.is_empty());
    for (r, c) in centers {
        assert!(r.abs_diff(32) <= 2 && c.abs_diff(32) <= 2);
    }
}

fn arb_label_matrix() -> impl Strategy<Value = LabelMatrix> {
    (2usize..20, 2usize..20).prop_flat_map(|(rows, cols)| {
        proptest::collection::vec(0u8..=3, rows * cols)
            .prop_map(move |cells| LabelMatrix::from_cells(rows, cols, cells).unwrap())
    })
}

fn arb_binary_matrix() -> impl Strategy<Value = BinaryMatrix> {
    (2usize..18, 2usize..18).prop_flat_map(|(rows, cols)| {
        proptest::collection::vec(0u8..=1, rows * cols)
            .prop_map(move |cells| BinaryMatrix::from_cells(rows, cols, cells).unwrap())
    })
}

proptest! {
    #[test]
    fn matrix_text_round_trip(label in arb_label_matrix()) {
        let parsed = matrix_from_str(&matrix_to_string(&label)).unwrap();
        prop_assert_eq!(parsed, label);
    }

    #[test]
    fn fill_is_idempotent_extensive_and_erosion_shrinks(bin in arb_binary_matrix(), framed in any::<bool>()) {
        let filled = fill_holes(&bin, framed);
        prop_assert_eq!(&fill_holes(&filled, framed), &filled);
        let eroded = erode(&bin);
        for i in 0..bin.as_cells().len() {
            prop_assert!(filled.as_cells()[i] >= bin.as_cells()[i]);
            prop_assert!(eroded.as_cells()[i] <= bin.as_cells()[i]);
            prop_assert!(eroded.as_cells()[i] <= filled.as_cells()[i]);
        }
    }

    #[test]
    fn plane_label_twos_equal_framed_survivors(bin in arb_binary_matrix()) {
        let label = build_label_matrix(&bin, TileMode::Plane, None, 0).unwrap();
        let survivors = erode_framed(&fill_holes(&bin, true));
        for r in 0..bin.rows() {
            for c in 0..bin.cols() {
                prop_assert_eq!(label.get(r, c) == 2, survivors.get(r, c) == 1);
            }
        }
    }

    #[test]
    fn printed_label_is_zero_on_reference_marks(bin in arb_binary_matrix()) {
        // Use a shifted copy of the matrix as its own reference.
        let mut reference = BinaryMatrix::zeros(bin.rows(), bin.cols()).unwrap();
        for r in 0..bin.rows() {
            for c in 0..bin.cols() {
                if bin.get(r, c) == 1 && (r + c) % 2 == 0 {
                    reference.set(r, c, 1);
                }
            }
        }
        let label = build_label_matrix(&bin, TileMode::Printed, Some(&reference), 0).unwrap();
        for r in 0..bin.rows() {
            for c in 0..bin.cols() {
                if reference.get(r, c) == 1 {
                    prop_assert_eq!(label.get(r, c), 0);
                }
            }
        }
    }

    #[test]
    fn sigmoid_stretch_is_monotone(values in proptest::collection::vec(0u8..=255, 2..64), m in 1u8..=255) {
        let img = GrayImage::from_raw(values.len(), 1, values.clone()).unwrap();
        let params = StretchParams {
            midpoint: Some(m as f64 / 255.0),
            ..StretchParams::default()
        };
        let out = stretch_sigmoid(&img, &params);
        for a in 0..values.len() {
            for b in 0..values.len() {
                if values[a] <= values[b] {
                    prop_assert!(out.get(0, a) <= out.get(0, b));
                }
            }
        }
    }

    #[test]
    fn binarize_support_shrinks_as_tau_grows(values in proptest::collection::vec(0u8..=200, 9..100)) {
        let img = GrayImage::from_raw(values.len(), 1, values.clone()).unwrap();
        let grad = sobel_edges(&img);
        let mut last = usize::MAX;
        for tau in [0.05, 0.25, 0.5, 0.9, 1.0] {
            let marked = tilescan_core::count_marked(&binarize(&grad, tau).unwrap());
            prop_assert!(marked <= last);
            last = marked;
        }
    }

    #[test]
    fn crack_claiming_never_raises_pinhole_count(label in arb_label_matrix()) {
        let cfg = ClassifierConfig {
            c_range: 1,
            e_range: 1,
            c_length: 4,
            ..ClassifierConfig::default()
        };
        if 2 * cfg.c_range >= label.rows().min(label.cols()) {
            return Ok(());
        }
        let before = classify_pinhole(&label, &cfg).unwrap().p_count;
        let (_, claimed) = classify_crack(&label, &cfg);
        let after = classify_pinhole(&claimed, &cfg).unwrap().p_count;
        prop_assert!(after <= before);
    }

    #[test]
    fn extra_test_marks_never_clear_a_defect_verdict(bin in arb_binary_matrix(), extra in proptest::collection::vec((0usize..18, 0usize..18), 1..8)) {
        let reference = BinaryMatrix::zeros(bin.rows(), bin.cols()).unwrap();
        let before = detect_defect(&bin, &reference).unwrap();
        let mut richer = bin.clone();
        for (r, c) in extra {
            richer.set(r % bin.rows(), c % bin.cols(), 1);
        }
        let after = detect_defect(&richer, &reference).unwrap();
        if before.defective {
            prop_assert!(after.defective);
        }
    }
}
