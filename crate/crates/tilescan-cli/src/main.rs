//! Tile inspection command line.
//!
//! Exit codes: 0 clean, 1 defective tile, 2 any error. Machine-readable
//! output goes to stdout; diagnostics go to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tilescan_core::classify::classify_all;
use tilescan_core::config::ClassifierConfig;
use tilescan_core::detect::detect_defect_with_margin;
use tilescan_core::harness::{read_report_csv, run_batch, write_report, ReportFormat};
use tilescan_core::label::{build_label_matrix, load_matrix, save_matrix, TileMode};
use tilescan_core::preprocess::{preprocess_pipeline, StretchVariant};
use tilescan_core::raster::load_image;
use tilescan_core::synth::{generate_corpus, CorpusMode, CorpusOptions, DefectKind};
use tilescan_core::DetectionResult;

#[derive(Parser)]
#[command(
    name = "tilescan",
    about = "Surface-defect detection and classification for ceramic tile images",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect one tile image against a reference image.
    Inspect(InspectArgs),
    /// Classify a saved label-matrix text file.
    Classify(ClassifyArgs),
    /// Generate a synthetic tile corpus with ground truth.
    Synth(SynthArgs),
    /// Evaluate a whole corpus manifest and write a report.
    Batch(BatchArgs),
    /// Summarize a previously written CSV report.
    Report(ReportArgs),
}

/// Config-file knobs that can also be set from the command line; flags win
/// over the config file, which wins over built-in defaults.
#[derive(Args, Clone)]
struct ConfigOverrides {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    c_range: Option<usize>,
    #[arg(long)]
    e_range: Option<usize>,
    #[arg(long)]
    c_length: Option<usize>,
    #[arg(long)]
    blob_matx: Option<usize>,
    #[arg(long)]
    spot_matx: Option<usize>,
    #[arg(long)]
    median_window: Option<usize>,
    #[arg(long)]
    detect_margin: Option<usize>,
    #[arg(long)]
    ref_dilate: Option<usize>,
    #[arg(long, value_enum)]
    stretch: Option<StretchChoice>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StretchChoice {
    Linear,
    Sigmoid,
}

impl ConfigOverrides {
    fn resolve(&self) -> Result<ClassifierConfig, tilescan_core::Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| tilescan_core::Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                ClassifierConfig::from_kv_str(&text)?
            }
            None => ClassifierConfig::default(),
        };
        if let Some(v) = self.tau {
            cfg.tau = v;
        }
        if let Some(v) = self.c_range {
            cfg.c_range = v;
        }
        if let Some(v) = self.e_range {
            cfg.e_range = v;
        }
        if let Some(v) = self.c_length {
            cfg.c_length = v;
        }
        if let Some(v) = self.blob_matx {
            cfg.blob_matx = v;
        }
        if let Some(v) = self.spot_matx {
            cfg.spot_matx = v;
        }
        if let Some(v) = self.median_window {
            cfg.median_window = v;
        }
        if let Some(v) = self.detect_margin {
            cfg.detect_margin = v;
        }
        if let Some(v) = self.ref_dilate {
            cfg.ref_dilate = v;
        }
        if let Some(v) = self.stretch {
            cfg.stretch_variant = match v {
                StretchChoice::Linear => StretchVariant::Linear,
                StretchChoice::Sigmoid => StretchVariant::Sigmoid,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct InspectArgs {
    /// Test tile image (PNG or BMP).
    test: PathBuf,
    /// Known-good reference image of the same size.
    reference: PathBuf,
    /// Tile mode: plane or printed.
    #[arg(long, default_value = "plane")]
    mode: String,
    /// Write the label matrix text file here.
    #[arg(long)]
    emit_matrix: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Label-matrix text file to classify.
    matrix: PathBuf,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of tiles.
    #[arg(long)]
    n: usize,
    /// Fraction of defective tiles, 0..=1.
    #[arg(long, default_value_t = 0.5)]
    mix: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Tile side length in pixels.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Tile mode: plane, printed or alternate.
    #[arg(long, default_value = "alternate")]
    mode: String,
    /// Restrict injected defects to one kind.
    #[arg(long)]
    kind: Option<String>,
}

#[derive(Args)]
struct BatchArgs {
    /// Corpus manifest (tab-separated).
    #[arg(long)]
    manifest: PathBuf,
    /// Report output path.
    #[arg(long)]
    report: PathBuf,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatChoice::Csv)]
    format: FormatChoice,
    /// Parallel worker count.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatChoice {
    Csv,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    /// CSV report to summarize.
    input: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Inspect(args) => cmd_inspect(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Batch(args) => cmd_batch(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn cmd_inspect(args: InspectArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = args.overrides.resolve()?;
    let mode: TileMode = args.mode.parse()?;
    let test_img = load_image(&args.test)?;
    let ref_img = load_image(&args.reference)?;
    if (test_img.width(), test_img.height()) != (ref_img.width(), ref_img.height()) {
        return Err(format!(
            "size mismatch: test is {}x{}, reference is {}x{}",
            test_img.width(),
            test_img.height(),
            ref_img.width(),
            ref_img.height()
        )
        .into());
    }
    let test_bin = preprocess_pipeline(&test_img, &cfg)?;
    let ref_bin = preprocess_pipeline(&ref_img, &cfg)?;
    let detection = detect_defect_with_margin(&test_bin, &ref_bin, cfg.detect_margin)?;

    let reference = match mode {
        TileMode::Plane => None,
        TileMode::Printed => Some(&ref_bin),
    };
    let label = build_label_matrix(&test_bin, mode, reference, cfg.ref_dilate)?;
    if let Some(path) = &args.emit_matrix {
        save_matrix(&label, path)?;
    }

    if detection.defective {
        let report = classify_all(&label, detection, &cfg)?;
        println!("{report}");
        Ok(ExitCode::from(1))
    } else {
        println!(
            "detection: n1={} n2={} defective=false",
            detection.n1, detection.n2
        );
        println!("no defect");
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = args.overrides.resolve()?;
    let label = load_matrix(&args.matrix)?;
    // A saved matrix is classified unconditionally; the counts echo the
    // matrix rather than a reference comparison.
    let marked = label.as_cells().iter().filter(|&&v| v != 0).count();
    let detection = DetectionResult {
        n1: marked,
        n2: 0,
        defective: true,
    };
    let report = classify_all(&label, detection, &cfg)?;
    println!("{report}");
    Ok(ExitCode::from(if report.found_flags().iter().any(|&f| f) {
        1
    } else {
        0
    }))
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mode = match args.mode.as_str() {
        "plane" => CorpusMode::PlaneOnly,
        "printed" => CorpusMode::PrintedOnly,
        "alternate" => CorpusMode::Alternate,
        other => return Err(format!("unknown corpus mode `{other}`").into()),
    };
    let kind = match &args.kind {
        Some(k) => Some(k.parse::<DefectKind>()?),
        None => None,
    };
    let opts = CorpusOptions {
        n: args.n,
        mix: args.mix,
        seed: args.seed,
        size: args.size,
        mode,
        kind,
    };
    let manifest = generate_corpus(&opts, &args.out)?;
    println!("{}", manifest.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_batch(args: BatchArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cfg = args.overrides.resolve()?;
    if args.jobs < 1 {
        return Err("--jobs must be at least 1".into());
    }
    let report = run_batch(&args.manifest, &cfg, args.jobs)?;
    let format = match args.format {
        FormatChoice::Csv => ReportFormat::Csv,
        FormatChoice::Json => ReportFormat::Json,
    };
    write_report(&report, &args.report, format)?;
    println!(
        "tiles={} detection_efficiency={:.4} total_time={:.3}s",
        report.n_tiles, report.detection_efficiency, report.total_time
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let parsed = read_report_csv(&args.input)?;
    println!("tiles={}", parsed.rows.len());
    println!("detection_efficiency={:.4}", parsed.recompute_efficiency());
    for (key, value) in {
        let mut pairs: Vec<_> = parsed
            .summary
            .iter()
            .filter(|(k, _)| k.starts_with("rate_"))
            .collect();
        pairs.sort();
        pairs
    } {
        println!("{key}={value}");
    }
    Ok(ExitCode::SUCCESS)
}
