//! Command-line surface tying the pipeline together.
//!
//! Exit codes: 0 on success, 2 on validation or usage errors, 3 when a
//! selection came out empty. Every failure prints one line of the form
//! `error: <code>: <message>` to stderr.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{self, ClassifierKind};
use crate::io;
use crate::model::{GroundTruthMap, SelectionConfig, SelectionResult, SuScope, DEFAULT_BINS};
use crate::selection;
use crate::synthgen::{self, SynthSpec, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_EMPTY_SELECTION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hsiband",
    version,
    about = "Band selection for hyperspectral cubes: mutual-information relevance \
             filtering with Symmetric Uncertainty redundancy gating"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    All,
    Labeled,
}

impl From<ScopeArg> for SuScope {
    fn from(value: ScopeArg) -> Self {
        match value {
            ScopeArg::All => SuScope::AllPixels,
            ScopeArg::Labeled => SuScope::LabeledOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Centroid,
    Knn,
}

#[derive(Debug, Args)]
struct ClassifierOpts {
    /// Classifier used for accuracy and reconstruction.
    #[arg(long, value_enum, default_value = "centroid")]
    classifier: ClassifierArg,

    /// Neighbor count for the knn classifier.
    #[arg(long, default_value_t = 1)]
    k: usize,
}

impl ClassifierOpts {
    fn kind(&self) -> ClassifierKind {
        match self.classifier {
            ClassifierArg::Centroid => ClassifierKind::NearestCentroid,
            ClassifierArg::Knn => ClassifierKind::Knn(self.k),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the per-band MI curve against the ground truth as CSV.
    Mi {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },

    /// Run the two-stage selection and write its report as CSV.
    Select {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        th_relevance: f64,
        #[arg(long)]
        th_redundancy: f64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, value_enum, default_value = "all")]
        su_scope: ScopeArg,
        #[arg(long)]
        out: PathBuf,
    },

    /// Evaluate a grid of threshold pairs and write the accuracy table.
    Sweep {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Relevance grid: comma-separated values and lo:hi:count ranges.
        #[arg(long)]
        rel_grid: String,
        /// Redundancy grid: comma-separated values and lo:hi:count ranges.
        #[arg(long)]
        red_grid: String,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, value_enum, default_value = "all")]
        su_scope: ScopeArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        classifier: ClassifierOpts,
        #[arg(long)]
        out: PathBuf,
    },

    /// Generate the 19-band synthetic cube for a ground truth and echo the
    /// recipe to stdout.
    Synth {
        /// Ground-truth CSV; omitted, a seeded demo scene is generated.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Where to write the demo scene when --gt is omitted.
        #[arg(long, required_unless_present = "gt")]
        gt_out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Absolute noise scale in label units (default: a small fraction of
        /// the label range).
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },

    /// Report test accuracy for an explicit 1-based band list.
    Classify {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Comma-separated 1-based band indices, e.g. 16,18,3.
        #[arg(long)]
        bands: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        classifier: ClassifierOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Classify every pixel of the scene and write the class map as PGM and
    /// CSV (<out>.pgm and <out>.csv).
    Reconstruct {
        #[arg(long)]
        cube: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Comma-separated 1-based band indices.
        #[arg(long, conflicts_with_all = ["th_relevance", "th_redundancy"])]
        bands: Option<String>,
        /// Select bands first with this relevance threshold.
        #[arg(long, requires = "th_redundancy")]
        th_relevance: Option<f64>,
        /// Select bands first with this redundancy threshold.
        #[arg(long, requires = "th_relevance")]
        th_redundancy: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, value_enum, default_value = "all")]
        su_scope: ScopeArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        classifier: ClassifierOpts,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `argv` and runs the requested subcommand, returning the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not failures.
            let code = if err.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}: {}", err.code(), err);
            EXIT_VALIDATION
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let mut grid = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Some((lo, rest)) = token.split_once(':') {
            let (hi, count) = rest.split_once(':').ok_or_else(|| {
                Error::InvalidConfig(format!("range {token:?} is not lo:hi:count"))
            })?;
            let lo: f64 = lo
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad range start {lo:?}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad range end {hi:?}")))?;
            let count: usize = count
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad range count {count:?}")))?;
            if count < 2 {
                return Err(Error::InvalidConfig("range count must be at least 2".into()));
            }
            for i in 0..count {
                grid.push(lo + (hi - lo) * i as f64 / (count - 1) as f64);
            }
        } else {
            let v: f64 = token
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad grid value {token:?}")))?;
            grid.push(v);
        }
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("grid is empty".into()));
    }
    Ok(grid)
}

fn parse_bands(text: &str, n_bands: usize) -> Result<Vec<usize>> {
    let mut bands = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let one_based: usize = token
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad band index {token:?}")))?;
        if one_based == 0 || one_based > n_bands {
            return Err(Error::BandOutOfRange {
                band: one_based,
                n_bands,
            });
        }
        bands.push(one_based - 1);
    }
    if bands.is_empty() {
        return Err(Error::EmptyBandSet);
    }
    Ok(bands)
}

fn run_selection(
    cube_path: &Path,
    gt_path: &Path,
    th_relevance: f64,
    th_redundancy: f64,
    bins: usize,
    su_scope: SuScope,
) -> Result<(SelectionResult, crate::model::BandCube, GroundTruthMap)> {
    let cube = io::load_cube(cube_path)?;
    let gt = io::load_gt(gt_path)?;
    let config = SelectionConfig::new(th_relevance, th_redundancy)?
        .with_bins(bins)?
        .with_su_scope(su_scope);
    let result = selection::select_bands(&cube, &gt, &config)?;
    Ok((result, cube, gt))
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Mi {
            cube,
            gt,
            bins,
            out,
        } => {
            let cube = io::load_cube(&cube)?;
            let gt = io::load_gt(&gt)?;
            let mi = selection::mi_curve(&cube, &gt, bins)?;
            io::save_text(&out, &io::mi_report(&mi))?;
            println!("wrote MI curve for {} bands to {}", mi.len(), out.display());
            Ok(EXIT_OK)
        }

        Command::Select {
            cube,
            gt,
            th_relevance,
            th_redundancy,
            bins,
            su_scope,
            out,
        } => {
            let (result, _, _) =
                run_selection(&cube, &gt, th_relevance, th_redundancy, bins, su_scope.into())?;
            io::save_text(&out, &io::selection_report(&result))?;
            println!(
                "relevant |S| = {}, selected |SS| = {}, report in {}",
                result.relevant().len(),
                result.selected().len(),
                out.display()
            );
            if result.is_empty() {
                eprintln!(
                    "error: empty-selection: no band was admitted; consider raising \
                     --th-redundancy (currently {th_redundancy}) or lowering --th-relevance"
                );
                return Ok(EXIT_EMPTY_SELECTION);
            }
            Ok(EXIT_OK)
        }

        Command::Sweep {
            cube,
            gt,
            rel_grid,
            red_grid,
            bins,
            su_scope,
            seed,
            classifier,
            out,
        } => {
            let cube = io::load_cube(&cube)?;
            let gt = io::load_gt(&gt)?;
            let rel = parse_grid(&rel_grid)?;
            let red = parse_grid(&red_grid)?;
            let cells = eval::sweep(
                &cube,
                &gt,
                &rel,
                &red,
                bins,
                su_scope.into(),
                seed,
                classifier.kind(),
            )?;
            io::save_text(&out, &io::sweep_report(&cells))?;
            println!("wrote {} sweep cells to {}", cells.len(), out.display());
            Ok(EXIT_OK)
        }

        Command::Synth {
            gt,
            gt_out,
            seed,
            noise_sigma,
            out,
        } => {
            let gt_map = match &gt {
                Some(path) => io::load_gt(path)?,
                None => {
                    let demo = synthgen::synthetic_ground_truth(145, 145, 16, seed)?;
                    let gt_out = gt_out.as_ref().expect("clap enforces gt or gt-out");
                    io::save_gt(&demo, gt_out)?;
                    println!("wrote demo ground truth to {}", gt_out.display());
                    demo
                }
            };
            let mut spec = SynthSpec::new(seed);
            if let Some(sigma) = noise_sigma {
                spec = spec.with_noise_sigma(sigma)?;
            }
            let cube = synthgen::generate(&gt_map, &spec)?;
            io::save_cube(&cube, &out)?;
            println!(
                "wrote {}x{}x{} synthetic cube to {}",
                cube.rows(),
                cube.cols(),
                cube.n_bands(),
                out.display()
            );
            print!("{}", io::spec_echo(&spec, gt_map.n_classes()));
            Ok(EXIT_OK)
        }

        Command::Classify {
            cube,
            gt,
            bands,
            seed,
            classifier,
            out,
        } => {
            let cube = io::load_cube(&cube)?;
            let gt = io::load_gt(&gt)?;
            let band_list = parse_bands(&bands, cube.n_bands())?;
            let band_set: BTreeSet<usize> = band_list.iter().copied().collect();
            let assignment = eval::split(&gt, seed)?;
            let accuracy =
                eval::train_classify(&cube, &gt, &band_set, &assignment, classifier.kind())?;
            let one_based: Vec<usize> = band_set.iter().map(|b| b + 1).collect();
            if let Some(out) = out {
                io::save_text(
                    &out,
                    &io::classify_report(&one_based, classifier.kind(), seed, accuracy),
                )?;
            }
            println!("accuracy {:.6} on {} bands", accuracy, band_set.len());
            Ok(EXIT_OK)
        }

        Command::Reconstruct {
            cube,
            gt,
            bands,
            th_relevance,
            th_redundancy,
            bins,
            su_scope,
            seed,
            classifier,
            out,
        } => {
            let (cube, gt_map, band_set) = match (bands, th_relevance, th_redundancy) {
                (Some(list), None, None) => {
                    let cube = io::load_cube(&cube)?;
                    let gt_map = io::load_gt(&gt)?;
                    let band_list = parse_bands(&list, cube.n_bands())?;
                    (cube, gt_map, band_list.into_iter().collect::<BTreeSet<_>>())
                }
                (None, Some(rel), Some(red)) => {
                    let (result, cube, gt_map) =
                        run_selection(&cube, &gt, rel, red, bins, su_scope.into())?;
                    if result.is_empty() {
                        eprintln!(
                            "error: empty-selection: no band was admitted; consider raising \
                             --th-redundancy (currently {red}) or lowering --th-relevance"
                        );
                        return Ok(EXIT_EMPTY_SELECTION);
                    }
                    (cube, gt_map, result.selected().clone())
                }
                _ => {
                    return Err(Error::InvalidConfig(
                        "give either --bands or both --th-relevance and --th-redundancy".into(),
                    ))
                }
            };
            let assignment = eval::split(&gt_map, seed)?;
            let map =
                eval::reconstruct_map(&cube, &gt_map, &band_set, &assignment, classifier.kind())?;
            let pgm_path = out.with_extension("pgm");
            let csv_path = out.with_extension("csv");
            io::save_text(&pgm_path, &io::class_map_pgm(&map, gt_map.n_classes()))?;
            io::save_text(&csv_path, &io::class_map_csv(&map))?;
            println!(
                "wrote class map to {} and {}",
                pgm_path.display(),
                csv_path.display()
            );
            Ok(EXIT_OK)
        }
    }
}
