//! File formats: the `HSIC` binary cube container, ground-truth CSV maps,
//! CSV reports, and PGM class maps.
//!
//! A cube file is one ASCII header line
//! `HSIC 1 <rows> <cols> <bands> <dtype>\n` followed by a little-endian
//! payload, band-major and row-major within a band, of exactly
//! `rows * cols * bands` elements. `dtype` is `u16` or `f32`.
//!
//! Report reals are printed in scientific notation with ten significant
//! digits so repeated runs are byte-identical and nothing is lost to
//! rounding.

use std::fs;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{ClassMap, ClassifierKind, SweepCell};
use crate::model::{BandCube, CubeDtype, GroundTruthMap, SelectionResult};
use crate::synthgen::SynthSpec;

const HEADER_CAP: usize = 256;

fn fmt_real(x: f64) -> String {
    format!("{x:.9e}")
}

/// Writes a cube in the `HSIC` container, preserving its storage dtype.
pub fn save_cube(cube: &BandCube, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(64 + cube.values().len() * 4);
    writeln!(
        out,
        "HSIC 1 {} {} {} {}",
        cube.rows(),
        cube.cols(),
        cube.n_bands(),
        cube.dtype().as_str()
    )
    .expect("writing to a Vec cannot fail");
    match cube.dtype() {
        CubeDtype::U16 => {
            for &v in cube.values() {
                out.extend_from_slice(&(v as u16).to_le_bytes());
            }
        }
        CubeDtype::F32 => {
            for &v in cube.values() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a cube from the `HSIC` container.
pub fn load_cube(path: &Path) -> Result<BandCube> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match reader.read(&mut byte).map_err(|e| Error::io(path, e))? {
            0 => break,
            _ => {
                if byte[0] == b'\n' {
                    break;
                }
                header.push(byte[0]);
                if header.len() > HEADER_CAP {
                    return Err(bad_magic(path, "header line exceeds 256 bytes"));
                }
            }
        }
    }
    let header = String::from_utf8(header)
        .map_err(|_| bad_magic(path, "header is not ASCII"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(bad_magic(
            path,
            &format!("expected 6 header fields, found {}", fields.len()),
        ));
    }
    if fields[0] != "HSIC" {
        return Err(bad_magic(path, &format!("magic is {:?}", fields[0])));
    }
    if fields[1] != "1" {
        return Err(bad_magic(path, &format!("unsupported version {:?}", fields[1])));
    }
    let dims: Vec<usize> = fields[2..5]
        .iter()
        .map(|f| f.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad_magic(path, "dimensions are not decimal integers"))?;
    let (rows, cols, n_bands) = (dims[0], dims[1], dims[2]);
    let dtype = match fields[5] {
        "u16" => CubeDtype::U16,
        "f32" => CubeDtype::F32,
        other => {
            return Err(Error::UnknownDtype {
                path: path.display().to_string(),
                dtype: other.to_string(),
            })
        }
    };

    let count = rows
        .checked_mul(cols)
        .and_then(|p| p.checked_mul(n_bands))
        .ok_or_else(|| bad_magic(path, "dimensions overflow"))?;
    let elem = match dtype {
        CubeDtype::U16 => 2,
        CubeDtype::F32 => 4,
    };
    let expected = (count * elem) as u64;
    let mut payload = Vec::new();
    reader
        .read_to_end(&mut payload)
        .map_err(|e| Error::io(path, e))?;
    if (payload.len() as u64) < expected {
        return Err(Error::TruncatedPayload {
            path: path.display().to_string(),
            expected,
            found: payload.len() as u64,
        });
    }
    if (payload.len() as u64) > expected {
        return Err(Error::TrailingData {
            path: path.display().to_string(),
        });
    }
    match dtype {
        CubeDtype::U16 => {
            let values: Vec<u16> = payload
                .chunks_exact(2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]))
                .collect();
            BandCube::from_u16(rows, cols, n_bands, values)
        }
        CubeDtype::F32 => {
            let values: Vec<f32> = payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            BandCube::from_f32(rows, cols, n_bands, values)
        }
    }
}

fn bad_magic(path: &Path, detail: &str) -> Error {
    Error::BadMagic {
        path: path.display().to_string(),
        detail: detail.to_string(),
    }
}

/// Reads a ground-truth map from a CSV of integer labels; the class count is
/// inferred as the maximum label. A map without two distinct classes loads
/// fine and is rejected later by operations that need class structure.
pub fn load_gt(path: &Path) -> Result<GroundTruthMap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels: Vec<u16> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (row, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for raw in line.split(',') {
            let token = raw.trim();
            if token.starts_with('-') {
                return Err(Error::NegativeLabels {
                    path: path.display().to_string(),
                    row,
                    value: token.to_string(),
                });
            }
            let value: u16 = token.parse().map_err(|_| Error::InvalidLabel {
                path: path.display().to_string(),
                row,
                value: token.to_string(),
            })?;
            labels.push(value);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::RaggedRows {
                    path: path.display().to_string(),
                    row,
                    len: count,
                    expected: w,
                })
            }
            _ => {}
        }
        rows += 1;
    }
    let Some(cols) = width else {
        return Err(Error::EmptyInput);
    };
    GroundTruthMap::new(rows, cols, labels)
}

/// Writes a ground-truth map as a CSV of integer labels.
pub fn save_gt(gt: &GroundTruthMap, path: &Path) -> Result<()> {
    let mut out = String::new();
    for r in 0..gt.rows() {
        let row: Vec<String> = (0..gt.cols()).map(|c| gt.label(r, c).to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Per-band MI curve: `band,mi_bits` with 1-based band indices.
pub fn mi_report(mi_per_band: &[f64]) -> String {
    let mut out = String::from("band,mi_bits\n");
    for (band, &mi) in mi_per_band.iter().enumerate() {
        out.push_str(&format!("{},{}\n", band + 1, fmt_real(mi)));
    }
    out
}

/// Selection report: a `#` preamble with thresholds and set sizes, then one
/// row per band with its MI, relevance flag, 1-based rank within the
/// ascending-MI candidate sequence (empty when cut), and selection flag.
pub fn selection_report(result: &SelectionResult) -> String {
    let config = result.config();
    let mut out = String::new();
    out.push_str(&format!("# th_relevance={}\n", fmt_real(config.th_relevance())));
    out.push_str(&format!("# th_redundancy={}\n", fmt_real(config.th_redundancy())));
    out.push_str(&format!("# bins={}\n", config.bins()));
    out.push_str(&format!("# su_scope={}\n", config.su_scope().as_str()));
    out.push_str(&format!("# n_relevant={}\n", result.relevant().len()));
    out.push_str(&format!("# n_selected={}\n", result.selected().len()));
    out.push_str("band,mi_bits,relevant,rank_in_s,selected\n");
    for (band, &mi) in result.mi_per_band().iter().enumerate() {
        let rank = result
            .relevant()
            .iter()
            .position(|&b| b == band)
            .map(|p| (p + 1).to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            band + 1,
            fmt_real(mi),
            u8::from(!rank.is_empty()),
            rank,
            u8::from(result.selected().contains(&band)),
        ));
    }
    out
}

/// Sweep grid report: one row per threshold pair; empty selections carry
/// `NA` accuracy.
pub fn sweep_report(cells: &[SweepCell]) -> String {
    let mut out = String::from("th_relevance,th_redundancy,n_bands,accuracy\n");
    for cell in cells {
        let accuracy = cell
            .accuracy
            .map(fmt_real)
            .unwrap_or_else(|| "NA".to_string());
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_real(cell.th_relevance),
            fmt_real(cell.th_redundancy),
            cell.n_bands,
            accuracy
        ));
    }
    out
}

fn classifier_name(kind: ClassifierKind) -> (&'static str, String) {
    match kind {
        ClassifierKind::NearestCentroid => ("centroid", String::new()),
        ClassifierKind::Knn(k) => ("knn", k.to_string()),
    }
}

/// Single-row accuracy report for an explicit band list (1-based,
/// semicolon-joined in the `bands` column).
pub fn classify_report(
    bands_one_based: &[usize],
    kind: ClassifierKind,
    seed: u64,
    accuracy: f64,
) -> String {
    let (name, k) = classifier_name(kind);
    let bands: Vec<String> = bands_one_based.iter().map(|b| b.to_string()).collect();
    format!(
        "classifier,k,seed,n_bands,bands,accuracy\n{},{},{},{},{},{}\n",
        name,
        k,
        seed,
        bands.len(),
        bands.join(";"),
        fmt_real(accuracy)
    )
}

/// Class map as a CSV of integer labels (same shape as a ground-truth CSV).
pub fn class_map_csv(map: &ClassMap) -> String {
    let mut out = String::new();
    for r in 0..map.rows() {
        let row: Vec<String> = (0..map.cols()).map(|c| map.label(r, c).to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Class map as an ASCII PGM (P2) image with `maxval` gray levels.
pub fn class_map_pgm(map: &ClassMap, maxval: u16) -> String {
    let maxval = maxval.max(1);
    let mut out = format!("P2\n{} {}\n{}\n", map.cols(), map.rows(), maxval);
    for r in 0..map.rows() {
        let row: Vec<String> = (0..map.cols()).map(|c| map.label(r, c).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Echo of a synthetic-cube recipe: seed, effective noise scale, and the
/// per-band role table.
pub fn spec_echo(spec: &SynthSpec, n_classes: u16) -> String {
    let mut out = String::new();
    out.push_str(&format!("# seed={}\n", spec.seed()));
    out.push_str(&format!("# noise_sigma={}\n", fmt_real(spec.sigma_for(n_classes))));
    out.push_str("band,role\n");
    for (band, role) in spec.roles().iter().enumerate() {
        out.push_str(&format!("{},{}\n", band + 1, role.describe()));
    }
    out
}

/// Writes a report (or any text artifact) to disk.
pub fn save_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
