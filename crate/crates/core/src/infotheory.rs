//! Histogram-based estimation of entropy, joint entropy, mutual information,
//! Symmetric Uncertainty, and Fano error-probability bounds.
//!
//! All quantities are in bits (base-2 logarithms) and use the convention
//! `0 * log 0 = 0`. Every function here is a pure function of its inputs and
//! safe to call from concurrent workers.

use crate::error::{Error, Result};
use crate::model::{validate_pair, BandCube, GroundTruthMap};

/// A band reduced to integer codes in `[0, bins)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedBand {
    codes: Vec<u32>,
    bins: usize,
}

impl QuantizedBand {
    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn bins(&self) -> usize {
        self.bins
    }
}

/// Entropies and mutual information of one variable pair, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub h_a: f64,
    pub h_b: f64,
    pub h_ab: f64,
    pub mi: f64,
}

/// Fano bounds on the classification error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Linear min-max quantization of a band into `bins` levels.
///
/// A value maps to `min(bins - 1, floor((v - vmin) * bins / (vmax - vmin)))`
/// with `vmin`/`vmax` the band's own extremes; a constant band maps to all
/// zeros. Monotone: `v1 <= v2` implies `q(v1) <= q(v2)`.
pub fn quantize(band_values: &[f64], bins: usize) -> Result<QuantizedBand> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!(
            "bins must be at least 2, got {bins}"
        )));
    }
    if band_values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = band_values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(format!(
            "cannot quantize non-finite value {v}"
        )));
    }
    let vmin = band_values.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = band_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let codes = if vmax == vmin {
        vec![0; band_values.len()]
    } else {
        let scale = bins as f64 / (vmax - vmin);
        band_values
            .iter()
            .map(|&v| (((v - vmin) * scale).floor() as usize).min(bins - 1) as u32)
            .collect()
    };
    Ok(QuantizedBand { codes, bins })
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, total: usize) -> f64 {
    let n = total as f64;
    counts
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Empirical Shannon entropy of a discrete array, in bits.
pub fn entropy(codes: &[u32], alphabet: usize) -> Result<f64> {
    if codes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0usize; alphabet];
    for &c in codes {
        let idx = c as usize;
        if idx >= alphabet {
            return Err(Error::CodeOutOfRange { code: c, alphabet });
        }
        counts[idx] += 1;
    }
    Ok(entropy_of_counts(counts.iter(), codes.len()))
}

// Joint tables are dense; reject pathological alphabets instead of thrashing.
const MAX_JOINT_CELLS: usize = 1 << 28;

/// Mutual information of two equal-length discrete arrays, from their
/// empirical joint histogram. Satisfies `mi = h_a + h_b - h_ab` (tiny
/// negative rounding residue clamps to zero).
pub fn mutual_information(a: &[u32], b: &[u32]) -> Result<MiEstimate> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let ka = a.iter().copied().max().expect("non-empty") as usize + 1;
    let kb = b.iter().copied().max().expect("non-empty") as usize + 1;
    if ka.saturating_mul(kb) > MAX_JOINT_CELLS {
        return Err(Error::InvalidConfig(format!(
            "joint alphabet {ka}x{kb} is too large for a dense histogram"
        )));
    }
    let mut joint = vec![0usize; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x as usize * kb + y as usize] += 1;
    }
    let mut marg_a = vec![0usize; ka];
    let mut marg_b = vec![0usize; kb];
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            marg_a[x] += c;
            marg_b[y] += c;
        }
    }
    let n = a.len();
    let h_a = entropy_of_counts(marg_a.iter(), n);
    let h_b = entropy_of_counts(marg_b.iter(), n);
    let h_ab = entropy_of_counts(joint.iter(), n);
    let mi = (h_a + h_b - h_ab).max(0.0);
    Ok(MiEstimate { h_a, h_b, h_ab, mi })
}

/// Symmetric Uncertainty `U(A, B) = 2 * MI(A, B) / (H(A) + H(B))`, in [0, 1].
///
/// Two constant variables have `H(A) + H(B) = 0` and are treated as fully
/// redundant (`U = 1`).
pub fn symmetric_uncertainty(a: &[u32], b: &[u32]) -> Result<f64> {
    let est = mutual_information(a, b)?;
    let denom = est.h_a + est.h_b;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok(2.0 * est.mi / denom)
}

/// Mutual information between one cube band and the ground-truth classes,
/// in bits. The band is quantized over all pixels with its own extremes,
/// then both sequences are restricted to labeled pixels.
pub fn mi_with_gt(
    cube: &BandCube,
    gt: &GroundTruthMap,
    band: usize,
    bins: usize,
) -> Result<f64> {
    validate_pair(cube, gt)?;
    let q = quantize(cube.band(band)?, bins)?;
    let labeled = gt.labeled_indices();
    let band_codes: Vec<u32> = labeled.iter().map(|&i| q.codes()[i]).collect();
    let labels: Vec<u32> = labeled.iter().map(|&i| u32::from(gt.labels()[i])).collect();
    Ok(mutual_information(&band_codes, &labels)?.mi)
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Fano bounds on the error probability of classifying `n_classes` classes
/// given features carrying `i_cx` bits about a class variable of entropy
/// `h_c` bits:
///
/// `lower = (H(C) - I(C;X) - 1) / log2(Nc)`,
/// `upper = (H(C) - I(C;X)) / log2(Nc)`, both clamped to [0, 1].
pub fn fano_bounds(h_c: f64, i_cx: f64, n_classes: usize) -> Result<FanoBounds> {
    if n_classes < 2 {
        return Err(Error::TooFewClasses(n_classes));
    }
    if !h_c.is_finite() || !i_cx.is_finite() {
        return Err(Error::NonFiniteInput(
            "fano bounds need finite entropies".into(),
        ));
    }
    let log_nc = (n_classes as f64).log2();
    let cond = h_c - i_cx;
    Ok(FanoBounds {
        lower: clamp_unit((cond - 1.0) / log_nc),
        upper: clamp_unit(cond / log_nc),
    })
}
