//! Shared data model: the hyperspectral cube, the ground-truth class map,
//! selection configuration and results, and the train/test split.
//!
//! All types validate their invariants at construction and are immutable
//! afterwards, so they can be shared freely across worker threads.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Storage element type of a cube, preserved through save/load round trips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeDtype {
    U16,
    F32,
}

impl CubeDtype {
    pub fn as_str(&self) -> &'static str {
        match self {
            CubeDtype::U16 => "u16",
            CubeDtype::F32 => "f32",
        }
    }
}

/// A dense hyperspectral cube: `n_bands` images of `rows` x `cols`
/// reflectance measures, stored band-major and row-major within a band.
///
/// Values are held as `f64` for computation regardless of the storage dtype;
/// every value of a `U16` cube is integral and every value of an `F32` cube
/// is exactly representable in `f32`, so serialization is lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCube {
    rows: usize,
    cols: usize,
    n_bands: usize,
    dtype: CubeDtype,
    values: Vec<f64>,
}

impl BandCube {
    pub fn from_u16(rows: usize, cols: usize, n_bands: usize, values: Vec<u16>) -> Result<Self> {
        let values = values.into_iter().map(f64::from).collect();
        Self::build(rows, cols, n_bands, CubeDtype::U16, values)
    }

    pub fn from_f32(rows: usize, cols: usize, n_bands: usize, values: Vec<f32>) -> Result<Self> {
        let values = values.into_iter().map(f64::from).collect();
        Self::build(rows, cols, n_bands, CubeDtype::F32, values)
    }

    fn build(
        rows: usize,
        cols: usize,
        n_bands: usize,
        dtype: CubeDtype,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || n_bands == 0 {
            return Err(Error::InvalidShape(format!(
                "cube dimensions must be positive, got {rows}x{cols}x{n_bands}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|p| p.checked_mul(n_bands))
            .ok_or_else(|| Error::InvalidShape("cube dimensions overflow".into()))?;
        if values.len() != expected {
            return Err(Error::InvalidShape(format!(
                "cube of {rows}x{cols}x{n_bands} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!(
                "cube contains non-finite value {v}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            n_bands,
            dtype,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
    }

    pub fn dtype(&self) -> CubeDtype {
        self.dtype
    }

    /// Pixels per band.
    pub fn plane_len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All values of one band, row-major.
    pub fn band(&self, band: usize) -> Result<&[f64]> {
        if band >= self.n_bands {
            return Err(Error::BandOutOfRange {
                band,
                n_bands: self.n_bands,
            });
        }
        let plane = self.plane_len();
        Ok(&self.values[band * plane..(band + 1) * plane])
    }

    pub fn value(&self, band: usize, row: usize, col: usize) -> f64 {
        self.values[band * self.plane_len() + row * self.cols + col]
    }
}

/// Per-pixel class labels; 0 marks an unlabeled pixel, classes run 1..=Nc.
///
/// `n_classes` is the largest label present. A map may load with fewer than
/// two classes; operations that need class structure reject it then.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthMap {
    rows: usize,
    cols: usize,
    n_classes: u16,
    labels: Vec<u16>,
}

impl GroundTruthMap {
    /// Builds a map, inferring `n_classes` as the maximum label.
    pub fn new(rows: usize, cols: usize, labels: Vec<u16>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!(
                "ground truth dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if labels.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "ground truth of {rows}x{cols} needs {} labels, got {}",
                rows * cols,
                labels.len()
            )));
        }
        let n_classes = labels.iter().copied().max().unwrap_or(0);
        Ok(Self {
            rows,
            cols,
            n_classes,
            labels,
        })
    }

    /// Builds a map with an explicit class count; every label must be <= it.
    pub fn with_classes(rows: usize, cols: usize, labels: Vec<u16>, n_classes: u16) -> Result<Self> {
        let map = Self::new(rows, cols, labels)?;
        if map.n_classes > n_classes {
            let flat = map
                .labels
                .iter()
                .position(|&l| l > n_classes)
                .expect("an offending label exists");
            return Err(Error::LabelOutOfRange {
                row: flat / cols,
                col: flat % cols,
                label: u32::from(map.labels[flat]),
                n_classes,
            });
        }
        Ok(Self { n_classes, ..map })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_classes(&self) -> u16 {
        self.n_classes
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.cols + col]
    }

    /// Flat indices (row-major) of labeled pixels.
    pub fn labeled_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    /// Number of distinct nonzero labels actually present.
    pub fn distinct_classes(&self) -> usize {
        self.labels
            .iter()
            .filter(|&&l| l != 0)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Row-major pixel coordinates per class, indexed by `class - 1`.
    pub fn class_pixels(&self) -> Vec<Vec<(usize, usize)>> {
        let mut per_class = vec![Vec::new(); usize::from(self.n_classes)];
        for (flat, &label) in self.labels.iter().enumerate() {
            if label != 0 {
                per_class[usize::from(label) - 1].push((flat / self.cols, flat % self.cols));
            }
        }
        per_class
    }
}

/// Checks that a cube and a ground truth describe the same scene and that the
/// ground truth is usable for class statistics.
pub fn validate_pair(cube: &BandCube, gt: &GroundTruthMap) -> Result<()> {
    if cube.rows() != gt.rows() || cube.cols() != gt.cols() {
        return Err(Error::DimensionMismatch {
            cube_rows: cube.rows(),
            cube_cols: cube.cols(),
            gt_rows: gt.rows(),
            gt_cols: gt.cols(),
        });
    }
    if gt.distinct_classes() < 2 {
        return Err(Error::DegenerateGroundTruth);
    }
    Ok(())
}

/// Which pixels participate in band-band statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SuScope {
    #[default]
    AllPixels,
    LabeledOnly,
}

impl SuScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            SuScope::AllPixels => "all_pixels",
            SuScope::LabeledOnly => "labeled_only",
        }
    }
}

pub const DEFAULT_BINS: usize = 64;

/// Thresholds and estimation settings for one selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    th_relevance: f64,
    th_redundancy: f64,
    bins: usize,
    su_scope: SuScope,
}

impl SelectionConfig {
    pub fn new(th_relevance: f64, th_redundancy: f64) -> Result<Self> {
        if !th_relevance.is_finite() || th_relevance < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "th_relevance must be a finite non-negative number of bits, got {th_relevance}"
            )));
        }
        if !th_redundancy.is_finite() || th_redundancy <= 0.0 || th_redundancy > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "th_redundancy must lie in (0, 1], got {th_redundancy}"
            )));
        }
        Ok(Self {
            th_relevance,
            th_redundancy,
            bins: DEFAULT_BINS,
            su_scope: SuScope::AllPixels,
        })
    }

    pub fn with_bins(mut self, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::InvalidConfig(format!(
                "bins must be at least 2, got {bins}"
            )));
        }
        self.bins = bins;
        Ok(self)
    }

    pub fn with_su_scope(mut self, su_scope: SuScope) -> Self {
        self.su_scope = su_scope;
        self
    }

    pub fn th_relevance(&self) -> f64 {
        self.th_relevance
    }

    pub fn th_redundancy(&self) -> f64 {
        self.th_redundancy
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn su_scope(&self) -> SuScope {
        self.su_scope
    }
}

/// Outcome of a full selection run.
///
/// `relevant` is the candidate sequence S in ascending order of mutual
/// information (ties by band index); `selected` is the final subset SS.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    mi_per_band: Vec<f64>,
    relevant: Vec<usize>,
    selected: BTreeSet<usize>,
    config: SelectionConfig,
}

impl SelectionResult {
    pub fn new(
        mi_per_band: Vec<f64>,
        relevant: Vec<usize>,
        selected: BTreeSet<usize>,
        config: SelectionConfig,
    ) -> Result<Self> {
        let n = mi_per_band.len();
        for &b in &relevant {
            if b >= n {
                return Err(Error::BandOutOfRange { band: b, n_bands: n });
            }
            if mi_per_band[b] < config.th_relevance() {
                return Err(Error::InvalidConfig(format!(
                    "band {b} has MI {} below th_relevance {}",
                    mi_per_band[b],
                    config.th_relevance()
                )));
            }
        }
        let mut distinct = relevant.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != relevant.len() {
            return Err(Error::InvalidConfig("relevant sequence has duplicates".into()));
        }
        let ordered = relevant.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            mi_per_band[a] < mi_per_band[b] || (mi_per_band[a] == mi_per_band[b] && a < b)
        });
        if !ordered {
            return Err(Error::InvalidConfig(
                "relevant sequence is not in ascending MI order".into(),
            ));
        }
        if !selected.iter().all(|b| relevant.contains(b)) {
            return Err(Error::InvalidConfig(
                "selected set is not a subset of the relevant sequence".into(),
            ));
        }
        Ok(Self {
            mi_per_band,
            relevant,
            selected,
            config,
        })
    }

    pub fn mi_per_band(&self) -> &[f64] {
        &self.mi_per_band
    }

    /// Candidate set S, ascending by MI.
    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    /// Final subset SS.
    pub fn selected(&self) -> &BTreeSet<usize> {
        &self.selected
    }

    pub fn config(&self) -> &SelectionConfig {
        &self.config
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Seeded train/test partition of the labeled pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    seed: u64,
    train: Vec<(usize, usize)>,
    test: Vec<(usize, usize)>,
}

impl SplitAssignment {
    /// Validates that `train` and `test` are disjoint and together cover
    /// exactly the labeled pixels of `gt`. Both sides are stored sorted.
    pub fn new(
        seed: u64,
        mut train: Vec<(usize, usize)>,
        mut test: Vec<(usize, usize)>,
        gt: &GroundTruthMap,
    ) -> Result<Self> {
        train.sort_unstable();
        test.sort_unstable();
        let mut union: Vec<(usize, usize)> = train.iter().chain(test.iter()).copied().collect();
        union.sort_unstable();
        union.dedup();
        if union.len() != train.len() + test.len() {
            return Err(Error::InvalidConfig(
                "train and test partitions overlap".into(),
            ));
        }
        let labeled: Vec<(usize, usize)> = gt
            .labeled_indices()
            .into_iter()
            .map(|flat| (flat / gt.cols(), flat % gt.cols()))
            .collect();
        if union != labeled {
            return Err(Error::InvalidConfig(
                "train and test do not cover exactly the labeled pixels".into(),
            ));
        }
        Ok(Self { seed, train, test })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn train(&self) -> &[(usize, usize)] {
        &self.train
    }

    pub fn test(&self) -> &[(usize, usize)] {
        &self.test
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cube() -> BandCube {
        BandCube::from_u16(2, 2, 1, vec![1, 2, 3, 4]).unwrap()
    }

    #[test]
    fn cube_shape_is_checked() {
        assert!(BandCube::from_u16(2, 2, 2, vec![0; 8]).is_ok());
        let err = BandCube::from_u16(2, 2, 2, vec![0; 7]).unwrap_err();
        assert_eq!(err.code(), "invalid-shape");
        let err = BandCube::from_u16(0, 2, 2, vec![]).unwrap_err();
        assert_eq!(err.code(), "invalid-shape");
    }

    #[test]
    fn cube_rejects_non_finite() {
        let err = BandCube::from_f32(1, 2, 1, vec![1.0, f32::NAN]).unwrap_err();
        assert_eq!(err.code(), "non-finite-input");
    }

    #[test]
    fn band_slices_are_band_major() {
        let cube = BandCube::from_u16(1, 2, 2, vec![1, 2, 10, 20]).unwrap();
        assert_eq!(cube.band(0).unwrap(), &[1.0, 2.0]);
        assert_eq!(cube.band(1).unwrap(), &[10.0, 20.0]);
        assert_eq!(cube.value(1, 0, 1), 20.0);
        assert_eq!(cube.band(2).unwrap_err().code(), "band-out-of-range");
    }

    #[test]
    fn gt_infers_class_count() {
        let gt = GroundTruthMap::new(2, 2, vec![0, 3, 1, 3]).unwrap();
        assert_eq!(gt.n_classes(), 3);
        assert_eq!(gt.labeled_count(), 3);
        assert_eq!(gt.distinct_classes(), 2);
    }

    #[test]
    fn gt_with_classes_rejects_high_labels() {
        let err = GroundTruthMap::with_classes(1, 3, vec![0, 5, 1], 4).unwrap_err();
        assert_eq!(err.code(), "label-out-of-range");
    }

    #[test]
    fn validate_pair_checks_shape_and_classes() {
        // AVIRIS-shaped pair.
        let cube = BandCube::from_u16(4, 4, 3, vec![7; 48]).unwrap();
        let mut labels = vec![0u16; 16];
        labels[0] = 1;
        labels[5] = 2;
        let gt = GroundTruthMap::new(4, 4, labels).unwrap();
        assert!(validate_pair(&cube, &gt).is_ok());

        let gt3 = GroundTruthMap::new(3, 3, vec![1, 2, 0, 0, 0, 0, 0, 0, 0]).unwrap();
        let err = validate_pair(&small_cube(), &gt3).unwrap_err();
        assert_eq!(err.code(), "dimension-mismatch");

        let zeros = GroundTruthMap::new(2, 2, vec![0; 4]).unwrap();
        let err = validate_pair(&small_cube(), &zeros).unwrap_err();
        assert_eq!(err.code(), "degenerate-gt");

        // A single class is just as degenerate.
        let one = GroundTruthMap::new(2, 2, vec![1, 1, 0, 0]).unwrap();
        let err = validate_pair(&small_cube(), &one).unwrap_err();
        assert_eq!(err.code(), "degenerate-gt");
    }

    #[test]
    fn config_rejects_bad_thresholds() {
        assert!(SelectionConfig::new(0.0, 1.0).is_ok());
        assert!(SelectionConfig::new(0.4, 0.7).is_ok());
        assert_eq!(
            SelectionConfig::new(-0.1, 0.7).unwrap_err().code(),
            "invalid-config"
        );
        assert_eq!(
            SelectionConfig::new(0.4, 0.0).unwrap_err().code(),
            "invalid-config"
        );
        assert_eq!(
            SelectionConfig::new(0.4, 1.2).unwrap_err().code(),
            "invalid-config"
        );
        assert_eq!(
            SelectionConfig::new(0.4, 0.7)
                .unwrap()
                .with_bins(1)
                .unwrap_err()
                .code(),
            "invalid-config"
        );
    }

    #[test]
    fn selection_result_enforces_ordering_and_subset() {
        let config = SelectionConfig::new(0.2, 0.7).unwrap();
        let mi = vec![0.1, 0.5, 0.3];
        let ok = SelectionResult::new(mi.clone(), vec![2, 1], BTreeSet::from([1]), config.clone());
        assert!(ok.is_ok());

        // Wrong order.
        let err = SelectionResult::new(mi.clone(), vec![1, 2], BTreeSet::new(), config.clone());
        assert!(err.is_err());

        // Below-threshold member.
        let err = SelectionResult::new(mi.clone(), vec![0, 2, 1], BTreeSet::new(), config.clone());
        assert!(err.is_err());

        // Selected outside relevant.
        let err = SelectionResult::new(mi, vec![2, 1], BTreeSet::from([0]), config);
        assert!(err.is_err());
    }

    #[test]
    fn split_assignment_must_cover_labeled_pixels() {
        let gt = GroundTruthMap::new(2, 2, vec![1, 0, 2, 2]).unwrap();
        let ok = SplitAssignment::new(7, vec![(0, 0), (1, 0)], vec![(1, 1)], &gt);
        assert!(ok.is_ok());

        let err = SplitAssignment::new(7, vec![(0, 0)], vec![(0, 0), (1, 0), (1, 1)], &gt);
        assert!(err.is_err());

        let err = SplitAssignment::new(7, vec![(0, 0)], vec![(1, 1)], &gt);
        assert!(err.is_err());

        // Unlabeled pixel in the partition.
        let err = SplitAssignment::new(7, vec![(0, 0), (0, 1)], vec![(1, 0), (1, 1)], &gt);
        assert!(err.is_err());
    }
}
