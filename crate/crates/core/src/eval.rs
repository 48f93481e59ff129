//! Evaluation of band selections: seeded stratified splits, lightweight
//! classifiers (nearest-centroid and k-NN on z-scored features), threshold
//! sweep grids, and full-scene class-map reconstruction.
//!
//! All prediction ties break toward the lowest class id so outputs are
//! deterministic.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    validate_pair, BandCube, GroundTruthMap, SelectionConfig, SplitAssignment, SuScope,
};
use crate::selection::{build_su_matrix, mi_curve, redundancy_eliminate, relevance_filter};

/// Which classifier scores a band subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    NearestCentroid,
    Knn(usize),
}

/// A trained classifier over a fixed band subset: per-band z-score stats from
/// the training pixels plus either class centroids or the training vectors.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    kind: ClassifierKind,
    bands: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
    /// `(class, centroid)` in ascending class order.
    centroids: Vec<(u16, Vec<f64>)>,
    train_vectors: Vec<Vec<f64>>,
    train_labels: Vec<u16>,
}

impl ClassifierModel {
    /// Trains on the split's training pixels using only `bands`.
    pub fn train(
        cube: &BandCube,
        gt: &GroundTruthMap,
        bands: &BTreeSet<usize>,
        split: &SplitAssignment,
        kind: ClassifierKind,
    ) -> Result<Self> {
        validate_pair(cube, gt)?;
        if bands.is_empty() {
            return Err(Error::EmptyBandSet);
        }
        let bands: Vec<usize> = bands.iter().copied().collect();
        for &b in &bands {
            if b >= cube.n_bands() {
                return Err(Error::BandOutOfRange {
                    band: b,
                    n_bands: cube.n_bands(),
                });
            }
        }
        if let ClassifierKind::Knn(k) = kind {
            if k == 0 {
                return Err(Error::InvalidConfig("k must be at least 1".into()));
            }
        }
        let train = split.train();
        if train.is_empty() {
            return Err(Error::EmptyTrainSet);
        }

        // z-score statistics from training pixels only; constant bands keep
        // a unit scale.
        let n = train.len() as f64;
        let mut means = vec![0.0; bands.len()];
        let mut stds = vec![0.0; bands.len()];
        for (bi, &band) in bands.iter().enumerate() {
            let mut sum = 0.0;
            for &(r, c) in train {
                sum += cube.value(band, r, c);
            }
            let mean = sum / n;
            let mut ss = 0.0;
            for &(r, c) in train {
                let d = cube.value(band, r, c) - mean;
                ss += d * d;
            }
            let std = (ss / n).sqrt();
            means[bi] = mean;
            stds[bi] = if std == 0.0 { 1.0 } else { std };
        }

        let mut model = Self {
            kind,
            bands,
            means,
            stds,
            centroids: Vec::new(),
            train_vectors: Vec::new(),
            train_labels: Vec::new(),
        };

        let vectors: Vec<Vec<f64>> = train
            .iter()
            .map(|&(r, c)| model.features_at(cube, r, c))
            .collect();
        let labels: Vec<u16> = train.iter().map(|&(r, c)| gt.label(r, c)).collect();

        match kind {
            ClassifierKind::NearestCentroid => {
                let classes: BTreeSet<u16> = labels.iter().copied().collect();
                for class in classes {
                    let members: Vec<&Vec<f64>> = vectors
                        .iter()
                        .zip(&labels)
                        .filter(|(_, &l)| l == class)
                        .map(|(v, _)| v)
                        .collect();
                    let mut centroid = vec![0.0; model.bands.len()];
                    for v in &members {
                        for (acc, x) in centroid.iter_mut().zip(v.iter()) {
                            *acc += x;
                        }
                    }
                    for acc in &mut centroid {
                        *acc /= members.len() as f64;
                    }
                    model.centroids.push((class, centroid));
                }
            }
            ClassifierKind::Knn(_) => {
                model.train_vectors = vectors;
                model.train_labels = labels;
            }
        }
        Ok(model)
    }

    fn features_at(&self, cube: &BandCube, row: usize, col: usize) -> Vec<f64> {
        self.bands
            .iter()
            .enumerate()
            .map(|(bi, &band)| (cube.value(band, row, col) - self.means[bi]) / self.stds[bi])
            .collect()
    }

    /// Predicts the class of one pixel. Equidistant alternatives resolve to
    /// the lowest class id.
    pub fn predict(&self, cube: &BandCube, row: usize, col: usize) -> u16 {
        let x = self.features_at(cube, row, col);
        match self.kind {
            ClassifierKind::NearestCentroid => {
                let mut best = (f64::INFINITY, 0u16);
                for (class, centroid) in &self.centroids {
                    let d = sq_dist(&x, centroid);
                    if d < best.0 {
                        best = (d, *class);
                    }
                }
                best.1
            }
            ClassifierKind::Knn(k) => {
                let mut order: Vec<usize> = (0..self.train_vectors.len()).collect();
                let dists: Vec<f64> = self
                    .train_vectors
                    .iter()
                    .map(|v| sq_dist(&x, v))
                    .collect();
                order.sort_by(|&i, &j| dists[i].total_cmp(&dists[j]).then(i.cmp(&j)));
                let k = k.min(order.len());
                let mut votes: Vec<(u16, usize)> = Vec::new();
                for &i in &order[..k] {
                    let label = self.train_labels[i];
                    match votes.iter_mut().find(|(l, _)| *l == label) {
                        Some((_, c)) => *c += 1,
                        None => votes.push((label, 1)),
                    }
                }
                votes
                    .iter()
                    .max_by(|(la, ca), (lb, cb)| ca.cmp(cb).then(lb.cmp(la)))
                    .map(|&(l, _)| l)
                    .unwrap_or(0)
            }
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn bands(&self) -> &[usize] {
        &self.bands
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Stratified 50/50 split of the labeled pixels, deterministic in `seed`.
/// Each class contributes `floor(count / 2)` training pixels.
pub fn split(gt: &GroundTruthMap, seed: u64) -> Result<SplitAssignment> {
    if gt.distinct_classes() < 2 {
        return Err(Error::DegenerateGroundTruth);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut pixels in gt.class_pixels() {
        pixels.shuffle(&mut rng);
        let n_train = pixels.len() / 2;
        train.extend_from_slice(&pixels[..n_train]);
        test.extend_from_slice(&pixels[n_train..]);
    }
    SplitAssignment::new(seed, train, test, gt)
}

/// Trains on the split's training half and returns the fraction of correctly
/// classified test pixels.
pub fn train_classify(
    cube: &BandCube,
    gt: &GroundTruthMap,
    bands: &BTreeSet<usize>,
    split: &SplitAssignment,
    kind: ClassifierKind,
) -> Result<f64> {
    if split.test().is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let model = ClassifierModel::train(cube, gt, bands, split, kind)?;
    let correct: usize = split
        .test()
        .par_iter()
        .map(|&(r, c)| usize::from(model.predict(cube, r, c) == gt.label(r, c)))
        .sum();
    Ok(correct as f64 / split.test().len() as f64)
}

/// One cell of a threshold-sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub th_relevance: f64,
    pub th_redundancy: f64,
    /// `|SS|` for this threshold pair.
    pub n_bands: usize,
    /// Test accuracy, absent when the selection came out empty.
    pub accuracy: Option<f64>,
}

/// Runs the selection and classification for every `(relevance, redundancy)`
/// threshold pair. One split (from `seed`) is reused across all cells so
/// cells differ only by the selection. Cells are emitted with `red_grid` as
/// the outer (row) order.
///
/// Per-band MI and pairwise SU values are computed once and shared across
/// cells; each cell's result is identical to an independent
/// [`crate::selection::select_bands`] run at the same thresholds.
pub fn sweep(
    cube: &BandCube,
    gt: &GroundTruthMap,
    rel_grid: &[f64],
    red_grid: &[f64],
    bins: usize,
    su_scope: SuScope,
    seed: u64,
    kind: ClassifierKind,
) -> Result<Vec<SweepCell>> {
    if rel_grid.is_empty() || red_grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grids must be non-empty".into()));
    }
    for &rel in rel_grid {
        SelectionConfig::new(rel, 1.0)?;
    }
    for &red in red_grid {
        SelectionConfig::new(0.0, red)?;
    }
    validate_pair(cube, gt)?;
    let assignment = split(gt, seed)?;
    let mi = mi_curve(cube, gt, bins)?;

    // Every cell's candidate set is a subset of the loosest one, and SU is a
    // property of the band pair alone, so one table covers the whole grid.
    let min_rel = rel_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let s_union = relevance_filter(&mi, min_rel);
    let d_union = build_su_matrix(cube, gt, &s_union, bins, su_scope)?;

    let cells: Vec<(f64, f64)> = red_grid
        .iter()
        .flat_map(|&red| rel_grid.iter().map(move |&rel| (rel, red)))
        .collect();
    cells
        .par_iter()
        .map(|&(rel, red)| {
            let s = relevance_filter(&mi, rel);
            let mut d = crate::selection::SuMatrix::new(s.len());
            for (i, &band_i) in s.iter().enumerate() {
                let pos_i = s_union.iter().position(|&b| b == band_i).expect("subset");
                for (j, &band_j) in s.iter().enumerate().skip(i + 1) {
                    let pos_j = s_union.iter().position(|&b| b == band_j).expect("subset");
                    d.set(i, j, d_union.get(pos_i, pos_j))?;
                }
            }
            let ss: BTreeSet<usize> = redundancy_eliminate(&d, &s, red)?.into_iter().collect();
            let accuracy = if ss.is_empty() {
                None
            } else {
                Some(train_classify(cube, gt, &ss, &assignment, kind)?)
            };
            Ok(SweepCell {
                th_relevance: rel,
                th_redundancy: red,
                n_bands: ss.len(),
                accuracy,
            })
        })
        .collect()
}

/// A full-scene class map: every pixel, labeled or not, carries a class in
/// `[1, Nc]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    rows: usize,
    cols: usize,
    labels: Vec<u16>,
}

impl ClassMap {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.cols + col]
    }
}

/// Trains on the split's training half and predicts a class for every pixel
/// of the scene.
pub fn reconstruct_map(
    cube: &BandCube,
    gt: &GroundTruthMap,
    bands: &BTreeSet<usize>,
    split: &SplitAssignment,
    kind: ClassifierKind,
) -> Result<ClassMap> {
    let model = ClassifierModel::train(cube, gt, bands, split, kind)?;
    let cols = cube.cols();
    let labels: Vec<u16> = (0..cube.rows() * cols)
        .into_par_iter()
        .map(|flat| model.predict(cube, flat / cols, flat % cols))
        .collect();
    Ok(ClassMap {
        rows: cube.rows(),
        cols,
        labels,
    })
}
