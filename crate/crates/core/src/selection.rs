//! Two-stage band selection: relevance thresholding with ascending-MI
//! ordering, then greedy redundancy elimination over the pairwise
//! Symmetric Uncertainty matrix.
//!
//! The greedy loop repeatedly picks the least-redundant remaining pair and
//! admits each endpoint that stays below the redundancy threshold against
//! everything already admitted. Processed cells are raised to a sentinel so
//! they are never picked again; the sentinel is 2.0 rather than 1.0 so a
//! genuine U of exactly 1.0 (duplicate bands) stays distinguishable.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::infotheory::{mutual_information, quantize, symmetric_uncertainty, QuantizedBand};
use crate::model::{
    validate_pair, BandCube, GroundTruthMap, SelectionConfig, SelectionResult, SuScope,
};

/// Marks an upper-triangular cell as processed or unavailable.
pub const SU_SENTINEL: f64 = 2.0;

/// Upper-triangular pairwise Symmetric Uncertainty table over a candidate
/// sequence. Cells hold either a genuine U value in [0, 1] or
/// [`SU_SENTINEL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuMatrix {
    n: usize,
    cells: Vec<f64>,
}

impl SuMatrix {
    /// A matrix with every cell marked as the sentinel.
    pub fn new(n: usize) -> Self {
        let len = n * n.saturating_sub(1) / 2;
        Self {
            n,
            cells: vec![SU_SENTINEL; len],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Cell value for the unordered pair `{i, j}`, `i != j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.cells[self.index(i, j)]
    }

    /// Sets the cell for `{i, j}` to a genuine U value or the sentinel.
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidConfig(format!(
                "cell ({i}, {j}) is outside the strict upper triangle of a {n}x{n} table",
                n = self.n
            )));
        }
        if value != SU_SENTINEL && !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidConfig(format!(
                "cell value {value} is neither in [0, 1] nor the sentinel"
            )));
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let idx = self.index(i, j);
        self.cells[idx] = value;
        Ok(())
    }

    fn set_sentinel(&mut self, i: usize, j: usize) {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let idx = self.index(i, j);
        self.cells[idx] = SU_SENTINEL;
    }

    /// Smallest non-sentinel cell, ties broken by lexicographically smallest
    /// `(i, j)`.
    pub fn min_genuine(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.cells[self.index(i, j)];
                if v == SU_SENTINEL {
                    continue;
                }
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                }
            }
        }
        best
    }
}

/// Indices whose MI reaches `th_relevance`, sorted ascending by MI with ties
/// by ascending band index. An empty result is legal.
pub fn relevance_filter(mi_per_band: &[f64], th_relevance: f64) -> Vec<usize> {
    let mut s: Vec<usize> = (0..mi_per_band.len())
        .filter(|&b| mi_per_band[b] >= th_relevance)
        .collect();
    s.sort_by(|&a, &b| mi_per_band[a].total_cmp(&mi_per_band[b]).then(a.cmp(&b)));
    s
}

fn quantize_scoped(
    cube: &BandCube,
    gt: &GroundTruthMap,
    band: usize,
    bins: usize,
    scope: SuScope,
) -> Result<Vec<u32>> {
    let q: QuantizedBand = quantize(cube.band(band)?, bins)?;
    Ok(match scope {
        SuScope::AllPixels => q.codes().to_vec(),
        SuScope::LabeledOnly => {
            let labeled = gt.labeled_indices();
            labeled.iter().map(|&i| q.codes()[i]).collect()
        }
    })
}

/// Pairwise Symmetric Uncertainty over the candidate sequence `s`.
///
/// Each band is quantized over all pixels with its own extremes; under
/// `SuScope::LabeledOnly` the code sequences are then restricted to labeled
/// pixels. Cells are independent and filled in parallel.
pub fn build_su_matrix(
    cube: &BandCube,
    gt: &GroundTruthMap,
    s: &[usize],
    bins: usize,
    scope: SuScope,
) -> Result<SuMatrix> {
    let codes: Vec<Vec<u32>> = s
        .par_iter()
        .map(|&band| quantize_scoped(cube, gt, band, bins, scope))
        .collect::<Result<_>>()?;

    let n = s.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| symmetric_uncertainty(&codes[i], &codes[j]))
        .collect::<Result<_>>()?;

    let mut d = SuMatrix::new(n);
    for (&(i, j), &u) in pairs.iter().zip(&values) {
        d.set(i, j, u)?;
    }
    Ok(d)
}

/// Greedy redundancy elimination over a pairwise SU table.
///
/// While the minimum non-sentinel cell is below `th_redundancy`, take its
/// argument pair `(x, y)`; admit `x` if it is not already admitted and its U
/// against every admitted band is below the threshold, then likewise `y`;
/// finally mark the cell processed. Returns the admitted bands of `s` in
/// admission order (the loop mutates only a private copy of `d`).
pub fn redundancy_eliminate(d: &SuMatrix, s: &[usize], th_redundancy: f64) -> Result<Vec<usize>> {
    if !(th_redundancy > 0.0 && th_redundancy <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "th_redundancy must lie in (0, 1], got {th_redundancy}"
        )));
    }
    if d.n() != s.len() {
        return Err(Error::InvalidConfig(format!(
            "SU table of size {} does not match candidate sequence of length {}",
            d.n(),
            s.len()
        )));
    }
    let mut d = d.clone();
    let mut admitted: Vec<usize> = Vec::new();
    while let Some((x, y, v)) = d.min_genuine() {
        if v >= th_redundancy {
            break;
        }
        for cand in [x, y] {
            if !admitted.contains(&cand)
                && admitted.iter().all(|&l| d.get(cand, l) < th_redundancy)
            {
                admitted.push(cand);
            }
        }
        d.set_sentinel(x, y);
    }
    Ok(admitted.into_iter().map(|pos| s[pos]).collect())
}

/// Full selection pipeline: per-band MI against the ground truth, relevance
/// filtering, SU table construction, and greedy redundancy elimination.
///
/// An empty selected set is a legal outcome reported through the result, not
/// an error; callers can inspect [`SelectionResult::is_empty`].
pub fn select_bands(
    cube: &BandCube,
    gt: &GroundTruthMap,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    validate_pair(cube, gt)?;
    let mi_per_band = mi_curve(cube, gt, config.bins())?;
    let s = relevance_filter(&mi_per_band, config.th_relevance());
    let d = build_su_matrix(cube, gt, &s, config.bins(), config.su_scope())?;
    let admitted = redundancy_eliminate(&d, &s, config.th_redundancy())?;
    SelectionResult::new(
        mi_per_band,
        s,
        admitted.into_iter().collect::<BTreeSet<usize>>(),
        config.clone(),
    )
}

/// MI of every band against the ground truth, in band order.
pub fn mi_curve(cube: &BandCube, gt: &GroundTruthMap, bins: usize) -> Result<Vec<f64>> {
    validate_pair(cube, gt)?;
    let labeled = gt.labeled_indices();
    let labels: Vec<u32> = labeled.iter().map(|&i| u32::from(gt.labels()[i])).collect();
    (0..cube.n_bands())
        .into_par_iter()
        .map(|band| {
            let q = quantize(cube.band(band)?, bins)?;
            let codes: Vec<u32> = labeled.iter().map(|&i| q.codes()[i]).collect();
            Ok(mutual_information(&codes, &labels)?.mi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix_from(n: usize, entries: &[(usize, usize, f64)]) -> SuMatrix {
        let mut d = SuMatrix::new(n);
        for &(i, j, v) in entries {
            d.set(i, j, v).unwrap();
        }
        d
    }

    #[test]
    fn relevance_filter_orders_by_ascending_mi() {
        assert_eq!(relevance_filter(&[0.1, 0.5, 0.6], 0.4), vec![1, 2]);
        assert_eq!(relevance_filter(&[0.3, 0.3], 0.9), Vec::<usize>::new());
        // Ties keep ascending band order; threshold itself is kept.
        assert_eq!(relevance_filter(&[0.5, 0.4, 0.5], 0.4), vec![1, 0, 2]);
    }

    #[test]
    fn min_genuine_skips_sentinels_and_breaks_ties_lexicographically() {
        let mut d = matrix_from(3, &[(0, 1, 0.5), (0, 2, 0.2), (1, 2, 0.2)]);
        assert_eq!(d.min_genuine(), Some((0, 2, 0.2)));
        d.set_sentinel(0, 2);
        assert_eq!(d.min_genuine(), Some((1, 2, 0.2)));
        d.set_sentinel(1, 2);
        assert_eq!(d.min_genuine(), Some((0, 1, 0.5)));
        d.set_sentinel(0, 1);
        assert_eq!(d.min_genuine(), None);
    }

    #[test]
    fn su_matrix_rejects_bad_cells() {
        let mut d = SuMatrix::new(3);
        assert!(d.set(1, 1, 0.5).is_err());
        assert!(d.set(0, 3, 0.5).is_err());
        assert!(d.set(0, 1, 1.5).is_err());
        assert!(d.set(0, 1, SU_SENTINEL).is_ok());
        // Symmetric access.
        d.set(2, 0, 0.25).unwrap();
        assert_eq!(d.get(0, 2), 0.25);
        assert_eq!(d.get(2, 0), 0.25);
    }

    #[test]
    fn greedy_trace_from_hand_simulation() {
        // U(0,1)=0.2, U(0,2)=0.3, U(1,2)=0.4, th=0.35:
        // pair (0,1) admits both; then (0,2): 0 already in, 2 is blocked by
        // U(2,1)=0.4 >= 0.35; loop ends with min 0.4 >= th.
        let d = matrix_from(3, &[(0, 1, 0.2), (0, 2, 0.3), (1, 2, 0.4)]);
        let ss = redundancy_eliminate(&d, &[0, 1, 2], 0.35).unwrap();
        assert_eq!(ss, vec![0, 1]);
    }

    #[test]
    fn duplicates_never_coexist() {
        // Exact duplicates have U = 1.0; with th <= 1 the pair cell is never
        // picked and the second member is always blocked.
        let d = matrix_from(2, &[(0, 1, 1.0)]);
        let ss = redundancy_eliminate(&d, &[0, 1], 1.0).unwrap();
        assert!(ss.is_empty());

        let d = matrix_from(
            3,
            &[(0, 1, 1.0), (0, 2, 0.1), (1, 2, 0.1)],
        );
        let ss = redundancy_eliminate(&d, &[0, 1, 2], 0.9).unwrap();
        assert_eq!(ss, vec![0, 2]);
    }

    #[test]
    fn threshold_edges() {
        let d = matrix_from(3, &[(0, 1, 0.2), (0, 2, 0.3), (1, 2, 0.4)]);
        // Threshold at or below the minimum cell: loop never runs.
        assert_eq!(redundancy_eliminate(&d, &[0, 1, 2], 0.2).unwrap(), vec![]);
        // Threshold 1.0 with all cells < 1: everything admitted.
        assert_eq!(
            redundancy_eliminate(&d, &[0, 1, 2], 1.0).unwrap(),
            vec![0, 1, 2]
        );
        assert!(redundancy_eliminate(&d, &[0, 1, 2], 0.0).is_err());
        assert!(redundancy_eliminate(&d, &[0, 1, 2], 1.1).is_err());
        assert!(redundancy_eliminate(&d, &[0, 1], 0.5).is_err());
    }

    #[test]
    fn empty_and_singleton_candidates_yield_empty_selection() {
        let d = SuMatrix::new(0);
        assert_eq!(redundancy_eliminate(&d, &[], 0.7).unwrap(), vec![]);
        let d = SuMatrix::new(1);
        assert_eq!(redundancy_eliminate(&d, &[9], 0.7).unwrap(), vec![]);
    }

    #[test]
    fn candidate_positions_map_back_to_band_indices() {
        let d = matrix_from(2, &[(0, 1, 0.1)]);
        let ss = redundancy_eliminate(&d, &[14, 3], 0.7).unwrap();
        assert_eq!(ss, vec![14, 3]);
    }

    #[test]
    fn su_matrix_of_duplicate_bands_has_unit_cell() {
        use crate::model::{BandCube, GroundTruthMap};

        // Band 1 copies band 0; band 2 collides two codes, but only on the
        // unlabeled pixel.
        let gt = GroundTruthMap::new(2, 2, vec![1, 2, 1, 0]).unwrap();
        let values: Vec<u16> = vec![10, 20, 30, 40, 10, 20, 30, 40, 10, 20, 30, 25];
        let cube = BandCube::from_u16(2, 2, 3, values).unwrap();

        let d = build_su_matrix(&cube, &gt, &[0, 1, 2], 4, SuScope::AllPixels).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
        assert!(d.get(0, 2) < 1.0);

        // Restricted to labeled pixels the third band partitions like band 0.
        let d = build_su_matrix(&cube, &gt, &[0, 1, 2], 4, SuScope::LabeledOnly).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(0, 2), 1.0);
    }

    #[test]
    fn unreachable_relevance_threshold_selects_nothing() {
        use crate::model::{BandCube, GroundTruthMap, SelectionConfig};

        let gt = GroundTruthMap::new(2, 2, vec![1, 2, 1, 2]).unwrap();
        let cube = BandCube::from_u16(2, 2, 2, vec![1, 2, 1, 2, 5, 6, 7, 8]).unwrap();
        let config = SelectionConfig::new(50.0, 0.7).unwrap();
        let result = select_bands(&cube, &gt, &config).unwrap();
        assert!(result.relevant().is_empty());
        assert!(result.selected().is_empty());
        assert!(result.is_empty());
    }

    /// Literal transcription of the greedy pseudocode over a full mutable
    /// square matrix, used as an independent check of the flat-triangle
    /// implementation.
    fn naive_simulation(d0: &SuMatrix, th: f64) -> Vec<usize> {
        let n = d0.n();
        let mut d = vec![vec![SU_SENTINEL; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                d[i][j] = d0.get(i, j);
                d[j][i] = d0.get(i, j);
            }
        }
        let mut ss: Vec<usize> = Vec::new();
        loop {
            let mut arg = None;
            for i in 0..n {
                for j in (i + 1)..n {
                    if d[i][j] == SU_SENTINEL {
                        continue;
                    }
                    if arg.is_none_or(|(bi, bj): (usize, usize)| d[i][j] < d[bi][bj]) {
                        arg = Some((i, j));
                    }
                }
            }
            let Some((x, y)) = arg else { break };
            if d[x][y] >= th {
                break;
            }
            if !ss.contains(&x) && ss.iter().all(|&l| d[x][l] < th) {
                ss.push(x);
            }
            if !ss.contains(&y) && ss.iter().all(|&l| d[y][l] < th) {
                ss.push(y);
            }
            d[x][y] = SU_SENTINEL;
            d[y][x] = SU_SENTINEL;
        }
        ss
    }

    proptest! {
        #[test]
        fn greedy_matches_naive_simulation(
            n in 0usize..12,
            raw in proptest::collection::vec(0u32..=100, 0..66),
            th_steps in 1u32..=20,
        ) {
            let mut d = SuMatrix::new(n);
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = f64::from(raw.get(k).copied().unwrap_or(50)) / 100.0;
                    d.set(i, j, v).unwrap();
                    k += 1;
                }
            }
            let th = f64::from(th_steps) / 20.0;
            let s: Vec<usize> = (0..n).collect();
            let got = redundancy_eliminate(&d, &s, th).unwrap();
            prop_assert_eq!(got, naive_simulation(&d, th));
        }
    }
}
