//! Deterministic generation of a 19-band synthetic cube from a ground-truth
//! map, with engineered informative, masked, near-duplicate, disjoint, and
//! pure-noise bands.
//!
//! Band roles are pinned so the classic observations hold: three bands carry
//! no class information and fall to relevance filtering, one band nearly
//! duplicates another (pairwise U close to 1), and one band pair splits the
//! classes into disjoint halves (pairwise U close to 0, so the greedy loop
//! admits that pair first).
//!
//! Generation is a pure function of `(gt, spec)`: every band draws from its
//! own RNG stream (`seed xor band_index`), so bands generated in parallel
//! are bit-identical to serial output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BandCube, GroundTruthMap};

/// Seed used by the command-line tools when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// Number of synthetic bands.
pub const SYNTH_BANDS: usize = 19;

/// Default noise scale as a fraction of the label dynamic range. Kept small
/// relative to a 64-bin quantization step so the near-duplicate band stays
/// nearly indistinguishable from its source after binning.
pub const DEFAULT_NOISE_FRACTION: f64 = 0.005;

// Streams that must not collide with any band stream (band indices 0..18).
const PARTITION_STREAM: u64 = 0x7061_7254;

/// What one synthetic band encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandRole {
    /// Labels plus Gaussian noise of scale sigma.
    NoisyCopy,
    /// Labels with a seeded subset of classes zeroed, plus noise.
    ClassMasked,
    /// Another band plus small noise (sigma / 5); the argument is the
    /// 0-based index of the duplicated band.
    NearDuplicateOf(usize),
    /// Labels of one half of a seeded class partition, zero elsewhere.
    DisjointPairMember,
    /// Uniform noise independent of the labels.
    PureNoise,
}

impl BandRole {
    pub fn describe(&self) -> String {
        match self {
            BandRole::NoisyCopy => "noisy_copy".into(),
            BandRole::ClassMasked => "class_masked".into(),
            BandRole::NearDuplicateOf(k) => format!("near_duplicate_of_{}", k + 1),
            BandRole::DisjointPairMember => "disjoint_pair_member".into(),
            BandRole::PureNoise => "pure_noise".into(),
        }
    }
}

/// Recipe for one synthetic cube.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    seed: u64,
    noise_sigma: Option<f64>,
    roles: Vec<BandRole>,
}

impl SynthSpec {
    /// The default 19-band recipe for `seed`.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            noise_sigma: None,
            roles: Self::default_roles(),
        }
    }

    /// The pinned role layout (0-based indices; reports use 1-based names):
    /// bands 7, 9, 13 are pure noise, band 17 nearly duplicates band 4,
    /// bands 16 and 18 form the disjoint pair, and the rest alternate
    /// between noisy copies and class-masked variants.
    pub fn default_roles() -> Vec<BandRole> {
        use BandRole::*;
        vec![
            NoisyCopy,          // A1
            ClassMasked,        // A2
            ClassMasked,        // A3
            NoisyCopy,          // A4
            ClassMasked,        // A5
            ClassMasked,        // A6
            PureNoise,          // A7
            ClassMasked,        // A8
            PureNoise,          // A9
            NoisyCopy,          // A10
            ClassMasked,        // A11
            ClassMasked,        // A12
            PureNoise,          // A13
            NoisyCopy,          // A14
            ClassMasked,        // A15
            DisjointPairMember, // A16
            NearDuplicateOf(3), // A17 duplicates A4
            DisjointPairMember, // A18
            NoisyCopy,          // A19
        ]
    }

    /// Overrides the noise scale (absolute, in label units).
    pub fn with_noise_sigma(mut self, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise_sigma must be finite and non-negative, got {sigma}"
            )));
        }
        self.noise_sigma = Some(sigma);
        Ok(self)
    }

    /// Replaces the roles of the freely assignable bands. The pinned bands
    /// (pure-noise trio, near-duplicate, disjoint pair) must keep their
    /// roles.
    pub fn with_roles(mut self, roles: Vec<BandRole>) -> Result<Self> {
        Self::validate_roles(&roles)?;
        self.roles = roles;
        Ok(self)
    }

    fn validate_roles(roles: &[BandRole]) -> Result<()> {
        if roles.len() != SYNTH_BANDS {
            return Err(Error::InvalidConfig(format!(
                "expected {SYNTH_BANDS} roles, got {}",
                roles.len()
            )));
        }
        for idx in [6, 8, 12] {
            if roles[idx] != BandRole::PureNoise {
                return Err(Error::InvalidConfig(format!(
                    "band {} must be pure_noise",
                    idx + 1
                )));
            }
        }
        if roles[16] != BandRole::NearDuplicateOf(3) {
            return Err(Error::InvalidConfig(
                "band 17 must be near_duplicate_of band 4".into(),
            ));
        }
        for idx in [15, 17] {
            if roles[idx] != BandRole::DisjointPairMember {
                return Err(Error::InvalidConfig(format!(
                    "band {} must be a disjoint pair member",
                    idx + 1
                )));
            }
        }
        for (i, role) in roles.iter().enumerate() {
            if let BandRole::NearDuplicateOf(k) = role {
                if *k >= SYNTH_BANDS || *k == i {
                    return Err(Error::InvalidConfig(format!(
                        "band {} duplicates an invalid target {}",
                        i + 1,
                        k + 1
                    )));
                }
                if matches!(roles[*k], BandRole::NearDuplicateOf(_)) {
                    return Err(Error::InvalidConfig(
                        "near-duplicate chains are not supported".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn roles(&self) -> &[BandRole] {
        &self.roles
    }

    /// The effective noise scale for a map with `n_classes` classes.
    pub fn sigma_for(&self, n_classes: u16) -> f64 {
        self.noise_sigma
            .unwrap_or(DEFAULT_NOISE_FRACTION * f64::from(n_classes))
    }
}

/// The classes assigned to the lower-indexed disjoint band, drawn from the
/// partition stream of `seed`.
fn partition_low(n_classes: u16, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ PARTITION_STREAM);
    let mut classes: Vec<u16> = (1..=n_classes).collect();
    classes.shuffle(&mut rng);
    let take = classes.len().div_ceil(2);
    let mut in_low = vec![false; usize::from(n_classes) + 1];
    for &c in &classes[..take] {
        in_low[usize::from(c)] = true;
    }
    in_low
}

fn band_values(
    gt: &GroundTruthMap,
    spec: &SynthSpec,
    band: usize,
    sigma: f64,
    in_low: &[bool],
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ band as u64);
    let nc = gt.n_classes();
    let labels = gt.labels();
    match spec.roles()[band] {
        BandRole::NoisyCopy => {
            let noise = Normal::new(0.0, sigma).expect("validated sigma");
            labels
                .iter()
                .map(|&l| f64::from(l) + noise.sample(&mut rng))
                .collect()
        }
        BandRole::ClassMasked => {
            let mask_size = (usize::from(nc) / 8).clamp(1, usize::from(nc) - 1);
            let mut classes: Vec<u16> = (1..=nc).collect();
            classes.shuffle(&mut rng);
            let mut masked = vec![false; usize::from(nc) + 1];
            for &c in &classes[..mask_size] {
                masked[usize::from(c)] = true;
            }
            let noise = Normal::new(0.0, sigma).expect("validated sigma");
            labels
                .iter()
                .map(|&l| {
                    let base = if masked[usize::from(l)] { 0.0 } else { f64::from(l) };
                    base + noise.sample(&mut rng)
                })
                .collect()
        }
        BandRole::NearDuplicateOf(k) => {
            let base = band_values(gt, spec, k, sigma, in_low);
            let noise = Normal::new(0.0, sigma / 5.0).expect("validated sigma");
            base.into_iter().map(|v| v + noise.sample(&mut rng)).collect()
        }
        BandRole::DisjointPairMember => {
            // The lower-indexed member keeps the low partition.
            let first_member = spec
                .roles()
                .iter()
                .position(|r| *r == BandRole::DisjointPairMember)
                .expect("validated roles");
            let keep_low = band == first_member;
            labels
                .iter()
                .map(|&l| {
                    if l != 0 && in_low[usize::from(l)] == keep_low {
                        f64::from(l)
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        BandRole::PureNoise => {
            let hi = f64::from(nc);
            labels.iter().map(|_| rng.random_range(0.0..hi)).collect()
        }
    }
}

/// Generates the synthetic cube for `gt` under `spec`. Deterministic for a
/// fixed `(gt, spec)`; values are stored as `f32`.
pub fn generate(gt: &GroundTruthMap, spec: &SynthSpec) -> Result<BandCube> {
    if gt.distinct_classes() < 2 {
        return Err(Error::DegenerateGroundTruth);
    }
    SynthSpec::validate_roles(spec.roles())?;
    let sigma = spec.sigma_for(gt.n_classes());
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidConfig(format!("invalid noise sigma {sigma}")));
    }
    let in_low = partition_low(gt.n_classes(), spec.seed());
    let planes: Vec<Vec<f64>> = (0..SYNTH_BANDS)
        .into_par_iter()
        .map(|band| band_values(gt, spec, band, sigma, &in_low))
        .collect();
    let mut values = Vec::with_capacity(gt.rows() * gt.cols() * SYNTH_BANDS);
    for plane in planes {
        values.extend(plane.into_iter().map(|v| v as f32));
    }
    BandCube::from_f32(gt.rows(), gt.cols(), SYNTH_BANDS, values)
}

/// Builds a blocky demo scene: a seeded patchwork of rectangular fields in
/// which roughly half the blocks are unlabeled, every class covers several
/// blocks, and the layout is deterministic in `seed`.
pub fn synthetic_ground_truth(
    rows: usize,
    cols: usize,
    n_classes: u16,
    seed: u64,
) -> Result<GroundTruthMap> {
    if n_classes < 2 {
        return Err(Error::TooFewClasses(usize::from(n_classes)));
    }
    let grid_r = rows.min(10);
    let grid_c = cols.min(10);
    let n_blocks = grid_r * grid_c;
    let labeled_blocks = n_blocks - n_blocks / 2;
    if labeled_blocks < usize::from(n_classes) {
        return Err(Error::InvalidConfig(format!(
            "a {rows}x{cols} scene is too small for {n_classes} classes"
        )));
    }

    // Alternate labeled/unlabeled blocks, cycling through the classes, then
    // shuffle the layout.
    let mut assignment: Vec<u16> = (0..n_blocks)
        .map(|b| {
            if b % 2 == 1 {
                0
            } else {
                (b / 2 % usize::from(n_classes)) as u16 + 1
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    assignment.shuffle(&mut rng);

    let mut labels = vec![0u16; rows * cols];
    for (block, &class) in assignment.iter().enumerate() {
        let (br, bc) = (block / grid_c, block % grid_c);
        let r0 = br * rows / grid_r;
        let r1 = (br + 1) * rows / grid_r;
        let c0 = bc * cols / grid_c;
        let c1 = (bc + 1) * cols / grid_c;
        for r in r0..r1 {
            for c in c0..c1 {
                labels[r * cols + c] = class;
            }
        }
    }
    GroundTruthMap::with_classes(rows, cols, labels, n_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::symmetric_uncertainty;
    use crate::selection::mi_curve;

    fn demo_gt() -> GroundTruthMap {
        synthetic_ground_truth(60, 60, 8, DEFAULT_SEED).unwrap()
    }

    #[test]
    fn ground_truth_covers_all_classes_with_unlabeled_share() {
        let gt = demo_gt();
        assert_eq!(gt.n_classes(), 8);
        assert_eq!(gt.distinct_classes(), 8);
        let labeled = gt.labeled_count();
        let total = gt.rows() * gt.cols();
        assert!(labeled > total / 3 && labeled < 2 * total / 3);
        for pixels in gt.class_pixels() {
            assert!(pixels.len() >= 2);
        }
    }

    #[test]
    fn ground_truth_rejects_degenerate_requests() {
        assert_eq!(
            synthetic_ground_truth(60, 60, 1, 1).unwrap_err().code(),
            "too-few-classes"
        );
        assert_eq!(
            synthetic_ground_truth(2, 2, 16, 1).unwrap_err().code(),
            "invalid-config"
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let gt = demo_gt();
        let spec = SynthSpec::new(7);
        let a = generate(&gt, &spec).unwrap();
        let b = generate(&gt, &spec).unwrap();
        assert_eq!(a, b);
        let c = generate(&gt, &SynthSpec::new(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn role_invariants_are_enforced() {
        let mut roles = SynthSpec::default_roles();
        roles[6] = BandRole::NoisyCopy;
        assert!(SynthSpec::new(1).with_roles(roles).is_err());

        let mut roles = SynthSpec::default_roles();
        roles[0] = BandRole::NearDuplicateOf(16);
        assert!(SynthSpec::new(1).with_roles(roles).is_err(), "chain rejected");

        assert!(SynthSpec::new(1).with_roles(SynthSpec::default_roles()).is_ok());
        assert!(SynthSpec::new(1).with_noise_sigma(-1.0).is_err());
    }

    #[test]
    fn degenerate_gt_is_rejected() {
        let gt = GroundTruthMap::new(4, 4, vec![0; 16]).unwrap();
        assert_eq!(
            generate(&gt, &SynthSpec::new(1)).unwrap_err().code(),
            "degenerate-gt"
        );
    }

    #[test]
    fn noise_bands_rank_below_informative_bands() {
        let gt = demo_gt();
        for seed in 0..10 {
            let cube = generate(&gt, &SynthSpec::new(seed)).unwrap();
            let mi = mi_curve(&cube, &gt, 64).unwrap();
            let worst_informative = (0..SYNTH_BANDS)
                .filter(|b| ![6, 8, 12].contains(b))
                .map(|b| mi[b])
                .fold(f64::INFINITY, f64::min);
            for noise in [6, 8, 12] {
                assert!(
                    mi[noise] < worst_informative,
                    "seed {seed}: noise band {noise} has MI {} >= {worst_informative}",
                    mi[noise]
                );
            }
        }
    }

    #[test]
    fn near_duplicate_pair_tops_disjoint_pair() {
        let gt = demo_gt();
        let cube = generate(&gt, &SynthSpec::new(DEFAULT_SEED)).unwrap();
        let q: Vec<Vec<u32>> = (0..SYNTH_BANDS)
            .map(|b| {
                crate::infotheory::quantize(cube.band(b).unwrap(), 64)
                    .unwrap()
                    .codes()
                    .to_vec()
            })
            .collect();
        let u_dup = symmetric_uncertainty(&q[16], &q[3]).unwrap();
        let u_disjoint = symmetric_uncertainty(&q[15], &q[17]).unwrap();
        assert!(u_dup > 0.9, "near-duplicate U = {u_dup}");
        assert!(u_disjoint < 0.2, "disjoint U = {u_disjoint}");

        // The near-duplicate pair is more redundant than any pairing of an
        // informative band with a pure-noise band.
        for informative in (0..SYNTH_BANDS).filter(|b| ![6, 8, 12].contains(b)) {
            for noise in [6, 8, 12] {
                let u = symmetric_uncertainty(&q[informative], &q[noise]).unwrap();
                assert!(
                    u < u_dup,
                    "U(band {}, noise {}) = {u} >= {u_dup}",
                    informative + 1,
                    noise + 1
                );
            }
        }
    }
}
