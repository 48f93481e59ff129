//! Brute-force oracles and fixtures shared by the integration suites.
//!
//! The oracles recompute every information quantity with explicit nested
//! loops over the alphabet and never call into the library's estimation
//! path, so agreement is meaningful.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hsiband::model::GroundTruthMap;

/// Entropy in bits by scanning the alphabet symbol by symbol.
pub fn oracle_entropy(codes: &[u32], alphabet: usize) -> f64 {
    let n = codes.len() as f64;
    let mut h = 0.0;
    for sym in 0..alphabet as u32 {
        let mut count = 0usize;
        for &c in codes {
            if c == sym {
                count += 1;
            }
        }
        if count > 0 {
            let p = count as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Joint entropy in bits by scanning all symbol pairs.
pub fn oracle_joint_entropy(a: &[u32], b: &[u32], ka: usize, kb: usize) -> f64 {
    let n = a.len() as f64;
    let mut h = 0.0;
    for x in 0..ka as u32 {
        for y in 0..kb as u32 {
            let mut count = 0usize;
            for (&ai, &bi) in a.iter().zip(b) {
                if ai == x && bi == y {
                    count += 1;
                }
            }
            if count > 0 {
                let p = count as f64 / n;
                h -= p * p.log2();
            }
        }
    }
    h
}

/// Mutual information in bits straight from the defining sum
/// `sum p(a,b) log2(p(a,b) / (p(a) p(b)))`, a different algebraic route than
/// the entropy identity the library uses.
pub fn oracle_mi(a: &[u32], b: &[u32], ka: usize, kb: usize) -> f64 {
    let n = a.len() as f64;
    let mut mi = 0.0;
    for x in 0..ka as u32 {
        let mut count_x = 0usize;
        for &ai in a {
            if ai == x {
                count_x += 1;
            }
        }
        if count_x == 0 {
            continue;
        }
        for y in 0..kb as u32 {
            let mut count_y = 0usize;
            for &bi in b {
                if bi == y {
                    count_y += 1;
                }
            }
            if count_y == 0 {
                continue;
            }
            let mut count_xy = 0usize;
            for (&ai, &bi) in a.iter().zip(b) {
                if ai == x && bi == y {
                    count_xy += 1;
                }
            }
            if count_xy > 0 {
                let p_xy = count_xy as f64 / n;
                let p_x = count_x as f64 / n;
                let p_y = count_y as f64 / n;
                mi += p_xy * (p_xy / (p_x * p_y)).log2();
            }
        }
    }
    mi
}

/// Symmetric Uncertainty from the oracle quantities.
pub fn oracle_su(a: &[u32], b: &[u32], ka: usize, kb: usize) -> f64 {
    let denom = oracle_entropy(a, ka) + oracle_entropy(b, kb);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * oracle_mi(a, b, ka, kb) / denom
}

/// A random ground truth with all of `n_classes` present at least twice.
pub fn random_gt(rows: usize, cols: usize, n_classes: u16, rng: &mut ChaCha8Rng) -> GroundTruthMap {
    assert!(rows * cols > 2 * usize::from(n_classes));
    loop {
        let labels: Vec<u16> = (0..rows * cols)
            .map(|_| rng.random_range(0..=n_classes))
            .collect();
        let gt = GroundTruthMap::new(rows, cols, labels).expect("valid shape");
        let enough = (1..=n_classes).all(|c| {
            gt.labels().iter().filter(|&&l| l == c).count() >= 2
        });
        if enough {
            return gt;
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
