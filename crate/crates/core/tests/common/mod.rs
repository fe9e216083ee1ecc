//! Test oracles and synthetic data shared by the integration targets.
#![allow(dead_code)]

use dpfair::{FairError, GroupedScores};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, Normal};

/// Minimum over all `n!` pairings of `(1/n) Σ (a_i − b_σ(i))²`, by enumeration
/// with Heap's algorithm. Independent of any sorting argument.
pub fn brute_force_w2_squared(a: &[f64], b: &[f64]) -> Result<f64, FairError> {
    if a.len() != b.len() {
        return Err(FairError::SizeMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len();
    if n == 0 {
        return Err(FairError::EmptySample);
    }
    let cost = |perm: &[usize]| -> f64 { perm.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).powi(2)).sum::<f64>() };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best / n as f64)
}

pub fn normal_sample(mean: f64, std: f64, n: usize, seed: u64) -> Vec<f64> {
    let d = Normal::new(mean, std).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

pub fn gumbel_sample(location: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
    let d = Gumbel::new(location, scale).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

/// Two groups, `A ~ N(0, 1)` and `B ~ N(1, 1.5²)`, `n` rows each, interleaved.
pub fn two_gaussians(n: usize, seed: u64) -> GroupedScores {
    let a = normal_sample(0.0, 1.0, n, seed.wrapping_mul(2).wrapping_add(1));
    let b = normal_sample(1.0, 1.5, n, seed.wrapping_mul(2).wrapping_add(2));
    let mut scores = Vec::with_capacity(2 * n);
    let mut groups = Vec::with_capacity(2 * n);
    for (x, y) in a.into_iter().zip(b) {
        scores.push(x);
        groups.push("A".to_string());
        scores.push(y);
        groups.push("B".to_string());
    }
    GroupedScores::new(scores, groups).unwrap()
}

/// Mean and standard deviation of the W₂ barycenter of `N(0,1)` and `N(1,1.5²)`
/// with equal weights: both parameters average linearly.
pub const BARYCENTER_OF_TWO_GAUSSIANS: (f64, f64) = (0.5, 1.25);

pub fn toy() -> GroupedScores {
    GroupedScores::from_pairs([(0.0, "A"), (2.0, "A"), (1.0, "B"), (3.0, "B")]).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

#[test]
fn brute_force_examples() {
    assert!((brute_force_w2_squared(&[0.0, 1.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(brute_force_w2_squared(&[5.0], &[5.0]).unwrap(), 0.0);
    assert_eq!(brute_force_w2_squared(&[0.0, 10.0], &[10.0, 0.0]).unwrap(), 0.0);
    // Crossing pairs cost more: (0-3)² + (1-2)² vs (0-2)² + (1-3)².
    assert!((brute_force_w2_squared(&[0.0, 1.0], &[3.0, 2.0]).unwrap() - 4.0).abs() < 1e-15);
    assert!(matches!(brute_force_w2_squared(&[0.0], &[1.0, 2.0]), Err(FairError::SizeMismatch { .. })));
}
