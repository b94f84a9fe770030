//! Seeded Poisson sampling.
//!
//! The generator is ChaCha8 (`rand_chacha`), seeded with `seed_from_u64(seed)`
//! and switched to stream `index` for the index-th sample point. ChaCha output
//! is fixed by its specification, so counts are identical across platforms
//! and thread schedules.
//!
//! Means below [`NORMAL_APPROX_THRESHOLD`] are sampled by sequential
//! inversion of the CDF from one uniform draw. Larger means use
//! ⌊λ + √λ·z + ½⌋ with z standard normal, clamped at zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const NORMAL_APPROX_THRESHOLD: f64 = 30.0;

/// Generator for sample point `index` of a run seeded with `seed`.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean.is_nan() || mean <= 0.0 {
        return 0;
    }
    if mean < NORMAL_APPROX_THRESHOLD {
        let u: f64 = rng.gen();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        // the tail beyond 1000 is far below f64 resolution for mean < 30
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    } else {
        let z: f64 = rng.sample(StandardNormal);
        (mean + mean.sqrt() * z + 0.5).floor().max(0.0) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(mean: f64, n: usize) -> (f64, f64) {
        let mut rng = point_rng(11, 0);
        let xs: Vec<f64> = (0..n).map(|_| poisson_sample(mean, &mut rng) as f64).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, v)
    }

    #[test]
    fn zero_mean_gives_zero() {
        let mut rng = point_rng(0, 0);
        assert_eq!(poisson_sample(0.0, &mut rng), 0);
        assert_eq!(poisson_sample(-1e-13, &mut rng), 0);
    }

    #[test]
    fn small_mean_moments() {
        let (m, v) = moments(3.5, 20_000);
        // standard errors: √(λ/n) ≈ 0.013 for the mean
        assert!((m - 3.5).abs() < 0.07, "mean {m}");
        assert!((v - 3.5).abs() < 0.25, "variance {v}");
    }

    #[test]
    fn large_mean_moments() {
        let (m, v) = moments(400.0, 20_000);
        assert!((m - 400.0).abs() < 1.0, "mean {m}");
        assert!((v - 400.0).abs() < 25.0, "variance {v}");
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: Vec<u64> = (0..8).map(|i| poisson_sample(50.0, &mut point_rng(5, i))).collect();
        let b: Vec<u64> = (0..8)
            .rev()
            .map(|i| poisson_sample(50.0, &mut point_rng(5, i)))
            .collect();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
    }
}
