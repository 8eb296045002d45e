//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wassercop::{DiscreteMeasureND, Distribution1D, Empirical, Rational};

/// Empirical law with `n` atoms in `[-5, 5]` and integer weights.
pub fn empirical(seed: u64, n: usize) -> Distribution1D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let ws: Vec<Rational> = (0..n)
        .map(|_| Rational::from_integer(rng.random_range(1..=20).into()))
        .collect();
    Distribution1D::Empirical(Empirical::new(&xs, &ws).expect("valid fixture"))
}

/// Discrete measure on ℝ^d with `n` atoms and integer weights.
pub fn measure(seed: u64, n: usize, d: usize, equal_mass: bool) -> DiscreteMeasureND {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    if equal_mass {
        DiscreteMeasureND::uniform(pts).expect("valid fixture")
    } else {
        let ws = (0..n)
            .map(|_| Rational::from_integer(rng.random_range(1..=20).into()))
            .collect();
        DiscreteMeasureND::normalized(pts, ws).expect("valid fixture")
    }
}
