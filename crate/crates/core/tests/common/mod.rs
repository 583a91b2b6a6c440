#![allow(dead_code)]

use lyaplab::rng::stream;
use lyaplab::{FiniteMatrixMeasure, SquareMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0)
}

/// Gaussian matrix with condition number below `max_cond`.
pub fn random_gl(rng: &mut ChaCha8Rng, d: usize, max_cond: f64) -> SquareMatrix {
    loop {
        let e: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(g) = SquareMatrix::new(d, e) {
            if g.eccentricity() < max_cond {
                return g;
            }
        }
    }
}

/// random_gl rescaled to determinant 1 (d = 2).
pub fn random_sl2(rng: &mut ChaCha8Rng, max_cond: f64) -> SquareMatrix {
    let g = random_gl(rng, 2, max_cond);
    let mut e = g.entries().to_vec();
    if g.det() < 0.0 {
        e[0] = -e[0];
        e[2] = -e[2];
    }
    let s = g.det().abs().sqrt();
    SquareMatrix::new(2, e.iter().map(|x| x / s).collect()).unwrap()
}

pub fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_measure(rng: &mut ChaCha8Rng, d: usize, atoms: usize, max_cond: f64) -> FiniteMatrixMeasure {
    let a = (0..atoms).map(|_| random_gl(rng, d, max_cond)).collect();
    let w = random_weights(rng, atoms);
    FiniteMatrixMeasure::new(a, w).unwrap()
}
