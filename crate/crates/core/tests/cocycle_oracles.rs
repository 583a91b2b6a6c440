mod common;

use common::{random_gl, random_sl2, random_weights, rng};
use lyaplab::cocycle::furstenberg_khasminskii_exponents;
use lyaplab::{
    chain_spectral_gap, estimate_bottom_exponent, estimate_markov_exponents, estimate_top_exponent,
    sample_stationary_measure, CocycleRunConfig, FiniteMatrixMeasure, MarkovCocycle, SquareMatrix, TwoMatrixFamily,
};
use rand::Rng;

#[test]
fn determinant_sum_identity() {
    let mut r = rng(41);
    let cfg = CocycleRunConfig::new(21_000, 16, 1000, 7).unwrap();
    let mut hits = 0;
    for case in 0..12 {
        let k = r.random_range(1..=3);
        let atoms: Vec<SquareMatrix> =
            (0..k).map(|_| if case % 2 == 0 { random_sl2(&mut r, 10.0) } else { random_gl(&mut r, 2, 10.0) }).collect();
        let nu = FiniteMatrixMeasure::new(atoms, random_weights(&mut r, k)).unwrap();
        let top = estimate_top_exponent(&nu, &cfg.clone().with_seed(case)).unwrap();
        let bottom = estimate_bottom_exponent(&nu, &cfg.clone().with_seed(case)).unwrap();
        let s = top.value + bottom.value;
        let se = top.std_error.hypot(bottom.std_error);
        if (s - nu.mean_log_det()).abs() <= 3.0 * se {
            hits += 1;
        }
    }
    assert!(hits >= 11, "{hits}/12");
}

#[test]
fn rotation_stationary_measure_is_uniform() {
    let nu = FiniteMatrixMeasure::dirac(SquareMatrix::rotation(1.0));
    let cfg = CocycleRunConfig::new(1100, 8, 100, 3).unwrap();
    let eta = sample_stationary_measure(&nu, &cfg).unwrap();
    let mut angles: Vec<f64> =
        eta.samples().map(|v| v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI) / std::f64::consts::PI).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len() as f64;
    let ks = angles
        .iter()
        .enumerate()
        .map(|(i, x)| ((i + 1) as f64 / n - x).abs().max((x - i as f64 / n).abs()))
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov distribution
    assert!(ks < 1.63 / n.sqrt(), "{ks}");
}

#[test]
fn furstenberg_khasminskii_agrees_with_growth_rate() {
    let nu = TwoMatrixFamily::standard().measure().unwrap();
    let cfg = CocycleRunConfig::new(5_000, 16, 500, 8).unwrap();
    let (top, bottom) = furstenberg_khasminskii_exponents(&nu, &cfg).unwrap();
    let direct = estimate_top_exponent(&nu, &CocycleRunConfig::new(51_000, 16, 1000, 9).unwrap()).unwrap();
    assert!((top - direct.value).abs() < 0.01, "{top} {direct:?}");
    assert!((top + bottom).abs() < 0.01, "{top} {bottom}");
}

#[test]
fn rank_one_chain_reduces_to_iid() {
    let mut r = rng(42);
    let fibers: Vec<SquareMatrix> = (0..3).map(|_| random_gl(&mut r, 2, 10.0)).collect();
    let pi = [0.2, 0.5, 0.3];
    let p: Vec<Vec<f64>> = (0..3).map(|_| pi.to_vec()).collect();
    let mc = MarkovCocycle::new(&p, fibers.clone()).unwrap();
    let cfg = CocycleRunConfig::new(41_000, 16, 1000, 10).unwrap();
    let (top, _) = estimate_markov_exponents(&mc, &cfg).unwrap();
    let iid = FiniteMatrixMeasure::new(fibers, pi.to_vec()).unwrap();
    let direct = estimate_top_exponent(&iid, &cfg.clone().with_seed(11)).unwrap();
    assert!((top.value - direct.value).abs() < 3.0 * top.std_error.hypot(direct.std_error));
    for q in [0.1, 0.25, 0.5] {
        let g = chain_spectral_gap(&[vec![1.0 - q, q], vec![q, 1.0 - q]]).unwrap();
        assert!((g - (1.0f64 - 2.0 * q).abs()).abs() < 1e-12);
    }
}
