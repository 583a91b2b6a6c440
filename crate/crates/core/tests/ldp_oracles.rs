mod common;

use common::{random_measure, rng};
use lyaplab::ldp::{binomial_slack, PressureConfig};
use lyaplab::{
    concentration_check, estimate_pressure, estimate_top_exponent, legendre_transform, CocycleRunConfig,
    FiniteMatrixMeasure, ProjectivePoint, SquareMatrix, TwoMatrixFamily,
};

fn grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
}

#[test]
fn pressure_slope_is_the_top_exponent() {
    let mut r = rng(51);
    for case in 0..3 {
        let nu = random_measure(&mut r, 2, 3, 8.0);
        let c = estimate_pressure(&nu, &grid(-0.1, 0.1, 20), &PressureConfig::new(2000, 2000, case)).unwrap();
        let (slope, se) = c.slope_at_zero().unwrap();
        let top = estimate_top_exponent(&nu, &CocycleRunConfig::new(21_000, 32, 1000, 100 + case).unwrap()).unwrap();
        assert!((slope - top.value).abs() < 3.0 * se.hypot(top.std_error), "{slope} ± {se} vs {top:?}");
        assert!(c.convexity_violations().is_empty());
        assert_eq!(c.values[10], 0.0);
    }
}

#[test]
fn rate_function_near_the_mean_is_quadratic() {
    let nu = TwoMatrixFamily::standard().measure().unwrap();
    let c = estimate_pressure(&nu, &grid(-2.0, 2.0, 800), &PressureConfig::new(4000, 8000, 3)).unwrap();
    let n = c.n as f64;
    let sigma2 = c.rate_se.powi(2) * c.trials as f64 * n;
    let sd = (sigma2 / n).sqrt();
    let eps: Vec<f64> = [-1.0, -0.75, -0.5, 0.5, 0.75, 1.0].iter().map(|k| c.rate_mean + k * sd).collect();
    let rate = legendre_transform(&c, &eps).unwrap();
    for (e, i) in eps.iter().zip(&rate.values) {
        let q = (e - c.rate_mean).powi(2) / (2.0 * sigma2);
        assert!((i / q - 1.0).abs() < 0.2, "ε={e}: {i} vs {q}");
    }
    let wide = grid(c.rate_mean - 3.0 * sd, c.rate_mean + 3.0 * sd, 60);
    let rate = legendre_transform(&c, &wide).unwrap();
    assert!(rate.values.iter().all(|v| *v >= 0.0));
    assert!((rate.argmin - c.rate_mean).abs() <= 0.1 * sd + 1e-15);
}

#[test]
fn double_legendre_recovers_the_pressure() {
    let nu = TwoMatrixFamily::standard().measure().unwrap();
    let s = grid(-1.0, 1.0, 40);
    let c = estimate_pressure(&nu, &s, &PressureConfig::new(500, 2000, 4)).unwrap();
    let slopes: Vec<f64> = c.values.windows(2).zip(s.windows(2)).map(|(v, x)| (v[1] - v[0]) / (x[1] - x[0])).collect();
    let eps = grid(slopes[0] - 0.1, slopes[slopes.len() - 1] + 0.1, 4000);
    let back = legendre_transform(&c, &eps).unwrap().legendre(&s).unwrap();
    let step = eps[1] - eps[0];
    for (b, v) in back.iter().zip(&c.values) {
        assert!((b - v).abs() <= step, "{b} vs {v}");
    }
}

#[test]
fn concentration_examples() {
    let nu = TwoMatrixFamily::standard().measure().unwrap();
    let e1 = ProjectivePoint::axis(2, 0);
    let r = concentration_check(&nu, &e1, 0.05, 2000, 2000, 5, None).unwrap();
    assert!(r.pass, "{r:?}");
    let r = concentration_check(&nu, &e1, 4f64.ln() + 0.01, 50, 500, 6, None).unwrap();
    assert_eq!(r.exceedances, 0);
    let hyp = FiniteMatrixMeasure::dirac(SquareMatrix::diag(&[3.0, 1.0 / 3.0]).unwrap());
    let r = concentration_check(&hyp, &e1, 1e-6, 100, 10, 7, None).unwrap();
    assert_eq!(r.exceedances, 0);
    assert!(r.bound > 0.0 && r.pass);
    assert!(binomial_slack(1e-13, 1000) < 1e-7);
}
