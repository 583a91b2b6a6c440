//! The one-dimensional Anderson model (Hψ)ₙ = ψₙ₊₁ + ψₙ₋₁ + Vₙψₙ with
//! i.i.d. potential: transfer cocycles, Lyapunov exponent curves, the
//! integrated density of states on Dirichlet boxes, its Cauchy smoothing
//! and the Thouless formula.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{estimate_top_exponent, CocycleEstimate, CocycleRunConfig};
use crate::constants::Regime;
use crate::error::{Error, Result};
use crate::gl::SquareMatrix;
use crate::measures::{check_theta, FiniteMatrixMeasure};
use crate::rng::{derive_seed, stream};

pub const DEFAULT_BOX_SIZE: usize = 2000;
pub const DEFAULT_REALIZATIONS: usize = 20;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const MIN_BOX_SIZE: usize = 10;
const PIVOT_FLOOR: f64 = 1e-300;
const TAG_SAMPLES: u64 = 0x5A;
const TAG_ENERGY: u64 = 0xE0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisorderDistribution {
    FiniteAtoms { values: Vec<f64>, weights: Vec<f64> },
    Uniform { a: f64, b: f64 },
    TruncatedGaussian { mean: f64, sd: f64, a: f64, b: f64 },
}

impl DisorderDistribution {
    pub fn finite_atoms(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = Self::FiniteAtoms { values, weights };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let d = Self::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn truncated_gaussian(mean: f64, sd: f64, a: f64, b: f64) -> Result<Self> {
        let d = Self::TruncatedGaussian { mean, sd, a, b };
        d.validate()?;
        Ok(d)
    }

    /// δ₀, the free operator.
    pub fn free() -> Self {
        Self::FiniteAtoms { values: vec![0.0], weights: vec![1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match self {
            Self::FiniteAtoms { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return bad(format!("{} values with {} weights", values.len(), weights.len()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("potential values must be finite".into());
                }
                if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || weights.iter().sum::<f64>() <= 0.0 {
                    return bad("weights must be non-negative with positive sum".into());
                }
            }
            Self::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("uniform support needs a < b, got [{a}, {b}]"));
                }
            }
            Self::TruncatedGaussian { mean, sd, a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("truncation needs a < b, got [{a}, {b}]"));
                }
                if !(*sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
                    return bad(format!("need finite mean and sd > 0, got {mean}, {sd}"));
                }
            }
        }
        Ok(())
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::FiniteAtoms { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(_, w)| **w > 0.0)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| (lo.min(*v), hi.max(*v))),
            Self::Uniform { a, b } | Self::TruncatedGaussian { a, b, .. } => (*a, *b),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match self {
            Self::FiniteAtoms { values, weights } => {
                Sampler::Atoms(values.clone(), WeightedIndex::new(weights).map_err(|e| Error::InvalidInput(e.to_string()))?)
            }
            Self::Uniform { a, b } => Sampler::Uniform(*a, *b),
            Self::TruncatedGaussian { mean, sd, a, b } => {
                let normal = Normal::new(*mean, *sd).map_err(|e| Error::InvalidInput(e.to_string()))?;
                let use_normal = *mean >= *a && *mean <= *b && b - a >= *sd;
                let nearest = mean.clamp(*a, *b);
                Sampler::Gaussian { normal, a: *a, b: *b, use_normal, nearest }
            }
        })
    }
}

pub enum Sampler {
    Atoms(Vec<f64>, WeightedIndex<f64>),
    Uniform(f64, f64),
    Gaussian { normal: Normal<f64>, a: f64, b: f64, use_normal: bool, nearest: f64 },
}

impl Sampler {
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Atoms(v, w) => v[w.sample(rng)],
            Self::Uniform(a, b) => rng.random_range(*a..*b),
            Self::Gaussian { normal, a, b, use_normal, nearest } => loop {
                if *use_normal {
                    let x = normal.sample(rng);
                    if x >= *a && x <= *b {
                        return x;
                    }
                } else {
                    let x = rng.random_range(*a..*b);
                    let (m, s) = (normal.mean(), normal.std_dev());
                    let log_ratio = ((nearest - m).powi(2) - (x - m).powi(2)) / (2.0 * s * s);
                    if rng.random::<f64>() < log_ratio.exp() {
                        return x;
                    }
                }
            },
        }
    }
}

/// T(E, V) = [[E − V, −1], [1, 0]].
pub fn transfer_matrix(energy: f64, v: f64) -> Result<SquareMatrix> {
    SquareMatrix::new(2, vec![energy - v, -1.0, 1.0, 0.0])
}

/// Exact pushforward for finite atoms; otherwise the empirical measure of
/// `samples` draws.
pub fn transfer_cocycle_measure(
    mu: &DisorderDistribution,
    energy: f64,
    samples: usize,
    seed: u64,
) -> Result<FiniteMatrixMeasure> {
    mu.validate()?;
    match mu {
        DisorderDistribution::FiniteAtoms { values, weights } => FiniteMatrixMeasure::normalized(
            values.iter().map(|v| transfer_matrix(energy, *v)).collect::<Result<_>>()?,
            weights.clone(),
        ),
        _ => {
            if samples == 0 {
                return Err(Error::BadConfig("continuous disorder needs samples ≥ 1".into()));
            }
            let sampler = mu.sampler()?;
            let mut rng = stream(derive_seed(seed, TAG_SAMPLES), 0);
            let atoms = (0..samples).map(|_| transfer_matrix(energy, sampler.draw(&mut rng))).collect::<Result<_>>()?;
            FiniteMatrixMeasure::uniform(atoms)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub energy: f64,
    /// max(estimate, 0).
    pub gamma: f64,
    pub estimate: CocycleEstimate,
    /// The raw estimate was negative.
    pub clamped: bool,
}

/// γ̂(E) at each energy. Energy k runs on seed `derive_seed(cfg.seed, k)`.
pub fn lyapunov_energy_curve(
    mu: &DisorderDistribution,
    energies: &[f64],
    cfg: &CocycleRunConfig,
    samples: usize,
) -> Result<Vec<EnergyPoint>> {
    cfg.validate()?;
    energies
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let seed = derive_seed(cfg.seed, TAG_ENERGY ^ k as u64);
            let nu = transfer_cocycle_measure(mu, e, samples, seed)?;
            let estimate = estimate_top_exponent(&nu, &cfg.clone().with_seed(seed))?;
            Ok(EnergyPoint { energy: e, gamma: estimate.value.max(0.0), clamped: estimate.value < 0.0, estimate })
        })
        .collect()
}

/// Number of eigenvalues ≤ E of the Jacobi matrix with diagonal `v` and
/// unit off-diagonals.
pub fn sturm_count(v: &[f64], energy: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, vi) in v.iter().enumerate() {
        q = (vi - energy) - if i == 0 { 0.0 } else { 1.0 / q };
        if q == 0.0 {
            q = -PIVOT_FLOOR;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdsCurve {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-realization counting functions, same grid.
    pub realization_values: Vec<Vec<f64>>,
    pub box_size: usize,
    pub realizations: usize,
    pub seed: u64,
}

fn check_energies(energies: &[f64]) -> Result<()> {
    if energies.len() < 2 || energies.iter().any(|e| !e.is_finite()) || energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadGrid("energy grid needs at least two strictly increasing finite points".into()));
    }
    Ok(())
}

/// Eigenvalue counting on [−L, L] with Dirichlet ends. Realization r draws
/// its potential from `stream(seed, r)` and is reused across all energies.
pub fn ids_curve(
    mu: &DisorderDistribution,
    energies: &[f64],
    box_size: usize,
    realizations: usize,
    seed: u64,
) -> Result<IdsCurve> {
    check_energies(energies)?;
    if box_size < MIN_BOX_SIZE {
        return Err(Error::BadOrder(format!("box size L must be at least {MIN_BOX_SIZE}, got {box_size}")));
    }
    if realizations == 0 {
        return Err(Error::BadConfig("realizations must be at least 1".into()));
    }
    let sampler = mu.sampler()?;
    let sites = 2 * box_size + 1;
    let realization_values: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let v: Vec<f64> = (0..sites).map(|_| sampler.draw(&mut rng)).collect();
            energies.iter().map(|&e| sturm_count(&v, e) as f64 / sites as f64).collect()
        })
        .collect();
    let values = (0..energies.len())
        .map(|k| realization_values.iter().map(|r| r[k]).sum::<f64>() / realizations as f64)
        .collect();
    Ok(IdsCurve { energies: energies.to_vec(), values, realization_values, box_size, realizations, seed })
}

/// Dirichlet-box count for the free operator: #{k : 2cos(πk/(N+1)) ≤ E}/N, N = 2L + 1.
pub fn free_box_ids(box_size: usize, energy: f64) -> f64 {
    let n = 2 * box_size + 1;
    let c = (1..=n)
        .filter(|&k| 2.0 * (std::f64::consts::PI * k as f64 / (n + 1) as f64).cos() <= energy)
        .count();
    c as f64 / n as f64
}

/// (1/π) arccos(−E/2), clamped to [0, 1].
pub fn free_ids(energy: f64) -> f64 {
    (-energy / 2.0).clamp(-1.0, 1.0).acos() / std::f64::consts::PI
}

/// ∫ N(E') η/(π((E − E')² + η²)) dE' with N linear between grid points and
/// constant beyond the ends.
fn cauchy_integral(energies: &[f64], values: &[f64], eta: f64, energy: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let at = |x: f64| ((x - energy) / eta).atan() / pi;
    let lg = |x: f64| eta / (2.0 * pi) * ((x - energy).powi(2) + eta * eta).ln();
    let (first, last) = (energies[0], energies[energies.len() - 1]);
    let mut total = values[0] * (at(first) + 0.5) + values[values.len() - 1] * (0.5 - at(last));
    for k in 0..energies.len() - 1 {
        let (a, b) = (energies[k], energies[k + 1]);
        let s = (values[k + 1] - values[k]) / (b - a);
        total += (values[k] + s * (energy - a)) * (at(b) - at(a)) + s * (lg(b) - lg(a));
    }
    total
}

/// Cauchy smoothing N_η(E). E must sit at least 10η inside the grid.
pub fn smoothed_ids(curve: &IdsCurve, eta: f64, energy: f64) -> Result<f64> {
    check_energies(&curve.energies)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidInput(format!("η must be positive, got {eta}")));
    }
    let (first, last) = (curve.energies[0], curve.energies[curve.energies.len() - 1]);
    if !(energy >= first + 10.0 * eta && energy <= last - 10.0 * eta) {
        return Err(Error::BadWindow(format!(
            "E = {energy} must lie in [{}, {}] for η = {eta}",
            first + 10.0 * eta,
            last - 10.0 * eta
        )));
    }
    Ok(cauchy_integral(&curve.energies, &curve.values, eta, energy))
}

/// ∫ log|E − E'| dN(E') for N linear between grid points, integrated exactly.
pub fn thouless_integral(energies: &[f64], values: &[f64], energy: f64) -> f64 {
    let f = |y: f64| if y == 0.0 { 0.0 } else { y * y.abs().ln() - y };
    energies
        .windows(2)
        .zip(values.windows(2))
        .map(|(e, n)| {
            let s = (n[1] - n[0]) / (e[1] - e[0]);
            if s == 0.0 {
                0.0
            } else {
                s * (f(e[1] - energy) - f(e[0] - energy))
            }
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThoulessReport {
    pub energy: f64,
    pub gamma_direct: CocycleEstimate,
    pub gamma_thouless: f64,
    /// Realization-to-realization standard error of the Thouless integral.
    pub thouless_se: f64,
    /// Change in the Thouless integral when every other grid point is dropped.
    pub discretization: f64,
    pub residual: f64,
}

impl ThoulessReport {
    /// |residual| < 3·(combined se + discretization).
    pub fn consistent(&self) -> bool {
        self.residual.abs() < 3.0 * (self.gamma_direct.std_error.hypot(self.thouless_se) + self.discretization)
    }
}

/// Compares γ̂(E) from the cocycle with ∫ log|E − E'| dN(E'). The IDS grid
/// must cover the spectrum, i.e. N = 0 at its first point and 1 at its last.
pub fn thouless_check(
    mu: &DisorderDistribution,
    energy: f64,
    cfg: &CocycleRunConfig,
    samples: usize,
    ids: &IdsCurve,
) -> Result<ThoulessReport> {
    check_energies(&ids.energies)?;
    if ids.values[0] != 0.0 || ids.values[ids.values.len() - 1] != 1.0 {
        return Err(Error::BadWindow("the IDS grid must start below and end above the spectrum".into()));
    }
    if !energy.is_finite() {
        return Err(Error::BadWindow(format!("energy must be finite, got {energy}")));
    }
    let nu = transfer_cocycle_measure(mu, energy, samples, cfg.seed)?;
    let gamma_direct = estimate_top_exponent(&nu, cfg)?;
    let gamma_thouless = thouless_integral(&ids.energies, &ids.values, energy);
    let per: Vec<f64> = ids.realization_values.iter().map(|r| thouless_integral(&ids.energies, r, energy)).collect();
    let thouless_se = if per.len() > 1 {
        let m = per.iter().sum::<f64>() / per.len() as f64;
        (per.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (per.len() - 1) as f64 / per.len() as f64).sqrt()
    } else {
        0.0
    };
    let keep: Vec<usize> = (0..ids.energies.len()).filter(|k| k % 2 == 0 || *k == ids.energies.len() - 1).collect();
    let coarse_e: Vec<f64> = keep.iter().map(|&k| ids.energies[k]).collect();
    let coarse_n: Vec<f64> = keep.iter().map(|&k| ids.values[k]).collect();
    let discretization = (thouless_integral(&coarse_e, &coarse_n, energy) - gamma_thouless).abs();
    Ok(ThoulessReport {
        energy,
        residual: gamma_direct.value - gamma_thouless,
        gamma_direct,
        gamma_thouless,
        thouless_se,
        discretization,
    })
}

/// θ/(3(2 + θ)) under MH, θ/(24(1 + θ)) in the perpetuity regime.
pub fn ids_exponent(theta: f64, regime: Regime) -> Result<f64> {
    check_theta(theta)?;
    Ok(match regime {
        Regime::Mh => theta / (3.0 * (2.0 + theta)),
        Regime::Perpetuity => theta / (24.0 * (1.0 + theta)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, k: usize) -> Vec<f64> {
        (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect()
    }

    #[test]
    fn transfer_atoms() {
        let nu = transfer_cocycle_measure(&DisorderDistribution::free(), 0.0, 1, 0).unwrap();
        assert_eq!(nu.atoms()[0].entries(), &[0.0, -1.0, 1.0, 0.0]);
        let mu = DisorderDistribution::uniform(-1.0, 1.0).unwrap();
        let nu = transfer_cocycle_measure(&mu, 0.0, 10_000, 3).unwrap();
        let mut mean = 0.0;
        for (a, w) in nu.atoms().iter().zip(nu.weights()) {
            let e = a.entries();
            assert_eq!(e[0] * e[3] - e[1] * e[2], 1.0);
            mean += w * e[0];
        }
        assert!(mean.abs() < 3.0 / 100.0, "{mean}");
    }

    #[test]
    fn free_lyapunov() {
        let cfg = CocycleRunConfig::new(2000, 2, 500, 1).unwrap();
        let pts = lyapunov_energy_curve(&DisorderDistribution::free(), &[0.0, 3.0], &cfg, 1).unwrap();
        assert!(pts[0].gamma.abs() < 1e-12);
        assert!((pts[1].gamma - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-10);
    }

    #[test]
    fn sturm_counts() {
        assert_eq!(sturm_count(&[0.0; 5], -3.0), 0);
        assert_eq!(sturm_count(&[0.0; 5], 3.0), 5);
        // eigenvalues of the 3×3 free box: −√2, 0, √2
        assert_eq!(sturm_count(&[0.0; 3], -1.0), 1);
        assert_eq!(sturm_count(&[0.0; 3], 1.0), 2);
        assert_eq!(sturm_count(&[0.0; 3], 0.0), 2);
    }

    #[test]
    fn free_ids_curve() {
        let e = grid(-2.5, 2.5, 40);
        let c = ids_curve(&DisorderDistribution::free(), &e, 200, 2, 1).unwrap();
        for (k, &x) in e.iter().enumerate() {
            assert!((c.values[k] - free_box_ids(200, x)).abs() <= 1.0 / 401.0 + 1e-15);
            assert!((c.values[k] - free_ids(x)).abs() < 2.0 / 401.0 + 1e-9, "{x}");
        }
        assert_eq!(c.values[0], 0.0);
        assert_eq!(c.values[40], 1.0);
        assert!(c.values.windows(2).all(|w| w[1] >= w[0]));
        assert!(matches!(ids_curve(&DisorderDistribution::free(), &e, 9, 1, 1), Err(Error::BadOrder(_))));
    }

    #[test]
    fn smoothing() {
        let e = grid(-3.0, 3.0, 60);
        let flat = IdsCurve {
            energies: e.clone(),
            values: vec![0.3; 61],
            realization_values: vec![],
            box_size: 10,
            realizations: 1,
            seed: 0,
        };
        assert!((smoothed_ids(&flat, 0.1, 0.4).unwrap() - 0.3).abs() < 1e-14);
        assert!(matches!(smoothed_ids(&flat, 0.1, 2.5), Err(Error::BadWindow(_))));
        let c = ids_curve(&DisorderDistribution::free(), &grid(-3.0, 3.0, 240), 500, 1, 1).unwrap();
        assert!((smoothed_ids(&c, 0.05, 0.0).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn ids_exponents() {
        assert!((ids_exponent(1.0, Regime::Mh).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((ids_exponent(0.5, Regime::Mh).unwrap() - 1.0 / 15.0).abs() < 1e-15);
        for k in 1..=10 {
            let t = k as f64 / 10.0;
            assert!(ids_exponent(t, Regime::Mh).unwrap() > ids_exponent(t, Regime::Perpetuity).unwrap());
        }
        assert!(matches!(ids_exponent(0.0, Regime::Mh), Err(Error::BadTheta(_))));
    }

    #[test]
    fn gaussian_draws_stay_in_window() {
        for d in [
            DisorderDistribution::truncated_gaussian(0.0, 1.0, -1.0, 1.0).unwrap(),
            DisorderDistribution::truncated_gaussian(5.0, 0.5, -1.0, 1.0).unwrap(),
        ] {
            let s = d.sampler().unwrap();
            let mut rng = stream(4, 0);
            for _ in 0..1000 {
                let x = s.draw(&mut rng);
                assert!((-1.0..=1.0).contains(&x));
            }
        }
    }
}
