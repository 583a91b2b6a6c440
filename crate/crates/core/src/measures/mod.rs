//! Finitely supported probability measures on GL(d,ℝ) and distances between them.

mod io;
mod irreducible;
pub mod transport;

pub use io::{parse_measure, read_measure_file, MeasureFile};
pub use irreducible::{strong_irreducibility_check_d2, Irreducibility, IrreducibilityOptions};
pub use transport::TransportSolution;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gl::{exterior_power, group_delta, SquareMatrix};

/// Tolerance on the total mass accepted by [`FiniteMatrixMeasure::new`].
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A probability measure Σ p_j δ_{A_j} on GL(d,ℝ).
///
/// Atoms with identical entries are merged. Zero-weight atoms are kept so
/// index pairing survives, but they are not part of the support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteMatrixMeasure {
    dim: usize,
    atoms: Vec<SquareMatrix>,
    weights: Vec<f64>,
}

impl FiniteMatrixMeasure {
    pub fn new(atoms: Vec<SquareMatrix>, weights: Vec<f64>) -> Result<Self> {
        Self::build(atoms, weights, false)
    }

    /// Like [`new`](Self::new) but rescales any positive weight vector to sum 1.
    pub fn normalized(atoms: Vec<SquareMatrix>, weights: Vec<f64>) -> Result<Self> {
        Self::build(atoms, weights, true)
    }

    pub fn dirac(g: SquareMatrix) -> Self {
        Self { dim: g.dim(), atoms: vec![g], weights: vec![1.0] }
    }

    /// Uniform measure on the given atoms.
    pub fn uniform(atoms: Vec<SquareMatrix>) -> Result<Self> {
        let n = atoms.len();
        Self::normalized(atoms, vec![1.0; n])
    }

    fn build(atoms: Vec<SquareMatrix>, weights: Vec<f64>, renormalize: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        let dim = atoms[0].dim();
        if let Some(a) = atoms.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimMismatch { expected: dim, found: a.dim() });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!("weight {w} is not a non-negative number")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        if !renormalize && (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
        }
        let mut merged_atoms: Vec<SquareMatrix> = Vec::with_capacity(atoms.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (a, w) in atoms.into_iter().zip(weights) {
            match merged_atoms.iter().position(|b| b.entries() == a.entries()) {
                Some(k) => merged_weights[k] += w,
                None => {
                    merged_atoms.push(a);
                    merged_weights.push(w);
                }
            }
        }
        merged_weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { dim, atoms: merged_atoms, weights: merged_weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[SquareMatrix] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = &SquareMatrix> {
        self.atoms.iter().zip(&self.weights).filter(|(_, w)| **w > 0.0).map(|(a, _)| a)
    }

    /// sup over the support of ‖g‖‖g⁻¹‖.
    pub fn eccentricity(&self) -> f64 {
        self.support().map(SquareMatrix::eccentricity).fold(1.0, f64::max)
    }

    /// D = max δ(A_i, A_j) over all listed atoms.
    pub fn delta_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                d = d.max(group_delta(a, b).expect("atoms share a dimension"));
            }
        }
        d
    }

    /// diam_θ of the support, i.e. (max δ)^θ over support pairs.
    pub fn diam_theta(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        let support: Vec<&SquareMatrix> = self.support().collect();
        let mut d: f64 = 0.0;
        for (i, a) in support.iter().enumerate() {
            for b in &support[i + 1..] {
                d = d.max(group_delta(a, b)?);
            }
        }
        Ok(d.powf(theta))
    }

    /// ∫ log|det g| dν.
    pub fn mean_log_det(&self) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(a, w)| w * a.log_abs_det()).sum()
    }

    /// Pushforward under g ↦ g⁻¹.
    pub fn inverse_pushforward(&self) -> Self {
        Self {
            dim: self.dim,
            atoms: self.atoms.iter().map(SquareMatrix::inverse).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Pushforward under g ↦ Λᵏg.
    pub fn exterior_lift(&self, k: usize) -> Result<Self> {
        let atoms = self.atoms.iter().map(|a| exterior_power(a, k)).collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: atoms[0].dim(), atoms, weights: self.weights.clone() })
    }

    /// Law of g·h with g ~ self and h ~ other independent.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut atoms = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (g, p) in self.atoms.iter().zip(&self.weights) {
            for (h, q) in other.atoms.iter().zip(&other.weights) {
                atoms.push(g.mul(h)?);
                weights.push(p * q);
            }
        }
        Self::normalized(atoms, weights)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::BadTheta(theta));
    }
    Ok(())
}

/// Row-major matrix of δ(A_i, B_j)^θ.
pub fn cost_matrix(mu: &FiniteMatrixMeasure, nu: &FiniteMatrixMeasure, theta: f64) -> Result<Vec<f64>> {
    check_dim(mu.dim, nu.dim)?;
    check_theta(theta)?;
    let mut cost = Vec::with_capacity(mu.len() * nu.len());
    for a in &mu.atoms {
        for b in &nu.atoms {
            cost.push(group_delta(a, b)?.powf(theta));
        }
    }
    Ok(cost)
}

/// Optimal coupling for the cost δ^θ, with its dual certificate.
pub fn optimal_coupling(
    mu: &FiniteMatrixMeasure,
    nu: &FiniteMatrixMeasure,
    theta: f64,
) -> Result<TransportSolution> {
    let cost = cost_matrix(mu, nu, theta)?;
    transport::solve(&mu.weights, &nu.weights, &cost)
}

/// W_θ(μ, ν) = min over couplings of ∫ δ(g, h)^θ.
pub fn wasserstein_theta(mu: &FiniteMatrixMeasure, nu: &FiniteMatrixMeasure, theta: f64) -> Result<f64> {
    Ok(optimal_coupling(mu, nu, theta)?.value.max(0.0))
}

/// Hausdorff distance between the supports under δ.
pub fn hausdorff_distance(mu: &FiniteMatrixMeasure, nu: &FiniteMatrixMeasure) -> Result<f64> {
    check_dim(mu.dim, nu.dim)?;
    let a: Vec<&SquareMatrix> = mu.support().collect();
    let b: Vec<&SquareMatrix> = nu.support().collect();
    let directed = |x: &[&SquareMatrix], y: &[&SquareMatrix]| -> f64 {
        x.iter()
            .map(|g| {
                y.iter()
                    .map(|h| group_delta(g, h).expect("dims checked"))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(&a, &b).max(directed(&b, &a)))
}

/// W_θ plus the Hausdorff distance of the supports.
pub fn support_topology_distance(mu: &FiniteMatrixMeasure, nu: &FiniteMatrixMeasure, theta: f64) -> Result<f64> {
    Ok(wasserstein_theta(mu, nu, theta)? + hausdorff_distance(mu, nu)?)
}

/// Σ_j (D^θ |p_j − p'_j| + p'_j δ(A_j, A'_j)^θ) for index-paired measures,
/// with D the δ-diameter of μ's atoms.
pub fn finite_support_upper_bound(mu: &FiniteMatrixMeasure, nu: &FiniteMatrixMeasure, theta: f64) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::IndexMismatch(mu.len(), nu.len()));
    }
    check_dim(mu.dim, nu.dim)?;
    check_theta(theta)?;
    let d_theta = mu.delta_diameter().powf(theta);
    let mut total = 0.0;
    for j in 0..mu.len() {
        total += d_theta * (mu.weights[j] - nu.weights[j]).abs()
            + nu.weights[j] * group_delta(&mu.atoms[j], &nu.atoms[j])?.powf(theta);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn a() -> SquareMatrix {
        SquareMatrix::diag(&[2.0, 0.5]).unwrap()
    }
    fn b() -> SquareMatrix {
        SquareMatrix::rotation(FRAC_PI_3)
    }
    fn c() -> SquareMatrix {
        SquareMatrix::new(2, vec![1.0, 1.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn construction_merges_and_validates() {
        let m = FiniteMatrixMeasure::new(vec![a(), b(), a()], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        assert!(FiniteMatrixMeasure::new(vec![a(), b()], vec![0.5, 0.6]).is_err());
        assert!(FiniteMatrixMeasure::new(vec![a(), b()], vec![-0.5, 1.5]).is_err());
        assert!(FiniteMatrixMeasure::new(vec![a(), SquareMatrix::identity(3)], vec![0.5, 0.5]).is_err());
        let r = FiniteMatrixMeasure::normalized(vec![a(), b()], vec![1.0, 3.0]).unwrap();
        assert_eq!(r.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn wasserstein_examples() {
        let mu = FiniteMatrixMeasure::new(vec![a(), b(), c()], vec![0.2, 0.3, 0.5]).unwrap();
        for theta in [0.25, 0.5, 1.0] {
            assert!(wasserstein_theta(&mu, &mu, theta).unwrap().abs() < 1e-15);
            let da = FiniteMatrixMeasure::dirac(a());
            let db = FiniteMatrixMeasure::dirac(b());
            let expected = group_delta(&a(), &b()).unwrap().powf(theta);
            assert!((wasserstein_theta(&da, &db, theta).unwrap() - expected).abs() < 1e-14);
            assert!((support_topology_distance(&da, &db, theta).unwrap()
                - (expected + group_delta(&a(), &b()).unwrap()))
            .abs()
                < 1e-14);
        }
        assert!(matches!(wasserstein_theta(&mu, &mu, 0.0), Err(Error::BadTheta(_))));
        assert!(matches!(wasserstein_theta(&mu, &mu, 1.5), Err(Error::BadTheta(_))));
    }

    #[test]
    fn wasserstein_symmetric() {
        let mu = FiniteMatrixMeasure::new(vec![a(), b()], vec![0.3, 0.7]).unwrap();
        let nu = FiniteMatrixMeasure::new(vec![c(), b(), a()], vec![0.2, 0.2, 0.6]).unwrap();
        let x = wasserstein_theta(&mu, &nu, 0.5).unwrap();
        let y = wasserstein_theta(&nu, &mu, 0.5).unwrap();
        assert!((x - y).abs() < 1e-12);
        assert!(x > 0.0);
    }

    #[test]
    fn hausdorff_examples() {
        let mu = FiniteMatrixMeasure::new(vec![a(), b()], vec![0.5, 0.5]).unwrap();
        assert_eq!(hausdorff_distance(&mu, &mu).unwrap(), 0.0);
        let da = FiniteMatrixMeasure::dirac(a());
        let db = FiniteMatrixMeasure::dirac(b());
        let d = group_delta(&a(), &b()).unwrap();
        assert_eq!(hausdorff_distance(&da, &db).unwrap(), d);
        assert_eq!(hausdorff_distance(&da, &mu).unwrap(), d);
        // zero-weight atoms are not part of the support
        let z = FiniteMatrixMeasure::new(vec![a(), b()], vec![1.0, 0.0]).unwrap();
        assert_eq!(hausdorff_distance(&da, &z).unwrap(), 0.0);
    }

    #[test]
    fn shared_support_distance_is_wasserstein() {
        let mu = FiniteMatrixMeasure::new(vec![a(), b()], vec![0.3, 0.7]).unwrap();
        let nu = FiniteMatrixMeasure::new(vec![a(), b()], vec![0.6, 0.4]).unwrap();
        let w = wasserstein_theta(&mu, &nu, 0.5).unwrap();
        assert_eq!(support_topology_distance(&mu, &nu, 0.5).unwrap(), w);
        assert!((w - 0.3 * group_delta(&a(), &b()).unwrap().sqrt()).abs() < 1e-14);
    }

    #[test]
    fn finite_support_bound_examples() {
        let mu = FiniteMatrixMeasure::new(vec![a(), b()], vec![0.3, 0.7]).unwrap();
        assert_eq!(finite_support_upper_bound(&mu, &mu, 0.5).unwrap(), 0.0);
        let nu = FiniteMatrixMeasure::new(vec![a(), b()], vec![0.6, 0.4]).unwrap();
        let d = group_delta(&a(), &b()).unwrap().sqrt();
        let bound = finite_support_upper_bound(&mu, &nu, 0.5).unwrap();
        assert!((bound - 2.0 * d * 0.3).abs() < 1e-14);
        assert!(bound >= wasserstein_theta(&mu, &nu, 0.5).unwrap());
        let three = FiniteMatrixMeasure::uniform(vec![a(), b(), c()]).unwrap();
        assert!(matches!(finite_support_upper_bound(&mu, &three, 0.5), Err(Error::IndexMismatch(2, 3))));
    }

    #[test]
    fn lifts_and_pushforwards() {
        let mu = FiniteMatrixMeasure::new(vec![a(), c()], vec![0.5, 0.5]).unwrap();
        let inv = mu.inverse_pushforward();
        assert!(inv.atoms()[0].max_abs_diff(&SquareMatrix::diag(&[0.5, 2.0]).unwrap()) < 1e-15);
        let top = mu.exterior_lift(2).unwrap();
        assert_eq!(top.dim(), 1);
        assert!((mu.mean_log_det()).abs() < 1e-15);
        let conv = mu.convolve(&mu).unwrap();
        assert_eq!(conv.len(), 4);
        assert!((conv.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((mu.eccentricity() - 4.0).abs() < 1e-12);
    }
}
