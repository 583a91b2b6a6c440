//! The planar two-matrix family ν_p = p·δ_{A₀} + (1−p)·δ_{A₁} with
//! A₀ = diag(a, 1/a) and A₁ = R_ψ A₀ R_{−ψ}.

use crate::error::{Error, Result};
use crate::gl::SquareMatrix;
use crate::measures::FiniteMatrixMeasure;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TwoMatrixFamily {
    pub a: f64,
    pub psi: f64,
    pub p: f64,
}

impl TwoMatrixFamily {
    /// a = 2, ψ = π/3, p = 1/2.
    pub fn standard() -> Self {
        Self { a: 2.0, psi: std::f64::consts::FRAC_PI_3, p: 0.5 }
    }

    pub fn a0(&self) -> Result<SquareMatrix> {
        SquareMatrix::diag(&[self.a, 1.0 / self.a])
    }

    pub fn a1(&self) -> Result<SquareMatrix> {
        let r = SquareMatrix::rotation(self.psi);
        r.mul(&self.a0()?)?.mul(&r.inverse())
    }

    pub fn measure(&self) -> Result<FiniteMatrixMeasure> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidInput(format!("a must be positive, got {}", self.a)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidInput(format!("p must lie in [0, 1], got {}", self.p)));
        }
        FiniteMatrixMeasure::new(vec![self.a0()?, self.a1()?], vec![self.p, 1.0 - self.p])
    }

    /// ecc(ν_p) = a² for a ≥ 1.
    pub fn eccentricity(&self) -> f64 {
        let a = self.a.max(1.0 / self.a);
        a * a
    }

    /// The heuristic gap 2p(1−p)·log a·sin²ψ quoted alongside the family.
    pub fn heuristic_gap(&self) -> f64 {
        2.0 * self.p * (1.0 - self.p) * self.a.ln() * self.psi.sin().powi(2)
    }
}
