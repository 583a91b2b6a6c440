//! Closed-form regularity constants: the Hölder package, the log-Hölder
//! exponent, sub-top and Markov variants, concentration constants and the
//! balance curve β(α).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl::binomial;
use crate::measures::check_theta;

const SNAP_TOL: f64 = 1e-9;

/// ⌈x⌉ after snapping values within 1e−9 of an integer onto it.
pub fn snapped_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL {
        r
    } else {
        x.ceil()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInputs {
    pub ecc: f64,
    pub lyap_gap: f64,
    pub theta: f64,
    pub diam_theta: f64,
}

impl SpectralInputs {
    pub fn new(ecc: f64, lyap_gap: f64, theta: f64, diam_theta: f64) -> Self {
        Self { ecc, lyap_gap, theta, diam_theta }
    }

    fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(self.ecc > 1.0) || !self.ecc.is_finite() {
            return Err(Error::BadEccentricity(self.ecc));
        }
        if !(self.lyap_gap > 0.0) {
            return Err(Error::DegenerateGap(self.lyap_gap));
        }
        if !(self.diam_theta >= 0.0) || !self.diam_theta.is_finite() {
            return Err(Error::InvalidInput(format!("diam_theta must be finite and ≥ 0, got {}", self.diam_theta)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub inputs: SpectralInputs,
    pub n0: u64,
    pub tau0: f64,
    /// N_θ / n₀.
    pub blocks: u64,
    pub n_theta: u64,
    pub tau: f64,
    pub beta_star: f64,
    pub r_star: f64,
    pub c_star: f64,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    pub e2: f64,
}

/// n₀ = ⌈2 log 2 / (θ·gap)⌉, at least 1.
fn first_block(theta: f64, gap: f64) -> u64 {
    (snapped_ceil(2.0 * std::f64::consts::LN_2 / (theta * gap)) as u64).max(1)
}

fn c_star(l: f64, e2: f64, c1: f64, theta: f64, diam_theta: f64, tau: f64) -> f64 {
    l * diam_theta.powf(1.0 - theta) + (l + e2) * 2.0 * c1.powf(theta) / (1.0 - tau)
}

/// The Hölder package for the top exponent; the same formulas serve GL(d)
/// with the gap λ₁ − λ₂.
pub fn holder_package_gl2(inputs: &SpectralInputs) -> Result<ConstantsReport> {
    inputs.validate()?;
    let SpectralInputs { ecc, lyap_gap, theta, diam_theta } = *inputs;
    let n0 = first_block(theta, lyap_gap);
    let tau0 = 1.0 - std::f64::consts::LN_2 / (4.0 * (2.0 * ecc).ln());
    let (c1, c2, l, e2) = (ecc, ecc * ecc, 2.0 * ecc, ecc * ecc);
    let blocks = (snapped_ceil(3.0 * c2.ln() / (1.0 / tau0).ln()) as u64).max(1);
    let n_theta = n0 * blocks;
    let tau = tau0.powf(blocks as f64 / 3.0);
    let neg_log_tau = -tau.ln();
    let beta_star = neg_log_tau / (neg_log_tau + blocks as f64 * c2.ln());
    let r_star = (1.0 / (2.0 * (ecc + 1.0).powi(2))).min((1.0 - tau) / (4.0 * ecc));
    let gamma = neg_log_tau / (blocks as f64 * c2.ln());
    Ok(ConstantsReport {
        inputs: *inputs,
        n0,
        tau0,
        blocks,
        n_theta,
        tau,
        beta_star,
        r_star,
        c_star: c_star(l, e2, c1, theta, diam_theta, tau),
        gamma,
        c1,
        c2,
        l,
        e2,
    })
}

pub fn holder_package_gld(inputs: &SpectralInputs) -> Result<ConstantsReport> {
    holder_package_gl2(inputs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Mh,
    Perpetuity,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mh" => Ok(Regime::Mh),
            "perpetuity" => Ok(Regime::Perpetuity),
            other => Err(Error::InvalidInput(format!("unknown regime {other:?}; expected mh or perpetuity"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Mh => "mh",
            Regime::Perpetuity => "perpetuity",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHolderReport {
    pub regime: Regime,
    pub theta: f64,
    pub kappa_star: f64,
}

/// κ* = θ/(2+θ) under the mixing hypothesis, θ/(8(1+θ)) otherwise.
pub fn log_holder_package(theta: f64, regime: Regime) -> Result<LogHolderReport> {
    check_theta(theta)?;
    let kappa_star = match regime {
        Regime::Mh => theta / (2.0 + theta),
        Regime::Perpetuity => theta / (8.0 * (1.0 + theta)),
    };
    Ok(LogHolderReport { regime, theta, kappa_star })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOptimality {
    pub gamma: f64,
    pub alpha_star: f64,
    pub beta_max: f64,
    /// (α, β(α)) on the requested grid with α* merged in, sorted by α.
    pub points: Vec<(f64, f64)>,
}

/// β(α) = min(1 − α, αγ) for a given γ.
pub fn balance_curve(gamma: f64, alphas: &[f64]) -> Result<MethodOptimality> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::BadGrid(format!("alpha {a} outside [0, 1]")));
    }
    let alpha_star = 1.0 / (1.0 + gamma);
    let beta = |a: f64| (1.0 - a).min(a * gamma);
    let mut grid: Vec<f64> = alphas.to_vec();
    grid.push(alpha_star);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(MethodOptimality {
        gamma,
        alpha_star,
        beta_max: gamma / (1.0 + gamma),
        points: grid.into_iter().map(|a| (a, beta(a))).collect(),
    })
}

/// The balance curve with γ = n₀(−log τ)/(N_θ log C₂) from the Hölder package.
pub fn method_optimality_curve(inputs: &SpectralInputs, alphas: &[f64]) -> Result<MethodOptimality> {
    let report = holder_package_gl2(inputs)?;
    balance_curve(report.gamma, alphas)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubtopReport {
    pub d: usize,
    pub k: usize,
    pub e_k: f64,
    pub beta_k: f64,
    /// Present only when the caller supplied τ^{(k,d)}.
    pub tau_k: Option<f64>,
    pub c_k: Option<f64>,
}

/// β^{(k,d)} and, given τ^{(k,d)}, C^{(k,d)} = 4·C(d,k)·ecc^{2k}/(1 − τ).
pub fn subtop_package(
    ecc: f64,
    gap_k: f64,
    theta: f64,
    d: usize,
    k: usize,
    tau_k: Option<f64>,
) -> Result<SubtopReport> {
    check_theta(theta)?;
    if d < 2 || k == 0 || k >= d {
        return Err(Error::BadOrder(format!("need 1 ≤ k ≤ d − 1, got k = {k}, d = {d}")));
    }
    if !(ecc >= 1.0) || !ecc.is_finite() {
        return Err(Error::BadEccentricity(ecc));
    }
    if !(gap_k > 0.0) {
        return Err(Error::DegenerateGap(gap_k));
    }
    if let Some(t) = tau_k {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::BadTau(t));
        }
    }
    let binom = binomial(d, k) as f64;
    let e_k = binom * ecc.powi(k as i32);
    let tg = theta * gap_k;
    let beta_k = tg / (tg + 4.0 * (e_k + 1.0).ln());
    let c_k = tau_k.map(|t| 4.0 * binom * ecc.powi(2 * k as i32) / (1.0 - t));
    Ok(SubtopReport { d, k, e_k, beta_k, tau_k, c_k })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub rho_p: f64,
    pub fiber: SpectralInputs,
    pub n0: u64,
    /// Fiber contraction e^{−n₀θ·gap/2}.
    pub tau0: f64,
    pub n_theta_fiber: u64,
    pub n_theta_p: u64,
    pub tau: f64,
    pub beta: f64,
    pub c: f64,
}

/// Constants for a Markov-driven cocycle with base spectral gap ρ_P.
pub fn markov_package(rho_p: f64, fiber: &SpectralInputs) -> Result<MarkovReport> {
    if !(0.0..1.0).contains(&rho_p) {
        return Err(Error::BadRho(rho_p));
    }
    fiber.validate()?;
    let SpectralInputs { ecc, lyap_gap, theta, diam_theta } = *fiber;
    let n0 = first_block(theta, lyap_gap);
    let tau0 = (-(n0 as f64) * theta * lyap_gap / 2.0).exp();
    let (c1, c2, l, e2) = (ecc, ecc * ecc, 2.0 * ecc, ecc * ecc);
    let log_c2 = c2.ln();
    let n_theta_fiber = n0 * (snapped_ceil(3.0 * log_c2 / (1.0 / tau0).ln()) as u64).max(1);
    let base = tau0.max(rho_p);
    let n_theta_p = n_theta_fiber * (snapped_ceil(3.0 * log_c2 / (1.0 / base).ln()) as u64).max(1);
    let tau = base.powf(n_theta_p as f64 / (3.0 * n_theta_fiber as f64));
    let neg_log_tau = -tau.ln();
    let beta = neg_log_tau / (neg_log_tau + (n_theta_p as f64 / n0 as f64) * log_c2);
    Ok(MarkovReport {
        rho_p,
        fiber: *fiber,
        n0,
        tau0,
        n_theta_fiber,
        n_theta_p,
        tau,
        beta,
        c: c_star(l, e2, c1, theta, diam_theta, tau),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConstants {
    pub c_ha: f64,
    pub sigma2_bound: f64,
}

/// C_HA = 2(log ecc)² and σ² ≤ (log ecc)²(1 + 2τ/(1 − τ)).
pub fn concentration_constants(ecc: f64, tau: f64) -> Result<ConcentrationConstants> {
    if !(ecc > 1.0) || !ecc.is_finite() {
        return Err(Error::BadEccentricity(ecc));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::BadTau(tau));
    }
    let l2 = ecc.ln().powi(2);
    Ok(ConcentrationConstants { c_ha: 2.0 * l2, sigma2_bound: l2 * (1.0 + 2.0 * tau / (1.0 - tau)) })
}

/// 2·exp(−nε²/(4σ²)).
pub fn variance_tail_bound(n: usize, eps: f64, sigma2: f64) -> f64 {
    2.0 * (-(n as f64) * eps * eps / (4.0 * sigma2)).exp()
}

/// 2·exp(−nε²/(2C_HA)).
pub fn hoeffding_azuma_bound(n: usize, eps: f64, c_ha: f64) -> f64 {
    2.0 * (-(n as f64) * eps * eps / (2.0 * c_ha)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SpectralInputs {
        SpectralInputs::new(4.0, 0.2599, 0.5, 1.0)
    }

    #[test]
    fn worked_example_table() {
        let r = holder_package_gl2(&example()).unwrap();
        assert_eq!(r.n0, 11);
        assert!((r.tau0 - 0.9167).abs() < 1e-4);
        assert_eq!(r.blocks, 96);
        assert_eq!(r.n_theta, 1056);
        assert!((r.tau - 0.0618).abs() < 3e-4);
        assert!((r.beta_star - 0.01035).abs() < 5e-5);
        assert!((r.c_star - 110.3).abs() < 0.2);
        // 1/(2·25) beats (1 − τ)/16
        assert!((r.r_star - 0.02).abs() < 1e-15);
        assert_eq!(r.n_theta % r.n0, 0);
    }

    #[test]
    fn snapping() {
        assert_eq!(snapped_ceil(10.67), 11.0);
        assert_eq!(snapped_ceil(11.0 + 1e-12), 11.0);
        assert_eq!(snapped_ceil(11.0 - 1e-12), 11.0);
        assert_eq!(snapped_ceil(11.0 + 1e-6), 12.0);
    }

    #[test]
    fn limits_and_errors() {
        let r = holder_package_gl2(&SpectralInputs::new(4.0, 1e9, 0.5, 1.0)).unwrap();
        assert_eq!(r.n0, 1);
        assert!(matches!(holder_package_gl2(&SpectralInputs::new(4.0, 0.0, 0.5, 1.0)), Err(Error::DegenerateGap(_))));
        assert!(matches!(holder_package_gl2(&SpectralInputs::new(1.0, 0.2, 0.5, 1.0)), Err(Error::BadEccentricity(_))));
        assert!(matches!(holder_package_gl2(&SpectralInputs::new(4.0, 0.2, 0.0, 1.0)), Err(Error::BadTheta(_))));
        assert_eq!(holder_package_gld(&example()).unwrap(), holder_package_gl2(&example()).unwrap());
    }

    #[test]
    fn halving_gap_doubles_n0() {
        for gap in [0.05, 0.13, 0.2599, 0.7, 1.3] {
            let a = holder_package_gl2(&SpectralInputs::new(4.0, gap, 0.5, 1.0)).unwrap();
            let b = holder_package_gl2(&SpectralInputs::new(4.0, gap / 2.0, 0.5, 1.0)).unwrap();
            assert!(b.n0 >= 2 * a.n0 - 1, "{gap}: {} vs {}", a.n0, b.n0);
            assert!(b.n0 >= a.n0);
        }
    }

    #[test]
    fn kappa_table() {
        assert_eq!(log_holder_package(1.0, Regime::Mh).unwrap().kappa_star, 1.0 / 3.0);
        assert_eq!(log_holder_package(1.0, Regime::Perpetuity).unwrap().kappa_star, 1.0 / 16.0);
        assert_eq!(log_holder_package(0.5, Regime::Mh).unwrap().kappa_star, 0.2);
        assert!(log_holder_package(0.0, Regime::Mh).is_err());
        assert!(log_holder_package(1.1, Regime::Mh).is_err());
    }

    #[test]
    fn balance_examples() {
        let m = balance_curve(1.0, &[0.0, 0.25, 0.75, 1.0]).unwrap();
        assert_eq!(m.alpha_star, 0.5);
        assert_eq!(m.beta_max, 0.5);
        let grid_max = m.points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        assert_eq!(grid_max, 0.5);
        let alphas: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let c = method_optimality_curve(&example(), &alphas).unwrap();
        let r = holder_package_gl2(&example()).unwrap();
        let grid_max = c.points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        assert!((grid_max - r.beta_star).abs() < 1e-12);
        assert!((c.beta_max - r.beta_star).abs() < 1e-12);
        assert!(c.points.iter().all(|p| p.1 <= c.beta_max + 1e-15));
    }

    #[test]
    fn subtop_examples() {
        let r = subtop_package(4.0, 0.3, 0.5, 2, 1, None).unwrap();
        assert_eq!(r.e_k, 8.0);
        assert!((r.beta_k - 0.15 / (0.15 + 4.0 * 9f64.ln())).abs() < 1e-15);
        assert_eq!(r.c_k, None);
        let r = subtop_package(4.0, 0.3, 0.5, 4, 2, Some(0.5)).unwrap();
        assert_eq!(r.e_k, 6.0 * 16.0);
        assert_eq!(r.c_k, Some(4.0 * 6.0 * 256.0 / 0.5));
        assert!(subtop_package(4.0, 1e12, 0.5, 3, 1, None).unwrap().beta_k > 0.999);
        assert!(subtop_package(1e12, 0.3, 0.5, 3, 1, None).unwrap().beta_k < 0.01);
        assert!(matches!(subtop_package(4.0, 0.3, 0.5, 3, 3, None), Err(Error::BadOrder(_))));
        assert!(matches!(subtop_package(4.0, 0.0, 0.5, 3, 1, None), Err(Error::DegenerateGap(_))));
    }

    #[test]
    fn markov_examples() {
        let f = example();
        let iid = markov_package(0.0, &f).unwrap();
        assert_eq!(iid.tau0.max(0.0), iid.tau0);
        let slow = markov_package(0.5, &f).unwrap();
        assert!(slow.beta <= iid.beta);
        assert!(slow.tau > 0.0 && slow.tau < 1.0);
        let mut last = iid.beta;
        for rho in [0.9, 0.99, 0.999, 0.99999] {
            let r = markov_package(rho, &f).unwrap();
            assert!(r.beta <= last);
            last = r.beta;
        }
        assert!(last < 1e-3);
        assert!(matches!(markov_package(1.0, &f), Err(Error::BadRho(_))));
        assert!(matches!(markov_package(-0.1, &f), Err(Error::BadRho(_))));
    }

    #[test]
    fn concentration_examples() {
        let c = concentration_constants(4.0, 0.0618).unwrap();
        assert!((c.c_ha - 2.0 * 4f64.ln().powi(2)).abs() < 1e-15);
        assert!((c.c_ha - 3.8436).abs() < 1e-4);
        // (2 log 2)² · (1 + 2·0.0618/0.9382)
        assert!((c.sigma2_bound - 2.174995).abs() < 1e-5);
        let near = concentration_constants(1.0 + 1e-9, 0.5).unwrap();
        assert!(near.c_ha < 1e-15 && near.sigma2_bound < 1e-15);
        let b = variance_tail_bound(100_000, 0.05, 2.05);
        assert!((b.ln() - (2f64.ln() - 30.5)).abs() < 0.1);
        assert!(concentration_constants(1.0, 0.5).is_err());
        assert!(concentration_constants(4.0, 1.0).is_err());
    }
}
