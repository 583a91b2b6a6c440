//! Empirical pressure Λ_n(s), its discrete Legendre transform and a
//! concentration harness for finite-time averages.
//!
//! All grid points share one set of trajectories, so the curve is smooth in
//! s and its slope at 0 is the sample mean rate.

use serde::{Deserialize, Serialize};

use crate::cocycle::{
    estimate_top_exponent, finite_time_average, log_norm_samples, CocycleEstimate, CocycleRunConfig,
    InitialDirection, DEFAULT_BURN_IN,
};
use crate::constants::{
    concentration_constants, holder_package_gl2, hoeffding_azuma_bound, variance_tail_bound, SpectralInputs,
};
use crate::error::{Error, Result};
use crate::gl::ProjectivePoint;
use crate::measures::FiniteMatrixMeasure;
use crate::rng::derive_seed;

const TAG_REFERENCE: u64 = 0xC0;
/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489004;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Fixed start; `None` starts from a random direction after `burn_in` steps.
    pub start: Option<ProjectivePoint>,
    pub burn_in: usize,
    /// Grid points with |s| above this are dropped. Defaults to 5/log ecc.
    pub s_max: Option<f64>,
}

impl PressureConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        Self { n, trials, seed, start: None, burn_in: DEFAULT_BURN_IN, s_max: None }
    }

    pub fn with_start(mut self, v: ProjectivePoint) -> Self {
        self.start = Some(v);
        self.burn_in = 0;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureCurve {
    pub s_grid: Vec<f64>,
    /// Lower convex envelope of `raw_values`.
    pub values: Vec<f64>,
    pub raw_values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Mean of the sampled rates (1/n)·log‖A_xⁿ v‖ and its standard error.
    pub rate_mean: f64,
    pub rate_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFunction {
    pub eps_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// True where the supremum sits on the edge of the s-grid, i.e. the
    /// value is a lower bound standing in for a larger or infinite rate.
    pub saturated: Vec<bool>,
    pub argmin: f64,
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::BadGrid(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::BadGrid(format!("{what} grid has non-finite points")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadGrid(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

/// log of the mean of exp(xᵢ), summing the shifted terms in ascending order.
fn log_mean_exp(xs: &[f64]) -> (f64, Vec<f64>) {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let mut sorted = w.clone();
    sorted.sort_by(f64::total_cmp);
    let sum: f64 = sorted.iter().sum();
    let k = xs.len() as f64;
    for x in &mut w {
        *x /= sum / k;
    }
    (m + sum.ln() - k.ln(), w)
}

/// Ordinates of the lower convex envelope of (x, y), evaluated at x.
/// Points within rounding of the chord below them keep their value.
pub fn lower_convex_envelope(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = y.to_vec();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in a + 1..b {
            let t = (x[i] - x[a]) / (x[b] - x[a]);
            let chord = y[a] + t * (y[b] - y[a]);
            let rounding = 4.0 * f64::EPSILON * (y[a].abs() + y[b].abs() + y[i].abs());
            if y[i] > chord + rounding {
                out[i] = chord;
            }
        }
    }
    out
}

pub fn default_s_max(ecc: f64) -> f64 {
    let l = ecc.ln();
    if l > 0.0 {
        5.0 / l
    } else {
        f64::INFINITY
    }
}

pub fn estimate_pressure(nu: &FiniteMatrixMeasure, s_grid: &[f64], cfg: &PressureConfig) -> Result<PressureCurve> {
    check_grid(s_grid, "s")?;
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(Error::BadConfig("n and trials must be at least 1".into()));
    }
    let s_max = cfg.s_max.unwrap_or_else(|| default_s_max(nu.eccentricity()));
    let grid: Vec<f64> = s_grid.iter().copied().filter(|s| s.abs() <= s_max).collect();
    if grid.is_empty() {
        return Err(Error::BadGrid(format!("no grid point within |s| ≤ {s_max}")));
    }
    let initial = match &cfg.start {
        Some(v) => InitialDirection::Fixed(v.clone()),
        None => InitialDirection::Random,
    };
    let totals = log_norm_samples(nu, cfg.n, cfg.trials, cfg.seed, &initial, cfg.burn_in)?;
    let n = cfg.n as f64;
    let t = cfg.trials as f64;

    let mut raw = Vec::with_capacity(grid.len());
    let mut se = Vec::with_capacity(grid.len());
    for &s in &grid {
        if s == 0.0 {
            raw.push(0.0);
            se.push(0.0);
            continue;
        }
        let xs: Vec<f64> = totals.iter().map(|x| s * x).collect();
        let (lme, w) = log_mean_exp(&xs);
        raw.push(lme / n);
        // delta method: sd of the normalized weights over √T, divided by n
        let var = if cfg.trials > 1 { w.iter().map(|x| (x - 1.0).powi(2)).sum::<f64>() / (t - 1.0) } else { 0.0 };
        se.push((var / t).sqrt() / n);
    }
    let rates: Vec<f64> = totals.iter().map(|x| x / n).collect();
    let rate_mean = rates.iter().sum::<f64>() / t;
    let rate_se = if cfg.trials > 1 {
        (rates.iter().map(|r| (r - rate_mean).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt()
    } else {
        0.0
    };
    Ok(PressureCurve {
        values: lower_convex_envelope(&grid, &raw),
        s_grid: grid,
        raw_values: raw,
        std_errors: se,
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        rate_mean,
        rate_se,
    })
}

impl PressureCurve {
    /// Central difference of the raw curve at the grid point s = 0, with the
    /// standard error of the sample mean rate.
    pub fn slope_at_zero(&self) -> Result<(f64, f64)> {
        let k = self
            .s_grid
            .iter()
            .position(|&s| s == 0.0)
            .ok_or_else(|| Error::BadGrid("grid must contain s = 0".into()))?;
        if k == 0 || k + 1 == self.s_grid.len() {
            return Err(Error::BadGrid("s = 0 needs a neighbour on each side".into()));
        }
        let slope =
            (self.raw_values[k + 1] - self.raw_values[k - 1]) / (self.s_grid[k + 1] - self.s_grid[k - 1]);
        Ok((slope, self.rate_se))
    }

    /// Indices k where the raw second difference is below −3 combined std errors.
    pub fn convexity_violations(&self) -> Vec<usize> {
        let (s, y, e) = (&self.s_grid, &self.raw_values, &self.std_errors);
        (1..s.len().saturating_sub(1))
            .filter(|&k| {
                let (h0, h1) = (s[k] - s[k - 1], s[k + 1] - s[k]);
                let d2 = (y[k + 1] - y[k]) / h1 - (y[k] - y[k - 1]) / h0;
                let sd = (e[k + 1] / h1).hypot(e[k] * (1.0 / h0 + 1.0 / h1)).hypot(e[k - 1] / h0);
                d2 < -3.0 * sd
            })
            .collect()
    }
}

/// I(ε) = max over the s-grid of sε − Λ(s), on the convexified curve.
pub fn legendre_transform(curve: &PressureCurve, eps_grid: &[f64]) -> Result<RateFunction> {
    check_grid(eps_grid, "ε")?;
    check_grid(&curve.s_grid, "s")?;
    let (s, lam) = (&curve.s_grid, &curve.values);
    let last = s.len() - 1;
    let mut values = Vec::with_capacity(eps_grid.len());
    let mut saturated = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let (k, v) = s
            .iter()
            .zip(lam)
            .map(|(s, l)| s * e - l)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
        let scale = 1e-12 * (1.0 + (s[k] * e).abs() + lam[k].abs());
        let on_edge = last > 0 && (k == 0 || k == last);
        saturated.push(on_edge && v > scale);
        values.push(v.max(0.0));
    }
    let argmin = eps_grid[values
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v < values[best] { k } else { best })];
    Ok(RateFunction { eps_grid: eps_grid.to_vec(), values, saturated, argmin })
}

impl RateFunction {
    /// Legendre transform back onto an s-grid: max over ε of sε − I(ε).
    pub fn legendre(&self, s_grid: &[f64]) -> Result<Vec<f64>> {
        check_grid(s_grid, "s")?;
        Ok(s_grid
            .iter()
            .map(|s| {
                self.eps_grid.iter().zip(&self.values).map(|(e, i)| s * e - i).fold(f64::NEG_INFINITY, f64::max)
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub eps: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub lambda_ref: CocycleEstimate,
    pub exceedances: usize,
    pub empirical_tail: f64,
    pub sigma2_bound: f64,
    pub c_ha: f64,
    pub bound: f64,
    pub bound_ha: f64,
    pub pass: bool,
}

/// σ² bound at the given eccentricity, with τ from the Hölder package
/// (τ does not depend on the gap or θ).
pub fn sigma2_bound_for(ecc: f64) -> Result<f64> {
    let report = holder_package_gl2(&SpectralInputs::new(ecc, 1.0, 1.0, 0.0))?;
    Ok(concentration_constants(ecc, report.tau)?.sigma2_bound)
}

/// Upper 99% slack for an empirical frequency whose true value is `p`.
pub fn binomial_slack(p: f64, trials: usize) -> f64 {
    Z99 * (p * (1.0 - p) / trials as f64).max(0.0).sqrt()
}

/// Fraction of trials with |λ_n(v) − λ̂₊| > ε against 2exp(−nε²/(4σ²)) and
/// 2exp(−nε²/(2C_HA)). `sigma2_bound` defaults to [`sigma2_bound_for`].
/// λ̂₊ comes from an independent long run on a derived seed.
pub fn concentration_check(
    nu: &FiniteMatrixMeasure,
    v: &ProjectivePoint,
    eps: f64,
    n: usize,
    trials: usize,
    seed: u64,
    sigma2_bound: Option<f64>,
) -> Result<ConcentrationReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    let ecc = nu.eccentricity();
    let sigma2 = match sigma2_bound {
        Some(s) => s,
        None => sigma2_bound_for(ecc)?,
    };
    let c_ha = 2.0 * ecc.ln().powi(2);
    let ref_steps = n.max(10_000);
    let ref_cfg = CocycleRunConfig::new(ref_steps + DEFAULT_BURN_IN, 16, DEFAULT_BURN_IN, derive_seed(seed, TAG_REFERENCE))?;
    let lambda_ref = estimate_top_exponent(nu, &ref_cfg)?;
    let samples = finite_time_average(nu, v, n, trials, seed)?;
    let exceedances = samples.iter().filter(|x| (*x - lambda_ref.value).abs() > eps).count();
    let empirical_tail = exceedances as f64 / trials as f64;
    let bound = variance_tail_bound(n, eps, sigma2);
    let bound_ha = hoeffding_azuma_bound(n, eps, c_ha);
    let pass = [bound, bound_ha].iter().all(|&b| empirical_tail <= b + binomial_slack(b.min(1.0), trials));
    Ok(ConcentrationReport {
        eps,
        n,
        trials,
        seed,
        lambda_ref,
        exceedances,
        empirical_tail,
        sigma2_bound: sigma2,
        c_ha,
        bound,
        bound_ha,
        pass,
    })
}
