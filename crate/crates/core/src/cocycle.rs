//! Monte-Carlo Lyapunov exponents for i.i.d. and Markov-driven cocycles.
//!
//! Every trajectory renormalizes its direction after each step and
//! accumulates the log of the norm growth. Trajectory `t` draws from
//! `rng::stream(seed, t)` and results are reduced in index order, so an
//! estimate does not depend on the rayon thread count.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gl::{matvec, norm2, ProjectivePoint, SquareMatrix};
use crate::measures::FiniteMatrixMeasure;
use crate::rng::{derive_seed, stream};

pub const DEFAULT_BURN_IN: usize = 1000;
/// Batches used for the standard error of a single long trajectory.
const SINGLE_RUN_BATCHES: usize = 16;

/// Floating-point resolution of a growth rate. Stored atoms are only
/// orthogonal or unimodular up to rounding, which shifts exponents by a few
/// ulps; standard errors never claim more precision than this.
pub const RATE_RESOLUTION: f64 = 4.0 * f64::EPSILON;

const TAG_BOTTOM: u64 = 0xB0;
const TAG_PARTIAL: u64 = 0x9A;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitialDirection {
    Random,
    Fixed(ProjectivePoint),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleRunConfig {
    pub steps: usize,
    pub trajectories: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial_direction: InitialDirection,
}

impl CocycleRunConfig {
    pub fn new(steps: usize, trajectories: usize, burn_in: usize, seed: u64) -> Result<Self> {
        let cfg = Self { steps, trajectories, burn_in, seed, initial_direction: InitialDirection::Random };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_direction(mut self, p: ProjectivePoint) -> Self {
        self.initial_direction = InitialDirection::Fixed(p);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.trajectories == 0 {
            return Err(Error::BadConfig("steps and trajectories must be at least 1".into()));
        }
        if self.burn_in >= self.steps {
            return Err(Error::BadConfig(format!(
                "burn-in {} must be smaller than the step count {}",
                self.burn_in, self.steps
            )));
        }
        Ok(())
    }

    fn measured_steps(&self) -> usize {
        self.steps - self.burn_in
    }
}

/// A Monte-Carlo estimate with its standard error and run metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub trajectories: usize,
    pub seed: u64,
}

impl CocycleEstimate {
    pub fn exact(value: f64, cfg: &CocycleRunConfig) -> Self {
        Self { value, std_error: 0.0, n: cfg.steps, trajectories: cfg.trajectories, seed: cfg.seed }
    }

    pub fn neg(&self) -> Self {
        Self { value: -self.value, ..self.clone() }
    }

    /// `self − other` for independent estimates.
    pub fn minus(&self, other: &CocycleEstimate) -> Self {
        Self {
            value: self.value - other.value,
            std_error: self.std_error.hypot(other.std_error),
            ..self.clone()
        }
    }
}

/// Flat copy of a measure's atoms for the inner loop.
struct Atoms {
    dim: usize,
    entries: Vec<f64>,
    picker: Option<WeightedIndex<f64>>,
}

impl Atoms {
    fn new(nu: &FiniteMatrixMeasure) -> Self {
        let entries = nu.atoms().iter().flat_map(|a| a.entries().iter().copied()).collect();
        let picker = (nu.len() > 1).then(|| WeightedIndex::new(nu.weights()).expect("valid weights"));
        Self { dim: nu.dim(), entries, picker }
    }

    #[inline]
    fn pick(&self, rng: &mut ChaCha8Rng) -> &[f64] {
        let j = match &self.picker {
            Some(w) => w.sample(rng),
            None => 0,
        };
        let s = self.dim * self.dim;
        &self.entries[j * s..(j + 1) * s]
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm2(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn start(dim: usize, init: &InitialDirection, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match init {
        InitialDirection::Random => Ok(random_unit(dim, rng)),
        InitialDirection::Fixed(p) => {
            if p.dim() != dim {
                return Err(Error::DimMismatch { expected: dim, found: p.dim() });
            }
            Ok(p.rep().to_vec())
        }
    }
}

/// One step `v ← g v / ‖g v‖`, returning log ‖g v‖.
#[inline]
fn step(dim: usize, g: &[f64], v: &mut [f64], w: &mut [f64]) -> f64 {
    matvec(dim, g, v, w);
    let r = norm2(w);
    for (a, b) in v.iter_mut().zip(w.iter()) {
        *a = b / r;
    }
    r.ln()
}

/// Neumaier compensated sum. A plain running total of n increments drifts by
/// about n·ε·|total|, which shows up in deterministic cocycles.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// Sum of post-burn-in log increments, split into batch sums when asked.
struct TrajectoryOutput {
    total: f64,
    batches: Vec<f64>,
}

impl TrajectoryOutput {
    fn from_batches(sums: &[Compensated]) -> Self {
        let mut total = Compensated::default();
        for b in sums {
            total.add(b.sum);
            total.add(b.c);
        }
        Self { total: total.value(), batches: sums.iter().map(|b| b.value()).collect() }
    }
}

fn run_iid(atoms: &Atoms, cfg: &CocycleRunConfig, t: usize, batches: usize) -> Result<TrajectoryOutput> {
    let mut rng = stream(cfg.seed, t as u64);
    let d = atoms.dim;
    let mut v = start(d, &cfg.initial_direction, &mut rng)?;
    let mut w = vec![0.0; d];
    for _ in 0..cfg.burn_in {
        let g = atoms.pick(&mut rng);
        step(d, g, &mut v, &mut w);
    }
    let m = cfg.measured_steps();
    let b = batches.max(1);
    let mut sums = vec![Compensated::default(); b];
    for i in 0..m {
        let g = atoms.pick(&mut rng);
        sums[i * b / m].add(step(d, g, &mut v, &mut w));
    }
    Ok(TrajectoryOutput::from_batches(&sums))
}

/// Unbiased sample variance, shifted by the first element so identical
/// inputs give exactly zero.
fn sample_variance(xs: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let x0 = xs[0];
    let mean = xs.iter().map(|x| x - x0).sum::<f64>() / k;
    xs.iter().map(|x| (x - x0 - mean).powi(2)).sum::<f64>() / (k - 1.0)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    (mean, (sample_variance(xs) / k).sqrt())
}

fn summarize(outputs: &[TrajectoryOutput], cfg: &CocycleRunConfig) -> CocycleEstimate {
    let m = cfg.measured_steps();
    let (value, std_error) = if outputs.len() == 1 {
        let out = &outputs[0];
        let b = out.batches.len();
        let means: Vec<f64> = (0..b)
            .map(|k| {
                let len = (k + 1) * m / b - k * m / b;
                out.batches[k] / len.max(1) as f64
            })
            .collect();
        (out.total / m as f64, if m >= b { mean_and_se(&means).1 } else { 0.0 })
    } else {
        let means: Vec<f64> = outputs.iter().map(|o| o.total / m as f64).collect();
        mean_and_se(&means)
    };
    CocycleEstimate {
        value,
        std_error: std_error.hypot(RATE_RESOLUTION),
        n: cfg.steps,
        trajectories: cfg.trajectories,
        seed: cfg.seed,
    }
}

/// λ̂₊(ν): mean over trajectories of the post-burn-in growth rate.
pub fn estimate_top_exponent(nu: &FiniteMatrixMeasure, cfg: &CocycleRunConfig) -> Result<CocycleEstimate> {
    cfg.validate()?;
    let atoms = Atoms::new(nu);
    let batches = if cfg.trajectories == 1 { SINGLE_RUN_BATCHES } else { 1 };
    let outputs = (0..cfg.trajectories)
        .into_par_iter()
        .map(|t| run_iid(&atoms, cfg, t, batches))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&outputs, cfg))
}

/// λ̂₋(ν) = −λ̂₊(ν⁻¹), run on an independent seed derived from `cfg.seed`.
pub fn estimate_bottom_exponent(nu: &FiniteMatrixMeasure, cfg: &CocycleRunConfig) -> Result<CocycleEstimate> {
    let inner = cfg.clone().with_seed(derive_seed(cfg.seed, TAG_BOTTOM));
    let est = estimate_top_exponent(&nu.inverse_pushforward(), &inner)?;
    Ok(CocycleEstimate { seed: cfg.seed, ..est.neg() })
}

/// Λ̂_k = λ̂₁ + … + λ̂_k from the top exponent of the Λᵏ-lifted measure.
pub fn estimate_partial_sum(nu: &FiniteMatrixMeasure, k: usize, cfg: &CocycleRunConfig) -> Result<CocycleEstimate> {
    if k == 0 || k > nu.dim() {
        return Err(Error::BadOrder(format!("k = {k} outside 1..={}", nu.dim())));
    }
    if k == 1 {
        return estimate_top_exponent(nu, cfg);
    }
    let lifted = nu.exterior_lift(k)?;
    let cfg = match &cfg.initial_direction {
        InitialDirection::Random => cfg.clone(),
        InitialDirection::Fixed(_) => CocycleRunConfig { initial_direction: InitialDirection::Random, ..cfg.clone() },
    };
    estimate_top_exponent(&lifted, &cfg)
}

/// λ̂_k = Λ̂_k − Λ̂_{k−1}, the two partial sums on independent seeds.
pub fn individual_exponent(nu: &FiniteMatrixMeasure, k: usize, cfg: &CocycleRunConfig) -> Result<CocycleEstimate> {
    let upper = estimate_partial_sum(nu, k, cfg)?;
    if k == 1 {
        return Ok(upper);
    }
    let lower_cfg = cfg.clone().with_seed(derive_seed(cfg.seed, TAG_PARTIAL + k as u64));
    let lower = estimate_partial_sum(nu, k - 1, &lower_cfg)?;
    Ok(upper.minus(&lower))
}

/// `trials` independent samples of (1/n)·log‖A_xⁿ v‖.
pub fn finite_time_average(
    nu: &FiniteMatrixMeasure,
    v: &ProjectivePoint,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let totals = log_norm_samples(nu, n, trials, seed, &InitialDirection::Fixed(v.clone()), 0)?;
    Ok(totals.into_iter().map(|s| s / n as f64).collect())
}

/// `trials` samples of log‖A_xⁿ v‖ where v is `initial` pushed through
/// `burn_in` preliminary steps (renormalized, not counted).
pub fn log_norm_samples(
    nu: &FiniteMatrixMeasure,
    n: usize,
    trials: usize,
    seed: u64,
    initial: &InitialDirection,
    burn_in: usize,
) -> Result<Vec<f64>> {
    if n == 0 || trials == 0 {
        return Err(Error::BadConfig("n and trials must be at least 1".into()));
    }
    if let InitialDirection::Fixed(v) = initial {
        if v.dim() != nu.dim() {
            return Err(Error::DimMismatch { expected: nu.dim(), found: v.dim() });
        }
    }
    let cfg = CocycleRunConfig {
        steps: burn_in + n,
        trajectories: trials,
        burn_in,
        seed,
        initial_direction: initial.clone(),
    };
    let atoms = Atoms::new(nu);
    (0..trials).into_par_iter().map(|t| run_iid(&atoms, &cfg, t, 1).map(|o| o.total)).collect()
}

/// n·Var(λ_n) across trajectories, with a jackknife standard error over
/// trajectory batches. Uses the post-burn-in length as n.
pub fn estimate_asymptotic_variance(nu: &FiniteMatrixMeasure, cfg: &CocycleRunConfig) -> Result<CocycleEstimate> {
    cfg.validate()?;
    if cfg.trajectories < 2 {
        return Err(Error::BadConfig("variance needs at least 2 trajectories".into()));
    }
    let atoms = Atoms::new(nu);
    let m = cfg.measured_steps() as f64;
    let rates: Vec<f64> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|t| run_iid(&atoms, cfg, t, 1).map(|o| o.total / m))
        .collect::<Result<_>>()?;
    let scaled_var = |xs: &[f64]| m * sample_variance(xs);
    let value = scaled_var(&rates);
    let t = rates.len();
    let b = t.min(16);
    let std_error = if t >= 3 && b >= 2 {
        let leave_out: Vec<f64> = (0..b)
            .map(|k| {
                let (lo, hi) = (k * t / b, (k + 1) * t / b);
                let rest: Vec<f64> = rates[..lo].iter().chain(&rates[hi..]).copied().collect();
                scaled_var(&rest)
            })
            .collect();
        let mean = leave_out.iter().sum::<f64>() / b as f64;
        ((b as f64 - 1.0) / b as f64 * leave_out.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()).sqrt()
    } else {
        0.0
    };
    Ok(CocycleEstimate { value, std_error, n: cfg.steps, trajectories: cfg.trajectories, seed: cfg.seed })
}

/// Equal-weight sample of points in projective space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalProjectiveMeasure {
    dim: usize,
    coords: Vec<f64>,
}

impl EmpiricalProjectiveMeasure {
    pub fn from_points(points: &[ProjectivePoint]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidInput("empirical measure needs at least one sample".into()));
        };
        let dim = first.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimMismatch { expected: dim, found: p.dim() });
            }
            coords.extend_from_slice(p.rep());
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Unit representatives (sign not normalized).
    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn point(&self, i: usize) -> ProjectivePoint {
        ProjectivePoint::new(&self.coords[i * self.dim..(i + 1) * self.dim]).expect("stored samples are unit vectors")
    }
}

/// Post-burn-in directions of every trajectory, in trajectory order.
pub fn sample_stationary_measure(
    nu: &FiniteMatrixMeasure,
    cfg: &CocycleRunConfig,
) -> Result<EmpiricalProjectiveMeasure> {
    cfg.validate()?;
    let atoms = Atoms::new(nu);
    let d = nu.dim();
    let chunks: Vec<Vec<f64>> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(cfg.seed, t as u64);
            let mut v = start(d, &cfg.initial_direction, &mut rng)?;
            let mut w = vec![0.0; d];
            for _ in 0..cfg.burn_in {
                step(d, atoms.pick(&mut rng), &mut v, &mut w);
            }
            let mut out = Vec::with_capacity(cfg.measured_steps() * d);
            for _ in 0..cfg.measured_steps() {
                step(d, atoms.pick(&mut rng), &mut v, &mut w);
                out.extend_from_slice(&v);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(EmpiricalProjectiveMeasure { dim: d, coords: chunks.concat() })
}

/// ∫∫ log‖g v‖ dν(g) dη([v]) as an exact finite double sum.
pub fn furstenberg_khasminskii_integral(nu: &FiniteMatrixMeasure, eta: &EmpiricalProjectiveMeasure) -> Result<f64> {
    if nu.dim() != eta.dim() {
        return Err(Error::DimMismatch { expected: nu.dim(), found: eta.dim() });
    }
    let d = nu.dim();
    let mut w = vec![0.0; d];
    let mut total = 0.0;
    for (a, p) in nu.atoms().iter().zip(nu.weights()) {
        if *p == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for v in eta.samples() {
            a.apply(v, &mut w);
            s += (norm2(&w) / norm2(v)).ln();
        }
        total += p * s / eta.len() as f64;
    }
    Ok(total)
}

/// Both exponents through the stationary-measure formula: λ₊ against η⁺_ν
/// and λ₋ = −(value for ν⁻¹ against η⁺_{ν⁻¹}).
pub fn furstenberg_khasminskii_exponents(nu: &FiniteMatrixMeasure, cfg: &CocycleRunConfig) -> Result<(f64, f64)> {
    let eta_plus = sample_stationary_measure(nu, cfg)?;
    let top = furstenberg_khasminskii_integral(nu, &eta_plus)?;
    let inv = nu.inverse_pushforward();
    let inner = cfg.clone().with_seed(derive_seed(cfg.seed, TAG_BOTTOM));
    let eta_inv = sample_stationary_measure(&inv, &inner)?;
    let bottom = -furstenberg_khasminskii_integral(&inv, &eta_inv)?;
    Ok((top, bottom))
}

/// A finite-state Markov chain with one matrix per state.
#[derive(Clone, Debug, Serialize)]
pub struct MarkovCocycle {
    n: usize,
    transition: Vec<f64>,
    fibers: Vec<SquareMatrix>,
    stationary: Vec<f64>,
}

const ROW_SUM_TOL: f64 = 1e-10;

fn validate_stochastic(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty transition matrix".into()));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::DimMismatch { expected: n, found: r.len() });
        }
        if r.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInput(format!("row {i} has a negative or non-finite entry")));
        }
        let s: f64 = r.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!("row {i} sums to {s}")));
        }
        flat.extend_from_slice(r);
    }
    Ok((n, flat))
}

/// Irreducible and aperiodic, i.e. some power Pᵐ with m ≤ N² is positive.
fn check_primitive(n: usize, p: &[f64]) -> Result<()> {
    let reach = |forward: bool| -> usize {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let e = if forward { p[i * n + j] } else { p[j * n + i] };
                if e > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().filter(|s| **s).count()
    };
    if reach(true) < n || reach(false) < n {
        return Err(Error::NotIrreducible);
    }
    let pattern: Vec<bool> = p.iter().map(|x| *x > 0.0).collect();
    let mut power = pattern.clone();
    for _ in 0..n * n {
        if power.iter().all(|x| *x) {
            return Ok(());
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for k in 0..n {
                if power[i * n + k] {
                    for j in 0..n {
                        next[i * n + j] |= pattern[k * n + j];
                    }
                }
            }
        }
        power = next;
    }
    if power.iter().all(|x| *x) {
        Ok(())
    } else {
        Err(Error::NotAperiodic)
    }
}

fn stationary_distribution(n: usize, p: &[f64]) -> Result<Vec<f64>> {
    // (Pᵀ − I)π = 0 with the last equation replaced by Σπ = 1
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = p[j * n + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("stationary distribution system is singular".into()))?;
    let mut pi: Vec<f64> = pi.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    // a few power steps polish the residual
    for _ in 0..8 {
        let next: Vec<f64> = (0..n).map(|j| (0..n).map(|i| pi[i] * p[i * n + j]).sum()).collect();
        pi = next;
    }
    let residual = (0..n)
        .map(|j| ((0..n).map(|i| pi[i] * p[i * n + j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::Numerical(format!("stationary residual {residual:e}")));
    }
    Ok(pi)
}

impl MarkovCocycle {
    pub fn new(transition: &[Vec<f64>], fibers: Vec<SquareMatrix>) -> Result<Self> {
        let (n, flat) = validate_stochastic(transition)?;
        if fibers.len() != n {
            return Err(Error::InvalidInput(format!("{n} states but {} fiber matrices", fibers.len())));
        }
        let d = fibers[0].dim();
        if let Some(f) = fibers.iter().find(|f| f.dim() != d) {
            return Err(Error::DimMismatch { expected: d, found: f.dim() });
        }
        check_primitive(n, &flat)?;
        let stationary = stationary_distribution(n, &flat)?;
        Ok(Self { n, transition: flat, fibers, stationary })
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.fibers[0].dim()
    }

    pub fn transition(&self, i: usize, j: usize) -> f64 {
        self.transition[i * self.n + j]
    }

    pub fn fibers(&self) -> &[SquareMatrix] {
        &self.fibers
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// The i.i.d. measure Σ π_j δ_{A_j}.
    pub fn mixed_measure(&self) -> Result<FiniteMatrixMeasure> {
        FiniteMatrixMeasure::normalized(self.fibers.clone(), self.stationary.clone())
    }

    /// Time reversal P̂_ij = π_j P_ji / π_i with inverse fibers.
    pub fn reversed_inverse(&self) -> Self {
        let n = self.n;
        let pi = &self.stationary;
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = pi[j] * self.transition[j * n + i] / pi[i];
            }
            let s: f64 = t[i * n..(i + 1) * n].iter().sum();
            t[i * n..(i + 1) * n].iter_mut().for_each(|x| *x /= s);
        }
        Self {
            n,
            transition: t,
            fibers: self.fibers.iter().map(SquareMatrix::inverse).collect(),
            stationary: pi.clone(),
        }
    }

    fn top_exponent(&self, cfg: &CocycleRunConfig) -> Result<CocycleEstimate> {
        cfg.validate()?;
        let n = self.n;
        let d = self.dim();
        let initial = WeightedIndex::new(&self.stationary).map_err(|e| Error::Numerical(e.to_string()))?;
        let rows: Vec<WeightedIndex<f64>> = (0..n)
            .map(|i| WeightedIndex::new(&self.transition[i * n..(i + 1) * n]).expect("validated rows"))
            .collect();
        let fibers: Vec<&[f64]> = self.fibers.iter().map(SquareMatrix::entries).collect();
        let batches = if cfg.trajectories == 1 { SINGLE_RUN_BATCHES } else { 1 };
        let outputs = (0..cfg.trajectories)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(cfg.seed, t as u64);
                let mut v = start(d, &cfg.initial_direction, &mut rng)?;
                let mut w = vec![0.0; d];
                let mut state = initial.sample(&mut rng);
                for _ in 0..cfg.burn_in {
                    step(d, fibers[state], &mut v, &mut w);
                    state = rows[state].sample(&mut rng);
                }
                let m = cfg.measured_steps();
                let mut sums = vec![Compensated::default(); batches];
                for i in 0..m {
                    sums[i * batches / m].add(step(d, fibers[state], &mut v, &mut w));
                    state = rows[state].sample(&mut rng);
                }
                Ok(TrajectoryOutput::from_batches(&sums))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(summarize(&outputs, cfg))
    }
}

/// (λ̂₊(P, A), λ̂₋(P, A)); the bottom exponent runs the reversed chain
/// with inverse fibers on an independent derived seed.
pub fn estimate_markov_exponents(
    mc: &MarkovCocycle,
    cfg: &CocycleRunConfig,
) -> Result<(CocycleEstimate, CocycleEstimate)> {
    let top = mc.top_exponent(cfg)?;
    let inner = cfg.clone().with_seed(derive_seed(cfg.seed, TAG_BOTTOM));
    let bottom = mc.reversed_inverse().top_exponent(&inner)?;
    Ok((top, CocycleEstimate { seed: cfg.seed, ..bottom.neg() }))
}

/// Second-largest eigenvalue modulus of an irreducible aperiodic stochastic matrix.
pub fn chain_spectral_gap(transition: &[Vec<f64>]) -> Result<f64> {
    let (n, flat) = validate_stochastic(transition)?;
    check_primitive(n, &flat)?;
    match n {
        1 => return Ok(0.0),
        2 => return Ok((flat[0] + flat[3] - 1.0).abs()),
        _ => {}
    }
    let m = nalgebra::DMatrix::from_row_slice(n, n, &flat);
    let eig = m.complex_eigenvalues();
    let mut vals: Vec<nalgebra::Complex<f64>> = eig.iter().copied().collect();
    let one = vals
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).norm().total_cmp(&(b.1 - 1.0).norm()))
        .map(|(i, _)| i)
        .expect("n ≥ 3 eigenvalues");
    vals.remove(one);
    Ok(vals.iter().map(|z| z.norm()).fold(0.0, f64::max).min(1.0))
}
