use std::path::PathBuf;

use clap::Args;
use lyaplab::cocycle::DEFAULT_BURN_IN;
use lyaplab::ldp::PressureConfig;
use lyaplab::{estimate_pressure, legendre_transform};
use serde::Serialize;

use super::{linspace, load_measure, parse_direction};
use crate::output::{num, Output};
use crate::{Failure, Globals};

#[derive(Args, Serialize)]
pub struct LdpArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// Steps n in Λ_n.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s_max: f64,
    /// Number of s-grid points; s = 0 is always added.
    #[arg(long, default_value_t = 41)]
    pub s_steps: usize,
    /// Largest |s| kept; defaults to 5/log ecc.
    #[arg(long)]
    pub s_clip: Option<f64>,
    /// ε-grid; defaults to the sample mean rate ± 4 sample sd.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_max: Option<f64>,
    #[arg(long, default_value_t = 81)]
    pub eps_steps: usize,
    /// Fixed start "x1,x2,…"; default is a burned-in random direction.
    #[arg(long)]
    pub direction: Option<String>,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
}

pub fn run(a: &LdpArgs, g: &Globals) -> Result<Vec<Output>, Failure> {
    let nu = load_measure(&a.measure, g)?;
    let mut s = linspace(a.s_min, a.s_max, a.s_steps)?;
    if !s.contains(&0.0) {
        s.push(0.0);
        s.sort_by(f64::total_cmp);
    }
    let mut cfg = PressureConfig::new(a.n, a.trials, g.seed);
    cfg.burn_in = a.burn_in;
    cfg.s_max = a.s_clip;
    if let Some(d) = &a.direction {
        cfg = cfg.with_start(parse_direction(d, nu.dim())?);
    }
    let curve = estimate_pressure(&nu, &s, &cfg)?;
    let sd = curve.rate_se * (curve.trials as f64).sqrt();
    let spread = if sd > 0.0 { 4.0 * sd } else { 0.1 };
    let lo = a.eps_min.unwrap_or(curve.rate_mean - spread);
    let hi = a.eps_max.unwrap_or(curve.rate_mean + spread);
    let eps = linspace(lo, hi, a.eps_steps)?;
    let rate = legendre_transform(&curve, &eps)?;

    let zero = curve.s_grid.iter().position(|&x| x == 0.0).expect("s = 0 is on the grid");
    let order = std::iter::once(zero).chain((0..curve.s_grid.len()).filter(|&k| k != zero));
    let pressure_rows = order
        .map(|k| {
            vec![
                num(curve.s_grid[k]),
                num(curve.values[k]),
                num(curve.std_errors[k]),
                num(curve.raw_values[k]),
            ]
        })
        .collect();
    let rate_rows = (0..eps.len())
        .map(|k| vec![num(eps[k]), num(rate.values[k]), rate.saturated[k].to_string()])
        .collect();
    Ok(vec![
        Output::csv("pressure.csv", &["s", "lambda", "se", "raw"], pressure_rows),
        Output::csv("rate.csv", &["eps", "rate", "saturated"], rate_rows),
    ])
}
