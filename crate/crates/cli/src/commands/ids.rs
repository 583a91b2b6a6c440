use clap::{Args, ValueEnum};
use lyaplab::cocycle::DEFAULT_BURN_IN;
use lyaplab::schrodinger::{thouless_integral, DEFAULT_BOX_SIZE, DEFAULT_REALIZATIONS, DEFAULT_SAMPLES};
use lyaplab::{ids_curve, lyapunov_energy_curve, smoothed_ids, CocycleRunConfig, DisorderDistribution};
use serde::Serialize;
use serde_json::json;

use super::linspace;
use crate::output::{num, Output};
use crate::{Failure, Globals};

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Atoms,
    Uniform,
    Gauss,
}

#[derive(Args, Serialize)]
pub struct IdsArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// atoms: "v:w,v:w,…"; uniform: "a,b"; gauss: "mean,sd,a,b".
    #[arg(long, allow_hyphen_values = true)]
    pub params: String,
    /// Energy grid; defaults to ±(2.5 + max|V|).
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    /// Number of grid energies.
    #[arg(long, default_value_t = 41)]
    pub esteps: usize,
    /// Half-width L of the box [−L, L].
    #[arg(long, default_value_t = DEFAULT_BOX_SIZE)]
    pub box_size: usize,
    #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
    pub realizations: usize,
    /// Cauchy smoothing width; adds an N_eta column where the window allows.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Measured cocycle steps per trajectory for γ(E).
    #[arg(long, default_value_t = 10_000)]
    pub lyap_steps: usize,
    #[arg(long, default_value_t = 16)]
    pub lyap_trajectories: usize,
    /// Draws for the empirical transfer measure of continuous disorder.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
}

fn floats(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Failure::Input(format!("--params '{text}': {e}"))))
        .collect()
}

pub fn parse_dist(dist: Dist, params: &str) -> Result<DisorderDistribution, Failure> {
    let d = match dist {
        Dist::Atoms => {
            let mut values = vec![];
            let mut weights = vec![];
            for item in params.split(',') {
                let (v, w) = item
                    .split_once(':')
                    .ok_or_else(|| Failure::Input(format!("atom '{item}' must look like value:weight")))?;
                let p = |s: &str| s.trim().parse::<f64>().map_err(|e| Failure::Input(format!("atom '{item}': {e}")));
                values.push(p(v)?);
                weights.push(p(w)?);
            }
            DisorderDistribution::finite_atoms(values, weights)?
        }
        Dist::Uniform => match floats(params)?.as_slice() {
            [a, b] => DisorderDistribution::uniform(*a, *b)?,
            _ => return Err(Failure::Input("uniform needs --params a,b".into())),
        },
        Dist::Gauss => match floats(params)?.as_slice() {
            [m, s, a, b] => DisorderDistribution::truncated_gaussian(*m, *s, *a, *b)?,
            _ => return Err(Failure::Input("gauss needs --params mean,sd,a,b".into())),
        },
    };
    Ok(d)
}

pub fn run(a: &IdsArgs, g: &Globals) -> Result<Vec<Output>, Failure> {
    let mu = parse_dist(a.dist, &a.params)?;
    let edge = 2.5 + mu.max_abs();
    let energies = linspace(a.emin.unwrap_or(-edge), a.emax.unwrap_or(edge), a.esteps)?;
    let ids = ids_curve(&mu, &energies, a.box_size, a.realizations, g.seed)?;
    let cfg = CocycleRunConfig::new(a.lyap_steps + DEFAULT_BURN_IN, a.lyap_trajectories, DEFAULT_BURN_IN, g.seed)?;
    let gamma = lyapunov_energy_curve(&mu, &energies, &cfg, a.samples)?;
    let covers = ids.values[0] == 0.0 && ids.values[ids.values.len() - 1] == 1.0;

    let mut rows = vec![];
    let mut max_residual: Option<f64> = None;
    for (k, &e) in energies.iter().enumerate() {
        let smooth = match a.eta {
            Some(eta) => smoothed_ids(&ids, eta, e).map(num).unwrap_or_default(),
            None => String::new(),
        };
        let (th, res) = if covers {
            let th = thouless_integral(&ids.energies, &ids.values, e);
            let res = gamma[k].estimate.value - th;
            max_residual = Some(max_residual.unwrap_or(0.0).max(res.abs()));
            (num(th), num(res))
        } else {
            (String::new(), String::new())
        };
        rows.push(vec![
            num(e),
            num(ids.values[k]),
            smooth,
            num(gamma[k].gamma),
            num(gamma[k].estimate.std_error),
            gamma[k].clamped.to_string(),
            th,
            res,
        ]);
    }
    let report = json!({
        "grid_covers_spectrum": covers,
        "max_abs_thouless_residual": max_residual,
        "box_size": a.box_size,
        "realizations": a.realizations,
    });
    Ok(vec![
        Output::csv("ids.csv", &["E", "N", "N_eta", "gamma", "se", "clamped", "gamma_thouless", "residual"], rows),
        Output::json("thouless.json", report),
    ])
}
