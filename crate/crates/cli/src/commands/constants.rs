use std::path::PathBuf;

use clap::Args;
use lyaplab::constants::{balance_curve, concentration_constants, MethodOptimality};
use lyaplab::{
    holder_package_gld, ids_exponent, log_holder_package, markov_package, subtop_package, Regime, SpectralInputs,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::Output;
use crate::{Failure, Globals};

#[derive(Args, Serialize)]
pub struct ConstantsArgs {
    /// Eccentricity ecc(ν) > 1.
    #[arg(long)]
    pub ecc: Option<f64>,
    /// Lyapunov gap λ₁ − λ₂ (λ_k − λ_{k+1} with --k).
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value = "mh")]
    pub regime: String,
    /// Ambient dimension for the sub-top package.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Contraction τ^{(k,d)} for the sub-top constant.
    #[arg(long)]
    pub tau_k: Option<f64>,
    /// Second-largest eigenvalue modulus of a driving chain.
    #[arg(long)]
    pub rho_p: Option<f64>,
    /// Take diam_θ(ν) = 1.
    #[arg(long, conflicts_with = "diam_theta")]
    pub normalized_diam: bool,
    /// diam_θ(ν); defaults to 1.
    #[arg(long)]
    pub diam_theta: Option<f64>,
    /// Read ecc and gap from an `estimate` output file.
    #[arg(long)]
    pub from_estimate: Option<PathBuf>,
    /// Points of the α-grid for β(α) in [0, 1].
    #[arg(long, default_value_t = 101)]
    pub alpha_steps: usize,
}

fn from_estimate(path: &PathBuf) -> Result<(Option<f64>, Option<f64>), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: line {}: {e}", path.display(), e.line())))?;
    let records = doc["data"].as_array().ok_or_else(|| Failure::Input(format!("{}: no estimate records", path.display())))?;
    let find = |q: &str| records.iter().find(|r| r["quantity"] == q).and_then(|r| r["value"].as_f64());
    Ok((find("eccentricity"), find("gap")))
}

fn curve_json(m: &MethodOptimality, beta_star: f64) -> Value {
    json!({
        "gamma": m.gamma,
        "alpha_star": m.alpha_star,
        "beta_max": m.beta_max,
        "grid_max": m.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        "beta_star": beta_star,
        "points": m.points,
    })
}

pub fn run(a: &ConstantsArgs, _g: &Globals) -> Result<Vec<Output>, Failure> {
    let regime: Regime = a.regime.parse().map_err(|e: lyaplab::Error| Failure::Input(e.to_string()))?;
    let (mut ecc, mut gap) = (a.ecc, a.gap);
    if let Some(p) = &a.from_estimate {
        let (e, g) = from_estimate(p)?;
        ecc = ecc.or(e);
        gap = gap.or(g);
    }
    let diam_theta = if a.normalized_diam { 1.0 } else { a.diam_theta.unwrap_or(1.0) };
    let mut doc = serde_json::Map::new();
    doc.insert("log_holder".into(), json!(log_holder_package(a.theta, regime)?));
    doc.insert("ids_exponent".into(), json!({ "regime": regime, "theta": a.theta, "kappa_ids": ids_exponent(a.theta, regime)? }));

    if let Some(gap) = gap {
        let ecc = ecc.ok_or_else(|| Failure::Input("--gap needs --ecc (or --from-estimate)".into()))?;
        let inputs = SpectralInputs::new(ecc, gap, a.theta, diam_theta);
        if let (Some(d), Some(k)) = (a.d, a.k) {
            doc.insert("subtop".into(), json!(subtop_package(ecc, gap, a.theta, d, k, a.tau_k)?));
        } else {
            let report = holder_package_gld(&inputs).map_err(|e| match e {
                lyaplab::Error::DegenerateGap(_) => Failure::Input(format!(
                    "{e}: drop --gap and pass --regime mh or --regime perpetuity"
                )),
                other => other.into(),
            })?;
            let n = a.alpha_steps.max(2);
            let alphas: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let curve = balance_curve(report.gamma, &alphas)?;
            doc.insert("method_optimality".into(), curve_json(&curve, report.beta_star));
            doc.insert("concentration".into(), json!(concentration_constants(ecc, report.tau)?));
            doc.insert("holder".into(), json!(report));
        }
        if let Some(rho) = a.rho_p {
            doc.insert("markov".into(), json!(markov_package(rho, &inputs)?));
        }
    } else if a.rho_p.is_some() || a.d.is_some() || a.k.is_some() {
        return Err(Failure::Input("--rho-p, --d and --k need --gap".into()));
    }
    Ok(vec![Output::json("constants.json", Value::Object(doc))])
}
