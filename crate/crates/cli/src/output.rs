//! Run manifests and output files.
//!
//! Data files carry the manifest (command, flags, seed, version, file names).
//! Thread count and wall time go to a separate `run.json`, so data files from
//! two runs of the same manifest compare byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub flags: Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, flags: Value, seed: u64) -> Self {
        Self { command: command.into(), flags, seed, version: env!("CARGO_PKG_VERSION").into(), outputs: vec![] }
    }
}

/// A named output file body, either a JSON record set or a CSV table.
pub enum Body {
    Json(Value),
    Csv { header: Vec<String>, rows: Vec<Vec<String>> },
}

pub struct Output {
    pub name: String,
    pub body: Body,
}

impl Output {
    pub fn json(name: &str, value: Value) -> Self {
        Self { name: name.into(), body: Body::Json(value) }
    }

    pub fn csv(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Self { name: name.into(), body: Body::Csv { header: header.iter().map(|s| s.to_string()).collect(), rows } }
    }

    fn render(&self, manifest: &Manifest) -> Result<String, Failure> {
        match &self.body {
            Body::Json(v) => {
                let doc = serde_json::json!({ "manifest": manifest, "data": v });
                Ok(serde_json::to_string_pretty(&doc).map_err(|e| Failure::Numerical(e.to_string()))? + "\n")
            }
            Body::Csv { header, rows } => {
                let mut out = format!("# manifest: {}\n", serde_json::to_string(manifest).expect("manifest serializes"));
                let mut w = csv::Writer::from_writer(vec![]);
                w.write_record(header).map_err(|e| Failure::Numerical(e.to_string()))?;
                for r in rows {
                    w.write_record(r).map_err(|e| Failure::Numerical(e.to_string()))?;
                }
                let bytes = w.into_inner().map_err(|e| Failure::Numerical(e.to_string()))?;
                out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
                Ok(out)
            }
        }
    }
}

#[derive(Serialize)]
struct RunInfo {
    threads: usize,
    wall_time_ms: f64,
}

/// Writes every output into `dir` (plus `run.json`), or to stdout.
pub fn emit(
    mut manifest: Manifest,
    outputs: &[Output],
    dir: Option<&Path>,
    elapsed: Duration,
) -> Result<Vec<PathBuf>, Failure> {
    manifest.outputs = outputs.iter().map(|o| o.name.clone()).collect();
    let mut written = vec![];
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            for o in outputs {
                let path = dir.join(&o.name);
                fs::write(&path, o.render(&manifest)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                written.push(path);
            }
            let info = RunInfo { threads: rayon::current_num_threads(), wall_time_ms: elapsed.as_secs_f64() * 1e3 };
            let path = dir.join("run.json");
            fs::write(&path, serde_json::to_string_pretty(&info).expect("run info serializes") + "\n")
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        }
        None => {
            for (k, o) in outputs.iter().enumerate() {
                if k > 0 {
                    println!();
                }
                print!("{}", o.render(&manifest)?);
            }
        }
    }
    Ok(written)
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// An estimate record: quantity, value, standard error, steps, trajectories, seed.
pub fn record(quantity: &str, value: f64, std_error: f64, n: usize, t: usize, seed: u64) -> Value {
    serde_json::json!({ "quantity": quantity, "value": value, "std_error": std_error, "n": n, "T": t, "seed": seed })
}

pub fn estimate_record(quantity: &str, e: &lyaplab::CocycleEstimate) -> Value {
    record(quantity, e.value, e.std_error, e.n, e.trajectories, e.seed)
}
