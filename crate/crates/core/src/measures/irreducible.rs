//! Search for finite unions of lines invariant under every atom (d = 2).

use serde::Serialize;

use super::FiniteMatrixMeasure;
use crate::error::{Error, Result};
use crate::gl::{projective_act, projective_metric, ProjectivePoint, SquareMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Irreducibility {
    Irreducible,
    ReducibleWitness(Vec<ProjectivePoint>),
    Inconclusive,
}

#[derive(Clone, Copy, Debug)]
pub struct IrreducibilityOptions {
    /// Largest invariant union searched for.
    pub max_lines: usize,
    /// Two lines are equal when their projective distance is below this.
    pub line_tol: f64,
}

impl Default for IrreducibilityOptions {
    fn default() -> Self {
        Self { max_lines: 64, line_tol: 1e-9 }
    }
}

enum Eigenlines {
    All,
    Lines(Vec<ProjectivePoint>),
    Degenerate(Vec<ProjectivePoint>),
}

fn eigenlines(m: &[f64]) -> Eigenlines {
    let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if b.abs() <= 1e-14 * scale && c.abs() <= 1e-14 * scale && (a - d).abs() <= 1e-14 * scale {
        return Eigenlines::All;
    }
    let t = a + d;
    let det = a * d - b * c;
    let disc = t * t - 4.0 * det;
    let near_zero = disc.abs() <= 1e-10 * (t * t + det.abs());
    if disc < 0.0 && !near_zero {
        return Eigenlines::Lines(Vec::new());
    }
    let r = disc.max(0.0).sqrt();
    let mut lines: Vec<ProjectivePoint> = Vec::new();
    for lambda in [(t + r) / 2.0, (t - r) / 2.0] {
        let v1 = [b, lambda - a];
        let v2 = [lambda - d, c];
        let v = if v1[0].hypot(v1[1]) >= v2[0].hypot(v2[1]) { v1 } else { v2 };
        if let Ok(p) = ProjectivePoint::new(&v) {
            if !lines.iter().any(|q| projective_metric(q, &p).unwrap_or(1.0) < 1e-12) {
                lines.push(p);
            }
        }
    }
    if near_zero && disc != 0.0 {
        Eigenlines::Degenerate(lines)
    } else {
        Eigenlines::Lines(lines)
    }
}

/// Forward orbit of `seed` under the atoms, or `None` once it exceeds `max_lines`.
fn orbit(atoms: &[&SquareMatrix], seed: ProjectivePoint, opts: IrreducibilityOptions) -> Option<Vec<ProjectivePoint>> {
    let mut pts = vec![seed];
    let mut next = 0;
    while next < pts.len() {
        let p = pts[next].clone();
        next += 1;
        for g in atoms {
            let q = projective_act(g, &p).ok()?;
            if !pts.iter().any(|x| projective_metric(x, &q).unwrap_or(1.0) < opts.line_tol) {
                if pts.len() == opts.max_lines {
                    return None;
                }
                pts.push(q);
            }
        }
    }
    Some(pts)
}

/// True when every atom maps `lines` bijectively onto itself. Rejects
/// orbits that only close up because iterates crept within tolerance.
fn permuted(atoms: &[&SquareMatrix], lines: &[ProjectivePoint], opts: IrreducibilityOptions) -> bool {
    atoms.iter().all(|g| {
        let mut hit = vec![false; lines.len()];
        lines.iter().all(|p| {
            let Ok(q) = projective_act(g, p) else { return false };
            let Some(k) = lines.iter().position(|x| projective_metric(x, &q).unwrap_or(1.0) < opts.line_tol) else {
                return false;
            };
            !std::mem::replace(&mut hit[k], true)
        })
    })
}

/// Decides strong irreducibility of a planar measure by orbit closure of
/// candidate lines (eigenlines of atoms and of pairwise products, the axes
/// and one generic line).
pub fn strong_irreducibility_check_d2(
    mu: &FiniteMatrixMeasure,
    opts: IrreducibilityOptions,
) -> Result<Irreducibility> {
    if mu.dim() != 2 {
        return Err(Error::BadOrder(format!("irreducibility check needs d = 2, got {}", mu.dim())));
    }
    let atoms: Vec<&SquareMatrix> = mu.support().collect();
    let mut seeds: Vec<ProjectivePoint> = Vec::new();
    let mut degenerate = false;
    let mut all_scalar = true;
    let mut consider = |entries: &[f64], seeds: &mut Vec<ProjectivePoint>, is_atom: bool| match eigenlines(entries) {
        Eigenlines::All => {}
        Eigenlines::Lines(ls) => {
            if is_atom {
                all_scalar = false;
            }
            seeds.extend(ls);
        }
        Eigenlines::Degenerate(ls) => {
            if is_atom {
                all_scalar = false;
            }
            degenerate = true;
            seeds.extend(ls);
        }
    };
    for g in &atoms {
        consider(g.entries(), &mut seeds, true);
    }
    for g in &atoms {
        for h in &atoms {
            if let Ok(gh) = g.mul(h) {
                consider(gh.entries(), &mut seeds, false);
            }
        }
    }
    if all_scalar {
        return Ok(Irreducibility::ReducibleWitness(vec![ProjectivePoint::axis(2, 0)]));
    }
    seeds.push(ProjectivePoint::axis(2, 0));
    seeds.push(ProjectivePoint::axis(2, 1));
    seeds.push(ProjectivePoint::new(&[0.8191520442889918, 0.5735764363510461]).expect("unit"));

    let mut witness: Vec<ProjectivePoint> = Vec::new();
    for seed in seeds {
        if witness.iter().any(|w| projective_metric(w, &seed).unwrap_or(1.0) < opts.line_tol) {
            continue;
        }
        if let Some(lines) = orbit(&atoms, seed, opts).filter(|l| permuted(&atoms, l, opts)) {
            for l in lines {
                if witness.len() < opts.max_lines
                    && !witness.iter().any(|w| projective_metric(w, &l).unwrap_or(1.0) < opts.line_tol)
                {
                    witness.push(l);
                }
            }
        }
    }
    if !witness.is_empty() {
        Ok(Irreducibility::ReducibleWitness(witness))
    } else if degenerate {
        Ok(Irreducibility::Inconclusive)
    } else {
        Ok(Irreducibility::Irreducible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn axes_witness(r: Irreducibility) {
        match r {
            Irreducibility::ReducibleWitness(lines) => {
                assert_eq!(lines.len(), 2);
                assert!(lines.contains(&ProjectivePoint::axis(2, 0)));
                assert!(lines.contains(&ProjectivePoint::axis(2, 1)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagonal_is_reducible() {
        let m = FiniteMatrixMeasure::dirac(SquareMatrix::diag(&[2.0, 0.5]).unwrap());
        axes_witness(strong_irreducibility_check_d2(&m, Default::default()).unwrap());
        let m = FiniteMatrixMeasure::uniform(vec![
            SquareMatrix::diag(&[2.0, 0.5]).unwrap(),
            SquareMatrix::diag(&[3.0, 1.0]).unwrap(),
        ])
        .unwrap();
        axes_witness(strong_irreducibility_check_d2(&m, Default::default()).unwrap());
    }

    #[test]
    fn rotated_pair_is_irreducible() {
        let a0 = SquareMatrix::diag(&[2.0, 0.5]).unwrap();
        let r = SquareMatrix::rotation(FRAC_PI_3);
        let a1 = r.mul(&a0).unwrap().mul(&r.inverse()).unwrap();
        let m = FiniteMatrixMeasure::uniform(vec![a0, a1]).unwrap();
        assert_eq!(strong_irreducibility_check_d2(&m, Default::default()).unwrap(), Irreducibility::Irreducible);
    }

    #[test]
    fn finite_rotation_group_found() {
        // quarter turn with a diagonal reflection: invariant pair of axes
        let m = FiniteMatrixMeasure::uniform(vec![
            SquareMatrix::rotation(std::f64::consts::FRAC_PI_2),
            SquareMatrix::diag(&[1.0, -1.0]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            strong_irreducibility_check_d2(&m, Default::default()).unwrap(),
            Irreducibility::ReducibleWitness(_)
        ));
        let irr = FiniteMatrixMeasure::dirac(SquareMatrix::rotation(1.0));
        assert_eq!(strong_irreducibility_check_d2(&irr, Default::default()).unwrap(), Irreducibility::Irreducible);
    }

    #[test]
    fn wrong_dimension() {
        let m = FiniteMatrixMeasure::dirac(SquareMatrix::identity(3));
        assert!(matches!(strong_irreducibility_check_d2(&m, Default::default()), Err(Error::BadOrder(_))));
    }
}
