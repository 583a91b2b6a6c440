//! Invertible matrices, the group metric, projective space and exterior powers.
//!
//! Matrices are small (d ≤ 10 for user input, up to 252 for compound
//! matrices), so everything here is dense. Singular values, the inverse and
//! the log-determinant are computed once at construction and cached.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension accepted for user-supplied matrices.
pub const MAX_INPUT_DIM: usize = 10;
/// Largest dimension of any matrix, including exterior-power lifts (C(10,5)).
pub const MAX_DIM: usize = 252;
/// Default relative invertibility threshold: |det| ≥ tol·‖g‖^d.
pub const DEFAULT_INVERTIBILITY_TOL: f64 = 1e-12;

/// A dense real d×d matrix known to be invertible.
#[derive(Clone, Debug)]
pub struct SquareMatrix {
    dim: usize,
    entries: Vec<f64>,
    inverse: Vec<f64>,
    singular_values: Vec<f64>,
}

impl PartialEq for SquareMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.entries == other.entries
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl SquareMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite or singular input.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(dim, entries, DEFAULT_INVERTIBILITY_TOL)
    }

    pub fn with_tolerance(dim: usize, entries: Vec<f64>, tol: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::BadOrder(format!("matrix dimension {dim} outside 1..={MAX_DIM}")));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimMismatch { expected: dim * dim, found: entries.len() });
        }
        if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite matrix entry {x}")));
        }
        let m = DMatrix::from_row_slice(dim, dim, &entries);
        let mut singular_values: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let top = singular_values[0];
        let log_det: f64 = singular_values.iter().map(|s| s.ln()).sum();
        let threshold = tol.ln() + dim as f64 * top.ln();
        if !(top > 0.0) || !(log_det >= threshold) {
            return Err(Error::SingularMatrix { log_det, threshold });
        }
        let inv = m
            .try_inverse()
            .ok_or(Error::SingularMatrix { log_det, threshold })?;
        let inverse = row_major(&inv);
        if inverse.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularMatrix { log_det, threshold });
        }
        Ok(Self { dim, entries, inverse, singular_values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimMismatch { expected: dim, found: r.len() });
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut e = vec![0.0; dim * dim];
        for i in 0..dim {
            e[i * dim + i] = 1.0;
        }
        Self::new(dim, e).expect("identity is invertible")
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let d = values.len();
        let mut e = vec![0.0; d * d];
        for (i, v) in values.iter().enumerate() {
            e[i * d + i] = *v;
        }
        Self::new(d, e)
    }

    /// Planar rotation by `angle` (counter-clockwise).
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(2, vec![c, -s, s, c]).expect("rotations are invertible")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn inverse_entries(&self) -> &[f64] {
        &self.inverse
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn norm(&self) -> f64 {
        self.singular_values[0]
    }

    /// ‖g⁻¹‖ = 1/σ_min.
    pub fn inverse_norm(&self) -> f64 {
        1.0 / self.singular_values[self.dim - 1]
    }

    pub fn eccentricity(&self) -> f64 {
        (self.norm() * self.inverse_norm()).max(1.0)
    }

    pub fn log_abs_det(&self) -> f64 {
        self.singular_values.iter().map(|s| s.ln()).sum()
    }

    pub fn det(&self) -> f64 {
        det_lu(self.dim, &self.entries)
    }

    pub fn inverse(&self) -> SquareMatrix {
        SquareMatrix {
            dim: self.dim,
            entries: self.inverse.clone(),
            inverse: self.entries.clone(),
            singular_values: self.singular_values.iter().rev().map(|s| 1.0 / s).collect(),
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        check_dim(self.dim, other.dim)?;
        let d = self.dim;
        let mut e = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                for j in 0..d {
                    e[i * d + j] += a * other.entries[k * d + j];
                }
            }
        }
        SquareMatrix::with_tolerance(d, e, 0.0)
    }

    /// `out = g·v`.
    #[inline]
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        matvec(self.dim, &self.entries, v, out);
    }

    /// Largest absolute entry difference; used for duplicate detection.
    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn matvec(d: usize, m: &[f64], v: &[f64], out: &mut [f64]) {
    for i in 0..d {
        let row = &m[i * d..(i + 1) * d];
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

/// Spectral norm of an arbitrary (possibly singular) square matrix.
pub(crate) fn spectral_norm(d: usize, entries: &[f64]) -> f64 {
    if d == 2 {
        // closed form: σ₁² = (s + sqrt(s² − 4 det²)) / 2 with s = ‖·‖_F²
        let (a, b, c, e) = (entries[0], entries[1], entries[2], entries[3]);
        let s = a * a + b * b + c * c + e * e;
        let det = a * e - b * c;
        let disc = ((s - 2.0 * det) * (s + 2.0 * det)).max(0.0);
        return ((s + disc.sqrt()) / 2.0).sqrt();
    }
    let m = DMatrix::from_row_slice(d, d, entries);
    m.svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Determinant by LU with partial pivoting.
pub(crate) fn det_lu(n: usize, entries: &[f64]) -> f64 {
    match n {
        0 => return 1.0,
        1 => return entries[0],
        2 => return entries[0] * entries[3] - entries[1] * entries[2],
        _ => {}
    }
    let mut a = entries.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
    }
    det
}

pub fn operator_norm(g: &SquareMatrix) -> f64 {
    g.norm()
}

pub fn eccentricity(g: &SquareMatrix) -> f64 {
    g.eccentricity()
}

/// δ(g, h) = ‖g − h‖ + ‖g⁻¹ − h⁻¹‖.
pub fn group_delta(g: &SquareMatrix, h: &SquareMatrix) -> Result<f64> {
    check_dim(g.dim, h.dim)?;
    if g.entries == h.entries {
        return Ok(0.0);
    }
    let d = g.dim;
    let diff: Vec<f64> = g.entries.iter().zip(&h.entries).map(|(a, b)| a - b).collect();
    let diff_inv: Vec<f64> = g.inverse.iter().zip(&h.inverse).map(|(a, b)| a - b).collect();
    Ok(spectral_norm(d, &diff) + spectral_norm(d, &diff_inv))
}

/// A point of projective space, stored as a unit vector whose first
/// non-negligible coordinate is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    rep: Vec<f64>,
}

impl ProjectivePoint {
    pub fn new(v: &[f64]) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidInput("empty vector".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite vector".into()));
        }
        let n = norm2(v);
        if !(n > 0.0) {
            return Err(Error::InvalidInput("zero vector has no projective class".into()));
        }
        let mut rep: Vec<f64> = v.iter().map(|x| x / n).collect();
        canonical_sign(&mut rep);
        Ok(Self { rep })
    }

    /// The coordinate axis `[e_i]` in dimension `dim`.
    pub fn axis(dim: usize, i: usize) -> Self {
        let mut rep = vec![0.0; dim];
        rep[i] = 1.0;
        Self { rep }
    }

    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    pub fn rep(&self) -> &[f64] {
        &self.rep
    }
}

fn canonical_sign(rep: &mut [f64]) {
    if let Some(first) = rep.iter().find(|x| x.abs() > 1e-300) {
        if *first < 0.0 {
            rep.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

#[inline]
pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// |u ∧ v| / (‖u‖‖v‖), the sine of the angle between two lines.
pub fn projective_metric(p: &ProjectivePoint, q: &ProjectivePoint) -> Result<f64> {
    check_dim(p.dim(), q.dim())?;
    Ok(wedge_sine(&p.rep, &q.rep))
}

pub(crate) fn wedge_sine(u: &[f64], v: &[f64]) -> f64 {
    let d = u.len();
    let mut w2 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            let w = u[i] * v[j] - u[j] * v[i];
            w2 += w * w;
        }
    }
    let nu = norm2(u);
    let nv = norm2(v);
    (w2.sqrt() / (nu * nv)).clamp(0.0, 1.0)
}

pub fn projective_act(g: &SquareMatrix, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    check_dim(g.dim, p.dim())?;
    let mut out = vec![0.0; g.dim];
    g.apply(&p.rep, &mut out);
    ProjectivePoint::new(&out)
}

/// φ(g, [v]) = log(‖gv‖ / ‖v‖).
pub fn log_norm_cocycle(g: &SquareMatrix, p: &ProjectivePoint) -> Result<f64> {
    check_dim(g.dim, p.dim())?;
    let mut out = vec![0.0; g.dim];
    g.apply(&p.rep, &mut out);
    Ok(norm2(&out).ln())
}

/// Lipschitz constants of the projective action and of φ on a set of eccentricity `ecc`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricConstants {
    pub ecc: f64,
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    pub diam_theta: f64,
}

impl MetricConstants {
    pub fn new(ecc: f64, diam_theta: f64) -> Result<Self> {
        if !(ecc >= 1.0) || !ecc.is_finite() {
            return Err(Error::BadEccentricity(ecc));
        }
        Ok(Self { ecc, c1: ecc, c2: ecc * ecc, l: 2.0 * ecc, diam_theta })
    }
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All k-subsets of {0..d} in lexicographic order.
pub fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(d, k));
    if k == 0 || k > d {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < d - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The k-th compound matrix Λᵏg, indexed by lexicographically ordered k-subsets.
pub fn exterior_power(g: &SquareMatrix, k: usize) -> Result<SquareMatrix> {
    let d = g.dim;
    if d > MAX_INPUT_DIM {
        return Err(Error::BadOrder(format!("exterior powers need d ≤ {MAX_INPUT_DIM}, got {d}")));
    }
    if k == 0 || k > d {
        return Err(Error::BadOrder(format!("exterior order {k} outside 1..={d}")));
    }
    if k == 1 {
        return Ok(g.clone());
    }
    let subsets = k_subsets(d, k);
    let m = subsets.len();
    let mut entries = vec![0.0; m * m];
    let mut minor = vec![0.0; k * k];
    for (r, rows) in subsets.iter().enumerate() {
        for (c, cols) in subsets.iter().enumerate() {
            for (a, &i) in rows.iter().enumerate() {
                for (b, &j) in cols.iter().enumerate() {
                    minor[a * k + b] = g.entries[i * d + j];
                }
            }
            entries[r * m + c] = det_lu(k, &minor);
        }
    }
    SquareMatrix::with_tolerance(m, entries, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, SQRT_2};

    fn diag2() -> SquareMatrix {
        SquareMatrix::diag(&[2.0, 0.5]).unwrap()
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&SquareMatrix::identity(2)), 1.0);
        assert!((operator_norm(&diag2()) - 2.0).abs() < 1e-14);
        // oracle: sqrt of the largest eigenvalue of gᵀg = [[1,1],[1,2]]
        let g = SquareMatrix::new(2, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        let gtg_top = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((operator_norm(&g) - gtg_top.sqrt()).abs() < 1e-12);
        assert!((operator_norm(&g) - 1.618034).abs() < 1e-6);
    }

    #[test]
    fn eccentricity_examples() {
        assert!((eccentricity(&SquareMatrix::identity(3)) - 1.0).abs() < 1e-14);
        assert!((eccentricity(&diag2()) - 4.0).abs() < 1e-12);
        assert!((eccentricity(&SquareMatrix::rotation(FRAC_PI_3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_input_rejected() {
        let err = SquareMatrix::new(2, vec![1.0, 2.0, 2.0, 4.0]).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { .. }));
        let err = SquareMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        // configurable threshold
        let near = vec![1.0, 0.0, 0.0, 1e-9];
        assert!(SquareMatrix::new(2, near.clone()).is_ok());
        assert!(SquareMatrix::with_tolerance(2, near, 1e-6).is_err());
    }

    #[test]
    fn group_delta_examples() {
        let i = SquareMatrix::identity(2);
        let two = SquareMatrix::diag(&[2.0, 2.0]).unwrap();
        assert_eq!(group_delta(&i, &i).unwrap(), 0.0);
        assert!((group_delta(&i, &two).unwrap() - 1.5).abs() < 1e-14);
        let a = diag2();
        let r = SquareMatrix::rotation(FRAC_PI_3);
        let v = group_delta(&a, &r).unwrap();
        let w = group_delta(&a.inverse(), &r.inverse()).unwrap();
        assert!(v > 0.0);
        assert!((v - w).abs() < 1e-12);
        // by hand: ‖A − R‖ + ‖A⁻¹ − R⁻¹‖ with the same two spectral norms swapped
        let diff: Vec<f64> = a.entries().iter().zip(r.entries()).map(|(x, y)| x - y).collect();
        let m = DMatrix::from_row_slice(2, 2, &diff);
        let n1 = m.svd(false, false).singular_values.max();
        let diff2: Vec<f64> = a.inverse_entries().iter().zip(r.inverse_entries()).map(|(x, y)| x - y).collect();
        let n2 = DMatrix::from_row_slice(2, 2, &diff2).svd(false, false).singular_values.max();
        assert!((v - (n1 + n2)).abs() < 1e-12);
        assert!(matches!(
            group_delta(&i, &SquareMatrix::identity(3)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn projective_metric_examples() {
        let e1 = ProjectivePoint::axis(2, 0);
        let e2 = ProjectivePoint::axis(2, 1);
        let diag = ProjectivePoint::new(&[1.0, 1.0]).unwrap();
        assert_eq!(projective_metric(&e1, &e1).unwrap(), 0.0);
        assert!((projective_metric(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        assert!((projective_metric(&e1, &diag).unwrap() - SQRT_2 / 2.0).abs() < 1e-12);
        let neg = ProjectivePoint::new(&[-1.0, -1.0]).unwrap();
        assert_eq!(neg, diag);
    }

    #[test]
    fn projective_act_examples() {
        let v = ProjectivePoint::new(&[0.3, -0.7]).unwrap();
        assert_eq!(projective_act(&SquareMatrix::identity(2), &v).unwrap(), v);
        let e1 = ProjectivePoint::axis(2, 0);
        assert_eq!(projective_act(&diag2(), &e1).unwrap(), e1);
        let img = projective_act(&SquareMatrix::rotation(FRAC_PI_2), &e1).unwrap();
        assert!(projective_metric(&img, &ProjectivePoint::axis(2, 1)).unwrap() < 1e-15);
    }

    #[test]
    fn log_norm_cocycle_examples() {
        let v = ProjectivePoint::new(&[0.3, -0.7]).unwrap();
        assert!(log_norm_cocycle(&SquareMatrix::identity(2), &v).unwrap().abs() < 1e-15);
        let e1 = ProjectivePoint::axis(2, 0);
        assert!((log_norm_cocycle(&diag2(), &e1).unwrap() - 2f64.ln()).abs() < 1e-15);
        let d = ProjectivePoint::new(&[1.0, 1.0]).unwrap();
        let expected = 0.5 * (17.0f64 / 8.0).ln();
        assert!((log_norm_cocycle(&diag2(), &d).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.37689).abs() < 1e-5);
    }

    #[test]
    fn exterior_power_examples() {
        let g = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        assert_eq!(exterior_power(&g, 1).unwrap(), g);
        let top = exterior_power(&g, 2).unwrap();
        assert_eq!(top.dim(), 1);
        assert!((top.get(0, 0) - (-1.0)).abs() < 1e-14);
        let d = SquareMatrix::diag(&[3.0, 2.0, 1.0]).unwrap();
        let l2 = exterior_power(&d, 2).unwrap();
        // subsets {0,1},{0,2},{1,2} → 6, 3, 2
        let expected = SquareMatrix::diag(&[6.0, 3.0, 2.0]).unwrap();
        assert!(l2.max_abs_diff(&expected) < 1e-14);
        assert!(matches!(exterior_power(&d, 0), Err(Error::BadOrder(_))));
        assert!(matches!(exterior_power(&d, 4), Err(Error::BadOrder(_))));
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(k_subsets(4, 2), vec![
            vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]
        ]);
        assert_eq!(k_subsets(10, 5).len(), 252);
        assert_eq!(k_subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(10, 5), 252);
    }

    #[test]
    fn metric_constants_at_identity() {
        let c = MetricConstants::new(1.0, 0.0).unwrap();
        assert_eq!((c.c1, c.c2, c.l), (1.0, 1.0, 2.0));
        let c = MetricConstants::new(4.0, 1.0).unwrap();
        assert_eq!((c.c1, c.c2, c.l), (4.0, 16.0, 8.0));
        assert!(MetricConstants::new(0.5, 0.0).is_err());
    }

    /// Random matrix with max(‖g‖, ‖g⁻¹‖) ≤ bound, built as U·diag(s)·V with
    /// rotations U, V (d = 2).
    fn bounded2(a: f64, b: f64, s1: f64, s2: f64) -> SquareMatrix {
        let u = SquareMatrix::rotation(a);
        let v = SquareMatrix::rotation(b);
        let s = SquareMatrix::diag(&[s1, s2]).unwrap();
        u.mul(&s).unwrap().mul(&v).unwrap()
    }

    fn arb_bounded(e: f64) -> impl Strategy<Value = SquareMatrix> {
        (0.0..6.3f64, 0.0..6.3f64, (1.0 / e)..e, (1.0 / e)..e, any::<bool>()).prop_map(
            |(a, b, s1, s2, flip)| {
                let g = bounded2(a, b, s1, s2);
                if flip {
                    SquareMatrix::diag(&[1.0, -1.0]).unwrap().mul(&g).unwrap()
                } else {
                    g
                }
            },
        )
    }

    fn arb_matrix(d: usize) -> impl Strategy<Value = SquareMatrix> {
        proptest::collection::vec(-2.0..2.0f64, d * d)
            .prop_filter_map("well conditioned", move |e| {
                SquareMatrix::new(d, e).ok().filter(|g| g.eccentricity() < 1e3)
            })
    }

    fn arb_unit(d: usize) -> impl Strategy<Value = ProjectivePoint> {
        proptest::collection::vec(-1.0..1.0f64, d)
            .prop_filter_map("nonzero", |v| ProjectivePoint::new(&v).ok())
    }

    proptest! {
        #[test]
        fn delta_metric_and_euclid_equivalence(g in arb_bounded(3.0), h in arb_bounded(3.0)) {
            let e: f64 = 3.0;
            let d = group_delta(&g, &h).unwrap();
            prop_assert!((d - group_delta(&h, &g).unwrap()).abs() < 1e-12);
            prop_assert!((d - group_delta(&g.inverse(), &h.inverse()).unwrap()).abs() < 1e-10);
            let diff: Vec<f64> = g.entries().iter().zip(h.entries()).map(|(a, b)| a - b).collect();
            let eu = spectral_norm(2, &diff);
            prop_assert!(eu <= d + 1e-12);
            prop_assert!(d <= (1.0 + e * e) * eu + 1e-10);
            prop_assert_eq!(group_delta(&g, &g).unwrap(), 0.0);
        }

        #[test]
        fn group_operation_lipschitz(g in arb_bounded(2.0), g2 in arb_bounded(2.0),
                                     h in arb_bounded(2.0), h2 in arb_bounded(2.0)) {
            // products of elements with norms ≤ √E stay within norm bound E
            let e = 2.0;
            let lhs = group_delta(&g.mul(&h).unwrap(), &g2.mul(&h2).unwrap()).unwrap();
            let rhs = 2.0 * e * (group_delta(&g, &g2).unwrap() + group_delta(&h, &h2).unwrap());
            prop_assert!(lhs <= rhs + 1e-10);
        }

        #[test]
        fn projective_contraction_d2(g in arb_matrix(2), u in arb_unit(2), v in arb_unit(2)) {
            let lhs = projective_metric(&projective_act(&g, &u).unwrap(), &projective_act(&g, &v).unwrap()).unwrap();
            let ecc = g.eccentricity();
            prop_assert!(lhs <= ecc * ecc * projective_metric(&u, &v).unwrap() + 1e-12);
        }

        #[test]
        fn projective_contraction_d3(g in arb_matrix(3), u in arb_unit(3), v in arb_unit(3)) {
            let lhs = projective_metric(&projective_act(&g, &u).unwrap(), &projective_act(&g, &v).unwrap()).unwrap();
            let ecc = g.eccentricity();
            prop_assert!(lhs <= ecc * ecc * projective_metric(&u, &v).unwrap() + 1e-12);
        }

        #[test]
        fn displacement_and_phi_lipschitz(g in arb_matrix(2), h in arb_matrix(2), v in arb_unit(2)) {
            let diff: Vec<f64> = g.entries().iter().zip(h.entries()).map(|(a, b)| a - b).collect();
            let bound = g.inverse_norm().max(h.inverse_norm()) * spectral_norm(2, &diff);
            let disp = projective_metric(&projective_act(&g, &v).unwrap(), &projective_act(&h, &v).unwrap()).unwrap();
            prop_assert!(disp <= bound + 1e-12);
            let dphi = (log_norm_cocycle(&g, &v).unwrap() - log_norm_cocycle(&h, &v).unwrap()).abs();
            prop_assert!(dphi <= bound + 1e-12);
        }

        #[test]
        fn phi_bounded_by_log_ecc(g in arb_matrix(3), v in arb_unit(3)) {
            let phi = log_norm_cocycle(&g, &v).unwrap();
            // |φ| ≤ log ecc holds after normalizing g to unit determinant scale
            let scale = g.log_abs_det() / 3.0;
            prop_assert!((phi - scale).abs() <= g.eccentricity().ln() + 1e-12);
            let neg: Vec<f64> = v.rep().iter().map(|x| -x).collect();
            let phi_neg = log_norm_cocycle(&g, &ProjectivePoint::new(&neg).unwrap()).unwrap();
            prop_assert!((phi - phi_neg).abs() < 1e-14);
        }
    }
}
