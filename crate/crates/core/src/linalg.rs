//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const TWO_PI_I: C64 = C64 {
    re: 0.0,
    im: 2.0 * std::f64::consts::PI,
};

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Max-entry norm.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 2 {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det.norm() == 0.0 || !det.is_finite() {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        return Ok(CMat::from_row_slice(
            2,
            2,
            &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det],
        ));
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))
}

pub fn determinant(m: &CMat) -> C64 {
    if m.nrows() == 2 && m.ncols() == 2 {
        return m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    }
    m.determinant()
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = determinant(m);
            let disc = (tr * tr - 4.0 * det).sqrt();
            // avoid cancellation in the smaller root
            let big = if (tr + disc).norm() >= (tr - disc).norm() {
                (tr + disc) / 2.0
            } else {
                (tr - disc) / 2.0
            };
            let small = if big.norm() == 0.0 { C64::new(0.0, 0.0) } else { det / big };
            vec![big, small]
        }
        _ => nalgebra::linalg::Schur::new(m.clone())
            .eigenvalues()
            .map(|v| v.iter().cloned().collect())
            .unwrap_or_default(),
    }
}

/// Distance between two multisets of complex numbers under the best matching.
///
/// Uses exhaustive permutation search, fine for the small dimensions we work with.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let d = p
            .iter()
            .enumerate()
            .map(|(i, &j)| (a[i] - b[j]).norm())
            .fold(0.0_f64, f64::max);
        best = best.min(d);
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// `m * x * m^{-1}`.
pub fn conjugate(m: &CMat, x: &CMat) -> Result<CMat> {
    Ok(m * x * inverse(m)?)
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map(|r| r.len()).unwrap_or(0);
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn mat_to_vec(m: &CMat, out: &mut [C64]) {
    let n = m.ncols();
    for i in 0..m.nrows() {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
}

pub fn vec_to_mat(n: usize, v: &[C64]) -> CMat {
    CMat::from_fn(n, n, |i, j| v[i * n + j])
}

/// Distance from `x` to the nearest integer (complex values need a zero imaginary part to be close).
pub fn distance_to_integer(x: C64) -> f64 {
    (x.re - x.re.round()).abs().hypot(x.im)
}
