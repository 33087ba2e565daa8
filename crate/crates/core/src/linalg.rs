//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Frobenius norm. Used for every residual in the crate; it dominates the
/// spectral norm, so bounds stated for operator norms stay valid.
pub fn norm(m: &CMat) -> f64 {
    m.norm()
}

pub fn vnorm(v: &CVec) -> f64 {
    v.norm()
}

/// `(A - A*) / 2i`.
pub fn imag_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

/// `(A + A*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * re(0.5)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// 2-norm condition number; `inf` for singular or empty-rank input.
pub fn condition_number(m: &CMat) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Condition number after scaling every row to unit Euclidean norm.
///
/// Boundary matrices mix rows taken at `a` (order one) with rows taken from
/// the monodromy (possibly exponentially large); equilibration makes the
/// estimate measure near-dependence of rows rather than their scale.
pub fn row_equilibrated_condition(m: &CMat) -> f64 {
    let mut s = m.clone();
    for mut row in s.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= re(n);
        }
    }
    condition_number(&s)
}

/// Numerical rank with singular values above `tol · σ_max`.
pub fn rank(m: &CMat, tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Solves `A X = B` after a condition check; `cond_limit` is the largest
/// acceptable 2-norm condition number.
pub fn solve(a: &CMat, b: &CMat, cond_limit: f64, what: &'static str, lambda: C64) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            context: what,
            expected: format!("square system with {} rows", b.nrows()),
            found: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    if a.nrows() == 0 {
        return Ok(zeros(0, b.ncols()));
    }
    let cond = condition_number(a);
    if !cond.is_finite() || cond > cond_limit {
        return Err(Error::IllConditioned { what, lambda, cond });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::IllConditioned { what, lambda, cond })
}

pub fn inverse(a: &CMat, cond_limit: f64, what: &'static str, lambda: C64) -> Result<CMat> {
    solve(a, &eye(a.nrows()), cond_limit, what, lambda)
}

/// Copies `block` into `m` with its top-left corner at `(r, c)`.
pub fn set_block(m: &mut CMat, r: usize, c: usize, block: &CMat) {
    if block.nrows() == 0 || block.ncols() == 0 {
        return;
    }
    m.view_mut((r, c), (block.nrows(), block.ncols())).copy_from(block);
}

pub fn block(m: &CMat, r: usize, c: usize, nr: usize, nc: usize) -> CMat {
    m.view((r, c), (nr, nc)).into_owned()
}

/// Horizontal concatenation.
pub fn hcat(parts: &[&CMat]) -> CMat {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c0 = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "hcat row mismatch");
        set_block(&mut out, 0, c0, p);
        c0 += p.ncols();
    }
    out
}

/// Vertical concatenation.
pub fn vcat(parts: &[&CMat]) -> CMat {
    let cols = parts.first().map_or(0, |p| p.ncols());
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r0 = 0;
    for p in parts {
        assert_eq!(p.ncols(), cols, "vcat column mismatch");
        set_block(&mut out, r0, 0, p);
        r0 += p.nrows();
    }
    out
}

/// Rows `[r0, r0 + n)` of the identity of size `dim`, i.e. the coordinate
/// projection onto a contiguous block.
pub fn coordinate_projection(dim: usize, r0: usize, n: usize) -> CMat {
    let mut p = zeros(n, dim);
    for j in 0..n {
        p[(j, r0 + j)] = re(1.0);
    }
    p
}

/// Orthogonal projector onto the row space of `w`.
pub fn row_space_projector(w: &CMat) -> Result<CMat> {
    let gram = w * w.adjoint();
    let inv = inverse(&gram, 1e14, "row Gram matrix", C64::new(0.0, 0.0))?;
    Ok(w.adjoint() * inv * w)
}

/// Returns `(W W*)^{-1/2} W`, whose rows are orthonormal and span the same
/// space as the rows of `w`.
pub fn orthonormalize_rows(w: &CMat) -> Result<CMat> {
    let gram = hermitian_part(&(w * w.adjoint()));
    let eig = gram.clone().symmetric_eigen();
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if lo.is_nan() || lo <= hi * 1e-24 || lo <= 0.0 {
        return Err(Error::InvalidInput("rows are linearly dependent".into()));
    }
    let inv_sqrt = CMat::from_diagonal(&eig.eigenvalues.map(|l| re(1.0 / l.sqrt())));
    let u = &eig.eigenvectors;
    Ok(u * inv_sqrt * u.adjoint() * w)
}

/// Orthonormal basis (as columns) of the orthogonal complement of the column
/// space of `w`.
pub fn column_complement(w: &CMat) -> Result<CMat> {
    let n = w.nrows();
    let proj = row_space_projector(&w.adjoint())?;
    let comp = eye(n) - proj;
    let eig = hermitian_part(&comp).symmetric_eigen();
    let cols: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > 0.5).collect();
    let mut out = zeros(n, cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &eig.eigenvectors.column(j));
    }
    Ok(out)
}

/// Principal square root.
pub fn csqrt(z: C64) -> C64 {
    z.sqrt()
}

/// Bits of a complex number, for hashing exact `λ` values.
pub fn key(z: C64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}
