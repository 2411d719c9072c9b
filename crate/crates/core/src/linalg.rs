//! Thin wrappers over `faer` for the dense kernels.
//!
//! Tensors are stored as flat row-major `Vec<C64>`; these helpers view them as
//! matrices and convert results back.

use alloc::vec::Vec;
use faer::{Mat, MatRef};
#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::{Error, Result, C64};

/// Row-major view of `data` as a `rows × cols` matrix.
#[inline]
pub(crate) fn view(data: &[C64], rows: usize, cols: usize) -> MatRef<'_, C64> {
    debug_assert_eq!(data.len(), rows * cols);
    MatRef::from_row_major_slice(data, rows, cols)
}

/// Copies a matrix into a row-major buffer.
pub(crate) fn to_row_major(m: MatRef<'_, C64>) -> Vec<C64> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Row-major product of two row-major matrices.
pub(crate) fn matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    if m == 0 || n == 0 {
        return Vec::new();
    }
    if k == 0 {
        return alloc::vec![C64::new(0.0, 0.0); m * n];
    }
    let p = view(a, m, k) * view(b, k, n);
    to_row_major(p.as_ref())
}

/// Thin SVD `m = U diag(s) V^H` of a row-major `rows × cols` matrix.
pub(crate) struct Svd {
    /// `rows × k`, row-major.
    pub u: Vec<C64>,
    pub s: Vec<f64>,
    /// `k × cols`, row-major (already conjugate-transposed).
    pub vh: Vec<C64>,
}

pub(crate) fn svd(data: &[C64], rows: usize, cols: usize) -> Result<Svd> {
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd { u: Vec::new(), s: Vec::new(), vh: Vec::new() });
    }
    let d = view(data, rows, cols).thin_svd().map_err(|_| Error::Linalg("SVD did not converge"))?;
    let s = d.S().column_vector().iter().map(|x| x.re).collect();
    let u = to_row_major(d.U());
    let v = d.V();
    let mut vh = Vec::with_capacity(k * cols);
    for i in 0..k {
        for j in 0..cols {
            vh.push(v[(j, i)].conj());
        }
    }
    Ok(Svd { u, s, vh })
}

/// Singular spectrum of a row-major matrix, kept together with whatever
/// is needed to build truncated factors `M ≈ L R` afterwards.
pub(crate) enum Split {
    /// Full thin SVD.
    Svd(Svd),
    /// Eigenvectors of the smaller Gram matrix: `rows × k` left vectors
    /// (`on_rows`) or `cols × k` right vectors, columns ordered like `s`.
    Gram { vecs: Vec<C64>, on_rows: bool },
}

/// Singular values (nonincreasing) plus a [`Split`] of `data`.
///
/// With `gram` set, the spectrum comes from the Hermitian eigenproblem of
/// `M M^H` or `M^H M`, whichever is smaller. Singular values below about
/// `1e-8·σ_max` then lose relative accuracy, so callers only use it when such
/// values are truncated anyway.
pub(crate) fn split(data: &[C64], rows: usize, cols: usize, gram: bool) -> Result<(Vec<f64>, Split)> {
    if !gram || rows.min(cols) == 0 {
        let d = svd(data, rows, cols)?;
        return Ok((d.s.clone(), Split::Svd(d)));
    }
    let m = view(data, rows, cols);
    let on_rows = rows <= cols;
    let g = if on_rows { m * m.adjoint() } else { m.adjoint() * m };
    let e = g
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::Linalg("Hermitian eigendecomposition did not converge"))?;
    let n = g.nrows();
    let vals: Vec<f64> = e.S().column_vector().iter().map(|x| x.re).collect();
    // Eigenvalues come ascending; reorder to nonincreasing singular values.
    let order: Vec<usize> = (0..n).rev().collect();
    let s = order.iter().map(|&i| vals[i].max(0.0).sqrt()).collect();
    let u = e.U();
    let mut vecs = Vec::with_capacity(n * n);
    for r in 0..n {
        for &c in &order {
            vecs.push(u[(r, c)]);
        }
    }
    Ok((s, Split::Gram { vecs, on_rows }))
}

impl Split {
    /// Rank-`k` factors `(L: rows × k, R: k × cols)` of the matrix this split
    /// came from. `L` has orthonormal columns when `left_iso`, otherwise `R`
    /// has orthonormal rows; the other factor is multiplied by `scale`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn factors(
        &self,
        data: &[C64],
        rows: usize,
        cols: usize,
        s: &[f64],
        k: usize,
        left_iso: bool,
        scale: f64,
    ) -> (Vec<C64>, Vec<C64>) {
        if k == 0 {
            return (Vec::new(), Vec::new());
        }
        match self {
            Split::Svd(d) => {
                let kk = d.s.len();
                let mut l = Vec::with_capacity(rows * k);
                for r in 0..rows {
                    l.extend_from_slice(&d.u[r * kk..r * kk + k]);
                }
                let mut rt = d.vh[..k * cols].to_vec();
                if left_iso {
                    for (j, row) in rt.chunks_mut(cols).enumerate() {
                        row.iter_mut().for_each(|x| *x *= s[j] * scale);
                    }
                } else {
                    for row in l.chunks_mut(k) {
                        row.iter_mut().zip(s).for_each(|(x, sj)| *x *= sj * scale);
                    }
                }
                (l, rt)
            }
            Split::Gram { vecs, on_rows } => {
                let n = if *on_rows { rows } else { cols };
                let mut w = Vec::with_capacity(n * k);
                for r in 0..n {
                    w.extend_from_slice(&vecs[r * n..r * n + k]);
                }
                let mut l;
                let mut rt;
                if *on_rows {
                    // M ≈ U (U^H M).
                    l = w;
                    rt = matmul(&adjoint(&l, rows, k), data, k, rows, cols);
                    if !left_iso {
                        // U^H M = (Q R)^H with Q orthonormal: M ≈ (U R^H) Q^H.
                        let (q, r) = qr(&adjoint(&rt, k, cols), cols, k);
                        l = matmul(&l, &adjoint(&r, k, k), rows, k, k);
                        rt = adjoint(&q, cols, k);
                    }
                } else {
                    // M ≈ (M V) V^H.
                    rt = adjoint(&w, cols, k);
                    l = matmul(data, &w, rows, cols, k);
                    if left_iso {
                        let (q, r) = qr(&l, rows, k);
                        rt = matmul(&r, &rt, k, k, cols);
                        l = q;
                    }
                }
                let centre = if left_iso { &mut rt } else { &mut l };
                centre.iter_mut().for_each(|x| *x *= scale);
                (l, rt)
            }
        }
    }
}

/// Conjugate transpose of a row-major `rows × cols` matrix.
pub(crate) fn adjoint(m: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out.push(m[i * cols + j].conj());
        }
    }
    out
}

/// Singular values of a row-major `rows × cols` matrix, nonincreasing.
pub(crate) fn singular_values(data: &[C64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if rows.min(cols) == 0 {
        return Ok(Vec::new());
    }
    view(data, rows, cols).singular_values().map_err(|_| Error::Linalg("SVD did not converge"))
}

/// Thin QR of a row-major `rows × cols` matrix; returns `(Q, R)` row-major
/// with `Q: rows × k`, `R: k × cols`, `k = min(rows, cols)`.
pub(crate) fn qr(data: &[C64], rows: usize, cols: usize) -> (Vec<C64>, Vec<C64>) {
    let k = rows.min(cols);
    if k == 0 {
        return (Vec::new(), Vec::new());
    }
    let d = view(data, rows, cols).qr();
    let q = to_row_major(d.compute_thin_Q().as_ref());
    let r = to_row_major(d.thin_R());
    (q, r)
}

/// Eigenvalues and right eigenvectors (columns of the returned matrix) of a
/// general square matrix.
pub(crate) fn eigen(m: &Mat<C64>) -> Result<(Vec<C64>, Mat<C64>)> {
    let e = m.eigen().map_err(|_| Error::Linalg("eigendecomposition did not converge"))?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, e.U().to_owned()))
}
