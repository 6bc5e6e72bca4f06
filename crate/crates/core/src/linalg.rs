//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Orthonormal basis (as columns) of the null space of a symmetric PSD matrix.
pub fn psd_null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = m.clone().symmetric_eigen();
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= tol)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    from_columns(n, &cols)
}

/// Stack column vectors into a matrix with `rows` rows (works for zero columns).
pub fn from_columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Null space of an arbitrary matrix, via its Gram matrix.
///
/// Gram eigenvalues carry round-off near 1e-16, so the squared cutoff is floored.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let gram = m.transpose() * m;
    let scale = gram.amax().max(1.0);
    psd_null_space(&gram, (tol * tol).max(1e-12) * scale)
}

/// Common fixed subspace of a set of square matrices.
pub fn fixed_space<'a, I>(dim: usize, mats: I) -> DMatrix<f64>
where
    I: IntoIterator<Item = &'a DMatrix<f64>>,
{
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    for g in mats {
        let d = g - &id;
        acc += d.transpose() * d;
    }
    psd_null_space(&acc, 1e-10)
}

/// Orthogonal projector onto the column span of an orthonormal basis.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

/// Intersection of two subspaces given by orthonormal bases in the same ambient space.
pub fn intersect(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let m = (&id - projector(a)) + (&id - projector(b));
    psd_null_space(&m, 1e-10)
}

pub fn same_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.ncols() == b.ncols() && (projector(a) - projector(b)).amax() < 1e-7
}

/// Orthonormal basis of `{v in span(basis) : normal . v = 0}`.
pub fn complement_in(basis: &DMatrix<f64>, normal: &DVector<f64>) -> DMatrix<f64> {
    let coords = basis.transpose() * normal;
    let k = basis.ncols();
    let row = DMatrix::from_row_slice(1, k, coords.as_slice());
    let ns = null_space(&row, 1e-9);
    basis * ns
}

/// Moore-Penrose solve of `a x = b` with a relative singular-value cutoff.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rcond * smax.max(f64::MIN_POSITIVE);
    let u = svd.u.as_ref().expect("u computed");
    let vt = svd.v_t.as_ref().expect("v_t computed");
    let mut y = u.transpose() * b;
    for (i, s) in svd.singular_values.iter().enumerate() {
        y[i] = if *s > cutoff { y[i] / s } else { 0.0 };
    }
    vt.transpose() * y
}

/// Numerical rank with a relative cutoff.
pub fn rank(a: &DMatrix<f64>, rcond: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > rcond * smax.max(f64::MIN_POSITIVE)).count()
}

/// Eigenvalues of a symmetric matrix in descending order, with eigenvectors as columns.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}
