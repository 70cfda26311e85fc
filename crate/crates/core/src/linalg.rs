//! Small dense linear-algebra helpers over `Complex64`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |(M†M - I)_{ij}|`, or infinity for non-square input.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// Orthonormal basis (as columns) of the null space of `m`, deciding rank
/// with singular values `<= rel_tol · σ_max`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let cols = m.ncols();
    let padded;
    let work = if m.nrows() < cols {
        padded = m.clone().resize_vertically(cols, c(0.0, 0.0));
        &padded
    } else {
        m
    };
    let svd = SVD::new(work.clone(), false, true);
    let v_t = svd.v_t.expect("requested V");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let threshold = rel_tol * sigma_max;
    let columns: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if columns.is_empty() {
        CMatrix::zeros(cols, 0)
    } else {
        CMatrix::from_columns(&columns)
    }
}

/// Eigen-decomposition of a normal matrix: returns eigenvalues and an
/// orthonormal eigenvector matrix.
///
/// A normal matrix shares its eigenvectors with the Hermitian combination
/// `H = (U + U†)/2 + κ (U - U†)/(2i)` for any real `κ`. Clusters of equal `H`
/// eigenvalues are refined recursively with a different `κ` on the
/// compressed matrix, which separates eigenvalues that only collide by
/// accident.
pub fn normal_eigen(u: &CMatrix, cluster_tol: f64) -> (Vec<Complex64>, CMatrix) {
    const KAPPAS: [f64; 4] = [0.577_215_664_901_532_9, -1.324_717_957_244_746, core::f64::consts::E, 0.0];
    let n = u.nrows();
    let basis = CMatrix::identity(n, n);
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<CVector> = Vec::with_capacity(n);
    refine(u, &basis, 0, cluster_tol, &KAPPAS, &mut values, &mut vectors);
    let mat = if vectors.is_empty() { CMatrix::zeros(n, 0) } else { CMatrix::from_columns(&vectors) };
    (values, mat)
}

fn refine(
    u: &CMatrix,
    basis: &CMatrix,
    depth: usize,
    tol: f64,
    kappas: &[f64],
    values: &mut Vec<Complex64>,
    vectors: &mut Vec<CVector>,
) {
    let compressed = basis.adjoint() * u * basis;
    let m = compressed.nrows();
    if m == 0 {
        return;
    }
    if m == 1 || depth >= kappas.len() {
        if depth >= kappas.len() {
            // Give up refining: accept the diagonal of the compression.
            for j in 0..m {
                values.push(compressed[(j, j)]);
                vectors.push(basis.column(j).into_owned());
            }
        } else {
            values.push(compressed[(0, 0)]);
            vectors.push(basis.column(0).into_owned());
        }
        return;
    }
    let kappa = kappas[depth];
    let adj = compressed.adjoint();
    let herm = (&compressed + &adj).map(|z| z * 0.5) + (&compressed - &adj).map(|z| z * c(0.0, -0.5) * kappa);
    let herm = (&herm + herm.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(core::cmp::Ordering::Equal));
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && (eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]]).abs() <= tol {
            end += 1;
        }
        let cols: Vec<CVector> = order[start..end].iter().map(|&j| eig.eigenvectors.column(j).into_owned()).collect();
        let sub = basis * CMatrix::from_columns(&cols);
        if end - start == 1 {
            values.push((sub.adjoint() * u * &sub)[(0, 0)]);
            vectors.push(sub.column(0).into_owned());
        } else {
            let block = sub.adjoint() * u * &sub;
            let off = max_off_diagonal(&block);
            if off <= tol {
                for j in 0..block.nrows() {
                    values.push(block[(j, j)]);
                    vectors.push(sub.column(j).into_owned());
                }
            } else {
                refine(u, &sub, depth + 1, tol, kappas, values, vectors);
            }
        }
        start = end;
    }
}

fn max_off_diagonal(m: &CMatrix) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                best = best.max(m[(i, j)].norm());
            }
        }
    }
    best
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
