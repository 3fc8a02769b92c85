//! Dense and sparse complex linear algebra used throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dimension up to which norms use a full SVD.
pub const SVD_LIMIT: usize = 2000;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `i^k` without rounding error.
pub fn i_pow(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Largest singular value. Full SVD up to [`SVD_LIMIT`], power iteration beyond.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) <= SVD_LIMIT {
        m.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    } else {
        power_norm(m, 1e-10, 10_000)
    }
}

/// Power iteration on `M^* M` with a fixed starting vector.
pub fn power_norm(m: &CMatrix, tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    let mut v = CVector::from_fn(n, |k, _| C64::new(1.0 + 0.1 * (k % 7) as f64, 0.05 * (k % 3) as f64));
    let nv = v.norm();
    v /= c(nv);
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let mut u = m.adjoint() * &w;
        let nu = u.norm();
        if nu == 0.0 {
            return 0.0;
        }
        u /= c(nu);
        let next = nu.sqrt();
        v = u;
        if (next - sigma).abs() <= tol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-18 Taylor core.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = one_norm(m);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.25 {
        s += 1;
    }
    let a = m / c(2f64.powi(s as i32));
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=18u32 {
        term = &term * &a / c(k as f64);
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// `V diag(f(lambda)) V^*` for a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        let fj = f(lam);
        for r in 0..n {
            scaled[(r, j)] *= fj;
        }
    }
    scaled * vectors.adjoint()
}

/// Permanent by Ryser's formula with Gray-code updates.
pub fn permanent(m: &CMatrix) -> C64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return c(1.0);
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut gray_prev = 0usize;
    for k in 1..(1usize << n) {
        let gray = k ^ (k >> 1);
        let changed = (gray ^ gray_prev).trailing_zeros() as usize;
        let sign = if gray & (1 << changed) != 0 { 1.0 } else { -1.0 };
        for (r, s) in row_sums.iter_mut().enumerate() {
            *s += m[(r, changed)] * sign;
        }
        gray_prev = gray;
        let prod = row_sums.iter().fold(c(1.0), |acc, z| acc * z);
        if (n - gray.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, col, _)| (r, col));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, col, v) in triplets {
            if last == Some((r, col)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(col);
            values.push(v);
            last = Some((r, col));
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &CVector) -> CVector {
        let mut y = CVector::zeros(self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                triplets.push((self.col_idx[p], r, self.values[p].conj()));
            }
        }
        SparseMatrix::from_triplets(self.ncols, self.nrows, triplets)
    }

    pub fn scaled(&self, s: C64) -> SparseMatrix {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut triplets = self.triplets();
        triplets.extend(other.triplets());
        SparseMatrix::from_triplets(self.nrows, self.ncols, triplets)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                out.push((r, self.col_idx[p], self.values[p]));
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for (r, col, v) in self.triplets() {
            m[(r, col)] += v;
        }
        m
    }

    /// Maximum absolute row sum, an upper bound for the operator norm of
    /// matrices whose adjoint has the same bound.
    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|p| self.values[p].norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0; self.ncols];
        for (_, col, v) in self.triplets() {
            cols[col] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }
}

/// `exp(X) v` for sparse `X` by substepping a Taylor series until the terms
/// drop below `tol` relative to the running vector.
pub fn sparse_expm_apply(x: &SparseMatrix, v: &CVector, tol: f64) -> CVector {
    let bound = (x.inf_norm() * x.one_norm()).sqrt();
    let steps = bound.ceil().max(1.0) as usize;
    let h = c(1.0 / steps as f64);
    let mut out = v.clone();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..200u32 {
            term = x.mul_vec(&term) * h / c(k as f64);
            acc += &term;
            if term.norm() <= tol * acc.norm().max(1e-300) {
                break;
            }
        }
        out = acc;
    }
    out
}
