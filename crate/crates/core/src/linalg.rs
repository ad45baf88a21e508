//! Dense matrices over a [`Scalar`] backend and the subspace machinery built on
//! row reduction: rank, kernels, spans of matrices and linear solves.
//!
//! Matrices are flattened row-major whenever they are treated as vectors.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct CMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> CMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Inverse of [`CMatrix::flatten`].
    pub fn from_flat(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn column_vector(entries: Vec<S>) -> Self {
        let n = entries.len();
        Self::from_flat(n, 1, entries)
    }

    /// Matrix unit `|i><j|`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data[i * cols + j] = S::one();
        m
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn flatten(&self) -> Vec<S> {
        self.data.clone()
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CMatrix<T> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|e| e.clone() * s.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols,
            other.rows,
            "matmul shape mismatch {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero_within(0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.rows), |acc, _| acc.matmul(self))
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self.get(i / other.rows, j / other.cols).clone()
                * other.get(i % other.rows, j % other.cols).clone()
        })
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|e| e.is_zero_within(tol))
    }

    /// Distance used for residual reports: exactly `0.0` when the exact
    /// difference vanishes, otherwise the max-norm of the difference.
    pub fn residual(&self, other: &Self) -> f64 {
        let diff = self - other;
        if diff.is_zero(0.0) {
            0.0
        } else {
            diff.max_norm()
        }
    }

    pub fn submatrix(
        &self,
        row_range: std::ops::Range<usize>,
        col_range: std::ops::Range<usize>,
    ) -> Self {
        let (r0, c0) = (row_range.start, col_range.start);
        Self::from_fn(row_range.len(), col_range.len(), |i, j| {
            self.get(r0 + i, c0 + j).clone()
        })
    }

    pub fn from_columns(columns: &[Vec<S>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |i, j| columns[j][i].clone())
    }

    pub fn to_complex(&self) -> CMatrix<num_complex::Complex64> {
        self.map(Scalar::to_complex)
    }

    /// Inverse of a square matrix, `None` when singular under `tol`.
    pub fn inverse(&self, tol: f64) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let identity = Self::identity(n);
        let rhs: Vec<Vec<S>> = (0..n).map(|j| identity.column(j)).collect();
        let sol = solve_many(self, &rhs, tol)?;
        if rank(self, tol) != n {
            return None;
        }
        Some(Self::from_columns(&sol))
    }
}

impl<S: Scalar> fmt::Debug for CMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Add for &CMatrix<S> {
    type Output = CMatrix<S>;
    fn add(self, rhs: Self) -> CMatrix<S> {
        assert_eq!(self.shape(), rhs.shape());
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Sub for &CMatrix<S> {
    type Output = CMatrix<S>;
    fn sub(self, rhs: Self) -> CMatrix<S> {
        assert_eq!(self.shape(), rhs.shape());
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Mul for &CMatrix<S> {
    type Output = CMatrix<S>;
    fn mul(self, rhs: Self) -> CMatrix<S> {
        self.matmul(rhs)
    }
}

impl<S: Scalar> Neg for &CMatrix<S> {
    type Output = CMatrix<S>;
    fn neg(self) -> CMatrix<S> {
        self.map(|e| -e.clone())
    }
}

/// Linear combination `sum_i coeffs[i] * mats[i]`.
pub fn linear_combination<S: Scalar>(coeffs: &[S], mats: &[CMatrix<S>]) -> CMatrix<S> {
    assert_eq!(coeffs.len(), mats.len());
    assert!(!mats.is_empty(), "empty linear combination has no shape");
    let (r, c) = mats[0].shape();
    coeffs
        .iter()
        .zip(mats)
        .fold(CMatrix::zeros(r, c), |acc, (a, m)| &acc + &m.scale(a))
}

fn vec_max_norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(Scalar::magnitude).fold(0.0, f64::max)
}

/// Incrementally built echelon form. Each stored row has a distinct pivot
/// column that is zero in every other stored row's reduction path, so
/// reducing a vector against the rows in insertion order leaves a residual
/// orthogonal (in the elimination sense) to the stored span.
#[derive(Debug, Clone)]
pub struct Echelon<S> {
    len: usize,
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
    threshold: f64,
}

impl<S: Scalar> Echelon<S> {
    /// `threshold` is the absolute magnitude under which a float residual is
    /// considered zero; ignored on the exact backend.
    pub fn new(len: usize, threshold: f64) -> Self {
        Self {
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
            threshold,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.len);
        let mut v = v.to_vec();
        // stored rows carry a unit pivot
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero_within(0.0) {
                continue;
            }
            let factor = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero_within(0.0) {
                    *x = x.clone() - factor.clone() * r.clone();
                }
            }
            v[p] = S::zero();
        }
        v
    }

    /// Stored rows brought to reduced echelon form: every pivot column is a
    /// unit vector across the returned rows.
    pub fn reduced_rows(&self) -> Vec<Vec<S>> {
        let mut rows = self.rows.clone();
        // later rows already vanish on earlier pivots
        for i in (0..rows.len()).rev() {
            for j in i + 1..rows.len() {
                let p = self.pivots[j];
                if rows[i][p].is_zero_within(0.0) {
                    continue;
                }
                let factor = rows[i][p].clone();
                let (head, tail) = rows.split_at_mut(j);
                for (x, r) in head[i].iter_mut().zip(&tail[0]) {
                    if !r.is_zero_within(0.0) {
                        *x = x.clone() - factor.clone() * r.clone();
                    }
                }
                head[i][p] = S::zero();
            }
        }
        rows
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.len
    }

    pub fn contains(&self, v: &[S]) -> bool {
        self.is_full()
            || self
                .reduce(v)
                .iter()
                .all(|e| e.is_zero_within(self.threshold))
    }

    /// Adds `v` if it is independent of the stored rows; reports whether it was.
    pub fn insert(&mut self, v: &[S]) -> bool {
        if self.is_full() {
            return false;
        }
        let r = self.reduce(v);
        let pivot = if S::is_exact() {
            r.iter().position(|e| !e.is_zero_within(0.0))
        } else {
            let (idx, mag) =
                r.iter()
                    .map(Scalar::magnitude)
                    .enumerate()
                    .fold(
                        (0, 0.0),
                        |best, (i, m)| if m > best.1 { (i, m) } else { best },
                    );
            (mag > self.threshold).then_some(idx)
        };
        match pivot {
            Some(p) => {
                let inv = r[p].inv().expect("nonzero pivot");
                let mut r: Vec<S> = r.into_iter().map(|x| x * inv.clone()).collect();
                r[p] = S::one();
                self.rows.push(r);
                self.pivots.push(p);
                true
            }
            None => false,
        }
    }
}

fn span_threshold<S: Scalar>(vectors: &[Vec<S>], tol: f64) -> f64 {
    if S::is_exact() {
        0.0
    } else {
        tol * vectors
            .iter()
            .map(|v| vec_max_norm(v))
            .fold(0.0, f64::max)
            .max(1e-300)
    }
}

/// Linear span of a set of equally shaped matrices, stored as an independent basis.
#[derive(Clone, Debug)]
pub struct Subspace<S: Scalar> {
    shape: (usize, usize),
    basis: Vec<CMatrix<S>>,
}

impl<S: Scalar> Subspace<S> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            shape: (rows, cols),
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn ambient_dim(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn basis(&self) -> &[CMatrix<S>] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<CMatrix<S>> {
        self.basis
    }

    /// Basis matrices flattened to coordinate vectors (used when the
    /// subspace lives in a coefficient space of column vectors).
    pub fn basis_vectors(&self) -> Vec<Vec<S>> {
        self.basis.iter().map(CMatrix::flatten).collect()
    }

    pub fn contains(&self, m: &CMatrix<S>, tol: f64) -> bool {
        assert_eq!(m.shape(), self.shape);
        let mut vectors = self.basis_vectors();
        vectors.push(m.flatten());
        let mut ech = Echelon::new(self.ambient_dim(), span_threshold(&vectors, tol));
        for v in &vectors[..vectors.len() - 1] {
            ech.insert(v);
        }
        ech.contains(&m.flatten())
    }

    pub fn contains_identity(&self, tol: f64) -> bool {
        self.shape.0 == self.shape.1 && self.contains(&CMatrix::identity(self.shape.0), tol)
    }

    /// Contains the identity and is closed under the adjoint.
    pub fn is_operator_system(&self, tol: f64) -> bool {
        self.shape.0 == self.shape.1
            && self.contains_identity(tol)
            && self.basis.iter().all(|b| self.contains(&b.adjoint(), tol))
    }
}

/// Selects a maximal linearly independent subset of `mats` (in input order)
/// spanning the same space.
pub fn span_basis<S: Scalar>(mats: &[CMatrix<S>], shape: (usize, usize), tol: f64) -> Subspace<S> {
    assert!(
        mats.iter().all(|m| m.shape() == shape),
        "span_basis: all matrices must have shape {shape:?}"
    );
    let vectors: Vec<Vec<S>> = mats.iter().map(CMatrix::flatten).collect();
    let mut ech = Echelon::new(shape.0 * shape.1, span_threshold(&vectors, tol));
    let basis = mats
        .iter()
        .zip(&vectors)
        .filter(|(_, v)| ech.insert(v))
        .map(|(m, _)| m.clone())
        .collect();
    Subspace { shape, basis }
}

/// `dim A == dim B == dim (A + B)`.
pub fn subspace_equal<S: Scalar>(a: &Subspace<S>, b: &Subspace<S>, tol: f64) -> bool {
    assert_eq!(a.shape, b.shape, "subspace_equal: ambient shapes differ");
    if a.dim() != b.dim() {
        return false;
    }
    let joined: Vec<CMatrix<S>> = a.basis.iter().chain(&b.basis).cloned().collect();
    span_basis(&joined, a.shape, tol).dim() == a.dim()
}

/// Intersection-free sum `A + B`.
pub fn subspace_sum<S: Scalar>(a: &Subspace<S>, b: &Subspace<S>, tol: f64) -> Subspace<S> {
    let joined: Vec<CMatrix<S>> = a.basis.iter().chain(&b.basis).cloned().collect();
    span_basis(&joined, a.shape, tol)
}

/// Reduced row echelon form in place with partial pivoting; returns pivot
/// columns. Only the first `pivot_cols` columns are eligible as pivots.
fn rref<S: Scalar>(m: &mut [Vec<S>], pivot_cols: usize, threshold: f64) -> Vec<usize> {
    let n_rows = m.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..pivot_cols {
        if row == n_rows {
            break;
        }
        let candidate = if S::is_exact() {
            (row..n_rows).find(|&r| !m[r][col].is_zero_within(0.0))
        } else {
            let (best, mag) = (row..n_rows)
                .map(|r| (r, m[r][col].magnitude()))
                .fold((row, -1.0), |b, x| if x.1 > b.1 { x } else { b });
            (mag > threshold).then_some(best)
        };
        let Some(p) = candidate else {
            if !S::is_exact() {
                for r in m.iter_mut().skip(row) {
                    r[col] = S::zero();
                }
            }
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].inv().expect("nonzero pivot");
        for x in m[row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero_within(0.0) {
                continue;
            }
            let factor = other[col].clone();
            for (x, pv) in other.iter_mut().zip(&pivot_row) {
                if !pv.is_zero_within(0.0) {
                    *x = x.clone() - factor.clone() * pv.clone();
                }
            }
            other[col] = S::zero();
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

fn matrix_threshold<S: Scalar>(a: &CMatrix<S>, tol: f64) -> f64 {
    if S::is_exact() {
        return 0.0;
    }
    let max_row = (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| a.get(i, j).magnitude().powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    tol * max_row.max(1e-300)
}

pub fn rank<S: Scalar>(a: &CMatrix<S>, tol: f64) -> usize {
    let mut rows: Vec<Vec<S>> = (0..a.rows())
        .map(|i| a.as_slice()[i * a.cols()..(i + 1) * a.cols()].to_vec())
        .collect();
    rref(&mut rows, a.cols(), matrix_threshold(a, tol)).len()
}

/// Kernel of the linear map `constraints` (acting on column vectors), as a
/// subspace of column vectors.
pub fn solve_homogeneous<S: Scalar>(constraints: &CMatrix<S>, tol: f64) -> Subspace<S> {
    let n = constraints.cols();
    let threshold = matrix_threshold(constraints, tol);
    let mut rows: Vec<Vec<S>> = (0..constraints.rows())
        .map(|i| constraints.as_slice()[i * n..(i + 1) * n].to_vec())
        .collect();
    let pivots = rref(&mut rows, n, threshold);
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![S::zero(); n];
        v[free] = S::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -rows[r][free].clone();
        }
        basis.push(CMatrix::column_vector(v));
    }
    Subspace {
        shape: (n, 1),
        basis,
    }
}

/// Solves `a * x = b` for every right-hand side; `None` if any system is inconsistent.
pub fn solve_many<S: Scalar>(a: &CMatrix<S>, rhs: &[Vec<S>], tol: f64) -> Option<Vec<Vec<S>>> {
    let (n_rows, n_cols) = a.shape();
    assert!(rhs.iter().all(|b| b.len() == n_rows));
    let scale = {
        let mut s = matrix_threshold(a, tol);
        if !S::is_exact() {
            let rhs_max = rhs.iter().map(|b| vec_max_norm(b)).fold(0.0, f64::max);
            s = s.max(tol * rhs_max);
        }
        s
    };
    let mut rows: Vec<Vec<S>> = (0..n_rows)
        .map(|i| {
            let mut row = a.as_slice()[i * n_cols..(i + 1) * n_cols].to_vec();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    let pivots = rref(&mut rows, n_cols, matrix_threshold(a, tol));
    // rows past the pivots must have vanishing right-hand sides
    for row in rows.iter().skip(pivots.len()) {
        if row[n_cols..].iter().any(|e| !e.is_zero_within(scale)) {
            return None;
        }
    }
    let solutions = (0..rhs.len())
        .map(|k| {
            let mut x = vec![S::zero(); n_cols];
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = rows[r][n_cols + k].clone();
            }
            x
        })
        .collect();
    Some(solutions)
}

/// Coordinates of matrices with respect to a fixed independent basis.
#[derive(Clone, Debug)]
pub struct Coordinates<S: Scalar> {
    basis_matrix: CMatrix<S>,
    tol: f64,
}

impl<S: Scalar> Coordinates<S> {
    pub fn new(basis: &[CMatrix<S>], tol: f64) -> Self {
        let columns: Vec<Vec<S>> = basis.iter().map(CMatrix::flatten).collect();
        Self {
            basis_matrix: CMatrix::from_columns(&columns),
            tol,
        }
    }

    pub fn of(&self, m: &CMatrix<S>) -> Option<Vec<S>> {
        self.of_many(std::slice::from_ref(m))
            .map(|mut v| v.remove(0))
    }

    pub fn of_many(&self, mats: &[CMatrix<S>]) -> Option<Vec<Vec<S>>> {
        if self.basis_matrix.cols() == 0 {
            return mats
                .iter()
                .all(|m| m.is_zero(self.tol))
                .then(|| vec![Vec::new(); mats.len()]);
        }
        let rhs: Vec<Vec<S>> = mats.iter().map(CMatrix::flatten).collect();
        solve_many(&self.basis_matrix, &rhs, self.tol)
    }
}

pub fn check_same_shape<S: Scalar>(mats: &[CMatrix<S>]) -> Result<(usize, usize)> {
    let shape = mats
        .first()
        .map(CMatrix::shape)
        .ok_or_else(|| Error::DimensionMismatch("empty matrix list".into()))?;
    if mats.iter().any(|m| m.shape() != shape) {
        return Err(Error::DimensionMismatch(
            "matrices of different shapes".into(),
        ));
    }
    Ok(shape)
}
