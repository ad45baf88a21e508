//! Kraus channels, their duals and complementary channels, pseudo-diagonal
//! channels built from a Gram frame, and non-commutative graphs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{span_basis, CMatrix, Subspace};
use crate::scalar::Scalar;

/// Eigenvalues of the Choi matrix below this are dropped.
pub const CHOI_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel<S: Scalar> {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix<S>>,
}

/// Max-norm distance of `sum_k V_k^* V_k` from the identity.
pub fn trace_preservation_residual<S: Scalar>(kraus: &[CMatrix<S>]) -> f64 {
    let Some(first) = kraus.first() else {
        return f64::INFINITY;
    };
    let n = first.cols();
    let sum = kraus
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, v| &acc + &v.adjoint().matmul(v));
    sum.residual(&CMatrix::identity(n))
}

fn expect_shape<S: Scalar>(m: &CMatrix<S>, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

impl<S: Scalar> KrausChannel<S> {
    /// Validates shapes and trace preservation (exactly on the exact backend,
    /// within `tol` on float).
    pub fn new(kraus: Vec<CMatrix<S>>, tol: f64) -> Result<Self> {
        let ch = Self::without_trace_check(kraus)?;
        let residual = trace_preservation_residual(&ch.kraus);
        let limit = if S::is_exact() { 0.0 } else { tol };
        if residual > limit {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(ch)
    }

    /// Shape validation only; for completely positive maps that need not
    /// preserve the trace.
    pub fn without_trace_check(kraus: Vec<CMatrix<S>>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        };
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("empty Kraus operator".into()));
        }
        if kraus.iter().any(|v| v.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in shape".into(),
            ));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            dim_in: n,
            dim_out: n,
            kraus: vec![CMatrix::identity(n)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn env_dim(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMatrix<S>] {
        &self.kraus
    }

    pub fn trace_residual(&self) -> f64 {
        trace_preservation_residual(&self.kraus)
    }

    /// `sum_k V_k rho V_k^*`
    pub fn apply(&self, rho: &CMatrix<S>) -> Result<CMatrix<S>> {
        expect_shape(rho, self.dim_in, "input")?;
        Ok(self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_out, self.dim_out), |acc, v| {
                &acc + &v.matmul(rho).matmul(&v.adjoint())
            }))
    }

    /// `sum_k V_k^* x V_k`
    pub fn dual(&self, x: &CMatrix<S>) -> Result<CMatrix<S>> {
        expect_shape(x, self.dim_out, "observable")?;
        Ok(self
            .kraus
            .iter()
            .fold(CMatrix::zeros(self.dim_in, self.dim_in), |acc, v| {
                &acc + &v.adjoint().matmul(x).matmul(v)
            }))
    }

    /// Environment output with entries `Tr[V_j rho V_k^*]`.
    pub fn complementary(&self, rho: &CMatrix<S>) -> Result<CMatrix<S>> {
        expect_shape(rho, self.dim_in, "input")?;
        let k = self.env_dim();
        let left: Vec<CMatrix<S>> = self.kraus.iter().map(|v| v.matmul(rho)).collect();
        let adjoints: Vec<CMatrix<S>> = self.kraus.iter().map(CMatrix::adjoint).collect();
        Ok(CMatrix::from_fn(k, k, |j, l| {
            left[j].matmul(&adjoints[l]).trace()
        }))
    }

    /// Kraus form of the complementary channel: `W_m = sum_j |j><m| V_j`, so
    /// row `j` of `W_m` is row `m` of `V_j`.
    pub fn complementary_channel(&self) -> KrausChannel<S> {
        let k = self.env_dim();
        let kraus = (0..self.dim_out)
            .map(|m| CMatrix::from_fn(k, self.dim_in, |j, a| self.kraus[j].get(m, a).clone()))
            .collect();
        KrausChannel {
            dim_in: self.dim_in,
            dim_out: k,
            kraus,
        }
    }

    /// `span{V_j^* V_k}`
    pub fn nc_graph(&self, tol: f64) -> Subspace<S> {
        let products: Vec<CMatrix<S>> = self
            .kraus
            .iter()
            .flat_map(|a| self.kraus.iter().map(move |b| a.adjoint().matmul(b)))
            .collect();
        span_basis(&products, (self.dim_in, self.dim_in), tol)
    }

    /// Image of the environment matrix units under the dual of the
    /// complementary channel.
    pub fn graph_via_dual(&self, tol: f64) -> Subspace<S> {
        let comp = self.complementary_channel();
        let k = self.env_dim();
        let images: Vec<CMatrix<S>> = (0..k)
            .flat_map(|a| (0..k).map(move |b| (a, b)))
            .map(|(a, b)| {
                comp.dual(&CMatrix::unit(k, k, a, b))
                    .expect("environment shape")
            })
            .collect();
        span_basis(&images, (self.dim_in, self.dim_in), tol)
    }

    /// Kraus operators `V'_k = sum_j w_{kj} V_j`; the same channel when `w`
    /// is unitary.
    pub fn mix_kraus(&self, w: &CMatrix<S>) -> Result<KrausChannel<S>> {
        expect_shape(w, self.env_dim(), "mixing matrix")?;
        let kraus = (0..self.env_dim())
            .map(|k| {
                let row: Vec<S> = (0..self.env_dim()).map(|j| w.get(k, j).clone()).collect();
                crate::linalg::linear_combination(&row, &self.kraus)
            })
            .collect();
        Ok(KrausChannel {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus,
        })
    }

    /// `|Tr(rho dual(x)) - Tr(apply(rho) x)|`
    pub fn duality_gap(&self, rho: &CMatrix<S>, x: &CMatrix<S>) -> Result<f64> {
        let left = rho.matmul(&self.dual(x)?).trace();
        let right = self.apply(rho)?.matmul(x).trace();
        let diff = left - right;
        Ok(if diff.is_zero_within(0.0) {
            0.0
        } else {
            diff.magnitude()
        })
    }
}

/// Unit vectors' Gram matrix `C` together with a resolution of the identity
/// `{psi_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFrame {
    vectors: Vec<Vec<Complex64>>,
    gram: CMatrix<Complex64>,
}

fn to_nalgebra(m: &CMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| *m.get(i, j))
}

fn hermitian_eigen(m: &CMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = to_nalgebra(m).symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

impl GramFrame {
    pub fn new(vectors: Vec<Vec<Complex64>>, gram: CMatrix<Complex64>, tol: f64) -> Result<Self> {
        let m = vectors.len();
        if m == 0 {
            return Err(Error::InvalidFrame("no vectors".into()));
        }
        let d = vectors[0].len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidFrame("vectors differ in length".into()));
        }
        if gram.shape() != (m, m) {
            return Err(Error::InvalidGram(format!(
                "expected {m}x{m}, got {}x{}",
                gram.rows(),
                gram.cols()
            )));
        }
        let hermitian_gap = gram.residual(&gram.adjoint());
        if hermitian_gap > tol {
            return Err(Error::InvalidGram(format!(
                "not Hermitian (residual {hermitian_gap:e})"
            )));
        }
        if let Some(i) = (0..m).find(|&i| (gram.get(i, i) - Complex64::new(1.0, 0.0)).norm() > tol)
        {
            return Err(Error::InvalidGram(format!("diagonal entry {i} is not 1")));
        }
        let (eigenvalues, _) = hermitian_eigen(&gram);
        let smallest = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest < -tol {
            return Err(Error::InvalidGram(format!(
                "not positive semidefinite (eigenvalue {smallest:e})"
            )));
        }
        let resolution = vectors.iter().fold(CMatrix::zeros(d, d), |acc, v| {
            let col = CMatrix::column_vector(v.clone());
            &acc + &col.matmul(&col.adjoint())
        });
        let gap = resolution.residual(&CMatrix::identity(d));
        if gap > tol {
            return Err(Error::InvalidFrame(format!(
                "not a resolution of the identity (residual {gap:e})"
            )));
        }
        Ok(Self { vectors, gram })
    }

    /// `C = I`, standard basis: the dephasing frame.
    pub fn dephasing(d: usize) -> Self {
        let vectors = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self {
            vectors,
            gram: CMatrix::identity(d),
        }
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn gram(&self) -> &CMatrix<Complex64> {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// `sum_{j,k} c_{jk} <psi_j| rho |psi_k> |j><k|`
pub fn pseudo_diagonal_map(
    frame: &GramFrame,
    rho: &CMatrix<Complex64>,
) -> Result<CMatrix<Complex64>> {
    expect_shape(rho, frame.dim(), "input")?;
    let psi: Vec<CMatrix<Complex64>> = frame
        .vectors
        .iter()
        .cloned()
        .map(CMatrix::column_vector)
        .collect();
    let rho_psi: Vec<CMatrix<Complex64>> = psi.iter().map(|p| rho.matmul(p)).collect();
    let m = frame.len();
    Ok(CMatrix::from_fn(m, m, |j, k| {
        frame.gram.get(j, k) * psi[j].adjoint().matmul(&rho_psi[k]).get(0, 0)
    }))
}

/// Kraus operators of the pseudo-diagonal map read off the spectral
/// decomposition of its Choi matrix.
pub fn pseudo_diagonal(frame: &GramFrame) -> Result<KrausChannel<Complex64>> {
    let (d, m) = (frame.dim(), frame.len());
    // Choi matrix, index (a, j) -> a * m + j
    let mut choi = CMatrix::zeros(d * m, d * m);
    for a in 0..d {
        for b in 0..d {
            let image = pseudo_diagonal_map(frame, &CMatrix::unit(d, d, a, b))?;
            for j in 0..m {
                for k in 0..m {
                    choi.set(a * m + j, b * m + k, *image.get(j, k));
                }
            }
        }
    }
    let (eigenvalues, vectors) = hermitian_eigen(&choi);
    let kraus: Vec<CMatrix<Complex64>> = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > CHOI_CUTOFF)
        .map(|(i, &l)| {
            let s = l.sqrt();
            CMatrix::from_fn(m, d, |j, a| vectors[(a * m + j, i)] * s)
        })
        .collect();
    KrausChannel::new(kraus, 1e-8)
}

pub fn random_complex_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMatrix<Complex64> {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `rows x cols` matrix with orthonormal columns (Gram-Schmidt on a Gaussian
/// matrix, repeated once for stability).
pub fn random_isometry<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMatrix<Complex64> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    loop {
        let a = random_complex_matrix(rows, cols, rng);
        let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
        let mut ok = true;
        for j in 0..cols {
            let mut v = a.column(j);
            for _ in 0..2 {
                for u in &q {
                    let dot: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= dot * y);
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
        if ok {
            return CMatrix::from_columns(&q);
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<Complex64> {
    random_isometry(n, n, rng)
}

/// Trace-preserving channel whose stacked Kraus operators form a random isometry.
pub fn random_channel<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    rng: &mut R,
) -> Result<KrausChannel<Complex64>> {
    if kraus_count == 0 || kraus_count * dim_out < dim_in {
        return Err(Error::InvalidChannel(format!(
            "{kraus_count} Kraus operators of shape {dim_out}x{dim_in} cannot preserve the trace"
        )));
    }
    let w = random_isometry(kraus_count * dim_out, dim_in, rng);
    let kraus = (0..kraus_count)
        .map(|k| w.submatrix(k * dim_out..(k + 1) * dim_out, 0..dim_in))
        .collect();
    KrausChannel::new(kraus, 1e-10)
}

/// `A A^* / Tr(A A^*)` for Gaussian `A`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix<Complex64> {
    let a = random_complex_matrix(d, d, rng);
    let rho = a.matmul(&a.adjoint());
    let t = rho.trace();
    rho.scale(&(Complex64::new(1.0, 0.0) / t))
}
