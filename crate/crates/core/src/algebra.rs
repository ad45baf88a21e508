//! Matrix algebras: closure of a generating set, structure constants, center,
//! trace-form radical and the block decomposition of the semisimple quotient.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    check_same_shape, linear_combination, solve_homogeneous, span_basis, CMatrix, Coordinates,
    Echelon, Subspace,
};
use crate::scalar::{Backend, Scalar};
use crate::spectral::{split, RootFinder};

/// Reseeding budget for degenerate random central elements.
pub const MAX_SPLIT_ATTEMPTS: usize = 16;

/// A subspace of `Mat_n` closed under multiplication, with the structure
/// constants of its basis: `basis[i] * basis[j] = sum_k c[i][j][k] basis[k]`.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra<S: Scalar> {
    n: usize,
    basis: Vec<CMatrix<S>>,
    structure_constants: Vec<Vec<Vec<S>>>,
    contains_identity: bool,
    tol: f64,
}

impl<S: Scalar> MatrixAlgebra<S> {
    /// Builds the algebra from a basis already known to be closed. Returns
    /// `None` if some product leaves the span.
    pub fn from_basis(n: usize, basis: Vec<CMatrix<S>>, tol: f64) -> Option<Self> {
        let basis = span_basis(&basis, (n, n), tol).into_basis();
        let coords = Coordinates::new(&basis, tol);
        let d = basis.len();
        let products: Vec<CMatrix<S>> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| basis[i].matmul(&basis[j]))
            .collect();
        let flat = coords.of_many(&products)?;
        let mut structure_constants = vec![vec![Vec::new(); d]; d];
        for (idx, c) in flat.into_iter().enumerate() {
            structure_constants[idx / d][idx % d] = c;
        }
        let contains_identity = n > 0 && coords.of(&CMatrix::identity(n)).is_some();
        Some(Self {
            n,
            basis,
            structure_constants,
            contains_identity,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[CMatrix<S>] {
        &self.basis
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<S>>] {
        &self.structure_constants
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn as_subspace(&self) -> Subspace<S> {
        span_basis(&self.basis, (self.n, self.n), self.tol)
    }

    pub fn element(&self, coeffs: &[S]) -> CMatrix<S> {
        if self.basis.is_empty() {
            return CMatrix::zeros(self.n, self.n);
        }
        linear_combination(coeffs, &self.basis)
    }

    /// Largest violation of
    /// `sum_m c[i][j][m] c[m][k][l] == sum_m c[j][k][m] c[i][m][l]`.
    pub fn associativity_defect(&self) -> f64 {
        let c = &self.structure_constants;
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let left = (0..d).fold(S::zero(), |acc, m| {
                            acc + c[i][j][m].clone() * c[m][k][l].clone()
                        });
                        let right = (0..d).fold(S::zero(), |acc, m| {
                            acc + c[j][k][m].clone() * c[i][m][l].clone()
                        });
                        let diff = left - right;
                        if !diff.is_zero_within(0.0) {
                            worst = worst.max(diff.magnitude());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn to_complex(&self) -> MatrixAlgebra<Complex64> {
        MatrixAlgebra {
            n: self.n,
            basis: self.basis.iter().map(CMatrix::to_complex).collect(),
            structure_constants: self
                .structure_constants
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| c.iter().map(Scalar::to_complex).collect())
                        .collect()
                })
                .collect(),
            contains_identity: self.contains_identity,
            tol: if S::is_exact() {
                crate::scalar::DEFAULT_TOL
            } else {
                self.tol
            },
        }
    }

    /// Left-regular representation matrices `L_i` with `(L_i)_{k j} = c[i][j][k]`.
    pub fn regular_representation(&self) -> Vec<CMatrix<S>> {
        let d = self.dim();
        (0..d)
            .map(|i| CMatrix::from_fn(d, d, |k, j| self.structure_constants[i][j][k].clone()))
            .collect()
    }
}

/// Smallest algebra containing `gens` (and the identity when requested),
/// closed by multiplying each new basis element with all earlier ones.
pub fn generate_algebra<S: Scalar>(
    gens: &[CMatrix<S>],
    include_identity: bool,
    tol: f64,
) -> Result<MatrixAlgebra<S>> {
    let n = if gens.is_empty() {
        return Err(Error::DimensionMismatch("no generators".into()));
    } else {
        let (r, c) = check_same_shape(gens)?;
        if r != c {
            return Err(Error::DimensionMismatch("generators must be square".into()));
        }
        r
    };
    let mut seed = Vec::with_capacity(gens.len() + 1);
    if include_identity {
        seed.push(CMatrix::identity(n));
    }
    seed.extend(gens.iter().cloned());
    let vectors: Vec<Vec<S>> = seed.iter().map(CMatrix::flatten).collect();
    let threshold = if S::is_exact() {
        0.0
    } else {
        tol * vectors
            .iter()
            .flat_map(|v| v.iter().map(Scalar::magnitude))
            .fold(0.0, f64::max)
            .max(1.0)
    };
    let mut ech = Echelon::new(n * n, threshold);
    let mut basis: Vec<CMatrix<S>> = Vec::new();
    for (m, v) in seed.iter().zip(&vectors) {
        if ech.insert(v) {
            basis.push(m.clone());
        }
    }
    // every new element is multiplied on both sides by everything found so far
    let mut next = 0;
    while next < basis.len() && !ech.is_full() {
        let fresh = basis[next].clone();
        let mut found = Vec::new();
        for other in basis.iter().take(next + 1) {
            for prod in [fresh.matmul(other), other.matmul(&fresh)] {
                if ech.insert(&prod.flatten()) {
                    found.push(prod);
                }
            }
        }
        basis.extend(found);
        next += 1;
    }
    // a reduced echelon basis keeps entries small for the structure constants
    let reduced: Vec<CMatrix<S>> = ech
        .reduced_rows()
        .into_iter()
        .map(|v| CMatrix::from_flat(n, n, v))
        .collect();
    Ok(MatrixAlgebra::from_basis(n, reduced, tol).expect("closure is multiplicatively closed"))
}

/// Kernel of a coefficient constraint system mapped back to algebra elements.
fn elements_from_kernel<S: Scalar>(a: &MatrixAlgebra<S>, constraints: CMatrix<S>) -> Subspace<S> {
    let kernel = solve_homogeneous(&constraints, a.tol);
    let mats: Vec<CMatrix<S>> = kernel
        .basis_vectors()
        .iter()
        .map(|coeffs| a.element(coeffs))
        .collect();
    span_basis(&mats, (a.n, a.n), a.tol)
}

/// `{m in A : m b == b m for every basis element b}`.
pub fn center<S: Scalar>(a: &MatrixAlgebra<S>) -> Subspace<S> {
    let d = a.dim();
    if d == 0 {
        return Subspace::zero(a.n, a.n);
    }
    let c = &a.structure_constants;
    // row (j, k): sum_i alpha_i (c[i][j][k] - c[j][i][k]) = 0
    let constraints = CMatrix::from_fn(d * d, d, |row, i| {
        let (j, k) = (row / d, row % d);
        c[i][j][k].clone() - c[j][i][k].clone()
    });
    elements_from_kernel(a, constraints)
}

/// Radical via the trace form: `{m in A : tr(m b) == 0 for every b in A}`.
/// Over characteristic zero this ideal is nil, hence the full radical.
pub fn radical<S: Scalar>(a: &MatrixAlgebra<S>) -> Subspace<S> {
    let d = a.dim();
    if d == 0 {
        return Subspace::zero(a.n, a.n);
    }
    let constraints = CMatrix::from_fn(d, d, |j, i| a.basis[j].matmul(&a.basis[i]).trace());
    elements_from_kernel(a, constraints)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub dim: usize,
    pub is_full_matrix_algebra: bool,
    pub matrix_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub dimension: usize,
    pub center_dim: usize,
    pub radical_dim: usize,
    pub blocks: Vec<Block>,
    /// Backend the block split was finally computed under.
    pub backend: Backend,
    /// Set when exact splitting failed and the float backend took over.
    pub backend_downgraded: bool,
}

impl StructureReport {
    /// Sorted block profile `(dim, matrix_size)`, largest first.
    pub fn profile(&self) -> Vec<(usize, usize)> {
        let mut p: Vec<(usize, usize)> =
            self.blocks.iter().map(|b| (b.dim, b.matrix_size)).collect();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    }
}

pub(crate) fn random_coefficients<S: Scalar>(rng: &mut ChaCha8Rng, count: usize) -> Vec<S> {
    (0..count)
        .map(|_| {
            let num = rng.random_range(-40i64..=40);
            let den = rng.random_range(1i64..=7);
            S::from_ratio(num, den)
        })
        .collect()
}

/// Primitive central idempotents of a semisimple matrix algebra, found by
/// splitting a random central element along its minimal polynomial.
pub fn central_idempotents<S: RootFinder>(
    a: &MatrixAlgebra<S>,
    seed: u64,
) -> Result<Vec<CMatrix<S>>> {
    let z = center(a);
    if z.dim() == 0 {
        return Ok(Vec::new());
    }
    let basis = z.basis();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let coeffs = random_coefficients::<S>(&mut rng, basis.len());
        let element = linear_combination(&coeffs, basis);
        match split(&element, a.tol) {
            Ok((roots, projections)) => {
                // without the ambient identity in A, the minimal polynomial of a
                // central element also carries the root 0 of the complement;
                // the projection onto a nonzero root is a multiple of `element`
                let has_zero = roots.iter().any(|r| r.is_zero_within(a.tol));
                let expected = if a.contains_identity || !has_zero {
                    z.dim()
                } else {
                    z.dim() + 1
                };
                if roots.len() != expected {
                    continue;
                }
                let idempotents = projections
                    .into_iter()
                    .zip(&roots)
                    .filter(|(_, r)| a.contains_identity || !r.is_zero_within(a.tol))
                    .map(|(p, _)| p)
                    .collect();
                return Ok(idempotents);
            }
            Err(Error::DegenerateRandomElement { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateRandomElement {
        attempts: MAX_SPLIT_ATTEMPTS,
    })
}

/// Quotient `A / rad(A)` realized by its left-regular representation.
fn semisimple_quotient<S: Scalar>(a: &MatrixAlgebra<S>, rad: &Subspace<S>) -> MatrixAlgebra<S> {
    let d = a.dim();
    let coords = Coordinates::new(&a.basis, a.tol);
    let rad_coords = coords
        .of_many(rad.basis())
        .expect("radical lies in the algebra");
    // extend the radical coordinates by standard basis vectors to a basis of C^d
    let mut columns: Vec<CMatrix<S>> = rad_coords
        .iter()
        .cloned()
        .map(CMatrix::column_vector)
        .collect();
    let mut complement = Vec::new();
    for i in 0..d {
        let mut unit = vec![S::zero(); d];
        unit[i] = S::one();
        let mut trial = columns.clone();
        trial.push(CMatrix::column_vector(unit));
        if span_basis(&trial, (d, 1), a.tol).dim() == trial.len() {
            columns = trial;
            complement.push(i);
        }
    }
    let m = rad.dim();
    let q = complement.len();
    let change = Coordinates::new(&columns, a.tol);
    let c = &a.structure_constants;
    // (L_u)_{k, v} = coefficient of u_k in u * u_v modulo the radical
    let regular: Vec<CMatrix<S>> = complement
        .iter()
        .map(|&u| {
            let images: Vec<CMatrix<S>> = complement
                .iter()
                .map(|&v| CMatrix::column_vector(c[u][v].clone()))
                .collect();
            let coeffs = change.of_many(&images).expect("full basis of C^d");
            CMatrix::from_fn(q, q, |k, col| coeffs[col][m + k].clone())
        })
        .collect();
    MatrixAlgebra::from_basis(q, regular, a.tol).expect("quotient is closed")
}

fn decompose_semisimple<S: RootFinder>(a: &MatrixAlgebra<S>, seed: u64) -> Result<Vec<Block>> {
    let idempotents = central_idempotents(a, seed)?;
    let n = a.n;
    idempotents
        .iter()
        .map(|e| {
            let products: Vec<CMatrix<S>> = a.basis.iter().map(|b| b.matmul(e)).collect();
            let block_basis = span_basis(&products, (n, n), a.tol).into_basis();
            let dim = block_basis.len();
            let block = MatrixAlgebra::from_basis(n, block_basis, a.tol).expect("A e is an ideal");
            let size = integer_sqrt(dim);
            Ok(Block {
                dim,
                is_full_matrix_algebra: size * size == dim && center(&block).dim() == 1,
                matrix_size: size,
            })
        })
        .collect()
}

fn integer_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Wedderburn block profile of `A / rad(A)`. On the exact backend a central
/// element whose eigenvalues leave Q(i) triggers a float recomputation,
/// reported through `backend_downgraded`.
pub fn block_decompose<S: RootFinder>(a: &MatrixAlgebra<S>, seed: u64) -> Result<StructureReport> {
    let rad = radical(a);
    let semisimple = if rad.dim() == 0 {
        a.clone()
    } else {
        semisimple_quotient(a, &rad)
    };
    let center_dim = center(a).dim();
    let (blocks, backend, downgraded) = match decompose_semisimple(&semisimple, seed) {
        Ok(blocks) => (blocks, S::BACKEND, false),
        Err(Error::NoExactSplitting) => {
            let float = semisimple.to_complex();
            (decompose_semisimple(&float, seed)?, Backend::Float, true)
        }
        Err(e) => return Err(e),
    };
    Ok(StructureReport {
        dimension: a.dim(),
        center_dim,
        radical_dim: rad.dim(),
        blocks,
        backend,
        backend_downgraded: downgraded,
    })
}
