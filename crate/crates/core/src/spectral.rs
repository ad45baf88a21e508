//! Spectral splitting of diagonalizable matrices without eigenvector solvers:
//! minimal polynomial from the linear dependency of powers, its roots, and
//! spectral projections by Lagrange interpolation.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{solve_many, CMatrix, Echelon};
use crate::scalar::{GaussianRational, Scalar};

/// Monic polynomial, coefficients in increasing degree (leading 1 included).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    pub fn eval_matrix(&self, m: &CMatrix<S>) -> CMatrix<S> {
        let n = m.rows();
        self.coeffs
            .iter()
            .rev()
            .fold(CMatrix::zeros(n, n), |acc, c| {
                &acc.matmul(m) + &CMatrix::identity(n).scale(c)
            })
    }

    /// Divides by `(t - root)`, discarding the remainder.
    fn deflate(&self, root: &S) -> Self {
        let n = self.degree();
        let mut out = vec![S::zero(); n];
        let mut carry = S::zero();
        for k in (1..=n).rev() {
            carry = self.coeffs[k].clone() + carry * root.clone();
            out[k - 1] = carry.clone();
        }
        Self { coeffs: out }
    }
}

/// Minimal polynomial of a square matrix: the first power that depends linearly
/// on the lower ones.
pub fn minimal_polynomial<S: Scalar>(m: &CMatrix<S>, tol: f64) -> Polynomial<S> {
    let n = m.rows();
    let scale = m.max_norm().max(1.0);
    let threshold = if S::is_exact() { 0.0 } else { tol };
    // work with m / scale on the float backend so powers stay O(1)
    let unit = if S::is_exact() {
        m.clone()
    } else {
        m.scale(&S::from_gaussian(&GaussianRational::new(
            float_to_rational(1.0 / scale),
            BigRational::zero(),
        )))
    };
    let mut ech = Echelon::new(n * n, threshold);
    let mut powers = vec![CMatrix::identity(n)];
    ech.insert(&powers[0].flatten());
    loop {
        let next = powers.last().unwrap().matmul(&unit);
        if !ech.insert(&next.flatten()) {
            let columns: Vec<Vec<S>> = powers.iter().map(CMatrix::flatten).collect();
            let basis = CMatrix::from_columns(&columns);
            let sol = solve_many(&basis, &[next.flatten()], tol.max(threshold))
                .expect("dependent power lies in span of lower powers");
            let mut coeffs: Vec<S> = sol[0].iter().map(|c| -c.clone()).collect();
            coeffs.push(S::one());
            let poly = Polynomial { coeffs };
            return if S::is_exact() {
                poly
            } else {
                rescale_roots(&poly, scale)
            };
        }
        powers.push(next);
    }
}

fn float_to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite scale")
}

/// Polynomial whose roots are `scale` times the roots of `p`.
fn rescale_roots<S: Scalar>(p: &Polynomial<S>, scale: f64) -> Polynomial<S> {
    let d = p.degree();
    let coeffs = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.clone()
                * S::from_gaussian(&GaussianRational::new(
                    float_to_rational(scale.powi((d - k) as i32)),
                    BigRational::zero(),
                ))
        })
        .collect();
    Polynomial { coeffs }
}

/// Root finding specialized per backend.
pub trait RootFinder: Scalar {
    fn roots(p: &Polynomial<Self>, tol: f64) -> Result<Vec<Self>>;
}

impl RootFinder for Complex64 {
    fn roots(p: &Polynomial<Self>, _tol: f64) -> Result<Vec<Self>> {
        Ok(float_roots(&p.coeffs))
    }
}

impl RootFinder for GaussianRational {
    /// Exact roots in Q(i): float approximations are rationalized and verified
    /// exactly, with an exact quadratic formula for the last two roots.
    fn roots(p: &Polynomial<Self>, _tol: f64) -> Result<Vec<Self>> {
        let mut remaining = p.clone();
        let mut found = Vec::new();
        'outer: while remaining.degree() > 2 {
            let approx: Vec<Complex64> = remaining.coeffs.iter().map(Scalar::to_complex).collect();
            for z in float_roots(&approx) {
                for candidate in rationalize_complex(z) {
                    if remaining.eval(&candidate).is_zero_within(0.0) {
                        remaining = remaining.deflate(&candidate);
                        found.push(candidate);
                        continue 'outer;
                    }
                }
            }
            return Err(Error::NoExactSplitting);
        }
        match remaining.degree() {
            0 => {}
            1 => found.push(-remaining.coeffs[0].clone()),
            _ => {
                let (c, b) = (remaining.coeffs[0].clone(), remaining.coeffs[1].clone());
                let disc = b.clone() * b.clone() - GaussianRational::from_ints(4, 0) * c;
                let root = disc.sqrt().ok_or(Error::NoExactSplitting)?;
                let half = GaussianRational::from_parts((1, 2), (0, 1));
                found.push((-b.clone() + root.clone()) * half.clone());
                found.push((-b - root) * half);
            }
        }
        Ok(found)
    }
}

fn rationalize_complex(z: Complex64) -> Vec<GaussianRational> {
    let res = rationalize(z.re);
    let ims = rationalize(z.im);
    let mut out = Vec::new();
    for re in &res {
        for im in &ims {
            out.push(GaussianRational::new(re.clone(), im.clone()));
        }
    }
    out
}

/// Continued-fraction convergents of `x` with denominators up to 10^9.
fn rationalize(x: f64) -> Vec<BigRational> {
    if !x.is_finite() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let (mut h0, mut h1) = (num_bigint::BigInt::from(0), num_bigint::BigInt::from(1));
    let (mut k0, mut k1) = (num_bigint::BigInt::from(1), num_bigint::BigInt::from(0));
    let mut rest = x;
    for _ in 0..40 {
        let a = rest.floor();
        let ai = num_bigint::BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        if k1.abs() > num_bigint::BigInt::from(1_000_000_000) {
            break;
        }
        let q = BigRational::new(h1.clone(), k1.clone());
        let err = (q.to_f64().unwrap_or(f64::NAN) - x).abs();
        out.push(q);
        if err <= 1e-12 * x.abs().max(1.0) {
            break;
        }
        let frac = rest - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    out.reverse();
    out
}

/// Durand-Kerner iteration followed by Newton polishing. `coeffs` is monic,
/// increasing degree.
pub fn float_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    };
    let deriv = |z: Complex64| {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, c)| {
                acc * z + c * k as f64
            })
    };
    let bound = 1.0 + coeffs[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| seed.powu(k as u32 + 1) * bound * 0.5)
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            if denom.norm() == 0.0 {
                z[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*root);
            if d.norm() == 0.0 {
                break;
            }
            let step = eval(*root) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *root -= step;
        }
    }
    z
}

/// Spectral projections `P_i = prod_{j != i} (m - r_j) / (r_i - r_j)` for the
/// distinct roots of the minimal polynomial of a diagonalizable matrix.
pub fn spectral_projections<S: Scalar>(m: &CMatrix<S>, roots: &[S]) -> Vec<CMatrix<S>> {
    let n = m.rows();
    roots
        .iter()
        .enumerate()
        .map(|(i, ri)| {
            roots.iter().enumerate().filter(|&(j, _)| j != i).fold(
                CMatrix::identity(n),
                |acc, (_, rj)| {
                    let shifted = m - &CMatrix::identity(n).scale(rj);
                    let denom = (ri.clone() - rj.clone()).inv().expect("distinct roots");
                    acc.matmul(&shifted).scale(&denom)
                },
            )
        })
        .collect()
}

/// Smallest pairwise distance between roots relative to their scale.
pub fn root_separation<S: Scalar>(roots: &[S]) -> f64 {
    let scale = roots.iter().map(Scalar::magnitude).fold(1.0, f64::max);
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            best = best.min((roots[i].clone() - roots[j].clone()).magnitude() / scale);
        }
    }
    best
}

/// Distinct eigenvalues and spectral projections of a diagonalizable matrix.
pub fn split<S: RootFinder>(m: &CMatrix<S>, tol: f64) -> Result<(Vec<S>, Vec<CMatrix<S>>)> {
    let poly = minimal_polynomial(m, tol);
    let roots = S::roots(&poly, tol)?;
    if !S::is_exact() && root_separation(&roots) < 1e-6 {
        return Err(Error::DegenerateRandomElement { attempts: 1 });
    }
    if S::is_exact() {
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                if roots[i] == roots[j] {
                    return Err(Error::DegenerateRandomElement { attempts: 1 });
                }
            }
        }
    }
    let projections = spectral_projections(m, &roots);
    Ok((roots, projections))
}
