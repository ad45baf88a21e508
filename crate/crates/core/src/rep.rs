//! Characters of the subgroup P, induced two-dimensional representations of
//! G, and the decomposition of the four-dimensional representation phi_theta
//! into irreducible blocks.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{random_coefficients, MAX_SPLIT_ATTEMPTS};
use crate::error::{Error, Result};
use crate::graph::build_generators;
use crate::linalg::{
    check_same_shape, linear_combination, solve_homogeneous, span_basis, CMatrix, Coordinates,
    Subspace,
};
use crate::scalar::{Backend, Scalar, Theta};
use crate::spectral::{minimal_polynomial, split, RootFinder};

/// A character of P: values on g and on z.
#[derive(Debug, Clone, PartialEq)]
pub struct Character<S> {
    pub chi_g: S,
    pub chi_z: S,
}

impl<S: Scalar> Character<S> {
    pub fn new(chi_g: S, chi_z: S, tol: f64) -> Result<Self> {
        if chi_g.is_zero_within(tol) {
            return Err(Error::ZeroCharacter);
        }
        let plus = (chi_z.clone() - S::one()).is_zero_within(tol);
        let minus = (chi_z.clone() + S::one()).is_zero_within(tol);
        if !plus && !minus {
            return Err(Error::InvalidCharacterZ);
        }
        Ok(Self { chi_g, chi_z })
    }
}

/// Two-dimensional representation of G on `{v, x.v}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedRep<S: Scalar> {
    pub r_x: CMatrix<S>,
    pub r_y: CMatrix<S>,
    pub r_z: CMatrix<S>,
    pub r_g: CMatrix<S>,
}

impl<S: Scalar> InducedRep<S> {
    pub fn matrices(&self) -> Vec<CMatrix<S>> {
        vec![self.r_x.clone(), self.r_y.clone(), self.r_z.clone()]
    }

    /// Largest residual among the defining relations of G together with
    /// `R_g = R_x R_y` and `R_x R_g R_x = R_g^{-1}`.
    pub fn relations_residual(&self, tol: f64) -> f64 {
        let i2 = CMatrix::<S>::identity(2);
        let (x, y, z, g) = (&self.r_x, &self.r_y, &self.r_z, &self.r_g);
        let g_inv = match g.inverse(tol) {
            Some(m) => m,
            None => return f64::INFINITY,
        };
        [
            x.matmul(x).residual(&i2),
            y.matmul(y).residual(&i2),
            z.matmul(z).residual(&i2),
            x.matmul(z).residual(&z.matmul(x)),
            y.matmul(z).residual(&z.matmul(y)),
            g.residual(&x.matmul(y)),
            x.matmul(g).matmul(x).residual(&g_inv),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn relations_hold(&self, tol: f64) -> bool {
        self.relations_residual(tol) <= tol
    }
}

/// `R_g = diag(chi(g), chi(g)^{-1})`, `R_x` the swap, `R_y = R_x R_g`,
/// `R_z = chi(z) I`.
pub fn induce<S: Scalar>(chi: &Character<S>) -> Result<InducedRep<S>> {
    let inv = chi.chi_g.inv().ok_or(Error::ZeroCharacter)?;
    let r_g = CMatrix::diagonal(&[chi.chi_g.clone(), inv]);
    let r_x = CMatrix::from_rows(vec![vec![S::zero(), S::one()], vec![S::one(), S::zero()]]);
    let r_y = r_x.matmul(&r_g);
    let r_z = CMatrix::identity(2).scale(&chi.chi_z);
    Ok(InducedRep { r_x, r_y, r_z, r_g })
}

/// `{T : T a_i == b_i T}` for paired lists of square matrices; `T` has the
/// shape `dim(b) x dim(a)`.
pub fn intertwiners<S: Scalar>(
    a_mats: &[CMatrix<S>],
    b_mats: &[CMatrix<S>],
    tol: f64,
) -> Result<Subspace<S>> {
    if a_mats.len() != b_mats.len() || a_mats.is_empty() {
        return Err(Error::DimensionMismatch(
            "intertwiner lists must pair up".into(),
        ));
    }
    let (n, nc) = check_same_shape(a_mats)?;
    let (m, mc) = check_same_shape(b_mats)?;
    if n != nc || m != mc {
        return Err(Error::DimensionMismatch(
            "intertwined matrices must be square".into(),
        ));
    }
    let unknowns = m * n;
    let mut rows = Vec::with_capacity(a_mats.len() * unknowns);
    for (a, b) in a_mats.iter().zip(b_mats) {
        for i in 0..m {
            for j in 0..n {
                // (T a - b T)_{ij} = sum_q t_{iq} a_{qj} - sum_p b_{ip} t_{pj}
                let mut row = vec![S::zero(); unknowns];
                for q in 0..n {
                    row[i * n + q] = row[i * n + q].clone() + a.get(q, j).clone();
                }
                for p in 0..m {
                    row[p * n + j] = row[p * n + j].clone() - b.get(i, p).clone();
                }
                rows.push(row);
            }
        }
    }
    let kernel = solve_homogeneous(&CMatrix::from_rows(rows), tol);
    let mats: Vec<CMatrix<S>> = kernel
        .basis_vectors()
        .into_iter()
        .map(|v| CMatrix::from_flat(m, n, v))
        .collect();
    Ok(span_basis(&mats, (m, n), tol))
}

/// Matrices commuting with every member of `mats`.
pub fn commutant<S: Scalar>(mats: &[CMatrix<S>], tol: f64) -> Result<Subspace<S>> {
    intertwiners(mats, mats, tol)
}

/// Schur criterion: the commutant of `{R_x, R_y, R_z}` is one-dimensional.
pub fn is_irreducible<S: Scalar>(rep: &InducedRep<S>, tol: f64) -> bool {
    commutant(&rep.matrices(), tol)
        .map(|c| c.dim() == 1)
        .unwrap_or(false)
}

/// One invariant block of phi_theta.
#[derive(Debug, Clone, PartialEq)]
pub struct RepBlock<S: Scalar> {
    pub dim: usize,
    pub character: Character<S>,
    /// Columns spanning the block: `{v, X v}` for two-dimensional blocks.
    pub basis: Vec<Vec<S>>,
    /// X, Y, Z, G restricted to the block in the basis above.
    pub x: CMatrix<S>,
    pub y: CMatrix<S>,
    pub z: CMatrix<S>,
    pub g: CMatrix<S>,
}

impl<S: Scalar> RepBlock<S> {
    pub fn matrices(&self) -> Vec<CMatrix<S>> {
        vec![self.x.clone(), self.y.clone(), self.z.clone()]
    }

    /// `XY == YX == Z` on this block.
    pub fn klein_relations_hold(&self, tol: f64) -> bool {
        let xy = self.x.matmul(&self.y);
        let yx = self.y.matmul(&self.x);
        (&xy - &self.z).is_zero(tol) && (&yx - &self.z).is_zero(tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport<S: Scalar> {
    pub blocks: Vec<RepBlock<S>>,
    /// Columns are the block bases, in block order.
    pub change_of_basis: CMatrix<S>,
    /// Largest off-block entry of `S^{-1} A S` over `A` in `{X, Y, Z}`.
    pub residual: f64,
    /// Largest deviation of a two-dimensional block from `induce(chi)`.
    pub induced_residual: f64,
    pub commutant_dim: usize,
    /// `(i, j, dim Hom(block_i, block_j))` for `i < j`.
    pub intertwiner_dims: Vec<(usize, usize, usize)>,
    pub backend: Backend,
}

impl<S: Scalar> DecompositionReport<S> {
    pub fn characters(&self) -> Vec<Character<S>> {
        self.blocks.iter().map(|b| b.character.clone()).collect()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }
}

/// Matrix of `a` restricted to the invariant span of `basis`.
fn restrict<S: Scalar>(a: &CMatrix<S>, basis: &[Vec<S>], tol: f64) -> Option<CMatrix<S>> {
    let cols: Vec<CMatrix<S>> = basis.iter().cloned().map(CMatrix::column_vector).collect();
    let coords = Coordinates::new(&cols, tol);
    let images: Vec<CMatrix<S>> = cols.iter().map(|c| a.matmul(c)).collect();
    let coeffs = coords.of_many(&images)?;
    let k = basis.len();
    Some(CMatrix::from_fn(k, k, |i, j| coeffs[j][i].clone()))
}

fn pick_canonical<S: Scalar>(values: &[S], tol: f64) -> S {
    values
        .iter()
        .max_by(|a, b| a.canonical_cmp(b, tol))
        .cloned()
        .expect("nonempty")
}

fn column_space<S: Scalar>(p: &CMatrix<S>, tol: f64) -> Vec<Vec<S>> {
    let cols: Vec<CMatrix<S>> = (0..p.cols())
        .map(|j| CMatrix::column_vector(p.column(j)))
        .collect();
    span_basis(&cols, (p.rows(), 1), tol).basis_vectors()
}

fn build_block<S: RootFinder>(
    image: Vec<Vec<S>>,
    gens: &[CMatrix<S>; 4],
    tol: f64,
) -> Result<RepBlock<S>> {
    let basis = if image.len() == 2 {
        let g_block = restrict(&gens[3], &image, tol).ok_or_else(not_invariant)?;
        let roots = S::roots(&minimal_polynomial(&g_block, tol), tol)?;
        let chi = pick_canonical(&roots, tol);
        let shifted = &g_block - &CMatrix::identity(2).scale(&chi);
        let kernel = solve_homogeneous(&shifted, tol);
        let w = kernel
            .basis_vectors()
            .into_iter()
            .next()
            .ok_or_else(not_invariant)?;
        let v = linear_combination(
            &w,
            &image
                .iter()
                .cloned()
                .map(CMatrix::column_vector)
                .collect::<Vec<_>>(),
        );
        let xv = gens[0].matmul(&v);
        vec![v.flatten(), xv.flatten()]
    } else {
        image
    };
    let [x, y, z_r, g_r] = gens
        .each_ref()
        .map(|a| restrict(a, &basis, tol).ok_or_else(not_invariant));
    let (x, y, z_r, g_r) = (x?, y?, z_r?, g_r?);
    let dim = basis.len();
    let chi_z = z_r.trace() * S::from_ratio(1, dim as i64);
    let char_tol = if S::is_exact() { 0.0 } else { tol.max(1e-9) };
    let character = Character::new(g_r.get(0, 0).clone(), chi_z, char_tol)?;
    Ok(RepBlock {
        dim,
        character,
        basis,
        x,
        y,
        z: z_r,
        g: g_r,
    })
}

fn not_invariant() -> Error {
    Error::DimensionMismatch("block is not invariant under the generators".into())
}

fn block_order<S: Scalar>(a: &RepBlock<S>, b: &RepBlock<S>, tol: f64) -> Ordering {
    b.character
        .chi_z
        .canonical_cmp(&a.character.chi_z, tol)
        .then_with(|| b.character.chi_g.canonical_cmp(&a.character.chi_g, tol))
        .then_with(|| b.x.get(0, 0).canonical_cmp(a.x.get(0, 0), tol))
}

/// Splits C^4 under `phi_theta` by the spectral projections of a random
/// element of the commutant of `{X, Y, Z}`.
pub fn decompose_phi<S: RootFinder>(
    theta: &Theta<S>,
    tol: f64,
    seed: u64,
) -> Result<DecompositionReport<S>> {
    let gens = build_generators(theta);
    let generators = [gens.x.clone(), gens.y.clone(), gens.z.clone(), gens.g()];
    let comm = commutant(&gens.as_vec(), tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut projections = None;
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let coeffs = random_coefficients::<S>(&mut rng, comm.dim());
        let element = linear_combination(&coeffs, comm.basis());
        match split(&element, tol) {
            // the commutant is commutative here, so a generic element has
            // exactly dim(commutant) distinct eigenvalues
            Ok((roots, p)) if roots.len() == comm.dim() => {
                projections = Some(p);
                break;
            }
            Ok(_) | Err(Error::DegenerateRandomElement { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let projections = projections.ok_or(Error::DegenerateRandomElement {
        attempts: MAX_SPLIT_ATTEMPTS,
    })?;

    let mut blocks = projections
        .iter()
        .map(|p| build_block(column_space(p, tol), &generators, tol))
        .collect::<Result<Vec<_>>>()?;
    blocks.sort_by(|a, b| block_order(a, b, tol));

    let columns: Vec<Vec<S>> = blocks
        .iter()
        .flat_map(|b| b.basis.iter().cloned())
        .collect();
    let change_of_basis = CMatrix::from_columns(&columns);
    let inverse = change_of_basis.inverse(tol).ok_or_else(not_invariant)?;
    let mut residual = 0.0f64;
    for a in &generators[..3] {
        let conj = inverse.matmul(a).matmul(&change_of_basis);
        let mut start = 0;
        let ranges: Vec<std::ops::Range<usize>> = blocks
            .iter()
            .map(|b| {
                let r = start..start + b.dim;
                start += b.dim;
                r
            })
            .collect();
        for i in 0..4 {
            for j in 0..4 {
                let same = ranges.iter().any(|r| r.contains(&i) && r.contains(&j));
                if !same && !conj.get(i, j).is_zero_within(0.0) {
                    residual = residual.max(conj.get(i, j).magnitude());
                }
            }
        }
    }

    let mut induced_residual = 0.0f64;
    for b in blocks.iter().filter(|b| b.dim == 2) {
        let rep = induce(&b.character)?;
        for (got, want) in [
            (&b.x, &rep.r_x),
            (&b.y, &rep.r_y),
            (&b.z, &rep.r_z),
            (&b.g, &rep.r_g),
        ] {
            induced_residual = induced_residual.max(got.residual(want));
        }
    }

    let mut intertwiner_dims = Vec::new();
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            let hom = intertwiners(&blocks[i].matrices(), &blocks[j].matrices(), tol)?;
            intertwiner_dims.push((i, j, hom.dim()));
        }
    }

    Ok(DecompositionReport {
        blocks,
        change_of_basis,
        residual,
        induced_residual,
        commutant_dim: comm.dim(),
        intertwiner_dims,
        backend: S::BACKEND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_theta, AnyTheta, GaussianRational as Q};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn theta(text: &str) -> Theta<Q> {
        match parse_theta(text, Backend::Exact).unwrap() {
            AnyTheta::Exact(t) => t,
            _ => unreachable!(),
        }
    }

    fn q(n: i64) -> Q {
        Q::from_ints(n, 0)
    }

    fn chi(g: Q, z: i64) -> Character<Q> {
        Character::new(g, q(z), 0.0).unwrap()
    }

    #[test]
    fn induce_examples() {
        let trivial = induce(&chi(q(1), 1)).unwrap();
        assert_eq!(trivial.r_g, CMatrix::identity(2));
        assert!(!is_irreducible(&trivial, 0.0));

        let rep = induce(&chi(q(2), 1)).unwrap();
        assert_eq!(
            rep.r_g,
            CMatrix::diagonal(&[q(2), Q::from_parts((1, 2), (0, 1))])
        );
        assert_eq!(
            rep.r_x,
            CMatrix::from_rows(vec![vec![q(0), q(1)], vec![q(1), q(0)]])
        );
        assert_eq!(rep.r_x.matmul(&rep.r_x), CMatrix::identity(2));
        assert!(rep.relations_hold(0.0));
        assert!(is_irreducible(&rep, 0.0));

        let minus = induce(&chi(q(-1), -1)).unwrap();
        assert!(!is_irreducible(&minus, 0.0));
        assert!(is_irreducible(
            &induce(&chi(Q::from_ints(0, 1), 1)).unwrap(),
            0.0
        ));
    }

    #[test]
    fn character_errors() {
        assert_eq!(Character::new(q(0), q(1), 0.0), Err(Error::ZeroCharacter));
        assert_eq!(
            Character::new(q(2), q(2), 0.0),
            Err(Error::InvalidCharacterZ)
        );
        assert!(
            Character::new(Complex64::new(2.0, 0.0), Complex64::new(-1.0, 1e-12), 1e-9).is_ok()
        );
    }

    #[test]
    fn commutant_examples() {
        let i4 = CMatrix::<Q>::identity(4);
        assert_eq!(commutant(&[i4], 0.0).unwrap().dim(), 16);
        let dims: Vec<usize> = ["2", "1", "-1", "i", "1/2"]
            .iter()
            .map(|t| {
                commutant(&build_generators(&theta(t)).as_vec(), 0.0)
                    .unwrap()
                    .dim()
            })
            .collect();
        assert_eq!(dims, vec![2, 4, 4, 2, 2]);
    }

    #[test]
    fn commutant_matches_brute_force_membership() {
        let gens = build_generators(&theta("2")).as_vec();
        let comm = commutant(&gens, 0.0).unwrap();
        for m in comm.basis() {
            for a in &gens {
                assert_eq!(m.matmul(a), a.matmul(m));
            }
        }
        // identity and Z commute with everything in M_theta
        assert!(comm.contains(&CMatrix::identity(4), 0.0));
        assert!(comm.contains(&gens[2], 0.0));
    }

    #[test]
    fn decompose_at_two() {
        let report = decompose_phi(&theta("2"), 0.0, 7).unwrap();
        assert_eq!(report.block_dims(), vec![2, 2]);
        let chars = report.characters();
        assert_eq!(chars[0], chi(q(2), 1));
        assert_eq!(chars[1], chi(q(-2), -1));
        assert_eq!(report.residual, 0.0);
        assert_eq!(report.induced_residual, 0.0);
        assert_eq!(report.intertwiner_dims, vec![(0, 1, 0)]);
        assert_eq!(report.commutant_dim, 2);

        // oracle: eigenvalues of XY via its characteristic polynomial
        // t^4 - (theta^2 + theta^-2) t^2 + 1 at theta = 2
        let g = build_generators(&theta("2")).g();
        let char_poly = |t: Q| {
            let t2 = t.clone() * t;
            t2.clone() * t2.clone() - Q::from_parts((17, 4), (0, 1)) * t2 + q(1)
        };
        for b in &report.blocks {
            let v = CMatrix::column_vector(b.basis[0].clone());
            assert_eq!(g.matmul(&v), v.scale(&b.character.chi_g));
            assert!(char_poly(b.character.chi_g.clone()).is_zero_within(0.0));
            let w = b.character.chi_g.inv().unwrap();
            assert!(char_poly(w).is_zero_within(0.0));
        }
    }

    #[test]
    fn decompose_at_one() {
        for t in ["1", "-1"] {
            let report = decompose_phi(&theta(t), 0.0, 3).unwrap();
            assert_eq!(report.block_dims(), vec![1, 1, 1, 1]);
            assert_eq!(report.residual, 0.0);
            for b in &report.blocks {
                let c = &b.character;
                assert!(c.chi_g == q(1) || c.chi_g == q(-1));
                if t == "1" {
                    assert!(b.klein_relations_hold(0.0));
                }
            }
            assert!(report.intertwiner_dims.iter().all(|&(_, _, d)| d == 0));
        }
    }

    #[test]
    fn decompose_at_i() {
        let report = decompose_phi(&theta("i"), 0.0, 11).unwrap();
        assert_eq!(report.block_dims(), vec![2, 2]);
        let chars = report.characters();
        assert_eq!(chars[0].chi_z, q(1));
        assert_eq!(chars[1].chi_z, q(-1));
        assert_eq!(chars[0].chi_g, Q::from_ints(0, 1));
        assert_eq!(chars[1].chi_g, Q::from_ints(0, 1));
        assert_eq!(report.residual, 0.0);
        assert_eq!(report.intertwiner_dims, vec![(0, 1, 0)]);
    }

    #[test]
    fn decompose_small_theta_uses_canonical_inverse() {
        let report = decompose_phi(&theta("1/2"), 0.0, 5).unwrap();
        let gs: Vec<Q> = report.characters().into_iter().map(|c| c.chi_g).collect();
        assert_eq!(gs, vec![q(2), q(-2)]);
    }

    #[test]
    fn decompose_float() {
        let t = Theta::new(Complex64::from_polar(1.0, std::f64::consts::PI / 3.0), 1e-9).unwrap();
        let report = decompose_phi(&t, 1e-9, 1).unwrap();
        assert_eq!(report.block_dims(), vec![2, 2]);
        assert!(report.residual <= 1e-10, "{}", report.residual);
        assert!(
            report.induced_residual <= 1e-10,
            "{}",
            report.induced_residual
        );
        assert!((report.blocks[0].character.chi_z - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(report.intertwiner_dims, vec![(0, 1, 0)]);
    }

    proptest! {
        #[test]
        fn induced_reps_satisfy_relations(re in -20i64..20, im in -20i64..20, den in 1i64..9, sign in prop::bool::ANY) {
            prop_assume!(re != 0 || im != 0);
            let g = Q::from_parts((re, den), (im, den));
            let rep = induce(&chi(g, if sign { 1 } else { -1 })).unwrap();
            prop_assert!(rep.relations_hold(0.0));
        }
    }
}
