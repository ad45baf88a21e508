//! The finitely presented algebra A_theta on generators x, y, z with
//!
//! ```text
//! x^2 = y^2 = z^2 = 1,  xz = zx,  yz = zy,  xy + yx = lambda z,   lambda = theta + 1/theta
//! ```
//!
//! realized by a terminating string-rewriting system over the letters
//! `x, y, z, g` (with `g = xy`). Elements are stored as coefficient vectors
//! over the 8 irreducible words. Away from theta = +-i the irreducible words
//! are `1, g, g^2, g^3, x, xg, xg^2, xg^3`; at theta = +-i (lambda = 0) they
//! are `1, g, x, z, xg, xz, gz, xgz`.
//!
//! Rules for lambda != 0, with `mu = lambda^2 - 2`:
//!
//! ```text
//! y    -> xg
//! z    -> lambda^-1 ((lambda^2 - 1) g - g^3)
//! xx   -> 1
//! gx   -> x (mu g - g^3)          (g x = x g^-1)
//! gggg -> mu g^2 - 1
//! ```
//!
//! Rules for lambda = 0:
//!
//! ```text
//! y -> xg,  xx -> 1,  zz -> 1,  gg -> -1,  gx -> -xg,  zx -> xz,  zg -> gz
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{generate_algebra, radical, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::graph::{build_generators, GraphGenerators};
use crate::linalg::{
    linear_combination, solve_homogeneous, span_basis, subspace_equal, CMatrix, Subspace,
};
use crate::scalar::{Scalar, Theta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    X,
    Y,
    Z,
    G,
}

impl Symbol {
    pub const ALL: [Symbol; 4] = [Symbol::X, Symbol::Y, Symbol::Z, Symbol::G];

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'x' => Ok(Symbol::X),
            'y' => Ok(Symbol::Y),
            'z' => Ok(Symbol::Z),
            'g' => Ok(Symbol::G),
            other => Err(Error::UnknownSymbol(other.to_string())),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::X => 'x',
            Symbol::Y => 'y',
            Symbol::Z => 'z',
            Symbol::G => 'g',
        }
    }
}

pub fn parse_word(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(Symbol::from_char)
        .collect()
}

pub fn word_to_string(word: &[Symbol]) -> String {
    if word.is_empty() {
        "1".to_string()
    } else {
        word.iter().map(|s| s.as_char()).collect()
    }
}

/// Which normal-form basis and rule set applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// lambda not in {0, 2, -2}
    Generic,
    /// lambda = +-2, theta = +-1
    Klein,
    /// lambda = 0, theta = +-i
    Clifford,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Generic => "generic",
            Regime::Klein => "klein",
            Regime::Clifford => "clifford",
        })
    }
}

/// Redex selection order used by the rewriter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

#[derive(Debug, Clone)]
struct Rule<S> {
    lhs: Vec<Symbol>,
    rhs: Vec<(S, Vec<Symbol>)>,
}

use Symbol::{G, X, Y, Z};

const GENERIC_BASIS: [&[Symbol]; 8] = [
    &[],
    &[G],
    &[G, G],
    &[G, G, G],
    &[X],
    &[X, G],
    &[X, G, G],
    &[X, G, G, G],
];

const CLIFFORD_BASIS: [&[Symbol]; 8] =
    [&[], &[G], &[X], &[Z], &[X, G], &[X, Z], &[G, Z], &[X, G, Z]];

#[derive(Debug, Clone, PartialEq)]
pub struct FPElement<S> {
    coeffs: Vec<S>,
    regime: Regime,
}

impl<S: Scalar> FPElement<S> {
    pub fn zero(regime: Regime) -> Self {
        Self {
            coeffs: vec![S::zero(); 8],
            regime,
        }
    }

    pub fn basis_element(index: usize, regime: Regime) -> Self {
        let mut e = Self::zero(regime);
        e.coeffs[index] = S::one();
        e
    }

    pub fn from_coeffs(coeffs: Vec<S>, regime: Regime) -> Self {
        assert_eq!(coeffs.len(), 8);
        Self { coeffs, regime }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_within(tol))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_regime(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
            regime: self.regime,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
            regime: self.regime,
        }
    }

    fn same_regime(&self, other: &Self) -> Result<()> {
        if self.regime == other.regime {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                left: self.regime,
                right: other.regime,
            })
        }
    }

    /// Human-readable form over the regime's basis names, e.g. `17/4*g^2 - 1`.
    pub fn display(&self) -> String {
        let names = basis_names(self.regime);
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .zip(names)
            .filter(|(c, _)| !c.is_zero_within(0.0))
            .map(|(c, name)| {
                if *name == "1" {
                    format!("({c})")
                } else if c == &S::one() {
                    name.to_string()
                } else {
                    format!("({c})*{name}")
                }
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

pub fn basis_names(regime: Regime) -> &'static [&'static str; 8] {
    match regime {
        Regime::Clifford => &["1", "g", "x", "z", "xg", "xz", "gz", "xgz"],
        _ => &["1", "g", "g^2", "g^3", "x", "xg", "xg^2", "xg^3"],
    }
}

/// A_theta for a fixed theta: rewriting rules, multiplication table and the
/// images of the basis words under psi.
#[derive(Debug, Clone)]
pub struct FPPresentation<S: Scalar> {
    theta: Theta<S>,
    lambda: S,
    regime: Regime,
    rules: Vec<Rule<S>>,
    basis_words: Vec<Vec<Symbol>>,
    table: Vec<Vec<Vec<S>>>,
    generators: GraphGenerators<S>,
    psi_images: Vec<CMatrix<S>>,
    tol: f64,
}

impl<S: Scalar> FPPresentation<S> {
    pub fn new(theta: &Theta<S>, tol: f64) -> Self {
        let lambda = theta.lambda();
        let two = S::from_i64(2);
        let regime = if lambda.is_zero_within(tol) {
            Regime::Clifford
        } else if (lambda.clone() - two.clone()).is_zero_within(tol)
            || (lambda.clone() + two).is_zero_within(tol)
        {
            Regime::Klein
        } else {
            Regime::Generic
        };
        let rules = match regime {
            Regime::Clifford => clifford_rules(),
            _ => nonzero_lambda_rules(&lambda),
        };
        let basis_words: Vec<Vec<Symbol>> = match regime {
            Regime::Clifford => CLIFFORD_BASIS.iter().map(|w| w.to_vec()).collect(),
            _ => GENERIC_BASIS.iter().map(|w| w.to_vec()).collect(),
        };
        let generators = build_generators(theta);
        let mut pres = Self {
            theta: theta.clone(),
            lambda,
            regime,
            rules,
            basis_words,
            table: Vec::new(),
            psi_images: Vec::new(),
            generators,
            tol,
        };
        pres.psi_images = pres
            .basis_words
            .iter()
            .map(|w| pres.word_matrix(w))
            .collect();
        pres.table = (0..8)
            .map(|i| {
                (0..8)
                    .map(|j| {
                        let mut w = pres.basis_words[i].clone();
                        w.extend_from_slice(&pres.basis_words[j]);
                        pres.rewrite(&w, Strategy::Leftmost).coeffs
                    })
                    .collect()
            })
            .collect();
        pres
    }

    pub fn theta(&self) -> &Theta<S> {
        &self.theta
    }

    pub fn lambda(&self) -> &S {
        &self.lambda
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn basis_words(&self) -> &[Vec<Symbol>] {
        &self.basis_words
    }

    pub fn generators(&self) -> &GraphGenerators<S> {
        &self.generators
    }

    /// Structure constants: `b_i b_j = sum_k table[i][j][k] b_k`.
    pub fn structure_constants(&self) -> &[Vec<Vec<S>>] {
        &self.table
    }

    /// Product of generator matrices along a word (g maps to XY).
    pub fn word_matrix(&self, word: &[Symbol]) -> CMatrix<S> {
        let g = self.generators.g();
        word.iter().fold(CMatrix::identity(4), |acc, s| {
            let m = match s {
                Symbol::X => &self.generators.x,
                Symbol::Y => &self.generators.y,
                Symbol::Z => &self.generators.z,
                Symbol::G => &g,
            };
            acc.matmul(m)
        })
    }

    fn find_redex(&self, word: &[Symbol], strategy: Strategy) -> Option<(usize, &Rule<S>)> {
        let matches_at = |pos: usize| {
            self.rules
                .iter()
                .find(|r| word[pos..].starts_with(&r.lhs))
                .map(|r| (pos, r))
        };
        match strategy {
            Strategy::Leftmost => (0..word.len()).find_map(matches_at),
            Strategy::Rightmost => (0..word.len()).rev().find_map(matches_at),
        }
    }

    fn basis_index(&self, word: &[Symbol]) -> usize {
        self.basis_words
            .iter()
            .position(|b| b == word)
            .unwrap_or_else(|| {
                panic!(
                    "irreducible word {} is not a basis word",
                    word_to_string(word)
                )
            })
    }

    fn apply_rule(word: &[Symbol], pos: usize, rule: &Rule<S>) -> Vec<(Vec<Symbol>, S)> {
        rule.rhs
            .iter()
            .map(|(c, rhs)| {
                let mut w = word[..pos].to_vec();
                w.extend_from_slice(rhs);
                w.extend_from_slice(&word[pos + rule.lhs.len()..]);
                (w, c.clone())
            })
            .collect()
    }

    fn normalize_terms(&self, terms: Vec<(Vec<Symbol>, S)>, strategy: Strategy) -> FPElement<S> {
        let mut out = FPElement::<S>::zero(self.regime);
        let mut pending: BTreeMap<Vec<Symbol>, S> = BTreeMap::new();
        let push = |pending: &mut BTreeMap<Vec<Symbol>, S>, w: Vec<Symbol>, c: S| {
            let entry = pending.entry(w).or_insert_with(S::zero);
            *entry = entry.clone() + c;
        };
        for (w, c) in terms {
            push(&mut pending, w, c);
        }
        // longest words first so that partial results merge before expanding
        while let Some(w) = pending.keys().max_by_key(|w| w.len()).cloned() {
            let c = pending.remove(&w).expect("key present");
            if c.is_zero_within(0.0) {
                continue;
            }
            match self.find_redex(&w, strategy) {
                None => {
                    let idx = self.basis_index(&w);
                    out.coeffs[idx] = out.coeffs[idx].clone() + c;
                }
                Some((pos, rule)) => {
                    for (nw, rc) in Self::apply_rule(&w, pos, rule) {
                        push(&mut pending, nw, c.clone() * rc);
                    }
                }
            }
        }
        out
    }

    /// Normal form of a word under the given redex strategy.
    pub fn rewrite(&self, word: &[Symbol], strategy: Strategy) -> FPElement<S> {
        self.normalize_terms(vec![(word.to_vec(), S::one())], strategy)
    }

    /// Local confluence: every overlap of two rule left-hand sides resolves to
    /// the same normal form both ways. Returns the failing overlap words.
    pub fn critical_pair_failures(&self) -> Vec<String> {
        let mut failures = Vec::new();
        for r1 in &self.rules {
            for r2 in &self.rules {
                let (l1, l2) = (&r1.lhs, &r2.lhs);
                // suffix of l1 overlapping a prefix of l2
                for k in 1..l1.len().min(l2.len()) + 1 {
                    if k == l1.len() && k == l2.len() {
                        continue;
                    }
                    if l1[l1.len() - k..] != l2[..k] {
                        continue;
                    }
                    let mut w = l1.clone();
                    w.extend_from_slice(&l2[k..]);
                    if !self.overlap_resolves(&w, (0, r1), (l1.len() - k, r2)) {
                        failures.push(word_to_string(&w));
                    }
                }
                // l2 strictly inside l1
                if l2.len() < l1.len() {
                    for p in 0..=l1.len() - l2.len() {
                        if l1[p..p + l2.len()] == l2[..]
                            && !self.overlap_resolves(l1, (0, r1), (p, r2))
                        {
                            failures.push(word_to_string(l1));
                        }
                    }
                }
            }
        }
        failures
    }

    fn overlap_resolves(&self, w: &[Symbol], a: (usize, &Rule<S>), b: (usize, &Rule<S>)) -> bool {
        let left = self.normalize_terms(Self::apply_rule(w, a.0, a.1), Strategy::Leftmost);
        let right = self.normalize_terms(Self::apply_rule(w, b.0, b.1), Strategy::Leftmost);
        left.sub(&right).expect("same regime").is_zero(self.tol)
    }

    /// Element for a linear combination of words.
    pub fn element_from_terms(&self, terms: Vec<(Vec<Symbol>, S)>) -> FPElement<S> {
        self.normalize_terms(terms, Strategy::Leftmost)
    }
}

fn word(s: &[Symbol]) -> Vec<Symbol> {
    s.to_vec()
}

fn nonzero_lambda_rules<S: Scalar>(lambda: &S) -> Vec<Rule<S>> {
    let one = S::one();
    let lambda_inv = lambda.inv().expect("lambda != 0 in this regime");
    let mu = lambda.clone() * lambda.clone() - S::from_i64(2);
    vec![
        Rule {
            lhs: word(&[Y]),
            rhs: vec![(one.clone(), word(&[X, G]))],
        },
        Rule {
            lhs: word(&[Z]),
            rhs: vec![
                (
                    lambda_inv.clone() * (lambda.clone() * lambda.clone() - one.clone()),
                    word(&[G]),
                ),
                (-lambda_inv, word(&[G, G, G])),
            ],
        },
        Rule {
            lhs: word(&[X, X]),
            rhs: vec![(one.clone(), Vec::new())],
        },
        Rule {
            lhs: word(&[G, X]),
            rhs: vec![
                (mu.clone(), word(&[X, G])),
                (-one.clone(), word(&[X, G, G, G])),
            ],
        },
        Rule {
            lhs: word(&[G, G, G, G]),
            rhs: vec![(mu, word(&[G, G])), (-one, Vec::new())],
        },
    ]
}

fn clifford_rules<S: Scalar>() -> Vec<Rule<S>> {
    let one = S::one();
    let neg = -S::one();
    vec![
        Rule {
            lhs: word(&[Y]),
            rhs: vec![(one.clone(), word(&[X, G]))],
        },
        Rule {
            lhs: word(&[X, X]),
            rhs: vec![(one.clone(), Vec::new())],
        },
        Rule {
            lhs: word(&[Z, Z]),
            rhs: vec![(one.clone(), Vec::new())],
        },
        Rule {
            lhs: word(&[G, G]),
            rhs: vec![(neg.clone(), Vec::new())],
        },
        Rule {
            lhs: word(&[G, X]),
            rhs: vec![(neg, word(&[X, G]))],
        },
        Rule {
            lhs: word(&[Z, X]),
            rhs: vec![(one.clone(), word(&[X, Z]))],
        },
        Rule {
            lhs: word(&[Z, G]),
            rhs: vec![(one, word(&[G, Z]))],
        },
    ]
}

/// Normal form of a word over `{x, y, z, g}`.
pub fn fp_normal_form<S: Scalar>(word: &[Symbol], pres: &FPPresentation<S>) -> FPElement<S> {
    pres.rewrite(word, Strategy::Leftmost)
}

pub fn fp_multiply<S: Scalar>(
    u: &FPElement<S>,
    v: &FPElement<S>,
    pres: &FPPresentation<S>,
) -> Result<FPElement<S>> {
    u.same_regime(v)?;
    if u.regime != pres.regime {
        return Err(Error::RegimeMismatch {
            left: u.regime,
            right: pres.regime,
        });
    }
    let mut out = vec![S::zero(); 8];
    for (i, a) in u.coeffs.iter().enumerate() {
        if a.is_zero_within(0.0) {
            continue;
        }
        for (j, b) in v.coeffs.iter().enumerate() {
            if b.is_zero_within(0.0) {
                continue;
            }
            let ab = a.clone() * b.clone();
            for (k, c) in pres.table[i][j].iter().enumerate() {
                if !c.is_zero_within(0.0) {
                    out[k] = out[k].clone() + ab.clone() * c.clone();
                }
            }
        }
    }
    Ok(FPElement::from_coeffs(out, u.regime))
}

/// The morphism x -> X, y -> Y, z -> Z into Mat_4.
pub fn psi<S: Scalar>(u: &FPElement<S>, pres: &FPPresentation<S>) -> CMatrix<S> {
    linear_combination(&u.coeffs, &pres.psi_images)
}

/// The 16 x 8 matrix of psi on the normal-form basis.
fn psi_matrix<S: Scalar>(pres: &FPPresentation<S>) -> CMatrix<S> {
    let columns: Vec<Vec<S>> = pres.psi_images.iter().map(CMatrix::flatten).collect();
    CMatrix::from_columns(&columns)
}

/// Kernel of psi inside the 8-dimensional coefficient space (column vectors).
pub fn kernel_of_psi<S: Scalar>(pres: &FPPresentation<S>) -> Subspace<S> {
    solve_homogeneous(&psi_matrix(pres), pres.tol)
}

/// `{g^2 - 1, x(g^2 - 1), g(g^2 - 1), xg(g^2 - 1)}` as elements.
pub fn j_ideal_generators<S: Scalar>(pres: &FPPresentation<S>) -> Vec<FPElement<S>> {
    let one = S::one();
    let minus = -S::one();
    let combos: [Vec<(Vec<Symbol>, S)>; 4] = [
        vec![(word(&[G, G]), one.clone()), (Vec::new(), minus.clone())],
        vec![(word(&[X, G, G]), one.clone()), (word(&[X]), minus.clone())],
        vec![(word(&[G, G, G]), one.clone()), (word(&[G]), minus.clone())],
        vec![(word(&[X, G, G, G]), one), (word(&[X, G]), minus)],
    ];
    combos
        .into_iter()
        .map(|t| pres.element_from_terms(t))
        .collect()
}

pub fn element_subspace<S: Scalar>(elements: &[FPElement<S>], tol: f64) -> Subspace<S> {
    let columns: Vec<CMatrix<S>> = elements
        .iter()
        .map(|e| CMatrix::column_vector(e.coeffs.clone()))
        .collect();
    span_basis(&columns, (8, 1), tol)
}

/// Radical of A_theta through its left-regular representation, as a
/// subspace of coefficient vectors.
pub fn radical_via_regular_representation<S: Scalar>(pres: &FPPresentation<S>) -> Subspace<S> {
    let regular: Vec<CMatrix<S>> = (0..8)
        .map(|i| CMatrix::from_fn(8, 8, |k, j| pres.table[i][j][k].clone()))
        .collect();
    let alg =
        MatrixAlgebra::from_basis(8, regular, pres.tol).expect("regular representation closes");
    // L_a applied to the unit basis vector recovers a
    let vectors: Vec<CMatrix<S>> = radical(&alg)
        .basis()
        .iter()
        .map(|l| CMatrix::column_vector(l.column(0)))
        .collect();
    span_basis(&vectors, (8, 1), pres.tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub regime: Regime,
    pub algebra_dim: usize,
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub m_theta_dim: usize,
    pub checks: Vec<Check>,
}

impl Theorem2Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks the structure of A_theta and of psi: dimension 8, homomorphism,
/// and either bijectivity onto M_theta or, at theta = +-1, the square-zero
/// ideal J generated by g^2 - 1 with A_theta / J isomorphic to M_theta.
pub fn verify_theorem2<S: Scalar>(theta: &Theta<S>, tol: f64) -> Result<Theorem2Report> {
    let pres = FPPresentation::new(theta, tol);
    let mut checks = Vec::new();

    let failures = pres.critical_pair_failures();
    checks.push(Check::new(
        "rewriting system locally confluent",
        failures.is_empty(),
        if failures.is_empty() {
            "all critical pairs resolve".to_string()
        } else {
            failures.join(", ")
        },
    ));

    let (dim_ok, dim_detail) = algebra_dimension_check(&pres);
    checks.push(Check::new("dim A_theta = 8", dim_ok, dim_detail));

    let hom_ok = (0..8).all(|i| {
        (0..8).all(|j| {
            let prod = fp_multiply(
                &FPElement::basis_element(i, pres.regime),
                &FPElement::basis_element(j, pres.regime),
                &pres,
            )
            .expect("same regime");
            (&psi(&prod, &pres) - &pres.psi_images[i].matmul(&pres.psi_images[j])).is_zero(tol)
        })
    });
    checks.push(Check::new(
        "psi is multiplicative",
        hom_ok,
        "psi(b_i b_j) = psi(b_i) psi(b_j)",
    ));

    let m_theta = generate_algebra(&pres.generators.with_identity(), true, tol)?;
    let kernel = kernel_of_psi(&pres);
    let image = span_basis(&pres.psi_images, (4, 4), tol);
    let image_is_m = subspace_equal(&image, &m_theta.as_subspace(), tol);
    let radical = radical_via_regular_representation(&pres);

    if pres.regime == Regime::Klein {
        let j = j_ideal_generators(&pres);
        let square = fp_multiply(&j[0], &j[0], &pres)?;
        checks.push(Check::new(
            "(g^2 - 1)^2 = 0",
            square.is_zero(tol),
            square.display(),
        ));

        let j_space = element_subspace(&j, tol);
        let mut ideal_ok = j_space.dim() == 4;
        for gen in [Symbol::X, Symbol::G] {
            let s = fp_normal_form(&[gen], &pres);
            for t in &j {
                for prod in [fp_multiply(&s, t, &pres)?, fp_multiply(t, &s, &pres)?] {
                    ideal_ok &= j_space.contains(&CMatrix::column_vector(prod.coeffs.clone()), tol);
                }
            }
        }
        checks.push(Check::new(
            "J is a 4-dimensional two-sided ideal",
            ideal_ok,
            format!("dim J = {}", j_space.dim()),
        ));

        let mut j_squared_zero = true;
        for a in &j {
            for b in &j {
                j_squared_zero &= fp_multiply(a, b, &pres)?.is_zero(tol);
            }
        }
        checks.push(Check::new(
            "J^2 = 0",
            j_squared_zero,
            "all pairwise products of the J basis vanish",
        ));

        let psi_j_zero = j.iter().all(|t| psi(t, &pres).is_zero(tol));
        checks.push(Check::new("psi(J) = 0", psi_j_zero, ""));

        checks.push(Check::new(
            "Ker psi = J",
            subspace_equal(&kernel, &j_space, tol),
            format!("dim Ker psi = {}", kernel.dim()),
        ));
        checks.push(Check::new(
            "A_theta / J is isomorphic to M_theta",
            8 - j_space.dim() == m_theta.dim() && image.dim() == m_theta.dim() && image_is_m,
            format!(
                "dim A/J = {}, dim M_theta = {}",
                8 - j_space.dim(),
                m_theta.dim()
            ),
        ));
        checks.push(Check::new(
            "trace-form radical of A_theta = J",
            subspace_equal(&radical, &j_space, tol),
            format!("dim rad = {}", radical.dim()),
        ));
    } else {
        checks.push(Check::new(
            "psi is an isomorphism onto M_theta",
            kernel.dim() == 0 && m_theta.dim() == 8 && image_is_m,
            format!(
                "dim Ker psi = {}, dim M_theta = {}",
                kernel.dim(),
                m_theta.dim()
            ),
        ));
        checks.push(Check::new(
            "A_theta is semisimple",
            radical.dim() == 0,
            format!("dim rad = {}", radical.dim()),
        ));
    }

    Ok(Theorem2Report {
        regime: pres.regime,
        algebra_dim: 8,
        kernel_dim: kernel.dim(),
        image_dim: image.dim(),
        m_theta_dim: m_theta.dim(),
        checks,
    })
}

/// The eight normal forms are distinct basis vectors, the multiplication
/// table is associative with unit 1, and the defining relations hold. Then
/// the table defines an 8-dimensional quotient of A_theta onto which A_theta
/// surjects while being spanned by the same eight words.
fn algebra_dimension_check<S: Scalar>(pres: &FPPresentation<S>) -> (bool, String) {
    let tol = pres.tol;
    let basis_irreducible = pres
        .basis_words
        .iter()
        .enumerate()
        .all(|(i, w)| fp_normal_form(w, pres) == FPElement::basis_element(i, pres.regime));

    let t = &pres.table;
    let mut assoc_ok = true;
    for i in 0..8 {
        for j in 0..8 {
            for k in 0..8 {
                for l in 0..8 {
                    let left = (0..8).fold(S::zero(), |acc, m| {
                        acc + t[i][j][m].clone() * t[m][k][l].clone()
                    });
                    let right = (0..8).fold(S::zero(), |acc, m| {
                        acc + t[j][k][m].clone() * t[i][m][l].clone()
                    });
                    assoc_ok &= (left - right).is_zero_within(tol);
                }
            }
        }
    }

    let nf = |w: &[Symbol]| fp_normal_form(w, pres);
    let one = FPElement::basis_element(0, pres.regime);
    let relations_ok = nf(&[X, X]) == one
        && nf(&[Y, Y]).sub(&one).unwrap().is_zero(tol)
        && nf(&[Z, Z]).sub(&one).unwrap().is_zero(tol)
        && nf(&[X, Z]).sub(&nf(&[Z, X])).unwrap().is_zero(tol)
        && nf(&[Y, Z]).sub(&nf(&[Z, Y])).unwrap().is_zero(tol)
        && nf(&[X, Y])
            .add(&nf(&[Y, X]))
            .unwrap()
            .sub(&nf(&[Z]).scale(pres.lambda()))
            .unwrap()
            .is_zero(tol)
        && nf(&[X, Y]) == FPElement::basis_element(1, pres.regime);

    let ok = basis_irreducible && assoc_ok && relations_ok;
    (
        ok,
        format!(
            "basis irreducible: {basis_irreducible}, associative: {assoc_ok}, relations: {relations_ok}"
        ),
    )
}

/// Element `x^a g^k z^c` of the group G = <x, y, z | x^2 = y^2 = z^2 = 1, z central>,
/// with `g = xy` and `k` any integer (G is infinite).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub x: bool,
    pub g: i64,
    pub z: bool,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        x: false,
        g: 0,
        z: false,
    };

    pub fn generator(s: Symbol) -> Self {
        match s {
            Symbol::X => Self {
                x: true,
                g: 0,
                z: false,
            },
            Symbol::Y => Self {
                x: true,
                g: 1,
                z: false,
            },
            Symbol::Z => Self {
                x: false,
                g: 0,
                z: true,
            },
            Symbol::G => Self {
                x: false,
                g: 1,
                z: false,
            },
        }
    }

    /// Uses `g^k x = x g^-k`.
    pub fn compose(self, other: Self) -> Self {
        let k = if other.x { -self.g } else { self.g };
        Self {
            x: self.x ^ other.x,
            g: k + other.g,
            z: self.z ^ other.z,
        }
    }

    pub fn inverse(self) -> Self {
        let g = if self.x { self.g } else { -self.g };
        Self {
            x: self.x,
            g,
            z: self.z,
        }
    }

    /// Membership in the index-2 subgroup P generated by g and z.
    pub fn in_p(self) -> bool {
        !self.x
    }
}

/// Finitely supported element of the group algebra CG.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAlgebraElement<S> {
    pub terms: BTreeMap<GroupElement, S>,
}

impl<S: Scalar> GroupAlgebraElement<S> {
    pub fn from_element(g: GroupElement) -> Self {
        Self {
            terms: BTreeMap::from([(g, S::one())]),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<GroupElement, S> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = terms.entry(a.compose(*b)).or_insert_with(S::zero);
                *e = e.clone() + ca.clone() * cb.clone();
            }
        }
        terms.retain(|_, c| !c.is_zero_within(0.0));
        Self { terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            let e = terms.entry(*g).or_insert_with(S::zero);
            *e = e.clone() + c.clone();
        }
        terms.retain(|_, c| !c.is_zero_within(0.0));
        Self { terms }
    }
}

/// The representation x -> X, y -> Y, z -> Z of CG on C^4.
pub fn phi_theta<S: Scalar>(u: &GroupAlgebraElement<S>, gens: &GraphGenerators<S>) -> CMatrix<S> {
    let g = gens.g();
    let g_inv = gens.y.matmul(&gens.x);
    u.terms.iter().fold(CMatrix::zeros(4, 4), |acc, (e, c)| {
        let power = if e.g >= 0 {
            g.pow(e.g as usize)
        } else {
            g_inv.pow((-e.g) as usize)
        };
        let mut m = if e.x { gens.x.matmul(&power) } else { power };
        if e.z {
            m = m.matmul(&gens.z);
        }
        &acc + &m.scale(c)
    })
}
