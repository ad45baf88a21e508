//! The operator graph L(theta) on C^4, its generators X, Y, Z and the
//! operator-system test.
//!
//! Indices in comments are 1-based (row, column), stored 0-based.

use crate::linalg::{span_basis, CMatrix, Subspace};
use crate::scalar::{Scalar, Theta};

/// Graph element with coordinates (a, b, c, d).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphElement<S: Scalar> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
    pub theta: Theta<S>,
}

impl<S: Scalar> GraphElement<S> {
    pub fn materialize(&self) -> CMatrix<S> {
        build_graph_element(&self.a, &self.b, &self.c, &self.d, &self.theta)
    }
}

/// ```text
/// | a      b      c*t    d     |
/// | b      a      d      c/t   |
/// | c/t    d      a      b     |
/// | d      c*t    b      a     |
/// ```
pub fn build_graph_element<S: Scalar>(a: &S, b: &S, c: &S, d: &S, theta: &Theta<S>) -> CMatrix<S> {
    let ct = c.clone() * theta.value().clone();
    let c_t = c.clone() * theta.inverse();
    CMatrix::from_rows(vec![
        vec![a.clone(), b.clone(), ct.clone(), d.clone()],
        vec![b.clone(), a.clone(), d.clone(), c_t.clone()],
        vec![c_t, d.clone(), a.clone(), b.clone()],
        vec![d.clone(), ct, b.clone(), a.clone()],
    ])
}

#[derive(Debug, Clone)]
pub struct GraphGenerators<S: Scalar> {
    pub x: CMatrix<S>,
    pub y: CMatrix<S>,
    pub z: CMatrix<S>,
    pub theta: Theta<S>,
}

impl<S: Scalar> GraphGenerators<S> {
    /// `g = XY`
    pub fn g(&self) -> CMatrix<S> {
        self.x.matmul(&self.y)
    }

    pub fn as_vec(&self) -> Vec<CMatrix<S>> {
        vec![self.x.clone(), self.y.clone(), self.z.clone()]
    }

    /// `{I, X, Y, Z}`
    pub fn with_identity(&self) -> Vec<CMatrix<S>> {
        vec![
            CMatrix::identity(4),
            self.x.clone(),
            self.y.clone(),
            self.z.clone(),
        ]
    }
}

pub fn build_generators<S: Scalar>(theta: &Theta<S>) -> GraphGenerators<S> {
    let (zero, one) = (S::zero(), S::one());
    let element = |a: &S, b: &S, c: &S, d: &S| build_graph_element(a, b, c, d, theta);
    GraphGenerators {
        x: element(&zero, &one, &zero, &zero),
        y: element(&zero, &zero, &one, &zero),
        z: element(&zero, &zero, &zero, &one),
        theta: theta.clone(),
    }
}

/// Span of L(theta), i.e. `span{I, X, Y, Z}`.
pub fn graph_span<S: Scalar>(theta: &Theta<S>, tol: f64) -> Subspace<S> {
    span_basis(&build_generators(theta).with_identity(), (4, 4), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationResidual {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationsReport {
    pub residuals: Vec<RelationResidual>,
    /// `XY == YX == Z`, which holds exactly at the Klein points.
    pub klein_relations: bool,
}

impl RelationsReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn all_hold(&self, tol: f64) -> bool {
        self.residuals.iter().all(|r| r.residual <= tol)
    }
}

/// Residuals of `X^2 = Y^2 = Z^2 = I`, `XZ = ZX`, `YZ = ZY` and
/// `XY + YX = (theta + 1/theta) Z`.
pub fn check_relations<S: Scalar>(gens: &GraphGenerators<S>, tol: f64) -> RelationsReport {
    let i4 = CMatrix::<S>::identity(4);
    let (x, y, z) = (&gens.x, &gens.y, &gens.z);
    let xy = x.matmul(y);
    let yx = y.matmul(x);
    let lambda = gens.theta.lambda();
    let residuals = vec![
        RelationResidual {
            name: "X^2 = I",
            residual: x.matmul(x).residual(&i4),
        },
        RelationResidual {
            name: "Y^2 = I",
            residual: y.matmul(y).residual(&i4),
        },
        RelationResidual {
            name: "Z^2 = I",
            residual: z.matmul(z).residual(&i4),
        },
        RelationResidual {
            name: "XZ = ZX",
            residual: x.matmul(z).residual(&z.matmul(x)),
        },
        RelationResidual {
            name: "YZ = ZY",
            residual: y.matmul(z).residual(&z.matmul(y)),
        },
        RelationResidual {
            name: "XY + YX = (theta + 1/theta) Z",
            residual: (&xy + &yx).residual(&z.scale(&lambda)),
        },
    ];
    let klein_relations = (&xy - z).is_zero(tol) && (&yx - z).is_zero(tol);
    RelationsReport {
        residuals,
        klein_relations,
    }
}

/// Whether span L(theta) is an operator system, decided by adjoint membership
/// of each basis element. Equivalent to `|theta| == 1`.
pub fn is_operator_system<S: Scalar>(theta: &Theta<S>, tol: f64) -> bool {
    graph_span(theta, tol).is_operator_system(tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{parse_theta, AnyTheta, Backend, GaussianRational as Q};
    use num_complex::Complex64;

    fn theta(text: &str) -> Theta<Q> {
        match parse_theta(text, Backend::Exact).unwrap() {
            AnyTheta::Exact(t) => t,
            _ => unreachable!(),
        }
    }

    fn q(n: i64) -> Q {
        Q::from_ints(n, 0)
    }

    fn perm(pairs: &[(usize, usize)]) -> CMatrix<Q> {
        // 1-based positions holding 1
        let mut m = CMatrix::zeros(4, 4);
        for &(i, j) in pairs {
            m.set(i - 1, j - 1, q(1));
        }
        m
    }

    #[test]
    fn identity_element() {
        for t in ["1", "2", "3/5+4/5*i"] {
            let m = build_graph_element(&q(1), &q(0), &q(0), &q(0), &theta(t));
            assert_eq!(m, CMatrix::identity(4));
        }
    }

    #[test]
    fn c_component_entries() {
        let m = build_graph_element(&q(0), &q(0), &q(1), &q(0), &theta("1"));
        assert_eq!(m, perm(&[(1, 3), (2, 4), (3, 1), (4, 2)]));
        let m = build_graph_element(&q(0), &q(0), &q(1), &q(0), &theta("2"));
        let half = Q::from_parts((1, 2), (0, 1));
        assert_eq!(m.get(0, 2), &q(2));
        assert_eq!(m.get(3, 1), &q(2));
        assert_eq!(m.get(1, 3), &half);
        assert_eq!(m.get(2, 0), &half);
    }

    #[test]
    fn generator_entries() {
        let g = build_generators(&theta("1"));
        assert_eq!(g.y, perm(&[(1, 3), (3, 1), (2, 4), (4, 2)]));
        for t in ["1", "2", "i", "-1/3"] {
            let g = build_generators(&theta(t));
            assert_eq!(g.x, perm(&[(1, 2), (2, 1), (3, 4), (4, 3)]));
            assert_eq!(g.z, perm(&[(1, 4), (2, 3), (3, 2), (4, 1)]));
        }
        let g = build_generators(&theta("i"));
        assert_eq!(g.y.get(0, 2), &Q::from_ints(0, 1));
        assert_eq!(g.y.get(1, 3), &Q::from_ints(0, -1));
    }

    #[test]
    fn materialize_is_linear() {
        let t = theta("2+i");
        let e1 = build_graph_element(&q(1), &q(2), &q(3), &q(4), &t);
        let e2 = build_graph_element(&q(-5), &Q::from_ints(0, 1), &q(7), &q(0), &t);
        let sum = build_graph_element(&q(-4), &Q::from_ints(2, 1), &q(10), &q(4), &t);
        assert_eq!(&e1 + &e2, sum);
        let el = GraphElement {
            a: q(1),
            b: q(2),
            c: q(3),
            d: q(4),
            theta: t,
        };
        assert_eq!(el.materialize(), e1);
    }

    #[test]
    fn relations_exact_at_two() {
        let report = check_relations(&build_generators(&theta("2")), 0.0);
        assert_eq!(report.max_residual(), 0.0);
        assert!(!report.klein_relations);
    }

    #[test]
    fn relations_klein_at_one() {
        let report = check_relations(&build_generators(&theta("1")), 0.0);
        assert_eq!(report.max_residual(), 0.0);
        assert!(report.klein_relations);
        let report = check_relations(&build_generators(&theta("-1")), 0.0);
        // at theta = -1 the Klein relations hold with Z replaced by -Z
        assert_eq!(report.max_residual(), 0.0);
    }

    #[test]
    fn relations_float() {
        let t = Theta::new(Complex64::from_polar(1.0, std::f64::consts::PI / 5.0), 1e-9).unwrap();
        let report = check_relations(&build_generators(&t), 1e-12);
        assert!(report.max_residual() <= 1e-12, "{report:?}");
    }

    #[test]
    fn graph_span_dimension_four() {
        for t in ["1", "-1", "i", "-i", "2", "1/2", "3/5+4/5*i", "7-2*i"] {
            assert_eq!(graph_span(&theta(t), 0.0).dim(), 4, "{t}");
        }
    }

    #[test]
    fn operator_system_iff_unit_modulus() {
        for (t, expected) in [
            ("1", true),
            ("-1", true),
            ("i", true),
            ("-i", true),
            ("2", false),
            ("1/2", false),
            ("3/5+4/5*i", true),
        ] {
            let th = theta(t);
            assert_eq!(is_operator_system(&th, 0.0), expected, "{t}");
            assert_eq!(th.on_unit_circle(), expected, "{t}");
        }
        let t = Theta::new(Complex64::from_polar(1.0, std::f64::consts::PI / 3.0), 1e-9).unwrap();
        assert!(is_operator_system(&t, 1e-9));
        let t = Theta::new(Complex64::new(2.0, 0.0), 1e-9).unwrap();
        assert!(!is_operator_system(&t, 1e-9));
    }
}
