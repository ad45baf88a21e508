//! Acceptance gate: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the report is always printed; exits nonzero if any line fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opgraph_core::algebra::{
    block_decompose, central_idempotents, generate_algebra, MatrixAlgebra,
};
use opgraph_core::channels::{
    random_channel, random_complex_matrix, random_density, random_unitary,
};
use opgraph_core::fp_algebra::{
    element_subspace, fp_multiply, fp_normal_form, j_ideal_generators, kernel_of_psi, psi,
    verify_theorem2, FPElement, FPPresentation, Symbol,
};
use opgraph_core::graph::{build_generators, check_relations, is_operator_system};
use opgraph_core::linalg::{span_basis, subspace_equal, CMatrix, Echelon, Subspace};
use opgraph_core::rep::decompose_phi;
use opgraph_core::scalar::{parse_theta, AnyTheta, Backend, GaussianRational as Q, Scalar, Theta};
use opgraph_core::spectral::RootFinder;

const EXACT_SAMPLE: [&str; 7] = ["2", "-2", "1/2", "3", "i", "-i", "3/5+4/5*i"];
const FLOAT_SAMPLE: [&str; 2] = ["exp(i*pi/3)", "exp(i*pi/7)"];
const KLEIN_SAMPLE: [&str; 2] = ["1", "-1"];
const FLOAT_RANK_TOL: f64 = 1e-9;
const FLOAT_RESIDUAL: f64 = 1e-10;
const SEED: u64 = 2024;

fn exact(text: &str) -> Theta<Q> {
    match parse_theta(text, Backend::Exact).expect("valid theta") {
        AnyTheta::Exact(t) => t,
        AnyTheta::Float(_) => unreachable!(),
    }
}

fn float(text: &str) -> Theta<Complex64> {
    match parse_theta(text, Backend::Float).expect("valid theta") {
        AnyTheta::Float(t) => t,
        AnyTheta::Exact(_) => unreachable!(),
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn m_theta<S: Scalar>(theta: &Theta<S>, tol: f64) -> MatrixAlgebra<S> {
    generate_algebra(&build_generators(theta).with_identity(), true, tol)
        .expect("nonempty generators")
}

// ---------------------------------------------------------------- criterion 1

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut check = |label: &str, dim: usize, expected: usize, elapsed: Duration| {
        slowest = slowest.max(elapsed);
        if dim != expected || elapsed >= Duration::from_secs(1) {
            failures.push(format!(
                "{label}: dim {dim} (want {expected}) in {elapsed:?}"
            ));
        }
    };
    for t in EXACT_SAMPLE {
        let start = Instant::now();
        let dim = m_theta(&exact(t), 0.0).dim();
        check(t, dim, 8, start.elapsed());
    }
    for t in FLOAT_SAMPLE {
        let start = Instant::now();
        let dim = m_theta(&float(t), FLOAT_RANK_TOL).dim();
        check(t, dim, 8, start.elapsed());
    }
    for t in KLEIN_SAMPLE {
        let start = Instant::now();
        let dim = m_theta(&exact(t), 0.0).dim();
        check(t, dim, 4, start.elapsed());
    }
    if failures.is_empty() {
        Outcome::new(
            true,
            format!("dim 8 on 9 generic points, dim 4 at +-1; slowest {slowest:?}"),
        )
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

// ---------------------------------------------------------------- criterion 2

/// Residuals of the central idempotents used for the split: `e^2 = e`,
/// `e` central, `sum e = I`.
fn idempotent_residual<S: RootFinder>(a: &MatrixAlgebra<S>) -> f64 {
    let Ok(idempotents) = central_idempotents(a, SEED) else {
        return f64::INFINITY;
    };
    let n = a.matrix_size();
    let mut worst = 0.0f64;
    let mut sum = CMatrix::zeros(n, n);
    for e in &idempotents {
        worst = worst.max(e.matmul(e).residual(e));
        for b in a.basis() {
            worst = worst.max(e.matmul(b).residual(&b.matmul(e)));
        }
        sum = &sum + e;
    }
    worst.max(sum.residual(&CMatrix::identity(n)))
}

fn blocks_ok<S: RootFinder>(
    label: &str,
    theta: &Theta<S>,
    tol: f64,
    limit: f64,
    klein: bool,
    failures: &mut Vec<String>,
) {
    let a = m_theta(theta, tol);
    let report = match block_decompose(&a, SEED) {
        Ok(r) => r,
        Err(e) => {
            failures.push(format!("{label}: {e}"));
            return;
        }
    };
    let expected = if klein {
        vec![(1, 1); 4]
    } else {
        vec![(4, 2); 2]
    };
    let full = report.blocks.iter().all(|b| b.is_full_matrix_algebra);
    let residual = idempotent_residual(&a);
    if report.profile() != expected || !full || residual > limit || report.backend_downgraded {
        failures.push(format!(
            "{label}: profile {:?}, full {full}, residual {residual:e}, downgraded {}",
            report.profile(),
            report.backend_downgraded
        ));
    }
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    for t in EXACT_SAMPLE {
        blocks_ok(t, &exact(t), 0.0, 0.0, false, &mut failures);
    }
    for t in FLOAT_SAMPLE {
        blocks_ok(
            t,
            &float(t),
            FLOAT_RANK_TOL,
            FLOAT_RESIDUAL,
            false,
            &mut failures,
        );
    }
    for t in KLEIN_SAMPLE {
        blocks_ok(t, &exact(t), 0.0, 0.0, true, &mut failures);
    }
    if failures.is_empty() {
        Outcome::new(
            true,
            "2 x Mat2 on generic points, 4 x Mat1 at +-1; idempotent residuals 0 / <= 1e-10",
        )
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

// ---------------------------------------------------------------- criterion 3

fn theorem2_point(label: &str, theta: &Theta<Q>, failures: &mut Vec<String>) {
    let pres = FPPresentation::new(theta, 0.0);
    let report = match verify_theorem2(theta, 0.0) {
        Ok(r) => r,
        Err(e) => {
            failures.push(format!("{label}: {e}"));
            return;
        }
    };
    if !report.all_passed() {
        let bad: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        failures.push(format!("{label}: failed {bad:?}"));
    }
    let regime = pres.regime();
    let basis: Vec<FPElement<Q>> = (0..8)
        .map(|i| FPElement::basis_element(i, regime))
        .collect();
    let independent = element_subspace(&basis, 0.0).dim() == 8;
    let closed = pres
        .basis_words()
        .iter()
        .enumerate()
        .all(|(i, w)| fp_normal_form(w, &pres) == basis[i]);
    if !independent || !closed {
        failures.push(format!(
            "{label}: basis independent {independent}, normal forms fixed {closed}"
        ));
    }
    let kernel = kernel_of_psi(&pres);
    let klein = theta.is_klein_point(0.0);
    if !klein {
        if kernel.dim() != 0 {
            failures.push(format!("{label}: dim Ker psi = {}", kernel.dim()));
        }
        return;
    }
    let j = j_ideal_generators(&pres);
    let j_space = element_subspace(&j, 0.0);
    if kernel.dim() != 4 || !subspace_equal(&kernel, &j_space, 0.0) {
        failures.push(format!(
            "{label}: Ker psi dim {} differs from J",
            kernel.dim()
        ));
    }
    let g2_minus_1 = &j[0];
    match fp_multiply(g2_minus_1, g2_minus_1, &pres) {
        Ok(sq) if sq.is_zero(0.0) => {}
        _ => failures.push(format!("{label}: (g^2-1)^2 != 0")),
    }
    for a in &j {
        for b in &j {
            if !fp_multiply(a, b, &pres)
                .map(|p| p.is_zero(0.0))
                .unwrap_or(false)
            {
                failures.push(format!("{label}: J^2 != 0"));
            }
        }
        if !psi(a, &pres).is_zero(0.0) {
            failures.push(format!("{label}: psi(J) != 0"));
        }
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for t in EXACT_SAMPLE.iter().chain(KLEIN_SAMPLE.iter()) {
        theorem2_point(t, &exact(t), &mut failures);
    }
    // (g^2 - 1)^2 straight from the word g^4 - 2 g^2 + 1
    for t in KLEIN_SAMPLE {
        let pres = FPPresentation::new(&exact(t), 0.0);
        let g4 = fp_normal_form(&[Symbol::G; 4], &pres);
        let g2 = fp_normal_form(&[Symbol::G; 2], &pres);
        let one = fp_normal_form(&[], &pres);
        let value = g4
            .sub(&g2.scale(&Q::from_ints(2, 0)))
            .and_then(|v| v.add(&one));
        if !value.map(|v| v.is_zero(0.0)).unwrap_or(false) {
            failures.push(format!("{t}: g^4 - 2g^2 + 1 != 0"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    if failures.is_empty() {
        Outcome::new(
            true,
            format!("9 exact points, Ker psi = 0 / J, J^2 = 0, psi(J) = 0; {elapsed:?}"),
        )
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_exact = 0.0f64;
    let mut worst_float = 0.0f64;
    let mut drawn = 0;
    while drawn < 10 {
        let re = (rng.random_range(-30i64..=30), rng.random_range(1i64..=12));
        let im = (rng.random_range(-30i64..=30), rng.random_range(1i64..=12));
        let Ok(theta) = Theta::new(Q::from_parts(re, im), 0.0) else {
            continue;
        };
        drawn += 1;
        worst_exact =
            worst_exact.max(check_relations(&build_generators(&theta), 0.0).max_residual());
    }
    for _ in 0..10 {
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let theta =
            Theta::new(Complex64::from_polar(1.0, angle), FLOAT_RANK_TOL).expect("unit modulus");
        worst_float =
            worst_float.max(check_relations(&build_generators(&theta), 1e-12).max_residual());
    }
    Outcome::new(
        worst_exact == 0.0 && worst_float <= 1e-12,
        format!("exact max residual {worst_exact:e}, float max residual {worst_float:e}"),
    )
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    match decompose_phi(&exact("2"), 0.0, SEED) {
        Ok(r) => {
            let gs: Vec<Q> = r.characters().into_iter().map(|c| c.chi_g).collect();
            if gs != vec![Q::from_ints(2, 0), Q::from_ints(-2, 0)] {
                failures.push(format!("theta=2 characters {gs:?}"));
            }
            if r.residual != 0.0 || r.induced_residual != 0.0 {
                failures.push(format!(
                    "theta=2 residual {:e} / {:e}",
                    r.residual, r.induced_residual
                ));
            }
            if r.intertwiner_dims.iter().any(|&(_, _, d)| d != 0) {
                failures.push("theta=2 blocks intertwine".into());
            }
        }
        Err(e) => failures.push(format!("theta=2: {e}")),
    }
    match decompose_phi(&exact("1"), 0.0, SEED) {
        Ok(r) => {
            if r.block_dims() != vec![1; 4] {
                failures.push(format!("theta=1 block dims {:?}", r.block_dims()));
            }
            if !r.blocks.iter().all(|b| b.klein_relations_hold(0.0)) {
                failures.push("theta=1 Klein relations fail blockwise".into());
            }
            if r.residual != 0.0 {
                failures.push(format!("theta=1 residual {:e}", r.residual));
            }
        }
        Err(e) => failures.push(format!("theta=1: {e}")),
    }
    if failures.is_empty() {
        Outcome::new(
            true,
            "theta=2: chi(g) = 2, -2, no intertwiner; theta=1: four Klein lines",
        )
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tol = FLOAT_RANK_TOL;
    let mut worst_gap = 0.0f64;
    let mut failures = Vec::new();
    for trial in 0..100 {
        let d_in = rng.random_range(1usize..=4);
        let d_out = rng.random_range(1usize..=4);
        let k = rng.random_range(d_in.div_ceil(d_out)..=4);
        let ch = random_channel(d_in, d_out, k, &mut rng).expect("admissible shape");
        let rho = random_density(d_in, &mut rng);
        let x = random_complex_matrix(d_out, d_out, &mut rng);
        worst_gap = worst_gap.max(ch.duality_gap(&rho, &x).expect("shapes match"));
        let graph = ch.nc_graph(tol);
        if !subspace_equal(&graph, &ch.graph_via_dual(tol), tol) {
            failures.push(format!("trial {trial}: graph differs from dual image"));
        }
        if !graph.contains_identity(tol) || !graph.is_operator_system(tol) {
            failures.push(format!("trial {trial}: graph is not an operator system"));
        }
        let mixed = ch
            .mix_kraus(&random_unitary(k, &mut rng))
            .expect("square mixing");
        if !subspace_equal(&graph, &mixed.nc_graph(tol), tol) {
            failures.push(format!("trial {trial}: graph changed under Kraus mixing"));
        }
    }
    let elapsed = start.elapsed();
    if worst_gap > 1e-12 {
        failures.push(format!("duality gap {worst_gap:e}"));
    }
    if elapsed >= Duration::from_secs(5) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    if failures.is_empty() {
        Outcome::new(
            true,
            format!("100 channels, duality gap <= {worst_gap:e}; {elapsed:?}"),
        )
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    for t in EXACT_SAMPLE.iter().chain(KLEIN_SAMPLE.iter()) {
        let theta = exact(t);
        let modulus_one = theta.value().modulus_sqr() == Q::from_ints(1, 0).modulus_sqr();
        if is_operator_system(&theta, 0.0) != modulus_one {
            failures.push(t.to_string());
        }
    }
    for t in FLOAT_SAMPLE {
        let theta = float(t);
        let modulus_one = (theta.value().norm() - 1.0).abs() <= FLOAT_RANK_TOL;
        if is_operator_system(&theta, FLOAT_RANK_TOL) != modulus_one {
            failures.push(t.to_string());
        }
    }
    if failures.is_empty() {
        Outcome::new(
            true,
            "operator system exactly when |theta| = 1 on all 11 points",
        )
    } else {
        Outcome::new(false, format!("mismatch at {}", failures.join(", ")))
    }
}

// ---------------------------------------------------------------- criterion 8

fn small_int(rng: &mut ChaCha8Rng) -> Q {
    Q::from_ints(rng.random_range(-3i64..=3), rng.random_range(-1i64..=1))
}

fn random_family(index: usize, rng: &mut ChaCha8Rng) -> Vec<CMatrix<Q>> {
    let family = index % 5;
    let n = 3 + (index / 5) % 2;
    let count = 2 + index / 10;
    let mut mats = Vec::new();
    let base = CMatrix::from_fn(n, n, |_, _| small_int(rng));
    for _ in 0..count {
        let m = match family {
            0 => CMatrix::from_fn(n, n, |_, _| small_int(rng)),
            1 => CMatrix::from_fn(n, n, |i, j| if i <= j { small_int(rng) } else { Q::zero() }),
            2 => {
                let split = n / 2;
                CMatrix::from_fn(n, n, |i, j| {
                    if (i < split) == (j < split) {
                        small_int(rng)
                    } else {
                        Q::zero()
                    }
                })
            }
            3 => {
                // polynomials in one shared matrix commute
                let c: Vec<Q> = (0..3).map(|_| small_int(rng)).collect();
                let mut acc = CMatrix::identity(n).scale(&c[0]);
                acc = &acc + &base.scale(&c[1]);
                &acc + &base.matmul(&base).scale(&c[2])
            }
            _ => CMatrix::diagonal(&(0..n).map(|_| small_int(rng)).collect::<Vec<_>>()),
        };
        mats.push(m);
    }
    mats
}

/// Span of all words of length <= `max_len` in `gens`, built level by level.
/// A word that is already in the span of earlier words is not extended: its
/// extensions lie in the span of the extensions of those earlier words, which
/// are enumerated anyway.
fn word_span(gens: &[CMatrix<Q>], max_len: usize) -> Subspace<Q> {
    let n = gens[0].rows();
    let identity = CMatrix::identity(n);
    let mut ech = Echelon::new(n * n, 0.0);
    ech.insert(&identity.flatten());
    let mut kept = vec![identity.clone()];
    let mut frontier = vec![identity];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let candidate = w.matmul(g);
                if ech.insert(&candidate.flatten()) {
                    kept.push(candidate.clone());
                    next.push(candidate);
                }
            }
        }
        frontier = next;
    }
    span_basis(&kept, (n, n), 0.0)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    let mut dims = Vec::new();
    for index in 0..20 {
        let gens = random_family(index, &mut rng);
        let algebra = generate_algebra(&gens, true, 0.0)
            .expect("generators")
            .as_subspace();
        let oracle = word_span(&gens, 6);
        let forward = algebra.basis().iter().all(|m| oracle.contains(m, 0.0));
        let backward = oracle.basis().iter().all(|m| algebra.contains(m, 0.0));
        dims.push(algebra.dim());
        if algebra.dim() != oracle.dim() || !forward || !backward {
            failures.push(format!(
                "set {index}: closure {} vs words {}",
                algebra.dim(),
                oracle.dim()
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(10) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    if failures.is_empty() {
        Outcome::new(true, format!("20 sets, dims {dims:?}; {elapsed:?}"))
    } else {
        Outcome::new(false, failures.join("; "))
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("C1 dimension dichotomy of M_theta", criterion_1),
        ("C2 block structure", criterion_2),
        ("C3 A_theta, Ker psi and J", criterion_3),
        ("C4 generator relations", criterion_4),
        ("C5 decomposition of phi_theta", criterion_5),
        ("C6 channel identities", criterion_6),
        ("C7 operator-system criterion", criterion_7),
        ("C8 closure vs word-span oracle", criterion_8),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        all &= outcome.passed;
        println!(
            "{} {name} [{:.3}s]: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
