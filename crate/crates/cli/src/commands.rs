//! The five subcommands. Each builds a [`Report`]; exit status is decided by
//! whether every check matches the predicted outcome for its theta.

use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use opgraph_core::algebra::{block_decompose, generate_algebra};
use opgraph_core::channels::{
    pseudo_diagonal, random_complex_matrix, random_density, KrausChannel,
};
use opgraph_core::fp_algebra::{fp_multiply, psi, verify_theorem2, FPPresentation};
use opgraph_core::graph::{build_generators, check_relations, graph_span, is_operator_system};
use opgraph_core::linalg::subspace_equal;
use opgraph_core::rep::decompose_phi;
use opgraph_core::scalar::{parse_theta_with_tol, Backend};
use opgraph_core::spectral::RootFinder;
use opgraph_core::{AnyTheta, CMatrix, Error, GaussianRational, Scalar, Theta};

use crate::expr::parse_element;
use crate::io::{load_channel, matrix_json, scalar_json, LoadedChannel};
use crate::report::{CheckRecord, Report};
use crate::{BackendChoice, ChannelAction, CliError, GlobalOpts};

fn config(command: &str, theta_spec: Option<&str>, opts: &GlobalOpts, extra: Value) -> Value {
    let mut c = json!({
        "command": command,
        "theta_spec": theta_spec,
        "backend": opts.backend.as_str(),
        "tol": opts.tol,
        "seed": opts.seed,
        "output": if opts.json { "json" } else { "text" },
        "output_path": opts.out.as_ref().map(|p| p.display().to_string()),
    });
    if let (Some(obj), Value::Object(more)) = (c.as_object_mut(), extra) {
        obj.extend(more);
    }
    c
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Parses theta under the requested backend; `auto` falls back to float for
/// the `exp(...)` form.
pub fn resolve_theta(text: &str, backend: BackendChoice, tol: f64) -> Result<AnyTheta, CliError> {
    let parsed = match backend {
        BackendChoice::Exact => parse_theta_with_tol(text, Backend::Exact, tol),
        BackendChoice::Float => parse_theta_with_tol(text, Backend::Float, tol),
        BackendChoice::Auto => match parse_theta_with_tol(text, Backend::Exact, tol) {
            Err(Error::ExactNeedsGaussian) => parse_theta_with_tol(text, Backend::Float, tol),
            other => other,
        },
    };
    Ok(parsed?)
}

/// Tolerance actually used for comparisons: zero on the exact backend.
fn effective_tol<S: Scalar>(tol: f64) -> f64 {
    if S::is_exact() {
        0.0
    } else {
        tol
    }
}

fn is_one<S: Scalar>(s: &S, tol: f64) -> bool {
    (s.clone() - S::one()).is_zero_within(tol)
}

fn profile_string(p: &[(usize, usize)]) -> String {
    p.iter()
        .map(|&(dim, size)| {
            if size * size == dim {
                format!("Mat{size}")
            } else {
                format!("dim{dim}")
            }
        })
        .collect::<Vec<_>>()
        .join("+")
}

/// Everything `verify` computes for one theta.
struct PointResult {
    checks: Vec<CheckRecord>,
    data: Value,
}

fn verify_point<S: RootFinder>(
    theta: &Theta<S>,
    tol: f64,
    seed: u64,
) -> Result<PointResult, CliError> {
    let tol = effective_tol::<S>(tol);
    let b = S::BACKEND;
    let klein = theta.is_klein_point(tol);
    let mut checks = Vec::new();

    let gens = build_generators(theta);
    let rel = check_relations(&gens, tol);
    let max_rel = rel.max_residual();
    checks.push(
        CheckRecord::new("relations of X, Y, Z", rel.all_hold(tol), b)
            .residual(max_rel)
            .detail(
                rel.residuals
                    .iter()
                    .map(|r| r.name)
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
    );
    let klein_expected = is_one(theta.value(), tol);
    checks.push(
        CheckRecord::new(
            "XY = YX = Z exactly when theta = 1",
            rel.klein_relations == klein_expected,
            b,
        )
        .detail(format!("holds: {}", rel.klein_relations)),
    );

    let m_theta = generate_algebra(&gens.with_identity(), true, tol)?;
    let expected_dim = if klein { 4 } else { 8 };
    checks.push(
        CheckRecord::new("dim M_theta", m_theta.dim() == expected_dim, b)
            .dim("dim", m_theta.dim())
            .dim("expected", expected_dim),
    );

    let structure = block_decompose(&m_theta, seed)?;
    let profile = structure.profile();
    let expected_profile = if klein {
        vec![(1, 1); 4]
    } else {
        vec![(4, 2); 2]
    };
    let full = structure.blocks.iter().all(|bl| bl.is_full_matrix_algebra);
    checks.push(
        CheckRecord::new(
            "Wedderburn blocks of M_theta",
            profile == expected_profile && full && structure.radical_dim == 0,
            structure.backend,
        )
        .dim("blocks", profile.len())
        .dim("radical", structure.radical_dim)
        .dim("center", structure.center_dim)
        .detail(format!(
            "{}{}",
            profile_string(&profile),
            if structure.backend_downgraded {
                ", split on float after exact failure"
            } else {
                ""
            }
        )),
    );

    let t2 = verify_theorem2(theta, tol)?;
    for c in &t2.checks {
        checks.push(CheckRecord::new(c.name.clone(), c.passed, b).detail(c.detail.clone()));
    }

    let dec = decompose_phi(theta, tol, seed)?;
    let dims = dec.block_dims();
    let expected_blocks = if klein { vec![1; 4] } else { vec![2; 2] };
    let no_hom = dec.intertwiner_dims.iter().all(|&(_, _, d)| d == 0);
    checks.push(
        CheckRecord::new(
            "phi_theta splits into pairwise inequivalent irreducibles",
            dims == expected_blocks && no_hom && dec.residual <= tol,
            dec.backend,
        )
        .residual(dec.residual)
        .dim("blocks", dims.len())
        .dim("commutant", dec.commutant_dim)
        .detail(format!("block dims {dims:?}")),
    );
    if !klein {
        checks.push(
            CheckRecord::new(
                "blocks match the induced representations",
                dec.induced_residual <= tol,
                dec.backend,
            )
            .residual(dec.induced_residual),
        );
    }

    let op_sys = is_operator_system(theta, tol);
    let unit = theta.on_unit_circle();
    checks.push(
        CheckRecord::new(
            "span L(theta) is an operator system iff |theta| = 1",
            op_sys == unit,
            b,
        )
        .detail(format!("operator system: {op_sys}, |theta| = 1: {unit}")),
    );

    let characters: Vec<Value> = dec
        .characters()
        .iter()
        .map(|c| json!({"chi_g": scalar_json(&c.chi_g), "chi_z": scalar_json(&c.chi_z)}))
        .collect();
    let data = json!({
        "theta": scalar_json(theta.value()),
        "lambda": scalar_json(&theta.lambda()),
        "backend": b.to_string(),
        "regime": t2.regime.to_string(),
        "dim_m_theta": m_theta.dim(),
        "block_profile": profile.iter().map(|&(d, s)| json!({"dim": d, "matrix_size": s})).collect::<Vec<_>>(),
        "block_backend": structure.backend.to_string(),
        "dim_ker_psi": t2.kernel_dim,
        "characters": characters,
        "operator_system": op_sys,
        "relations_residual": max_rel,
    });
    Ok(PointResult { checks, data })
}

fn verify_any(theta: &AnyTheta, tol: f64, seed: u64) -> Result<PointResult, CliError> {
    match theta {
        AnyTheta::Exact(t) => verify_point(t, tol, seed),
        AnyTheta::Float(t) => verify_point(t, tol, seed),
    }
}

pub fn verify(theta_text: &str, opts: &GlobalOpts) -> Result<Report, CliError> {
    let start = Instant::now();
    let theta = resolve_theta(theta_text, opts.backend, opts.tol)?;
    let result = verify_any(&theta, opts.tol, opts.seed)?;
    Ok(Report::new(
        "verify",
        config("verify", Some(theta_text), opts, json!({})),
        result.checks,
        result.data,
        elapsed_ms(start),
    ))
}

/// One sweep point before evaluation.
struct SweepPoint {
    label: String,
    theta: AnyTheta,
}

fn angle(z: Complex64) -> f64 {
    z.arg().rem_euclid(TAU)
}

fn sweep_points(spec: &str, opts: &GlobalOpts) -> Result<Vec<SweepPoint>, CliError> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("unit-circle:") {
        let n: usize = rest
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                CliError::Usage(format!("bad sweep spec '{spec}', expected unit-circle:n=N"))
            })?;
        let special = ["1", "i", "-1", "-i"];
        let mut points = Vec::new();
        for s in special {
            let theta = match opts.backend {
                BackendChoice::Float => resolve_theta(s, BackendChoice::Float, opts.tol)?,
                _ => resolve_theta(s, BackendChoice::Exact, opts.tol)?,
            };
            points.push(SweepPoint {
                label: s.to_string(),
                theta,
            });
        }
        let special_angles: Vec<f64> = points.iter().map(|p| angle(p.theta.to_complex())).collect();
        for k in 0..n {
            let a = TAU * k as f64 / n as f64;
            let near_special = special_angles
                .iter()
                .any(|s| (a - s).abs() < 1e-12 || (TAU - (a - s).abs()) < 1e-12);
            if near_special {
                continue;
            }
            let value = Complex64::from_polar(1.0, a);
            let theta = Theta::new(value, opts.tol)?;
            points.push(SweepPoint {
                label: format!("exp(2*pi*i*{k}/{n})"),
                theta: AnyTheta::Float(theta),
            });
        }
        points.sort_by(|p, q| angle(p.theta.to_complex()).total_cmp(&angle(q.theta.to_complex())));
        Ok(points)
    } else {
        spec.split(',')
            .map(|s| {
                let s = s.trim();
                Ok(SweepPoint {
                    label: s.to_string(),
                    theta: resolve_theta(s, opts.backend, opts.tol)?,
                })
            })
            .collect()
    }
}

pub fn sweep(spec: &str, opts: &GlobalOpts) -> Result<Report, CliError> {
    let start = Instant::now();
    let points = sweep_points(spec, opts)?;
    let results: Vec<Result<PointResult, CliError>> = points
        .par_iter()
        .map(|p| verify_any(&p.theta, opts.tol, opts.seed))
        .collect();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (p, r) in points.iter().zip(results) {
        let r = r?;
        let passed = r.checks.iter().all(CheckRecord::passed);
        let d = &r.data;
        let profile: Vec<(usize, usize)> = d["block_profile"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|b| {
                (
                    b["dim"].as_u64().unwrap_or(0) as usize,
                    b["matrix_size"].as_u64().unwrap_or(0) as usize,
                )
            })
            .collect();
        let dim = d["dim_m_theta"].as_u64().unwrap_or(0) as usize;
        let failed: Vec<String> = r
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.clone())
            .collect();
        rows.push(json!({
            "theta": p.label,
            "angle": angle(p.theta.to_complex()),
            "backend": p.theta.backend().to_string(),
            "dim": dim,
            "profile": profile_string(&profile),
            "ker_psi": d["dim_ker_psi"],
            "operator_system": d["operator_system"],
            "status": if passed { "pass" } else { "fail" },
        }));
        let mut c = CheckRecord::new(format!("theta = {}", p.label), passed, p.theta.backend())
            .dim("dim", dim);
        if !failed.is_empty() {
            c = c.detail(format!("failed: {}", failed.join(", ")));
        }
        checks.push(c);
    }
    let dims: Vec<Value> = rows.iter().map(|r| r["dim"].clone()).collect();
    Ok(Report::new(
        "sweep",
        config("sweep", Some(spec), opts, json!({})),
        checks,
        json!({"rows": rows, "dims": dims}),
        elapsed_ms(start),
    ))
}

fn fp_point<S: Scalar>(
    theta: &Theta<S>,
    expr: &str,
    times: Option<&str>,
    tol: f64,
) -> Result<PointResult, CliError> {
    let tol = effective_tol::<S>(tol);
    let pres = FPPresentation::new(theta, tol);
    let a = parse_element(expr, &pres)?;
    let mut checks = Vec::new();
    let mut data = json!({
        "theta": scalar_json(theta.value()),
        "backend": S::BACKEND.to_string(),
        "regime": pres.regime().to_string(),
        "basis": pres.basis_words().iter().map(|w| opgraph_core::fp_algebra::word_to_string(w)).collect::<Vec<_>>(),
    });
    let obj = data.as_object_mut().expect("object");
    let (result, label) = match times {
        None => (a, "element"),
        Some(t) => {
            let b = parse_element(t, &pres)?;
            let ab = fp_multiply(&a, &b, &pres)?;
            let lhs = psi(&ab, &pres);
            let rhs = psi(&a, &pres).matmul(&psi(&b, &pres));
            let res = lhs.residual(&rhs);
            checks.push(
                CheckRecord::new("psi(ab) = psi(a) psi(b)", res <= tol, S::BACKEND).residual(res),
            );
            obj.insert("left".into(), json!(a.display()));
            obj.insert("right".into(), json!(b.display()));
            (ab, "product")
        }
    };
    let image = psi(&result, &pres);
    obj.insert(label.into(), json!(result.display()));
    obj.insert("normal_form".into(), json!(result.display()));
    obj.insert(
        "coefficients".into(),
        Value::Array(result.coeffs().iter().map(scalar_json).collect()),
    );
    obj.insert("psi".into(), matrix_json(&image));
    obj.insert("psi_is_zero".into(), json!(image.is_zero(tol)));
    Ok(PointResult { checks, data })
}

pub fn fp(
    theta_text: &str,
    expr: &str,
    times: Option<&str>,
    opts: &GlobalOpts,
) -> Result<Report, CliError> {
    let start = Instant::now();
    let theta = resolve_theta(theta_text, opts.backend, opts.tol)?;
    let r = match &theta {
        AnyTheta::Exact(t) => fp_point(t, expr, times, opts.tol)?,
        AnyTheta::Float(t) => fp_point(t, expr, times, opts.tol)?,
    };
    Ok(Report::new(
        "fp",
        config(
            "fp",
            Some(theta_text),
            opts,
            json!({"expr": expr, "times": times}),
        ),
        r.checks,
        r.data,
        elapsed_ms(start),
    ))
}

fn rep_point<S: RootFinder>(
    theta: &Theta<S>,
    tol: f64,
    seed: u64,
) -> Result<PointResult, CliError> {
    let tol = effective_tol::<S>(tol);
    let klein = theta.is_klein_point(tol);
    let dec = decompose_phi(theta, tol, seed)?;
    let b = dec.backend;
    let dims = dec.block_dims();
    let expected = if klein { vec![1; 4] } else { vec![2; 2] };
    let mut checks = vec![
        CheckRecord::new("block dimensions", dims == expected, b).dim("blocks", dims.len()),
        CheckRecord::new("blocks are invariant", dec.residual <= tol, b).residual(dec.residual),
        CheckRecord::new(
            "blocks are pairwise inequivalent",
            dec.intertwiner_dims.iter().all(|&(_, _, d)| d == 0),
            b,
        )
        .dim("commutant", dec.commutant_dim),
    ];
    if klein {
        let holds_expected = is_one(theta.value(), tol);
        checks.push(CheckRecord::new(
            "Klein relations on every block exactly when theta = 1",
            dec.blocks
                .iter()
                .all(|bl| bl.klein_relations_hold(tol) == holds_expected),
            b,
        ));
    } else {
        checks.push(
            CheckRecord::new(
                "blocks equal induced representations",
                dec.induced_residual <= tol,
                b,
            )
            .residual(dec.induced_residual),
        );
    }
    let blocks: Vec<Value> = dec
        .blocks
        .iter()
        .map(|bl| {
            json!({
                "dim": bl.dim,
                "chi_g": scalar_json(&bl.character.chi_g),
                "chi_z": scalar_json(&bl.character.chi_z),
                "basis": bl.basis.iter().map(|v| v.iter().map(scalar_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "x": matrix_json(&bl.x),
                "y": matrix_json(&bl.y),
                "z": matrix_json(&bl.z),
                "g": matrix_json(&bl.g),
            })
        })
        .collect();
    let data = json!({
        "theta": scalar_json(theta.value()),
        "backend": b.to_string(),
        "block_dims": dims,
        "blocks": blocks,
        "change_of_basis": matrix_json(&dec.change_of_basis),
        "intertwiner_dims": dec.intertwiner_dims,
    });
    Ok(PointResult { checks, data })
}

pub fn rep(theta_text: &str, opts: &GlobalOpts) -> Result<Report, CliError> {
    let start = Instant::now();
    let theta = resolve_theta(theta_text, opts.backend, opts.tol)?;
    let r = match &theta {
        AnyTheta::Exact(t) => rep_point(t, opts.tol, opts.seed)?,
        AnyTheta::Float(t) => rep_point(t, opts.tol, opts.seed)?,
    };
    Ok(Report::new(
        "rep",
        config("rep", Some(theta_text), opts, json!({})),
        r.checks,
        r.data,
        elapsed_ms(start),
    ))
}

fn channel_point<S: Scalar>(
    ch: &KrausChannel<S>,
    action: ChannelAction,
    theta: Option<&str>,
    trials: usize,
    opts: &GlobalOpts,
) -> Result<PointResult, CliError> {
    let tol = effective_tol::<S>(opts.tol);
    let b = S::BACKEND;
    let residual = ch.trace_residual();
    let tp = residual <= tol;
    let mut checks = vec![CheckRecord::new("trace preserving", tp, b).residual(residual)];
    let mut data = json!({
        "backend": b.to_string(),
        "dim_in": ch.dim_in(),
        "dim_out": ch.dim_out(),
        "kraus_count": ch.env_dim(),
        "trace_residual": residual,
    });
    if !tp {
        return Ok(PointResult { checks, data });
    }
    let obj = data.as_object_mut().expect("object");
    let graph = ch.nc_graph(tol);
    obj.insert("graph_dim".into(), json!(graph.dim()));
    match action {
        ChannelAction::Graph => {
            obj.insert(
                "graph_basis".into(),
                Value::Array(graph.basis().iter().map(matrix_json).collect()),
            );
        }
        ChannelAction::GraphCheck => {
            let via_dual = ch.graph_via_dual(tol);
            let equal = subspace_equal(&graph, &via_dual, tol);
            obj.insert("graph_via_dual_dim".into(), json!(via_dual.dim()));
            obj.insert("equal".into(), json!(equal));
            checks.push(
                CheckRecord::new(
                    "span V_j* V_k = dual complementary image of matrix units",
                    equal,
                    b,
                )
                .dim("graph", graph.dim())
                .dim("via_dual", via_dual.dim()),
            );
        }
        ChannelAction::DualityTest => {
            let float = KrausChannel::without_trace_check(
                ch.kraus().iter().map(CMatrix::to_complex).collect(),
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut worst = 0.0f64;
            for _ in 0..trials {
                let rho = random_density(ch.dim_in(), &mut rng);
                let x = random_complex_matrix(ch.dim_out(), ch.dim_out(), &mut rng);
                worst = worst.max(float.duality_gap(&rho, &x)?);
            }
            obj.insert("trials".into(), json!(trials));
            obj.insert("max_gap".into(), json!(worst));
            let limit = opts.tol.max(1e-12);
            checks.push(
                CheckRecord::new(
                    "Tr(Phi(rho) x) = Tr(rho Phi*(x))",
                    worst <= limit,
                    Backend::Float,
                )
                .residual(worst)
                .dim("trials", trials),
            );
        }
        ChannelAction::MatchL => {
            let text = theta.ok_or_else(|| CliError::Usage("match-L needs --theta".into()))?;
            if ch.dim_in() != 4 || ch.dim_out() != 4 {
                return Err(CliError::Usage(
                    "match-L needs a channel on 4x4 matrices".into(),
                ));
            }
            let any = resolve_theta(
                text,
                if S::is_exact() {
                    opts.backend
                } else {
                    BackendChoice::Float
                },
                opts.tol,
            )?;
            let (equal, l_dim, backend) = match any {
                AnyTheta::Exact(t) if S::is_exact() => {
                    let exact: Vec<CMatrix<GaussianRational>> = ch
                        .kraus()
                        .iter()
                        .map(|k| k.map(|s| exact_of(s)))
                        .collect::<Vec<_>>();
                    let g = KrausChannel::without_trace_check(exact)?.nc_graph(0.0);
                    let l = graph_span(&t, 0.0);
                    (subspace_equal(&g, &l, 0.0), l.dim(), Backend::Exact)
                }
                other => {
                    let t = Theta::new(other.to_complex(), opts.tol)?;
                    let g = KrausChannel::without_trace_check(
                        ch.kraus().iter().map(CMatrix::to_complex).collect(),
                    )?
                    .nc_graph(opts.tol);
                    let l = graph_span(&t, opts.tol);
                    (subspace_equal(&g, &l, opts.tol), l.dim(), Backend::Float)
                }
            };
            obj.insert("theta".into(), json!(text));
            obj.insert("equal".into(), json!(equal));
            checks.push(
                CheckRecord::new("graph = span L(theta)", equal, backend)
                    .dim("graph", graph.dim())
                    .dim("span_l", l_dim),
            );
        }
    }
    Ok(PointResult { checks, data })
}

/// Exact value of an exact-backend scalar, recovered from its canonical string.
fn exact_of<S: Scalar>(s: &S) -> GaussianRational {
    opgraph_core::scalar::parse_gaussian(&s.to_string())
        .expect("exact scalars print as Gaussian rationals")
}

pub fn channel(
    file: &Path,
    action: ChannelAction,
    theta: Option<&str>,
    trials: usize,
    opts: &GlobalOpts,
) -> Result<Report, CliError> {
    let start = Instant::now();
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", file.display())))?;
    let force_float = opts.backend == BackendChoice::Float;
    let loaded = load_channel(&text, force_float)?;
    if opts.backend == BackendChoice::Exact && !matches!(loaded, LoadedChannel::Exact(_)) {
        return Err(CliError::Input(
            "exact backend needs every entry as an exact string".into(),
        ));
    }
    let mut source = "kraus";
    let r = match loaded {
        LoadedChannel::Exact(ch) => channel_point(&ch, action, theta, trials, opts)?,
        LoadedChannel::Float(ch) => channel_point(&ch, action, theta, trials, opts)?,
        LoadedChannel::Frame(frame) => {
            source = "frame";
            let ch = pseudo_diagonal(&frame)?;
            channel_point(&ch, action, theta, trials, opts)?
        }
    };
    let mut data = r.data;
    if let Some(obj) = data.as_object_mut() {
        obj.insert("source".into(), json!(source));
    }
    Ok(Report::new(
        "channel",
        config(
            "channel",
            theta,
            opts,
            json!({"file": file.display().to_string(), "action": action.as_str(), "trials": trials}),
        ),
        r.checks,
        data,
        elapsed_ms(start),
    ))
}
