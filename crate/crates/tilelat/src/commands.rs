use std::path::Path;

use num_bigint::BigInt;
use serde_json::json;
use tilelat_core::abelian::{self, combine, free_basis_with_transform, membership_many};
use tilelat_core::builder::{self, EnumerationScheme, EpsilonSchedule, Subgroup};
use tilelat_core::enumerate::{self, BoundUsed, Certificate, CertificateKind, Lattice};
use tilelat_core::exactvec::{format_rational, PowThreshold, Rational, SparseVector};
use tilelat_core::tiling::{self, HPolytope, InclusionFailure, TilingError};

use crate::config::*;
use crate::error::{CliError, EXIT_OK, EXIT_VIOLATION};
use crate::format::*;
use crate::io::{emit, read_text};
use crate::parallel::{self, chunks, map_ordered};

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn exit_for(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

pub fn dispatch(command: &Command) -> Result<i32, CliError> {
    parallel::thread_count()?;
    match command {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Voronoi(a) => cmd_voronoi(a),
        Command::Report(a) => cmd_report(a),
        Command::Basis(a) => cmd_basis(a),
    }
}

/// Runs the construction described by `args`.
pub fn build_group(args: &BuildArgs) -> Result<(Subgroup, RunConfig), CliError> {
    let p = parse_norm(args.p)?;
    let scheme = match args.scheme {
        SchemeArg::Grid => EnumerationScheme::grid(args.seed),
        SchemeArg::Stream => EnumerationScheme::stream(args.seed),
    };
    let steps = usize::try_from(args.steps).map_err(|_| CliError::Config("--steps is too large".into()))?;
    let mut config = RunConfig::new("build");
    config.p = Some(args.p);
    config.steps = Some(args.steps);
    config.seed = Some(args.seed);
    config.scheme = Some(args.scheme);
    config.mode = Some(args.mode);
    config.halving = args.halving;
    config.out = args.out.as_deref().map(path_string);
    let d = match args.mode {
        ModeArg::ExactLp => {
            if args.epsilon.is_some() || args.halving {
                return Err(CliError::Config("--epsilon and --halving apply to riesz_general only".into()));
            }
            builder::build_lp(p, &scheme, steps).map_err(compute)?
        }
        ModeArg::RieszGeneral => {
            let text = args.epsilon.as_deref().ok_or_else(|| CliError::Config("riesz_general needs --epsilon".into()))?;
            let eps = parse_cli_rational("epsilon", text)?;
            if eps <= Rational::from_integer(BigInt::from(0)) {
                return Err(CliError::Config("--epsilon must be positive".into()));
            }
            config.epsilon = Some(format_rational(&eps));
            let schedule = if args.halving { EpsilonSchedule::Halving(eps) } else { EpsilonSchedule::Fixed(eps) };
            builder::build_riesz(p, &scheme, steps, schedule).map_err(compute)?
        }
    };
    Ok((d, config))
}

fn say(to_stdout: bool, line: &str) {
    if to_stdout {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn cmd_build(args: &BuildArgs) -> Result<i32, CliError> {
    let (d, config) = build_group(args)?;
    let file = GroupFile::from_subgroup(&d, config);
    emit(args.out.as_deref(), &to_pretty(&file))?;
    let s = builder::summarize(&d);
    say(
        args.out.is_some(),
        &format!(
            "generators {}, coordinates used {}, targets {} (added {}, skipped {})",
            s.generators, s.coordinates, d.steps_consumed, s.generators, s.skipped
        ),
    );
    Ok(EXIT_OK)
}

pub fn load_group(path: &Path) -> Result<(GroupFile, Subgroup), CliError> {
    let file: GroupFile = parse(&read_text(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let d = file.to_subgroup().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((file, d))
}

fn processed(d: &Subgroup, what: &str) -> Result<Vec<SparseVector>, CliError> {
    d.processed_targets()
        .ok_or_else(|| CliError::Config(format!("{what} needs processed targets, but the group has no scheme")))
}

/// Density over `targets`, split across the pool. The witness is the first
/// offending target in input order.
pub fn density_parallel(
    pool: &rayon::ThreadPool,
    lattice: &Lattice,
    targets: &[SparseVector],
    r: &PowThreshold,
) -> Result<Certificate, CliError> {
    let parts = chunks(targets, pool.current_num_threads() * 4);
    let certs = map_ordered(pool, &parts, |part| enumerate::verify_density(lattice, part, r));
    let mut merged = enumerate::verify_density(lattice, &[], r).map_err(compute)?;
    merged.count = Some(targets.len() as u64);
    for c in certs {
        let c = c.map_err(compute)?;
        if c.kind == CertificateKind::DensityGap {
            return Ok(Certificate { count: Some(targets.len() as u64), ..c });
        }
    }
    Ok(merged)
}

/// Tile counts at every sample, split across the pool.
pub fn tile_counts(
    pool: &rayon::ThreadPool,
    lattice: &Lattice,
    samples: &[SparseVector],
    r: &PowThreshold,
) -> Result<Vec<usize>, CliError> {
    map_ordered(pool, samples, |x| tiling::tiles_containing(lattice, x, r).map(|t| t.len()))
        .into_iter()
        .map(|n| n.map_err(compute))
        .collect()
}

fn check(name: &str, cert: Option<&Certificate>, ok: bool, detail: Option<serde_json::Value>) -> CheckJson {
    CheckJson { check: name.to_string(), ok, certificate: cert.map(CertificateJson::from_certificate), detail }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let pool = parallel::pool()?;
    let (_, d) = load_group(&args.group)?;
    let lattice = d.lattice();
    let mut checks_wanted = args.checks.clone();
    checks_wanted.sort();
    checks_wanted.dedup();
    let threshold = parse_threshold("threshold", args.threshold.as_deref(), 2)?;
    let radius = parse_threshold("radius", args.radius.as_deref(), 1)?;
    let bound = usize::try_from(args.bound).map_err(|_| CliError::Config("--bound is too large".into()))?;
    let samples = usize::try_from(args.samples).map_err(|_| CliError::Config("--samples is too large".into()))?;
    if checks_wanted.contains(&CheckArg::VertexContact) && d.p.p() != 1 {
        return Err(CliError::Config(format!("vertex-contact applies to p = 1 groups (this group has p = {})", d.p.p())));
    }

    let mut config = RunConfig::new("verify");
    config.checks = checks_wanted.iter().map(|c| c.name().to_string()).collect();
    config.p = Some(d.p.p());
    config.seed = Some(args.seed);
    config.thresholds = vec![threshold_text(&threshold)];
    config.strict = args.strict;
    config.radius = Some(threshold_text(&radius));
    config.samples = Some(args.samples);
    config.bound = Some(args.bound);
    config.group = Some(path_string(&args.group));
    config.out = args.out.as_deref().map(path_string);

    let mut results = Vec::new();
    for c in &checks_wanted {
        let result = match c {
            CheckArg::Separation => {
                let cert = enumerate::verify_separation(&lattice, &threshold, args.strict).map_err(compute)?;
                let confirmed = cert
                    .witness
                    .as_ref()
                    .map(|w| enumerate::witness_violates(w, d.p, &threshold, args.strict));
                let detail = confirmed.map(|v| json!({ "witness_rechecked": v }));
                check(c.name(), Some(&cert), cert.is_ok(), detail)
            }
            CheckArg::Density => {
                let targets = processed(&d, "density")?;
                let cert = density_parallel(&pool, &lattice, &targets, &radius)?;
                check(c.name(), Some(&cert), cert.is_ok(), None)
            }
            CheckArg::VertexContact => match tiling::verify_vertex_contact(&lattice) {
                Ok(cert) => check(c.name(), Some(&cert), true, None),
                Err(TilingError::ContactViolation { witness }) => {
                    let cert = Certificate {
                        kind: CertificateKind::ContactViolated,
                        witness: Some(witness),
                        coefficients: None,
                        count: None,
                        threshold: PowThreshold::from_integer(2),
                        strict: false,
                        bound: BoundUsed::Vectors { count: 0 },
                    };
                    check(c.name(), Some(&cert), false, None)
                }
                Err(e) => return Err(compute(e)),
            },
            CheckArg::PointFiniteness => {
                let points = tiling::probe_points(&lattice, &radius, args.seed, samples).map_err(compute)?;
                let counts = tile_counts(&pool, &lattice, &points, &radius)?;
                let max = counts.iter().copied().max().unwrap_or(0);
                let first_bad = counts.iter().position(|&n| n > bound);
                let cert = Certificate {
                    kind: CertificateKind::PointFiniteOK,
                    witness: None,
                    coefficients: None,
                    count: Some(max as u64),
                    threshold: radius.clone(),
                    strict: false,
                    bound: BoundUsed::Vectors { count: points.len() },
                };
                match first_bad {
                    None => check(c.name(), Some(&cert), true, Some(json!({ "samples": points.len(), "max_tiles": max }))),
                    Some(i) => check(
                        c.name(),
                        None,
                        false,
                        Some(json!({
                            "samples": points.len(),
                            "max_tiles": max,
                            "point": vector_to_json(&points[i]),
                            "tiles": counts[i],
                            "bound": bound,
                        })),
                    ),
                }
            }
        };
        let verdict = match &result.certificate {
            Some(cert) => cert.kind.clone(),
            None => "PointFinitenessViolated".to_string(),
        };
        say(args.out.is_some(), &format!("{}: {}", result.check, verdict));
        results.push(result);
    }
    let ok = results.iter().all(|r| r.ok);
    let file = CertificateFile { format_version: FORMAT_VERSION, config, processed_steps: d.steps_consumed, ok, checks: results };
    emit(args.out.as_deref(), &to_pretty(&file))?;
    Ok(exit_for(ok))
}

/// Outer inclusion along each direction: `(direction, exit_pow)` with
/// `exit_pow = (t* ||v||)^2`, `None` when the ray never leaves the cell.
pub fn outer_exits(
    pool: &rayon::ThreadPool,
    cell: &HPolytope,
    directions: &[SparseVector],
) -> Vec<Option<Rational>> {
    map_ordered(pool, directions, |v| tiling::ray_exit(cell, v).map(|t| &t * &t * v.dot(v)))
}

/// Inner and per-direction outer inclusion of the cell at the origin.
pub fn inclusion_summary(
    pool: &rayon::ThreadPool,
    cell: &HPolytope,
    r_sep: &PowThreshold,
    r_dense: &PowThreshold,
    directions: &[SparseVector],
) -> CheckJson {
    let inner = tiling::inclusion_check(cell, r_sep, r_dense, &[]);
    let inner_detail = match &inner {
        Ok(_) => json!(null),
        Err(TilingError::InclusionViolation(InclusionFailure::Inner { halfspace })) => json!({
            "normal": vector_to_json(&halfspace.normal),
            "offset": format_rational(&halfspace.offset),
        }),
        Err(e) => json!(e.to_string()),
    };
    let exits = outer_exits(pool, cell, directions);
    let mut failures = Vec::new();
    for (v, e) in directions.iter().zip(&exits) {
        let ok = e.as_ref().is_some_and(|e| e <= r_dense.value());
        if !ok {
            failures.push(json!({ "direction": vector_to_json(v), "exit_pow": e.as_ref().map(format_rational) }));
        }
    }
    let finite: Vec<&Rational> = exits.iter().flatten().collect();
    let ok = inner.is_ok() && failures.is_empty();
    let cert = Certificate {
        kind: CertificateKind::InclusionOK,
        witness: None,
        coefficients: None,
        count: Some(directions.len() as u64),
        threshold: r_dense.clone(),
        strict: false,
        bound: BoundUsed::Vectors { count: cell.halfspaces.len() },
    };
    CheckJson {
        check: "inclusion".into(),
        ok,
        certificate: ok.then(|| CertificateJson::from_certificate(&cert)),
        detail: Some(json!({
            "inner_ok": inner.is_ok(),
            "inner_violation": inner_detail,
            "directions": directions.len(),
            "outer_ok": directions.len() - failures.len(),
            "min_exit_pow": finite.iter().min().map(|x| format_rational(x)),
            "max_exit_pow": finite.iter().max().map(|x| format_rational(x)),
            "outer_failures": failures,
        })),
    }
}

pub fn cmd_voronoi(args: &VoronoiArgs) -> Result<i32, CliError> {
    let pool = parallel::pool()?;
    let (_, d) = load_group(&args.group)?;
    if d.p.p() != 2 {
        return Err(CliError::Config(format!("voronoi cells need p = 2 (this group has p = {})", d.p.p())));
    }
    let lattice = d.lattice();
    let r_dense = parse_threshold("radius", args.radius.as_deref(), 1)?;
    let r_sep = parse_threshold("threshold", args.threshold.as_deref(), 2)?;
    let samples = usize::try_from(args.samples).map_err(|_| CliError::Config("--samples is too large".into()))?;
    let site = match &args.site {
        None => SparseVector::zero(),
        Some(text) => {
            let v: VectorJson = serde_json::from_str(text).map_err(|e| CliError::Config(format!("--site: {e}")))?;
            let v = vector_from_json(&v).map_err(|e| CliError::Config(format!("--site: {e}")))?;
            if abelian::subgroup_membership(lattice.generators(), &v).is_none() {
                return Err(CliError::Config("--site is not an element of the group".into()));
            }
            v
        }
    };
    let mut config = RunConfig::new("voronoi");
    config.p = Some(2);
    config.seed = Some(args.seed);
    config.thresholds = vec![threshold_text(&r_sep)];
    config.radius = Some(threshold_text(&r_dense));
    config.site = Some(serde_json::to_string(&vector_to_json(&site)).expect("vectors serialize"));
    config.samples = Some(args.samples);
    config.group = Some(path_string(&args.group));
    config.out = args.out.as_deref().map(path_string);

    let targets = processed(&d, "voronoi")?;
    let density = density_parallel(&pool, &lattice, &targets, &r_dense)?;
    let cell_at = |x: &SparseVector| match tiling::voronoi_cell(&lattice, x, &r_dense, Some(&density)) {
        Ok(c) => Ok(c),
        Err(TilingError::DensityNotCertified(c)) => Ok(*c),
        Err(e) => Err(compute(e)),
    };
    let cell = cell_at(&site)?;
    let inclusion = if !cell.certified {
        CheckJson {
            check: "inclusion".into(),
            ok: false,
            certificate: Some(CertificateJson::from_certificate(&density)),
            detail: Some(json!("density is not certified at the requested radius")),
        }
    } else {
        let origin = if site.is_zero() { cell.clone() } else { cell_at(&SparseVector::zero())? };
        let directions = tiling::target_directions(&targets, args.seed, samples);
        inclusion_summary(&pool, &origin, &r_sep, &r_dense, &directions)
    };
    let ok = inclusion.ok;
    say(
        args.out.is_some(),
        &format!("cell with {} half-spaces; inclusion {}", cell.halfspaces.len(), if ok { "OK" } else { "violated" }),
    );
    let file = VoronoiFile {
        format_version: FORMAT_VERSION,
        config,
        processed_steps: d.steps_consumed,
        cell: PolytopeJson::from_polytope(&cell),
        inclusion,
    };
    emit(args.out.as_deref(), &to_pretty(&file))?;
    Ok(exit_for(ok))
}

/// Ball radii `(k rho / 2)^p` for `k = 1..=4`, where `rho^p = tile`.
fn report_radii(tile: &PowThreshold, p: u32) -> Vec<PowThreshold> {
    (1..=4u32)
        .map(|k| {
            let scale = Rational::new(BigInt::from(k).pow(p), BigInt::from(2).pow(p));
            PowThreshold::new(tile.value() * scale).expect("non-negative")
        })
        .collect()
}

pub fn cmd_report(args: &ReportArgs) -> Result<i32, CliError> {
    let pool = parallel::pool()?;
    let (_, d) = load_group(&args.group)?;
    let lattice = d.lattice();
    let tile = parse_threshold("radius", args.radius.as_deref(), 1)?;
    let samples = usize::try_from(args.samples).map_err(|_| CliError::Config("--samples is too large".into()))?;
    let delta = PowThreshold::new(Rational::new(BigInt::from(1), BigInt::from(100))).expect("positive");
    let mut config = RunConfig::new("report");
    config.p = Some(d.p.p());
    config.seed = Some(args.seed);
    config.radius = Some(threshold_text(&tile));
    config.thresholds = vec![format_rational(delta.value())];
    config.samples = Some(args.samples);
    config.group = Some(path_string(&args.group));
    config.out = args.out.as_deref().map(path_string);

    let radii = report_radii(&tile, d.p.p());
    let mut report = tiling::tiling_report(&lattice, &tile, &radii, &[], &delta).map_err(compute)?;
    let points = tiling::probe_points(&lattice, &tile, args.seed, samples).map_err(compute)?;
    let counts = tile_counts(&pool, &lattice, &points, &tile)?;
    report.point_finiteness_samples = points.iter().cloned().zip(counts).collect();
    if d.p.p() == 2 {
        let local: Result<Vec<usize>, CliError> =
            map_ordered(&pool, &points, |x| tiling::local_tile_count(&lattice, x, &delta, &tile))
                .into_iter()
                .map(|r| r.map_err(compute))
                .collect();
        report.local_tile_counts = points.iter().cloned().zip(local?).collect();
    }
    let file = ReportFile::from_report(&report, &d, config);
    emit(args.out.as_deref(), &to_pretty(&file))?;
    if let Some(out) = &args.out {
        crate::io::write_atomic(&out.with_extension("csv"), &file.to_csv())?;
    }
    say(args.out.is_some(), &format!("star degree {} at tile radius c = {}", file.star_degree, file.tile_radius));
    let contact_ok = report.vertex_contact.as_ref().is_none_or(Certificate::is_ok);
    Ok(exit_for(contact_ok))
}

fn matrix_rows(m: &tilelat_core::abelian::IntegerMatrix) -> Vec<SparseVector> {
    (0..m.rows())
        .map(|i| SparseVector::from_dense(&m.row(i).iter().map(|x| Rational::from_integer(x.clone())).collect::<Vec<_>>()))
        .collect()
}

pub fn cmd_basis(args: &BasisArgs) -> Result<i32, CliError> {
    let mut config = RunConfig::new("basis");
    config.out = args.out.as_deref().map(path_string);
    let mut normal_forms = None;
    let gens = if let Some(g) = &args.group {
        config.group = Some(path_string(g));
        load_group(g)?.1.generators()
    } else if let Some(g) = &args.generators {
        config.generators = Some(path_string(g));
        generators_from_json(&read_text(g)?).map_err(|e| CliError::Config(format!("{}: {e}", g.display())))?
    } else if let Some(m) = &args.matrix {
        config.matrix = Some(path_string(m));
        let mj: MatrixJson = parse(&read_text(m)?).map_err(|e| CliError::Config(format!("{}: {e}", m.display())))?;
        let a = mj.to_matrix().map_err(|e| CliError::Config(format!("{}: {e}", m.display())))?;
        let h = abelian::hnf(&a);
        let s = abelian::smith(&a);
        normal_forms = Some(NormalFormsJson {
            hermite: MatrixJson::from_matrix(&h.h),
            hermite_transform: MatrixJson::from_matrix(&h.u),
            smith: MatrixJson::from_matrix(&s.h),
            smith_left: MatrixJson::from_matrix(&s.u),
            smith_right: MatrixJson::from_matrix(s.v.as_ref().expect("smith has a right transform")),
            invariant_factors: s.invariant_factors.iter().map(int_to_json).collect(),
        });
        matrix_rows(&a)
    } else {
        return Err(CliError::Config("basis needs one of --group, --generators, --matrix".into()));
    };
    let (basis, transform) = free_basis_with_transform(&gens);
    let back = membership_many(&basis, &gens);
    let forward_ok = basis.iter().zip(&transform).all(|(b, t)| &combine(&gens, t) == b);
    let backward_ok = back.iter().zip(&gens).all(|(c, g)| c.as_ref().is_some_and(|c| &combine(&basis, c) == g));
    let verified = forward_ok && backward_ok;
    let ints = |xs: &[BigInt]| xs.iter().map(int_to_json).collect::<Vec<_>>();
    let file = BasisFile {
        format_version: FORMAT_VERSION,
        config,
        rank: basis.len(),
        generators_are_basis: basis.len() == gens.len(),
        basis: basis.iter().map(vector_to_json).collect(),
        transcript: TranscriptJson {
            basis_from_generators: transform.iter().map(|t| ints(t)).collect(),
            generators_from_basis: back.iter().map(|c| c.as_deref().map(ints).unwrap_or_default()).collect(),
            verified,
        },
        normal_forms,
    };
    emit(args.out.as_deref(), &to_pretty(&file))?;
    say(args.out.is_some(), &format!("rank {}; generators are a basis: {}", file.rank, file.generators_are_basis));
    if verified {
        Ok(EXIT_OK)
    } else {
        Err(CliError::Compute("basis transcript failed to verify".into()))
    }
}
