//! Acceptance criteria 1-12. Each criterion prints one PASS/FAIL line; the
//! process fails if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ffi::OsString;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use tilelat_core::abelian::{self, combine, extend_basis, free_basis, hnf, smith, AlgebraError, IntegerMatrix};
use tilelat_core::builder::{build_lp, EnumerationScheme, Subgroup};
use tilelat_core::enumerate::*;
use tilelat_core::exactvec::*;
use tilelat_core::sampling::Sampler;
use tilelat_core::tiling::*;

type Verdict = Result<String, String>;
type Criterion = (u32, &'static str, u64, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn one() -> PowThreshold {
    PowThreshold::from_integer(1)
}

fn two() -> PowThreshold {
    PowThreshold::from_integer(2)
}

fn l2_build() -> &'static Subgroup {
    static D: OnceLock<Subgroup> = OnceLock::new();
    D.get_or_init(|| build_lp(PNorm::L2, &EnumerationScheme::grid(0), 200).expect("p = 2 build"))
}

fn l1_build() -> &'static Subgroup {
    static D: OnceLock<Subgroup> = OnceLock::new();
    D.get_or_init(|| build_lp(PNorm::L1, &EnumerationScheme::grid(0), 200).expect("p = 1 build"))
}

fn l2_cell() -> &'static (Certificate, HPolytope) {
    static C: OnceLock<(Certificate, HPolytope)> = OnceLock::new();
    C.get_or_init(|| {
        let d = l2_build();
        let l = d.lattice();
        let den = verify_density(&l, &d.processed_targets().unwrap(), &one()).unwrap();
        let cell = voronoi_cell(&l, &SparseVector::zero(), &one(), Some(&den)).unwrap();
        (den, cell)
    })
}

fn is_plus_minus_two_unit(w: &SparseVector) -> bool {
    w.nnz() == 1 && w.entries()[0].1.abs() == rat(2, 1)
}

fn c1_separation_l2() -> Verdict {
    let d = l2_build();
    let cert = verify_separation(&d.lattice(), &two(), true).map_err(|e| e.to_string())?;
    ensure(cert.kind == CertificateKind::SeparationOK, || format!("got {:?} witness {:?}", cert.kind, cert.witness.map(|w| w.to_string())))?;
    Ok(format!("{} generators, no nonzero element with ||x||_2^2 <= 2", d.records.len()))
}

fn c2_separation_l1() -> Verdict {
    let d = l1_build();
    let l = d.lattice();
    let loose = verify_separation(&l, &two(), false).map_err(|e| e.to_string())?;
    ensure(loose.kind == CertificateKind::SeparationOK, || format!("non-strict: {:?}", loose.kind))?;
    let strict = verify_separation(&l, &two(), true).map_err(|e| e.to_string())?;
    ensure(strict.kind == CertificateKind::SeparationViolated, || format!("strict: {:?}", strict.kind))?;
    let w = strict.witness.clone().ok_or("strict violation without witness")?;
    ensure(is_plus_minus_two_unit(&w), || format!("witness {w} is not of the form ±2e_a"))?;
    ensure(witness_violates(&w, PNorm::L1, &two(), true), || "witness re-check failed".into())?;
    let coeffs = strict.coefficients.clone().ok_or("witness without coefficients")?;
    ensure(combine(&d.generators(), &coeffs) == w, || "witness coefficients do not reproduce it".into())?;
    Ok(format!("non-strict OK; strict violated by {w}"))
}

fn density_oracle(d: &Subgroup) -> Result<usize, String> {
    let l = d.lattice();
    let targets = d.processed_targets().unwrap();
    let cert = verify_density(&l, &targets, &one()).map_err(|e| e.to_string())?;
    ensure(cert.kind == CertificateKind::DensityOK, || format!("{:?} at {:?}", cert.kind, cert.witness.map(|w| w.to_string())))?;
    // Independent re-check: a nearest element, its membership through the
    // Hermite route, and its distance by direct arithmetic.
    let gens = d.generators();
    for u in &targets {
        let near = nearest_elements(&l, u, &one()).map_err(|e| format!("{u}: {e}"))?;
        let x = &near[0].0;
        ensure(abelian::subgroup_membership(&gens, x).is_some(), || format!("{x} is not in the group"))?;
        ensure(distance_pow(u, x, d.p) <= rat(1, 1), || format!("dist({u}, {x}) > 1"))?;
    }
    Ok(targets.len())
}

fn c3_density() -> Verdict {
    let a = density_oracle(l2_build())?;
    let b = density_oracle(l1_build())?;
    Ok(format!("p=2: {a} targets, p=1: {b} targets within distance 1"))
}

fn c4_vertex_contact() -> Verdict {
    let d = l1_build();
    let l = d.lattice();
    let cert = verify_vertex_contact(&l).map_err(|e| e.to_string())?;
    let contacts = enumerate_group_ball(&l, &BallQuery::at_origin(two(), false)).map_err(|e| e.to_string())?;
    for h in &contacts {
        if norm_pow(&h.element, PNorm::L1) == rat(2, 1) {
            ensure(is_plus_minus_two_unit(&h.element), || format!("{} has norm 2", h.element))?;
        }
    }
    let samples = probe_points(&l, &one(), 4, 500).map_err(|e| e.to_string())?;
    let mut max = 0;
    for x in &samples {
        let tiles = tiles_containing(&l, x, &one()).map_err(|e| e.to_string())?;
        for t in &tiles {
            ensure(distance_pow(x, t, PNorm::L1) <= rat(1, 1), || format!("{t} does not contain {x}"))?;
        }
        max = max.max(tiles.len());
    }
    ensure(max <= 2, || format!("a sample lies in {max} tiles"))?;
    Ok(format!("{} contacts, all ±2e_a; max tile count {max} over 500 samples", cert.count.unwrap_or(0)))
}

fn c5_voronoi_inclusions() -> Verdict {
    let d = l2_build();
    let (_, cell) = l2_cell();
    inclusion_check(cell, &two(), &one(), &[]).map_err(|e| format!("inner inclusion: {e}"))?;
    let dirs = target_directions(&d.processed_targets().unwrap(), 5, 100);
    let mut failed = 0;
    let mut exits: Vec<Rational> = Vec::new();
    for v in &dirs {
        match ray_exit(cell, v) {
            Some(t) => {
                let e = &t * &t * v.dot(v);
                if e > rat(1, 1) {
                    failed += 1;
                }
                exits.push(e);
            }
            None => failed += 1,
        }
    }
    let lo = exits.iter().min().map(format_rational).unwrap_or_default();
    let hi = exits.iter().max().map(format_rational).unwrap_or_default();
    let summary = format!(
        "inner (sqrt2/2)B in V_0 OK over {} half-spaces; outer V_0 in B holds along {}/{} directions (exit^2 from {lo} to {hi})",
        cell.halfspaces.len(),
        dirs.len() - failed,
        dirs.len()
    );
    ensure(failed == 0, || summary.clone())?;
    Ok(summary)
}

fn c6_translation_symmetry() -> Verdict {
    let d = l2_build();
    let l = d.lattice();
    let (den, v0) = l2_cell();
    let samples = probe_points(&l, &one(), 6, 200).map_err(|e| e.to_string())?;
    let sites: Vec<SparseVector> = d.records.iter().take(3).map(|r| r.g.clone())
        .chain([d.records[0].g.add(&d.records[1].g), d.records[2].g.sub(&d.records[0].g)])
        .collect();
    let mut boundary = 0;
    for x in &samples {
        let m = cell_membership(v0, x);
        ensure(cell_membership(v0, &x.neg()) == m, || format!("V_0 not symmetric at {x}"))?;
        if m == Membership::Boundary {
            boundary += 1;
        }
    }
    for s in &sites {
        let vd = voronoi_cell(&l, s, &one(), Some(den)).map_err(|e| e.to_string())?;
        for x in &samples {
            ensure(cell_membership(&vd, &x.add(s)) == cell_membership(v0, x), || format!("V_d != d + V_0 at d = {s}, x = {x}"))?;
        }
    }
    Ok(format!("5 sites x 200 samples agree; {boundary} samples on the boundary of V_0"))
}

fn check_witness(l: &Lattice, label: &str) -> Result<String, String> {
    let (d, h2) = disjointness_witness(l, &one()).map_err(|e| format!("{label}: {e}"))?;
    let p = l.p();
    ensure(d != h2, || format!("{label}: tiles coincide"))?;
    ensure(distance_pow(&d, &h2, p) <= PowThreshold::from_integer(1).scaled_radius(2, p).value().clone(), || format!("{label}: ||d - 2h|| > 2"))?;
    for x in [&d, &h2] {
        ensure(abelian::subgroup_membership(l.generators(), x).is_some(), || format!("{label}: {x} not in the group"))?;
    }
    ensure(tiles_meet(&d, &h2, &one(), p), || format!("{label}: tiles do not meet"))?;
    Ok(format!("{label}: d = {d}, 2h = {h2}"))
}

fn c7_non_disjointness() -> Verdict {
    let a = check_witness(&l1_build().lattice(), "p=1 build")?;
    let line = Lattice::new(PNorm::L1, vec![SparseVector::from_integers(&[2])]).unwrap();
    let b = check_witness(&line, "2Z line")?;
    let line2 = line.with_norm(PNorm::L2);
    let c = check_witness(&line2, "2Z line (p=2)")?;
    Ok(format!("{a}; {b}; {c}"))
}

fn c8_star_degree() -> Verdict {
    let mut degrees = Vec::new();
    for n in [50, 100, 200, 400] {
        let d = build_lp(PNorm::L1, &EnumerationScheme::grid(0), n).map_err(|e| e.to_string())?;
        degrees.push(star_degree(&d.lattice(), &one()).map_err(|e| e.to_string())?);
    }
    let text = format!("star degrees at 50/100/200/400 steps: {degrees:?}");
    ensure(degrees.windows(2).all(|w| w[0] <= w[1]) && degrees[3] > degrees[0], || text.clone())?;
    Ok(text)
}

fn c9_kottman() -> Verdict {
    for p in 1..=3 {
        let n = PNorm::new(p).unwrap();
        let w = kottman_witness(n, 100);
        ensure(w.len() == 100, || format!("p={p}: {} vectors", w.len()))?;
        for (i, a) in w.iter().enumerate() {
            ensure(norm_pow(a, n) == rat(1, 1), || format!("p={p}: {a} is not a unit vector"))?;
            for b in &w[i + 1..] {
                ensure(distance_pow(a, b, n) == rat(2, 1), || format!("p={p}: {a}, {b} not 2^(1/p) apart"))?;
            }
        }
    }
    Ok("p = 1, 2, 3: 100 unit vectors, 4950 pairs each at distance_pow 2".into())
}

fn box_elements(gens: &[SparseVector], k: i64) -> BTreeSet<SparseVector> {
    let mut out = BTreeSet::new();
    let mut n = vec![-k; gens.len()];
    loop {
        out.insert(combine(gens, &n.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>()));
        let mut i = 0;
        loop {
            if i == n.len() {
                return out;
            }
            if n[i] < k {
                n[i] += 1;
                break;
            }
            n[i] = -k;
            i += 1;
        }
    }
}

fn c10_oracle_equivalence() -> Verdict {
    let mut s = Sampler::new(10, 0);
    let mut extra = 0usize;
    let mut compared = 0usize;
    for set in 0..100 {
        let dims = 1 + s.below(3) as usize;
        let count = 1 + s.below(3) as usize;
        let gens: Vec<SparseVector> = (0..count)
            .map(|_| SparseVector::from_dense(&(0..dims).map(|_| rat(s.range_i64(-3, 3), s.range_i64(1, 2))).collect::<Vec<_>>()))
            .collect();
        let center = SparseVector::from_dense(&(0..dims).map(|_| rat(s.range_i64(-3, 3), 2)).collect::<Vec<_>>());
        let all = box_elements(&gens, 4);
        for p in [PNorm::L1, PNorm::L2] {
            let l = Lattice::new(p, gens.clone()).map_err(|e| format!("set {set}: {e}"))?;
            for c in [rat(1, 1), rat(5, 2), rat(6, 1)] {
                let q = BallQuery::closed(center.clone(), PowThreshold::new(c.clone()).unwrap());
                let brute: BTreeSet<SparseVector> = all.iter().filter(|x| q.contains(x, p)).cloned().collect();
                let got: BTreeSet<SparseVector> = enumerate_group_ball(&l, &q).map_err(|e| e.to_string())?.into_iter().map(|h| h.element).collect();
                let tag = || format!("set {set} p={} c={} gens {:?}", p.p(), format_rational(&c), gens.iter().map(|g| g.to_string()).collect::<Vec<_>>());
                ensure(brute.is_subset(&got), || format!("{}: missed box elements", tag()))?;
                let inside: BTreeSet<SparseVector> = got.intersection(&all).cloned().collect();
                ensure(inside == brute, || format!("{}: box part differs", tag()))?;
                extra += got.len() - inside.len();
                let boxed: BTreeSet<SparseVector> = enumerate_group_ball_bounded(&l, &q, SearchBound::Box(4))
                    .map_err(|e| e.to_string())?
                    .hits
                    .into_iter()
                    .map(|h| h.element)
                    .collect();
                ensure(boxed == brute, || format!("{}: box mode differs", tag()))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} ball queries equal on the box; {extra} further elements need coefficients beyond |n| <= 4"))
}

fn random_matrix(s: &mut Sampler) -> IntegerMatrix {
    let r = 1 + s.below(6) as usize;
    let c = 1 + s.below(6) as usize;
    IntegerMatrix::new(r, c, (0..r * c).map(|_| BigInt::from(s.range_i64(-5, 5))).collect()).unwrap()
}

fn unimodular(s: &mut Sampler, n: usize) -> Vec<SparseVector> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..3 * n {
        let a = s.below(n as u64) as usize;
        let b = s.below(n as u64) as usize;
        if a != b {
            let k = s.range_i64(-2, 2);
            let src = m[b].clone();
            for (x, y) in m[a].iter_mut().zip(&src) {
                *x += k * y;
            }
        }
    }
    m.iter().map(|r| SparseVector::from_integers(r)).collect()
}

fn c11_algebra() -> Verdict {
    let mut s = Sampler::new(11, 0);
    for i in 0..200 {
        let a = random_matrix(&mut s);
        let h = hnf(&a);
        ensure(h.u.mul(&a) == h.h && h.u.determinant().abs().is_one() && h.h.is_hermite(), || format!("hnf identities fail on matrix {i}"))?;
        let sn = smith(&a);
        let v = sn.v.clone().unwrap();
        ensure(sn.u.mul(&a).mul(&v) == sn.h, || format!("smith identity fails on matrix {i}"))?;
        ensure(sn.u.determinant().abs().is_one() && v.determinant().abs().is_one(), || format!("smith transforms on matrix {i}"))?;
        for k in 0..sn.h.rows() {
            for j in 0..sn.h.cols() {
                ensure(k == j || sn.h.get(k, j).is_zero(), || format!("smith form not diagonal on matrix {i}"))?;
            }
        }
        let f = &sn.invariant_factors;
        ensure(f.windows(2).all(|w| (&w[1] % &w[0]).is_zero()), || format!("invariant factors do not divide on matrix {i}"))?;
        let gens: Vec<SparseVector> = (0..a.rows())
            .map(|r| SparseVector::from_dense(&a.row(r).iter().map(|x| Rational::from_integer(x.clone())).collect::<Vec<_>>()))
            .collect();
        let basis = free_basis(&gens);
        ensure(basis.len() == h.rank, || format!("basis size on matrix {i}"))?;
        ensure(gens.iter().all(|g| abelian::subgroup_membership(&basis, g).is_some()), || format!("generator outside basis span on {i}"))?;
        ensure(basis.iter().all(|b| abelian::subgroup_membership(&gens, b).is_some()), || format!("basis outside generator span on {i}"))?;
    }
    for i in 0..50 {
        let n = 2 + s.below(4) as usize;
        let b = unimodular(&mut s, n);
        let cut = 1 + s.below(n as u64 - 1) as usize;
        let chain = vec![b[..cut].to_vec(), b.clone()];
        let out = extend_basis(&chain).map_err(|e| format!("chain {i}: {e}"))?;
        ensure(out[1].len() == n && out[1][..out[0].len()] == out[0][..], || format!("chain {i}: not an extension"))?;
        ensure(out[1].iter().all(|x| abelian::subgroup_membership(&b, x).is_some()), || format!("chain {i}: outside group"))?;
        ensure(b.iter().all(|x| abelian::subgroup_membership(&out[1], x).is_some()), || format!("chain {i}: does not generate"))?;
    }
    for i in 0..50 {
        let n = 2 + s.below(3) as usize;
        let b = unimodular(&mut s, n);
        let k = 2 + s.below(5) as i64;
        let chain = vec![vec![b[0].scale_int(k)], b];
        match extend_basis(&chain) {
            Err(AlgebraError::TorsionQuotient { factor, .. }) if factor == BigInt::from(k) => {}
            other => return Err(format!("torsion chain {i}: {other:?}")),
        }
    }
    Ok("200 matrices: U·A = H, U·A·V = S, unimodular transforms, basis round-trips; 50 chains extended; 50 torsion chains refused".into())
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    let out = dir.path().join("group.json");
    for _ in 0..2 {
        let args = ["tilelat", "build", "--p", "2", "--steps", "200", "--scheme", "grid", "--seed", "0", "--out"];
        let code = tilelat::run(args.iter().map(OsString::from).chain([out.clone().into_os_string()]));
        ensure(code == 0, || format!("build exited with {code}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "group files differ".into())?;
    Ok(format!("two builds produced identical {}-byte files", outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "separation certificate, p=2", 60, c1_separation_l2),
        (2, "separation certificate, p=1", 60, c2_separation_l1),
        (3, "density certificate", 60, c3_density),
        (4, "vertex contact and point-2-finiteness", 120, c4_vertex_contact),
        (5, "Voronoi inclusions", 120, c5_voronoi_inclusions),
        (6, "translation and symmetry of cells", 60, c6_translation_symmetry),
        (7, "non-disjointness witness", 30, c7_non_disjointness),
        (8, "star-degree growth", 300, c8_star_degree),
        (9, "Kottman witnesses", 10, c9_kottman),
        (10, "enumeration oracle equivalence", 120, c10_oracle_equivalence),
        (11, "algebra certificates", 120, c11_algebra),
        (12, "determinism", 60, c12_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, budget, f) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let verdict = match verdict {
            Ok(_) if elapsed > Duration::from_secs(budget) => Err(format!("over the {budget} s budget")),
            v => v,
        };
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n:>2} {tag} [{name}] ({:.1} s of {budget} s): {detail}", elapsed.as_secs_f64());
        if verdict.is_err() {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
