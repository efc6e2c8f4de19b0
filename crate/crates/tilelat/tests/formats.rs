use num_bigint::BigInt;
use proptest::prelude::*;
use tilelat::format::*;
use tilelat::RunConfig;
use tilelat_core::abelian::IntegerMatrix;
use tilelat_core::builder::{build_lp, build_riesz, EnumerationScheme, EpsilonSchedule};
use tilelat_core::enumerate::{verify_density, verify_separation};
use tilelat_core::exactvec::{PNorm, PowThreshold, Rational, SparseVector};
use tilelat_core::tiling::{tiling_report, voronoi_cell};

fn vector() -> impl Strategy<Value = SparseVector> {
    prop::collection::vec((0usize..50, -1000i64..1000, 1i64..64), 0..8).prop_map(|es| {
        SparseVector::from_pairs(es.into_iter().map(|(i, n, d)| (i, Rational::new(BigInt::from(n), BigInt::from(d)))))
    })
}

proptest! {
    #[test]
    fn vectors_round_trip_bit_exactly(v in vector()) {
        let text = serde_json::to_string(&vector_to_json(&v)).unwrap();
        let parsed: VectorJson = serde_json::from_str(&text).unwrap();
        let back = vector_from_json(&parsed).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(serde_json::to_string(&vector_to_json(&back)).unwrap(), text);
    }

    #[test]
    fn big_integers_round_trip(digits in "-?[1-9][0-9]{0,60}") {
        let x: BigInt = digits.parse().unwrap();
        let text = serde_json::to_string(&int_to_json(&x)).unwrap();
        prop_assert_eq!(&text, &digits);
        let n: serde_json::Number = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(int_from_json(&n).unwrap(), x);
    }
}

#[test]
fn group_files_round_trip() {
    let mut config = RunConfig::new("build");
    config.p = Some(2);
    for d in [
        build_lp(PNorm::L2, &EnumerationScheme::grid(0), 80).unwrap(),
        build_lp(PNorm::L1, &EnumerationScheme::stream(3), 50).unwrap(),
        build_riesz(PNorm::L2, &EnumerationScheme::grid(0), 40, EpsilonSchedule::Halving(Rational::new(1.into(), 2.into()))).unwrap(),
    ] {
        let text = to_pretty(&GroupFile::from_subgroup(&d, config.clone()));
        let file: GroupFile = parse(&text).unwrap();
        let back = file.to_subgroup().unwrap();
        assert_eq!(back, d);
        assert_eq!(to_pretty(&GroupFile::from_subgroup(&back, file.config.clone())), text);
    }
}

#[test]
fn tampered_group_files_are_rejected() {
    let d = build_lp(PNorm::L2, &EnumerationScheme::grid(0), 40).unwrap();
    let file = GroupFile::from_subgroup(&d, RunConfig::new("build"));
    let mut stolen = file.clone();
    stolen.records[1].fresh = stolen.records[0].fresh;
    assert!(stolen.to_subgroup().is_err());
    let mut late = file.clone();
    late.steps = late.records.last().unwrap().step;
    assert!(late.to_subgroup().is_err());
    let mut version = file.clone();
    version.format_version = 99;
    assert!(version.to_subgroup().is_err());
    let mut mode = file.clone();
    mode.mode = "riesz_general".into();
    assert!(mode.to_subgroup().is_err());
    let mut p = file;
    p.p = 0;
    assert!(p.to_subgroup().is_err());
}

#[test]
fn certificates_round_trip() {
    let d = build_lp(PNorm::L1, &EnumerationScheme::grid(0), 200).unwrap();
    let l = d.lattice();
    for cert in [
        verify_separation(&l, &PowThreshold::from_integer(2), false).unwrap(),
        verify_separation(&l, &PowThreshold::from_integer(2), true).unwrap(),
        verify_density(&l, &d.processed_targets().unwrap(), &PowThreshold::from_integer(1)).unwrap(),
    ] {
        let j = CertificateJson::from_certificate(&cert);
        let text = serde_json::to_string(&j).unwrap();
        let back: CertificateJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_certificate().unwrap(), cert);
    }
    let strict = CertificateJson::from_certificate(&verify_separation(&l, &PowThreshold::from_integer(2), true).unwrap());
    let text = serde_json::to_string(&strict).unwrap();
    assert!(text.contains(r#""kind":"SeparationViolated""#));
    assert!(text.contains(r#""bound":{"type":"triangular""#));
}

#[test]
fn polytopes_and_matrices_round_trip() {
    let l = tilelat_core::Lattice::new(PNorm::L2, vec![SparseVector::from_integers(&[2, 0]), SparseVector::from_integers(&[0, 2])]).unwrap();
    let targets = vec![SparseVector::from_integers(&[1, 1])];
    let den = verify_density(&l, &targets, &PowThreshold::from_integer(2)).unwrap();
    let cell = voronoi_cell(&l, &SparseVector::zero(), &PowThreshold::from_integer(2), Some(&den)).unwrap();
    let j = PolytopeJson::from_polytope(&cell);
    let back: PolytopeJson = parse(&to_pretty(&j)).unwrap();
    assert_eq!(back.to_polytope().unwrap(), cell);

    let m = IntegerMatrix::from_rows(&[vec![1, -2, 3], vec![0, 5, 7]]).unwrap();
    let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
    assert_eq!(text, r#"{"rows":2,"cols":3,"entries":[[1,-2,3],[0,5,7]]}"#);
    assert_eq!(parse::<MatrixJson>(&text).unwrap().to_matrix().unwrap(), m);
}

#[test]
fn generator_lists_in_both_shapes() {
    let bare = r#"[[[0,"4/1"]],[[0,"6/1"]]]"#;
    let wrapped = r#"{"generators":[[[0,"4/1"]],[[0,"6/1"]]]}"#;
    let a = generators_from_json(bare).unwrap();
    assert_eq!(a, generators_from_json(wrapped).unwrap());
    assert_eq!(a, vec![SparseVector::from_integers(&[4]), SparseVector::from_integers(&[6])]);
    assert!(generators_from_json(r#"[[[0,"4/2"]]]"#).is_err());
}

#[test]
fn report_csv_has_exact_and_display_columns() {
    let d = build_lp(PNorm::L1, &EnumerationScheme::grid(0), 100).unwrap();
    let l = d.lattice();
    let one = PowThreshold::from_integer(1);
    let radii = [PowThreshold::from_integer(1), PowThreshold::from_integer(2)];
    let samples = [SparseVector::zero(), SparseVector::from_integers(&[1])];
    let report = tiling_report(&l, &one, &radii, &samples, &one).unwrap();
    let file = ReportFile::from_report(&report, &d, RunConfig::new("report"));
    let csv = file.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "series,x,x_float_display_only,y");
    assert_eq!(lines[1], format!("star_degree,1/1,1,{}", report.star_degree));
    assert_eq!(lines.iter().filter(|l| l.starts_with("ball_count,")).count(), 2);
    assert_eq!(lines.iter().filter(|l| l.starts_with("tiles_containing,")).count(), 2);
    let back: ReportFile = parse(&to_pretty(&file)).unwrap();
    assert_eq!(back, file);
}
