use hajlasz::formats::{
    load_field, read_json, write_json, BackendSpec, FamilyName, FieldFile, GradientFile, MapSpec, ParamsSpec, SpaceFile,
};
use hajlasz::report::{convert, render, Format, Report, ReportKind};
use hajlasz::Error;
use hajlasz_core::{GradientSequence, MetricMeasureSpace, ScaleWindow};
use serde_json::json;

#[test]
fn grid_space_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let space = MetricMeasureSpace::build_periodic_grid(2, 6, 1.0).unwrap();
    let path = dir.path().join("space.json");
    write_json(&path, &SpaceFile::describe(&space)).unwrap();
    let back = read_json::<SpaceFile>(&path).unwrap().build().unwrap();
    assert_eq!(back.len(), 36);
    assert_eq!(SpaceFile::hash_of(&back), SpaceFile::hash_of(&space));
    for (i, j) in [(0, 5), (3, 20), (7, 35)] {
        assert_eq!(back.dist(i, j), space.dist(i, j));
    }
}

#[test]
fn point_cloud_keeps_distances_and_measure() {
    let file: SpaceFile = serde_json::from_value(json!({
        "topology": {"kind": "point_cloud"},
        "dist": [[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]],
        "measure": [1.0, 2.0, 0.5]
    }))
    .unwrap();
    let s = file.build().unwrap();
    assert_eq!(s.dist(1, 2), 1.5);
    assert_eq!(s.total_measure(), 3.5);
    let again = SpaceFile::describe(&s).build().unwrap();
    assert_eq!(SpaceFile::hash_of(&again), SpaceFile::hash_of(&s));
}

#[test]
fn cloud_without_points_is_rejected_with_a_path() {
    let file: SpaceFile = serde_json::from_value(json!({"topology": {"kind": "point_cloud"}})).unwrap();
    assert!(matches!(file.build(), Err(Error::Spec { path, .. }) if path == "space"));
}

#[test]
fn fields_are_tied_to_their_space() {
    let dir = tempfile::tempdir().unwrap();
    let a = MetricMeasureSpace::build_periodic_grid(1, 4, 1.0).unwrap();
    let b = MetricMeasureSpace::build_periodic_grid(1, 4, 2.0).unwrap();
    let path = dir.path().join("fields.json");
    let files = vec![
        FieldFile { space: Some(SpaceFile::hash_of(&a)), values: vec![0.0, 1.0, 0.5, 0.1] },
        FieldFile { space: None, values: vec![0.1 + 0.2, -3.0, 1e-300, 7.0] },
    ];
    write_json(&path, &files).unwrap();
    assert_eq!(load_field(&path, 0, &a).unwrap().values(), &[0.0, 1.0, 0.5, 0.1]);
    // floats survive the text round trip bit for bit
    assert_eq!(load_field(&path, 1, &b).unwrap().values()[0], 0.1 + 0.2);
    assert!(matches!(load_field(&path, 0, &b), Err(Error::Usage(_))));
    assert!(matches!(load_field(&path, 2, &a), Err(Error::Usage(_))));
}

#[test]
fn gradient_file_round_trip() {
    let w = ScaleWindow::new(-1, 2).unwrap();
    let seq = GradientSequence::from_flat(w, 3, (0..12).map(|i| i as f64 * 0.25).collect()).unwrap();
    let file = GradientFile::from_sequence(&seq);
    let text = serde_json::to_string(&file).unwrap();
    let back: GradientFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_sequence(3).unwrap(), seq);
    let short = GradientFile { window: [0, 1], g: [("0".to_string(), vec![1.0])].into_iter().collect() };
    assert!(matches!(short.to_sequence(3), Err(Error::Spec { path, .. }) if path == "g.0"));
}

#[test]
fn infinite_exponents_are_written_as_text() {
    let p = ParamsSpec::new(0.5, 2.0, f64::INFINITY, FamilyName::M);
    let v = serde_json::to_value(p).unwrap();
    assert_eq!(v["q"], json!("inf"));
    let back: ParamsSpec = serde_json::from_value(v).unwrap();
    assert_eq!(back, p);
    let parsed: ParamsSpec = serde_json::from_value(json!({"s": 1, "p": "Infinity", "q": 3, "family": "N"})).unwrap();
    assert!(parsed.p.is_infinite() && parsed.family == FamilyName::N);
}

#[test]
fn backend_and_map_shorthands() {
    assert_eq!(BackendSpec::parse("difference").unwrap().label(), "difference(k0=1)");
    assert_eq!(BackendSpec::parse("optimal").unwrap().label(), "optimal(auto,tol=1e-6)");
    assert!(BackendSpec::parse("spectral").is_err());
    assert_eq!(MapSpec::parse("radial:a=1.5").unwrap(), MapSpec::RadialPower { a: 1.5 });
    assert_eq!(MapSpec::parse("dilation:2").unwrap(), MapSpec::Dilation { factor: 2.0 });
    assert_eq!(
        MapSpec::parse("linear:2,0,0,1").unwrap(),
        MapSpec::Linear { matrix: vec![vec![2.0, 0.0], vec![0.0, 1.0]] }
    );
    assert!(MapSpec::parse("linear:1,2,3").is_err());
    let b: BackendSpec = serde_json::from_value(json!({"kind": "optimal"})).unwrap();
    assert_eq!(b, BackendSpec::optimal());
}

fn sample_report() -> Report {
    let mut r = Report::new(ReportKind::NormTable, "abc".into(), vec!["field".into(), "label".into(), "value".into()]);
    r.rows.push(vec![json!(0), json!("Hajłasz–Besov ∞"), json!(1.25)]);
    r.rows.push(vec![json!(1), json!("plain, with comma"), json!("inf")]);
    r.rows.push(vec![json!(2), json!("naïve \"quoted\""), json!(0.1)]);
    r
}

#[test]
fn json_reports_are_lossless_including_non_ascii_labels() {
    let dir = tempfile::tempdir().unwrap();
    let r = sample_report();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    write_json(&a, &r).unwrap();
    convert(&a, &b, Format::Json).unwrap();
    let back: Report = read_json(&b).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.rows[0][1], json!("Hajłasz–Besov ∞"));
}

#[test]
fn csv_conversion_keeps_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let r = sample_report();
    let a = dir.path().join("a.json");
    let c = dir.path().join("a.csv");
    write_json(&a, &r).unwrap();
    convert(&a, &c, Format::Csv).unwrap();
    let mut reader = csv::Reader::from_path(&c).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["field", "label", "value"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), r.rows.len());
    assert_eq!(&rows[1][1], "plain, with comma");
    assert_eq!(&rows[1][2], "inf");
    assert_eq!(&rows[2][1], "naïve \"quoted\"");
}

#[test]
fn empty_report_renders_header_only() {
    let r = Report::new(ReportKind::RatioTable, "h".into(), vec!["field".into(), "ratio".into()]);
    assert_eq!(render(&r, Format::Csv).unwrap(), b"field,ratio\n");
    assert!(matches!("yaml".parse::<Format>(), Err(Error::Usage(_))));
}
