use uapprox::bench::{build_approximant, emit_plot, run_selftest, run_table, Column, Format, PlotOptions, RunConfig};
use uapprox::{lookup, Construction, Grid};

#[test]
fn table_shape_and_header() {
    let cfg = RunConfig::table(2).unwrap();
    let t = run_table(&cfg).unwrap();
    assert_eq!(t.cells.len(), cfg.sweep.len());
    assert!(t.cells.iter().all(|r| r.len() == cfg.columns.len()));
    let csv = t.to_csv().unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with(&cfg.row_header));
    assert!(header.contains("rect_1_to_10_2cycles"));
    assert_eq!(csv.lines().count(), cfg.sweep.len() + 1);
}

#[test]
fn failing_cell_is_isolated() {
    let mut cfg = RunConfig::sweep(Construction::Ffn, "x^2", vec![2, 4]).unwrap();
    cfg.columns.push(Column::new("rect_1_to_10"));
    let t = run_table(&cfg).unwrap();
    assert!(t.has_errors());
    assert!(t.value(0, 0).is_ok());
    assert!(t.value(1, 1).is_err());
    let csv = t.to_csv().unwrap();
    assert_eq!(csv.matches("NA:").count(), 2);
    assert!(t.to_markdown().contains("NA"));
}

#[test]
fn unknown_column_rejected_or_isolated() {
    let mut cfg = RunConfig::table(2).unwrap();
    cfg.columns = vec![Column::new("no_such_function")];
    if let Ok(t) = run_table(&cfg) {
        assert!(t.has_errors());
    }
}

#[test]
fn writes_requested_formats() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::table(3).unwrap();
    cfg.sweep = vec![1, 2];
    let t = run_table(&cfg).unwrap();
    let paths = t.write(dir.path(), &[Format::Csv, Format::Md, Format::Json]).unwrap();
    assert_eq!(paths.len(), 3);
    for p in &paths {
        assert!(std::fs::metadata(p).unwrap().len() > 0);
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&paths[2]).unwrap()).unwrap();
    assert!(json.is_object() || json.is_array());
}

#[test]
fn plot_is_valid_svg_with_one_curve_per_series() {
    let f = lookup("sin(2*pi*x/5)").unwrap();
    let (label, approx) = build_approximant(&f, Construction::Resnet, 10, PlotOptions::default()).unwrap();
    let grid = Grid::new(f.domain, 2001).unwrap();
    let svg = emit_plot(&f, &[(&label, &*approx)], &grid);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let polylines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(polylines, 2);
    assert!(svg.contains("resnet M=10"));
    assert_eq!(svg, emit_plot(&f, &[(&label, &*approx)], &grid));
}

#[test]
fn plot_escapes_and_clips() {
    let f = lookup("x^(-2)").unwrap();
    let grid = Grid::new(f.domain, 501).unwrap();
    let wild = |x: f64| if x < 0.5 { f64::INFINITY } else { -1e300 };
    let svg = emit_plot(&f, &[("a<b & c", &wild)], &grid);
    roxmltree::Document::parse(&svg).unwrap();
    assert!(svg.contains("a&lt;b &amp; c"));
}

#[test]
fn selftest_passes() {
    let checks = run_selftest(1);
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}
