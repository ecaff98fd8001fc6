use std::path::Path;

use faraday::csv::{format_value, render, write_series};
use faraday::error::EXIT_IO;
use faraday::CliError;

#[test]
fn header_then_one_row_per_sample() {
    let t = [0.0, 0.5];
    let v = [-0.09, 1.0 / 3.0];
    let text = render(Path::new("x.csv"), &[("t", &t), ("re_rho21", &v)]).unwrap();
    let lines: Vec<&str> = text.split('\n').collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "t,re_rho21");
    assert_eq!(lines[1], "0.0000000000000000e0,-8.9999999999999997e-2");
    assert_eq!(lines[3], "");
    assert!(!text.contains('\r'));
    let parsed: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(parsed, 1.0 / 3.0);
}

#[test]
fn non_finite_values_are_spelled_out() {
    assert_eq!(format_value(f64::NAN), "NaN");
    assert_eq!(format_value(f64::INFINITY), "inf");
}

#[test]
fn empty_or_ragged_columns_are_rejected() {
    let empty: [f64; 0] = [];
    for cols in [
        vec![("t", &empty[..])],
        vec![("t", &[1.0, 2.0][..]), ("v", &[1.0][..])],
        vec![],
    ] {
        let err = render(Path::new("bad.csv"), &cols).unwrap_err();
        assert!(matches!(&err, CliError::LengthMismatch { path } if path == Path::new("bad.csv")));
        assert_eq!(err.exit_code(), EXIT_IO);
    }
}

#[test]
fn writes_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_series(&path, &[("t", &[1.0])]).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "t\n1.0000000000000000e0\n");
    let missing = dir.path().join("no/such/dir/s.csv");
    assert_eq!(
        write_series(&missing, &[("t", &[1.0])]).unwrap_err().exit_code(),
        EXIT_IO
    );
}
