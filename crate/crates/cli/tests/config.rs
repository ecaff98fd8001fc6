use faraday::config::{parse_config, parse_override, Scenario, Units};
use faraday::error::{EXIT_CONFIG, EXIT_REGIME};
use faraday::CliError;
use faraday_core::observables::TimeOrigin;
use serde_json::json;

#[test]
fn empty_document_names_the_missing_scenario() {
    for text in ["", "  \n", "{}"] {
        match parse_config(text, None, &[]) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "scenario"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let cases = [
        (r#"{"scenario":"fig2","omega_q":1}"#, "omega_q"),
        (r#"{"scenario":"fig2","system":{"omega_q":1}}"#, "system.omega_q"),
        (r#"{"scenario":"fig2","overrides":{"grid.samples":10}}"#, "grid.samples"),
    ];
    for (text, want) in cases {
        let err = parse_config(text, None, &[]).unwrap_err();
        assert!(matches!(&err, CliError::UnknownKey { path } if path == want), "{err:?}");
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }
}

#[test]
fn minimal_fig2_fills_in_defaults() {
    let cfg = parse_config(r#"{"scenario":"fig2","system":{"delta":0.03}}"#, None, &[]).unwrap();
    assert_eq!(cfg.scenario, Scenario::Fig2);
    assert_eq!(cfg.units, Units::GammaUnits);
    let p = cfg.system;
    assert_eq!(p.gamma, 2.0 / 3.0);
    assert!((p.dephasing() - 1.0).abs() < 1e-15);
    assert!((p.omega_c - 1.0).abs() < 1e-15);
    assert!((p.omega_p - 0.3).abs() < 1e-15);
    assert!((p.gamma0 - 1e-4).abs() < 1e-19);
    assert_eq!((p.delta, p.delta_1, p.delta_2, p.delta_c), (0.03, 0.03, -0.03, 0.0));
    assert_eq!(cfg.fig2.deltas, vec![0.03]);
    assert!((cfg.grid.t_end - 400.0).abs() < 1e-12);
    assert_eq!(cfg.grid.sample_count, 4000);
    assert!(!cfg.doppler.enabled);
    assert_eq!(cfg.output_dir, "out");
    assert_eq!(cfg.rotation.n_slices, 256);
    assert_eq!(cfg.rotation.time_origin, TimeOrigin::CellMidpoint);
}

#[test]
fn unit_errors() {
    let err = parse_config(r#"{"scenario":"fig2","system":{"gamma":1.0}}"#, None, &[]).unwrap_err();
    assert!(matches!(err, CliError::Unit(_)), "{err:?}");
    let zeeman = r#"{"scenario":"fig2","zeeman":{"g_lande":0.5,"b_field":1e-3}}"#;
    assert!(matches!(
        parse_config(zeeman, None, &[]).unwrap_err(),
        CliError::Unit(_)
    ));
    let si = r#"{"scenario":"fig2","units":"si"}"#;
    assert!(
        matches!(parse_config(si, None, &[]).unwrap_err(), CliError::Schema { path, .. } if path == "system.gamma")
    );
}

#[test]
fn si_units_derive_shifts_from_the_field() {
    let text = r#"{"scenario":"sweep_b","units":"si",
        "system":{"gamma":3.8e7,"omega_c":3.8e7},
        "zeeman":{"g_lande":0.5,"b_field":1e-3},
        "sweep_b":{"b_fields":[1e-3,2e-3]}}"#;
    let cfg = parse_config(text, None, &[]).unwrap();
    let d = cfg.system.delta;
    assert!(d > 0.0);
    assert!((cfg.sweep_b.points[1].delta - 2.0 * d).abs() <= 1e-12 * d);
    // defaults scale with Γ = 3γ/2
    assert!((cfg.grid.t_end - 400.0 / 5.7e7).abs() < 1e-18);
}

#[test]
fn overrides_apply_in_order() {
    let text = r#"{"scenario":"fig2","system":{"delta":0.01},"overrides":{"system.delta":0.02}}"#;
    assert_eq!(parse_config(text, None, &[]).unwrap().system.delta, 0.02);
    let set = parse_override("system.delta=0.05").unwrap();
    assert_eq!(set.1, json!(0.05));
    assert_eq!(parse_config(text, None, &[set]).unwrap().system.delta, 0.05);
    let origin = parse_override("rotation.time_origin=cell_entrance").unwrap();
    assert_eq!(origin.1, json!("cell_entrance"));
    assert!(matches!(parse_override("no_equals_sign"), Err(CliError::Override(_))));
}

#[test]
fn command_scenario_must_agree_with_document() {
    let cfg = parse_config("", Some(Scenario::SweepB), &[]).unwrap();
    assert_eq!(cfg.scenario, Scenario::SweepB);
    assert_eq!(cfg.sweep_b.points.len(), 5);
    let err = parse_config(r#"{"scenario":"fig2"}"#, Some(Scenario::SweepB), &[]).unwrap_err();
    assert!(matches!(err, CliError::Schema { path, .. } if path == "scenario"));
}

#[test]
fn medium_scenarios_require_a_medium() {
    let err = parse_config("", Some(Scenario::Rotation), &[]).unwrap_err();
    assert!(matches!(err, CliError::Schema { path, .. } if path == "medium"));
}

#[test]
fn doppler_enabled_follows_width() {
    let cfg = parse_config(r#"{"scenario":"fig2","doppler":{"doppler_width":0.5}}"#, None, &[]).unwrap();
    assert!(cfg.doppler.enabled);
    assert_eq!(cfg.system.doppler_width, 0.5);
    let off = r#"{"scenario":"fig2","doppler":{"doppler_width":0.5,"enabled":false}}"#;
    assert_eq!(parse_config(off, None, &[]).unwrap().system.doppler_width, 0.0);
}

#[test]
fn invalid_values_map_to_config_exit_code() {
    let err = parse_config(r#"{"scenario":"fig2","grid":{"sample_count":1}}"#, None, &[]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG, "{err}");
    let err = parse_config(r#"{"scenario":"fig2","system":{"omega_c":-1}}"#, None, &[]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG, "{err}");
    assert_ne!(EXIT_CONFIG, EXIT_REGIME);
}

#[test]
fn resolved_config_round_trips_through_json() {
    let cfg = parse_config(
        r#"{"scenario":"fig2","system":{"delta":0.1},"doppler":{"doppler_width":0.3}}"#,
        None,
        &[],
    )
    .unwrap();
    let text = serde_json::to_string(&cfg).unwrap();
    let back: faraday::ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn bundled_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        parse_config(&text, None, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 5);
}
