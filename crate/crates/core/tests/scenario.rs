use wvlab::scenario::{Scenario, PRESET_NAMES};
use wvlab::Error;

#[test]
fn presets_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in PRESET_NAMES {
        let sc = Scenario::preset(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, sc.to_json().unwrap()).unwrap();
        assert_eq!(Scenario::from_file(&path).unwrap(), sc, "{name}");
        assert_eq!(Scenario::load(path.to_str().unwrap()).unwrap(), sc);
    }
}

#[test]
fn unknown_preset_is_a_config_error() {
    let e = Scenario::load("fig99").unwrap_err();
    assert!(e.is_config());
}

#[test]
fn misspelled_field_reports_its_path() {
    let text = Scenario::preset("fig2")
        .unwrap()
        .to_json()
        .unwrap()
        .replace("\"lever_arm\"", "\"lever_arms\"");
    match Scenario::from_json(&text).unwrap_err() {
        Error::Config { path, line, .. } => {
            assert!(path.starts_with("wv."), "{path}");
            assert!(line > 1);
        }
        e => panic!("unexpected error {e}"),
    }
}

#[test]
fn invalid_values_are_rejected() {
    let sc = Scenario::preset("fig2").unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&sc.to_json().unwrap()).unwrap();
    v["beam"]["sigma"] = serde_json::json!(-1.0);
    assert!(Scenario::from_json(&v.to_string()).unwrap_err().is_config());
    v["beam"]["sigma"] = serde_json::json!("1.075 parsecs");
    assert!(Scenario::from_json(&v.to_string()).unwrap_err().is_config());
}

#[test]
fn units_are_accepted_in_any_numeric_field() {
    let sc = Scenario::preset("fig2").unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&sc.to_json().unwrap()).unwrap();
    v["beam"]["sigma"] = serde_json::json!("1.075 mm");
    v["wv"]["power"] = serde_json::json!("1.45 mW");
    let parsed = Scenario::from_json(&v.to_string()).unwrap();
    assert_eq!(parsed, sc);
}

#[test]
fn large_drive_warns() {
    let mut sc = Scenario::preset("fig2").unwrap();
    assert!(sc.warnings().unwrap().is_empty());
    sc.drive.amplitude = 5e-5;
    assert!(!sc.warnings().unwrap().is_empty());
}
