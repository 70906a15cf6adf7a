use std::path::Path;
use std::process::{Command, Output};

fn wvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvlab")).args(args).output().unwrap()
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn fisher_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = wvlab(&["fisher", "--scenario", "fig6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["command"], "fisher");
    for f in summary["outputs"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists());
    }
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = wvlab(&[
            "spectrum",
            "--scenario",
            "fig2",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        read_all(&out)
    };
    let a = run("a", "17");
    let b = run("b", "17");
    let c = run("c", "18");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn unknown_preset_exits_with_config_code() {
    let o = wvlab(&["fisher", "--scenario", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_scenario_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"name\": \"bad\", \"beam\": {\"sigma\": \"wide\"}}").unwrap();
    let o = wvlab(&[
        "fisher",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beam.sigma"));
}

#[test]
fn strict_mode_rejects_strong_drive() {
    let dir = tempfile::tempdir().unwrap();
    let show = wvlab(&["show", "--scenario", "fig2"]);
    assert!(show.status.success());
    let mut v: serde_json::Value = serde_json::from_slice(&show.stdout).unwrap();
    v["drive"]["amplitude"] = serde_json::json!("50 urad");
    let path = dir.path().join("strong.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = dir.path().join("o");
    let args = [
        "spectrum",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let o = wvlab(&[&args[..], &["--strict"]].concat());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn presets_are_listed() {
    let o = wvlab(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "crb"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
