use std::path::Path;
use std::process::{Command, Output};

fn hsi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsi"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PHYSIC_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_optimize_metrics_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = hsi(&["synth", "standing", "--seed", "7", "-o", "fx"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = hsi(&["optimize", "fx", "-o", "out"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["scene.ply", "log.json", "person_0_params.json", "person_0_contacts.json", "person_0_mesh.ply"] {
        assert!(d.join("out").join(f).is_file(), "{f}");
    }
    let o = hsi(&["metrics", "out", "fx"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let f1 = report["overall"]["f1"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f1));
    assert!(report["overall"]["mpjpe"].as_f64().unwrap() >= 0.0);

    let o = hsi(&["contacts", "out"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("person 0: "));
}

#[test]
fn build_scene_writes_ply() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(hsi(&["synth", "seated", "--seed", "1", "-o", "fx"], d).status.code(), Some(0));
    let o = hsi(&["build-scene", "fx", "-o", "scene.ply"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(d.join("scene.ply")).unwrap();
    assert!(text.starts_with("ply\nformat ascii 1.0\n"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsi(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn help_and_version_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsi(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("optimize"));
    let o = hsi(&["--version"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn missing_keypoints_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(hsi(&["synth", "standing", "--seed", "2", "-o", "fx"], d).status.code(), Some(0));
    std::fs::remove_file(d.join("fx/person_0_keypoints.json")).unwrap();
    let o = hsi(&["optimize", "fx", "-o", "out"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("keypoints"), "{}", stderr(&o));
    assert!(!d.join("out").exists());
}

#[test]
fn bad_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(hsi(&["synth", "standing", "--seed", "2", "-o", "fx"], d).status.code(), Some(0));
    std::fs::write(d.join("cfg.json"), r#"{"schedule": {"stage3_iters": 0}}"#).unwrap();
    let o = hsi(&["optimize", "fx", "-c", "cfg.json", "-o", "out"], d);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("stage3_iters"));
}

#[test]
fn missing_bundle_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsi(&["optimize", "nowhere", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("manifest.json"));
}
