use multik::suite::Fixture;
use std::path::PathBuf;
use std::process::Command;

fn multik(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_multik")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn shipped_fixtures_match_the_builtins() {
    for (file, name) in [("vect_f2_2.json", "vect_f2(2)"), ("pointed_sets_2.json", "pointed_sets(2)")] {
        let loaded = Fixture::load(shipped(file).to_str().unwrap()).unwrap();
        assert_eq!(loaded, Fixture::builtin(name).unwrap(), "{file} is stale; regenerate with `multik export`");
    }
}

#[test]
fn suite_exit_codes() {
    let (code, out) = multik(&["suite", "vect_f2(1)"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("\"schema\": \"multik-report/1\""));

    let (code, out) = multik(&["suite", "vect_f2(1)", "--checks", ""]);
    assert_eq!(code, 0);
    assert!(out.contains("\"checks\": []"));

    let dir = std::env::temp_dir().join(format!("multik-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    let (code, _) = multik(&["mutate", "--kind", "drop-cofibration", "vect_f2(1)", "--out", bad.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out) = multik(&["suite", bad.to_str().unwrap(), "--checks", "category,waldhausen,wedges"]);
    assert_eq!(code, 1);
    assert!(out.contains("\"skipped\": \"needs waldhausen\""), "{out}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn refusals_and_bad_input_exit_2() {
    assert_eq!(multik(&["mutate", "--kind", "corrupt-wedge", "vect_f2(1)"]).0, 2);
    assert_eq!(multik(&["mutate", "--kind", "no-such-kind", "vect_f2(2)"]).0, 2);
    assert_eq!(multik(&["multinat", "--functor", "smash", "vect_f2(2)"]).0, 2);
    assert_eq!(multik(&["k0", "/nonexistent/fixture.json"]).0, 2);
    assert_eq!(multik(&["suite", "vect_f2(1)", "--checks", "bogus"]).0, 2);
}

#[test]
fn single_commands_report_integers() {
    let (code, out) = multik(&["k0", "pointed_sets(2)"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rank"], 1);
    let (code, out) = multik(&["enumerate", "--shape", "1,1", "pointed_sets(2)"]);
    assert_eq!(code, 0);
    assert!(!out.contains('.'), "floats or dotted names in {out}");
    for args in [&["phi", "--context", "2,1", "pointed_sets(2)"][..], &["pi0", "--m", "2", "vect_f2(2)"], &["naturality", "--window", "1,1", "pointed_sets(2)"], &["multinat", "--functor", "smash", "pointed_sets(2)"], &["validate", "pointed_sets(2)"]] {
        let (code, out) = multik(args);
        assert_eq!(code, 0, "{args:?}: {out}");
    }
}
