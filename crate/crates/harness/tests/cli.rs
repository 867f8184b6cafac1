use std::path::Path;
use std::process::Command;

const SMALL: &str = r#"
channel = "paper-dip5"
m = 4
k = 4
n = 16
snr_db_grid = [0.0, 10.0]
alpha_fb_grid = [2.0, 6.0]
schemes = ["analog", "rvq", "tdq-limit", "tdq-suq-greedy"]
n_trials = 40
master_seed = 7

[rvq]
j_grid = [4, 8, 16]
"#;

fn csifb() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csifb"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let mut outputs = Vec::new();
    for jobs in ["1", "4", "8"] {
        let out = dir.path().join(format!("out{jobs}.csv"));
        let st = csifb()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .status()
            .unwrap();
        assert!(st.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &SMALL.replace("k = 4", "k = 3"));
    let st = csifb()
        .args(["bounds", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
    let st = csifb()
        .args(["bounds", "--config", "/no/such/file.toml"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn strict_cap_violation_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("j_grid = [4, 8, 16]", "j_grid = [1]\nb_cap = 10")
        .replace(
            "\"analog\", \"rvq\", \"tdq-limit\", \"tdq-suq-greedy\"",
            "\"rvq\"",
        );
    let cfg = write(dir.path(), "cap.toml", &text);
    let out = csifb()
        .args(["bounds", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("rvq-bits-over-cap"));
    let st = csifb()
        .args(["bounds", "--strict", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn presets_and_selftest_run() {
    let out = csifb().arg("presets").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("paper-dip5") && text.contains("sui4-omni"));
    let out = csifb()
        .args(["presets", "--show", "sui4-omni"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("sui4-omni"));
    let out = csifb().arg("selftest").output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn seed_and_trials_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "small.toml",
        &SMALL.replace("\"analog\", \"rvq\", ", ""),
    );
    let run = |seed: &str| {
        let out = csifb()
            .args(["simulate", "--trials", "12", "--seed", seed, "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("1");
    assert!(a.lines().skip(1).all(|l| l.split(',').nth(9) == Some("12")));
    assert_ne!(a, run("2"));
}
