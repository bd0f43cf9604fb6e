use std::path::Path;
use std::process::{Command, Output};

fn locwalk(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locwalk"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LOCWALK_THREADS")
        .output()
        .expect("binary runs")
}

fn write_haar(dir: &Path) {
    std::fs::write(dir.join("haar.json"), r#"{"kind": "haar"}"#).unwrap();
}

#[test]
fn check_writes_report_with_three_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    write_haar(dir.path());
    let out = locwalk(&["check", "--dist", "haar.json", "--z", "0.25", "--out", "chk"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("seed 0"), "{stdout}");
    let header: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("chk.json")).unwrap()).unwrap();
    for key in ["noncompact", "irreducible", "zeta_integrable"] {
        assert!(header["results"]["verdicts"][key].is_boolean());
    }
    assert_eq!(header["config"]["command"], "check");
    assert!(header["version"].is_string() && header["wall_time_seconds"].is_number());
}

#[test]
fn localize_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_haar(dir.path());
    let args = ["localize", "--dist", "haar.json", "--distances", "4,8,12", "--horizon", "200", "--realizations", "100", "--seed", "7"];
    let mut first = args.to_vec();
    first.extend(["--out", "a"]);
    let mut second = args.to_vec();
    second.extend(["--out", "b", "--threads", "3"]);
    assert!(locwalk(&first, dir.path()).status.success());
    assert!(locwalk(&second, dir.path()).status.success());
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(dir.path().join("b.csv")).unwrap());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "distance,mean_sup_amplitude,stderr,realizations,horizon");
    assert_eq!(lines.len(), 4);
    // Rerun from the embedded header.
    assert!(locwalk(&["localize", "--config", "a.json", "--out", "c"], dir.path()).status.success());
    assert_eq!(a, std::fs::read_to_string(dir.path().join("c.csv")).unwrap());
}

#[test]
fn thouless_columns() {
    let dir = tempfile::tempdir().unwrap();
    write_haar(dir.path());
    let out = locwalk(
        &["thouless", "--dist", "haar.json", "--n", "10", "--realizations", "4", "--z-abs", "1.05", "--phase-count", "4", "--chain-length", "2000", "--chain-realizations", "4", "--out", "th"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("th.csv")).unwrap();
    assert!(csv.starts_with("phase,gamma_direct,thouless_rhs,abs_diff\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"command\": \"dos\",\n  \"bins\": \"many\"\n}").unwrap();
    let out = locwalk(&["dos", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let out = locwalk(&["dos", "--dist", r#"{"kind":"discrete","atoms":[]}"#], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(locwalk(&["dos", "--bins", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(locwalk(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(locwalk(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = locwalk(&["lyapunov", "--dist", r#"{"kind":"fixed","coin":[[0,0],[1,0],[1,0],[0,0]]}"#, "--chain-length", "1000"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("estimate_lyapunov"), "{err}");
    assert!(!dir.path().join("locwalk-lyapunov.csv").exists());
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_locwalk"))
            .args(["dos", "--n", "4", "--realizations", "5", "--bins", "16", "--out", out])
            .current_dir(dir.path())
            .env("LOCWALK_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("1", "one").status.success());
    assert!(run("4", "four").status.success());
    assert_eq!(std::fs::read(dir.path().join("one.csv")).unwrap(), std::fs::read(dir.path().join("four.csv")).unwrap());
    assert_eq!(run("lots", "bad").status.code(), Some(2));
}
