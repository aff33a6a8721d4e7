use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nqca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqca"))
        .args(args)
        .output()
        .unwrap()
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn small_scenario(dir: &Path) -> PathBuf {
    let path = dir.join("small.scenario");
    fs::write(
        &path,
        "schema_version = 1\nname = \"small\"\nn_sites = 12\np = 0.6\nq = 0.5\n\
         xi = [0.0, 1.0]\nphi_sum = \"pi\"\nt_max = 50\nclassical_baseline = true\n\
         sweep_p = [0.5, 0.7]\nsweep_xi = [0.0, 1.0]\nreducer = \"max_gap\"\n\
         optimize_axis = \"xi\"\noptimize_values = [0.0, 0.5, 1.0]\n",
    )
    .unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn figure_scenario_with_single_xi() {
    let out = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("fig1.scenario");
    let o = nqca(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--override",
        "xi=0",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut files: Vec<String> = fs::read_dir(out.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["fig1_classical.csv", "fig1_xi0.csv"]);
    let csv = fs::read_to_string(out.path().join("fig1_xi0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,rho_rr,p_abs_inst,p_tot,trace"));
    assert_eq!(lines.count(), 1000);
}

#[test]
fn out_of_range_parameter_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_scenario(dir.path());
    let o = nqca(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--override",
        "p=1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("`p`") && err.contains("[0, 1]"), "{err}");
}

#[test]
fn unknown_keys_fail_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_scenario(dir.path());
    let o = nqca(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--override",
        "gamma=0.1",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("gamma"));
    let bad = dir.path().join("bad.scenario");
    fs::write(
        &bad,
        fs::read_to_string(&cfg).unwrap() + "colour = \"red\"\n",
    )
    .unwrap();
    let o = nqca(&["run", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn missing_config_fails() {
    let o = nqca(&["run", "--config", "/nonexistent/x.scenario"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("x.scenario"));
}

#[test]
fn svg_only_when_requested_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_scenario(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = nqca(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!a.join("small.svg").exists());
    let o = nqca(&[
        "--threads",
        "2",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--svg",
        "--debug-psd",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(b.join("small.svg").exists());
    for f in ["small_xi0.csv", "small_xi1.csv", "small_classical.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sweep_and_optimize_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_scenario(dir.path());
    let o = nqca(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("small_sweep.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "p,xi,max_gap");
    assert_eq!(lines.len(), 5);
    assert!(lines[2].starts_with("0.5,1,"));

    let o = nqca(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("best xi ="));
    let table = fs::read_to_string(dir.path().join("small_optimize.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("xi,p_tot_at"));
}

#[test]
fn sweep_without_axes_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("fig1.scenario");
    let o = nqca(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sweep"));
}

#[test]
fn selfcheck_passes() {
    let o = nqca(&["selfcheck"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn shipped_scenarios_parse() {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(scenarios()).unwrap() {
        let path = entry.unwrap().path();
        let o = nqca(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--override",
            "t_max=0",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
    }
}
