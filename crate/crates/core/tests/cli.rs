use std::path::Path;
use std::process::{Command, Output};

fn bcrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcrk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn header_and_rows(path: &Path) -> (Vec<String>, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(str::to_owned)
        .partition(|l| l.starts_with('#'))
}

#[test]
fn help_lists_subcommands() {
    let out = bcrk(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["phyto", "heat-conv", "heat-vios", "cahn-hilliard"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn unknown_flag_exits_one() {
    assert_eq!(bcrk(&["phyto", "--bogus"]).status.code(), Some(1));
    assert_eq!(bcrk(&["heat-conv", "--dt", "0.1"]).status.code(), Some(1));
}

#[test]
fn unknown_parameter_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.txt");
    std::fs::write(&params, "theta0 = 2\n").unwrap();
    let out = bcrk(&["phyto", "--params", params.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solver_failure_writes_partial_csv_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ch.csv");
    let out = bcrk(&[
        "cahn-hilliard",
        "--constrained",
        "vp",
        "--dt",
        "1e-2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let (meta, rows) = header_and_rows(&path);
    assert!(meta.iter().any(|l| l.starts_with("# status: failed")));
    assert_eq!(rows[0], "time,energy,min_c,max_c,mass,newton_its");
    assert!(rows.len() > 1 && rows.len() < 6, "{} rows", rows.len());
}

#[test]
fn params_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.txt");
    std::fs::write(&params, "# shorter run\ntfinal = 3\nc0 = 20\n").unwrap();
    let path = dir.path().join("phyto.csv");
    let out = bcrk(&[
        "phyto",
        "--tfinal",
        "10",
        "--params",
        params.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (meta, rows) = header_and_rows(&path);
    assert!(meta.iter().any(|l| l == "# tfinal: 3"));
    assert!(meta.iter().any(|l| l.contains("c0: 20.0")));
    assert_eq!(rows.len(), 4);
}

#[test]
fn heat_conv_table_has_one_row_per_method_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let out = bcrk(&[
        "heat-conv",
        "--degree",
        "2",
        "--space",
        "bernstein",
        "--time-basis",
        "bernstein",
        "--cells",
        "4,8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, rows) = header_and_rows(&path);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("B2-RIIA(B2)-VI,4,"));
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vios.csv");
    let to_file = bcrk(&["heat-vios", "--out", path.to_str().unwrap()]);
    let to_stdout = bcrk(&["heat-vios"]);
    assert!(to_file.status.success() && to_stdout.status.success());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}
