use std::process::{Command, Output};

fn mixfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn csv_table_for_poisson() {
    let o = mixfem(&["run", "poisson-lm", "--dim", "2", "--resolutions", "2,4,8", "--degree", "1", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,h,var,norm,error,rate"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[0][5], "");
    let ns: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ns.windows(2).all(|w| w[0] <= w[1]));
    let l2_rate: f64 = rows
        .iter()
        .find(|r| r[0] == "8" && r[2] == "u" && r[3] == "L2")
        .unwrap()[5]
        .parse()
        .unwrap();
    assert!((l2_rate - 2.0).abs() < 0.15);
}

#[test]
fn json_output_and_determinism() {
    let args = ["run", "stokes-brinkman", "--resolutions", "4,8", "--format", "json"];
    let a = mixfem(&args);
    let b = mixfem(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.trim_start().starts_with('['));
    assert!(out.contains("\"var\": \"p\""));
    assert!(out.contains("\"rate\": null"));
}

#[test]
fn iterative_solver_override() {
    let o = mixfem(&["run", "poisson-lm", "--resolutions", "4,8", "--solver", "minres", "--tol", "1e-10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn matrix_and_solution_export() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = dir.path().join("system.mtx");
    let csv = dir.path().join("u.csv");
    let o = mixfem(&[
        "run",
        "poisson-lm",
        "--resolutions",
        "2,4",
        "--dump-matrix",
        mtx.to_str().unwrap(),
        "--export-solution",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = std::fs::read_to_string(&mtx).unwrap();
    assert!(header.starts_with("%%MatrixMarket matrix coordinate real"));
    // 25 vertices + 5 multiplier dofs at n = 4
    assert!(header.lines().any(|l| l.starts_with("30 30 ")));
    assert!(dir.path().join("system.mtx.rhs").exists());
    let field = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(field.lines().count(), 26);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["run", "poisson-lm", "--solver", "lu"],
        vec!["run", "heat"],
        vec!["run", "poisson-lm", "--dim", "4"],
        vec!["run", "poisson-lm", "--resolutions", "8,4"],
        vec!["run", "stokes-brinkman", "--degree", "3"],
    ] {
        let o = mixfem(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_with_one() {
    let o = mixfem(&["run", "poisson-lm", "--resolutions", "8", "--solver", "cg", "--maxit", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolution n = 8"));
}
