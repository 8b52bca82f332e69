use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpme")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const CONFIG: &str = "\
sigma = 0.5
m = 2
X = 4
Y = 4
T = 0.25
I = 32
K = 16
J = 40
initial_data = bump(1, 1.5)
";

#[test]
fn sigma_table_matches_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sigma-table", "--out", "table.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(csv.starts_with("sigma,y,E,alpha,sigma_e\n"));
    assert!(csv.contains("1.0000,0.1250,0.1260,1.0340,0.9660"));
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn sigma_table_subset_and_extra_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sigma-table", "--sigmas", "1,0.75", "--ys", "0.5"], dir.path());
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("1.0000,0.5000,0.5681,,"));
    assert!(csv.contains("0.7500,0.5000,"));
}

#[test]
fn solve_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), CONFIG).unwrap();
    let args = ["solve", "--config", "run.cfg", "--snapshots", "0,0.125,0.25", "--out-prefix", "a"];
    assert_eq!(code(&run(&args, dir.path())), 0);
    let args = ["solve", "--config", "run.cfg", "--snapshots", "0,0.125,0.25", "--out-prefix", "b"];
    assert_eq!(code(&run(&args, dir.path())), 0);
    for kind in ["trace", "snapshots"] {
        let a = fs::read(dir.path().join(format!("a_{kind}.csv"))).unwrap();
        let b = fs::read(dir.path().join(format!("b_{kind}.csv"))).unwrap();
        assert_eq!(a, b);
    }
    let snaps = fs::read_to_string(dir.path().join("a_snapshots.csv")).unwrap();
    assert!(snaps.starts_with("t,x,y,w\n"));
    assert_eq!(snaps.lines().count(), 1 + 3 * 33 * 17);
    assert!(!snaps.contains('\r'));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["solve", "--config", "missing.cfg"], dir.path())), 2);
    fs::write(dir.path().join("cfl.cfg"), CONFIG.replace("J = 40", "J = 1")).unwrap();
    assert_eq!(code(&run(&["solve", "--config", "cfl.cfg"], dir.path())), 2);
    fs::write(dir.path().join("bad.cfg"), CONFIG.replace("sigma = 0.5", "sigma = 2.5")).unwrap();
    assert_eq!(code(&run(&["solve", "--config", "bad.cfg"], dir.path())), 2);
    assert_eq!(code(&run(&["convergence", "--sigma", "1", "--m", "1", "--mode", "fast"], dir.path())), 2);
    assert_eq!(
        code(&run(&["convergence", "--sigma", "1", "--m", "1", "--mode", "optimal", "--levels", "2"], dir.path())),
        2
    );
    assert_eq!(code(&run(&["no-such-command"], dir.path())), 2);
}

#[test]
fn convergence_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        ["convergence", "--sigma", "1", "--m", "1", "--mode", "optimal", "--levels", "3", "--plot", "--out", "c.csv"];
    let out = run(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(csv.starts_with("level,I,dx,dt,J,error_inf,error_field,order,order_field,target\n"));
    assert_eq!(csv.lines().count(), 4);
    let svg = fs::read_to_string(dir.path().join("c.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn validate_passes_and_detects_injected_faults() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8(out.stdout).unwrap().contains("FAIL"));
    let out = run(&["validate", "--mu-scale", "1.01"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
    assert_eq!(code(&run(&["validate", "--pv-tol", "1e-2"], dir.path())), 1);
}
