use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lvpp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvpp"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("LVPP_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn biactive_first_increment_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvpp(&["obstacle", "--problem", "biactive", "--levels", "4", "--schedule", "dexp:1.5,1.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("obstacle_biactive_L4.csv")).unwrap();
    assert!(csv.starts_with("# lvpp "));
    assert!(csv.contains("# git = "));
    assert!(csv.contains("# config.schedule = dexp:1.5,1.5"));
    let rows = data_rows(&csv);
    let inc: f64 = rows[0][2].parse().unwrap();
    assert!((inc - 2.10).abs() < 0.01, "{inc}");
    assert!(dir.path().join("obstacle_biactive_L4.vtk").exists());
    assert!(dir.path().join("obstacle_biactive_errors.csv").exists());
}

#[test]
fn identical_configs_give_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["obstacle", "--problem", "spherical", "--levels", "2-3"];
    assert!(lvpp(&args, a.path()).status.success());
    assert!(lvpp(&args, b.path()).status.success());
    for name in ["obstacle_spherical_L2.csv", "obstacle_spherical_L3.csv", "obstacle_spherical_errors.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn geometric_rates_approach_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvpp(&["rates", "--case", "geo:2", "--k", "10"], dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("rates_geo_2.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 10);
    let ratio: f64 = rows[9][3].parse().unwrap();
    assert!((ratio - 0.5).abs() < 1e-3);
}

#[test]
fn advection_report_separates_the_methods() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvpp(&["advdiff", "--epsilon", "0.01", "--levels", "5"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("advdiff_report.csv")).unwrap();
    let rows = data_rows(&csv);
    let min_of = |method: &str| -> f64 { rows.iter().find(|r| r[2] == method).unwrap()[3].parse().unwrap() };
    assert!(min_of("galerkin") < 0.0);
    assert!(min_of("proximal") >= 0.0);
}

#[test]
fn topopt_writes_history_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvpp(&["topopt", "--levels", "3", "--checkpoint", "10"], dir.path());
    assert!(out.status.success());
    let rows = data_rows(&fs::read_to_string(dir.path().join("topopt_L3.csv")).unwrap());
    assert!(rows.len() > 10);
    assert!(dir.path().join("topopt_L3_k0010.vtk").exists());
    assert!(dir.path().join("topopt_L3_final.vtk").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "problem = \"nonsmooth\"\nlevels = [2]\nschedule = \"geo:2\"\n").unwrap();
    let out = lvpp(&["obstacle", "--config", cfg.to_str().unwrap(), "--levels", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("obstacle_nonsmooth_L3.csv")).unwrap();
    assert!(csv.contains("# config.schedule = geo:2"));
    assert!(!dir.path().join("obstacle_nonsmooth_L2.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lvpp(&["obstacle", "--problem", "unknown"], dir.path()).status.code(), Some(1));
    assert_eq!(lvpp(&["obstacle", "--schedule", "geo:0.5"], dir.path()).status.code(), Some(1));
    assert_eq!(lvpp(&["obstacle", "--no-such-flag"], dir.path()).status.code(), Some(1));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "levls = 3\n").unwrap();
    assert_eq!(lvpp(&["verify", "--config", bad.to_str().unwrap()], dir.path()).status.code(), Some(1));
    let out = lvpp(&["obstacle", "--problem", "strict", "--levels", "2", "--max-outer", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_every_check_within_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = lvpp(&["verify", "--levels", "6", "--theta", "0.01"], dir.path());
    assert!(out.status.success());
    let rows = data_rows(&fs::read_to_string(dir.path().join("verify.csv")).unwrap());
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[3] == "true"), "{rows:?}");
}
