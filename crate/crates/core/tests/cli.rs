use std::fs;
use std::process::{Command, Output};

use pvqed::fields::{field_to_csv, make_test_field, TestField};

fn pvqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvqed"))
        .args(args)
        .env_remove("PVQED_THREADS")
        .output()
        .expect("spawn pvqed")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn scheme_prints_coefficients() {
    let o = pvqed(&["scheme", "--masses", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("# pvqed "));
    assert!(header.contains("masses=1e0,2e0,3e0"));
    assert!(header.contains("rel_tol=1e-10"));
    let lines = data_lines(&out);
    assert_eq!(lines[0], "m0,m1,m2,c0,c1,c2,lambda,sum_c,sum_cm2");
    assert!(lines[1].starts_with("1e0,2e0,3e0,1e0,-1.6e0,"));
}

#[test]
fn degenerate_masses_exit_3() {
    let o = pvqed(&["scheme", "--masses", "1,2,2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["response", "--masses", "1,2,3"][..],
        &["response", "--masses", "1,2,3", "--beta", "1", "--temperature", "1"],
        &["response", "--masses", "1,2,3", "--beta", "1", "--q-steps", "0"],
        &["frobnicate"],
        &["scheme", "--masses", "a,b,c"],
    ] {
        assert_eq!(pvqed(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    let o = pvqed(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("response"));
}

#[test]
fn response_writes_csv_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = pvqed(&[
        "response", "--masses", "1,2,3", "--beta", "1", "--q-min", "0", "--q-max", "2", "--q-steps", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines[0], "q,M0,MT,Mtotal,err");
    assert_eq!(lines.len(), 4);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 0.095_464_979_136_4).abs() < 1e-10);
    assert!((first[3] - first[1] - first[2]).abs() < 1e-15);
    // only the target file remains
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn missing_output_directory_exit_5() {
    let o = pvqed(&["scheme", "--masses", "1,2,3", "--out", "/nonexistent-dir/x/table.csv"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn zero_temperature_lagrangian() {
    let o = pvqed(&[
        "lagrangian", "--masses", "1,2,3", "--temperature", "0", "--a-min", "0", "--a-max", "10", "--a-steps", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().contains("beta=inf"));
    let lines = data_lines(&out);
    assert_eq!(lines[0], "a,f0,ft,total,extrapolated");
    assert_eq!(lines[1], "0e0,0e0,0e0,0e0,false");
    assert!(lines[3].ends_with(",true"));
    for l in &lines[1..] {
        assert_eq!(l.split(',').nth(2), Some("0e0"));
    }
}

#[test]
fn density_of_generated_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.csv");
    let grid = make_test_field(&TestField::gaussian_loop(), [12, 12, 12], 0.5).unwrap();
    fs::write(&path, field_to_csv(&grid)).unwrap();
    let o = pvqed(&[
        "density", "--masses", "1,2,3", "--beta", "2", "--field", path.to_str().unwrap(), "--epsilon", "1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("# max_boundary_field="));
    let lines = data_lines(&out);
    assert_eq!(lines[0], "energy,epsilon,scaled_energy,cells_clipped,max_divergence");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[0], row[2]);
    assert_eq!(row[3], "0");

    let tight = pvqed(&[
        "density", "--masses", "1,2,3", "--beta", "2", "--field", path.to_str().unwrap(), "--max-divergence", "1e-12",
    ]);
    assert_eq!(tight.status.code(), Some(3));
}

#[test]
fn malformed_field_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "x,y,z,Bx,By,Bz\n0,0,0,1,2\n").unwrap();
    let o = pvqed(&["density", "--masses", "1,2,3", "--beta", "1", "--field", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = pvqed(&["density", "--masses", "1,2,3", "--beta", "1", "--field", "/no/such/field.csv"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn threads_from_environment() {
    let base = pvqed(&["response", "--masses", "1,2,3", "--beta", "0.5", "--q-max", "3", "--q-steps", "4"]);
    let env = Command::new(env!("CARGO_BIN_EXE_pvqed"))
        .args(["response", "--masses", "1,2,3", "--beta", "0.5", "--q-max", "3", "--q-steps", "4"])
        .env("PVQED_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(base.stdout, env.stdout);
}
