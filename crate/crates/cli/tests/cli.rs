use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use casiga_cli::format::{read_patch, TABLE_HEADER};
use casiga_cli::RunConfig;

fn casiga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casiga")).args(args).output().unwrap()
}

fn table(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TABLE_HEADER));
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn column(rows: &[Vec<String>], index: usize) -> Vec<f64> {
    rows.iter().map(|r| r[index].parse().unwrap()).collect()
}

#[test]
fn plate_errors_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = casiga(&["run", "benchmark=plate", "technology=cas1", "quad=2", "levels=4", &format!("out={out}")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&dir.path().join("plate_hole_cas1_q2.csv"));
    assert_eq!(rows.len(), 4);
    for index in [4, 5] {
        let e = column(&rows, index);
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    }
    assert!(rows.iter().all(|r| r[3].is_empty()));
    let vtk = fs::read_to_string(dir.path().join("plate_hole_cas1_q2_level4.vtk")).unwrap();
    assert!(vtk.contains("DIMENSIONS 65 65 1\nPOINTS 4225 double\n"));
    let patch = read_patch(&fs::read_to_string(dir.path().join("plate_hole_cas1_q2_level4.patch")).unwrap()).unwrap();
    assert_eq!(patch.element_counts(), [16, 16, 1]);
}

#[test]
fn cook_cs_tip_displacement_grows_below_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = casiga(&["run", "--benchmark", "cook", "--technology", "cs", "--levels", "4", "--samples", "0", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let qoi = column(&table(&dir.path().join("cook_cs_q3.csv")), 3);
    assert!(qoi.windows(2).all(|w| w[1] > w[0]) && qoi.iter().all(|&v| v < 8.075), "{qoi:?}");
    assert!(!dir.path().join("cook_cs_q3_level4.vtk").exists());
}

#[test]
fn invalid_config_exits_nonzero_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = format!("out={}", dir.path().join("never").display());
    for args in [
        vec!["run", "benchmark=cook", "technology=q4", &out],
        vec!["run", "benchmark=cook", "quad=5", &out],
        vec!["run", "technology=cs", &out],
        vec!["run", "benchmark=cook", "levels=nine", &out],
    ] {
        let o = casiga(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));
    }
    assert!(!dir.path().join("never").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let o = casiga(&["run", "benchmark=cook", "technology=cas2", "levels=3", &format!("out={}", d.path().display())]);
        assert!(o.status.success());
    }
    for name in ["cook_cas2_q3.csv", "cook_cas2_q3_level3.vtk", "cook_cas2_q3_level3.patch"] {
        assert_eq!(fs::read(dirs[0].path().join(name)).unwrap(), fs::read(dirs[1].path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn config_file_then_pairs_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    fs::write(&cfg, format!("# cook run\nbenchmark=cook\ntechnology=cs\nlevels=2\nsamples=1\nout={}\n", out.display())).unwrap();
    let o = casiga(&["run", "--config", cfg.to_str().unwrap(), "technology=cas1", "levels=1", "--levels", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written: RunConfig = fs::read_to_string(out.join("cook_cas1_q3.cfg")).unwrap().parse().unwrap();
    assert_eq!(written.levels, 2);
    assert_eq!(written.samples_per_element, 1);
    assert_eq!(written.out_dir, out);
}

#[test]
fn patch_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("block.patch");
    let o = casiga(&["patch", "block", "3", "-o", file.to_str().unwrap()]);
    assert!(o.status.success());
    let o = casiga(&["inspect", file.to_str().unwrap()]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("dim 3") && stdout.contains("elements 3 x 3 x 3") && stdout.contains("control points 125"), "{stdout}");
    fs::write(&file, "casiga-patch 1\ndim 4\n").unwrap();
    let o = casiga(&["inspect", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
