use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse-lab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("COARSE_LAB_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn cfs_exit_code_follows_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let g13 = data("gamma13.txt");
    let o = run(dir.path(), &["cfs", "--graph", g13.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lambda_vertices=56"));
    assert!(dir.path().join("cfs.txt").exists());

    let pent = dir.path().join("pent.txt");
    std::fs::write(&pent, "vertices: p q r s t\np q\nq r\nr s\ns t\nt p\n").unwrap();
    let o = run(dir.path(), &["cfs", "--graph", pent.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("CFS=false"));
}

#[test]
fn wordlen_reduces() {
    let dir = tempfile::tempdir().unwrap();
    let free3 = data("free3.txt");
    let o = run(dir.path(), &["wordlen", "--graph", free3.to_str().unwrap(), "--word", "s t t u"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("length=2"));
    let o = run(dir.path(), &["wordlen", "--graph", free3.to_str().unwrap(), "--word", "s t t u", "--artin"]);
    assert!(stdout(&o).contains("length=4"));
}

#[test]
fn ball_sizes_of_the_square_group() {
    let dir = tempfile::tempdir().unwrap();
    let sq = data("square.txt");
    let o = run(dir.path(), &["ball", "--graph", sq.to_str().unwrap(), "--radius", "3"]);
    assert_eq!(o.status.code(), Some(0));
    // D_inf x D_inf: spheres 1, 4, 8, 12
    assert!(stdout(&o).contains("size=25"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let free3 = data("free3.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["wordlen", "--graph", free3.to_str().unwrap(), "--word", "s z"],
        vec!["ball", "--graph", "/does/not/exist", "--radius", "2"],
        vec!["ray-verify", "--space", "plane", "--ray", "/does/not/exist.csv"],
        vec!["sbe", "--space", free3.to_str().unwrap(), "--gen", "1,1"],
        vec!["no-such-command"],
    ];
    for args in cases {
        let o = run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn walk_writes_per_seed_tables() {
    let dir = tempfile::tempdir().unwrap();
    let free3 = data("free3.txt");
    let o = run(dir.path(), &["walk", "--graph", free3.to_str().unwrap(), "--steps", "4000", "--seeds", "1..3"]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["walk.txt", "walk_trials.csv", "walk_seed1.csv", "walk_seed2.csv", "walk_seed3.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let trials = std::fs::read_to_string(dir.path().join("walk_trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 4);
}

#[test]
fn sbe_generation_and_inversion() {
    let dir = tempfile::tempdir().unwrap();
    let free3 = data("free3.txt");
    let o = run(
        dir.path(),
        &["sbe", "--space", free3.to_str().unwrap(), "--gen", "3,1,log:1,0", "--radius", "64", "--verify", "--invert"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
