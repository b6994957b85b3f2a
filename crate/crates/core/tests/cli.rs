use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plaquette-sim"))
}

fn run_in(dir: &std::path::Path, args: &[&str]) -> i32 {
    bin()
        .args(args)
        .arg("--out")
        .arg(dir)
        .status()
        .expect("binary runs")
        .code()
        .unwrap_or(-1)
}

#[test]
fn outputs_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for args in [
        &["mathieu", "--q", "-3:0:4lin", "--count", "5"][..],
        &["circuit", "--CJ", "0.01", "--Vs", "0.2", "--Cs", "0.1"],
        &["updown", "--points", "64", "--periods", "2"],
        &["ground-scan", "--N", "5", "--lg", "0.5,2", "--lm", "0.1,inf"],
    ] {
        assert_eq!(run_in(a.path(), args), 0, "{args:?}");
        assert_eq!(run_in(b.path(), args), 0, "{args:?}");
    }
    for stem in ["mathieu", "circuit", "updown", "ground_scan"] {
        let x = fs::read(a.path().join(format!("{stem}.csv"))).unwrap();
        let y = fs::read(b.path().join(format!("{stem}.csv"))).unwrap();
        assert_eq!(x, y, "{stem}.csv differs between runs");
        assert!(!x.contains(&b'\r'));
        let meta: serde_json::Value =
            serde_json::from_slice(&fs::read(a.path().join(format!("{stem}.json"))).unwrap()).unwrap();
        assert_eq!(meta["schema_version"], 1);
        assert_eq!(meta["data_file"], format!("{stem}.csv"));
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["ground-scan", "--N", "5", "--lg", "0.3,1,3", "--lm", "0.2"];
    for (dir, w) in [(&a, "1"), (&b, "3")] {
        let st = bin().env("PLAQUETTE_WORKERS", w).args(args).arg("--out").arg(dir.path()).status().unwrap();
        assert!(st.success());
    }
    assert_eq!(
        fs::read(a.path().join("ground_scan.csv")).unwrap(),
        fs::read(b.path().join("ground_scan.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run_in(d.path(), &["quench", "--m", "1", "--Cm", "1"]), 1);
    assert_eq!(run_in(d.path(), &["spectrum-compare", "--N", "4"]), 1);
    assert_eq!(run_in(d.path(), &["mathieu", "--bogus", "1"]), 1);
    assert_eq!(run_in(d.path(), &["ground-scan", "--lg", "1:2"]), 1);
    // a bound below rounding level falls back to the rounding floor
    let ok = tempfile::tempdir().unwrap();
    assert_eq!(run_in(ok.path(), &["ground-scan", "--N", "5", "--lg", "1", "--lm", "0.5", "--tol", "0"]), 0);
    let cfg = d.path().join("bad.cfg");
    fs::write(&cfg, "count = 3\nnot a setting\n").unwrap();
    assert_eq!(run_in(d.path(), &["mathieu", "--config", cfg.to_str().unwrap()]), 1);
    assert!(fs::read_dir(d.path()).unwrap().all(|e| e.unwrap().path() == cfg));
}

#[test]
fn config_file_and_flags_layer() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("m.cfg");
    fs::write(&cfg, "# test\ncount = 3\ncutoff = 30\n").unwrap();
    let out = bin()
        .args(["mathieu", "--config", cfg.to_str().unwrap(), "--cutoff", "40", "--dump-config"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("count = 3\n") && text.contains("cutoff = 40\n"));
}
