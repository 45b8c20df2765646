use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn beamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamsim")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = beamsim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

fn same_csvs(a: &Path, b: &Path) {
    let names = csv_files(a);
    assert!(!names.is_empty());
    assert_eq!(names, csv_files(b));
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n} differs");
    }
}

#[test]
fn single_set_sweep_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["sweep", "--scheme", "qrs", "--set", "QAM16-QAM16", "--snr", "0:24:1", "--seed", "7", "--out", out]);
    let text = fs::read_to_string(dir.path().join("qrs_QAM16-QAM16.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,set,snr_db,channel_uses,bits_sent,bit_errors,ber"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    let mut last_snr = f64::NEG_INFINITY;
    for r in &rows {
        assert_eq!(r[0], "qrs");
        assert_eq!(r[1], "QAM16-QAM16");
        let snr: f64 = r[2].parse().unwrap();
        assert!(snr > last_snr);
        last_snr = snr;
        let uses: u64 = r[3].parse().unwrap();
        let bits: u64 = r[4].parse().unwrap();
        let errors: u64 = r[5].parse().unwrap();
        let ber: f64 = r[6].parse().unwrap();
        assert_eq!(bits, 8 * uses);
        assert!(errors >= 50 || uses == 100_000, "fast budget stopping rule: {r:?}");
        let exact = errors as f64 / bits as f64;
        assert!((ber - exact).abs() <= 5e-6 * exact, "{ber} vs {exact}");
    }
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn repeated_and_replayed_sweeps_are_byte_identical() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = |dir: &Path| {
        ["sweep", "--scheme", "svd", "--set", "ALL", "--snr", "0:20:5", "--seed", "11", "--out", dir.to_str().unwrap()]
            .map(String::from)
    };
    let run = |dir: &Path| ok(&args(dir).iter().map(String::as_str).collect::<Vec<_>>());
    run(a.path());
    run(b.path());
    same_csvs(a.path(), b.path());

    let manifest = a.path().join("manifest.txt");
    ok(&["sweep", "--from-manifest", manifest.to_str().unwrap(), "--out", c.path().to_str().unwrap()]);
    same_csvs(a.path(), c.path());
    let text = fs::read_to_string(c.path().join("manifest.txt")).unwrap();
    for line in ["command=sweep", "scheme=svd", "set=ALL", "snr=0:20:5", "seed=11", "budget=fast"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
}

#[test]
fn all_sets_give_one_csv_per_catalog_entry() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep", "--scheme", "svd", "--set", "ALL", "--snr", "10:12:2", "--out", dir.path().to_str().unwrap()]);
    let mut expected =
        vec!["svd_QAM16-QAM16.csv", "svd_QAM16-QPSK-QPSK.csv", "svd_QAM64-QPSK.csv", "svd_QAM8-QAM8-QPSK.csv"];
    expected.sort();
    assert_eq!(csv_files(dir.path()), expected);
}

#[test]
fn result_does_not_depend_on_worker_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        ok(&[
            "sweep",
            "--scheme",
            "qrs",
            "--snr",
            "6:18:6",
            "--workers",
            workers,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
    }
    same_csvs(a.path(), b.path());
}

#[test]
fn unknown_set_is_a_usage_error_listing_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = beamsim(&["sweep", "--scheme", "qrs", "--set", "QAM64-QPSK", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for set in ["QAM16-QAM16", "QAM16-QPSK-QPSK", "QAM8-QAM8-QPSK", "QPSK-QPSK-QPSK-QPSK"] {
        assert!(err.contains(set), "{err}");
    }
}

#[test]
fn malformed_flags_are_usage_errors() {
    for args in [
        &["sweep", "--scheme", "mmse"][..],
        &["sweep", "--scheme", "svd", "--snr", "0:24"],
        &["sweep", "--scheme", "svd", "--snr", "10:0:1"],
        &["compare", "--budget", "huge"],
        &["sweep", "--scheme", "svd", "--workers", "0"],
    ] {
        assert_eq!(beamsim(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = beamsim(&["sweep", "--scheme", "svd", "--snr", "0:0:1", "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_smoke_run_populates_every_summary_entry() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["compare", "--snr", "0:24:6", "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("quantity,value_db,detail"));
    let quantities: Vec<&str> = lines
        .map(|l| {
            let f: Vec<&str> = l.splitn(3, ',').collect();
            assert!(f[1] == "not bracketed" || f[1].parse::<f64>().is_ok(), "{l}");
            f[0]
        })
        .collect();
    for q in [
        "snr_svd_best_fixed",
        "snr_qrs_best_fixed",
        "snr_svd_selection",
        "snr_qrs_selection",
        "snr_svd_envelope",
        "snr_qrs_envelope",
        "gap_fixed",
        "gap_selection",
        "gain_svd_selection",
        "gain_qrs_selection",
    ] {
        assert!(quantities.contains(&q), "{q} missing");
        assert!(stdout.contains(q));
    }
    for f in [
        "svd_best_fixed.csv",
        "qrs_best_fixed.csv",
        "svd_envelope.csv",
        "qrs_envelope.csv",
        "svd_selection.csv",
        "qrs_selection.csv",
        "qrs_QPSK-QPSK-QPSK-QPSK.csv",
        "manifest.txt",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let selection = fs::read_to_string(dir.path().join("svd_selection.csv")).unwrap();
    assert_eq!(selection.lines().count(), 6);
    assert!(selection.lines().skip(1).all(|l| l.starts_with("svd,SELECT,")));
}

#[test]
fn compare_replays_from_its_manifest() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    ok(&[
        "compare",
        "--snr",
        "4:16:4",
        "--seed",
        "3",
        "--selection",
        "expected-errors",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    let manifest = a.path().join("manifest.txt");
    ok(&["compare", "--from-manifest", manifest.to_str().unwrap(), "--out", b.path().to_str().unwrap()]);
    same_csvs(a.path(), b.path());
}

#[test]
fn selftest_passes_and_reports_defects() {
    let out = ok(&["selftest"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 5, "{stdout}");
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{stdout}");
    assert!(stdout.contains("max unitarity defect"));
    assert!(stdout.contains("negative control: perturbed diagonal rejected"));
}
