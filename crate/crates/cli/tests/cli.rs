use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dynpat(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynpat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    let runs: [&[&str]; 3] = [
        &["butterfly", "--q-max", "5", "--size-floor", "30"],
        &["labels", "--kind", "cut_project", "--alpha", "13/21"],
        &["edge", "--kind", "cut_project", "--alpha", "13/21", "--cuts", "12", "--size-floor", "40"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = tmp.path().join(format!("{i}-seq"));
        let b = tmp.path().join(format!("{i}-par"));
        let mut seq = args.to_vec();
        seq.extend(["--parallelism", "1"]);
        let mut par = args.to_vec();
        par.extend(["--parallelism", "auto"]);
        assert!(dynpat(&seq, &a).status.success(), "{args:?}");
        assert!(dynpat(&par, &b).status.success(), "{args:?}");
        let (fa, fb) = (files(&a), files(&b));
        assert!(fa.len() >= 2);
        assert_eq!(fa, fb, "{args:?}");
    }
}

#[test]
fn zero_frequency_gives_integer_lattice() {
    let tmp = TempDir::new().unwrap();
    let out = dynpat(&["generate", "--alpha", "0", "--r", "0.3"], tmp.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("pattern.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n1,x"));
    let mut count = 0;
    for line in lines {
        let (n, x) = line.split_once(',').unwrap();
        assert_eq!(x.parse::<f64>().unwrap(), n.parse::<f64>().unwrap());
        count += 1;
    }
    assert_eq!(count, 1000);
}

#[test]
fn oversized_amplitude_is_a_validation_error() {
    let tmp = TempDir::new().unwrap();
    let out = dynpat(&["generate", "--r", "0.5"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!tmp.path().join("pattern.csv").exists());
}

#[test]
fn irrational_frequency_cannot_be_labelled() {
    let tmp = TempDir::new().unwrap();
    let out = dynpat(&["labels", "--alpha", "0.3819660112501051"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn small_sweep_has_two_frequencies() {
    let tmp = TempDir::new().unwrap();
    assert!(dynpat(&["butterfly", "--q-max", "2", "--size-floor", "20"], tmp.path()).status.success());
    let text = std::fs::read_to_string(tmp.path().join("butterfly.csv")).unwrap();
    let mut alphas: Vec<(u64, u64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect();
    alphas.dedup();
    assert_eq!(alphas, vec![(0, 1), (1, 2)]);
}

#[test]
fn config_file_and_flags_combine() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\n[pattern]\nkind = \"example_iii\"\nalpha = [\"1/3\", \"1/2\"]\nwindow = [[0, 4], [0, 5]]\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = dynpat(&["generate", "--config", cfg.to_str().unwrap(), "--r", "0.2"], &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("pattern.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 6);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("generate.json")).unwrap()).unwrap();
    assert_eq!(side["config"]["seed"], 3);
    assert_eq!(side["config"]["pattern"]["r"], 0.2);
    assert_eq!(side["config_hash"].as_str().unwrap().len(), 64);

    std::fs::write(&cfg, "[pattern]\nmystery = 1\n").unwrap();
    let out = dynpat(&["generate", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn self_checks_pass() {
    let tmp = TempDir::new().unwrap();
    let out = dynpat(&["check"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("check.json")).unwrap()).unwrap();
    assert_eq!(report["details"]["passed"], true);
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn default_cut_project_is_sturmian() {
    let tmp = TempDir::new().unwrap();
    assert!(dynpat(&["generate", "--kind", "cut_project"], tmp.path()).status.success());
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let mut x = 0.0;
    for (m, row) in csv_rows(&tmp.path().join("pattern.csv")).iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), m);
        let got: f64 = row[1].parse().unwrap();
        assert!((got - x).abs() < 1e-9, "n={m}: {got} vs {x}");
        let m = m as f64;
        let bit = ((m + 1.0) * alpha).floor() - (m * alpha).floor();
        x += if bit == 1.0 { 0.618 } else { 1.0 };
    }
}

#[test]
fn zero_frequency_row_matches_circulant() {
    let tmp = TempDir::new().unwrap();
    assert!(dynpat(&["butterfly", "--q-max", "2", "--size-floor", "24"], tmp.path()).status.success());
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("butterfly.json")).unwrap()).unwrap();
    let l = side["details"]["sizes"][0][0].as_u64().unwrap() as usize;
    let mut want: Vec<f64> = (0..l)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / l as f64;
            1.0 + (1..=7).map(|m| 2.0 * (-(m as f64)).exp() * (t * m as f64).cos()).sum::<f64>()
        })
        .collect();
    want.sort_by(f64::total_cmp);
    let rows: Vec<Vec<String>> =
        csv_rows(&tmp.path().join("butterfly.csv")).into_iter().filter(|r| r[0] == "0").collect();
    let samples: Vec<&str> = {
        let mut s: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
        s.dedup();
        s
    };
    assert!(!samples.is_empty());
    for s in samples {
        let mut got: Vec<f64> = rows.iter().filter(|r| r[2] == s).map(|r| r[4].parse().unwrap()).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), l);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["labels", "--sweep", "--q-max", "4", "--size-floor", "24", "--seed", "9"];
    assert!(dynpat(&args, &a).status.success());
    assert!(dynpat(&args, &b).status.success());
    assert_eq!(files(&a), files(&b));
}

#[test]
fn single_cut_matches_first_cut_of_bundle() {
    let tmp = TempDir::new().unwrap();
    let (one, many) = (tmp.path().join("one"), tmp.path().join("many"));
    let base = ["edge", "--kind", "example_i", "--alpha", "13/21", "--size-floor", "60"];
    let mut a = base.to_vec();
    a.extend(["--cuts", "1"]);
    let mut b = base.to_vec();
    b.extend(["--cuts", "9"]);
    assert!(dynpat(&a, &one).status.success());
    assert!(dynpat(&b, &many).status.success());
    let first: Vec<Vec<String>> = csv_rows(&many.join("edge.csv")).into_iter().filter(|r| r[0] == "0").collect();
    assert_eq!(csv_rows(&one.join("edge.csv")), first);

    let cov = csv_rows(&many.join("coverage.csv"));
    for pair in cov.windows(2) {
        if pair[0][0] == pair[1][0] {
            assert!(pair[1][3].parse::<f64>().unwrap() >= pair[0][3].parse::<f64>().unwrap());
        }
    }
}
