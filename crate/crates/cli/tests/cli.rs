use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ordkern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordkern"))
        .args(args)
        .env_remove("ORDKERN_THREADS")
        .output()
        .expect("spawn ordkern")
}

fn ok(args: &[&str]) -> String {
    let out = ordkern(args);
    assert!(
        out.status.success(),
        "ordkern {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_small(dir: &Path, classes: usize, nodes: usize, seed: u64) -> PathBuf {
    let out = dir.join("data");
    ok(&[
        "gen",
        "--classes",
        &classes.to_string(),
        "--nodes",
        &nodes.to_string(),
        "--timepoints",
        "60",
        "--seed",
        &seed.to_string(),
        "--out",
        s(&out),
    ]);
    out.join("manifest.csv")
}

fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let n: usize = lines.next().unwrap().trim().parse().unwrap();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), n);
    rows
}

/// Every file under `dir` except the run config, as (relative path, bytes).
fn outputs(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "run_config.json" {
                files.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn gen_writes_one_file_per_graph_and_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let stdout = ok(&[
        "gen",
        "--classes",
        "40",
        "--nodes",
        "20",
        "--timepoints",
        "100",
        "--seed",
        "7",
        "--out",
        s(&a.path().join("d")),
    ]);
    assert!(stdout.contains("80 graphs"), "{stdout}");
    let graphs = fs::read_dir(a.path().join("d/graphs")).unwrap().count();
    assert_eq!(graphs, 80);
    let manifest = fs::read_to_string(a.path().join("d/manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 81);
    assert_eq!(manifest.lines().filter(|l| l.ends_with(",+1")).count(), 40);

    ok(&[
        "gen",
        "--classes",
        "40",
        "--nodes",
        "20",
        "--timepoints",
        "100",
        "--seed",
        "7",
        "--out",
        s(&b.path().join("d")),
    ]);
    assert_eq!(outputs(&a.path().join("d")), outputs(&b.path().join("d")));
}

#[test]
fn gen_rejects_too_few_timepoints_without_writing() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("never");
    let out = ordkern(&[
        "gen",
        "--classes",
        "4",
        "--nodes",
        "8",
        "--timepoints",
        "2",
        "--out",
        s(&target),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error:"), "{stderr}");
    assert!(!target.exists());
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let out = ordkern(&["gram"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = ordkern(&[
        "eval",
        "--manifest",
        "/no/such/manifest.csv",
        "--out",
        "/tmp/x",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(ordkern(&["--help"]).status.success());
}

#[test]
fn dop_gram_is_square_symmetric_and_psd() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 40, 20, 3);
    let out = dir.path().join("gram");
    let stdout = ok(&["gram", "--manifest", s(&manifest), "--out", s(&out)]);
    assert!(stdout.contains("psd=true"), "{stdout}");
    let k = read_matrix(&out.join("gram.txt"));
    assert_eq!(k.len(), 80);
    for (i, row) in k.iter().enumerate() {
        assert_eq!(row.len(), 80);
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, k[j][i]);
        }
    }
    assert!(fs::read_to_string(out.join("psd.txt"))
        .unwrap()
        .contains("psd=true"));
    assert_eq!(
        fs::read_to_string(out.join("gram.libsvm"))
            .unwrap()
            .lines()
            .count(),
        80
    );
    assert!(out.join("gram.ids.csv").exists());
}

#[test]
fn normalized_gram_has_unit_diagonal() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 4, 8, 4);
    let out = dir.path().join("gram");
    ok(&[
        "gram",
        "--manifest",
        s(&manifest),
        "--out",
        s(&out),
        "--normalize",
        "--match-mode",
        "structural",
    ]);
    let k = read_matrix(&out.join("gram.txt"));
    for (i, row) in k.iter().enumerate() {
        assert!((row[i] - 1.0).abs() < 1e-12, "K[{i}][{i}] = {}", row[i]);
    }
}

#[test]
fn exact_gram_reports_diagnostic() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 3, 6, 5);
    let out = dir.path().join("exact");
    let stdout = ok(&[
        "gram",
        "--manifest",
        s(&manifest),
        "--out",
        s(&out),
        "--exact",
        "--depth-cap",
        "3",
    ]);
    assert!(
        stdout.contains("min_eig=") && stdout.contains("psd="),
        "{stdout}"
    );
    assert_eq!(read_matrix(&out.join("gram.txt")).len(), 6);
}

#[test]
fn exhausted_budget_exits_two() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 3, 6, 5);
    let out = ordkern(&[
        "gram",
        "--manifest",
        s(&manifest),
        "--out",
        s(&dir.path().join("g")),
        "--exact",
        "--budget",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn thread_count_does_not_change_gram() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 6, 10, 6);
    let one = dir.path().join("one");
    let many = dir.path().join("many");
    ok(&[
        "--threads",
        "1",
        "gram",
        "--manifest",
        s(&manifest),
        "--out",
        s(&one),
    ]);
    ok(&[
        "--threads",
        "4",
        "gram",
        "--manifest",
        s(&manifest),
        "--out",
        s(&many),
    ]);
    assert_eq!(outputs(&one), outputs(&many));
}

fn eval_args<'a>(manifest: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "eval",
        "--manifest",
        manifest,
        "--out",
        out,
        "--lambdas",
        "0.1,1",
        "--cs",
        "0.1,10",
    ]
}

#[test]
fn eval_report_matches_its_schema() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 5, 8, 9);
    let out = dir.path().join("eval");
    let stdout = ok(&eval_args(s(&manifest), s(&out)));
    assert!(stdout.starts_with("accuracy="), "{stdout}");

    let schema: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("eval_report.schema.json")).unwrap())
            .unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("eval_report.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(&report)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{errors:?}");
    assert_eq!(report["tuning"], "nested");
    assert_eq!(report["per_fold"].as_array().unwrap().len(), 10);
    assert_eq!(
        fs::read_to_string(out.join("folds.csv"))
            .unwrap()
            .lines()
            .count(),
        11
    );

    // a report with a missing field must be rejected
    let mut broken = report.clone();
    broken.as_object_mut().unwrap().remove("accuracy");
    assert!(!validator.is_valid(&broken));
}

#[test]
fn literal_tuning_flag_selects_non_nested_mode() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 4, 8, 10);
    let out = dir.path().join("eval");
    let mut args = eval_args(s(&manifest), s(&out));
    args.push("--paper-literal-tuning");
    ok(&args);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("eval_report.json")).unwrap()).unwrap();
    assert_eq!(report["tuning"], "non_nested");
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run_config.json")).unwrap()).unwrap();
    assert_eq!(config["paper_literal_tuning"], true);
}

#[test]
fn robust_writes_baseline_plus_rate_seed_rows() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 4, 8, 11);
    let out = dir.path().join("robust");
    ok(&[
        "robust",
        "--manifest",
        s(&manifest),
        "--out",
        s(&out),
        "--rates",
        "0,0.25",
        "--seeds",
        "3",
        "--lambdas",
        "1",
        "--cs",
        "1",
    ]);
    let csv = fs::read_to_string(out.join("robustness.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 8, "{csv}");
    assert_eq!(lines[0], "missing_rate,seed,accuracy");
    // rate 0 deletes nothing, so those rows repeat the baseline accuracy
    let baseline = lines[1].rsplit(',').next().unwrap();
    for row in lines.iter().filter(|l| l.starts_with("0,")) {
        assert_eq!(row.rsplit(',').next().unwrap(), baseline, "{csv}");
    }
    assert!(out.join("robustness.json").exists());
}

#[test]
fn mine_lists_top_patterns() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 6, 8, 12);
    let out = dir.path().join("mine");
    ok(&[
        "mine",
        "--manifest",
        s(&manifest),
        "--start-node",
        "0",
        "--out",
        s(&out),
    ]);
    let patterns: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("patterns.json")).unwrap()).unwrap();
    let list = patterns.as_array().unwrap();
    assert_eq!(list.len(), 6);
    let scores: Vec<f64> = list.iter().map(|p| p["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]), "{scores:?}");
    for p in list {
        assert_eq!(p["labels"][0], "ROI_1");
        let diff = (p["freq_a"].as_f64().unwrap() - p["freq_b"].as_f64().unwrap()).abs();
        assert_eq!(diff, p["score"].as_f64().unwrap());
    }
    assert_eq!(
        fs::read_to_string(out.join("patterns.txt"))
            .unwrap()
            .lines()
            .count(),
        6
    );
}

#[test]
fn mine_on_identical_folders_scores_zero() {
    let dir = TempDir::new().unwrap();
    gen_small(dir.path(), 3, 7, 13);
    let graphs = dir.path().join("data/graphs");
    let out = dir.path().join("mine");
    ok(&[
        "mine",
        "--class-a",
        s(&graphs),
        "--class-b",
        s(&graphs),
        "--start-node",
        "2",
        "--out",
        s(&out),
    ]);
    let patterns: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("patterns.json")).unwrap()).unwrap();
    let list = patterns.as_array().unwrap();
    assert!(!list.is_empty());
    assert!(list.iter().all(|p| p["score"].as_f64() == Some(0.0)));
}

#[test]
fn rerun_reproduces_outputs_bit_for_bit() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 4, 8, 14);
    let first = dir.path().join("first");
    ok(&eval_args(s(&manifest), s(&first)));
    let second = dir.path().join("second");
    ok(&[
        "rerun",
        s(&first.join("run_config.json")),
        "--out",
        s(&second),
    ]);
    assert_eq!(outputs(&first), outputs(&second));

    let gen_again = dir.path().join("gen_again");
    ok(&[
        "rerun",
        s(&dir.path().join("data/run_config.json")),
        "--out",
        s(&gen_again),
    ]);
    assert_eq!(outputs(&dir.path().join("data")), outputs(&gen_again));
}

#[test]
fn rerun_rejects_unknown_schema_version() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run_config.json");
    fs::write(&path, r#"{"schema_version": 99, "command": "gen"}"#).unwrap();
    let out = ordkern(&["rerun", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

fn accuracy(report: &Path) -> f64 {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    v["accuracy"].as_f64().unwrap()
}

#[test]
fn planted_accuracy_beats_shuffled_control() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 10, 10, 21);
    let planted = dir.path().join("planted");
    let control = dir.path().join("control");
    let stdout = ok(&eval_args(s(&manifest), s(&planted)));
    assert!(stdout.starts_with("accuracy="), "{stdout}");
    let mut args = eval_args(s(&manifest), s(&control));
    args.extend(["--shuffle-labels", "99"]);
    ok(&args);
    let (a, c) = (
        accuracy(&planted.join("eval_report.json")),
        accuracy(&control.join("eval_report.json")),
    );
    assert!(a >= c, "planted {a} < shuffled {c}");
    assert!(a > 0.5, "planted accuracy {a}");
}

#[test]
fn broken_graph_file_is_named_in_the_error() {
    let dir = TempDir::new().unwrap();
    let manifest = gen_small(dir.path(), 3, 6, 22);
    let broken = dir.path().join("data/graphs/s0001.json");
    fs::write(&broken, "{").unwrap();
    let out = ordkern(&[
        "gram",
        "--manifest",
        s(&manifest),
        "--out",
        s(&dir.path().join("g")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.starts_with("error:") && stderr.contains("s0001.json"),
        "{stderr}"
    );
}
