use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use abcboost::{load_csv, load_model, CsvOptions};
use abcboost_core::predict_scores;

fn abcboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcboost"))
        .args(args)
        .env_remove("ABCBOOST_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Three-class CSV with a header, `n` rows.
fn write_blobs(dir: &Path, name: &str, n: usize, k: usize, offset: usize) -> PathBuf {
    let mut text = String::from("label,a,b,c\n");
    for i in offset..offset + n {
        let class = i % k;
        let jitter = ((i * 7919) % 97) as f64 / 97.0;
        text.push_str(&format!(
            "{class},{},{},{}\n",
            class as f64 + jitter,
            ((i * 31) % 11) as f64 + class as f64 * 0.5,
            jitter * 3.0 - class as f64
        ));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

struct Fixture {
    dir: tempfile::TempDir,
    train: PathBuf,
    test: PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let train = write_blobs(dir.path(), "train.csv", 90, 3, 0);
    let test = write_blobs(dir.path(), "test.csv", 60, 3, 1000);
    Fixture { dir, train, test }
}

fn train_args<'a>(f: &'a Fixture, algo: &'a str, model: &'a Path) -> Vec<&'a str> {
    vec![
        "train",
        "--algo",
        algo,
        "--train",
        p(&f.train),
        "--test",
        p(&f.test),
        "-J",
        "4",
        "--nu",
        "0.1",
        "-M",
        "15",
        "--model",
        p(model),
    ]
}

#[test]
fn train_writes_model_manifest_and_curve() {
    let f = fixture();
    let model = f.dir.path().join("m.model");
    let curve = f.dir.path().join("curve.csv");
    let mut args = train_args(&f, "abc-logitboost", &model);
    args.extend(["--curve", p(&curve)]);
    let out = abcboost(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("iterations 15"));
    assert!(text.lines().any(|l| l.starts_with("test_errors ")));

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(f.dir.path().join("m.model.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["algorithm"], "abc-logitboost");
    assert_eq!(manifest["max_leaves"], 4);
    assert_eq!(manifest["iterations_completed"], 15);
    assert_eq!(manifest["model"]["sha256"].as_str().unwrap().len(), 64);

    let curve_text = fs::read_to_string(&curve).unwrap();
    let mut lines = curve_text.lines();
    assert_eq!(lines.next(), Some("iteration,train_loss,test_errors"));
    assert_eq!(lines.count(), 15);

    let eval = abcboost(&["evaluate", "--model", p(&model), "--data", p(&f.test)]);
    assert_eq!(eval.status.code(), Some(0));
    let last_curve = curve_text
        .lines()
        .last()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .to_string();
    assert!(stdout(&eval).contains(&format!("test_errors {last_curve}\n")));
    assert!(stdout(&eval).contains("test_rows 60\n"));
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let f = fixture();
    let model = f.dir.path().join("m.model");
    // Missing --model.
    let out = abcboost(&["train", "--algo", "mart", "--train", p(&f.train), "-M", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    // abc on two classes.
    let binary = write_blobs(f.dir.path(), "binary.csv", 20, 2, 0);
    let out = abcboost(&[
        "train",
        "--algo",
        "abc-mart",
        "--train",
        p(&binary),
        "-M",
        "3",
        "--model",
        p(&model),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("K >= 3"));
    assert!(!model.exists());

    // Invalid parameters.
    for bad in [["-J", "1"], ["--nu", "0"], ["--zmax", "9"]] {
        let mut args = train_args(&f, "mart", &model);
        args.extend(bad);
        assert_eq!(abcboost(&args).status.code(), Some(2), "{bad:?}");
    }
    // --curve without --test.
    let curve = f.dir.path().join("c.csv");
    let out = abcboost(&[
        "train",
        "--algo",
        "mart",
        "--train",
        p(&f.train),
        "-M",
        "2",
        "--model",
        p(&model),
        "--curve",
        p(&curve),
    ]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(
        abcboost(&["compare", "--errors", "1001", "0", "--n", "1000"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(abcboost(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        abcboost(&[
            "--threads",
            "0",
            "compare",
            "--errors",
            "1",
            "1",
            "--n",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn runtime_errors_exit_1() {
    let f = fixture();
    let missing = f.dir.path().join("nope.csv");
    let model = f.dir.path().join("m.model");
    let out = abcboost(&[
        "train",
        "--algo",
        "mart",
        "--train",
        p(&missing),
        "-M",
        "2",
        "--model",
        p(&model),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let garbage = f.dir.path().join("garbage.model");
    fs::write(&garbage, "not a model\n").unwrap();
    let out = abcboost(&["evaluate", "--model", p(&garbage), "--data", p(&f.test)]);
    assert_eq!(out.status.code(), Some(1));

    let broken = f.dir.path().join("broken.csv");
    fs::write(&broken, "label,a\n0,1\n1,x\n").unwrap();
    let out = abcboost(&[
        "train",
        "--algo",
        "mart",
        "--train",
        p(&broken),
        "-M",
        "2",
        "--model",
        p(&model),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn predict_matches_in_process_scores() {
    let f = fixture();
    let model = f.dir.path().join("m.model");
    assert_eq!(
        abcboost(&train_args(&f, "mart", &model)).status.code(),
        Some(0)
    );
    let preds = f.dir.path().join("preds.csv");
    let out = abcboost(&[
        "predict",
        "--model",
        p(&model),
        "--data",
        p(&f.test),
        "--out",
        p(&preds),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let loaded = load_model(&model).unwrap();
    let data = load_csv(&f.test, CsvOptions::default()).unwrap();
    let text = fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("row,predicted_class,score_0,score_1,score_2")
    );
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], i.to_string());
        let scores = predict_scores(&loaded, data.row(i)).unwrap();
        for (s, field) in scores.iter().zip(&fields[2..]) {
            assert_eq!(field.parse::<f64>().unwrap().to_bits(), s.to_bits());
        }
        assert_eq!(fields[1], abcboost_core::boost::argmax(&scores).to_string());
    }

    // Wrong dimensionality.
    let narrow = f.dir.path().join("narrow.csv");
    fs::write(&narrow, "label,a\n0,1\n1,2\n").unwrap();
    let out = abcboost(&[
        "predict",
        "--model",
        p(&model),
        "--data",
        p(&narrow),
        "--out",
        p(&preds),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_model_predicts_class_zero() {
    let f = fixture();
    let model = f.dir.path().join("empty.model");
    let out = abcboost(&[
        "train",
        "--algo",
        "logitboost",
        "--train",
        p(&f.train),
        "-M",
        "0",
        "--model",
        p(&model),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let preds = f.dir.path().join("preds.csv");
    assert_eq!(
        abcboost(&[
            "predict",
            "--model",
            p(&model),
            "--data",
            p(&f.test),
            "--out",
            p(&preds)
        ])
        .status
        .code(),
        Some(0)
    );
    let text = fs::read_to_string(&preds).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "0");
        assert!(fields[2..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let f = fixture();
    for algo in [
        "mart",
        "abc-mart",
        "logitboost",
        "abc-logitboost",
        "classic-logitboost",
    ] {
        let one = f.dir.path().join(format!("{algo}-1.model"));
        let four = f.dir.path().join(format!("{algo}-4.model"));
        let mut a = vec!["--threads", "1"];
        a.extend(train_args(&f, algo, &one));
        let mut b = vec!["--threads", "4"];
        b.extend(train_args(&f, algo, &four));
        let (oa, ob) = (abcboost(&a), abcboost(&b));
        assert_eq!(oa.status.code(), Some(0));
        assert_eq!(stdout(&oa), stdout(&ob));
        assert_eq!(fs::read(&one).unwrap(), fs::read(&four).unwrap(), "{algo}");
    }
}

#[test]
fn split_is_deterministic() {
    let f = fixture();
    let data = write_blobs(f.dir.path(), "ten.csv", 10, 3, 0);
    let run = |tag: &str, seed: &str| {
        let a = f.dir.path().join(format!("{tag}-a.csv"));
        let b = f.dir.path().join(format!("{tag}-b.csv"));
        let m = f.dir.path().join(format!("{tag}.idx"));
        let out = abcboost(&[
            "split",
            "--data",
            p(&data),
            "--seed",
            seed,
            "--out-a",
            p(&a),
            "--out-b",
            p(&b),
            "--manifest",
            p(&m),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out), "a 5\nb 5\n");
        (
            fs::read_to_string(a).unwrap(),
            fs::read_to_string(b).unwrap(),
            fs::read_to_string(m).unwrap(),
        )
    };
    let first = run("x", "42");
    let second = run("y", "42");
    assert_eq!(first.0, second.0);
    assert_eq!(first.1, second.1);
    assert_ne!(first.0, run("z", "43").0);
    // Both halves keep the header and together hold every record once.
    let source = fs::read_to_string(&data).unwrap();
    let mut rows: Vec<&str> = first
        .0
        .lines()
        .skip(1)
        .chain(first.1.lines().skip(1))
        .collect();
    let mut want: Vec<&str> = source.lines().skip(1).collect();
    rows.sort_unstable();
    want.sort_unstable();
    assert_eq!(rows, want);
    assert!(first.0.starts_with("label,a,b,c\n") && first.1.starts_with("label,a,b,c\n"));
    assert!(first.2.contains("partition a 5"));
}

#[test]
fn compare_prints_p_values() {
    let out = abcboost(&["compare", "--errors", "2815", "2440", "--n", "60000"]);
    assert_eq!(out.status.code(), Some(0));
    let p: f64 = stdout(&out).trim().parse().unwrap();
    assert!(p > 5e-8 / 3.0 && p < 1.5e-7, "{p}");
    assert_eq!(
        stdout(&abcboost(&[
            "compare", "--errors", "100", "100", "--n", "1000"
        ]))
        .trim(),
        "5.000e-1"
    );
}
