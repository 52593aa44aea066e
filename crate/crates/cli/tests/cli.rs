//! End-to-end runs of the `holab` binary on a tiny scenario.

use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
num_sites = 1
ues_per_sector = 1
num_runs = 2
sim_duration = 4
epochs = 2
batch_size = 4
";

fn holab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn tiny_config(dir: &Path) -> String {
    let p = dir.join("tiny.conf");
    std::fs::write(&p, TINY).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn eval_without_models_names_missing_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let o = holab(dir.path(), &["eval"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lstm.holab"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "num_runs = 2\nlearning_speed = 3\n").unwrap();
    let o = holab(
        dir.path(),
        &["campaign", "run", "--config", bad.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learning_speed") && stderr(&o).contains("file_size"));

    assert_eq!(
        holab(dir.path(), &["campaign", "fly"]).status.code(),
        Some(1)
    );
    assert_eq!(
        holab(dir.path(), &["train", "lstm", "--hidden", "4,x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(holab(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn campaign_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let conf = tiny_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = holab(d, &["campaign", "run", "--seed", "7", "--config", &conf]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let read = |d: &Path| std::fs::read(d.join("campaign.hods")).unwrap();
    assert_eq!(read(&a), read(&b));
    let o = holab(&a, &["campaign", "run", "--seed", "8", "--config", &conf]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(read(&a), read(&b));
}

#[test]
fn full_pipeline_on_tiny_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let conf = tiny_config(out);
    let steps: &[&[&str]] = &[
        &["scenario", "rem", "--resolution", "100"],
        &["campaign", "run"],
        &["dataset", "build"],
        &["dataset", "build", "--format", "csv"],
        &["train", "lstm", "--hidden", "4"],
        &["train", "ae", "--cw", "3"],
        &["train", "mlp", "--hidden", "5"],
        &["eval"],
        &["eval-cross", "--obstacle-seed", "5"],
        &["search", "--model", "mlp"],
    ];
    for step in steps {
        let mut args = step.to_vec();
        args.extend(["--config", conf.as_str()]);
        let o = holab(out, &args);
        assert_eq!(o.status.code(), Some(0), "{step:?}: {}", stderr(&o));
    }
    for f in [
        "rem.txt",
        "campaign.hods",
        "dataset.hods",
        "dataset.csv",
        "lstm.holab",
        "lstm_loss.csv",
        "ae.holab",
        "mlp.holab",
        "eval_report.txt",
        "eval_report.csv",
        "cross_report.csv",
        "search_mlp.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    // 3 UEs x 8 ranks x 2 runs forced, plus 3 benchmark traces per run.
    let campaign = holab_core::dataset::load_dataset(
        &out.join("campaign.hods"),
        holab_core::dataset::Format::Binary,
    )
    .unwrap();
    assert_eq!(campaign.len(), 2 * (24 + 3));
    let csv = std::fs::read_to_string(out.join("dataset.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.ends_with("window,label,run_id,ue_id,rank,target_cell"));
    // One row per window of each forced sequence.
    assert_eq!(csv.lines().count(), 1 + 2 * 24 * 20);
    let loss = std::fs::read_to_string(out.join("lstm_loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 3);
    assert!(loss.starts_with("epoch,train_mse,val_mse"));
    let report = std::fs::read_to_string(out.join("eval_report.txt")).unwrap();
    assert!(report.contains("evaluation run 3"), "{report}");
}
