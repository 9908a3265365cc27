//! CLI behavior: exit codes, config-file fallback, edge cases.

use std::path::Path;

fn run(args: &[&str]) -> i32 {
    let argv = std::iter::once("ridemind").chain(args.iter().copied());
    ridemind::cli::run(argv)
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

const HEADER: &str =
    "participant_id,ride,event,contributor,a_R,a_O,alignment,intention,q1,q2,q3,q4,q5,q6,q7,q8\n";

#[test]
fn unknown_subcommand_and_flags_exit_2() {
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["synth", "--no-such-flag"]), 2);
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn validation_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, format!("{HEADER}P1,1,1,O,,O_PLUS,,,9,5,5,5,5,5,5,6\n")).unwrap();
    let out = path_str(dir.path(), "model.json");
    assert_eq!(run(&["learn", "--data", bad.to_str().unwrap(), "--out", &out]), 1);

    let missing = path_str(dir.path(), "nope.csv");
    assert_eq!(run(&["learn", "--data", &missing, "--out", &out]), 1);
}

#[test]
fn learn_on_empty_dataset_yields_uniform_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("empty.csv");
    std::fs::write(&data, HEADER).unwrap();
    let out = dir.path().join("model.json");
    assert_eq!(
        run(&[
            "--no-timestamp",
            "learn",
            "--data",
            data.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--alpha",
            "1.0",
        ]),
        0
    );
    let model = ridemind::model_io::load_model(&out).unwrap();
    for contributor in [ridemind::Contributor::R, ridemind::Contributor::O] {
        for cpd in model.regime(contributor).cpds() {
            let expect = 1.0 / cpd.child().cardinality as f64;
            assert!(cpd.values_parent_major().iter().all(|v| *v == expect));
        }
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{ "synth": { "participants": 7, "events": 4, "seed": 3 } }"#,
    )
    .unwrap();
    let out_a = dir.path().join("a.csv");
    assert_eq!(
        run(&[
            "--no-timestamp",
            "--config",
            config.to_str().unwrap(),
            "synth",
            "--out",
            out_a.to_str().unwrap(),
        ]),
        0
    );
    let data = ridemind::data::parse_event_log_path(&out_a, ridemind::BinConfig::default()).unwrap();
    assert_eq!(data.sequences.len(), 7);

    // An explicit flag overrides the config value.
    let out_b = dir.path().join("b.csv");
    assert_eq!(
        run(&[
            "--no-timestamp",
            "--config",
            config.to_str().unwrap(),
            "synth",
            "--out",
            out_b.to_str().unwrap(),
            "--participants",
            "2",
        ]),
        0
    );
    let data = ridemind::data::parse_event_log_path(&out_b, ridemind::BinConfig::default()).unwrap();
    assert_eq!(data.sequences.len(), 2);
}

#[test]
fn subcommands_do_not_mutate_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = path_str(dir.path(), "data.csv");
    assert_eq!(
        run(&["--no-timestamp", "synth", "--out", &data, "--participants", "6", "--events", "4", "--seed", "1"]),
        0
    );
    let before = std::fs::read(&data).unwrap();

    let model = path_str(dir.path(), "model.json");
    assert_eq!(run(&["--no-timestamp", "learn", "--data", &data, "--out", &model]), 0);
    let report = path_str(dir.path(), "report.json");
    assert_eq!(
        run(&[
            "--no-timestamp", "eval", "--data", &data, "--out", &report,
            "--folds", "2", "--iterations", "1",
        ]),
        0
    );
    let model_before = std::fs::read(&model).unwrap();
    let trace = path_str(dir.path(), "trace.csv");
    assert_eq!(
        run(&["--no-timestamp", "filter", "--model", &model, "--data", &data, "--out", &trace]),
        0
    );
    assert_eq!(std::fs::read(&data).unwrap(), before);
    assert_eq!(std::fs::read(&model).unwrap(), model_before);
}

#[test]
fn out_dir_override_applies_to_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    // The env override is process-global; run the affected command in a
    // dedicated scope and clean up afterward.
    std::env::set_var("RIDEMIND_OUT_DIR", dir.path());
    let code = run(&[
        "--no-timestamp",
        "simulate",
        "--out",
        "relative-trajectory.csv",
        "--events",
        "3",
        "--action",
        "R_PLUS",
    ]);
    std::env::remove_var("RIDEMIND_OUT_DIR");
    assert_eq!(code, 0);
    assert!(dir.path().join("relative-trajectory.csv").exists());
}

#[test]
fn policy_rejects_bad_evidence_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "policy.json");
    assert_eq!(
        run(&["policy", "--out", &out, "--evidence", "bogus=3"]),
        2
    );
    assert_eq!(
        run(&["policy", "--out", &out, "--evidence", "w_prev=9"]),
        1
    );
}
