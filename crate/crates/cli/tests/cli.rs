//! Behavioral tests for the command-line surface: help text, exit
//! codes, error reporting, and flag/file precedence.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_secondfft"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn make_corpus(dir: &Path, clips: usize, duration_s: f64) {
    let out = run(&[
        "synth-corpus",
        "--out",
        dir.to_str().unwrap(),
        "--classes",
        "2",
        "--clips",
        &clips.to_string(),
        "--seed",
        "5",
        "--duration-s",
        &duration_s.to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn help_lists_every_flag_with_its_default() {
    for sub in [
        "extract",
        "train",
        "classify",
        "evaluate",
        "learning-curve",
        "noise-sweep",
        "synth-corpus",
    ] {
        let out = run(&[sub, "--help"]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert!(
            text.contains("default"),
            "{sub} --help shows no defaults:\n{text}"
        );
        // Spot checks per subcommand.
        match sub {
            "extract" | "evaluate" | "learning-curve" | "noise-sweep" => {
                assert!(text.contains("--seed"), "{sub} help misses --seed");
                assert!(text.contains("--jobs"), "{sub} help misses --jobs");
                assert!(text.contains("default: 0.1"), "{sub} help misses window default");
            }
            "train" => assert!(text.contains("--dim")),
            "classify" => assert!(text.contains("--model")),
            "synth-corpus" => assert!(text.contains("default: 50")),
            _ => {}
        }
    }
}

#[test]
fn unknown_flags_exit_with_usage_error() {
    let out = run(&["evaluate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extract_train_classify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    make_corpus(&corpus, 5, 2.0);

    let features = dir.path().join("features.csv");
    let out = run(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&features).unwrap();
    assert!(text.starts_with("# feature_config "));
    assert!(text.lines().nth(1).unwrap().starts_with("clip_id,label,v_0"));

    let model = dir.path().join("model.srcm");
    let out = run(&[
        "train",
        "--features",
        features.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--dim",
        "35",
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let clip = corpus.join("am4hz").join("clip002.wav");
    let preds = dir.path().join("preds.csv");
    let out = run(&[
        "classify",
        "--model",
        model.to_str().unwrap(),
        "--input",
        clip.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("am4hz"), "{}", stdout(&out));
    let preds_text = std::fs::read_to_string(&preds).unwrap();
    assert!(preds_text.starts_with("clip_id,predicted,margin,residual_am2hz,residual_am4hz"));
    assert!(preds_text.lines().nth(1).unwrap().contains(",am4hz,"));
}

#[test]
fn classify_names_the_offending_clip_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    make_corpus(&corpus, 5, 2.0);
    let features = dir.path().join("features.csv");
    let model = dir.path().join("model.srcm");
    assert!(run(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "train",
        "--features",
        features.to_str().unwrap(),
        "--out",
        model.to_str().unwrap()
    ])
    .status
    .success());

    // 0.2 s yields too few analysis frames to form a feature.
    let short = dir.path().join("short.wav");
    let clip = secondfft::audio::synth_clip(
        secondfft::audio::SynthKind::PureTone { freq_hz: 300.0 },
        0.2,
        8000,
        0,
    )
    .unwrap();
    secondfft::audio::write_wav(&clip, &short).unwrap();

    let out = run(&[
        "classify",
        "--model",
        model.to_str().unwrap(),
        "--input",
        short.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: "), "stderr: {err}");
    assert_eq!(err.trim().lines().count(), 1, "error must be one line: {err}");
    assert!(err.contains("short.wav"), "error must name the clip: {err}");
}

#[test]
fn classify_rejects_mismatched_feature_config() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    make_corpus(&corpus, 5, 2.0);
    let features = dir.path().join("features.csv");
    let model = dir.path().join("model.srcm");
    assert!(run(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "train",
        "--features",
        features.to_str().unwrap(),
        "--out",
        model.to_str().unwrap()
    ])
    .status
    .success());

    let out = run(&[
        "classify",
        "--model",
        model.to_str().unwrap(),
        "--input",
        corpus.join("am2hz").join("clip000.wav").to_str().unwrap(),
        "--keep-k",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("fingerprint"), "{}", stderr(&out));
}

#[test]
fn config_file_overrides_defaults_and_flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    make_corpus(&corpus, 5, 2.0);
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "keep_k = 32\nseed = 9\n").unwrap();

    // File value wins over the default.
    let f1 = dir.path().join("f1.csv");
    assert!(run(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        f1.to_str().unwrap(),
        "--config",
        cfg_path.to_str().unwrap()
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&f1).unwrap();
    assert!(text.contains("keep_k=32"), "file override missing: {}", text.lines().next().unwrap());

    // Flag wins over the file.
    let f2 = dir.path().join("f2.csv");
    assert!(run(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        f2.to_str().unwrap(),
        "--config",
        cfg_path.to_str().unwrap(),
        "--keep-k",
        "16"
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&f2).unwrap();
    assert!(text.contains("keep_k=16"), "flag override missing");
}

#[test]
fn extract_accepts_a_single_unlabeled_clip() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("solo.wav");
    let clip = secondfft::audio::synth_clip(
        secondfft::audio::SynthKind::WhiteNoise,
        2.0,
        8000,
        1,
    )
    .unwrap();
    secondfft::audio::write_wav(&clip, &wav).unwrap();
    let out_csv = dir.path().join("one.csv");
    let out = run(&[
        "extract",
        "--input",
        wav.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let row = text.lines().nth(2).unwrap();
    assert!(row.contains(",unlabeled,"), "row: {row}");
}
