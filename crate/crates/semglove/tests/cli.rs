//! The `semglove` binary: exit codes, config precedence and a small pipeline.

use std::path::Path;
use std::process::{Command, Output};

fn semglove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semglove"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let o = semglove(&["train", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("--xmax"));
    let o = semglove(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).starts_with("semglove 0.1.0 (semglove-core 0.1.0,"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(semglove(&[]).status.code(), Some(2));
    assert_eq!(semglove(&["train", "--dim", "many"]).status.code(), Some(2));
    assert_eq!(
        semglove(&[
            "cooc-window",
            "--window",
            "0",
            "--corpus",
            "x",
            "--vocab",
            "y",
            "--out",
            "z"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn dry_run_shows_resolved_defaults() {
    let o = semglove(&["train", "--dry-run"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in [
        "x_max=10",
        "alpha=0.75",
        "lr=0.05",
        "dim=300",
        "iterations=100",
        "window=5",
        "grad_clip=100",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "dim=20\ncolour=red\n").unwrap();
    let o = semglove(&["--config", s(&cfg), "train", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("error: config: unknown key 'colour'"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn flags_take_precedence_over_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# trainer\nx_max=100\ndim=20\ngrad_clip=off\n").unwrap();
    let o = semglove(&["--config", s(&cfg), "train", "--xmax", "7", "--dry-run"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "x_max=7"), "{text}");
    assert!(text.lines().any(|l| l == "dim=20"));
    assert!(text.lines().any(|l| l == "grad_clip=off"));
    let o = semglove(&["--config", s(&cfg), "train", "--grad-clip", "5", "--dry-run"]);
    assert!(stdout(&o).lines().any(|l| l == "grad_clip=5"));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = semglove(&[
        "vocab",
        "--corpus",
        s(&dir.path().join("absent.txt")),
        "--out",
        s(&dir.path().join("v.txt")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: io: "), "{}", stderr(&o));
}

#[test]
fn validate_dump_reports_and_fails_on_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sgdv");
    std::fs::write(&bad, b"NOPE and some more bytes here").unwrap();
    let o = semglove(&["validate-dump", "--dump", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error: format:"), "{}", stderr(&o));
}

#[test]
fn step_by_step_pipeline_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let mut text = String::new();
    for k in 0..200 {
        let line = match k % 4 {
            0 => "the cat sat on the mat",
            1 => "a dog sat on the rug",
            2 => "the cat chased a dog",
            _ => "a dog chased the cat",
        };
        text.push_str(line);
        text.push('\n');
    }
    std::fs::write(p("corpus.txt"), text).unwrap();
    std::fs::write(
        p("sim.txt"),
        "# toy\ncat\tdog\t7.0\ncat\tmat\t3.0\ndog\trug\t3.5\ncat\tunicorn\t1.0\n",
    )
    .unwrap();

    let ok = |args: &[&str]| {
        let o = semglove(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        o
    };
    ok(&[
        "vocab",
        "--corpus",
        s(&p("corpus.txt")),
        "--min-count",
        "2",
        "--out",
        s(&p("vocab.txt")),
    ]);
    ok(&[
        "cooc-window",
        "--corpus",
        s(&p("corpus.txt")),
        "--vocab",
        s(&p("vocab.txt")),
        "--out",
        s(&p("cooc.bin")),
    ]);
    ok(&[
        "shuffle",
        "--in",
        s(&p("cooc.bin")),
        "--out",
        s(&p("shuf.bin")),
        "--seed",
        "3",
    ]);
    ok(&[
        "shuffle",
        "--in",
        s(&p("cooc.bin")),
        "--out",
        s(&p("shuf2.bin")),
        "--seed",
        "3",
    ]);
    assert_eq!(
        std::fs::read(p("shuf.bin")).unwrap(),
        std::fs::read(p("shuf2.bin")).unwrap()
    );

    let o = ok(&[
        "train",
        "--cooc",
        s(&p("shuf.bin")),
        "--vocab",
        s(&p("vocab.txt")),
        "--dim",
        "8",
        "--iters",
        "5",
        "--threads",
        "1",
        "--out",
        s(&p("vec.txt")),
    ]);
    assert_eq!(stderr(&o).matches("loss").count(), 5);
    ok(&[
        "train",
        "--cooc",
        s(&p("shuf.bin")),
        "--vocab",
        s(&p("vocab.txt")),
        "--dim",
        "8",
        "--iters",
        "5",
        "--threads",
        "1",
        "--out",
        s(&p("vec2.txt")),
    ]);
    assert_eq!(
        std::fs::read(p("vec.txt")).unwrap(),
        std::fs::read(p("vec2.txt")).unwrap()
    );

    let o = ok(&["eval", "--vectors", s(&p("vec.txt")), "--dataset", s(&p("sim.txt"))]);
    let line = stdout(&o);
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[0], "sim");
    assert!(fields[1].parse::<f64>().unwrap().abs() <= 1.0);
    assert_eq!(fields[2], "3/4");

    let o = ok(&["nearest", "--vectors", s(&p("vec.txt")), "--word", "cat", "--k", "3"]);
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = semglove(&["nearest", "--vectors", s(&p("vec.txt")), "--word", "unicorn"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pipeline_command_writes_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    std::fs::write(&corpus, "alpha beta gamma delta\nbeta gamma alpha\n".repeat(30)).unwrap();
    let work = dir.path().join("work");
    let o = semglove(&[
        "pipeline",
        "--work-dir",
        s(&work),
        "--corpus",
        s(&corpus),
        "--dim",
        "4",
        "--iters",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["vocab.txt", "cooccur.bin", "shuf.bin", "vectors.txt"] {
        assert!(work.join(f).exists(), "{f}");
    }
}
