use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use conpole::env::{make_env, parse_trace, validate_trace};

fn conpole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conpole"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn gen_matches_the_golden_seed_file() {
    let golden = golden("seeds.tsv");
    for env in ["equations", "fractions", "ternary-addition", "sorting", "multiplication", "rubiks-cube"] {
        let o = conpole(&["gen", env, "--seed", "0", "--count", "100"]);
        assert!(o.status.success());
        let expected: String = golden
            .lines()
            .filter_map(|l| l.strip_prefix(&format!("{env}\t")))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(stdout(&o), expected, "{env}");
    }
}

#[test]
fn gen_prints_count_lines_and_rejects_unknown_envs() {
    let o = conpole(&["gen", "sorting", "--seed", "5", "--count", "7"]);
    assert_eq!(stdout(&o).lines().count(), 7);
    assert!(stdout(&o).starts_with("5\t"));
    assert_eq!(conpole(&["gen", "chess"]).status.code(), Some(2));
    assert_eq!(conpole(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn solve_prints_a_replayable_trace() {
    let o = conpole(&["solve", "sorting", "--state", "[==|=]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "[==|=] =>\n[=|==] | swap 0\n");
    for (env, args, file) in [
        ("sorting", vec!["--seed", "2"], "solve_sorting_seed2.txt"),
        ("fractions", vec!["--seed", "1", "--budget", "1000000"], "solve_fractions_seed1.txt"),
        ("ternary-addition", vec!["--seed", "2", "--budget", "1000000"], "solve_ternary_seed2.txt"),
    ] {
        let mut a = vec!["solve", env];
        a.extend(args);
        let o = conpole(&a);
        assert_eq!(stdout(&o), golden(file));
        let steps = parse_trace(stdout(&o).trim_end()).unwrap();
        validate_trace(&*make_env(env).unwrap(), &steps).unwrap();
    }
}

#[test]
fn solve_reports_failure_and_warns_without_checkpoint() {
    let o = conpole(&["solve", "sorting", "--seed", "0", "--method", "bfs", "--budget", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = conpole(&["solve", "sorting", "--seed", "2", "--method", "greedy"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("uniform policy"));
    assert_eq!(conpole(&["solve", "sorting", "--state", "[=|x]"]).status.code(), Some(2));
    assert_eq!(conpole(&["solve", "sorting"]).status.code(), Some(2));
}

#[test]
fn stats_match_golden_output() {
    let o = conpole(&["stats", "sorting", "--states", "1000", "--problems", "5", "--budget", "10000"]);
    assert_eq!(stdout(&o), golden("stats_sorting_small.json"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["stats"]["avg_branching_factor"].is_number());
    assert!(v["stats"]["bfs_success_rate"].is_number());
}

fn smoke_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{"env": "sorting", "out_dir": {:?}, "train": {{"env_steps": 1200, "eval_interval": 400,
            "eval_problems": 10, "beam_size": 3, "steps_per_update": 4, "learning_rate": 0.001,
            "scorer": {{"embed_dim": 4, "hidden_dim": 6, "layers": 1}}{extra}}}}}"#,
        dir.join("run")
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn train_writes_checkpoints_and_resumes_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path(), "");
    let o = conpole(&["train", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = dir.path().join("run");
    assert!(run.join("checkpoint.bin").exists());
    let full = std::fs::read_to_string(run.join("metrics.jsonl")).unwrap();
    assert!(full.lines().next().unwrap().contains("\"build\""));
    assert!(full.lines().count() >= 4);

    let o = conpole(&["train", "--config", cfg.to_str().unwrap(), "--steps", "400"]);
    assert!(o.status.success());
    let ckpt = run.join("checkpoint.bin");
    let o = conpole(&["train", "--config", cfg.to_str().unwrap(), "--resume", ckpt.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let resumed = std::fs::read_to_string(run.join("metrics.jsonl")).unwrap();
    let body = |s: &str| s.lines().skip(1).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&resumed), body(&full));

    let o = conpole(&["eval", "sorting", "--checkpoint", ckpt.to_str().unwrap(), "--problems", "20"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rate = v["success_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
    let o = conpole(&[
        "solve", "sorting", "--seed", "3", "--method", "beam", "--checkpoint", ckpt.to_str().unwrap(),
    ]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
}

#[test]
fn train_rejects_bad_learners_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path(), r#", "learner": "dqn""#);
    assert_eq!(conpole(&["train", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let cfg = smoke_config(dir.path(), r#", "beam": 3"#);
    assert_eq!(conpole(&["train", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(conpole(&["train", "--env", "sorting", "--learner", "dqn"]).status.code(), Some(2));
}

#[test]
fn embed_emits_one_row_per_item() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eq.csv");
    std::fs::write(&csv, "equation,label\nx = 1,a\n(x + 1) = 2,a\n2x = 4,b\n(2x + 1) = 3,b\n").unwrap();
    let out = dir.path().join("emb.csv");
    let pca = dir.path().join("pca.csv");
    let o = conpole(&[
        "embed", "--input", csv.to_str().unwrap(), "--out", out.to_str().unwrap(), "--pca", pca.to_str().unwrap(),
        "--shuffles", "10",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows.lines().count(), 5);
    let width = rows.lines().next().unwrap().split(',').count();
    assert!(width > 2);
    assert!(rows.lines().all(|l| l.split(',').count() == width));
    assert_eq!(std::fs::read_to_string(&pca).unwrap().lines().count(), 5);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["items"], 4);
}

#[test]
fn serve_handles_errors_and_pipelining() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_conpole"))
        .arg("serve")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let reader = std::thread::spawn({
        let out = child.stdout.take().unwrap();
        move || BufReader::new(out).lines().map(Result::unwrap).collect::<Vec<String>>()
    });
    let env = make_env("sorting").unwrap();
    let states: Vec<String> = (0..10_000).map(|s| env.generate(s)).collect();
    writeln!(stdin, "{{not json").unwrap();
    for s in &states {
        writeln!(stdin, "{}", serde_json::json!({"cmd": "expand", "env": "sorting", "state": s})).unwrap();
    }
    drop(stdin);
    let lines = reader.join().unwrap();
    assert!(child.wait().unwrap().success());
    assert_eq!(lines.len(), 10_001);
    assert!(lines[0].starts_with(r#"{"ok":false"#));
    for (s, line) in states.iter().zip(&lines[1..]) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let edges = env.expand(s).unwrap();
        let actions = v["actions"].as_array().unwrap();
        assert_eq!(actions.len(), edges.len());
        for (a, e) in actions.iter().zip(&edges) {
            assert_eq!(a["name"], e.label);
            assert_eq!(a["state"], e.next_state);
        }
        assert_eq!(line.trim_end(), line);
    }
}
