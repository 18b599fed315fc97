use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_prompt-matcher"));
    c.env_remove("ORACLE_API_KEY")
        .env_remove("PROMPT_MATCHER_SEED")
        .env_remove("PROMPT_MATCHER_CONFIG")
        .env_remove("PROMPT_MATCHER_LOG");
    c
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_ok() {
    let o = exec(&["validate", &fixture("employee.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("OK: 3 candidates, 6 correspondences"));
    assert!(stdout(&o).contains("entropy 0.9973 nats"));
}

#[test]
fn validate_missing_file() {
    let o = exec(&["validate", "no/such/file.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no/such/file.json"));
}

#[test]
fn validate_unparseable_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{ not json").unwrap();
    assert_eq!(exec(&["validate", path_str(&p)]).status.code(), Some(2));
}

#[test]
fn validate_probability_sum_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixtures().join("employee.json")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["candidates"][0]["probability"] = serde_json::json!(0.9);
    let p = dir.path().join("oversum.json");
    std::fs::write(&p, value.to_string()).unwrap();
    let o = exec(&["validate", path_str(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("must sum to 1"), "{}", stderr(&o));
}

#[test]
fn select_prints_choice_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = exec(&[
            "select",
            &fixture("employee.json"),
            "--budget",
            "1",
            "--planning-accuracy",
            "0.8",
            "--out",
            path_str(out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = stdout(&o);
        // c3 and c5 tie above c1 and c4; the smaller id wins
        assert!(text.contains("selected: {c3}"), "{text}");
        assert!(text.contains("expected reduction: 0.1470 nats"), "{text}");
        assert!(text.contains("cost: 1 of 1 tokens"), "{text}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn select_requires_a_budget() {
    let o = exec(&["select", &fixture("employee.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--budget"));
}

fn run_simulated(out: &Path, events: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "--seed",
        "7",
        "run",
        "synth/d0.json",
        "--budget",
        "100",
        "--rounds",
        "4",
        "--oracle",
        "simulated",
        "--truth",
        "synth/d0_truth.json",
        "--out",
        path_str(out),
        "--events",
        path_str(events),
    ];
    args.extend_from_slice(extra);
    bin().current_dir(fixtures()).args(&args).output().unwrap()
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let first = run_simulated(&p("r1.json"), &p("e1.jsonl"), &[]);
    let second = run_simulated(&p("r2.json"), &p("e2.jsonl"), &[]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(p("r1.json")).unwrap(), std::fs::read(p("r2.json")).unwrap());
    assert_eq!(std::fs::read(p("e1.jsonl")).unwrap(), std::fs::read(p("e2.jsonl")).unwrap());
    let text = stdout(&first);
    assert!(text.contains("entropy trajectory (nats): "));
    assert!(text.contains("rank  probability  candidates"));

    let events = std::fs::read_to_string(p("e1.jsonl")).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("r1.json")).unwrap()).unwrap();
    let asked: usize = report["rounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["selected"].as_array().unwrap().len())
        .sum();
    assert_eq!(events.lines().count(), asked);
    assert!(report["spent"].as_u64().unwrap() <= 100);
}

#[test]
fn replay_run_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = exec(&[
            "run",
            &fixture("employee.json"),
            "--budget",
            "4",
            "--rounds",
            "2",
            "--oracle",
            "replay",
            "--transcript",
            &fixture("employee_transcript.jsonl"),
            "--out",
            path_str(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn zero_budget_reports_the_prior() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = exec(&[
        "run",
        &fixture("employee.json"),
        "--budget",
        "0",
        "--oracle",
        "simulated",
        "--truth",
        &fixture("employee_truth.json"),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["rounds"].as_array().unwrap().len(), 0);
    assert_eq!(report["prior"], report["final_distribution"]);
    assert_eq!(report["spent"], 0);
    assert!(stdout(&o).contains("entropy trajectory (nats): 0.9973\n"));
}

#[test]
fn llm_without_key_exits_3() {
    let o = exec(&["run", &fixture("employee.json"), "--budget", "3", "--oracle", "llm"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ORACLE_API_KEY"));
}

#[test]
fn oracle_failure_aborts_or_skips() {
    let dir = tempfile::tempdir().unwrap();
    let partial = dir.path().join("partial.jsonl");
    std::fs::write(&partial, r#"{"corr_id":"c1","verdict":true,"confidence":0.9}"#).unwrap();
    let args = |policy: &'static str| {
        vec![
            "run".to_string(),
            fixture("employee.json"),
            "--budget".into(),
            "6".into(),
            "--oracle".into(),
            "replay".into(),
            "--transcript".into(),
            path_str(&partial).into(),
            "--error-policy".into(),
            policy.into(),
        ]
    };
    let abort = bin().args(args("abort")).output().unwrap();
    assert_eq!(abort.status.code(), Some(3), "{}", stderr(&abort));
    let skip = bin().args(args("skip")).output().unwrap();
    assert_eq!(skip.status.code(), Some(0), "{}", stderr(&skip));
    assert!(stdout(&skip).contains("skipped"));
}

#[test]
fn eval_scores_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = exec(&[
        "run",
        &fixture("employee.json"),
        "--budget",
        "6",
        "--oracle",
        "replay",
        "--transcript",
        &fixture("employee_transcript.jsonl"),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let e = exec(&[
        "eval",
        path_str(&out),
        "--crs",
        &fixture("employee.json"),
        "--truth",
        &fixture("employee_truth.json"),
    ]);
    assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
    assert!(stdout(&e).contains("MRR: 1.0000"), "{}", stdout(&e));
}

#[test]
fn eval_runs_an_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cells.csv");
    let o = exec(&["eval", "--experiment", &fixture("experiment.json"), "--csv", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    // 2 datasets x 2 strategies x 3 budgets x 5 seeds
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn bench_emits_csv() {
    let o = exec(&["bench", "--correspondences", "10", "--budgets", "30,45", "--strategies", "greedy,brute,random"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("budget,greedy_seconds,greedy_objective_nats,greedy_cost,brute_seconds"));
    assert!(lines[1].starts_with("30,"));
}

#[test]
fn demo_writes_a_valid_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo.json");
    assert_eq!(exec(&["demo", "--out", path_str(&out)]).status.code(), Some(0));
    let v = exec(&["validate", path_str(&out)]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).starts_with("OK: "));

    let truth = dir.path().join("truth.json");
    let synth = dir.path().join("synth.json");
    let o = exec(&["--seed", "5", "demo", "--synthetic", "--truth-out", path_str(&truth), "--out", path_str(&synth)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(truth.exists());
    assert_eq!(exec(&["validate", path_str(&synth)]).status.code(), Some(0));
}

#[test]
fn config_precedence_flag_env_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 1, "budget": 2, "rounds": 2}"#).unwrap();
    let seed_of = |extra_env: Option<&str>, extra_flag: Option<&str>| {
        let out = dir.path().join("r.json");
        let mut cmd = bin();
        if let Some(s) = extra_env {
            cmd.env("PROMPT_MATCHER_SEED", s);
        }
        cmd.args(["--config", path_str(&cfg)]);
        if let Some(s) = extra_flag {
            cmd.args(["--seed", s]);
        }
        let o = cmd
            .args([
                "run",
                &fixture("employee.json"),
                "--oracle",
                "replay",
                "--transcript",
                &fixture("employee_transcript.jsonl"),
                "--out",
                path_str(&out),
            ])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        (report["config"]["seed"].as_u64().unwrap(), report["config"]["total_budget"].as_u64().unwrap())
    };
    assert_eq!(seed_of(None, None), (1, 2));
    assert_eq!(seed_of(Some("2"), None), (2, 2));
    assert_eq!(seed_of(Some("2"), Some("3")), (3, 2));
}

#[test]
fn unknown_config_key_lists_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"budgett": 2}"#).unwrap();
    let o = exec(&["--config", path_str(&cfg), "validate", &fixture("employee.json")]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("budgett") && err.contains("planning_accuracy"), "{err}");
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(exec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(exec(&["--help"]).status.code(), Some(0));
}
