use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use prompt_matcher::engine::{run_with_events, RunReport};
use prompt_matcher::eval::{
    candidate_f1, gen_demo_crs, optimal_candidates, rank_of_best, run_experiment, Dataset,
    ExperimentSpec, GroundTruth, Schema,
};
use prompt_matcher::fixtures::employee_schemas;
use prompt_matcher::objective::{view_entropy, EvalMode, PlanningAccuracy};
use prompt_matcher::oracle::{build_oracle, save_ground_truth, LlmConfig, OracleConfig};
use prompt_matcher::selection::{
    select, view_costs, CostModel, McFallback, SelectionProblem, Strategy,
};
use prompt_matcher::synth::{generate, random_view_set, SynthParams};
use prompt_matcher::{
    build_view_set, to_canonical_json, validate_crs, CandidateResultSet, Error, ViewSet,
};

use crate::config::{merge, FileConfig, RunOverrides};
use crate::{BenchArgs, Cli, Command, DemoArgs, EvalArgs, OracleArgs, OracleKind, PlanArgs, RunArgs, SelectArgs};

type Result<T> = std::result::Result<T, Error>;

const DEFAULT_LLM_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
const DEFAULT_LLM_MODEL: &str = "gpt-4";

pub fn dispatch(cli: &Cli, file: &FileConfig) -> Result<u8> {
    match &cli.command {
        Command::Validate { crs } => validate(crs),
        Command::Demo(args) => demo(args, cli.seed.or(file.seed).unwrap_or(0)).map(|_| 0),
        Command::Select(args) => cmd_select(args, cli.seed, file).map(|_| 0),
        Command::Run(args) => cmd_run(args, cli.seed, file).map(|_| 0),
        Command::Eval(args) => eval(args).map(|_| 0),
        Command::Bench(args) => bench(args, cli.seed.or(file.seed).unwrap_or(0)).map(|_| 0),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_checked(path: &Path) -> Result<CandidateResultSet> {
    let crs = CandidateResultSet::load(path)?;
    let report = validate_crs(&crs);
    for w in &report.warnings {
        log::warn!("{w}");
    }
    if !report.is_ok() {
        return Err(Error::MalformedDistribution(format!(
            "{}: {}",
            path.display(),
            report.errors.join("; ")
        )));
    }
    Ok(crs)
}

fn validate(path: &Path) -> Result<u8> {
    let crs = CandidateResultSet::load(path)?;
    let report = validate_crs(&crs);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.is_ok() {
        for e in &report.errors {
            eprintln!("error: {e}");
        }
        return Ok(1);
    }
    println!(
        "OK: {} candidates, {} correspondences",
        crs.candidates.len(),
        crs.correspondences.len()
    );
    if report.renormalized() {
        println!("note: probabilities sum to {} and will be renormalized", report.probability_sum);
    }
    let vs = build_view_set(&crs)?;
    println!("{} views, entropy {:.4} nats", vs.num_views(), view_entropy(&vs));
    Ok(0)
}

fn demo(args: &DemoArgs, seed: u64) -> Result<()> {
    if args.synthetic {
        let d = generate(&SynthParams::default(), seed)?;
        if let Some(path) = &args.truth_out {
            save_ground_truth(path, &d.truth)?;
        }
        return emit(args.out.as_ref(), &d.crs.to_json_string());
    }
    let (source, target) = match (&args.source, &args.target) {
        (Some(s), Some(t)) => (Schema::load(s)?, Schema::load(t)?),
        _ => employee_schemas(),
    };
    let crs = gen_demo_crs(&source, &target, seed)?;
    emit(args.out.as_ref(), &crs.to_json_string())
}

fn plan_overrides(plan: &PlanArgs, seed: Option<u64>) -> RunOverrides {
    RunOverrides {
        seed,
        budget: plan.budget,
        strategy: plan.strategy.map(Strategy::from),
        planning_accuracy: plan.planning_accuracy,
        exact_cap: plan.exact_cap,
        mc_samples: plan.mc_samples,
        chars_per_token: plan.chars_per_token,
        ..RunOverrides::default()
    }
}

fn ids(list: &[String]) -> String {
    list.join(", ")
}

fn cmd_select(args: &SelectArgs, seed: Option<u64>, file: &FileConfig) -> Result<()> {
    let cfg = merge(file, &plan_overrides(&args.plan, seed));
    cfg.validate()?;
    if args.plan.budget.is_none() && file.budget.is_none() {
        return Err(Error::MalformedInput("no budget given (use --budget)".into()));
    }
    let crs = load_checked(&args.crs)?;
    let vs = build_view_set(&crs)?;
    let costs = view_costs(&crs, &vs, &CostModel { chars_per_token: cfg.chars_per_token })?;
    let accuracy = PlanningAccuracy::new(cfg.planning_accuracy)?;
    let problem = SelectionProblem::new(&vs, &costs, cfg.total_budget, &accuracy)?
        .with_mode(EvalMode::Exact { cap: cfg.exact_cap })
        .with_fallback(cfg.mc_samples.map(|samples| McFallback { samples, seed: cfg.seed }));
    let result = select(&problem, cfg.strategy, cfg.seed)?;
    println!("selected: {{{}}}", ids(&result.chosen));
    println!("expected reduction: {:.4} nats", result.objective_value);
    println!("cost: {} of {} tokens", result.cost_used, cfg.total_budget);
    println!("strategy: {}", result.strategy);
    if let Some(path) = &args.out {
        write_file(path, &to_canonical_json(&result))?;
    }
    Ok(())
}

fn oracle_config(args: &OracleArgs, file: &FileConfig, seed: u64) -> Result<OracleConfig> {
    let Some(kind) = args.oracle else {
        return file.oracle.clone().ok_or_else(|| {
            Error::MalformedInput("no oracle configured (use --oracle or the config file)".into())
        });
    };
    let need = |v: &Option<PathBuf>, flag: &str| {
        v.clone()
            .ok_or_else(|| Error::MalformedInput(format!("--oracle {kind:?} needs {flag}").to_lowercase()))
    };
    Ok(match kind {
        OracleKind::Simulated => OracleConfig::Simulated {
            accuracy: args.oracle_accuracy,
            seed,
            ground_truth_path: need(&args.truth, "--truth")?,
            missing_as_false: false,
        },
        OracleKind::Replay => OracleConfig::Replay {
            transcript_path: need(&args.transcript, "--transcript")?,
        },
        OracleKind::Llm => OracleConfig::Llm(LlmConfig {
            cache_dir: args.cache_dir.clone(),
            transcript_path: args.record.clone(),
            fixed_confidence: args.fixed_confidence,
            ..LlmConfig::new(
                args.endpoint.clone().unwrap_or_else(|| DEFAULT_LLM_ENDPOINT.into()),
                args.model.clone().unwrap_or_else(|| DEFAULT_LLM_MODEL.into()),
                args.template.into(),
            )
        }),
    })
}

fn cmd_run(args: &RunArgs, seed: Option<u64>, file: &FileConfig) -> Result<()> {
    let overrides = RunOverrides {
        rounds: args.rounds,
        stop_entropy: args.stop_entropy,
        allow_requery: args.allow_requery,
        error_policy: args.error_policy.map(Into::into),
        ..plan_overrides(&args.plan, seed)
    };
    let cfg = merge(file, &overrides);
    cfg.validate()?;
    let crs = load_checked(&args.crs)?;
    let oracle = build_oracle(&oracle_config(&args.oracle, file, cfg.seed)?, &crs)?;

    let report = match &args.events {
        Some(path) => {
            let f = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(f);
            let report = run_with_events(&cfg, &crs, oracle.as_ref(), Some(&mut w))?;
            w.flush().map_err(|e| Error::io(path, e))?;
            report
        }
        None => run_with_events(&cfg, &crs, oracle.as_ref(), None)?,
    };
    if let Some(path) = &args.out {
        report.save(path)?;
    }
    print!("{}", render_run(&report));
    Ok(())
}

fn render_run(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "prior entropy: {:.4} nats", report.prior_entropy);
    for r in &report.rounds {
        let _ = writeln!(
            s,
            "round {}: budget {}, asked [{}], spent {}, entropy {:.4} -> {:.4}",
            r.round,
            r.round_budget,
            ids(&r.selected),
            r.spent_total,
            r.entropy_before,
            r.entropy_after
        );
        for skipped in &r.skipped {
            let _ = writeln!(s, "  skipped {}: {}", skipped.corr_id, skipped.error);
        }
    }
    let curve: Vec<String> = report
        .entropy_curve()
        .iter()
        .map(|(_, h)| format!("{h:.4}"))
        .collect();
    let _ = writeln!(s, "entropy trajectory (nats): {}", curve.join(" -> "));
    let stop = serde_json::to_value(report.stop_reason)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    let _ = writeln!(
        s,
        "stopped: {stop}; spent {} of {} tokens",
        report.spent, report.config.total_budget
    );
    let _ = writeln!(s, "\nrank  probability  candidates");
    for v in &report.ranking {
        let _ = writeln!(s, "{:<4}  {:<11.4}  {}", v.rank, v.probability, v.candidates.join(", "));
    }
    s
}

fn eval(args: &EvalArgs) -> Result<()> {
    if let Some(spec) = &args.experiment {
        return experiment(args, spec);
    }
    let (Some(report), Some(crs), Some(truth)) = (&args.report, &args.crs, &args.truth) else {
        return Err(Error::MalformedInput("eval needs a report, --crs and --truth".into()));
    };
    let report = RunReport::load(report)?;
    let crs = load_checked(crs)?;
    let gt = GroundTruth::load(truth)?;
    let vs: ViewSet = report.final_view_set(&crs)?;
    let rank = rank_of_best(&vs, &crs, &gt);
    println!("MRR: {:.4}", 1.0 / rank as f64);
    println!("rank of best candidate: {rank}");
    for id in optimal_candidates(&crs, &gt) {
        if let Some(c) = crs.candidate(&id) {
            let f = candidate_f1(c, &crs, &gt);
            println!(
                "best candidate: {id} (F1 {:.4}, precision {:.4}, recall {:.4})",
                f.f1, f.precision, f.recall
            );
        }
    }
    if let Some(top) = report.ranking.first() {
        for id in &top.candidates {
            if let Some(c) = crs.candidate(id) {
                println!("top-ranked candidate: {id} (F1 {:.4})", candidate_f1(c, &crs, &gt).f1);
            }
        }
    }
    println!(
        "entropy: {:.4} -> {:.4} nats, spent {} tokens",
        report.prior_entropy, report.final_entropy, report.spent
    );
    Ok(())
}

fn experiment(args: &EvalArgs, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let datasets = spec
        .datasets
        .iter()
        .map(|d| {
            let mut d = d.clone();
            d.crs_path = base.join(&d.crs_path);
            d.ground_truth_path = base.join(&d.ground_truth_path);
            Dataset::load(&d)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = run_experiment(&spec, &datasets)?;
    println!("dataset  strategy  budget  runs  failed  mean_mrr  mean_entropy  rank1  rank<=2  mean_ms");
    for s in &report.summary {
        println!(
            "{:<7}  {:<8}  {:>6}  {:>4}  {:>6}  {:>8.4}  {:>12.4}  {:>5.2}  {:>7.2}  {:>7.1}",
            s.dataset,
            s.strategy,
            s.budget,
            s.runs,
            s.failures,
            s.mean_mrr,
            s.mean_final_entropy,
            s.rank1_fraction,
            s.rank_le2_fraction,
            s.mean_wall_ms
        );
    }
    if let Some(p) = &args.csv {
        write_file(p, &report.to_csv())?;
    }
    if let Some(p) = &args.curves {
        write_file(p, &report.curves_csv())?;
    }
    if let Some(p) = &args.json {
        write_file(p, &to_canonical_json(&report))?;
    }
    Ok(())
}

fn bench(args: &BenchArgs, seed: u64) -> Result<()> {
    let (vs, costs) = match &args.crs {
        Some(path) => {
            let crs = load_checked(path)?;
            let vs = build_view_set(&crs)?;
            let costs = view_costs(&crs, &vs, &CostModel::default())?;
            (vs, costs)
        }
        None => (
            random_view_set(args.views, args.correspondences, seed)?,
            vec![args.cost; args.correspondences],
        ),
    };
    let accuracy = PlanningAccuracy::new(args.planning_accuracy)?;
    let strategies: Vec<Strategy> = args.strategies.iter().map(|&s| s.into()).collect();
    let mut csv = String::from("budget");
    for s in &strategies {
        let _ = write!(csv, ",{s}_seconds,{s}_objective_nats,{s}_cost");
    }
    csv.push('\n');
    for &budget in &args.budgets {
        let problem = SelectionProblem::new(&vs, &costs, budget, &accuracy)?;
        let _ = write!(csv, "{budget}");
        for &strategy in &strategies {
            let started = Instant::now();
            let result = select(&problem, strategy, seed)?;
            let secs = started.elapsed().as_secs_f64();
            log::info!("budget {budget} {strategy}: {secs:.3}s");
            let _ = write!(csv, ",{secs:.4},{:.4},{}", result.objective_value, result.cost_used);
        }
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(path) = &args.out {
        write_file(path, &csv)?;
    }
    Ok(())
}
