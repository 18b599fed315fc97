//! Metrics, rankings, experiment grids and a demo candidate generator.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run, RunConfig, RunReport};
use crate::error::{Error, Result};
use crate::model::{
    build_view_set, AttributeRef, CandidateResult, CandidateResultSet, Correspondence, PairKey,
    SchemaSide, ViewSet,
};
use crate::oracle::{load_ground_truth, GroundTruthEntry, SimulatedOracle};
use crate::selection::{token_cost, CostModel, Strategy};

/// Matched attribute pairs; identity is (sorted source names, sorted target
/// names), case-sensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pairs: BTreeSet<PairKey>,
}

impl GroundTruth {
    /// Keeps the entries marked as matches.
    pub fn from_entries(entries: &[GroundTruthEntry]) -> Self {
        Self {
            pairs: entries.iter().filter(|e| e.is_match).map(|e| e.key()).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::from_entries(&load_ground_truth(path)?))
    }

    pub fn contains(&self, c: &Correspondence) -> bool {
        self.pairs.contains(&c.pair_key())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn candidate_f1(cand: &CandidateResult, crs: &CandidateResultSet, gt: &GroundTruth) -> F1Score {
    let proposed: BTreeSet<PairKey> = cand
        .correspondence_ids
        .iter()
        .filter_map(|id| crs.correspondence(id))
        .map(Correspondence::pair_key)
        .collect();
    let correct = proposed.iter().filter(|k| gt.pairs.contains(k)).count() as f64;
    let precision = if proposed.is_empty() {
        0.0
    } else {
        correct / proposed.len() as f64
    };
    let recall = if gt.is_empty() {
        0.0
    } else {
        correct / gt.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    F1Score {
        precision,
        recall,
        f1,
    }
}

/// View indices by descending probability; ties keep the original order.
pub fn rank_candidates(vs: &ViewSet) -> Vec<usize> {
    let p = vs.probabilities();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    order
}

/// Candidate ids of `crs` that achieve the maximum F1.
pub fn optimal_candidates(crs: &CandidateResultSet, gt: &GroundTruth) -> Vec<String> {
    let scores: Vec<f64> = crs.candidates.iter().map(|c| candidate_f1(c, crs, gt).f1).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    crs.candidates
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == best)
        .map(|(c, _)| c.id.clone())
        .collect()
}

/// 1-based position of the best-ranked optimal candidate. Candidates missing
/// from `vs` (zero prior probability) come after every view, in listing order.
pub fn rank_of_best(vs: &ViewSet, crs: &CandidateResultSet, gt: &GroundTruth) -> usize {
    let optimal: BTreeSet<String> = optimal_candidates(crs, gt).into_iter().collect();
    let order = rank_candidates(vs);
    if let Some(pos) = order
        .iter()
        .position(|&v| vs.members()[v].iter().any(|m| optimal.contains(m)))
    {
        return pos + 1;
    }
    let in_views: BTreeSet<&String> = vs.members().iter().flatten().collect();
    let mut position = order.len();
    for c in &crs.candidates {
        if in_views.contains(&c.id) {
            continue;
        }
        position += 1;
        if optimal.contains(&c.id) {
            return position;
        }
    }
    position
}

pub fn mrr(vs: &ViewSet, crs: &CandidateResultSet, gt: &GroundTruth) -> f64 {
    1.0 / rank_of_best(vs, crs, gt) as f64
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub crs_path: PathBuf,
    pub ground_truth_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub crs: CandidateResultSet,
    pub truth: Vec<GroundTruthEntry>,
}

impl Dataset {
    pub fn load(spec: &DatasetSpec) -> Result<Self> {
        let crs = CandidateResultSet::load(&spec.crs_path)?;
        let report = crate::model::validate_crs(&crs);
        if !report.is_ok() {
            return Err(Error::MalformedDistribution(format!(
                "{}: {}",
                spec.crs_path.display(),
                report.errors.join("; ")
            )));
        }
        Ok(Self {
            name: spec.name.clone(),
            crs,
            truth: load_ground_truth(&spec.ground_truth_path)?,
        })
    }

    /// Sum of token costs over all correspondences.
    pub fn total_cost(&self, model: &CostModel) -> u64 {
        self.crs.correspondences.iter().map(|c| token_cost(c, model)).sum()
    }
}

/// Grid definition. Budgets are the union of the absolute `budgets` and the
/// `budget_fractions` of each dataset's total cost (rounded down).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub datasets: Vec<DatasetSpec>,
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub budgets: Vec<u64>,
    #[serde(default)]
    pub budget_fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rounds_k: u32,
    /// Accuracy of the simulated oracle.
    pub oracle_accuracy: f64,
    /// Planner's assumed accuracy; defaults to `oracle_accuracy`.
    #[serde(default)]
    pub planning_accuracy: Option<f64>,
    #[serde(default)]
    pub base: Option<RunConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub strategy: Strategy,
    pub budget: u64,
    pub seed: u64,
    pub mrr: Option<f64>,
    pub final_entropy_nats: Option<f64>,
    pub rank_of_best: Option<usize>,
    pub wall_ms: f64,
    /// `(cumulative spend, entropy)` after each round.
    pub curve: Vec<(u64, f64)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset: String,
    pub strategy: Strategy,
    pub budget: u64,
    pub runs: usize,
    pub failures: usize,
    pub mean_mrr: f64,
    pub mean_final_entropy: f64,
    pub rank1_fraction: f64,
    pub rank_le2_fraction: f64,
    pub mean_wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub summary: Vec<CellSummary>,
}

struct CellPlan<'d> {
    dataset: &'d Dataset,
    strategy: Strategy,
    budget: u64,
    seed: u64,
}

/// Budgets for one dataset, sorted and deduplicated.
fn budgets_for(spec: &ExperimentSpec, dataset: &Dataset, model: &CostModel) -> Vec<u64> {
    let total = dataset.total_cost(model) as f64;
    let mut out: Vec<u64> = spec
        .budgets
        .iter()
        .copied()
        .chain(spec.budget_fractions.iter().map(|f| (f * total).floor() as u64))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Runs every (dataset, strategy, budget, seed) cell with a simulated oracle.
/// Cells run in parallel; a failing cell is recorded and the grid continues.
pub fn run_experiment(spec: &ExperimentSpec, datasets: &[Dataset]) -> Result<ExperimentReport> {
    if !(spec.oracle_accuracy > 0.5 && spec.oracle_accuracy <= 1.0) {
        return Err(Error::MalformedInput(format!(
            "oracle accuracy {} outside (0.5, 1.0]",
            spec.oracle_accuracy
        )));
    }
    let base = spec.base.clone().unwrap_or_default();
    let model = CostModel {
        chars_per_token: base.chars_per_token,
    };
    let mut plan = Vec::new();
    for dataset in datasets {
        for &strategy in &spec.strategies {
            for budget in budgets_for(spec, dataset, &model) {
                for &seed in &spec.seeds {
                    plan.push(CellPlan {
                        dataset,
                        strategy,
                        budget,
                        seed,
                    });
                }
            }
        }
    }
    let truths: HashMap<&str, GroundTruth> = datasets
        .iter()
        .map(|d| (d.name.as_str(), GroundTruth::from_entries(&d.truth)))
        .collect();

    let cells: Vec<CellResult> = plan
        .par_iter()
        .map(|cell| {
            let cfg = RunConfig {
                total_budget: cell.budget,
                rounds_k: spec.rounds_k,
                strategy: cell.strategy,
                planning_accuracy: spec.planning_accuracy.unwrap_or(spec.oracle_accuracy),
                seed: cell.seed,
                ..base.clone()
            };
            let gt = &truths[cell.dataset.name.as_str()];
            let started = Instant::now();
            let outcome = SimulatedOracle::new(spec.oracle_accuracy, cell.seed, &cell.dataset.truth)
                .map(|o| o.missing_as_false(true))
                .and_then(|oracle| run(&cfg, &cell.dataset.crs, &oracle))
                .and_then(|report| score(&report, &cell.dataset.crs, gt).map(|s| (report, s)));
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut result = CellResult {
                dataset: cell.dataset.name.clone(),
                strategy: cell.strategy,
                budget: cell.budget,
                seed: cell.seed,
                mrr: None,
                final_entropy_nats: None,
                rank_of_best: None,
                wall_ms,
                curve: Vec::new(),
                error: None,
            };
            match outcome {
                Ok((report, (rank, entropy))) => {
                    result.mrr = Some(1.0 / rank as f64);
                    result.rank_of_best = Some(rank);
                    result.final_entropy_nats = Some(entropy);
                    result.curve = report.entropy_curve();
                }
                Err(e) => {
                    log::warn!(
                        "cell {}/{}/{}/{} failed: {e}",
                        cell.dataset.name,
                        cell.strategy,
                        cell.budget,
                        cell.seed
                    );
                    result.error = Some(e.to_string());
                }
            }
            result
        })
        .collect();

    let summary = summarize(&cells);
    Ok(ExperimentReport { cells, summary })
}

fn score(report: &RunReport, crs: &CandidateResultSet, gt: &GroundTruth) -> Result<(usize, f64)> {
    let vs = report.final_view_set(crs)?;
    Ok((rank_of_best(&vs, crs, gt), report.final_entropy))
}

type CellKey = (String, Strategy, u64);

fn summarize(cells: &[CellResult]) -> Vec<CellSummary> {
    let mut groups: Vec<(CellKey, Vec<&CellResult>)> = Vec::new();
    for c in cells {
        let key = (c.dataset.clone(), c.strategy, c.budget);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(c),
            None => groups.push((key, vec![c])),
        }
    }
    groups
        .into_iter()
        .map(|((dataset, strategy, budget), members)| {
            let ok: Vec<&&CellResult> = members.iter().filter(|c| c.error.is_none()).collect();
            let n = ok.len().max(1) as f64;
            let mean = |f: &dyn Fn(&CellResult) -> f64| ok.iter().map(|c| f(c)).sum::<f64>() / n;
            CellSummary {
                dataset,
                strategy,
                budget,
                runs: members.len(),
                failures: members.len() - ok.len(),
                mean_mrr: mean(&|c| c.mrr.unwrap_or(0.0)),
                mean_final_entropy: mean(&|c| c.final_entropy_nats.unwrap_or(0.0)),
                rank1_fraction: mean(&|c| (c.rank_of_best == Some(1)) as u8 as f64),
                rank_le2_fraction: mean(&|c| c.rank_of_best.is_some_and(|r| r <= 2) as u8 as f64),
                mean_wall_ms: members.iter().map(|c| c.wall_ms).sum::<f64>() / members.len() as f64,
            }
        })
        .collect()
}

impl ExperimentReport {
    /// One row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,strategy,budget,seed,mrr,final_entropy_nats,rank_of_best,wall_ms\n");
        for c in &self.cells {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:.3}",
                c.dataset,
                c.strategy,
                c.budget,
                c.seed,
                opt(c.mrr),
                opt(c.final_entropy_nats),
                c.rank_of_best.map(|r| r.to_string()).unwrap_or_default(),
                c.wall_ms
            );
        }
        out
    }

    /// Entropy-vs-spend points of every run, for plotting.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("dataset,strategy,budget,seed,step,spent,entropy_nats\n");
        for c in &self.cells {
            for (step, (spent, h)) in c.curve.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{step},{spent},{h:.4}",
                    c.dataset, c.strategy, c.budget, c.seed
                );
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Demo data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaAttribute {
    pub name: String,
    #[serde(default)]
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub name: String,
    pub attributes: Vec<SchemaAttribute>,
}

impl Schema {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

fn fold(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn trigrams(s: &str) -> BTreeSet<String> {
    let padded: Vec<char> = format!("##{s}##").chars().collect();
    padded.windows(3).map(|w| w.iter().collect()).collect()
}

fn jaccard(a: &str, b: &str) -> f64 {
    let (x, y) = (trigrams(a), trigrams(b));
    let inter = x.intersection(&y).count() as f64;
    let union = x.union(&y).count() as f64;
    if union == 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + (ca != cb) as usize)
                .min(prev[j + 1] + 1)
                .min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn edit_similarity(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 0.0;
    }
    1.0 - levenshtein(a, b) as f64 / len as f64
}

type Matcher = fn(&str, &str) -> f64;

/// (matcher, threshold) pairs of the built-in ensemble, applied to raw names.
fn ensemble() -> Vec<(Matcher, f64)> {
    fn exact(a: &str, b: &str) -> f64 {
        (a == b) as u8 as f64
    }
    fn folded(a: &str, b: &str) -> f64 {
        let (a, b) = (fold(a), fold(b));
        (!a.is_empty() && a == b) as u8 as f64
    }
    fn prefix(a: &str, b: &str) -> f64 {
        let (a, b) = (fold(a), fold(b));
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        if short.len() >= 2 && long.starts_with(&short) {
            short.len() as f64 / long.len() as f64
        } else {
            0.0
        }
    }
    fn gram(a: &str, b: &str) -> f64 {
        jaccard(&fold(a), &fold(b))
    }
    fn edit(a: &str, b: &str) -> f64 {
        edit_similarity(&fold(a), &fold(b))
    }
    vec![
        (exact as Matcher, 1.0),
        (folded, 1.0),
        (prefix, 1e-9),
        (gram, 0.5),
        (gram, 0.3),
        (edit, 0.8),
        (edit, 0.6),
    ]
}

/// Greedy 1:1 assignment over scored pairs; equal scores are ordered by a
/// seeded shuffle.
fn assign(scored: &mut [(f64, usize, usize)], rng: &mut ChaCha8Rng) -> BTreeSet<(usize, usize)> {
    scored.shuffle(rng);
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut used_s = BTreeSet::new();
    let mut used_t = BTreeSet::new();
    let mut out = BTreeSet::new();
    for &(_, s, t) in scored.iter() {
        if used_s.contains(&s) || used_t.contains(&t) {
            continue;
        }
        used_s.insert(s);
        used_t.insert(t);
        out.insert((s, t));
    }
    out
}

/// Runs the matcher ensemble and turns its distinct outputs into a candidate
/// result set with equal probabilities.
pub fn gen_demo_crs(source: &Schema, target: &Schema, seed: u64) -> Result<CandidateResultSet> {
    if source.attributes.len() < 2 || target.attributes.len() < 2 {
        return Err(Error::MalformedInput(
            "both schemas need at least two attributes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results: Vec<BTreeSet<(usize, usize)>> = Vec::new();
    for (matcher, threshold) in ensemble() {
        let mut scored = Vec::new();
        for (i, s) in source.attributes.iter().enumerate() {
            for (j, t) in target.attributes.iter().enumerate() {
                let score = matcher(&s.name, &t.name);
                if score >= threshold && score > 0.0 {
                    scored.push((score, i, j));
                }
            }
        }
        let pairs = assign(&mut scored, &mut rng);
        if !pairs.is_empty() && !results.contains(&pairs) {
            results.push(pairs);
        }
    }
    if results.is_empty() {
        return Err(Error::DegenerateSchemas);
    }

    let all: BTreeSet<(usize, usize)> = results.iter().flatten().copied().collect();
    let ids: HashMap<(usize, usize), String> = all
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, format!("c{}", k + 1)))
        .collect();
    let attr = |side: SchemaSide, a: &SchemaAttribute| {
        AttributeRef::new(side, a.name.clone()).with_values(a.values.iter().cloned())
    };
    let correspondences = all
        .iter()
        .map(|&(i, j)| {
            Correspondence::new(
                ids[&(i, j)].clone(),
                vec![attr(SchemaSide::Source, &source.attributes[i])],
                vec![attr(SchemaSide::Target, &target.attributes[j])],
            )
        })
        .collect();
    let p = 1.0 / results.len() as f64;
    let candidates = results
        .iter()
        .enumerate()
        .map(|(k, pairs)| CandidateResult {
            id: format!("s{}", k + 1),
            correspondence_ids: pairs.iter().map(|p| ids[p].clone()).collect(),
            probability: p,
        })
        .collect();
    let crs = CandidateResultSet {
        source_schema: source.name.clone(),
        target_schema: target.name.clone(),
        correspondences,
        candidates,
    };
    // catches anything the construction above got wrong
    build_view_set(&crs)?;
    Ok(crs)
}

// ---------------------------------------------------------------------------
// Valentine outputs
// ---------------------------------------------------------------------------

/// One scored column pair from a matcher run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub source: String,
    pub target: String,
    pub score: f64,
}

#[derive(Deserialize)]
struct ListedPair {
    source: String,
    target: String,
    score: f64,
}

/// Parses one Valentine match dump. Two layouts are accepted: an object keyed
/// by the Python tuple repr, `"(('table_1', 'a'), ('table_2', 'b'))": 0.8`,
/// or a list of `{"source", "target", "score"}` objects.
pub fn parse_valentine_matches(text: &str) -> std::result::Result<Vec<ScoredPair>, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    match value {
        serde_json::Value::Object(map) => {
            let re = regex::Regex::new(
                r#"^\(\(\s*['"][^'"]*['"]\s*,\s*['"]([^'"]*)['"]\s*\)\s*,\s*\(\s*['"][^'"]*['"]\s*,\s*['"]([^'"]*)['"]\s*\)\s*\)$"#,
            )
            .expect("valid regex");
            map.into_iter()
                .map(|(k, v)| {
                    let caps = re.captures(k.trim()).ok_or_else(|| format!("unrecognised key {k:?}"))?;
                    let score = v.as_f64().ok_or_else(|| format!("non-numeric score for {k:?}"))?;
                    Ok(ScoredPair {
                        source: caps[1].to_string(),
                        target: caps[2].to_string(),
                        score,
                    })
                })
                .collect()
        }
        serde_json::Value::Array(_) => {
            let listed: Vec<ListedPair> = serde_json::from_value(value).map_err(|e| e.to_string())?;
            Ok(listed
                .into_iter()
                .map(|p| ScoredPair {
                    source: p.source,
                    target: p.target,
                    score: p.score,
                })
                .collect())
        }
        _ => Err("expected a JSON object or array".into()),
    }
}

/// Builds a candidate result set from several matcher outputs. Each output
/// becomes one candidate: pairs scoring at least `threshold`, assigned 1:1 in
/// descending score order (ties by name). Identical candidates are merged and
/// all candidates get equal probability.
pub fn valentine_crs(
    outputs: &[Vec<ScoredPair>],
    threshold: f64,
    source_schema: &str,
    target_schema: &str,
) -> Result<CandidateResultSet> {
    let mut results: Vec<BTreeSet<(String, String)>> = Vec::new();
    for output in outputs {
        let mut scored: Vec<&ScoredPair> = output.iter().filter(|p| p.score >= threshold).collect();
        scored.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| (&a.source, &a.target).cmp(&(&b.source, &b.target)))
        });
        let mut used_s = BTreeSet::new();
        let mut used_t = BTreeSet::new();
        let mut pairs = BTreeSet::new();
        for p in scored {
            if used_s.contains(&p.source) || used_t.contains(&p.target) {
                continue;
            }
            used_s.insert(p.source.clone());
            used_t.insert(p.target.clone());
            pairs.insert((p.source.clone(), p.target.clone()));
        }
        if !pairs.is_empty() && !results.contains(&pairs) {
            results.push(pairs);
        }
    }
    if results.is_empty() {
        return Err(Error::DegenerateSchemas);
    }
    let all: BTreeSet<&(String, String)> = results.iter().flatten().collect();
    let ids: HashMap<&(String, String), String> = all
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, format!("c{}", k + 1)))
        .collect();
    let correspondences = all
        .iter()
        .map(|&p| {
            Correspondence::new(
                ids[p].clone(),
                vec![AttributeRef::new(SchemaSide::Source, p.0.clone())],
                vec![AttributeRef::new(SchemaSide::Target, p.1.clone())],
            )
        })
        .collect();
    let prob = 1.0 / results.len() as f64;
    let candidates = results
        .iter()
        .enumerate()
        .map(|(k, pairs)| CandidateResult {
            id: format!("s{}", k + 1),
            correspondence_ids: pairs.iter().map(|p| ids[p].clone()).collect(),
            probability: prob,
        })
        .collect();
    let crs = CandidateResultSet {
        source_schema: source_schema.to_string(),
        target_schema: target_schema.to_string(),
        correspondences,
        candidates,
    };
    build_view_set(&crs)?;
    Ok(crs)
}

/// Reads matcher dumps from disk and calls [`valentine_crs`].
pub fn load_valentine_crs(
    paths: &[PathBuf],
    threshold: f64,
    source_schema: &str,
    target_schema: &str,
) -> Result<CandidateResultSet> {
    let mut outputs = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let pairs = parse_valentine_matches(&text)
            .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))?;
        outputs.push(pairs);
    }
    valentine_crs(&outputs, threshold, source_schema, target_schema)
}
