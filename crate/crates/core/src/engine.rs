//! The multi-round select / verify / update loop.
//!
//! The total budget is split into `rounds_k` equal shares; whatever a round leaves
//! unspent carries into the next one, and the final round receives everything
//! that remains (including the remainder of the integer division).

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::rank_candidates;
use crate::model::{build_view_set, validate_crs, CandidateResultSet, ViewSet};
use crate::objective::{view_entropy, EvalMode, PlanningAccuracy, DEFAULT_EXACT_CAP};
use crate::oracle::{Answer, Oracle};
use crate::selection::{derive_seed, select, view_costs, CostModel, McFallback, SelectionProblem, Strategy};
use crate::update::apply_answer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicy {
    #[default]
    Abort,
    /// Log the failure, leave the distribution unchanged, keep going.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub total_budget: u64,
    pub rounds_k: u32,
    pub strategy: Strategy,
    pub planning_accuracy: f64,
    pub seed: u64,
    pub exact_cap: u32,
    /// Stop once the entropy (nats) is at or below this value.
    pub stop_entropy: Option<f64>,
    pub allow_requery: bool,
    pub error_policy: ErrorPolicy,
    /// Monte Carlo samples used when a set exceeds `exact_cap`; `None` makes
    /// that an error.
    pub mc_samples: Option<usize>,
    pub chars_per_token: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            total_budget: 0,
            rounds_k: 1,
            strategy: Strategy::Greedy,
            planning_accuracy: crate::objective::DEFAULT_PLANNING_ACCURACY,
            seed: 0,
            exact_cap: DEFAULT_EXACT_CAP,
            stop_entropy: None,
            allow_requery: false,
            error_policy: ErrorPolicy::Abort,
            mc_samples: Some(4096),
            chars_per_token: crate::selection::DEFAULT_CHARS_PER_TOKEN,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds_k == 0 {
            return Err(Error::MalformedInput("rounds_k must be at least 1".into()));
        }
        if !(self.planning_accuracy > 0.5 && self.planning_accuracy <= 1.0) {
            return Err(Error::MalformedInput(format!(
                "planning accuracy {} outside (0.5, 1.0]",
                self.planning_accuracy
            )));
        }
        if let Some(t) = self.stop_entropy {
            if t.is_nan() || t < 0.0 {
                return Err(Error::MalformedInput(format!("stop entropy {t} must be >= 0")));
            }
        }
        if self.mc_samples == Some(0) {
            return Err(Error::MalformedInput("mc_samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub corr_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: u32,
    /// Budget available to this round, carry-over included.
    pub round_budget: u64,
    pub selected: Vec<String>,
    pub costs: Vec<u64>,
    /// Planner's expected reduction for `selected` (nats).
    pub expected_reduction: f64,
    pub answers: Vec<Answer>,
    pub skipped: Vec<SkippedQuery>,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub distribution_after: Vec<f64>,
    pub spent_total: u64,
    pub remaining_budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RoundsCompleted,
    /// Every correspondence that could still change the distribution was asked.
    AllAsked,
    BudgetBelowCheapest,
    EntropyThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedView {
    pub rank: usize,
    pub view: usize,
    pub candidates: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub correspondence_ids: Vec<String>,
    /// Candidate ids merged into each view.
    pub views: Vec<Vec<String>>,
    pub prior: Vec<f64>,
    pub prior_entropy: f64,
    pub rounds: Vec<RoundRecord>,
    pub final_distribution: Vec<f64>,
    pub final_entropy: f64,
    pub ranking: Vec<RankedView>,
    pub spent: u64,
    pub stop_reason: StopReason,
}

impl RunReport {
    pub fn to_json_string(&self) -> String {
        crate::to_canonical_json(self)
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    /// Rebuilds the final view set from the recorded rows of `crs`.
    pub fn final_view_set(&self, crs: &CandidateResultSet) -> Result<ViewSet> {
        build_view_set(crs)?.with_probabilities(self.final_distribution.clone())
    }

    /// `(cumulative spend, entropy)` after each round, starting at `(0, prior)`.
    pub fn entropy_curve(&self) -> Vec<(u64, f64)> {
        std::iter::once((0, self.prior_entropy))
            .chain(self.rounds.iter().map(|r| (r.spent_total, r.entropy_after)))
            .collect()
    }
}

/// One line of the optional event stream.
#[derive(Debug, Clone, Serialize)]
struct QueryEvent<'a> {
    round: u32,
    corr_id: &'a str,
    cost: u64,
    verdict: Option<bool>,
    confidence: Option<f64>,
    error: Option<String>,
    entropy_after: f64,
}

pub fn run(cfg: &RunConfig, crs: &CandidateResultSet, oracle: &dyn Oracle) -> Result<RunReport> {
    run_with_events(cfg, crs, oracle, None)
}

/// Like [`run`], also writing one JSON line per query to `events`.
pub fn run_with_events(
    cfg: &RunConfig,
    crs: &CandidateResultSet,
    oracle: &dyn Oracle,
    mut events: Option<&mut dyn Write>,
) -> Result<RunReport> {
    cfg.validate()?;
    let report = validate_crs(crs);
    if !report.is_ok() {
        return Err(Error::MalformedDistribution(report.errors.join("; ")));
    }
    let prior = build_view_set(crs)?;
    let cost_model = CostModel {
        chars_per_token: cfg.chars_per_token,
    };
    let costs = view_costs(crs, &prior, &cost_model)?;
    let accuracy = PlanningAccuracy::new(cfg.planning_accuracy)?;
    let ids = prior.correspondence_ids().to_vec();

    let share = cfg.total_budget / cfg.rounds_k as u64;
    let mut vs = prior.clone();
    let mut asked: BTreeSet<usize> = BTreeSet::new();
    let mut spent = 0u64;
    let mut rounds = Vec::new();
    let mut stop = StopReason::RoundsCompleted;

    for round in 1..=cfg.rounds_k {
        let entropy_before = view_entropy(&vs);
        if cfg.stop_entropy.is_some_and(|t| entropy_before <= t) {
            stop = StopReason::EntropyThreshold;
            break;
        }
        // a correspondence every live view agrees on carries no information
        let pool: Vec<usize> = (0..ids.len())
            .filter(|c| (cfg.allow_requery || !asked.contains(c)) && !vs.is_constant(*c))
            .collect();
        if pool.is_empty() {
            stop = StopReason::AllAsked;
            break;
        }
        let remaining = cfg.total_budget - spent;
        let cheapest = pool.iter().map(|&c| costs[c]).min().unwrap_or(u64::MAX);
        if remaining < cheapest {
            stop = StopReason::BudgetBelowCheapest;
            break;
        }
        let round_budget = if round == cfg.rounds_k {
            remaining
        } else {
            (share * round as u64).saturating_sub(spent)
        };

        let pool_ids: Vec<&str> = pool.iter().map(|&c| ids[c].as_str()).collect();
        let problem = SelectionProblem::new(&vs, &costs, round_budget, &accuracy)?
            .restrict_to(&pool_ids)?
            .with_mode(EvalMode::Exact { cap: cfg.exact_cap })
            .with_fallback(cfg.mc_samples.map(|samples| McFallback {
                samples,
                seed: derive_seed(cfg.seed, &[round as usize, 1]),
            }));
        let choice = select(&problem, cfg.strategy, derive_seed(cfg.seed, &[round as usize]))?;

        let selected_cols = vs.indices_of(&choice.chosen)?;
        let round_costs: Vec<u64> = selected_cols.iter().map(|&c| costs[c]).collect();
        let batch: Vec<_> = choice
            .chosen
            .iter()
            .map(|id| {
                crs.correspondence(id)
                    .ok_or_else(|| Error::UnknownCorrespondence(id.clone()))
            })
            .collect::<Result<_>>()?;
        let results = oracle.verify_batch(&batch);

        let mut answers = Vec::new();
        let mut skipped = Vec::new();
        for ((id, &col), result) in choice.chosen.iter().zip(&selected_cols).zip(results) {
            spent += costs[col];
            asked.insert(col);
            let outcome = result.and_then(|a| {
                if a.corr_id != *id {
                    return Err(Error::MalformedInput(format!(
                        "oracle answered `{}` when asked about `{id}`",
                        a.corr_id
                    )));
                }
                let next = apply_answer(&vs, &a)?;
                Ok((a, next))
            });
            let (verdict, confidence, error) = match outcome {
                Ok((a, next)) => {
                    vs = next;
                    let fields = (Some(a.verdict), Some(a.confidence), None);
                    answers.push(a);
                    fields
                }
                Err(e) if cfg.error_policy == ErrorPolicy::Skip => {
                    log::warn!("round {round}: skipping `{id}`: {e}");
                    skipped.push(SkippedQuery {
                        corr_id: id.clone(),
                        error: e.to_string(),
                    });
                    (None, None, Some(e.to_string()))
                }
                Err(e) => return Err(e),
            };
            if let Some(w) = events.as_deref_mut() {
                let event = QueryEvent {
                    round,
                    corr_id: id,
                    cost: costs[col],
                    verdict,
                    confidence,
                    error,
                    entropy_after: view_entropy(&vs),
                };
                let line = serde_json::to_string(&event).expect("serializable event");
                writeln!(w, "{line}").map_err(|e| Error::io("<event stream>", e))?;
            }
        }

        rounds.push(RoundRecord {
            round,
            round_budget,
            selected: choice.chosen.clone(),
            costs: round_costs,
            expected_reduction: choice.objective_value,
            answers,
            skipped,
            entropy_before,
            entropy_after: view_entropy(&vs),
            distribution_after: vs.probabilities().to_vec(),
            spent_total: spent,
            remaining_budget: cfg.total_budget - spent,
        });
    }

    let ranking = rank_candidates(&vs)
        .into_iter()
        .enumerate()
        .map(|(i, v)| RankedView {
            rank: i + 1,
            view: v,
            candidates: vs.members()[v].clone(),
            probability: vs.probabilities()[v],
        })
        .collect();
    Ok(RunReport {
        config: cfg.clone(),
        correspondence_ids: ids,
        views: prior.members().to_vec(),
        prior: prior.probabilities().to_vec(),
        prior_entropy: view_entropy(&prior),
        rounds,
        final_distribution: vs.probabilities().to_vec(),
        final_entropy: view_entropy(&vs),
        ranking,
        spent,
        stop_reason: stop,
    })
}
