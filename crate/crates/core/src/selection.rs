//! Budgeted choice of which correspondences to verify next.
//!
//! Three strategies share one objective (expected entropy reduction of the view
//! set, see [`crate::objective`]):
//! - [`brute_select`]: exhaustive search over all feasible subsets, optimal;
//! - [`greedy_select`]: partial enumeration of all subsets up to size two, plus
//!   cost-effectiveness greedy growth from every feasible size-three seed, which
//!   gives a `(1 − 1/e)` approximation for monotone submodular objectives under a
//!   knapsack budget;
//! - [`random_select`]: seeded shuffle, affordable items in order.
//!
//! Ties are broken by smaller cost, then by the lexicographically smaller sorted
//! id tuple.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CandidateResultSet, Correspondence, ViewSet};
use crate::objective::{view_entropy, EvalMode, FamilyTable, PlanningAccuracy};

/// Largest candidate pool [`brute_select`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;
pub const DEFAULT_CHARS_PER_TOKEN: u32 = 4;
/// Objective values closer than this are treated as equal.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Random,
    Brute,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Greedy => "greedy",
            Strategy::Random => "random",
            Strategy::Brute => "brute",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "random" => Ok(Strategy::Random),
            "brute" => Ok(Strategy::Brute),
            other => Err(Error::MalformedInput(format!(
                "unknown strategy `{other}` (expected greedy, random or brute)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: Vec<String>,
    /// Expected reduction in nats.
    pub objective_value: f64,
    pub cost_used: u64,
    pub strategy: Strategy,
    /// Objective computations performed (memoized repeats excluded).
    pub evaluations: u64,
}

/// Token pricing. Explicit per-correspondence costs always win; otherwise the
/// cost is estimated from the text that would be sent to the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub chars_per_token: u32,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            chars_per_token: DEFAULT_CHARS_PER_TOKEN,
        }
    }
}

/// Explicit cost if present; otherwise `ceil(chars / chars_per_token)` over all
/// attribute names and up to three sample values per attribute, at least 1.
pub fn token_cost(c: &Correspondence, model: &CostModel) -> u64 {
    if let Some(cost) = c.cost {
        return cost;
    }
    let chars: usize = c
        .attributes()
        .map(|a| {
            a.name.chars().count()
                + a.sample_values
                    .iter()
                    .take(3)
                    .map(|v| v.chars().count())
                    .sum::<usize>()
        })
        .sum();
    let per = model.chars_per_token.max(1) as usize;
    (chars.div_ceil(per) as u64).max(1)
}

/// Costs aligned with `vs.correspondence_ids()`.
pub fn view_costs(crs: &CandidateResultSet, vs: &ViewSet, model: &CostModel) -> Result<Vec<u64>> {
    vs.correspondence_ids()
        .iter()
        .map(|id| {
            crs.correspondence(id)
                .map(|c| token_cost(c, model))
                .ok_or_else(|| Error::UnknownCorrespondence(id.clone()))
        })
        .collect()
}

/// Monte Carlo settings used when exact evaluation of a set exceeds its cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McFallback {
    pub samples: usize,
    pub seed: u64,
}

/// One instance of the correspondence selection problem.
#[derive(Debug, Clone)]
pub struct SelectionProblem<'a> {
    views: &'a ViewSet,
    costs: &'a [u64],
    /// eligible columns, sorted by correspondence id
    pool: Vec<usize>,
    budget: u64,
    accuracy: &'a PlanningAccuracy,
    mode: EvalMode,
    fallback: Option<McFallback>,
}

impl<'a> SelectionProblem<'a> {
    /// All correspondences of `views` are eligible; `costs` is aligned with
    /// `views.correspondence_ids()`.
    pub fn new(
        views: &'a ViewSet,
        costs: &'a [u64],
        budget: u64,
        accuracy: &'a PlanningAccuracy,
    ) -> Result<Self> {
        if costs.len() != views.num_correspondences() {
            return Err(Error::MalformedInput(format!(
                "{} costs for {} correspondences",
                costs.len(),
                views.num_correspondences()
            )));
        }
        let mut problem = Self {
            views,
            costs,
            pool: (0..views.num_correspondences()).collect(),
            budget,
            accuracy,
            mode: EvalMode::exact(),
            fallback: None,
        };
        problem.sort_pool();
        Ok(problem)
    }

    /// Restricts the candidate pool to the given ids.
    pub fn restrict_to<S: AsRef<str>>(mut self, ids: &[S]) -> Result<Self> {
        self.pool = self.views.indices_of(ids)?;
        self.pool.dedup();
        self.sort_pool();
        Ok(self)
    }

    pub fn with_mode(mut self, mode: EvalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_fallback(mut self, fallback: Option<McFallback>) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn pool_ids(&self) -> Vec<&str> {
        self.pool.iter().map(|&c| self.id(c)).collect()
    }

    fn sort_pool(&mut self) {
        let ids = self.views.correspondence_ids();
        self.pool.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        self.pool.dedup();
    }

    fn id(&self, col: usize) -> &str {
        &self.views.correspondence_ids()[col]
    }

    fn cost_of(&self, set: &[usize]) -> u64 {
        set.iter().map(|&c| self.costs[c]).sum()
    }
}

/// Memoized objective evaluation over column sets.
///
/// The objective depends only on the multiset of (truth column, accuracy)
/// pairs, so the cache is keyed by that multiset: correspondences with identical
/// columns share entries.
struct Evaluator<'p, 'a> {
    problem: &'p SelectionProblem<'a>,
    prior_entropy: f64,
    /// pattern id per column
    pattern: Vec<u32>,
    cache: HashMap<Vec<(u32, u64)>, f64>,
    evaluations: u64,
}

impl<'p, 'a> Evaluator<'p, 'a> {
    fn new(problem: &'p SelectionProblem<'a>) -> Self {
        let mut ids: HashMap<Vec<bool>, u32> = HashMap::new();
        let pattern = (0..problem.views.num_correspondences())
            .map(|c| {
                let next = ids.len() as u32;
                *ids.entry(problem.views.column(c)).or_insert(next)
            })
            .collect();
        Self {
            problem,
            prior_entropy: view_entropy(problem.views),
            pattern,
            cache: HashMap::new(),
            evaluations: 0,
        }
    }

    fn key(set: &[usize]) -> Vec<usize> {
        let mut key = set.to_vec();
        key.sort_unstable();
        key
    }

    fn cache_key(&self, set: &[usize]) -> Vec<(u32, u64)> {
        let mut key: Vec<(u32, u64)> = set
            .iter()
            .map(|&c| (self.pattern[c], self.accuracy(c).to_bits()))
            .collect();
        key.sort_unstable();
        key
    }

    fn cached(&self, set: &[usize]) -> Option<f64> {
        if set.is_empty() {
            return Some(0.0);
        }
        self.cache.get(&self.cache_key(set)).copied()
    }

    fn accuracy(&self, col: usize) -> f64 {
        self.problem.accuracy.get(self.problem.id(col))
    }

    /// Family table for `set` when exact evaluation fits, `None` when the
    /// Monte Carlo fallback applies.
    fn table(&self, set: &[usize]) -> Result<Option<FamilyTable>> {
        let mut table = FamilyTable::new(self.problem.views);
        for &c in set {
            match self.extend(&table, c)? {
                Some(t) => table = t,
                None => return Ok(None),
            }
        }
        Ok(Some(table))
    }

    fn extend(&self, table: &FamilyTable, col: usize) -> Result<Option<FamilyTable>> {
        match self.problem.mode {
            EvalMode::Exact { cap } => {
                match table.extend(self.problem.views, col, self.accuracy(col), cap) {
                    Ok(t) => Ok(Some(t)),
                    Err(Error::CapExceeded { .. }) if self.problem.fallback.is_some() => Ok(None),
                    Err(e) => Err(e),
                }
            }
            EvalMode::MonteCarlo { .. } => Ok(None),
        }
    }

    /// Expected reduction of `set`; `table` must be the set's family table
    /// when one is available.
    fn value_with(&mut self, set: &[usize], table: Option<&FamilyTable>) -> Result<f64> {
        if set.is_empty() {
            return Ok(0.0);
        }
        let key = self.cache_key(set);
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        self.evaluations += 1;
        let neg = match table {
            Some(t) => t.neg_conditional_entropy(self.problem.views),
            None => self.sampled(&Self::key(set))?,
        };
        let v = self.prior_entropy + neg;
        self.cache.insert(key, v);
        Ok(v)
    }

    fn value(&mut self, set: &[usize]) -> Result<f64> {
        if let Some(v) = self.cached(set) {
            return Ok(v);
        }
        let key = Self::key(set);
        let table = self.table(&key)?;
        self.value_with(&key, table.as_ref())
    }

    fn sampled(&self, key: &[usize]) -> Result<f64> {
        let (samples, seed) = match (self.problem.mode, self.problem.fallback) {
            (EvalMode::MonteCarlo { samples, seed }, _) => (samples, seed),
            (_, Some(fb)) => (fb.samples, fb.seed),
            (EvalMode::Exact { cap }, None) => {
                return Err(Error::CapExceeded { needed: 0, cap });
            }
        };
        let accs: Vec<f64> = key.iter().map(|&c| self.accuracy(c)).collect();
        let seed = derive_seed(seed, key);
        crate::objective::neg_conditional_entropy_cols(
            self.problem.views,
            key,
            &accs,
            EvalMode::MonteCarlo { samples, seed },
        )
    }
}

/// Stable mix of a base seed with a column set (splitmix64 steps).
pub fn derive_seed(base: u64, items: &[usize]) -> u64 {
    let mut h = splitmix(base ^ 0x9e37_79b9_7f4a_7c15);
    for &i in items {
        h = splitmix(h ^ (i as u64).wrapping_add(0x632b_e59b_d9b4_e019));
    }
    h
}

pub(crate) fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone)]
struct Candidate {
    set: Vec<usize>,
    value: f64,
    cost: u64,
}

impl Candidate {
    fn empty() -> Self {
        Self {
            set: Vec::new(),
            value: 0.0,
            cost: 0,
        }
    }
}

/// Total order used for "best": higher value, then lower cost, then smaller id tuple.
fn compare(problem: &SelectionProblem<'_>, a: &Candidate, b: &Candidate) -> Ordering {
    if (a.value - b.value).abs() > TIE_EPSILON {
        return a.value.partial_cmp(&b.value).unwrap_or(Ordering::Equal);
    }
    match b.cost.cmp(&a.cost) {
        Ordering::Equal => {}
        other => return other,
    }
    let ids = |set: &[usize]| {
        let mut v: Vec<&str> = set.iter().map(|&c| problem.id(c)).collect();
        v.sort_unstable();
        v
    };
    ids(&b.set).cmp(&ids(&a.set))
}

fn finish(
    problem: &SelectionProblem<'_>,
    best: Candidate,
    strategy: Strategy,
    evaluations: u64,
) -> SelectionResult {
    let mut chosen: Vec<String> = best.set.iter().map(|&c| problem.id(c).to_string()).collect();
    if strategy != Strategy::Random {
        chosen.sort();
    }
    SelectionResult {
        chosen,
        objective_value: best.value.max(0.0),
        cost_used: best.cost,
        strategy,
        evaluations,
    }
}

/// Exhaustive search over every subset of the pool within budget.
pub fn brute_select(problem: &SelectionProblem<'_>) -> Result<SelectionResult> {
    if problem.pool.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: problem.pool.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut eval = Evaluator::new(problem);
    let mut best = Candidate::empty();
    let root = Some(FamilyTable::new(problem.views));
    let mut current = Vec::new();
    brute_dfs(problem, &mut eval, 0, &mut current, 0, root.as_ref(), &mut best)?;
    let evaluations = eval.evaluations;
    Ok(finish(problem, best, Strategy::Brute, evaluations))
}

fn brute_dfs(
    problem: &SelectionProblem<'_>,
    eval: &mut Evaluator<'_, '_>,
    start: usize,
    current: &mut Vec<usize>,
    cost: u64,
    table: Option<&FamilyTable>,
    best: &mut Candidate,
) -> Result<()> {
    for i in start..problem.pool.len() {
        let col = problem.pool[i];
        let next_cost = cost + problem.costs[col];
        if next_cost > problem.budget {
            continue;
        }
        let next_table = match table {
            Some(t) => eval.extend(t, col)?,
            None => None,
        };
        current.push(col);
        let value = eval.value_with(current, next_table.as_ref())?;
        let cand = Candidate {
            set: current.clone(),
            value,
            cost: next_cost,
        };
        if compare(problem, &cand, best) == Ordering::Greater {
            *best = cand;
        }
        brute_dfs(problem, eval, i + 1, current, next_cost, next_table.as_ref(), best)?;
        current.pop();
    }
    Ok(())
}

/// Greedy selection with partial enumeration.
///
/// 1. `T1`: best feasible subset of size at most two.
/// 2. For every feasible size-three seed, repeatedly take the remaining item with
///    the largest marginal gain per token (zero-cost items rank first), add it if
///    it still fits the budget, and drop it from consideration either way. `T2` is
///    the best grown set.
/// 3. Return the better of `T1` and `T2` by objective value.
pub fn greedy_select(problem: &SelectionProblem<'_>) -> Result<SelectionResult> {
    let mut eval = Evaluator::new(problem);
    let pool = &problem.pool;
    let n = pool.len();

    let mut t1 = Candidate::empty();
    for i in 0..n {
        for j in i..n {
            let set: Vec<usize> = if i == j {
                vec![pool[i]]
            } else {
                vec![pool[i], pool[j]]
            };
            let cost = problem.cost_of(&set);
            if cost > problem.budget {
                continue;
            }
            let value = eval.value(&set)?;
            let cand = Candidate { set, value, cost };
            if compare(problem, &cand, &t1) == Ordering::Greater {
                t1 = cand;
            }
        }
    }

    let mut t2 = Candidate::empty();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let seed = vec![pool[i], pool[j], pool[k]];
                let cost = problem.cost_of(&seed);
                if cost > problem.budget {
                    continue;
                }
                let grown = grow(problem, &mut eval, seed, cost)?;
                if grown.value > t2.value + TIE_EPSILON {
                    t2 = grown;
                }
            }
        }
    }

    let best = if compare(problem, &t2, &t1) == Ordering::Greater {
        t2
    } else {
        t1
    };
    let evaluations = eval.evaluations;
    Ok(finish(problem, best, Strategy::Greedy, evaluations))
}

fn grow(
    problem: &SelectionProblem<'_>,
    eval: &mut Evaluator<'_, '_>,
    seed: Vec<usize>,
    seed_cost: u64,
) -> Result<Candidate> {
    let mut set = seed;
    let mut cost = seed_cost;
    let mut table = eval.table(&set)?;
    let mut value = eval.value_with(&set, table.as_ref())?;
    let mut rest: Vec<usize> = problem
        .pool
        .iter()
        .copied()
        .filter(|c| !set.contains(c))
        .collect();

    loop {
        // An item that does not fit now never will, and discarding it before or
        // after it wins the argmax leads to the same additions.
        rest.retain(|&c| cost + problem.costs[c] <= problem.budget);
        if rest.is_empty() {
            break;
        }
        // argmax of gain / cost; pool order is lexicographic, so the first
        // maximum wins ties
        let mut best: Option<(usize, f64, f64)> = None;
        for (pos, &c) in rest.iter().enumerate() {
            set.push(c);
            let v = match eval.cached(&set) {
                Some(v) => v,
                None => {
                    let ext = match &table {
                        Some(t) => eval.extend(t, c)?,
                        None => None,
                    };
                    eval.value_with(&set, ext.as_ref())?
                }
            };
            set.pop();
            let gain = v - value;
            let ratio = match problem.costs[c] {
                0 => f64::INFINITY,
                w => gain / w as f64,
            };
            let better = match &best {
                None => true,
                Some((_, r, _)) => ratio > *r + TIE_EPSILON || (r.is_finite() && ratio == f64::INFINITY),
            };
            if better {
                best = Some((pos, ratio, v));
            }
        }
        let (pos, _, v) = best.expect("rest is non-empty");
        let c = rest.remove(pos);
        table = match &table {
            Some(t) => eval.extend(t, c)?,
            None => None,
        };
        set.push(c);
        cost += problem.costs[c];
        value = v;
    }
    Ok(Candidate { set, value, cost })
}

/// Seeded shuffle of the pool; items are taken in shuffled order whenever they
/// still fit the remaining budget.
pub fn random_select(problem: &SelectionProblem<'_>, seed: u64) -> Result<SelectionResult> {
    let mut order = problem.pool.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut set = Vec::new();
    let mut cost = 0u64;
    for c in order {
        if cost + problem.costs[c] <= problem.budget {
            cost += problem.costs[c];
            set.push(c);
        }
    }
    let mut eval = Evaluator::new(problem);
    let value = eval.value(&set)?;
    let evaluations = eval.evaluations;
    Ok(finish(
        problem,
        Candidate { set, value, cost },
        Strategy::Random,
        evaluations,
    ))
}

/// Dispatches on `strategy`; `seed` is only used by the random strategy.
pub fn select(problem: &SelectionProblem<'_>, strategy: Strategy, seed: u64) -> Result<SelectionResult> {
    match strategy {
        Strategy::Greedy => greedy_select(problem),
        Strategy::Brute => brute_select(problem),
        Strategy::Random => random_select(problem, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::employee_crs;
    use crate::model::{build_view_set, AttributeRef, SchemaSide};
    use crate::objective::expected_reduction;

    fn employee() -> ViewSet {
        build_view_set(&employee_crs()).unwrap()
    }

    #[test]
    fn explicit_cost_passthrough() {
        let c = Correspondence::new(
            "x",
            vec![AttributeRef::new(SchemaSide::Source, "ID")],
            vec![AttributeRef::new(SchemaSide::Target, "EmployeeID")],
        );
        assert_eq!(token_cost(&c.clone().with_cost(12), &CostModel::default()), 12);
        assert_eq!(token_cost(&c, &CostModel::default()), 3);
        let tiny = Correspondence::new(
            "y",
            vec![AttributeRef::new(SchemaSide::Source, "a")],
            vec![AttributeRef::new(SchemaSide::Target, "b")],
        );
        assert_eq!(token_cost(&tiny, &CostModel::default()), 1);
    }

    #[test]
    fn heuristic_counts_first_three_values() {
        let c = Correspondence::new(
            "x",
            vec![AttributeRef::new(SchemaSide::Source, "ab").with_values(["1234", "5678", "9", "ignored"])],
            vec![AttributeRef::new(SchemaSide::Target, "cd")],
        );
        // 2 + 4 + 4 + 1 + 2 = 13 chars
        assert_eq!(token_cost(&c, &CostModel { chars_per_token: 4 }), 4);
        assert_eq!(token_cost(&c, &CostModel { chars_per_token: 13 }), 1);
    }

    #[test]
    fn brute_single_budget_tie_breaks_by_id() {
        let vs = employee();
        let costs = vec![1; 6];
        let acc = PlanningAccuracy::new(0.8).unwrap();
        // one noisy query: H(answer) - H(noise), answer true w.p. m*p + (1-m)(1-p)
        let h = |x: f64| -(x * x.ln() + (1.0 - x) * (1.0 - x).ln());
        let single = |m: f64| h(m * 0.8 + (1.0 - m) * 0.2) - h(0.8);
        let p = SelectionProblem::new(&vs, &costs, 1, &acc).unwrap();
        let r = brute_select(&p).unwrap();
        // c3 (marginal 0.75) and c5 (0.25) tie above c1 / c4 (0.80)
        assert_eq!(r.chosen, vec!["c3"]);
        assert!((r.objective_value - single(0.75)).abs() < 1e-12);
        assert!((r.objective_value - 0.1470).abs() < 1e-4);
        let c5 = expected_reduction(&vs, &["c5"], &acc, EvalMode::exact()).unwrap();
        assert!((c5 - r.objective_value).abs() < 1e-12);
        // between the two identical columns the smaller id wins
        let p = p.restrict_to(&["c4", "c1"]).unwrap();
        let r = brute_select(&p).unwrap();
        assert_eq!(r.chosen, vec!["c1"]);
        assert!((r.objective_value - single(0.80)).abs() < 1e-12);
        assert!((r.objective_value - 0.1265).abs() < 1e-4);
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let vs = employee();
        let costs = vec![1; 6];
        let acc = PlanningAccuracy::default();
        let p = SelectionProblem::new(&vs, &costs, 0, &acc).unwrap();
        for s in [Strategy::Brute, Strategy::Greedy, Strategy::Random] {
            let r = select(&p, s, 1).unwrap();
            assert!(r.chosen.is_empty());
            assert_eq!(r.objective_value, 0.0);
            assert_eq!(r.cost_used, 0);
        }
    }

    #[test]
    fn perfect_oracle_full_budget_drops_redundant_columns() {
        let vs = employee();
        let costs = vec![1; 6];
        let acc = PlanningAccuracy::new(1.0).unwrap();
        let p = SelectionProblem::new(&vs, &costs, 6, &acc).unwrap();
        let r = brute_select(&p).unwrap();
        assert!((r.objective_value - view_entropy(&vs)).abs() < 1e-12);
        assert_eq!(r.chosen, vec!["c1", "c3"]);
        for id in &r.chosen {
            assert!(!vs.is_constant(vs.index_of(id).unwrap()));
        }
    }

    #[test]
    fn greedy_matches_brute_on_table() {
        let vs = employee();
        let costs = vec![1; 6];
        let acc = PlanningAccuracy::new(0.9).unwrap();
        let p = SelectionProblem::new(&vs, &costs, 6, &acc).unwrap();
        let g = greedy_select(&p).unwrap();
        let b = brute_select(&p).unwrap();
        assert!((g.objective_value - b.objective_value).abs() < 1e-9);
    }

    #[test]
    fn greedy_equals_brute_on_three_items() {
        let vs = employee();
        let costs = vec![2, 1, 3, 1, 2, 1];
        let acc = PlanningAccuracy::new(0.85).unwrap();
        for budget in 0..=7 {
            let p = SelectionProblem::new(&vs, &costs, budget, &acc)
                .unwrap()
                .restrict_to(&["c1", "c3", "c5"])
                .unwrap();
            let g = greedy_select(&p).unwrap();
            let b = brute_select(&p).unwrap();
            assert_eq!(g.chosen, b.chosen, "budget {budget}");
            assert_eq!(g.cost_used, b.cost_used);
        }
    }

    #[test]
    fn brute_rejects_large_pools() {
        let n = 25;
        let ids: Vec<String> = (0..n).map(|i| format!("c{i:02}")).collect();
        let rows = vec![vec![true; n], vec![false; n]];
        let vs = ViewSet::new(ids, rows, vec![0.5, 0.5]).unwrap();
        let costs = vec![1; n];
        let acc = PlanningAccuracy::default();
        let p = SelectionProblem::new(&vs, &costs, 3, &acc).unwrap();
        assert!(matches!(
            brute_select(&p),
            Err(Error::InstanceTooLarge { size: 25, .. })
        ));
    }

    #[test]
    fn random_is_deterministic_and_saturates() {
        let vs = employee();
        let costs = vec![3, 1, 2, 4, 2, 5];
        let acc = PlanningAccuracy::default();
        let p = SelectionProblem::new(&vs, &costs, 7, &acc).unwrap();
        let a = random_select(&p, 42).unwrap();
        let b = random_select(&p, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.cost_used <= 7);

        let full = SelectionProblem::new(&vs, &costs, 17, &acc).unwrap();
        assert_eq!(random_select(&full, 9).unwrap().chosen.len(), 6);

        let min = SelectionProblem::new(&vs, &costs, 1, &acc).unwrap();
        assert_eq!(random_select(&min, 9).unwrap().chosen, vec!["c2"]);
    }

    #[test]
    fn zero_cost_items_rank_first_in_growth() {
        let vs = employee();
        let costs = vec![1, 1, 1, 1, 1, 0];
        let acc = PlanningAccuracy::new(0.9).unwrap();
        let p = SelectionProblem::new(&vs, &costs, 4, &acc).unwrap();
        let g = greedy_select(&p).unwrap();
        assert!(g.cost_used <= 4);
    }

    #[test]
    fn cap_without_fallback_propagates() {
        let n = 8;
        let m = 18;
        let ids: Vec<String> = (0..m).map(|i| format!("c{i:02}")).collect();
        let rows: Vec<Vec<bool>> = (0..n)
            .map(|v| (0..m).map(|c| (v >> (c % 3)) & 1 == 1 || c % n == v).collect())
            .collect();
        let vs = ViewSet::new(ids.clone(), rows, vec![1.0 / n as f64; n]).unwrap();
        let mut acc = PlanningAccuracy::new(0.9).unwrap();
        for (i, id) in ids.iter().enumerate() {
            acc = acc.with_override(id.clone(), 0.6 + 0.02 * i as f64).unwrap();
        }
        let costs = vec![1; m];
        let p = SelectionProblem::new(&vs, &costs, m as u64, &acc)
            .unwrap()
            .with_mode(EvalMode::Exact { cap: 4 });
        assert!(matches!(random_select(&p, 1), Err(Error::CapExceeded { .. })));
        let p = p.with_fallback(Some(McFallback {
            samples: 2000,
            seed: 5,
        }));
        let r = random_select(&p, 1).unwrap();
        assert_eq!(r.chosen.len(), m);
        assert!(r.objective_value > 0.0);
    }
}
