//! Entropy of a view set and the expected uncertainty reduction obtained by
//! verifying a set of correspondences with a noisy oracle.
//!
//! Oracle answers are modelled as conditionally independent given the true view:
//! an answer on correspondence `c` agrees with the view's truth value with
//! probability `p_c` (the oracle accuracy or reported confidence), otherwise it is
//! flipped. All logarithms are natural, so entropies are in nats.
//!
//! Exact evaluation enumerates answer families by their sufficient statistic: with
//! the per-view count of agreeing answers in each accuracy class fixed, every
//! family has the same likelihood under every view. The enumeration therefore
//! tracks `(agreement counts) -> number of families` instead of all `2^|T|`
//! families, which is exact and collapses repeated or constant columns.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ViewSet, SUM_TOLERANCE};

pub const DEFAULT_EXACT_CAP: u32 = 16;
pub const DEFAULT_PLANNING_ACCURACY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exhaustive enumeration of answer families. Fails with
    /// [`Error::CapExceeded`] once more than `2^cap` distinct answer classes
    /// would be needed.
    Exact { cap: u32 },
    /// Average over `samples` answer families drawn from the mixture.
    MonteCarlo { samples: usize, seed: u64 },
}

impl EvalMode {
    pub fn exact() -> Self {
        EvalMode::Exact {
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

impl Default for EvalMode {
    fn default() -> Self {
        Self::exact()
    }
}

/// Assumed oracle accuracy used when predicting information gain before any
/// answer is known. A global value with optional per-correspondence overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningAccuracy {
    default: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    overrides: BTreeMap<String, f64>,
}

impl PlanningAccuracy {
    pub fn new(default: f64) -> Result<Self> {
        check_accuracy(default)?;
        Ok(Self {
            default,
            overrides: BTreeMap::new(),
        })
    }

    pub fn with_override(mut self, corr_id: impl Into<String>, accuracy: f64) -> Result<Self> {
        check_accuracy(accuracy)?;
        self.overrides.insert(corr_id.into(), accuracy);
        Ok(self)
    }

    pub fn default_accuracy(&self) -> f64 {
        self.default
    }

    pub fn get(&self, corr_id: &str) -> f64 {
        self.overrides.get(corr_id).copied().unwrap_or(self.default)
    }
}

impl Default for PlanningAccuracy {
    fn default() -> Self {
        Self {
            default: DEFAULT_PLANNING_ACCURACY,
            overrides: BTreeMap::new(),
        }
    }
}

fn check_accuracy(p: f64) -> Result<()> {
    if p > 0.5 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::MalformedInput(format!(
            "planning accuracy {p} outside (0.5, 1.0]"
        )))
    }
}

/// One joint outcome of oracle verdicts for a selected correspondence set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerFamily {
    pub corr_ids: Vec<String>,
    pub verdicts: Vec<bool>,
    pub confidences: Vec<f64>,
}

impl AnswerFamily {
    pub fn new(corr_ids: Vec<String>, verdicts: Vec<bool>, confidences: Vec<f64>) -> Result<Self> {
        if corr_ids.len() != verdicts.len() || corr_ids.len() != confidences.len() {
            return Err(Error::MalformedInput(
                "answer family vectors differ in length".into(),
            ));
        }
        if let Some(c) = confidences.iter().find(|c| !(0.5..=1.0).contains(*c)) {
            return Err(Error::MalformedInput(format!(
                "confidence {c} outside [0.5, 1.0]"
            )));
        }
        Ok(Self {
            corr_ids,
            verdicts,
            confidences,
        })
    }

    pub fn single(corr_id: impl Into<String>, verdict: bool, confidence: f64) -> Result<Self> {
        Self::new(vec![corr_id.into()], vec![verdict], vec![confidence])
    }

    pub fn len(&self) -> usize {
        self.corr_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corr_ids.is_empty()
    }
}

/// `−Σ p ln p` with `0 ln 0 = 0`.
pub fn entropy(probabilities: &[f64]) -> Result<f64> {
    if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::MalformedDistribution(format!(
            "invalid probability {p}"
        )));
    }
    let sum: f64 = probabilities.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::MalformedDistribution(format!(
            "distribution sums to {sum}"
        )));
    }
    Ok(entropy_unchecked(probabilities))
}

pub(crate) fn entropy_unchecked(probabilities: &[f64]) -> f64 {
    -probabilities.iter().map(|&p| xlnx(p)).sum::<f64>()
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Entropy of the view distribution.
pub fn view_entropy(vs: &ViewSet) -> f64 {
    entropy_unchecked(vs.probabilities())
}

/// `P(A | v)`: the product over the family of `p_i` where the verdict agrees with
/// the view and `1 − p_i` where it does not.
pub fn answer_likelihood(vs: &ViewSet, view: usize, family: &AnswerFamily) -> Result<f64> {
    let cols = vs.indices_of(&family.corr_ids)?;
    Ok(likelihood(vs.rows()[view].as_slice(), &cols, family))
}

fn likelihood(row: &[bool], cols: &[usize], family: &AnswerFamily) -> f64 {
    cols.iter()
        .zip(&family.verdicts)
        .zip(&family.confidences)
        .map(|((&c, &verdict), &p)| if row[c] == verdict { p } else { 1.0 - p })
        .product()
}

/// `P(A) = Σ_v P(v) P(A | v)`.
pub fn family_probability(vs: &ViewSet, family: &AnswerFamily) -> Result<f64> {
    let cols = vs.indices_of(&family.corr_ids)?;
    Ok(vs
        .rows()
        .iter()
        .zip(vs.probabilities())
        .map(|(row, &p)| p * likelihood(row, &cols, family))
        .sum())
}

/// `−H(V | A_T) = Σ_A Σ_v P(A) P(v|A) ln P(v|A)`, in nats (always ≤ 0).
pub fn neg_conditional_entropy<S: AsRef<str>>(
    vs: &ViewSet,
    selected: &[S],
    accuracy: &PlanningAccuracy,
    mode: EvalMode,
) -> Result<f64> {
    let cols = vs.indices_of(selected)?;
    let accs: Vec<f64> = selected.iter().map(|c| accuracy.get(c.as_ref())).collect();
    neg_conditional_entropy_cols(vs, &cols, &accs, mode)
}

/// `H(V) − H(V | A_T)`, the expected entropy drop from verifying `selected`.
pub fn expected_reduction<S: AsRef<str>>(
    vs: &ViewSet,
    selected: &[S],
    accuracy: &PlanningAccuracy,
    mode: EvalMode,
) -> Result<f64> {
    if selected.is_empty() {
        return Ok(0.0);
    }
    let neg = neg_conditional_entropy(vs, selected, accuracy, mode)?;
    Ok((view_entropy(vs) + neg).max(0.0))
}

pub(crate) fn neg_conditional_entropy_cols(
    vs: &ViewSet,
    cols: &[usize],
    accs: &[f64],
    mode: EvalMode,
) -> Result<f64> {
    for &p in accs {
        if !(0.5..=1.0).contains(&p) {
            return Err(Error::MalformedInput(format!(
                "accuracy {p} outside [0.5, 1.0]"
            )));
        }
    }
    match mode {
        EvalMode::Exact { cap } => {
            let mut table = FamilyTable::new(vs);
            for (&c, &p) in cols.iter().zip(accs) {
                table = table.extend(vs, c, p, cap)?;
            }
            Ok(table.neg_conditional_entropy(vs))
        }
        EvalMode::MonteCarlo { samples, seed } => {
            Ok(monte_carlo(vs, cols, accs, samples, seed))
        }
    }
}

/// Answer families of a selected set grouped by sufficient statistic.
///
/// A key holds, for every accuracy class and every view, the number of answers in
/// that class agreeing with the view. The value is how many distinct families map
/// to the key. All families under one key share `P(A | v)` for every `v`.
///
/// While there are at most 16 (class, view) lanes and no class holds more than
/// 255 columns, keys are packed into a `u128` with one byte per lane, so adding a
/// column is a single addition per state.
#[derive(Debug, Clone)]
pub(crate) struct FamilyTable {
    views: usize,
    /// accuracy per class, and the number of selected columns in it
    classes: Vec<(f64, u16)>,
    states: States,
}

#[derive(Debug, Clone)]
enum States {
    Packed(FxHashMap<u128, f64>),
    Wide(FxHashMap<Vec<u16>, f64>),
}

const PACKED_LANES: usize = 16;

fn packable(views: usize, classes: &[(f64, u16)]) -> bool {
    views * classes.len() <= PACKED_LANES && classes.iter().all(|&(_, n)| n <= u8::MAX as u16)
}

impl FamilyTable {
    pub(crate) fn new(vs: &ViewSet) -> Self {
        let views = vs.num_views();
        let states = if views <= PACKED_LANES {
            let mut m = FxHashMap::default();
            m.insert(0u128, 1.0);
            States::Packed(m)
        } else {
            let mut m = FxHashMap::default();
            m.insert(Vec::new(), 1.0);
            States::Wide(m)
        };
        Self {
            views,
            classes: Vec::new(),
            states,
        }
    }

    fn widened(&self) -> FxHashMap<Vec<u16>, f64> {
        match &self.states {
            States::Wide(m) => m.clone(),
            States::Packed(m) => {
                let lanes = self.classes.len() * self.views;
                m.iter()
                    .map(|(&k, &c)| {
                        let key = (0..lanes).map(|l| ((k >> (8 * l)) & 0xff) as u16).collect();
                        (key, c)
                    })
                    .collect()
            }
        }
    }

    /// Adds one verified column with accuracy `p`.
    pub(crate) fn extend(&self, vs: &ViewSet, col: usize, p: f64, cap: u32) -> Result<Self> {
        // A column constant over all live views splits every family in two with
        // identical posteriors; it leaves the objective unchanged.
        if vs.is_constant(col) {
            return Ok(self.clone());
        }
        let n = self.views;
        let mut classes = self.classes.clone();
        let class = match classes.iter().position(|(q, _)| q.to_bits() == p.to_bits()) {
            Some(k) => k,
            None => {
                classes.push((p, 0));
                classes.len() - 1
            }
        };
        classes[class].1 += 1;
        let offset = class * n;
        let column = vs.column(col);
        let limit = 1usize.checked_shl(cap).unwrap_or(usize::MAX);
        let exceeded = |needed: usize| Error::CapExceeded { needed, cap };

        let states = match &self.states {
            States::Packed(old) if packable(n, &classes) => {
                let (mut yes, mut no) = (0u128, 0u128);
                for (v, &truth) in column.iter().enumerate() {
                    let bit = 1u128 << (8 * (offset + v));
                    if truth {
                        yes |= bit;
                    } else {
                        no |= bit;
                    }
                }
                let mut next: FxHashMap<u128, f64> =
                    FxHashMap::with_capacity_and_hasher(old.len() * 2, Default::default());
                for (&key, &count) in old {
                    *next.entry(key + yes).or_insert(0.0) += count;
                    *next.entry(key + no).or_insert(0.0) += count;
                    if next.len() > limit {
                        return Err(exceeded(next.len()));
                    }
                }
                States::Packed(next)
            }
            _ => {
                let old = self.widened();
                let key_len = classes.len() * n;
                let mut next: FxHashMap<Vec<u16>, f64> =
                    FxHashMap::with_capacity_and_hasher(old.len() * 2, Default::default());
                for (key, &count) in &old {
                    for verdict in [true, false] {
                        let mut k = key.clone();
                        k.resize(key_len, 0);
                        for (v, &truth) in column.iter().enumerate() {
                            if truth == verdict {
                                k[offset + v] += 1;
                            }
                        }
                        *next.entry(k).or_insert(0.0) += count;
                    }
                    if next.len() > limit {
                        return Err(exceeded(next.len()));
                    }
                }
                States::Wide(next)
            }
        };
        Ok(Self {
            views: n,
            classes,
            states,
        })
    }

    pub(crate) fn neg_conditional_entropy(&self, vs: &ViewSet) -> f64 {
        let priors = vs.probabilities();
        let live: Vec<usize> = (0..self.views).filter(|&v| priors[v] > 0.0).collect();
        // powers[k][j] = (acc^j, (1 - acc)^j) for class k
        let powers: Vec<Vec<(f64, f64)>> = self
            .classes
            .iter()
            .map(|&(acc, cols)| {
                (0..=cols as i32)
                    .map(|j| (acc.powi(j), (1.0 - acc).powi(j)))
                    .collect()
            })
            .collect();

        let mut joint = vec![0.0; live.len()];
        let mut total = 0.0;
        let mut accumulate = |count: f64, agree: &dyn Fn(usize) -> usize| {
            let mut p_family = 0.0;
            for (slot, &v) in live.iter().enumerate() {
                let mut l = priors[v];
                for (k, &(_, cols)) in self.classes.iter().enumerate() {
                    let a = agree(k * self.views + v);
                    l *= powers[k][a].0 * powers[k][cols as usize - a].1;
                }
                joint[slot] = l;
                p_family += l;
            }
            if p_family > 0.0 {
                let inner: f64 = joint.iter().map(|&j| xlnx(j / p_family)).sum();
                total += count * p_family * inner;
            }
        };
        // fixed summation order
        match &self.states {
            States::Packed(m) => {
                let mut keys: Vec<u128> = m.keys().copied().collect();
                keys.sort_unstable();
                for key in keys {
                    accumulate(m[&key], &|lane| ((key >> (8 * lane)) & 0xff) as usize);
                }
            }
            States::Wide(m) => {
                let mut keys: Vec<&Vec<u16>> = m.keys().collect();
                keys.sort_unstable();
                for key in keys {
                    accumulate(m[key], &|lane| key[lane] as usize);
                }
            }
        }
        total
    }
}

fn monte_carlo(vs: &ViewSet, cols: &[usize], accs: &[f64], samples: usize, seed: u64) -> f64 {
    if samples == 0 {
        return -view_entropy(vs);
    }
    let priors = vs.probabilities();
    let rows = vs.rows();
    let log_prior: Vec<f64> = priors.iter().map(|p| p.ln()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loglik = vec![0.0f64; priors.len()];
    let mut sum = 0.0;
    for _ in 0..samples {
        let truth = sample_index(priors, rng.gen::<f64>());
        for (v, ll) in loglik.iter_mut().enumerate() {
            *ll = log_prior[v];
        }
        for (&c, &p) in cols.iter().zip(accs) {
            let correct = rng.gen::<f64>() < p;
            let verdict = if correct { rows[truth][c] } else { !rows[truth][c] };
            let (agree, disagree) = (p.ln(), (1.0 - p).ln());
            for (v, ll) in loglik.iter_mut().enumerate() {
                *ll += if rows[v][c] == verdict { agree } else { disagree };
            }
        }
        let max = loglik.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = loglik.iter().map(|&l| (l - max).exp()).sum();
        let value: f64 = loglik.iter().map(|&l| xlnx((l - max).exp() / z)).sum();
        sum += value;
    }
    sum / samples as f64
}

pub(crate) fn sample_index(probabilities: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::employee_crs;
    use crate::model::build_view_set;

    fn employee() -> ViewSet {
        build_view_set(&employee_crs()).unwrap()
    }

    fn acc(p: f64) -> PlanningAccuracy {
        PlanningAccuracy::new(p).unwrap()
    }

    #[test]
    fn entropy_values() {
        let h = entropy(&[0.55, 0.25, 0.20]).unwrap();
        assert!((h - 0.997).abs() < 1e-3, "{h}");
        assert_eq!(entropy(&[1.0]).unwrap(), 0.0);
        assert!((entropy(&[0.5, 0.5]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((entropy(&[0.0, 1.0]).unwrap()).abs() < 1e-15);
        assert!(matches!(
            entropy(&[0.5, 0.6]),
            Err(Error::MalformedDistribution(_))
        ));
        assert!(entropy(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn likelihood_single_factor() {
        let vs = employee();
        let fam = AnswerFamily::single("c4", true, 0.8).unwrap();
        assert!((answer_likelihood(&vs, 0, &fam).unwrap() - 0.8).abs() < 1e-15);
        assert!((answer_likelihood(&vs, 2, &fam).unwrap() - 0.2).abs() < 1e-15);
        let perfect = AnswerFamily::new(
            vs.correspondence_ids().to_vec(),
            vs.rows()[1].clone(),
            vec![1.0; 6],
        )
        .unwrap();
        assert_eq!(answer_likelihood(&vs, 1, &perfect).unwrap(), 1.0);
        let unknown = AnswerFamily::single("zz", true, 0.8).unwrap();
        assert!(matches!(
            answer_likelihood(&vs, 0, &unknown),
            Err(Error::UnknownCorrespondence(_))
        ));
    }

    #[test]
    fn family_probabilities() {
        let vs = employee();
        let t = family_probability(&vs, &AnswerFamily::single("c4", true, 0.8).unwrap()).unwrap();
        let f = family_probability(&vs, &AnswerFamily::single("c4", false, 0.8).unwrap()).unwrap();
        assert!((t - 0.68).abs() < 1e-12);
        assert!((f - 0.32).abs() < 1e-12);
        let c6 = family_probability(&vs, &AnswerFamily::single("c6", true, 0.9).unwrap()).unwrap();
        assert!((c6 - 0.9).abs() < 1e-12);
    }

    #[test]
    fn family_rejects_bad_confidence() {
        assert!(AnswerFamily::single("c1", true, 0.4).is_err());
        assert!(AnswerFamily::new(vec!["a".into()], vec![], vec![0.9]).is_err());
    }

    #[test]
    fn planning_accuracy_bounds() {
        assert!(PlanningAccuracy::new(0.5).is_err());
        assert!(PlanningAccuracy::new(1.01).is_err());
        let a = PlanningAccuracy::new(0.9).unwrap().with_override("c1", 0.7).unwrap();
        assert_eq!(a.get("c1"), 0.7);
        assert_eq!(a.get("c2"), 0.9);
    }

    #[test]
    fn conditional_entropy_on_c4() {
        // 0.68·H(0.6471, 0.2941, 0.0588) + 0.32·H(0.34375, 0.15625, 0.5)
        let vs = employee();
        let oracle = 0.68 * entropy_unchecked(&[0.44 / 0.68, 0.20 / 0.68, 0.04 / 0.68])
            + 0.32 * entropy_unchecked(&[0.11 / 0.32, 0.05 / 0.32, 0.16 / 0.32]);
        let v = neg_conditional_entropy(&vs, &["c4"], &acc(0.8), EvalMode::exact()).unwrap();
        assert!((v + oracle).abs() < 1e-12);
        assert!((v + 0.8708).abs() < 1e-3, "{v}");
        let r = expected_reduction(&vs, &["c4"], &acc(0.8), EvalMode::exact()).unwrap();
        assert!((r - 0.1265).abs() < 2e-3, "{r}");
    }

    #[test]
    fn universal_correspondence_is_uninformative() {
        let vs = employee();
        for p in [0.6, 0.9, 1.0] {
            let v = neg_conditional_entropy(&vs, &["c6"], &acc(p), EvalMode::exact()).unwrap();
            assert!((v + 0.9973).abs() < 1e-3);
            let r = expected_reduction(&vs, &["c6"], &acc(p), EvalMode::exact()).unwrap();
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_oracle_on_everything_resolves() {
        let vs = employee();
        let all = vs.correspondence_ids().to_vec();
        let v = neg_conditional_entropy(&vs, &all, &acc(1.0), EvalMode::exact()).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn empty_selection() {
        let vs = employee();
        let none: [&str; 0] = [];
        assert_eq!(expected_reduction(&vs, &none, &acc(0.9), EvalMode::exact()).unwrap(), 0.0);
    }

    #[test]
    fn cap_counts_answer_classes() {
        // 8 views, 17 columns each in its own accuracy class: every family is distinct.
        let n = 8;
        let m = 17;
        let ids: Vec<String> = (0..m).map(|i| format!("c{i:02}")).collect();
        let rows: Vec<Vec<bool>> = (0..n)
            .map(|v| {
                (0..m)
                    .map(|c| if c < n { c == v } else { (v + c) % 3 == 0 })
                    .collect()
            })
            .collect();
        let vs = ViewSet::new(ids.clone(), rows, vec![1.0 / n as f64; n]).unwrap();
        let mut a = PlanningAccuracy::new(0.9).unwrap();
        for (i, id) in ids.iter().enumerate() {
            a = a.with_override(id.clone(), 0.6 + 0.02 * i as f64).unwrap();
        }
        let err = neg_conditional_entropy(&vs, &ids, &a, EvalMode::exact()).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { cap: 16, .. }));
        // Sixteen of them fit.
        assert!(neg_conditional_entropy(&vs, &ids[..16], &a, EvalMode::exact()).is_ok());
    }

    #[test]
    fn repeated_columns_collapse() {
        // 40 copies of one informative column stay cheap in exact mode.
        let m = 40;
        let ids: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
        let rows = vec![vec![true; m], vec![false; m]];
        let vs = ViewSet::new(ids.clone(), rows, vec![0.5, 0.5]).unwrap();
        let v = neg_conditional_entropy(&vs, &ids, &acc(0.7), EvalMode::exact()).unwrap();
        // binomial oracle: k "true" answers out of m
        let (p, q) = (0.7f64, 0.3f64);
        let mut expect = 0.0;
        let mut binom = 1.0f64;
        for k in 0..=m {
            if k > 0 {
                binom *= (m - k + 1) as f64 / k as f64;
            }
            let l1 = p.powi(k as i32) * q.powi((m - k) as i32);
            let l2 = q.powi(k as i32) * p.powi((m - k) as i32);
            let pa = 0.5 * (l1 + l2);
            let post = 0.5 * l1 / pa;
            let h = -(xlnx(post) + xlnx(1.0 - post));
            expect -= binom * pa * h;
        }
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
    }

    #[test]
    fn monte_carlo_close_to_exact() {
        let vs = employee();
        let ids = ["c1", "c3", "c5"];
        let exact = neg_conditional_entropy(&vs, &ids, &acc(0.8), EvalMode::exact()).unwrap();
        let mc = neg_conditional_entropy(
            &vs,
            &ids,
            &acc(0.8),
            EvalMode::MonteCarlo {
                samples: 100_000,
                seed: 3,
            },
        )
        .unwrap();
        assert!((exact - mc).abs() < 0.02, "{exact} vs {mc}");
    }
}
