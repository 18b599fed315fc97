//! Candidate result sets, their truth-valued view form, and structural validation.
//!
//! A [`CandidateResultSet`] holds alternative schema matchings with a probability
//! distribution over them. [`build_view_set`] re-expresses it as a [`ViewSet`]: one
//! boolean row per distinct candidate over the union of all correspondences.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum tolerance within which a distribution is accepted as-is.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Largest sum deviation that is silently renormalized (with a warning).
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaSide {
    Source,
    Target,
}

impl std::fmt::Display for SchemaSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemaSide::Source => f.write_str("source"),
            SchemaSide::Target => f.write_str("target"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeRef {
    pub side: SchemaSide,
    pub name: String,
    pub sample_values: Vec<String>,
}

impl AttributeRef {
    pub fn new(side: SchemaSide, name: impl Into<String>) -> Self {
        Self {
            side,
            name: name.into(),
            sample_values: Vec::new(),
        }
    }

    pub fn with_values<I, S>(mut self, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.sample_values = values.into_iter().map(Into::into).collect();
        self
    }
}

/// A proposed equivalence between a set of source attributes and a set of target
/// attributes. `cost` is the verification price in tokens; `None` means it is
/// estimated by [`crate::selection::token_cost`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    pub id: String,
    pub source_attrs: Vec<AttributeRef>,
    pub target_attrs: Vec<AttributeRef>,
    pub cost: Option<u64>,
}

impl Correspondence {
    pub fn new(
        id: impl Into<String>,
        source_attrs: Vec<AttributeRef>,
        target_attrs: Vec<AttributeRef>,
    ) -> Self {
        Self {
            id: id.into(),
            source_attrs,
            target_attrs,
            cost: None,
        }
    }

    pub fn with_cost(mut self, cost: u64) -> Self {
        self.cost = Some(cost);
        self
    }

    /// Every attribute touched by this correspondence, source side first.
    pub fn attributes(&self) -> impl Iterator<Item = &AttributeRef> {
        self.source_attrs.iter().chain(self.target_attrs.iter())
    }

    /// Identity of the correspondence as a pair of sorted name lists. Two
    /// correspondences with the same key describe the same mapping.
    pub fn pair_key(&self) -> PairKey {
        PairKey::new(
            self.source_attrs.iter().map(|a| a.name.clone()),
            self.target_attrs.iter().map(|a| a.name.clone()),
        )
    }

    pub fn source_names(&self) -> Vec<&str> {
        self.source_attrs.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn target_names(&self) -> Vec<&str> {
        self.target_attrs.iter().map(|a| a.name.as_str()).collect()
    }
}

/// (sorted source names, sorted target names); case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

impl PairKey {
    pub fn new<S, T>(source: S, target: T) -> Self
    where
        S: IntoIterator<Item = String>,
        T: IntoIterator<Item = String>,
    {
        let mut source: Vec<String> = source.into_iter().collect();
        let mut target: Vec<String> = target.into_iter().collect();
        source.sort();
        target.sort();
        Self { source, target }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub id: String,
    pub correspondence_ids: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResultSet {
    pub source_schema: String,
    pub target_schema: String,
    pub correspondences: Vec<Correspondence>,
    pub candidates: Vec<CandidateResult>,
}

impl CandidateResultSet {
    pub fn correspondence(&self, id: &str) -> Option<&Correspondence> {
        self.correspondences.iter().find(|c| c.id == id)
    }

    pub fn candidate(&self, id: &str) -> Option<&CandidateResult> {
        self.candidates.iter().find(|c| c.id == id)
    }

    pub fn from_json_str(text: &str) -> serde_json::Result<Self> {
        let raw: RawCrs = serde_json::from_str(text)?;
        Ok(raw.into())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| Error::json(path, e))
    }

    /// Canonical JSON: keys sorted, two-space indentation, trailing newline.
    pub fn to_json_string(&self) -> String {
        crate::to_canonical_json(&RawCrs::from(self))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct RawAttr {
    name: String,
    #[serde(default)]
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawCorrespondence {
    id: String,
    source_attrs: Vec<RawAttr>,
    target_attrs: Vec<RawAttr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawCandidate {
    id: String,
    correspondences: Vec<String>,
    probability: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCrs {
    source_schema: String,
    target_schema: String,
    correspondences: Vec<RawCorrespondence>,
    candidates: Vec<RawCandidate>,
}

impl From<RawCrs> for CandidateResultSet {
    fn from(raw: RawCrs) -> Self {
        let attrs = |side: SchemaSide, list: Vec<RawAttr>| {
            list.into_iter()
                .map(|a| AttributeRef {
                    side,
                    name: a.name,
                    sample_values: a.values,
                })
                .collect()
        };
        CandidateResultSet {
            source_schema: raw.source_schema,
            target_schema: raw.target_schema,
            correspondences: raw
                .correspondences
                .into_iter()
                .map(|c| Correspondence {
                    id: c.id,
                    source_attrs: attrs(SchemaSide::Source, c.source_attrs),
                    target_attrs: attrs(SchemaSide::Target, c.target_attrs),
                    cost: c.cost,
                })
                .collect(),
            candidates: raw
                .candidates
                .into_iter()
                .map(|c| CandidateResult {
                    id: c.id,
                    correspondence_ids: c.correspondences,
                    probability: c.probability,
                })
                .collect(),
        }
    }
}

impl From<&CandidateResultSet> for RawCrs {
    fn from(crs: &CandidateResultSet) -> Self {
        let attrs = |list: &[AttributeRef]| {
            list.iter()
                .map(|a| RawAttr {
                    name: a.name.clone(),
                    values: a.sample_values.clone(),
                })
                .collect()
        };
        RawCrs {
            source_schema: crs.source_schema.clone(),
            target_schema: crs.target_schema.clone(),
            correspondences: crs
                .correspondences
                .iter()
                .map(|c| RawCorrespondence {
                    id: c.id.clone(),
                    source_attrs: attrs(&c.source_attrs),
                    target_attrs: attrs(&c.target_attrs),
                    cost: c.cost,
                })
                .collect(),
            candidates: crs
                .candidates
                .iter()
                .map(|c| RawCandidate {
                    id: c.id.clone(),
                    correspondences: c.correspondence_ids.clone(),
                    probability: c.probability,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    /// Sum of candidate probabilities as given.
    pub probability_sum: f64,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    /// True when the distribution is close enough to normalized that
    /// [`build_view_set`] rescales it instead of rejecting it.
    pub fn renormalized(&self) -> bool {
        let dev = (self.probability_sum - 1.0).abs();
        dev > SUM_TOLERANCE && dev <= RENORMALIZE_TOLERANCE
    }
}

/// Checks every structural invariant of a candidate result set. Never fails;
/// violations are collected into the report.
pub fn validate_crs(crs: &CandidateResultSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let errors = &mut report.errors;
    let warnings = &mut report.warnings;

    if crs.candidates.is_empty() {
        errors.push("candidate result set has no candidates".into());
    }

    let mut corr_index: HashMap<&str, &Correspondence> = HashMap::new();
    for c in &crs.correspondences {
        if c.id.trim().is_empty() {
            errors.push("correspondence with empty id".into());
        }
        if corr_index.insert(c.id.as_str(), c).is_some() {
            errors.push(format!("duplicate correspondence id `{}`", c.id));
        }
        if c.source_attrs.is_empty() {
            errors.push(format!("correspondence `{}` has no source attributes", c.id));
        }
        if c.target_attrs.is_empty() {
            errors.push(format!("correspondence `{}` has no target attributes", c.id));
        }
        for a in c.attributes() {
            if a.name.trim().is_empty() {
                errors.push(format!(
                    "correspondence `{}` has a {} attribute with an empty name",
                    c.id, a.side
                ));
            }
        }
        if c.cost == Some(0) {
            warnings.push(format!("correspondence `{}` has zero cost", c.id));
        }
    }

    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut seen_ids: BTreeSet<&str> = BTreeSet::new();
    let mut seen_sets: BTreeMap<BTreeSet<&str>, &str> = BTreeMap::new();
    let mut sum = 0.0;
    for cand in &crs.candidates {
        if !seen_ids.insert(cand.id.as_str()) {
            errors.push(format!("duplicate candidate id `{}`", cand.id));
        }
        let p = cand.probability;
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            errors.push(format!(
                "candidate `{}` has probability {p} outside [0, 1]",
                cand.id
            ));
        }
        sum += p;

        let mut set = BTreeSet::new();
        // (side, name) -> correspondence id that first used it
        let mut owner: HashMap<(SchemaSide, &str), &str> = HashMap::new();
        for cid in &cand.correspondence_ids {
            if !set.insert(cid.as_str()) {
                warnings.push(format!(
                    "candidate `{}` lists correspondence `{cid}` more than once",
                    cand.id
                ));
                continue;
            }
            used.insert(cid.as_str());
            let Some(corr) = corr_index.get(cid.as_str()) else {
                errors.push(format!(
                    "candidate `{}` references unknown correspondence `{cid}`",
                    cand.id
                ));
                continue;
            };
            for a in corr.attributes() {
                if let Some(prev) = owner.insert((a.side, a.name.as_str()), cid.as_str()) {
                    if prev != cid.as_str() {
                        errors.push(format!(
                            "candidate `{}` associates {} attribute `{}` with both `{prev}` and `{cid}`; \
                             no attribute may be associated with more than one correspondence",
                            cand.id, a.side, a.name
                        ));
                    }
                }
            }
        }
        if let Some(first) = seen_sets.insert(set, cand.id.as_str()) {
            warnings.push(format!(
                "candidates `{first}` and `{}` have identical correspondence sets; they are merged into one view",
                cand.id
            ));
        }
    }
    report.probability_sum = sum;

    for c in &crs.correspondences {
        if !used.contains(c.id.as_str()) {
            errors.push(format!(
                "correspondence `{}` does not appear in any candidate",
                c.id
            ));
        }
    }

    if !crs.candidates.is_empty() {
        let dev = (sum - 1.0).abs();
        if dev > RENORMALIZE_TOLERANCE {
            errors.push(format!(
                "distribution sums to {}; candidate probabilities must sum to 1",
                fmt_sum(sum)
            ));
        } else if dev > SUM_TOLERANCE {
            warnings.push(format!(
                "distribution sums to {}; renormalized",
                fmt_sum(sum)
            ));
        }
    }

    report
}

fn fmt_sum(sum: f64) -> String {
    let s = format!("{sum:.9}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// Distribution over distinct truth-valued rows ("views") of a candidate result set.
///
/// `rows[v][c]` is true iff view `v` contains correspondence `correspondence_ids[c]`.
/// `members[v]` lists the candidate ids merged into view `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSet {
    correspondence_ids: Vec<String>,
    rows: Vec<Vec<bool>>,
    probabilities: Vec<f64>,
    members: Vec<Vec<String>>,
}

impl ViewSet {
    /// Builds a view set directly from a truth matrix. Rows must be distinct,
    /// probabilities non-negative and summing to 1 within [`SUM_TOLERANCE`].
    /// Members default to `v0, v1, ...`.
    pub fn new(
        correspondence_ids: Vec<String>,
        rows: Vec<Vec<bool>>,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        let members = (0..rows.len()).map(|i| vec![format!("v{i}")]).collect();
        Self::with_members(correspondence_ids, rows, probabilities, members)
    }

    pub fn with_members(
        correspondence_ids: Vec<String>,
        rows: Vec<Vec<bool>>,
        probabilities: Vec<f64>,
        members: Vec<Vec<String>>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::MalformedInput("view set has no views".into()));
        }
        if rows.len() != probabilities.len() || rows.len() != members.len() {
            return Err(Error::MalformedInput(
                "views, probabilities and members differ in length".into(),
            ));
        }
        let width = correspondence_ids.len();
        if let Some(r) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::MalformedInput(format!(
                "view {r} has {} entries, expected {width}",
                rows[r].len()
            )));
        }
        let distinct: BTreeSet<&str> = correspondence_ids.iter().map(String::as_str).collect();
        if distinct.len() != width {
            return Err(Error::MalformedInput(
                "duplicate correspondence ids".into(),
            ));
        }
        let distinct_rows: BTreeSet<&Vec<bool>> = rows.iter().collect();
        if distinct_rows.len() != rows.len() {
            return Err(Error::MalformedInput("duplicate view rows".into()));
        }
        check_distribution(&probabilities)?;
        Ok(Self {
            correspondence_ids,
            rows,
            probabilities,
            members,
        })
    }

    pub fn correspondence_ids(&self) -> &[String] {
        &self.correspondence_ids
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn members(&self) -> &[Vec<String>] {
        &self.members
    }

    pub fn num_views(&self) -> usize {
        self.rows.len()
    }

    pub fn num_correspondences(&self) -> usize {
        self.correspondence_ids.len()
    }

    pub fn index_of(&self, corr_id: &str) -> Result<usize> {
        self.correspondence_ids
            .iter()
            .position(|c| c == corr_id)
            .ok_or_else(|| Error::UnknownCorrespondence(corr_id.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, corr_ids: &[S]) -> Result<Vec<usize>> {
        corr_ids.iter().map(|c| self.index_of(c.as_ref())).collect()
    }

    /// `v ⊨ c`
    pub fn satisfies(&self, view: usize, corr: usize) -> bool {
        self.rows[view][corr]
    }

    /// Column of truth values for one correspondence across all views.
    pub fn column(&self, corr: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[corr]).collect()
    }

    /// True when the correspondence takes the same value in every view with
    /// non-zero probability; verifying it cannot change the distribution.
    pub fn is_constant(&self, corr: usize) -> bool {
        let mut live = self
            .rows
            .iter()
            .zip(&self.probabilities)
            .filter(|(_, &p)| p > 0.0)
            .map(|(r, _)| r[corr]);
        match live.next() {
            Some(first) => live.all(|x| x == first),
            None => true,
        }
    }

    /// Same views with a replacement distribution (used by the update step).
    pub fn with_probabilities(&self, probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != self.rows.len() {
            return Err(Error::MalformedInput(
                "probability vector length does not match view count".into(),
            ));
        }
        check_distribution(&probabilities)?;
        Ok(Self {
            probabilities,
            ..self.clone()
        })
    }
}

fn check_distribution(probabilities: &[f64]) -> Result<()> {
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
    Ok(())
}

/// Converts a validated candidate result set into its view form. Candidates with
/// identical correspondence sets are merged (probabilities summed), zero-probability
/// views are dropped, and correspondence order follows `crs.correspondences`.
pub fn build_view_set(crs: &CandidateResultSet) -> Result<ViewSet> {
    let report = validate_crs(crs);
    if !report.is_ok() {
        return Err(Error::MalformedInput(report.errors.join("; ")));
    }
    let ids: Vec<String> = crs.correspondences.iter().map(|c| c.id.clone()).collect();
    let position: HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut rows: Vec<Vec<bool>> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut members: Vec<Vec<String>> = Vec::new();
    for cand in &crs.candidates {
        let mut row = vec![false; ids.len()];
        for cid in &cand.correspondence_ids {
            row[position[cid.as_str()]] = true;
        }
        match rows.iter().position(|r| *r == row) {
            Some(v) => {
                probs[v] += cand.probability;
                members[v].push(cand.id.clone());
            }
            None => {
                rows.push(row);
                probs.push(cand.probability);
                members.push(vec![cand.id.clone()]);
            }
        }
    }

    let keep: Vec<usize> = (0..rows.len()).filter(|&v| probs[v] > 0.0).collect();
    if keep.is_empty() {
        return Err(Error::MalformedInput(
            "every candidate has zero probability".into(),
        ));
    }
    let total: f64 = keep.iter().map(|&v| probs[v]).sum();
    let rows_kept = keep.iter().map(|&v| rows[v].clone()).collect();
    let probs_kept = keep.iter().map(|&v| probs[v] / total).collect();
    let members_kept = keep.iter().map(|&v| members[v].clone()).collect();
    ViewSet::with_members(ids, rows_kept, probs_kept, members_kept)
}

/// `P(c) = Σ_{v ⊨ c} P(v)`
pub fn marginal_probability(vs: &ViewSet, corr_id: &str) -> Result<f64> {
    let c = vs.index_of(corr_id)?;
    Ok(vs
        .rows
        .iter()
        .zip(&vs.probabilities)
        .filter(|(row, _)| row[c])
        .map(|(_, p)| p)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::employee_crs;

    #[test]
    fn table_crs_is_valid() {
        let report = validate_crs(&employee_crs());
        assert!(report.is_ok(), "{:?}", report.errors);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn oversummed_distribution_is_an_error() {
        let mut crs = employee_crs();
        for c in &mut crs.candidates {
            c.probability = 0.5;
        }
        let report = validate_crs(&crs);
        assert!(report
            .errors
            .iter()
            .any(|e| e.contains("distribution sums to 1.5")));
    }

    #[test]
    fn tiny_deviation_is_renormalized() {
        let mut crs = employee_crs();
        crs.candidates[0].probability += 5e-7;
        let report = validate_crs(&crs);
        assert!(report.is_ok());
        assert!(report.renormalized());
        assert_eq!(report.warnings.len(), 1);
        let vs = build_view_set(&crs).unwrap();
        let sum: f64 = vs.probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attribute_reuse_within_candidate_is_an_error() {
        let mut crs = employee_crs();
        crs.correspondences.push(Correspondence::new(
            "c7",
            vec![AttributeRef::new(SchemaSide::Source, "Email")],
            vec![AttributeRef::new(SchemaSide::Target, "Contact")],
        ));
        crs.candidates[0].correspondence_ids.push("c7".into());
        let report = validate_crs(&crs);
        let msg = report
            .errors
            .iter()
            .find(|e| e.contains("`Email`"))
            .expect("attribute reuse reported");
        assert!(msg.contains("no attribute may be associated with more than one correspondence"));
    }

    #[test]
    fn composite_members_count_for_reuse() {
        let mut crs = employee_crs();
        // c2 maps Name -> (First Name, Last Name); reuse "Last Name" on the target side.
        crs.correspondences.push(Correspondence::new(
            "c7",
            vec![AttributeRef::new(SchemaSide::Source, "Surname")],
            vec![AttributeRef::new(SchemaSide::Target, "Last Name")],
        ));
        crs.candidates[0].correspondence_ids.push("c7".into());
        assert!(!validate_crs(&crs).is_ok());
    }

    #[test]
    fn unknown_and_unused_correspondences() {
        let mut crs = employee_crs();
        crs.candidates[0].correspondence_ids.push("nope".into());
        crs.correspondences.push(Correspondence::new(
            "orphan",
            vec![AttributeRef::new(SchemaSide::Source, "X")],
            vec![AttributeRef::new(SchemaSide::Target, "Y")],
        ));
        let report = validate_crs(&crs);
        assert!(report.errors.iter().any(|e| e.contains("unknown correspondence `nope`")));
        assert!(report.errors.iter().any(|e| e.contains("`orphan` does not appear")));
    }

    #[test]
    fn zero_cost_and_empty_name() {
        let mut crs = employee_crs();
        crs.correspondences[0].cost = Some(0);
        crs.correspondences[1].source_attrs[0].name = "  ".into();
        let report = validate_crs(&crs);
        assert!(report.warnings.iter().any(|w| w.contains("zero cost")));
        assert!(report.errors.iter().any(|e| e.contains("empty name")));
    }

    #[test]
    fn table_view_matrix() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let t = true;
        let f = false;
        assert_eq!(
            vs.rows(),
            &[
                vec![t, t, t, t, f, t],
                vec![t, t, f, t, t, t],
                vec![f, t, t, f, f, t],
            ]
        );
        assert_eq!(vs.probabilities(), &[0.55, 0.25, 0.20]);
        assert_eq!(vs.correspondence_ids(), &["c1", "c2", "c3", "c4", "c5", "c6"]);
    }

    #[test]
    fn single_candidate_gives_all_true_row() {
        let mut crs = employee_crs();
        crs.candidates.truncate(1);
        crs.candidates[0].probability = 1.0;
        crs.candidates[0].correspondence_ids =
            crs.correspondences.iter().map(|c| c.id.clone()).collect();
        // c2 and c5 do not share attributes, so the full set is a legal candidate.
        let vs = build_view_set(&crs).unwrap();
        assert_eq!(vs.num_views(), 1);
        assert!(vs.rows()[0].iter().all(|&x| x));
    }

    #[test]
    fn duplicate_candidates_merge() {
        let mut crs = employee_crs();
        crs.candidates[0].probability = 0.3;
        crs.candidates[1].probability = 0.2;
        crs.candidates[1].correspondence_ids = crs.candidates[0].correspondence_ids.clone();
        crs.candidates[2].probability = 0.5;
        // keep c5 in use
        crs.candidates[2].correspondence_ids.push("c5".into());
        let report = validate_crs(&crs);
        assert!(report.is_ok());
        assert!(report.warnings.iter().any(|w| w.contains("merged")));
        let vs = build_view_set(&crs).unwrap();
        assert_eq!(vs.num_views(), 2);
        assert!((vs.probabilities()[0] - 0.5).abs() < 1e-15);
        assert_eq!(vs.members()[0], vec!["s1".to_string(), "s2".to_string()]);
    }

    #[test]
    fn zero_probability_views_are_dropped() {
        let mut crs = employee_crs();
        crs.candidates[0].probability = 0.75;
        crs.candidates[2].probability = 0.0;
        let vs = build_view_set(&crs).unwrap();
        assert_eq!(vs.num_views(), 2);
        assert!(vs.probabilities().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn build_rejects_invalid_input() {
        let mut crs = employee_crs();
        crs.candidates[0].probability = 0.9;
        assert!(matches!(build_view_set(&crs), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn marginals() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let m = |id| marginal_probability(&vs, id).unwrap();
        assert!((m("c5") - 0.25).abs() < 1e-12);
        assert!((m("c4") - 0.80).abs() < 1e-12);
        assert!((m("c6") - 1.0).abs() < 1e-12);
        assert!(matches!(
            marginal_probability(&vs, "c9"),
            Err(Error::UnknownCorrespondence(_))
        ));
    }

    #[test]
    fn literal_product_does_not_recover_view_probability() {
        // P(v1) versus the product of its literal marginals.
        let vs = build_view_set(&employee_crs()).unwrap();
        let row = &vs.rows()[0];
        let product: f64 = vs
            .correspondence_ids()
            .iter()
            .zip(row)
            .map(|(id, &truth)| {
                let p = marginal_probability(&vs, id).unwrap();
                if truth {
                    p
                } else {
                    1.0 - p
                }
            })
            .product();
        assert!((product - vs.probabilities()[0]).abs() > 0.1);
    }

    #[test]
    fn json_roundtrip_is_stable() {
        let crs = employee_crs();
        let text = crs.to_json_string();
        let back = CandidateResultSet::from_json_str(&text).unwrap();
        assert_eq!(back, crs);
        assert_eq!(back.to_json_string(), text);
        let v1 = build_view_set(&crs).unwrap();
        let v2 = build_view_set(&back).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn missing_cost_is_none() {
        let text = r#"{"source_schema":"a","target_schema":"b",
            "correspondences":[{"id":"x","source_attrs":[{"name":"p"}],"target_attrs":[{"name":"q","values":["1"]}]}],
            "candidates":[{"id":"s","correspondences":["x"],"probability":1.0}]}"#;
        let crs = CandidateResultSet::from_json_str(text).unwrap();
        assert_eq!(crs.correspondences[0].cost, None);
        assert_eq!(crs.correspondences[0].target_attrs[0].sample_values, vec!["1"]);
        assert_eq!(crs.correspondences[0].target_attrs[0].side, SchemaSide::Target);
    }
}
