//! Seeded synthetic candidate result sets with known ground truth.
//!
//! A hidden one-to-one matching between two generated schemas plays the role of
//! the truth. Each candidate is a perturbation of it: a few true
//! correspondences dropped, a few wrong ones (drawn from a shared pool of
//! confusable pairs) added. Candidates get equal probabilities and are listed in
//! shuffled order.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{candidate_f1, GroundTruth};
use crate::model::{
    build_view_set, AttributeRef, CandidateResult, CandidateResultSet, Correspondence, SchemaSide,
    ViewSet,
};
use crate::oracle::GroundTruthEntry;

const WORDS: &[&str] = &[
    "account", "address", "amount", "balance", "birth", "branch", "city", "code", "country",
    "customer", "date", "department", "description", "discount", "email", "employee", "first",
    "gender", "hire", "invoice", "item", "last", "manager", "name", "number", "order", "phone",
    "postal", "price", "product", "quantity", "region", "salary", "shipping", "status", "street",
    "supplier", "tax", "title", "total", "type", "unit", "vendor", "weight",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthParams {
    /// Attributes per schema.
    pub attributes: usize,
    pub candidates: usize,
    /// Share of source attributes that have a true partner.
    pub match_fraction: f64,
    pub max_drops: usize,
    pub max_additions: usize,
    /// Size of the shared pool of wrong pairs.
    pub confusers: usize,
    /// Make the exact truth one of the candidates.
    #[serde(default)]
    pub include_truth: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            attributes: 20,
            candidates: 8,
            match_fraction: 0.8,
            max_drops: 3,
            max_additions: 3,
            confusers: 10,
            include_truth: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub crs: CandidateResultSet,
    /// One entry per correspondence plus every true pair.
    pub truth: Vec<GroundTruthEntry>,
    /// First listed candidate with the highest F1.
    pub best_candidate: String,
}

fn attribute_names(n: usize, rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut seen = HashSet::new();
    let mut targets = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a = WORDS[rng.gen_range(0..WORDS.len())];
        let b = WORDS[rng.gen_range(0..WORDS.len())];
        if a == b || !seen.insert((a, b)) {
            continue;
        }
        let source = format!("{a}_{b}");
        let target = match rng.gen_range(0..3) {
            // camel case
            0 => format!("{}{}", capitalize(a), capitalize(b)),
            // prefix abbreviation
            1 => format!("{}{}", &a[..a.len().min(4)], capitalize(&b[..b.len().min(3)])),
            // vowel dropping on the second word
            _ => format!("{a}_{}", drop_vowels(b)),
        };
        if !targets.insert(target.clone()) {
            continue;
        }
        out.push((source, target));
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn drop_vowels(s: &str) -> String {
    let mut chars = s.chars();
    let first = chars.next().map(String::from).unwrap_or_default();
    first + &chars.filter(|c| !"aeiou".contains(*c)).collect::<String>()
}

fn sample_values(name: &str, rng: &mut ChaCha8Rng) -> Vec<String> {
    let stem: String = name.chars().filter(|c| c.is_alphanumeric()).take(3).collect();
    (0..3)
        .map(|_| format!("{stem}{}", rng.gen_range(100..1000)))
        .collect()
}

/// Generates one dataset. Deterministic in `(params, seed)`.
pub fn generate(params: &SynthParams, seed: u64) -> Result<SynthDataset> {
    if params.attributes < 2 || params.candidates < 2 {
        return Err(Error::MalformedInput(
            "synthetic data needs at least two attributes and two candidates".into(),
        ));
    }
    if !(0.0..=1.0).contains(&params.match_fraction) {
        return Err(Error::MalformedInput("match_fraction outside [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.attributes;
    let names = attribute_names(n, &mut rng);
    let source: Vec<AttributeRef> = names
        .iter()
        .map(|(s, _)| {
            let values = sample_values(s, &mut rng);
            AttributeRef::new(SchemaSide::Source, s.clone()).with_values(values)
        })
        .collect();
    let mut target_order: Vec<usize> = (0..n).collect();
    target_order.shuffle(&mut rng);
    let target: Vec<AttributeRef> = target_order
        .iter()
        .map(|&i| {
            let name = &names[i].1;
            let values = sample_values(name, &mut rng);
            AttributeRef::new(SchemaSide::Target, name.clone()).with_values(values)
        })
        .collect();
    // source i truly matches target position partner[i]
    let mut partner = vec![0; n];
    for (pos, &i) in target_order.iter().enumerate() {
        partner[i] = pos;
    }
    let matched = ((n as f64) * params.match_fraction).round() as usize;
    let mut sources: Vec<usize> = (0..n).collect();
    sources.shuffle(&mut rng);
    let truth_pairs: BTreeSet<(usize, usize)> =
        sources[..matched].iter().map(|&i| (i, partner[i])).collect();

    let mut confusers = BTreeSet::new();
    let mut attempts = 0;
    while confusers.len() < params.confusers && attempts < 100 * (params.confusers + 1) {
        attempts += 1;
        let pair = (rng.gen_range(0..n), rng.gen_range(0..n));
        if !truth_pairs.contains(&pair) {
            confusers.insert(pair);
        }
    }
    let confusers: Vec<(usize, usize)> = confusers.into_iter().collect();

    let mut sets: Vec<BTreeSet<(usize, usize)>> = Vec::new();
    if params.include_truth && !truth_pairs.is_empty() {
        sets.push(truth_pairs.clone());
    }
    let mut attempts = 0;
    while sets.len() < params.candidates {
        attempts += 1;
        if attempts > 1000 * params.candidates {
            return Err(Error::MalformedInput(
                "could not generate enough distinct candidates; raise drops or additions".into(),
            ));
        }
        let mut set = truth_pairs.clone();
        let drops = rng.gen_range(0..=params.max_drops.min(set.len()));
        let mut current: Vec<(usize, usize)> = set.iter().copied().collect();
        current.shuffle(&mut rng);
        for p in current.iter().take(drops) {
            set.remove(p);
        }
        let additions = rng.gen_range(0..=params.max_additions);
        let mut pool = confusers.clone();
        pool.shuffle(&mut rng);
        let mut added = 0;
        for (s, t) in pool {
            if added == additions {
                break;
            }
            if set.iter().any(|&(a, b)| a == s || b == t) {
                continue;
            }
            set.insert((s, t));
            added += 1;
        }
        if !set.is_empty() && !sets.contains(&set) {
            sets.push(set);
        }
    }
    sets.shuffle(&mut rng);

    let used: BTreeSet<(usize, usize)> = sets.iter().flatten().copied().collect();
    let id_of = |p: &(usize, usize)| format!("c{}", used.iter().position(|q| q == p).unwrap() + 1);
    let correspondences: Vec<Correspondence> = used
        .iter()
        .map(|p| {
            Correspondence::new(id_of(p), vec![source[p.0].clone()], vec![target[p.1].clone()])
        })
        .collect();
    let prob = 1.0 / sets.len() as f64;
    let candidates: Vec<CandidateResult> = sets
        .iter()
        .enumerate()
        .map(|(k, set)| CandidateResult {
            id: format!("s{}", k + 1),
            correspondence_ids: set.iter().map(id_of).collect(),
            probability: prob,
        })
        .collect();
    let crs = CandidateResultSet {
        source_schema: format!("synth{seed}_source"),
        target_schema: format!("synth{seed}_target"),
        correspondences,
        candidates,
    };
    build_view_set(&crs)?;

    let entry = |&(s, t): &(usize, usize), is_match| GroundTruthEntry {
        source_attrs: vec![source[s].name.clone()],
        target_attrs: vec![target[t].name.clone()],
        is_match,
    };
    let truth: Vec<GroundTruthEntry> = used
        .union(&truth_pairs)
        .map(|p| entry(p, truth_pairs.contains(p)))
        .collect();

    let gt = GroundTruth::from_entries(&truth);
    let mut best = (f64::NEG_INFINITY, String::new());
    for c in &crs.candidates {
        let f = candidate_f1(c, &crs, &gt).f1;
        if f > best.0 {
            best = (f, c.id.clone());
        }
    }
    Ok(SynthDataset {
        crs,
        truth,
        best_candidate: best.1,
    })
}

/// `views` distinct random truth rows over `correspondences` columns named
/// `c01, c02, ...`, with weights drawn from [0.5, 1.5) and normalized.
pub fn random_view_set(views: usize, correspondences: usize, seed: u64) -> Result<ViewSet> {
    if views == 0 || correspondences == 0 || (correspondences < 64 && views > 1 << correspondences) {
        return Err(Error::MalformedInput(format!(
            "cannot draw {views} distinct views over {correspondences} correspondences"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<bool>> = Vec::with_capacity(views);
    while rows.len() < views {
        let row: Vec<bool> = (0..correspondences).map(|_| rng.gen_bool(0.5)).collect();
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    let weights: Vec<f64> = (0..views).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    let width = correspondences.to_string().len().max(2);
    let ids = (1..=correspondences).map(|i| format!("c{i:0width$}")).collect();
    ViewSet::new(ids, rows, weights.iter().map(|w| w / total).collect())
}
