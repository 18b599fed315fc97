//! Regenerates the files under `fixtures/`.
//!
//! cargo run -p prompt-matcher --example make_fixtures -- fixtures

use std::path::PathBuf;

use prompt_matcher::eval::{DatasetSpec, ExperimentSpec};
use prompt_matcher::selection::Strategy;
use prompt_matcher::fixtures::{employee_schemas, employee_crs};
use prompt_matcher::oracle::{save_ground_truth, GroundTruthEntry, TranscriptEntry};
use prompt_matcher::synth::{generate, SynthParams};
use prompt_matcher::to_canonical_json;

/// Parameters of the eight synthetic datasets. One candidate is the exact truth.
fn synth_params() -> SynthParams {
    SynthParams {
        attributes: 30,
        candidates: 6,
        match_fraction: 0.8,
        max_drops: 6,
        max_additions: 6,
        confusers: 24,
        include_truth: true,
    }
}

fn write(path: PathBuf, text: String) {
    std::fs::write(&path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(root.join("synth")).unwrap();

    let crs = employee_crs();
    crs.save(root.join("employee.json")).unwrap();
    let truth: Vec<GroundTruthEntry> = crs
        .correspondences
        .iter()
        .map(|c| GroundTruthEntry {
            source_attrs: c.source_attrs.iter().map(|a| a.name.clone()).collect(),
            target_attrs: c.target_attrs.iter().map(|a| a.name.clone()).collect(),
            is_match: c.id != "c5",
        })
        .collect();
    save_ground_truth(root.join("employee_truth.json"), &truth).unwrap();
    let transcript: Vec<TranscriptEntry> = crs
        .correspondences
        .iter()
        .map(|c| TranscriptEntry {
            corr_id: c.id.clone(),
            verdict: c.id != "c5",
            confidence: 0.9,
            template: None,
            prompt_sha256: None,
            timestamp: None,
        })
        .collect();
    let lines: String = transcript
        .iter()
        .map(|e| serde_json::to_string(e).unwrap() + "\n")
        .collect();
    write(root.join("employee_transcript.jsonl"), lines);

    let (source, target) = employee_schemas();
    write(root.join("employee_schema.json"), to_canonical_json(&source));
    write(root.join("employee_info_schema.json"), to_canonical_json(&target));

    let params = synth_params();
    write(root.join("synth/params.json"), to_canonical_json(&params));
    let mut specs = Vec::new();
    for i in 0..8u64 {
        let d = generate(&params, 100 + i).unwrap();
        let crs_path = root.join(format!("synth/d{i}.json"));
        let gt_path = root.join(format!("synth/d{i}_truth.json"));
        d.crs.save(&crs_path).unwrap();
        save_ground_truth(&gt_path, &d.truth).unwrap();
        specs.push(DatasetSpec {
            name: format!("d{i}"),
            crs_path: PathBuf::from(format!("synth/d{i}.json")),
            ground_truth_path: PathBuf::from(format!("synth/d{i}_truth.json")),
        });
    }
    write(root.join("synth/datasets.json"), to_canonical_json(&specs));

    let experiment = ExperimentSpec {
        datasets: specs[..2].to_vec(),
        strategies: vec![Strategy::Greedy, Strategy::Random],
        budgets: Vec::new(),
        budget_fractions: vec![0.2, 0.4, 1.0],
        seeds: (0..5).collect(),
        rounds_k: 4,
        oracle_accuracy: 0.918,
        planning_accuracy: None,
        base: None,
    };
    write(root.join("experiment.json"), to_canonical_json(&experiment));
}
