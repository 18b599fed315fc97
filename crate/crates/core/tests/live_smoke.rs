//! Ten real oracle calls. Needs network access and credentials, so it only
//! runs on request:
//!
//! ORACLE_API_KEY=... ORACLE_ENDPOINT=https://.../v1/chat/completions ORACLE_MODEL=... \
//!     cargo test -p prompt-matcher --test live_smoke -- --ignored --nocapture

use std::path::PathBuf;

use prompt_matcher::eval::GroundTruth;
use prompt_matcher::model::CandidateResultSet;
use prompt_matcher::oracle::{schema_name, LlmConfig, LlmOracle, Oracle, Template};

#[test]
#[ignore = "calls a live LLM endpoint"]
fn ten_live_verifications() {
    let endpoint = std::env::var("ORACLE_ENDPOINT").expect("ORACLE_ENDPOINT");
    let model = std::env::var("ORACLE_MODEL").expect("ORACLE_MODEL");
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let crs = CandidateResultSet::load(root.join("synth/d0.json")).unwrap();
    let truth = GroundTruth::load(root.join("synth/d0_truth.json")).unwrap();
    for template in [Template::Semantic, Template::Abbreviation] {
        let oracle = LlmOracle::from_env(LlmConfig::new(&endpoint, &model, template), schema_name(&crs)).unwrap();
        let batch: Vec<_> = crs.correspondences.iter().take(10).collect();
        let mut correct = 0;
        for (c, answer) in batch.iter().zip(oracle.verify_batch(&batch)) {
            let answer = answer.unwrap();
            assert!((0.5..=1.0).contains(&answer.confidence));
            if answer.verdict == truth.contains(c) {
                correct += 1;
            }
        }
        println!("{template}: {correct}/10 verdicts agree with the ground truth");
    }
}
