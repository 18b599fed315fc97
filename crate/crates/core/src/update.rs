//! Bayesian update of a view distribution from oracle answers.
//!
//! `P(v | a) ∝ P(v) · (conf if a agrees with v, else 1 − conf)`. View order is
//! preserved; views driven to zero probability by hard evidence stay in place with
//! probability 0 so rankings still cover every candidate.

use crate::error::{Error, Result};
use crate::model::ViewSet;
use crate::objective::AnswerFamily;
use crate::oracle::Answer;

fn apply(vs: &ViewSet, corr_id: &str, verdict: bool, confidence: f64) -> Result<ViewSet> {
    if !(0.5..=1.0).contains(&confidence) {
        return Err(Error::MalformedInput(format!(
            "confidence {confidence} outside [0.5, 1.0]"
        )));
    }
    let c = vs.index_of(corr_id)?;
    let mut posterior: Vec<f64> = vs
        .rows()
        .iter()
        .zip(vs.probabilities())
        .map(|(row, &p)| {
            p * if row[c] == verdict {
                confidence
            } else {
                1.0 - confidence
            }
        })
        .collect();
    let norm: f64 = posterior.iter().sum();
    if norm <= 0.0 {
        return Err(Error::InconsistentAnswer(corr_id.to_string()));
    }
    for p in &mut posterior {
        *p /= norm;
    }
    vs.with_probabilities(posterior)
}

/// Posterior after one answer.
pub fn apply_answer(vs: &ViewSet, answer: &Answer) -> Result<ViewSet> {
    apply(vs, &answer.corr_id, answer.verdict, answer.confidence)
}

/// Posterior after every answer of a family, applied in `corr_ids` order.
pub fn apply_family(vs: &ViewSet, family: &AnswerFamily) -> Result<ViewSet> {
    let mut current = vs.clone();
    for ((id, &verdict), &conf) in family
        .corr_ids
        .iter()
        .zip(&family.verdicts)
        .zip(&family.confidences)
    {
        current = apply(&current, id, verdict, conf)?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::employee_crs;
    use crate::model::build_view_set;
    use crate::objective::view_entropy;
    use crate::oracle::Provenance;

    fn answer(id: &str, verdict: bool, confidence: f64) -> Answer {
        Answer {
            corr_id: id.into(),
            verdict,
            confidence,
            provenance: Provenance::Simulated,
            raw_response: None,
        }
    }

    #[test]
    fn worked_example() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let post = apply_answer(&vs, &answer("c4", true, 0.8)).unwrap();
        let expect = [0.647, 0.294, 0.059];
        for (p, e) in post.probabilities().iter().zip(expect) {
            assert!((p - e).abs() < 5e-4, "{p} vs {e}");
        }
        assert!((view_entropy(&post) - 0.809).abs() < 1e-3);
        // input untouched
        assert_eq!(vs.probabilities(), &[0.55, 0.25, 0.20]);
    }

    #[test]
    fn half_confidence_is_a_no_op() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let post = apply_answer(&vs, &answer("c3", false, 0.5)).unwrap();
        for (a, b) in post.probabilities().iter().zip(vs.probabilities()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hard_evidence_zeroes_views() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let post = apply_answer(&vs, &answer("c1", true, 1.0)).unwrap();
        assert_eq!(post.probabilities()[2], 0.0);
        assert!((post.probabilities()[0] - 0.55 / 0.80).abs() < 1e-12);
        assert!(view_entropy(&post) <= view_entropy(&vs));
    }

    #[test]
    fn contradiction_is_an_error() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let post = apply_answer(&vs, &answer("c1", true, 1.0)).unwrap();
        let post = apply_answer(&post, &answer("c5", true, 1.0)).unwrap();
        // only v2 left; now deny c5 with certainty
        assert!(matches!(
            apply_answer(&post, &answer("c5", false, 1.0)),
            Err(Error::InconsistentAnswer(_))
        ));
    }

    #[test]
    fn family_application() {
        let vs = build_view_set(&employee_crs()).unwrap();
        let one = AnswerFamily::single("c4", true, 0.8).unwrap();
        assert_eq!(
            apply_family(&vs, &one).unwrap(),
            apply_answer(&vs, &answer("c4", true, 0.8)).unwrap()
        );
        // c3 true and c5 false with certainty: only v1 agrees
        let hard = AnswerFamily::new(
            vec!["c3".into(), "c5".into(), "c1".into()],
            vec![true, false, true],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        let post = apply_family(&vs, &hard).unwrap();
        assert_eq!(post.probabilities(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn unknown_correspondence() {
        let vs = build_view_set(&employee_crs()).unwrap();
        assert!(matches!(
            apply_answer(&vs, &answer("zz", true, 0.9)),
            Err(Error::UnknownCorrespondence(_))
        ));
    }
}
