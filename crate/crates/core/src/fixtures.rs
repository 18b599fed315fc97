//! Built-in example data: the Employee / EmployeeInfo candidate result set used
//! throughout the documentation and tests.

use crate::eval::{Schema, SchemaAttribute};
use crate::model::{AttributeRef, CandidateResult, CandidateResultSet, Correspondence, SchemaSide};

fn corr(id: &str, source: &[(&str, &[&str])], target: &[(&str, &[&str])]) -> Correspondence {
    let attrs = |side, list: &[(&str, &[&str])]| {
        list.iter()
            .map(|(name, values)| AttributeRef::new(side, *name).with_values(values.iter().copied()))
            .collect()
    };
    Correspondence::new(id, attrs(SchemaSide::Source, source), attrs(SchemaSide::Target, target))
        .with_cost(1)
}

/// Three candidate matchings between `Employee` and `EmployeeInfo` over six
/// correspondences, with probabilities 0.55 / 0.25 / 0.20. Every correspondence
/// costs one token.
pub fn employee_crs() -> CandidateResultSet {
    let correspondences = vec![
        corr(
            "c1",
            &[("ID", &["1001", "1002", "1003", "1004", "1005"])],
            &[("EmployeeID", &["E-1001", "E-1002", "E-1003", "E-1004", "E-1005"])],
        ),
        corr(
            "c2",
            &[("Name", &["Alice Smith", "Bob Jones", "Carol White"])],
            &[
                ("First Name", &["Alice", "Bob", "Carol"]),
                ("Last Name", &["Smith", "Jones", "White"]),
            ],
        ),
        corr(
            "c3",
            &[("Email", &["alice@corp.com", "bob@corp.com", "carol@corp.com", "dan@corp.com"])],
            &[("Email Address", &["alice@corp.com", "bob@corp.com"])],
        ),
        corr(
            "c4",
            &[("Address", &["12 Oak St", "9 Elm Rd", "4 Pine Ave"])],
            &[("Home Address", &["12 Oak St", "9 Elm Rd", "4 Pine Ave"])],
        ),
        corr(
            "c5",
            &[("Age", &["34", "45", "29"])],
            &[("Years of Experience", &["10", "22", "5"])],
        ),
        corr("c6", &[("Gender", &["F", "M", "F"])], &[("Sex", &[])]),
    ];
    let cand = |id: &str, ids: &[&str], p: f64| CandidateResult {
        id: id.into(),
        correspondence_ids: ids.iter().map(|s| s.to_string()).collect(),
        probability: p,
    };
    CandidateResultSet {
        source_schema: "Employee".into(),
        target_schema: "EmployeeInfo".into(),
        correspondences,
        candidates: vec![
            cand("s1", &["c1", "c2", "c3", "c4", "c6"], 0.55),
            cand("s2", &["c1", "c2", "c4", "c5", "c6"], 0.25),
            cand("s3", &["c2", "c3", "c6"], 0.20),
        ],
    }
}

/// The two toy schemas behind [`employee_crs`], as plain attribute lists.
pub fn employee_schemas() -> (Schema, Schema) {
    let schema = |name: &str, attrs: &[(&str, &[&str])]| Schema {
        name: name.into(),
        attributes: attrs
            .iter()
            .map(|(n, v)| SchemaAttribute {
                name: n.to_string(),
                values: v.iter().map(|s| s.to_string()).collect(),
            })
            .collect(),
    };
    (
        schema(
            "Employee",
            &[
                ("ID", &["1001", "1002", "1003"]),
                ("Name", &["Alice Smith", "Bob Jones", "Carol White"]),
                ("Email", &["alice@corp.com", "bob@corp.com", "carol@corp.com"]),
                ("Address", &["12 Oak St", "9 Elm Rd", "4 Pine Ave"]),
                ("Age", &["34", "45", "29"]),
                ("Gender", &["F", "M", "F"]),
            ],
        ),
        schema(
            "EmployeeInfo",
            &[
                ("EmployeeID", &["E-1001", "E-1002", "E-1003"]),
                ("First Name", &["Alice", "Bob", "Carol"]),
                ("Last Name", &["Smith", "Jones", "White"]),
                ("Email Address", &["alice@corp.com", "bob@corp.com"]),
                ("Home Address", &["12 Oak St", "9 Elm Rd", "4 Pine Ave"]),
                ("Years of Experience", &["10", "22", "5"]),
                ("Sex", &[]),
            ],
        ),
    )
}
