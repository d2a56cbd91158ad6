//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use codegrade::inspectors::Adapter;
use codegrade::{Difficulty, Issue, RuleRegistry};
use proptest::prelude::*;
use serde_json::Value;

fn load_schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

pub fn report_schema() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| load_schema("report.schema.json"))
}

pub fn history_schema() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| load_schema("history-record.schema.json"))
}

pub fn registry_schema() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| load_schema("registry.schema.json"))
}

pub fn schema_errors(validator: &jsonschema::Validator, doc: &Value) -> Vec<String> {
    validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect()
}

/// Validates an emitted report document and its cross-field rules. Returns
/// the parsed document.
pub fn check_report(json: &str) -> Value {
    let doc: Value = serde_json::from_str(json).expect("report is JSON");
    let errors = schema_errors(report_schema(), &doc);
    assert!(errors.is_empty(), "schema violations: {errors:?}\n{json}");
    let score = doc["quality"]["score"].as_u64().unwrap();
    let expected = match doc["quality"]["code"].as_str().unwrap() {
        "BAD" => 0,
        "MODERATE" => 1,
        "GOOD" => 2,
        "EXCELLENT" => 3,
        other => panic!("unknown grade {other}"),
    };
    assert_eq!(score, expected);
    let issues = doc["issues"].as_array().unwrap().len() as u64;
    assert_eq!(doc["statistics"]["total"].as_u64().unwrap(), issues);
    let by_category: u64 = doc["statistics"]["by_category"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(by_category, issues);
    doc
}

pub fn python() -> &'static RuleRegistry {
    static R: OnceLock<RuleRegistry> = OnceLock::new();
    R.get_or_init(|| RuleRegistry::default_for("python").unwrap())
}

pub fn java() -> &'static RuleRegistry {
    static R: OnceLock<RuleRegistry> = OnceLock::new();
    R.get_or_init(|| RuleRegistry::default_for("java").unwrap())
}

/// An issue for a registered rule with a plausible metric value.
pub fn issue_for(registry: &RuleRegistry, rule_index: usize, line: u32, metric: f64) -> Issue {
    let rule = &registry.rules()[rule_index % registry.rules().len()];
    let spec = registry.subcategory(&rule.subcategory_id).unwrap();
    Issue {
        rule_id: rule.rule_id.clone(),
        inspector: rule.inspector.clone(),
        line,
        column: 1,
        message: format!("{} reported", rule.rule_id),
        category: spec.category,
        difficulty: rule.difficulty,
        subcategory_id: rule.subcategory_id.clone(),
        metric_value: match spec.kind {
            codegrade::taxonomy::SubcategoryKind::Measurable => Some(metric),
            codegrade::taxonomy::SubcategoryKind::Countable => None,
        },
    }
}

pub fn arb_issues(
    registry: &'static RuleRegistry,
    max: usize,
) -> impl Strategy<Value = Vec<Issue>> {
    prop::collection::vec((any::<usize>(), 1u32..200, 0.0f64..400.0), 0..max).prop_map(move |v| {
        v.into_iter()
            .map(|(r, line, metric)| issue_for(registry, r, line, metric.round()))
            .collect()
    })
}

pub fn arb_difficulty() -> impl Strategy<Value = Difficulty> {
    prop_oneof![
        Just(Difficulty::Easy),
        Just(Difficulty::Medium),
        Just(Difficulty::Hard)
    ]
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn raw_output_name(adapter: Adapter) -> &'static str {
    match adapter {
        Adapter::Flake8 => "output.txt",
        Adapter::Pylint => "output.json",
        Adapter::Checkstyle | Adapter::Pmd => "output.xml",
    }
}

pub fn cases(adapter: Adapter) -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(fixtures().join(adapter.name()))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    dirs
}

pub fn render(adapter: Adapter, case: &Path) -> String {
    let raw = fs::read_to_string(case.join(raw_output_name(adapter))).unwrap();
    let parsed = adapter
        .parse(&raw)
        .unwrap_or_else(|e| panic!("{}: {e}", case.display()));
    let mut text = serde_json::to_string_pretty(&parsed).unwrap();
    text.push('\n');
    text
}

/// Returns the number of cases checked for the adapter.
pub fn check_adapter(adapter: Adapter) -> usize {
    let bless = std::env::var_os("CODEGRADE_BLESS").is_some();
    let all = cases(adapter);
    for case in &all {
        let actual = render(adapter, case);
        let expected_path = case.join("expected.json");
        if bless {
            fs::write(&expected_path, &actual).unwrap();
            continue;
        }
        let expected = fs::read_to_string(&expected_path)
            .unwrap_or_else(|e| panic!("{}: {e}", expected_path.display()));
        assert_eq!(actual, expected, "golden mismatch in {}", case.display());
    }
    all.len()
}
