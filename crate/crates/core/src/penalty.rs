//! Recurring-error penalty.
//!
//! Each subcategory gets a coefficient from its prevalence, difficulty and
//! importance criteria (sum divided by maximum). The penalty coefficient is
//! the issue-weighted mean of those coefficients over recurring issues,
//! divided by 3 (the largest possible rule coefficient) so it lies in
//! `[0, 1]`. The grade then drops one level at 0.5, and one more for each
//! further 0.2.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::grading::GradingError;
use crate::taxonomy::{Grade, Issue, IssueKey, PenaltyCriteria, RuleRegistry};

/// Default number of recent submissions inspected for recurrences.
pub const DEFAULT_WINDOW: usize = 10;

/// Largest value `rule_coefficient` can take.
pub const MAX_RULE_COEFFICIENT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub student_id: String,
    pub language: String,
    pub timestamp: DateTime<Utc>,
    pub issue_keys: Vec<IssueKey>,
}

impl SubmissionRecord {
    pub fn from_issues(
        student_id: impl Into<String>,
        language: impl Into<String>,
        timestamp: DateTime<Utc>,
        issues: &[Issue],
    ) -> Self {
        Self {
            student_id: student_id.into(),
            language: language.into(),
            timestamp,
            issue_keys: issues.iter().map(Issue::key).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyResult {
    pub coefficient: f64,
    /// Recurring issue count per subcategory.
    pub recurring_counts: BTreeMap<String, usize>,
    pub influencing_rules: BTreeSet<IssueKey>,
    pub final_grade: Grade,
}

/// Current issues whose `(inspector, rule_id)` also occurs in one of the
/// `window` most recent records. `history` must be newest first.
pub fn find_recurring(
    current: &[Issue],
    history: &[SubmissionRecord],
    window: usize,
) -> Vec<Issue> {
    let seen: HashSet<&IssueKey> = history
        .iter()
        .take(window)
        .flat_map(|r| r.issue_keys.iter())
        .collect();
    if seen.is_empty() {
        return Vec::new();
    }
    current
        .iter()
        .filter(|i| seen.contains(&i.key()))
        .cloned()
        .collect()
}

/// `(p + d + i) / max(p, d, i)`, or 0 when all criteria are 0.
pub fn rule_coefficient(c: PenaltyCriteria) -> f64 {
    let max = c.prevalence.max(c.difficulty).max(c.importance);
    if max == 0 {
        return 0.0;
    }
    f64::from(c.prevalence + c.difficulty + c.importance) / f64::from(max)
}

pub fn penalty_coefficient(
    recurring: &[Issue],
    registry: &RuleRegistry,
) -> Result<f64, GradingError> {
    let counts = count_by_subcategory(recurring);
    let total: usize = counts.values().sum();
    if total == 0 {
        return Ok(0.0);
    }
    let mut weighted = 0.0;
    for (sub, &n) in &counts {
        let criteria =
            registry
                .subcategory_criteria(sub)
                .ok_or_else(|| GradingError::UnknownSubcategory {
                    rule: recurring
                        .iter()
                        .find(|i| &i.subcategory_id == sub)
                        .map(|i| i.key().to_string())
                        .unwrap_or_default(),
                    subcategory: sub.clone(),
                })?;
        weighted += n as f64 * rule_coefficient(criteria);
    }
    Ok((weighted / (MAX_RULE_COEFFICIENT * total as f64)).clamp(0.0, 1.0))
}

fn count_by_subcategory(issues: &[Issue]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for issue in issues {
        *counts.entry(issue.subcategory_id.clone()).or_insert(0) += 1;
    }
    counts
}

/// Number of levels the grade drops for a given coefficient.
pub fn reduction_levels(coefficient: f64) -> u8 {
    if coefficient < 0.5 {
        0
    } else if coefficient < 0.7 {
        1
    } else if coefficient < 0.9 {
        2
    } else {
        3
    }
}

pub fn apply_penalty(grade: Grade, coefficient: f64) -> Grade {
    grade.lowered(reduction_levels(coefficient))
}

/// Full penalty step: recurrence detection, coefficient and reduced grade.
pub fn evaluate(
    grade: Grade,
    current: &[Issue],
    history: &[SubmissionRecord],
    window: usize,
    registry: &RuleRegistry,
) -> Result<PenaltyResult, GradingError> {
    let recurring = find_recurring(current, history, window);
    let coefficient = penalty_coefficient(&recurring, registry)?;
    Ok(PenaltyResult {
        coefficient,
        recurring_counts: count_by_subcategory(&recurring),
        influencing_rules: recurring.iter().map(Issue::key).collect(),
        final_grade: apply_penalty(grade, coefficient),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Difficulty, IssueCategory};

    fn issue(inspector: &str, rule: &str, sub: &str) -> Issue {
        Issue {
            rule_id: rule.into(),
            inspector: inspector.into(),
            line: 1,
            column: 0,
            message: String::new(),
            category: IssueCategory::CodeStyle,
            difficulty: Difficulty::Easy,
            subcategory_id: sub.into(),
            metric_value: None,
        }
    }

    fn record(keys: &[(&str, &str)]) -> SubmissionRecord {
        SubmissionRecord {
            student_id: "s".into(),
            language: "python".into(),
            timestamp: Utc::now(),
            issue_keys: keys.iter().map(|(a, b)| IssueKey::new(*a, *b)).collect(),
        }
    }

    #[test]
    fn recurring_examples() {
        let current = vec![
            issue("flake8", "E501", "formatting"),
            issue("flake8", "E501", "formatting"),
        ];
        let history = vec![record(&[("flake8", "E501")])];
        assert_eq!(find_recurring(&current, &history, 10).len(), 2);
        assert!(find_recurring(&current, &[], 10).is_empty());
        assert!(find_recurring(&[], &history, 10).is_empty());
        let old = vec![record(&[]), record(&[]), record(&[("flake8", "E501")])];
        assert!(find_recurring(&current, &old, 2).is_empty());
        assert_eq!(find_recurring(&current, &old, 3).len(), 2);
        // identity includes the inspector
        let other = vec![record(&[("pylint", "E501")])];
        assert!(find_recurring(&current, &other, 10).is_empty());
    }

    #[test]
    fn rule_coefficient_examples() {
        assert_eq!(
            rule_coefficient(PenaltyCriteria::new(0, 0, 0).unwrap()),
            0.0
        );
        assert_eq!(
            rule_coefficient(PenaltyCriteria::new(2, 2, 2).unwrap()),
            3.0
        );
        assert_eq!(
            rule_coefficient(PenaltyCriteria::new(2, 1, 0).unwrap()),
            1.5
        );
    }

    #[test]
    fn apply_penalty_examples() {
        assert_eq!(apply_penalty(Grade::Good, 0.6), Grade::Moderate);
        assert_eq!(apply_penalty(Grade::Excellent, 0.9), Grade::Bad);
        assert_eq!(apply_penalty(Grade::Bad, 0.3), Grade::Bad);
        assert_eq!(apply_penalty(Grade::Moderate, 0.5), Grade::Bad);
        assert_eq!(apply_penalty(Grade::Excellent, 0.49), Grade::Excellent);
        assert_eq!(apply_penalty(Grade::Excellent, 0.7), Grade::Moderate);
    }

    #[test]
    fn coefficient_on_default_registry() {
        let reg = RuleRegistry::default_for("python").unwrap();
        assert_eq!(penalty_coefficient(&[], &reg).unwrap(), 0.0);
        // formatting criteria [2,0,1] -> 1.5; 1.5 / 3 = 0.5
        let e501 = issue("flake8", "E501", "formatting");
        assert_eq!(
            penalty_coefficient(&[e501.clone(), e501.clone()], &reg).unwrap(),
            0.5
        );
        assert!(penalty_coefficient(&[issue("x", "y", "nope")], &reg).is_err());
    }

    #[test]
    fn evaluate_without_recurrence_keeps_grade() {
        let reg = RuleRegistry::default_for("python").unwrap();
        let current = vec![issue("flake8", "E501", "formatting")];
        let r = evaluate(
            Grade::Good,
            &current,
            &[record(&[("pylint", "C0114")])],
            10,
            &reg,
        )
        .unwrap();
        assert_eq!(r.coefficient, 0.0);
        assert!(r.recurring_counts.is_empty());
        assert_eq!(r.final_grade, Grade::Good);
    }
}
