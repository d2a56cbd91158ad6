//! Per-subcategory grades and their aggregation into one grade.

use serde::Serialize;

use crate::taxonomy::{Grade, Issue, RuleRegistry, SubcategoryKind, SubcategorySpec};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GradingError {
    #[error("issue {rule} refers to unknown subcategory `{subcategory}`")]
    UnknownSubcategory { rule: String, subcategory: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcategoryTally {
    pub subcategory_id: String,
    pub kind: SubcategoryKind,
    pub grading: bool,
    pub count: usize,
    /// Largest metric value seen; only set for measurable subcategories.
    pub worst_metric: Option<f64>,
    pub grade: Grade,
}

fn ladder(value: f64, spec: &SubcategorySpec) -> Grade {
    let t = &spec.thresholds;
    if value <= t.excellent_max {
        Grade::Excellent
    } else if value <= t.good_max {
        Grade::Good
    } else if value <= t.moderate_max {
        Grade::Moderate
    } else {
        Grade::Bad
    }
}

pub fn grade_countable(count: usize, spec: &SubcategorySpec) -> Grade {
    ladder(count as f64, spec)
}

pub fn grade_measurable(worst: f64, spec: &SubcategorySpec) -> Grade {
    ladder(worst, spec)
}

/// Groups issues by subcategory and grades each group. Only subcategories
/// with at least one issue are returned, in registry declaration order;
/// absent subcategories are implicitly `EXCELLENT`.
///
/// A measurable issue without a metric value is graded as a countable one
/// would be, by its count.
pub fn tally(
    issues: &[Issue],
    registry: &RuleRegistry,
) -> Result<Vec<SubcategoryTally>, GradingError> {
    let mut buckets: Vec<Option<(usize, Option<f64>)>> = vec![None; registry.subcategories().len()];
    for issue in issues {
        let pos = registry
            .subcategory_position(&issue.subcategory_id)
            .ok_or_else(|| GradingError::UnknownSubcategory {
                rule: issue.key().to_string(),
                subcategory: issue.subcategory_id.clone(),
            })?;
        let (count, worst) = buckets[pos].get_or_insert((0, None));
        *count += 1;
        if let Some(v) = issue.metric_value {
            *worst = Some(worst.map_or(v, |w: f64| w.max(v)));
        }
    }

    Ok(registry
        .subcategories()
        .iter()
        .zip(buckets)
        .filter_map(|(spec, bucket)| {
            let (count, worst) = bucket?;
            let (worst_metric, grade) = match spec.kind {
                SubcategoryKind::Countable => (None, grade_countable(count, spec)),
                SubcategoryKind::Measurable => match worst {
                    Some(w) => (Some(w), grade_measurable(w, spec)),
                    None => (None, grade_countable(count, spec)),
                },
            };
            Some(SubcategoryTally {
                subcategory_id: spec.subcategory_id.clone(),
                kind: spec.kind,
                grading: spec.grading,
                count,
                worst_metric,
                grade,
            })
        })
        .collect())
}

/// Minimum grade over the grading tallies; `EXCELLENT` when there are none.
pub fn aggregate(tallies: &[SubcategoryTally]) -> Grade {
    tallies
        .iter()
        .filter(|t| t.grading)
        .map(|t| t.grade)
        .min()
        .unwrap_or(Grade::Excellent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Difficulty, IssueCategory, Thresholds};

    fn spec(kind: SubcategoryKind, t: (f64, f64, f64)) -> SubcategorySpec {
        SubcategorySpec {
            subcategory_id: "s".into(),
            display_name: "S".into(),
            category: IssueCategory::CodeStyle,
            kind,
            thresholds: Thresholds::new(t.0, t.1, t.2),
            grading: true,
        }
    }

    fn issue(rule: &str, sub: &str, metric: Option<f64>) -> Issue {
        Issue {
            rule_id: rule.into(),
            inspector: "baseline".into(),
            line: 1,
            column: 0,
            message: "m".into(),
            category: IssueCategory::CodeStyle,
            difficulty: Difficulty::Easy,
            subcategory_id: sub.into(),
            metric_value: metric,
        }
    }

    #[test]
    fn countable_ladder() {
        let s = spec(SubcategoryKind::Countable, (0.0, 4.0, 9.0));
        assert_eq!(grade_countable(0, &s), Grade::Excellent);
        assert_eq!(grade_countable(4, &s), Grade::Good);
        assert_eq!(grade_countable(5, &s), Grade::Moderate);
        assert_eq!(grade_countable(9, &s), Grade::Moderate);
        assert_eq!(grade_countable(10, &s), Grade::Bad);
    }

    #[test]
    fn measurable_ladder() {
        let s = spec(SubcategoryKind::Measurable, (120.0, 150.0, 200.0));
        assert_eq!(grade_measurable(119.0, &s), Grade::Excellent);
        assert_eq!(grade_measurable(120.0, &s), Grade::Excellent);
        assert_eq!(grade_measurable(151.0, &s), Grade::Moderate);
        assert_eq!(grade_measurable(201.0, &s), Grade::Bad);
    }

    #[test]
    fn tally_counts_and_worst() {
        let reg = RuleRegistry::default_for("python").unwrap();
        let issues = vec![
            issue("BL002", "formatting", None),
            issue("BL002", "formatting", None),
            issue("BL003", "formatting", None),
            issue("BL001", "line_length", Some(130.0)),
            issue("BL001", "line_length", Some(180.0)),
        ];
        let t = tally(&issues, &reg).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(
            (t[0].subcategory_id.as_str(), t[0].count),
            ("formatting", 3)
        );
        assert_eq!(t[0].worst_metric, None);
        assert_eq!(t[1].worst_metric, Some(180.0));
        assert_eq!(t[1].count, 2);
        assert_eq!(t[1].grade, Grade::Moderate);
        assert!(tally(&[], &reg).unwrap().is_empty());
    }

    #[test]
    fn tally_unknown_subcategory() {
        let reg = RuleRegistry::default_for("python").unwrap();
        assert!(matches!(
            tally(&[issue("X", "nope", None)], &reg),
            Err(GradingError::UnknownSubcategory { .. })
        ));
    }

    fn graded(grade: Grade, grading: bool) -> SubcategoryTally {
        SubcategoryTally {
            subcategory_id: "x".into(),
            kind: SubcategoryKind::Countable,
            grading,
            count: 1,
            worst_metric: None,
            grade,
        }
    }

    #[test]
    fn aggregate_is_min_over_grading() {
        let t = [
            graded(Grade::Good, true),
            graded(Grade::Moderate, true),
            graded(Grade::Excellent, true),
        ];
        assert_eq!(aggregate(&t), Grade::Moderate);
        assert_eq!(aggregate(&[graded(Grade::Bad, false)]), Grade::Excellent);
        assert_eq!(aggregate(&[]), Grade::Excellent);
    }
}
