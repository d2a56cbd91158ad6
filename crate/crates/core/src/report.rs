//! Difficulty filtering, feedback messages and the end-to-end grading
//! pipeline producing a [`QualityReport`].

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::Utc;
use serde::Serialize;

use crate::baseline::BaselineRuleSet;
use crate::grading::{aggregate, tally, GradingError, SubcategoryTally};
use crate::history::{HistoryError, HistoryStore};
use crate::inspectors::{inspect_with_baseline, InspectError, InspectorConfig};
use crate::penalty::{self, PenaltyResult, SubmissionRecord, DEFAULT_WINDOW};
use crate::taxonomy::{
    grade_to_score, Difficulty, Grade, Issue, IssueCategory, IssueKey, RuleRegistry,
};

/// Keeps issues at or below the learner's level.
pub fn filter_by_difficulty(issues: &[Issue], level: Difficulty) -> Vec<Issue> {
    issues
        .iter()
        .filter(|i| i.difficulty <= level)
        .cloned()
        .collect()
}

/// Replacement texts for linter messages that are too terse for learners.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageCatalog {
    entries: HashMap<IssueKey, String>,
}

impl MessageCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Catalog built from the registry's `custom_message` entries.
    pub fn from_registry(registry: &RuleRegistry) -> Self {
        let mut catalog = Self::new();
        for rule in registry.rules() {
            if let Some(msg) = &rule.custom_message {
                catalog.insert(rule.key(), msg.clone());
            }
        }
        catalog
    }

    /// Blank explanations are ignored; returns whether the entry was added.
    pub fn insert(&mut self, key: IssueKey, text: impl Into<String>) -> bool {
        let text = text.into();
        if text.trim().is_empty() {
            return false;
        }
        self.entries.insert(key, text);
        true
    }

    pub fn get(&self, key: &IssueKey) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn resolve_message(issue: &Issue, catalog: &MessageCatalog) -> String {
    if let Some(text) = catalog.get(&issue.key()) {
        return text.to_string();
    }
    if issue.message.trim().is_empty() {
        // every reported issue needs some text
        return format!("{} {}", issue.inspector, issue.rule_id);
    }
    issue.message.clone()
}

pub fn summary_text(grade: Grade) -> &'static str {
    match grade {
        Grade::Excellent => "Excellent code quality: no significant issues were found.",
        Grade::Good => "Good code quality: there are a few issues worth fixing.",
        Grade::Moderate => {
            "Moderate code quality: several issues make the code harder to read and maintain."
        }
        Grade::Bad => "Bad code quality: there are serious or numerous issues that need attention.",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportedIssue {
    pub issue: Issue,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statistics {
    pub by_category: BTreeMap<IssueCategory, usize>,
    pub total: usize,
}

impl Statistics {
    pub fn of(issues: &[ReportedIssue]) -> Self {
        let mut by_category: BTreeMap<IssueCategory, usize> =
            IssueCategory::ALL.iter().map(|c| (*c, 0)).collect();
        for r in issues {
            *by_category.entry(r.issue.category).or_insert(0) += 1;
        }
        Self {
            by_category,
            total: issues.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub grade: Grade,
    pub score: u8,
    pub summary: String,
    pub issues: Vec<ReportedIssue>,
    /// Grade before the recurrence penalty.
    pub pre_penalty_grade: Grade,
    pub penalty: Option<PenaltyResult>,
    pub statistics: Statistics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub quality: QualityDoc,
    pub issues: Vec<IssueDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltyDoc>,
    pub statistics: Statistics,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QualityDoc {
    pub code: Grade,
    pub score: u8,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IssueDoc {
    pub code: String,
    pub inspector: String,
    pub line: u32,
    pub column: u32,
    pub category: IssueCategory,
    pub difficulty: Difficulty,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PenaltyDoc {
    pub coefficient: f64,
    pub influencing_rules: Vec<RuleRef>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleRef {
    pub inspector: String,
    pub code: String,
}

impl QualityReport {
    pub fn to_document(&self) -> ReportDocument {
        ReportDocument {
            quality: QualityDoc {
                code: self.grade,
                score: self.score,
                text: self.summary.clone(),
            },
            issues: self
                .issues
                .iter()
                .map(|r| IssueDoc {
                    code: r.issue.rule_id.clone(),
                    inspector: r.issue.inspector.clone(),
                    line: r.issue.line,
                    column: r.issue.column,
                    category: r.issue.category,
                    difficulty: r.issue.difficulty,
                    text: r.text.clone(),
                })
                .collect(),
            penalty: self.penalty.as_ref().map(|p| PenaltyDoc {
                coefficient: p.coefficient,
                influencing_rules: p
                    .influencing_rules
                    .iter()
                    .map(|k| RuleRef {
                        inspector: k.inspector.clone(),
                        code: k.rule_id.clone(),
                    })
                    .collect(),
            }),
            statistics: self.statistics.clone(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("report serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Source(#[from] InspectError),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Grading(#[from] GradingError),
}

/// Intermediate results of grading one submission, before any penalty.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Every classified issue, regardless of difficulty.
    pub all_issues: Vec<Issue>,
    /// Issues at or below the requested difficulty.
    pub issues: Vec<Issue>,
    pub tallies: Vec<SubcategoryTally>,
    pub grade: Grade,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct StudentHistory<'a> {
    pub store: &'a HistoryStore,
    pub student_id: &'a str,
}

/// Grading pipeline for one language.
#[derive(Debug, Clone)]
pub struct GradingEngine {
    registry: RuleRegistry,
    configs: Vec<InspectorConfig>,
    catalog: MessageCatalog,
    baseline: BaselineRuleSet,
    window: usize,
}

impl GradingEngine {
    /// Engine with the registry's custom messages, default baseline limits
    /// and the default recurrence window.
    pub fn new(registry: RuleRegistry, configs: Vec<InspectorConfig>) -> Self {
        let catalog = MessageCatalog::from_registry(&registry);
        Self {
            registry,
            configs,
            catalog,
            baseline: BaselineRuleSet::default(),
            window: DEFAULT_WINDOW,
        }
    }

    pub fn with_catalog(mut self, catalog: MessageCatalog) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn with_baseline(mut self, baseline: BaselineRuleSet) -> Self {
        self.baseline = baseline;
        self
    }

    /// Number of recent submissions searched for recurring issues.
    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn registry(&self) -> &RuleRegistry {
        &self.registry
    }

    pub fn language(&self) -> &str {
        self.registry.language()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn analyze(&self, source: &Path, level: Difficulty) -> Result<Analysis, EngineError> {
        let inspection = inspect_with_baseline(
            source,
            self.registry.language(),
            &self.registry,
            &self.configs,
            &self.baseline,
        )?;
        let issues = filter_by_difficulty(&inspection.issues, level);
        let tallies = tally(&issues, &self.registry)?;
        let grade = aggregate(&tallies);
        Ok(Analysis {
            all_issues: inspection.issues,
            issues,
            tallies,
            grade,
            warnings: inspection.warnings,
        })
    }

    /// Grades against an in-memory history (newest first). `None` skips the
    /// penalty step entirely.
    pub fn grade_with_records(
        &self,
        source: &Path,
        level: Difficulty,
        history: Option<&[SubmissionRecord]>,
    ) -> Result<(QualityReport, Analysis), EngineError> {
        let analysis = self.analyze(source, level)?;
        let penalty = match history {
            Some(records) => Some(penalty::evaluate(
                analysis.grade,
                &analysis.issues,
                records,
                self.window,
                &self.registry,
            )?),
            None => None,
        };
        let grade = penalty.as_ref().map_or(analysis.grade, |p| p.final_grade);
        let issues: Vec<ReportedIssue> = analysis
            .issues
            .iter()
            .map(|i| ReportedIssue {
                text: resolve_message(i, &self.catalog),
                issue: i.clone(),
            })
            .collect();
        let report = QualityReport {
            grade,
            score: grade_to_score(grade),
            summary: summary_text(grade).to_string(),
            statistics: Statistics::of(&issues),
            issues,
            pre_penalty_grade: analysis.grade,
            penalty,
            warnings: analysis.warnings.clone(),
        };
        Ok((report, analysis))
    }

    /// Full pipeline. With a history, recurring issues are penalized and the
    /// unfiltered issues of this submission are appended afterwards.
    pub fn build_report(
        &self,
        source: &Path,
        level: Difficulty,
        history: Option<StudentHistory<'_>>,
    ) -> Result<QualityReport, EngineError> {
        Ok(self.build_report_with_analysis(source, level, history)?.0)
    }

    pub fn build_report_with_analysis(
        &self,
        source: &Path,
        level: Difficulty,
        history: Option<StudentHistory<'_>>,
    ) -> Result<(QualityReport, Analysis), EngineError> {
        let Some(history) = history else {
            return self.grade_with_records(source, level, None);
        };
        let window = history
            .store
            .load_window(history.student_id, self.language(), self.window)?;
        let (mut report, analysis) =
            self.grade_with_records(source, level, Some(&window.records))?;
        report.warnings.extend(window.warnings);
        history.store.append(&SubmissionRecord::from_issues(
            history.student_id,
            self.language(),
            Utc::now(),
            &analysis.all_issues,
        ))?;
        Ok((report, analysis))
    }
}
