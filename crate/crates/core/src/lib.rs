//! Code quality grading for student programming submissions.
//!
//! Findings from professional linters (and a small built-in inspector) are
//! whitelisted and classified through a [`taxonomy::RuleRegistry`], graded
//! per subcategory, aggregated into one of four grades, optionally lowered
//! for errors the student keeps repeating, and returned as a
//! [`report::QualityReport`].

pub mod baseline;
pub mod corpus;
pub mod grading;
pub mod history;
pub mod inspectors;
pub mod penalty;
pub mod report;
pub mod taxonomy;

pub use grading::{aggregate, grade_countable, grade_measurable, tally, SubcategoryTally};
pub use history::HistoryStore;
pub use inspectors::{inspect, InspectorConfig, RawFinding};
pub use penalty::{
    apply_penalty, penalty_coefficient, rule_coefficient, PenaltyResult, SubmissionRecord,
};
pub use report::{GradingEngine, QualityReport, StudentHistory};
pub use taxonomy::{
    Difficulty, Grade, Issue, IssueCategory, IssueKey, PenaltyCriteria, RuleRegistry,
};
