//! Domain model: grades, categories, difficulties, issues and the rule registry.

mod registry;

pub use registry::{
    classify_issue, load_registry, RegistryError, RuleDescriptor, RuleRegistry, SubcategoryKind,
    SubcategorySpec, Thresholds,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Overall or per-subcategory quality grade.
///
/// Variants are declared in ascending order so the derived `Ord` gives
/// `Bad < Moderate < Good < Excellent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Grade {
    Bad,
    Moderate,
    Good,
    Excellent,
}

impl Grade {
    pub const ALL: [Grade; 4] = [Grade::Bad, Grade::Moderate, Grade::Good, Grade::Excellent];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ordinal: u8) -> Option<Grade> {
        Grade::ALL.get(ordinal as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Grade::Bad => "BAD",
            Grade::Moderate => "MODERATE",
            Grade::Good => "GOOD",
            Grade::Excellent => "EXCELLENT",
        }
    }

    /// Lowers the grade by `levels`, saturating at `Bad`.
    pub fn lowered(self, levels: u8) -> Grade {
        Grade::from_ordinal(self.ordinal().saturating_sub(levels)).unwrap_or(Grade::Bad)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The smaller of two grades.
pub fn grade_min(a: Grade, b: Grade) -> Grade {
    a.min(b)
}

/// Numeric score reported alongside the grade: `BAD` is 0, `EXCELLENT` is 3.
pub fn grade_to_score(grade: Grade) -> u8 {
    grade.ordinal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCategory {
    CodeStyle,
    CodeComplexity,
    ErrorProneness,
    BestPractices,
    MinorIssues,
}

impl IssueCategory {
    pub const ALL: [IssueCategory; 5] = [
        IssueCategory::CodeStyle,
        IssueCategory::CodeComplexity,
        IssueCategory::ErrorProneness,
        IssueCategory::BestPractices,
        IssueCategory::MinorIssues,
    ];

    /// Minor issues are reported but never lower a grade.
    pub fn is_grading(self) -> bool {
        self != IssueCategory::MinorIssues
    }

    pub fn name(self) -> &'static str {
        match self {
            IssueCategory::CodeStyle => "CODE_STYLE",
            IssueCategory::CodeComplexity => "CODE_COMPLEXITY",
            IssueCategory::ErrorProneness => "ERROR_PRONENESS",
            IssueCategory::BestPractices => "BEST_PRACTICES",
            IssueCategory::MinorIssues => "MINOR_ISSUES",
        }
    }
}

impl fmt::Display for IssueCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "EASY",
            Difficulty::Medium => "MEDIUM",
            Difficulty::Hard => "HARD",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty level `{other}`")),
        }
    }
}

/// Identity of a rule across inspectors: `(inspector, rule_id)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IssueKey {
    pub inspector: String,
    pub rule_id: String,
}

impl IssueKey {
    pub fn new(inspector: impl Into<String>, rule_id: impl Into<String>) -> Self {
        Self {
            inspector: inspector.into(),
            rule_id: rule_id.into(),
        }
    }
}

impl fmt::Display for IssueKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.inspector, self.rule_id)
    }
}

/// A classified code quality finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub rule_id: String,
    pub inspector: String,
    /// 1-based source line.
    pub line: u32,
    /// 1-based column, 0 when the tool did not report one.
    pub column: u32,
    pub message: String,
    pub category: IssueCategory,
    pub difficulty: Difficulty,
    pub subcategory_id: String,
    /// Measured value for measurable checks (line length, complexity, ...).
    pub metric_value: Option<f64>,
}

impl Issue {
    pub fn key(&self) -> IssueKey {
        IssueKey::new(&self.inspector, &self.rule_id)
    }
}

/// Recurrence penalty criteria, each on a `0..=2` scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PenaltyCriteria {
    pub prevalence: u8,
    pub difficulty: u8,
    pub importance: u8,
}

impl PenaltyCriteria {
    pub const MAX_LEVEL: u8 = 2;

    /// Returns `None` if any component is above [`Self::MAX_LEVEL`].
    pub fn new(prevalence: u8, difficulty: u8, importance: u8) -> Option<Self> {
        [prevalence, difficulty, importance]
            .iter()
            .all(|&v| v <= Self::MAX_LEVEL)
            .then_some(Self {
                prevalence,
                difficulty,
                importance,
            })
    }

    pub fn componentwise_max(self, other: PenaltyCriteria) -> PenaltyCriteria {
        PenaltyCriteria {
            prevalence: self.prevalence.max(other.prevalence),
            difficulty: self.difficulty.max(other.difficulty),
            importance: self.importance.max(other.importance),
        }
    }
}
