use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::{Difficulty, Issue, IssueCategory, IssueKey, PenaltyCriteria};
use crate::inspectors::RawFinding;

const DEFAULT_PYTHON: &str = include_str!("../../registries/python.toml");
const DEFAULT_JAVA: &str = include_str!("../../registries/java.toml");

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("registry parse error at line {line}{}: {message}", field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Parse {
        line: usize,
        field: Option<String>,
        message: String,
    },
    #[error("invalid registry: {0}")]
    Validation(String),
    #[error("no default registry for language `{0}`")]
    UnknownLanguage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubcategoryKind {
    /// Graded by the number of occurrences.
    Countable,
    /// Graded by the worst observed metric value.
    Measurable,
}

/// Inclusive upper bounds of the three best grades. Anything above
/// `moderate_max` is `BAD`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub excellent_max: f64,
    pub good_max: f64,
    pub moderate_max: f64,
}

impl Thresholds {
    pub fn new(excellent_max: f64, good_max: f64, moderate_max: f64) -> Self {
        Self {
            excellent_max,
            good_max,
            moderate_max,
        }
    }

    fn is_valid(&self) -> bool {
        let all = [self.excellent_max, self.good_max, self.moderate_max];
        all.iter().all(|v| v.is_finite() && *v >= 0.0)
            && self.excellent_max <= self.good_max
            && self.good_max <= self.moderate_max
    }
}

impl<'de> Deserialize<'de> for Thresholds {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [e, g, m] = <[f64; 3]>::deserialize(deserializer)?;
        Ok(Thresholds::new(e, g, m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcategorySpec {
    #[serde(rename = "id")]
    pub subcategory_id: String,
    #[serde(rename = "name")]
    pub display_name: String,
    pub category: IssueCategory,
    pub kind: SubcategoryKind,
    pub thresholds: Thresholds,
    pub grading: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleDescriptor {
    pub inspector: String,
    pub rule_id: String,
    pub category: IssueCategory,
    pub difficulty: Difficulty,
    pub subcategory_id: String,
    pub penalty: PenaltyCriteria,
    pub custom_message: Option<String>,
    pub enabled: bool,
}

impl RuleDescriptor {
    pub fn key(&self) -> IssueKey {
        IssueKey::new(&self.inspector, &self.rule_id)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    language: String,
    #[serde(default)]
    subcategories: Vec<SubcategorySpec>,
    #[serde(default)]
    rules: Vec<RuleEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    inspector: String,
    rule_id: String,
    subcategory: String,
    difficulty: Difficulty,
    #[serde(deserialize_with = "deserialize_criteria")]
    penalty: PenaltyCriteria,
    custom_message: Option<String>,
    #[serde(default = "enabled_by_default")]
    enabled: bool,
}

fn enabled_by_default() -> bool {
    true
}

fn deserialize_criteria<'de, D: Deserializer<'de>>(d: D) -> Result<PenaltyCriteria, D::Error> {
    let [p, dif, imp] = <[u8; 3]>::deserialize(d)?;
    PenaltyCriteria::new(p, dif, imp).ok_or_else(|| {
        serde::de::Error::custom(format!(
            "penalty criteria must each be in 0..=2, got [{p}, {dif}, {imp}]"
        ))
    })
}

/// Whitelist of linter rules with their classification, plus the
/// subcategories they are graded in.
#[derive(Debug, Clone)]
pub struct RuleRegistry {
    language: String,
    rules: Vec<RuleDescriptor>,
    subcategories: Vec<SubcategorySpec>,
    rule_index: HashMap<IssueKey, usize>,
    subcategory_index: HashMap<String, usize>,
}

impl RuleRegistry {
    /// Builds a registry, checking every structural invariant.
    pub fn new(
        language: impl Into<String>,
        subcategories: Vec<SubcategorySpec>,
        rules: Vec<RuleDescriptor>,
    ) -> Result<Self, RegistryError> {
        let language = language.into();
        if language.trim().is_empty() {
            return Err(RegistryError::Validation(
                "language must not be empty".into(),
            ));
        }

        let mut subcategory_index = HashMap::new();
        for (i, sub) in subcategories.iter().enumerate() {
            if sub.subcategory_id.is_empty() {
                return Err(RegistryError::Validation("empty subcategory id".into()));
            }
            if subcategory_index
                .insert(sub.subcategory_id.clone(), i)
                .is_some()
            {
                return Err(RegistryError::Validation(format!(
                    "duplicate subcategory `{}`",
                    sub.subcategory_id
                )));
            }
            if !sub.thresholds.is_valid() {
                return Err(RegistryError::Validation(format!(
                    "subcategory `{}`: thresholds must be non-negative and ascending",
                    sub.subcategory_id
                )));
            }
            if sub.grading != sub.category.is_grading() {
                return Err(RegistryError::Validation(format!(
                    "subcategory `{}`: grading must be false exactly for MINOR_ISSUES",
                    sub.subcategory_id
                )));
            }
        }

        let mut rule_index = HashMap::new();
        let mut measurable_users: HashMap<&str, BTreeSet<IssueKey>> = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            if rule.inspector.is_empty() || rule.rule_id.is_empty() {
                return Err(RegistryError::Validation(
                    "rule inspector and rule_id must be non-empty".into(),
                ));
            }
            let Some(&sub_idx) = subcategory_index.get(&rule.subcategory_id) else {
                return Err(RegistryError::Validation(format!(
                    "rule {}:{} references unknown subcategory `{}`",
                    rule.inspector, rule.rule_id, rule.subcategory_id
                )));
            };
            let sub = &subcategories[sub_idx];
            if rule.category != sub.category {
                return Err(RegistryError::Validation(format!(
                    "rule {}:{} has category {} but subcategory `{}` is {}",
                    rule.inspector, rule.rule_id, rule.category, sub.subcategory_id, sub.category
                )));
            }
            if rule_index.insert(rule.key(), i).is_some() {
                return Err(RegistryError::Validation(format!(
                    "duplicate rule {}:{}",
                    rule.inspector, rule.rule_id
                )));
            }
            if sub.kind == SubcategoryKind::Measurable {
                measurable_users
                    .entry(sub.subcategory_id.as_str())
                    .or_default()
                    .insert(rule.key());
            }
        }
        if let Some((sub, users)) = measurable_users.iter().find(|(_, u)| u.len() > 1) {
            let names: Vec<_> = users.iter().map(ToString::to_string).collect();
            return Err(RegistryError::Validation(format!(
                "measurable subcategory `{sub}` is shared by several rules: {}",
                names.join(", ")
            )));
        }

        Ok(Self {
            language,
            rules,
            subcategories,
            rule_index,
            subcategory_index,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RegistryError> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| parse_error(text, &e))?;

        let mut rules = Vec::with_capacity(file.rules.len());
        for entry in file.rules {
            // Category comes from the subcategory; dangling references are
            // reported by `new`.
            let category = file
                .subcategories
                .iter()
                .find(|s| s.subcategory_id == entry.subcategory)
                .map(|s| s.category)
                .unwrap_or(IssueCategory::MinorIssues);
            rules.push(RuleDescriptor {
                inspector: entry.inspector,
                rule_id: entry.rule_id,
                category,
                difficulty: entry.difficulty,
                subcategory_id: entry.subcategory,
                penalty: entry.penalty,
                custom_message: entry.custom_message.filter(|m| !m.trim().is_empty()),
                enabled: entry.enabled,
            });
        }
        Self::new(file.language, file.subcategories, rules)
    }

    /// The registry shipped with the crate for `language`.
    pub fn default_for(language: &str) -> Result<Self, RegistryError> {
        let text = match language {
            "python" => DEFAULT_PYTHON,
            "java" => DEFAULT_JAVA,
            other => return Err(RegistryError::UnknownLanguage(other.to_string())),
        };
        Self::from_toml_str(text)
    }

    /// Languages with a shipped default registry.
    pub fn default_languages() -> &'static [&'static str] {
        &["python", "java"]
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn rules(&self) -> &[RuleDescriptor] {
        &self.rules
    }

    pub fn enabled_rules(&self) -> impl Iterator<Item = &RuleDescriptor> {
        self.rules.iter().filter(|r| r.enabled)
    }

    pub fn subcategories(&self) -> &[SubcategorySpec] {
        &self.subcategories
    }

    pub fn rule(&self, inspector: &str, rule_id: &str) -> Option<&RuleDescriptor> {
        self.rule_index
            .get(&IssueKey::new(inspector, rule_id))
            .map(|&i| &self.rules[i])
    }

    pub fn subcategory(&self, id: &str) -> Option<&SubcategorySpec> {
        self.subcategory_index
            .get(id)
            .map(|&i| &self.subcategories[i])
    }

    /// Position of a subcategory in declaration order.
    pub fn subcategory_position(&self, id: &str) -> Option<usize> {
        self.subcategory_index.get(id).copied()
    }

    /// Penalty criteria of a subcategory: the componentwise maximum over
    /// the criteria of its rules.
    pub fn subcategory_criteria(&self, id: &str) -> Option<PenaltyCriteria> {
        self.subcategory(id)?;
        Some(
            self.rules
                .iter()
                .filter(|r| r.subcategory_id == id)
                .fold(PenaltyCriteria::default(), |acc, r| {
                    acc.componentwise_max(r.penalty)
                }),
        )
    }
}

fn parse_error(text: &str, err: &toml::de::Error) -> RegistryError {
    let line = err
        .span()
        .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    let message = err.message().to_string();
    let field = message
        .split('`')
        .nth(1)
        .filter(|f| !f.is_empty() && f.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
        .map(str::to_string);
    RegistryError::Parse {
        line,
        field,
        message,
    }
}

pub fn load_registry(path: &Path) -> Result<RuleRegistry, RegistryError> {
    let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RuleRegistry::from_toml_str(&text)
}

/// Maps a raw finding through the registry whitelist. Findings for unknown
/// or disabled rules yield `None`.
pub fn classify_issue(raw: &RawFinding, registry: &RuleRegistry) -> Option<Issue> {
    let rule = registry.rule(&raw.inspector, &raw.rule_id)?;
    if !rule.enabled || raw.line == 0 {
        return None;
    }
    Some(Issue {
        rule_id: raw.rule_id.clone(),
        inspector: raw.inspector.clone(),
        line: raw.line,
        column: raw.column,
        message: raw.message.clone(),
        category: rule.category,
        difficulty: rule.difficulty,
        subcategory_id: rule.subcategory_id.clone(),
        metric_value: raw.metric_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"
language = "python"

[[subcategories]]
id = "formatting"
name = "Formatting"
category = "CODE_STYLE"
kind = "COUNTABLE"
thresholds = [0, 4, 9]
grading = true
"#;

    fn raw(inspector: &str, rule: &str) -> RawFinding {
        RawFinding {
            inspector: inspector.into(),
            rule_id: rule.into(),
            line: 3,
            column: 80,
            message: "line too long".into(),
            metric_value: None,
        }
    }

    #[test]
    fn empty_rules_is_legal() {
        let reg = RuleRegistry::from_toml_str(HEADER).unwrap();
        assert_eq!(reg.rules().len(), 0);
        assert_eq!(reg.language(), "python");
    }

    #[test]
    fn dangling_subcategory_is_rejected() {
        let text = format!(
            "{HEADER}\n[[rules]]\ninspector = \"flake8\"\nrule_id = \"E501\"\nsubcategory = \"nope\"\ndifficulty = \"EASY\"\npenalty = [2, 0, 1]\n"
        );
        let err = RuleRegistry::from_toml_str(&text).unwrap_err();
        assert!(
            matches!(err, RegistryError::Validation(ref m) if m.contains("nope")),
            "{err}"
        );
    }

    #[test]
    fn duplicate_rule_is_rejected() {
        let rule = "\n[[rules]]\ninspector = \"flake8\"\nrule_id = \"E501\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [2, 0, 1]\n";
        let text = format!("{HEADER}{rule}{rule}");
        let err = RuleRegistry::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, RegistryError::Validation(ref m) if m.contains("duplicate")));
    }

    #[test]
    fn parse_error_reports_line_and_field() {
        let text = format!(
            "{HEADER}\n[[rules]]\ninspector = \"flake8\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [2, 0, 1]\n"
        );
        match RuleRegistry::from_toml_str(&text).unwrap_err() {
            RegistryError::Parse { line, field, .. } => {
                assert!(line > 10, "line {line}");
                assert_eq!(field.as_deref(), Some("rule_id"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn out_of_range_criteria_is_a_parse_error() {
        let text = format!(
            "{HEADER}\n[[rules]]\ninspector = \"flake8\"\nrule_id = \"E501\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [3, 0, 1]\n"
        );
        assert!(matches!(
            RuleRegistry::from_toml_str(&text),
            Err(RegistryError::Parse { .. })
        ));
    }

    #[test]
    fn descending_thresholds_are_rejected() {
        let text = HEADER.replace("[0, 4, 9]", "[5, 4, 9]");
        assert!(matches!(
            RuleRegistry::from_toml_str(&text),
            Err(RegistryError::Validation(_))
        ));
    }

    #[test]
    fn grading_flag_must_match_category() {
        let text = HEADER.replace("grading = true", "grading = false");
        assert!(matches!(
            RuleRegistry::from_toml_str(&text),
            Err(RegistryError::Validation(_))
        ));
    }

    #[test]
    fn measurable_subcategory_has_single_rule() {
        let text = r#"
language = "python"
[[subcategories]]
id = "line_length"
name = "Line length"
category = "CODE_STYLE"
kind = "MEASURABLE"
thresholds = [120, 150, 200]
grading = true
[[rules]]
inspector = "baseline"
rule_id = "BL001"
subcategory = "line_length"
difficulty = "EASY"
penalty = [2, 0, 1]
[[rules]]
inspector = "flake8"
rule_id = "E501"
subcategory = "line_length"
difficulty = "EASY"
penalty = [2, 0, 1]
"#;
        assert!(matches!(
            RuleRegistry::from_toml_str(text),
            Err(RegistryError::Validation(ref m)) if m.contains("measurable")
        ));
    }

    #[test]
    fn classify_whitelist_semantics() {
        let text = format!(
            "{HEADER}\n[[rules]]\ninspector = \"flake8\"\nrule_id = \"E501\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [2, 0, 1]\n\n[[rules]]\ninspector = \"flake8\"\nrule_id = \"W291\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [2, 0, 1]\nenabled = false\n"
        );
        let reg = RuleRegistry::from_toml_str(&text).unwrap();
        let issue = classify_issue(&raw("flake8", "E501"), &reg).unwrap();
        assert_eq!(issue.category, IssueCategory::CodeStyle);
        assert_eq!(issue.subcategory_id, "formatting");
        assert_eq!((issue.line, issue.column), (3, 80));
        assert!(classify_issue(&raw("flake8", "E999"), &reg).is_none());
        assert!(classify_issue(&raw("pylint", "E501"), &reg).is_none());
        // disabled rules stay in the registry but never classify
        assert!(reg.rule("flake8", "W291").is_some());
        assert!(classify_issue(&raw("flake8", "W291"), &reg).is_none());
    }

    #[test]
    fn default_registries_load_and_cover_taxonomy() {
        for lang in RuleRegistry::default_languages() {
            let reg = RuleRegistry::default_for(lang).unwrap();
            for cat in IssueCategory::ALL {
                assert!(
                    reg.enabled_rules().any(|r| r.category == cat),
                    "{lang}: {cat}"
                );
            }
            for d in Difficulty::ALL {
                assert!(
                    reg.enabled_rules().any(|r| r.difficulty == d),
                    "{lang}: {d}"
                );
            }
        }
        assert!(RuleRegistry::default_for("python").unwrap().rules().len() >= 40);
        assert!(matches!(
            RuleRegistry::default_for("fortran"),
            Err(RegistryError::UnknownLanguage(_))
        ));
    }

    #[test]
    fn default_python_maps_e501_to_code_style() {
        let reg = RuleRegistry::default_for("python").unwrap();
        let issue = classify_issue(&raw("flake8", "E501"), &reg).unwrap();
        assert_eq!(issue.category, IssueCategory::CodeStyle);
    }

    #[test]
    fn subcategory_criteria_is_componentwise_max() {
        let text = format!(
            "{HEADER}\n[[rules]]\ninspector = \"a\"\nrule_id = \"1\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [2, 0, 0]\n\n[[rules]]\ninspector = \"a\"\nrule_id = \"2\"\nsubcategory = \"formatting\"\ndifficulty = \"EASY\"\npenalty = [0, 1, 2]\n"
        );
        let reg = RuleRegistry::from_toml_str(&text).unwrap();
        assert_eq!(
            reg.subcategory_criteria("formatting"),
            PenaltyCriteria::new(2, 1, 2)
        );
        assert_eq!(reg.subcategory_criteria("missing"), None);
    }
}
