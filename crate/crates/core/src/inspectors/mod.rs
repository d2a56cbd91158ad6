//! External linter adapters and the `inspect` entry point that turns a
//! source file into classified issues.

mod parsers;
mod runner;

pub use parsers::{parse_checkstyle, parse_flake8, parse_pmd, parse_pylint, ParseError, Parsed};
pub use runner::{
    resolve_executable, resolve_executable_in, run_inspector, RunError, ToolOutput, TOOL_PATH_ENV,
};

use std::collections::HashSet;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::baseline::{self, BaselineRuleSet};
use crate::taxonomy::{classify_issue, Issue, RuleRegistry};

const DEFAULT_INSPECTORS: &str = include_str!("../../registries/inspectors.toml");

/// One finding as reported by a tool, before registry classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFinding {
    pub inspector: String,
    pub rule_id: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub metric_value: Option<f64>,
}

/// Supported external tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adapter {
    Flake8,
    Pylint,
    Checkstyle,
    Pmd,
}

impl Adapter {
    pub const ALL: [Adapter; 4] = [
        Adapter::Flake8,
        Adapter::Pylint,
        Adapter::Checkstyle,
        Adapter::Pmd,
    ];

    pub fn from_name(name: &str) -> Option<Adapter> {
        Adapter::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Adapter::Flake8 => "flake8",
            Adapter::Pylint => "pylint",
            Adapter::Checkstyle => "checkstyle",
            Adapter::Pmd => "pmd",
        }
    }

    pub fn language(self) -> &'static str {
        match self {
            Adapter::Flake8 | Adapter::Pylint => "python",
            Adapter::Checkstyle | Adapter::Pmd => "java",
        }
    }

    /// Full argument list: pinned options, then `extra`, then the source.
    pub fn command_args(self, source: &Path, extra: &[String]) -> Vec<String> {
        let source = source.display().to_string();
        let mut args: Vec<String> = match self {
            Adapter::Flake8 => vec!["--max-complexity".into(), "10".into()],
            Adapter::Pylint => vec!["--output-format=json".into(), "--persistent=n".into()],
            Adapter::Checkstyle => vec![
                "-f".into(),
                "xml".into(),
                "-c".into(),
                "/google_checks.xml".into(),
            ],
            Adapter::Pmd => vec![
                "check".into(),
                "--no-progress".into(),
                "-f".into(),
                "xml".into(),
                "-R".into(),
                "rulesets/java/quickstart.xml".into(),
            ],
        };
        args.extend(extra.iter().cloned());
        if self == Adapter::Pmd {
            args.push("-d".into());
        }
        args.push(source);
        args
    }

    pub fn parse(self, output: &str) -> Result<Parsed, ParseError> {
        match self {
            Adapter::Flake8 => Ok(parse_flake8(output)),
            Adapter::Pylint => parse_pylint(output),
            Adapter::Checkstyle => parse_checkstyle(output),
            Adapter::Pmd => parse_pmd(output),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InspectorConfig {
    pub inspector: String,
    pub executable: String,
    pub extra_args: Vec<String>,
    pub timeout: Duration,
    pub enabled: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read inspector config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("inspector config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("inspector config: {0}")]
    Invalid(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    inspectors: Vec<ConfigEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigEntry {
    inspector: String,
    executable: String,
    #[serde(default)]
    extra_args: Vec<String>,
    timeout_secs: f64,
    #[serde(default = "default_enabled")]
    enabled: bool,
}

fn default_enabled() -> bool {
    true
}

impl InspectorConfig {
    pub fn parse_file(text: &str) -> Result<Vec<InspectorConfig>, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        let mut seen = HashSet::new();
        file.inspectors
            .into_iter()
            .map(|e| {
                if Adapter::from_name(&e.inspector).is_none() {
                    return Err(ConfigError::Invalid(format!(
                        "unknown inspector `{}`",
                        e.inspector
                    )));
                }
                if !seen.insert(e.inspector.clone()) {
                    return Err(ConfigError::Invalid(format!(
                        "inspector `{}` listed twice",
                        e.inspector
                    )));
                }
                if !(e.timeout_secs.is_finite() && e.timeout_secs > 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "inspector `{}`: timeout must be positive",
                        e.inspector
                    )));
                }
                Ok(InspectorConfig {
                    inspector: e.inspector,
                    executable: e.executable,
                    extra_args: e.extra_args,
                    timeout: Duration::from_secs_f64(e.timeout_secs),
                    enabled: e.enabled,
                })
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Vec<InspectorConfig>, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_file(&text)
    }

    pub fn defaults() -> Vec<InspectorConfig> {
        Self::parse_file(DEFAULT_INSPECTORS).expect("shipped inspector config is valid")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InspectError {
    #[error("source file not found: {0}")]
    SourceNotFound(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inspection {
    pub issues: Vec<Issue>,
    pub warnings: Vec<String>,
}

/// Runs the baseline checks and every enabled external inspector for
/// `language`, with default baseline limits.
pub fn inspect(
    source_path: &Path,
    language: &str,
    registry: &RuleRegistry,
    configs: &[InspectorConfig],
) -> Result<Inspection, InspectError> {
    inspect_with_baseline(
        source_path,
        language,
        registry,
        configs,
        &BaselineRuleSet::default(),
    )
}

pub fn inspect_with_baseline(
    source_path: &Path,
    language: &str,
    registry: &RuleRegistry,
    configs: &[InspectorConfig],
    baseline_rules: &BaselineRuleSet,
) -> Result<Inspection, InspectError> {
    let bytes = std::fs::read(source_path)
        .map_err(|_| InspectError::SourceNotFound(source_path.display().to_string()))?;
    if !source_path.is_file() {
        return Err(InspectError::SourceNotFound(
            source_path.display().to_string(),
        ));
    }
    let source = String::from_utf8_lossy(&bytes);

    let selected: Vec<(Adapter, &InspectorConfig)> = configs
        .iter()
        .filter(|c| c.enabled)
        .filter_map(|c| Adapter::from_name(&c.inspector).map(|a| (a, c)))
        .filter(|(a, _)| a.language() == language)
        .collect();

    // Each tool runs on its own thread; results are gathered in config order.
    let external: Vec<(Vec<RawFinding>, Vec<String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&(adapter, cfg)| scope.spawn(move || run_adapter(adapter, source_path, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| (vec![], vec!["inspector thread panicked".to_string()]))
            })
            .collect()
    });

    let mut raw = baseline::run_all(&source, language, baseline_rules);
    let mut warnings = Vec::new();
    for (findings, w) in external {
        raw.extend(findings);
        warnings.extend(w);
    }

    let mut seen = HashSet::new();
    let mut issues: Vec<Issue> = raw
        .iter()
        .filter_map(|f| classify_issue(f, registry))
        .filter(|i| seen.insert((i.inspector.clone(), i.rule_id.clone(), i.line, i.column)))
        .collect();
    issues.sort_by(|a, b| {
        (a.line, a.column, &a.rule_id, &a.inspector, &a.message).cmp(&(
            b.line,
            b.column,
            &b.rule_id,
            &b.inspector,
            &b.message,
        ))
    });
    Ok(Inspection { issues, warnings })
}

fn run_adapter(
    adapter: Adapter,
    source: &Path,
    cfg: &InspectorConfig,
) -> (Vec<RawFinding>, Vec<String>) {
    let output = match run_inspector(source, cfg) {
        Ok(output) => output,
        Err(err) => return (vec![], vec![format!("{err}; inspection skipped")]),
    };
    if output.stdout.trim().is_empty() {
        if output.exit_status != 0 {
            let detail = output
                .stderr
                .lines()
                .next()
                .unwrap_or("")
                .trim()
                .to_string();
            return (
                vec![],
                vec![format!(
                    "{}: exited with status {} without output{}",
                    adapter.name(),
                    output.exit_status,
                    if detail.is_empty() {
                        String::new()
                    } else {
                        format!(": {detail}")
                    }
                )],
            );
        }
        return (vec![], vec![]);
    }
    match adapter.parse(&output.stdout) {
        Ok(parsed) => (parsed.findings, parsed.warnings),
        Err(err) => (
            vec![],
            vec![format!("{}: {err}; inspection skipped", adapter.name())],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configs_cover_all_adapters() {
        let configs = InspectorConfig::defaults();
        for adapter in Adapter::ALL {
            assert!(configs.iter().any(|c| c.inspector == adapter.name()));
        }
        assert!(configs.iter().all(|c| c.timeout > Duration::ZERO));
    }

    #[test]
    fn config_validation() {
        let bad_timeout =
            "[[inspectors]]\ninspector = \"flake8\"\nexecutable = \"flake8\"\ntimeout_secs = 0\n";
        assert!(matches!(
            InspectorConfig::parse_file(bad_timeout),
            Err(ConfigError::Invalid(_))
        ));
        let unknown =
            "[[inspectors]]\ninspector = \"eslint\"\nexecutable = \"eslint\"\ntimeout_secs = 5\n";
        assert!(matches!(
            InspectorConfig::parse_file(unknown),
            Err(ConfigError::Invalid(_))
        ));
        assert!(InspectorConfig::parse_file("[[inspectors]]\nbogus = 1\n").is_err());
    }

    #[test]
    fn pmd_args_put_source_after_d() {
        let args = Adapter::Pmd.command_args(Path::new("A.java"), &[]);
        assert_eq!(&args[args.len() - 2..], ["-d", "A.java"]);
        assert!(args.contains(&"xml".to_string()));
        let args = Adapter::Pylint.command_args(Path::new("a.py"), &["--disable=C".into()]);
        assert_eq!(
            args,
            [
                "--output-format=json",
                "--persistent=n",
                "--disable=C",
                "a.py"
            ]
        );
    }

    #[test]
    fn missing_source() {
        let reg = RuleRegistry::default_for("python").unwrap();
        let err = inspect(Path::new("/definitely/not/here.py"), "python", &reg, &[]).unwrap_err();
        assert!(matches!(err, InspectError::SourceNotFound(_)));
    }

    #[test]
    fn missing_tools_degrade_to_warnings() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.py");
        std::fs::write(&src, "x = 1 \n").unwrap();
        let reg = RuleRegistry::default_for("python").unwrap();
        let configs: Vec<_> = ["flake8", "pylint"]
            .iter()
            .map(|name| InspectorConfig {
                inspector: name.to_string(),
                executable: format!("/nonexistent/{name}"),
                extra_args: vec![],
                timeout: Duration::from_secs(5),
                enabled: true,
            })
            .collect();
        let out = inspect(&src, "python", &reg, &configs).unwrap();
        assert_eq!(out.warnings.len(), 2);
        assert!(out.warnings[0].starts_with("flake8"));
        assert_eq!(out.issues.len(), 1);
        assert_eq!(out.issues[0].rule_id, "BL002");
    }

    #[test]
    fn empty_file_has_no_issues() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.py");
        std::fs::write(&src, "").unwrap();
        let reg = RuleRegistry::default_for("python").unwrap();
        let out = inspect(&src, "python", &reg, &[]).unwrap();
        assert!(out.issues.is_empty());
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn other_language_tools_are_not_run() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("A.java");
        std::fs::write(&src, "class A {}\n").unwrap();
        let reg = RuleRegistry::default_for("java").unwrap();
        let configs = vec![InspectorConfig {
            inspector: "flake8".into(),
            executable: "/nonexistent".into(),
            extra_args: vec![],
            timeout: Duration::from_secs(1),
            enabled: true,
        }];
        let out = inspect(&src, "java", &reg, &configs).unwrap();
        assert!(out.warnings.is_empty());
    }
}
