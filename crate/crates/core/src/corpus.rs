//! Corpus-level analytics: per-student median issue counts and
//! per-subcategory distributions used to calibrate thresholds.
//!
//! A corpus is a directory of `<student_id>/<submission>.<ext>` files. A
//! student directory may contain an `order.txt` listing submission file
//! names in order; otherwise files are taken in lexicographic order.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use chrono::Utc;
use rayon::prelude::*;
use serde::Serialize;

use crate::grading::SubcategoryTally;
use crate::history::HistoryStore;
use crate::penalty::SubmissionRecord;
use crate::report::{GradingEngine, StudentHistory};
use crate::taxonomy::{Difficulty, Grade, SubcategoryKind};

pub const ORDER_MANIFEST: &str = "order.txt";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus directory not found: {0}")]
    RootMissing(String),
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentCorpus {
    pub student_id: String,
    pub submissions: Vec<PathBuf>,
}

pub fn language_for_extension(path: &Path) -> Option<&'static str> {
    match path.extension()?.to_str()? {
        "py" => Some("python"),
        "java" => Some("java"),
        _ => None,
    }
}

/// Lists students (sorted by id) and their submissions in submission order.
/// Files with unsupported extensions are ignored.
pub fn discover(root: &Path) -> Result<(Vec<StudentCorpus>, Vec<String>), CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::RootMissing(root.display().to_string()));
    }
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CorpusError::Io { path, source }
    };
    let mut warnings = Vec::new();
    let mut students = Vec::new();
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
        .map_err(io(root))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();

    for dir in dirs {
        let Some(student_id) = dir.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
            warnings.push(format!(
                "skipped non-UTF-8 student directory {}",
                dir.display()
            ));
            continue;
        };
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(io(&dir))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file() && language_for_extension(p).is_some())
            .collect();
        files.sort();

        let manifest = dir.join(ORDER_MANIFEST);
        if manifest.is_file() {
            let text = std::fs::read_to_string(&manifest).map_err(io(&manifest))?;
            let mut ordered = Vec::new();
            for name in text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
            {
                let path = dir.join(name);
                match files.iter().position(|f| f == &path) {
                    Some(pos) => ordered.push(files.remove(pos)),
                    None => warnings.push(format!(
                        "{student_id}: {ORDER_MANIFEST} lists unknown submission `{name}`"
                    )),
                }
            }
            // unlisted submissions follow in lexicographic order
            ordered.extend(files);
            files = ordered;
        }
        students.push(StudentCorpus {
            student_id,
            submissions: files,
        });
    }
    Ok((students, warnings))
}

/// Lower median: for an even number of values, the smaller middle one.
pub fn lower_median(values: &[usize]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    Some(sorted[(sorted.len() - 1) / 2])
}

/// Engines keyed by language.
pub type Engines = HashMap<String, GradingEngine>;

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub level: Difficulty,
    /// Thread each student's history through the penalty step.
    pub use_history: bool,
    /// Persist history here instead of keeping it in memory.
    pub store: Option<HistoryStore>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            level: Difficulty::Hard,
            use_history: true,
            store: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmissionOutcome {
    pub student_id: String,
    pub file: String,
    pub grade: Grade,
    pub pre_penalty_grade: Grade,
    pub issue_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyEntry {
    pub value: f64,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubcategoryDistribution {
    pub kind: SubcategoryKind,
    pub submissions: usize,
    /// Issue counts (countable) or worst metric values (measurable, 0 when
    /// absent) per submission.
    pub frequencies: Vec<FrequencyEntry>,
    /// Fraction of submissions in each grade band.
    pub bands: BTreeMap<Grade, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub per_student_median: BTreeMap<String, usize>,
    /// Median issue count -> number of students with that median.
    pub histogram: BTreeMap<usize, usize>,
    pub per_subcategory_distribution: BTreeMap<String, SubcategoryDistribution>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BatchResult {
    pub submissions: Vec<SubmissionOutcome>,
    pub stats: CorpusStats,
    pub warnings: Vec<String>,
}

struct Graded {
    outcome: SubmissionOutcome,
    tallies: Vec<SubcategoryTally>,
    language: String,
}

fn relative(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .display()
        .to_string()
}

fn grade_student(
    root: &Path,
    student: &StudentCorpus,
    engines: &Engines,
    opts: &BatchOptions,
) -> (Vec<Graded>, Vec<String>) {
    let mut graded = Vec::new();
    let mut warnings = Vec::new();
    let mut memory: HashMap<String, Vec<SubmissionRecord>> = HashMap::new();

    for path in &student.submissions {
        let file = relative(root, path);
        let Some(engine) = language_for_extension(path).and_then(|l| engines.get(l)) else {
            warnings.push(format!("{file}: no engine for this language; skipped"));
            continue;
        };
        let language = engine.language().to_string();
        let result = match (&opts.store, opts.use_history) {
            (_, false) => engine.grade_with_records(path, opts.level, None),
            (Some(store), true) => {
                let ctx = StudentHistory {
                    store,
                    student_id: &student.student_id,
                };
                engine.build_report_with_analysis(path, opts.level, Some(ctx))
            }
            (None, true) => {
                let history = memory.entry(language.clone()).or_default();
                engine
                    .grade_with_records(path, opts.level, Some(history))
                    .inspect(|(_, analysis)| {
                        history.insert(
                            0,
                            SubmissionRecord::from_issues(
                                &student.student_id,
                                &language,
                                Utc::now(),
                                &analysis.all_issues,
                            ),
                        );
                    })
            }
        };
        match result {
            Ok((report, analysis)) => {
                warnings.extend(report.warnings.iter().map(|w| format!("{file}: {w}")));
                graded.push(Graded {
                    outcome: SubmissionOutcome {
                        student_id: student.student_id.clone(),
                        file,
                        grade: report.grade,
                        pre_penalty_grade: report.pre_penalty_grade,
                        issue_count: report.issues.len(),
                    },
                    tallies: analysis.tallies,
                    language,
                });
            }
            Err(err) => warnings.push(format!("{file}: {err}; skipped")),
        }
    }
    (graded, warnings)
}

/// Grades every submission, students in parallel and each student's
/// submissions in order.
pub fn run_batch(
    root: &Path,
    engines: &Engines,
    opts: &BatchOptions,
) -> Result<BatchResult, CorpusError> {
    let (students, mut warnings) = discover(root)?;
    let per_student: Vec<(Vec<Graded>, Vec<String>)> = students
        .par_iter()
        .map(|s| grade_student(root, s, engines, opts))
        .collect();

    let mut result = BatchResult::default();
    let mut all = Vec::new();
    for (student, (graded, w)) in students.iter().zip(per_student) {
        warnings.extend(w);
        let counts: Vec<usize> = graded.iter().map(|g| g.outcome.issue_count).collect();
        if let Some(median) = lower_median(&counts) {
            result
                .stats
                .per_student_median
                .insert(student.student_id.clone(), median);
            *result.stats.histogram.entry(median).or_insert(0) += 1;
        }
        all.extend(graded);
    }
    result.stats.per_subcategory_distribution = distribution_of(&all, engines);
    result.submissions = all.into_iter().map(|g| g.outcome).collect();
    result.warnings = warnings;
    Ok(result)
}

/// Per-subcategory frequency tables over all submissions, graded at the
/// `HARD` level with no penalty.
pub fn run_distribution(
    root: &Path,
    engines: &Engines,
) -> Result<(BTreeMap<String, SubcategoryDistribution>, Vec<String>), CorpusError> {
    let opts = BatchOptions {
        level: Difficulty::Hard,
        use_history: false,
        store: None,
    };
    let (students, mut warnings) = discover(root)?;
    let graded: Vec<(Vec<Graded>, Vec<String>)> = students
        .par_iter()
        .map(|s| grade_student(root, s, engines, &opts))
        .collect();
    let mut all = Vec::new();
    for (g, w) in graded {
        all.extend(g);
        warnings.extend(w);
    }
    Ok((distribution_of(&all, engines), warnings))
}

fn distribution_of(
    graded: &[Graded],
    engines: &Engines,
) -> BTreeMap<String, SubcategoryDistribution> {
    let mut values: BTreeMap<String, (SubcategoryKind, Vec<f64>, Vec<Grade>)> = BTreeMap::new();
    for g in graded {
        let Some(engine) = engines.get(&g.language) else {
            continue;
        };
        for spec in engine.registry().subcategories() {
            let tally = g
                .tallies
                .iter()
                .find(|t| t.subcategory_id == spec.subcategory_id);
            let value = match (spec.kind, tally) {
                (_, None) => 0.0,
                (SubcategoryKind::Countable, Some(t)) => t.count as f64,
                (SubcategoryKind::Measurable, Some(t)) => t.worst_metric.unwrap_or(t.count as f64),
            };
            let grade = tally.map_or(Grade::Excellent, |t| t.grade);
            let entry = values
                .entry(spec.subcategory_id.clone())
                .or_insert_with(|| (spec.kind, Vec::new(), Vec::new()));
            entry.1.push(value);
            entry.2.push(grade);
        }
    }

    values
        .into_iter()
        .map(|(id, (kind, mut vals, grades))| {
            vals.sort_by(f64::total_cmp);
            let mut frequencies: Vec<FrequencyEntry> = Vec::new();
            for v in vals {
                match frequencies.last_mut() {
                    Some(last) if last.value == v => last.frequency += 1,
                    _ => frequencies.push(FrequencyEntry {
                        value: v,
                        frequency: 1,
                    }),
                }
            }
            let n = grades.len();
            let bands = Grade::ALL
                .iter()
                .rev()
                .map(|band| {
                    let k = grades.iter().filter(|g| *g == band).count();
                    (*band, if n == 0 { 0.0 } else { k as f64 / n as f64 })
                })
                .collect();
            (
                id,
                SubcategoryDistribution {
                    kind,
                    submissions: n,
                    frequencies,
                    bands,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_median_examples() {
        assert_eq!(lower_median(&[0, 1, 3]), Some(1));
        assert_eq!(lower_median(&[2, 4]), Some(2));
        assert_eq!(lower_median(&[4, 2]), Some(2));
        assert_eq!(lower_median(&[7]), Some(7));
        assert_eq!(lower_median(&[]), None);
    }

    #[test]
    fn discovery_honours_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let s = dir.path().join("s1");
        std::fs::create_dir(&s).unwrap();
        for name in ["a.py", "b.py", "c.py", "notes.txt"] {
            std::fs::write(s.join(name), "").unwrap();
        }
        std::fs::write(s.join(ORDER_MANIFEST), "c.py\nmissing.py\na.py\n").unwrap();
        let (students, warnings) = discover(dir.path()).unwrap();
        let names: Vec<_> = students[0]
            .submissions
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["c.py", "a.py", "b.py"]);
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            discover(&dir.path().join("nope")),
            Err(CorpusError::RootMissing(_))
        ));
    }
}
