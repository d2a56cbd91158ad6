//! Built-in, tool-free checks (rules `BL001`..`BL005`).
//!
//! Function detection and string/comment masking are heuristics: Python
//! functions are found by `def` headers and indentation, Java methods by
//! header shape and brace balance. Neither is a parser.

use std::sync::OnceLock;

use regex::Regex;

use crate::inspectors::RawFinding;

pub const INSPECTOR: &str = "baseline";
pub const LINE_LENGTH: &str = "BL001";
pub const TRAILING_WHITESPACE: &str = "BL002";
pub const BLANK_RUN: &str = "BL003";
pub const FUNCTION_LENGTH: &str = "BL004";
pub const BOOL_LITERAL_COMPARISON: &str = "BL005";

const TAB_WIDTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineRuleSet {
    pub max_line_length: usize,
    pub max_function_lines: usize,
    pub max_consecutive_blank_lines: usize,
}

impl Default for BaselineRuleSet {
    fn default() -> Self {
        Self {
            max_line_length: 120,
            max_function_lines: 40,
            max_consecutive_blank_lines: 2,
        }
    }
}

impl BaselineRuleSet {
    /// `None` if any limit is zero.
    pub fn new(
        max_line_length: usize,
        max_function_lines: usize,
        max_blank: usize,
    ) -> Option<Self> {
        (max_line_length >= 1 && max_function_lines >= 1 && max_blank >= 1).then_some(Self {
            max_line_length,
            max_function_lines,
            max_consecutive_blank_lines: max_blank,
        })
    }
}

fn finding(
    rule: &str,
    line: usize,
    column: usize,
    message: String,
    metric: Option<f64>,
) -> RawFinding {
    RawFinding {
        inspector: INSPECTOR.into(),
        rule_id: rule.into(),
        line: line as u32,
        column: column as u32,
        message,
        metric_value: metric,
    }
}

fn width(text: &str) -> usize {
    text.chars()
        .map(|c| if c == '\t' { TAB_WIDTH } else { 1 })
        .sum()
}

fn indent_width(line: &str) -> usize {
    width(&line[..line.len() - line.trim_start().len()])
}

pub fn check_line_length(source: &str, limit: usize) -> Vec<RawFinding> {
    source
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let len = width(line);
            (len > limit).then(|| {
                finding(
                    LINE_LENGTH,
                    i + 1,
                    limit + 1,
                    format!("line too long ({len} > {limit} characters)"),
                    Some(len as f64),
                )
            })
        })
        .collect()
}

pub fn check_trailing_whitespace(source: &str) -> Vec<RawFinding> {
    source
        .lines()
        .enumerate()
        .filter(|(_, line)| line.ends_with([' ', '\t']))
        .map(|(i, line)| {
            let kept = line.trim_end_matches([' ', '\t']).chars().count();
            finding(
                TRAILING_WHITESPACE,
                i + 1,
                kept + 1,
                "trailing whitespace".into(),
                None,
            )
        })
        .collect()
}

pub fn check_blank_runs(source: &str, limit: usize) -> Vec<RawFinding> {
    let mut out = Vec::new();
    let mut run_start = None;
    let mut run_len = 0usize;
    let flush = |start: Option<usize>, len: usize, out: &mut Vec<RawFinding>| {
        if let Some(start) = start {
            if len > limit {
                out.push(finding(
                    BLANK_RUN,
                    start,
                    1,
                    format!("too many blank lines ({len} > {limit})"),
                    None,
                ));
            }
        }
    };
    for (i, line) in source.lines().enumerate() {
        if line.trim().is_empty() {
            if run_start.is_none() {
                run_start = Some(i + 1);
            }
            run_len += 1;
        } else {
            flush(run_start.take(), run_len, &mut out);
            run_len = 0;
        }
    }
    flush(run_start, run_len, &mut out);
    out
}

/// One source line with string literals and comments blanked out.
/// Characters map one-to-one onto the original line.
#[derive(Debug, Clone, PartialEq)]
struct MaskedLine {
    code: String,
    starts_in_string: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Lex {
    Code,
    Str { quote: char, triple: bool },
    Char,
    BlockComment,
}

fn mask_source(source: &str, language: &str) -> Vec<MaskedLine> {
    let java = language == "java";
    let mut state = Lex::Code;
    let mut out = Vec::new();
    for line in source.lines() {
        let starts_in_string = matches!(state, Lex::Str { triple: true, .. });
        let chars: Vec<char> = line.chars().collect();
        let mut code = String::with_capacity(line.len());
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let next = chars.get(i + 1).copied();
            match state {
                Lex::Code => {
                    let triple = next == Some(c) && chars.get(i + 2) == Some(&c);
                    if (!java && c == '#') || (java && c == '/' && next == Some('/')) {
                        code.extend(std::iter::repeat_n(' ', chars.len() - i));
                        break;
                    } else if java && c == '/' && next == Some('*') {
                        state = Lex::BlockComment;
                        code.push_str("  ");
                        i += 2;
                        continue;
                    } else if c == '"' || (!java && c == '\'') {
                        let triple = triple && (c == '"' || !java);
                        state = Lex::Str { quote: c, triple };
                        let n = if triple { 3 } else { 1 };
                        code.extend(std::iter::repeat_n(' ', n));
                        i += n;
                        continue;
                    } else if java && c == '\'' {
                        state = Lex::Char;
                        code.push(' ');
                    } else {
                        code.push(c);
                    }
                }
                Lex::Str { quote, triple } => {
                    if c == '\\' {
                        code.push(' ');
                        if next.is_some() {
                            code.push(' ');
                            i += 1;
                        }
                    } else if c == quote
                        && (!triple || (next == Some(quote) && chars.get(i + 2) == Some(&quote)))
                    {
                        let n = if triple { 3 } else { 1 };
                        code.extend(std::iter::repeat_n(' ', n));
                        state = Lex::Code;
                        i += n;
                        continue;
                    } else {
                        code.push(' ');
                    }
                }
                Lex::Char => {
                    if c == '\\' {
                        code.push(' ');
                        if next.is_some() {
                            code.push(' ');
                            i += 1;
                        }
                    } else {
                        if c == '\'' {
                            state = Lex::Code;
                        }
                        code.push(' ');
                    }
                }
                Lex::BlockComment => {
                    if c == '*' && next == Some('/') {
                        code.push_str("  ");
                        state = Lex::Code;
                        i += 2;
                        continue;
                    }
                    code.push(' ');
                }
            }
            i += 1;
        }
        // Only triple-quoted strings and block comments span lines.
        if matches!(state, Lex::Str { triple: false, .. } | Lex::Char) {
            state = Lex::Code;
        }
        out.push(MaskedLine {
            code,
            starts_in_string,
        });
    }
    out
}

pub fn check_bool_literal_comparison(source: &str, language: &str) -> Vec<RawFinding> {
    static PY: OnceLock<Regex> = OnceLock::new();
    static JAVA: OnceLock<Regex> = OnceLock::new();
    let (re, literals) = match language {
        "python" => (
            PY.get_or_init(|| {
                Regex::new(r"\b(True|False)\s*(?:==|!=)|(?:==|!=)\s*(True|False)\b").unwrap()
            }),
            "True/False",
        ),
        "java" => (
            JAVA.get_or_init(|| {
                Regex::new(r"\b(true|false)\s*(?:==|!=)|(?:==|!=)\s*(true|false)\b").unwrap()
            }),
            "true/false",
        ),
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    for (i, line) in mask_source(source, language).iter().enumerate() {
        for m in re.captures_iter(&line.code) {
            let whole = m.get(0).unwrap();
            let literal = m
                .get(1)
                .or_else(|| m.get(2))
                .map_or(literals, |l| l.as_str());
            let column = line.code[..whole.start()].chars().count() + 1;
            out.push(finding(
                BOOL_LITERAL_COMPARISON,
                i + 1,
                column,
                format!("comparison to {literal} should use the boolean value directly"),
                None,
            ));
        }
    }
    out
}

pub fn check_function_length(source: &str, language: &str, limit: usize) -> Vec<RawFinding> {
    let masked = mask_source(source, language);
    let raw: Vec<&str> = source.lines().collect();
    let functions = match language {
        "python" => python_functions(&masked, &raw),
        "java" => java_methods(&masked, &raw),
        _ => return Vec::new(),
    };
    functions
        .into_iter()
        .filter(|f| f.body_lines > limit)
        .map(|f| {
            finding(
                FUNCTION_LENGTH,
                f.line,
                f.column,
                format!(
                    "function `{}` is too long ({} > {limit} non-blank lines)",
                    f.name, f.body_lines
                ),
                Some(f.body_lines as f64),
            )
        })
        .collect()
}

#[derive(Debug)]
struct FunctionSpan {
    name: String,
    line: usize,
    column: usize,
    body_lines: usize,
}

fn bracket_delta(code: &str) -> i64 {
    code.chars()
        .map(|c| match c {
            '(' | '[' | '{' => 1,
            ')' | ']' | '}' => -1,
            _ => 0,
        })
        .sum()
}

fn python_functions(masked: &[MaskedLine], raw: &[&str]) -> Vec<FunctionSpan> {
    static DEF: OnceLock<Regex> = OnceLock::new();
    let def = DEF.get_or_init(|| Regex::new(r"^\s*(?:async\s+)?def\s+(\w+)").unwrap());
    let mut out = Vec::new();
    for (i, line) in masked.iter().enumerate() {
        if line.starts_in_string {
            continue;
        }
        let Some(caps) = def.captures(&line.code) else {
            continue;
        };
        let indent = indent_width(raw[i]);

        // The header may continue over several lines while brackets are open.
        let mut depth = 0i64;
        let mut header_end = i;
        for (j, l) in masked.iter().enumerate().skip(i) {
            depth += bracket_delta(&l.code);
            header_end = j;
            if depth <= 0 {
                break;
            }
        }
        let inline_body = masked[header_end]
            .code
            .trim_end()
            .rsplit_once(':')
            .is_some_and(|(_, rest)| !rest.trim().is_empty());

        let mut body = usize::from(inline_body);
        if !inline_body {
            for (j, l) in masked.iter().enumerate().skip(header_end + 1) {
                let text = raw[j];
                if text.trim().is_empty() {
                    continue;
                }
                let comment_only = l.code.trim().is_empty() && !l.starts_in_string;
                let deeper = indent_width(text) > indent;
                if l.starts_in_string || deeper {
                    body += 1;
                } else if !comment_only {
                    break;
                }
            }
        }
        out.push(FunctionSpan {
            name: caps[1].to_string(),
            line: i + 1,
            column: indent + 1,
            body_lines: body,
        });
    }
    out
}

const JAVA_NOT_NAMES: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "synchronized",
    "return",
    "new",
    "else",
    "do",
    "try",
    "throw",
    "case",
    "assert",
    "super",
    "this",
    "yield",
];
const JAVA_NOT_TYPES: &[&str] = &[
    "return", "new", "else", "throw", "case", "yield", "package", "import",
];

fn java_methods(masked: &[MaskedLine], raw: &[&str]) -> Vec<FunctionSpan> {
    static HEADER: OnceLock<Regex> = OnceLock::new();
    let header = HEADER.get_or_init(|| {
        Regex::new(
            r"^\s*(?P<mods>(?:(?:public|protected|private|static|final|abstract|synchronized|native|default|strictfp)\s+)*)(?:<[^()]*>\s*)?(?P<ret>[A-Za-z_$][\w$.]*(?:\s*<[^()]*>)?(?:\s*\[\s*\])*\s+)?(?P<name>[A-Za-z_$][\w$]*)\s*\(",
        )
        .unwrap()
    });
    let mut out = Vec::new();
    for (i, line) in masked.iter().enumerate() {
        let Some(caps) = header.captures(&line.code) else {
            continue;
        };
        let name = &caps["name"];
        let ret = caps.name("ret").map(|m| m.as_str().trim()).unwrap_or("");
        let has_mods = !caps["mods"].trim().is_empty();
        if JAVA_NOT_NAMES.contains(&name)
            || JAVA_NOT_TYPES.contains(&ret)
            || (!has_mods && ret.is_empty())
        {
            continue;
        }

        // Find the opening brace of the body; a `;` first means a declaration.
        let start_col = caps.get(0).unwrap().end();
        let mut open = None;
        'search: for (j, l) in masked.iter().enumerate().skip(i).take(12) {
            let text = if j == i {
                &l.code[start_col..]
            } else {
                l.code.as_str()
            };
            for c in text.chars() {
                match c {
                    '{' => {
                        open = Some(j);
                        break 'search;
                    }
                    ';' => break 'search,
                    _ => {}
                }
            }
        }
        let Some(open_line) = open else {
            continue;
        };

        let mut depth = 0i64;
        let mut close = None;
        'scan: for (j, l) in masked.iter().enumerate().skip(open_line) {
            let text = if j == i {
                &l.code[start_col..]
            } else {
                l.code.as_str()
            };
            for c in text.chars() {
                match c {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            close = Some(j);
                            break 'scan;
                        }
                    }
                    _ => {}
                }
            }
        }
        let close_line = close.unwrap_or(masked.len().saturating_sub(1));
        let body_lines = ((open_line + 1)..close_line)
            .filter(|&j| !raw[j].trim().is_empty())
            .count();
        out.push(FunctionSpan {
            name: name.to_string(),
            line: i + 1,
            column: indent_width(raw[i]) + 1,
            body_lines,
        });
    }
    out
}

/// Every baseline check applicable to `language`, in rule order.
pub fn run_all(source: &str, language: &str, rules: &BaselineRuleSet) -> Vec<RawFinding> {
    let mut out = check_line_length(source, rules.max_line_length);
    out.extend(check_trailing_whitespace(source));
    out.extend(check_blank_runs(source, rules.max_consecutive_blank_lines));
    out.extend(check_function_length(
        source,
        language,
        rules.max_function_lines,
    ));
    out.extend(check_bool_literal_comparison(source, language));
    out
}
