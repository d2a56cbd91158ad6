//! Parsers for the output formats of the supported linters.

use std::sync::OnceLock;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use regex::Regex;
use serde::Serialize;
use serde_json::Value;

use super::RawFinding;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed {format} output: {message}")]
pub struct ParseError {
    pub format: &'static str,
    pub message: String,
}

impl ParseError {
    fn new(format: &'static str, message: impl Into<String>) -> Self {
        Self {
            format,
            message: message.into(),
        }
    }
}

/// Findings parsed from one tool run, plus non-fatal complaints about
/// entries that had to be skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Parsed {
    pub findings: Vec<RawFinding>,
    pub warnings: Vec<String>,
}

fn regex(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

fn parse_number(text: &str) -> Option<f64> {
    text.replace(',', "").parse().ok()
}

/// flake8 default format: `path:row:col: CODE message`.
pub fn parse_flake8(output: &str) -> Parsed {
    static LINE: OnceLock<Regex> = OnceLock::new();
    static METRIC: OnceLock<Regex> = OnceLock::new();
    let line_re = regex(
        &LINE,
        r"^(?P<path>.*?):(?P<row>\d+):(?P<col>\d+): (?P<code>[A-Z]+[0-9]+) (?P<text>.*)$",
    );
    // "(12)" for C901, "(104 > 79 characters)" for E501
    let metric_re = regex(&METRIC, r"\((?P<n>\d+(?:\.\d+)?)(?:\s*>[^)]*)?\)\s*$");

    let mut parsed = Parsed::default();
    for (n, raw_line) in output.lines().enumerate() {
        let text = raw_line.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let Some(caps) = line_re.captures(text) else {
            parsed
                .warnings
                .push(format!("flake8: skipped unparseable output line {}", n + 1));
            continue;
        };
        let row: u32 = caps["row"].parse().unwrap_or(0);
        if row == 0 {
            parsed.warnings.push(format!(
                "flake8: skipped finding without a line number on output line {}",
                n + 1
            ));
            continue;
        }
        let message = caps["text"].to_string();
        parsed.findings.push(RawFinding {
            inspector: "flake8".into(),
            rule_id: caps["code"].to_string(),
            line: row,
            column: caps["col"].parse().unwrap_or(0),
            metric_value: metric_re
                .captures(&message)
                .and_then(|c| parse_number(&c["n"])),
            message,
        });
    }
    parsed
}

/// pylint `--output-format=json`: an array of message records.
///
/// pylint columns are 0-based; they are shifted to 1-based so that 0 keeps
/// meaning "unknown" across all inspectors.
pub fn parse_pylint(output: &str) -> Result<Parsed, ParseError> {
    static METRIC: OnceLock<Regex> = OnceLock::new();
    // "(60/50)" for the too-many-* family
    let metric_re = regex(&METRIC, r"\((?P<n>\d+(?:\.\d+)?)/\d+(?:\.\d+)?\)\s*$");

    let doc: Value =
        serde_json::from_str(output).map_err(|e| ParseError::new("pylint", e.to_string()))?;
    let records = match &doc {
        Value::Array(items) => items,
        // json2 output wraps the array in an object
        Value::Object(map) => match map.get("messages") {
            Some(Value::Array(items)) => items,
            _ => return Err(ParseError::new("pylint", "expected an array of messages")),
        },
        _ => return Err(ParseError::new("pylint", "expected an array of messages")),
    };

    let mut parsed = Parsed::default();
    for (i, record) in records.iter().enumerate() {
        let Some(obj) = record.as_object() else {
            parsed
                .warnings
                .push(format!("pylint: skipped record {i}: not an object"));
            continue;
        };
        let field = |names: &[&str]| names.iter().find_map(|n| obj.get(*n));
        let rule_id = field(&["message-id", "messageId", "symbol"])
            .and_then(Value::as_str)
            .filter(|s| !s.is_empty());
        let line = field(&["line"]).and_then(Value::as_u64).filter(|&l| l >= 1);
        let (Some(rule_id), Some(line)) = (rule_id, line) else {
            parsed.warnings.push(format!(
                "pylint: skipped record {i}: missing message id or line"
            ));
            continue;
        };
        let column = field(&["column"])
            .and_then(Value::as_u64)
            .map(|c| c + 1)
            .unwrap_or(0);
        let message = field(&["message"])
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        parsed.findings.push(RawFinding {
            inspector: "pylint".into(),
            rule_id: rule_id.to_string(),
            line: u32::try_from(line).unwrap_or(u32::MAX),
            column: u32::try_from(column).unwrap_or(u32::MAX),
            metric_value: metric_re
                .captures(&message)
                .and_then(|c| parse_number(&c["n"])),
            message,
        });
    }
    Ok(parsed)
}

struct Attributes(Vec<(String, String)>);

impl Attributes {
    fn read(element: &BytesStart<'_>, format: &'static str) -> Result<Self, ParseError> {
        let mut out = Vec::new();
        for attr in element.attributes() {
            let attr = attr.map_err(|e| ParseError::new(format, e.to_string()))?;
            let key = attr.key.as_ref().to_string();
            let value = attr
                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                .map_err(|e| ParseError::new(format, e.to_string()))?
                .into_owned();
            out.push((key, value));
        }
        Ok(Self(out))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn number(&self, key: &str) -> Option<u32> {
        self.get(key).and_then(|v| v.trim().parse().ok())
    }
}

/// Walks an XML document, handing every element start (including empty
/// elements) and text node to the visitor. Fails on malformed or truncated
/// documents, and on documents without a root element.
fn walk_xml(
    input: &str,
    format: &'static str,
    mut visit: impl FnMut(XmlEvent<'_>) -> Result<(), ParseError>,
) -> Result<(), ParseError> {
    let mut reader = Reader::from_str(input);
    let mut depth = 0usize;
    let mut saw_root = false;
    loop {
        let event = reader.read_event().map_err(|e| {
            ParseError::new(format, format!("{e} at byte {}", reader.buffer_position()))
        })?;
        match event {
            Event::Start(e) => {
                depth += 1;
                saw_root = true;
                visit(XmlEvent::Open(&e, false))?;
            }
            Event::Empty(e) => {
                saw_root = true;
                visit(XmlEvent::Open(&e, true))?;
            }
            Event::End(e) => {
                depth = depth.saturating_sub(1);
                let name = e.name().as_ref().to_string();
                visit(XmlEvent::Close(&name))?;
            }
            Event::Text(t) => {
                visit(XmlEvent::Text(&t.xml10_content()))?;
            }
            Event::GeneralRef(r) => {
                let entity = format!("&{};", r.into_inner());
                let text = quick_xml::escape::unescape(&entity)
                    .map_err(|e| ParseError::new(format, e.to_string()))?;
                visit(XmlEvent::Text(&text))?;
            }
            Event::CData(t) => {
                visit(XmlEvent::Text(&t.xml10_content()))?;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !saw_root {
        return Err(ParseError::new(format, "document has no root element"));
    }
    if depth != 0 {
        return Err(ParseError::new(format, "document is truncated"));
    }
    Ok(())
}

enum XmlEvent<'a> {
    Open(&'a BytesStart<'a>, bool),
    Close(&'a str),
    Text(&'a str),
}

fn local_name(element: &BytesStart<'_>) -> String {
    element.name().as_ref().to_string()
}

/// Checkstyle XML report. The rule id is the last dotted segment of the
/// `source` attribute.
pub fn parse_checkstyle(output: &str) -> Result<Parsed, ParseError> {
    static METRIC: OnceLock<Regex> = OnceLock::new();
    // "(found 112)", "Cyclomatic Complexity is 12 (max allowed is 10)"
    let metric_re = regex(&METRIC, r"\b(?:found|is)\s+(?P<n>\d[\d,]*(?:\.\d+)?)");

    let mut parsed = Parsed::default();
    let mut index = 0usize;
    walk_xml(output, "checkstyle", |event| {
        let XmlEvent::Open(element, _) = event else {
            return Ok(());
        };
        if local_name(element) != "error" {
            return Ok(());
        }
        index += 1;
        let attrs = Attributes::read(element, "checkstyle")?;
        let Some(line) = attrs.number("line").filter(|&l| l >= 1) else {
            parsed.warnings.push(format!(
                "checkstyle: skipped error element {index}: missing line"
            ));
            return Ok(());
        };
        let Some(rule_id) = attrs
            .get("source")
            .and_then(|s| s.rsplit('.').next())
            .filter(|s| !s.is_empty())
        else {
            parsed.warnings.push(format!(
                "checkstyle: skipped error element {index}: missing source"
            ));
            return Ok(());
        };
        let message = attrs.get("message").unwrap_or_default().to_string();
        parsed.findings.push(RawFinding {
            inspector: "checkstyle".into(),
            rule_id: rule_id.to_string(),
            line,
            column: attrs.number("column").unwrap_or(0),
            metric_value: metric_re
                .captures(&message)
                .and_then(|c| parse_number(&c["n"])),
            message,
        });
        Ok(())
    })?;
    Ok(parsed)
}

/// PMD XML report. The message is the text content of each `violation`.
pub fn parse_pmd(output: &str) -> Result<Parsed, ParseError> {
    static METRIC: OnceLock<Regex> = OnceLock::new();
    // "has a cyclomatic complexity of 12", "an NPath complexity of 300"
    let metric_re = regex(&METRIC, r"complexity of (?P<n>\d[\d,]*(?:\.\d+)?)");

    struct Pending {
        rule_id: String,
        line: u32,
        column: u32,
        text: String,
    }

    fn finish_violation(parsed: &mut Parsed, p: Pending, metric_re: &Regex) {
        let message = p.text.trim().to_string();
        parsed.findings.push(RawFinding {
            inspector: "pmd".into(),
            rule_id: p.rule_id,
            line: p.line,
            column: p.column,
            metric_value: metric_re
                .captures(&message)
                .and_then(|c| parse_number(&c["n"])),
            message,
        });
    }

    let mut parsed = Parsed::default();
    let mut pending: Option<Pending> = None;
    let mut index = 0usize;
    walk_xml(output, "pmd", |event| {
        match event {
            XmlEvent::Open(element, empty) => {
                let name = local_name(element);
                match name.as_str() {
                    "violation" => {
                        index += 1;
                        let attrs = Attributes::read(element, "pmd")?;
                        let line = attrs.number("beginline").filter(|&l| l >= 1);
                        let rule = attrs.get("rule").filter(|r| !r.is_empty());
                        match (line, rule) {
                            (Some(line), Some(rule)) => {
                                let p = Pending {
                                    rule_id: rule.to_string(),
                                    line,
                                    column: attrs.number("begincolumn").unwrap_or(0),
                                    text: String::new(),
                                };
                                if empty {
                                    finish_violation(&mut parsed, p, metric_re);
                                } else {
                                    pending = Some(p);
                                }
                            }
                            _ => parsed.warnings.push(format!(
                                "pmd: skipped violation {index}: missing rule or beginline"
                            )),
                        }
                    }
                    "error" | "configerror" => {
                        let attrs = Attributes::read(element, "pmd")?;
                        let msg = attrs
                            .get("msg")
                            .or_else(|| attrs.get("message"))
                            .unwrap_or("unknown error");
                        parsed.warnings.push(format!("pmd: reported {name}: {msg}"));
                    }
                    _ => {}
                }
            }
            XmlEvent::Text(text) => {
                if let Some(p) = pending.as_mut() {
                    p.text.push_str(text);
                }
            }
            XmlEvent::Close(name) => {
                if name == "violation" {
                    if let Some(p) = pending.take() {
                        finish_violation(&mut parsed, p, metric_re);
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(parsed)
}
