//! Golden tests for the linter output parsers.
//!
//! Each case under `fixtures/<tool>/<case>/` holds the analysed source, the
//! raw tool output and `expected.json`, the pretty-printed parse result.
//! Set `CODEGRADE_BLESS=1` to rewrite the expected files after an
//! intentional parser change.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use codegrade::inspectors::Adapter;
use common::{cases, check_adapter, raw_output_name};

#[test]
fn flake8_golden() {
    assert!(check_adapter(Adapter::Flake8) >= 3);
}

#[test]
fn pylint_golden() {
    assert!(check_adapter(Adapter::Pylint) >= 3);
}

#[test]
fn checkstyle_golden() {
    assert!(check_adapter(Adapter::Checkstyle) >= 3);
}

#[test]
fn pmd_golden() {
    assert!(check_adapter(Adapter::Pmd) >= 3);
}

/// Re-runs the real linters over the fixture sources and compares with the
/// committed raw outputs. Needs the tools from `fixtures/VERSIONS` on the
/// search path.
#[test]
#[ignore = "needs external linters"]
fn regenerate_raw_outputs() {
    for adapter in Adapter::ALL {
        let Some(exe) = codegrade::inspectors::resolve_executable(adapter.name()) else {
            eprintln!("{} not found; skipped", adapter.name());
            continue;
        };
        for case in cases(adapter) {
            let source = fs::read_dir(&case)
                .unwrap()
                .map(|e| e.unwrap().file_name().into_string().unwrap())
                .find(|n| n.starts_with("input.") || n.starts_with("Input."))
                .unwrap();
            let out = Command::new(&exe)
                .args(adapter.command_args(Path::new(&source), &[]))
                .current_dir(&case)
                .output()
                .unwrap();
            let committed = fs::read_to_string(case.join(raw_output_name(adapter))).unwrap();
            assert_eq!(
                String::from_utf8_lossy(&out.stdout),
                committed,
                "{} drifted",
                case.display()
            );
        }
    }
}
