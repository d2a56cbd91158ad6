use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;

use wait_timeout::ChildExt;

use super::{Adapter, InspectorConfig};

/// Directories searched for linter executables before `PATH`.
pub const TOOL_PATH_ENV: &str = "CODEGRADE_TOOL_PATH";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{inspector}: executable `{executable}` not found")]
    ToolNotFound {
        inspector: String,
        executable: String,
    },
    #[error("{inspector}: timed out after {seconds} s")]
    Timeout { inspector: String, seconds: u64 },
    #[error("{inspector}: failed to run: {source}")]
    SpawnFailure {
        inspector: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown inspector `{0}`")]
    UnknownInspector(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolOutput {
    pub stdout: String,
    pub stderr: String,
    /// Process exit code, `-1` when terminated by a signal.
    pub exit_status: i32,
}

/// Resolves a command name against `CODEGRADE_TOOL_PATH` and then `PATH`.
/// Names containing a path separator are taken as paths.
pub fn resolve_executable(executable: &str) -> Option<PathBuf> {
    resolve_executable_in(
        executable,
        std::env::var_os(TOOL_PATH_ENV),
        std::env::var_os("PATH"),
    )
}

pub fn resolve_executable_in(
    executable: &str,
    tool_path: Option<OsString>,
    path: Option<OsString>,
) -> Option<PathBuf> {
    if executable.is_empty() {
        return None;
    }
    let candidate = Path::new(executable);
    if candidate.components().count() > 1 || candidate.is_absolute() {
        return is_executable(candidate).then(|| candidate.to_path_buf());
    }
    [tool_path, path]
        .into_iter()
        .flatten()
        .flat_map(|dirs| std::env::split_paths(&dirs).collect::<Vec<_>>())
        .map(|dir| dir.join(executable))
        .find(|p| is_executable(p))
}

fn is_executable(path: &Path) -> bool {
    let Ok(meta) = path.metadata() else {
        return false;
    };
    if !meta.is_file() {
        return false;
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        meta.permissions().mode() & 0o111 != 0
    }
    #[cfg(not(unix))]
    {
        true
    }
}

/// Runs one linter on `source_path` with its canonical arguments plus the
/// configured extras. The child is killed once the timeout elapses.
pub fn run_inspector(source_path: &Path, cfg: &InspectorConfig) -> Result<ToolOutput, RunError> {
    let adapter = Adapter::from_name(&cfg.inspector)
        .ok_or_else(|| RunError::UnknownInspector(cfg.inspector.clone()))?;
    let program = resolve_executable(&cfg.executable).ok_or_else(|| RunError::ToolNotFound {
        inspector: cfg.inspector.clone(),
        executable: cfg.executable.clone(),
    })?;
    let spawn_err = |source| RunError::SpawnFailure {
        inspector: cfg.inspector.clone(),
        source,
    };

    let mut child = Command::new(&program)
        .args(adapter.command_args(source_path, &cfg.extra_args))
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(spawn_err)?;

    let stdout = child.stdout.take().map(drain);
    let stderr = child.stderr.take().map(drain);

    let status = match child.wait_timeout(cfg.timeout).map_err(spawn_err)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(RunError::Timeout {
                inspector: cfg.inspector.clone(),
                seconds: cfg.timeout.as_secs(),
            });
        }
    };

    let collect = |h: Option<thread::JoinHandle<Vec<u8>>>| {
        h.and_then(|h| h.join().ok())
            .map(|bytes| String::from_utf8_lossy(&bytes).into_owned())
            .unwrap_or_default()
    };
    Ok(ToolOutput {
        stdout: collect(stdout),
        stderr: collect(stderr),
        exit_status: status.code().unwrap_or(-1),
    })
}

fn drain(mut pipe: impl Read + Send + 'static) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = pipe.read_to_end(&mut buf);
        buf
    })
}
